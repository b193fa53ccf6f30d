import sys
from pathlib import Path

import pytest

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.utils.settings import get_settings

def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale training runs (deselect with -m 'not slow')")

@pytest.fixture
def output_root(tmp_path, monkeypatch):
    """Points PEACE_OUTPUT_ROOT at a scratch directory for the duration of a test."""
    root = tmp_path / "runs"
    monkeypatch.setenv("PEACE_OUTPUT_ROOT", str(root))
    get_settings.cache_clear()
    yield root
    get_settings.cache_clear()
