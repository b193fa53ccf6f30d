import platform
from pathlib import Path
from typing import Any, Dict, Iterable, Optional

import numpy as np
import pandas as pd
import torch

from src.utils.hashing import config_hash, file_digest, write_json

MANIFEST_VERSION = 1
MANIFEST_NAME = "manifest.json"

def library_versions() -> Dict[str, str]:
    return {
        "python": platform.python_version(),
        "torch": torch.__version__,
        "numpy": np.__version__,
        "pandas": pd.__version__,
    }

def build_manifest(
    command: str,
    config: Dict[str, Any],
    seed: int,
    outputs: Iterable[Path],
    run_dir: Path,
    extra: Optional[Dict[str, Any]] = None
) -> Dict[str, Any]:
    run_dir = Path(run_dir)
    digests = {}
    for path in sorted(Path(p) for p in outputs):
        if path.name == MANIFEST_NAME or not path.is_file():
            continue
        digests[path.relative_to(run_dir).as_posix()] = file_digest(path)

    manifest = {
        "manifest_version": MANIFEST_VERSION,
        "command": command,
        "config_hash": config_hash(config),
        "seed": seed,
        "versions": library_versions(),
        "outputs": digests,
    }
    if extra:
        manifest["extra"] = extra
    return manifest

def write_run_manifest(
    run_dir: Path,
    command: str,
    config: Dict[str, Any],
    seed: int,
    extra: Optional[Dict[str, Any]] = None
) -> Path:
    run_dir = Path(run_dir)
    outputs = [p for p in run_dir.rglob("*") if p.is_file()]
    manifest = build_manifest(command, config, seed, outputs, run_dir, extra)
    return write_json(manifest, run_dir / MANIFEST_NAME)
