import logging
import sys

from src.utils.settings import get_settings

_LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
_configured = False

def configure_logging(level: int = None) -> None:
    global _configured
    root = logging.getLogger("peace")
    root.setLevel(level if level is not None else get_settings().get_log_level())
    if not _configured:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(_LOG_FORMAT))
        root.addHandler(handler)
        root.propagate = False
        _configured = True

def get_logger(name: str) -> logging.Logger:
    configure_logging()
    short = name[len("src."):] if name.startswith("src.") else name
    return logging.getLogger(f"peace.{short}")
