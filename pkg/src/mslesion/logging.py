"""Logging configuration for mslesion."""

from __future__ import annotations

import logging

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
_ROOT = "mslesion"


def setup_logging(*, verbose: bool = False) -> None:
    """Configure logging for the application."""
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(format=LOG_FORMAT, level=level)
    logging.getLogger(_ROOT).setLevel(level)


def get_logger(name: str) -> logging.Logger:
    """Get a logger with the mslesion namespace (module ``__name__`` is accepted as is)."""
    if name == _ROOT or name.startswith(f"{_ROOT}."):
        return logging.getLogger(name)
    return logging.getLogger(f"{_ROOT}.{name}")
