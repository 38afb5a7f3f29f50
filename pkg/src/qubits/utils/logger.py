"""
Logging setup for qubits

All console output goes to stderr so stdout carries nothing but JSON reports.
"""

import logging
import re
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# numba's compiler logs every pass at DEBUG
NOISY_LOGGERS = ("numba",)

_SIZE_UNITS = {"B": 1, "KB": 1024, "MB": 1024 ** 2, "GB": 1024 ** 3}
_SIZE_PATTERN = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*([KMG]?B)?\s*$", re.IGNORECASE)

_loggers = {}


def setup_logging(
    log_level: str = "INFO",
    log_file: Optional[str] = None,
    max_size: str = "10MB",
    backup_count: int = 5,
    quiet: bool = False,
):
    """
    Configure the root logger for one CLI run

    Args:
        log_level: DEBUG, INFO, WARNING or ERROR
        log_file: also write a rotating log here
        max_size: rotation size such as "10MB"
        backup_count: rotated files to keep
        quiet: console shows warnings and errors only; the file still gets ``log_level``
    """
    level = getattr(logging, log_level.upper(), logging.INFO)
    formatter = logging.Formatter(LOG_FORMAT, DATE_FORMAT)

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    root_logger.handlers.clear()

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    console_handler.setLevel(max(level, logging.WARNING) if quiet else level)
    root_logger.addHandler(console_handler)

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = RotatingFileHandler(
            log_path,
            maxBytes=parse_size(max_size),
            backupCount=backup_count,
            encoding="utf-8",
        )
        file_handler.setFormatter(formatter)
        file_handler.setLevel(level)
        root_logger.addHandler(file_handler)

    for name in NOISY_LOGGERS:
        logging.getLogger(name).setLevel(max(level, logging.WARNING))
    # numpy RuntimeWarnings end up in the log instead of raw stderr
    logging.captureWarnings(True)


def get_logger(name: str) -> logging.Logger:
    """Logger for a module, usually called with ``__name__``"""
    if name not in _loggers:
        _loggers[name] = logging.getLogger(name)
    return _loggers[name]


def parse_size(size: str) -> int:
    """'10MB' -> bytes; a bare number is taken as MB, anything unreadable as 10MB"""
    match = _SIZE_PATTERN.match(str(size))
    if not match:
        return 10 * _SIZE_UNITS["MB"]
    number, unit = match.groups()
    return int(float(number) * _SIZE_UNITS[(unit or "MB").upper()])


class LoggerMixin:
    """Mixin class to add logging capabilities to any class"""

    @property
    def logger(self) -> logging.Logger:
        return get_logger(self.__class__.__module__ + "." + self.__class__.__name__)
