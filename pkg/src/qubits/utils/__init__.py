"""
Utils package initialization
"""

from .logger import get_logger, setup_logging, LoggerMixin
from .config import Config
from .errors import QubitsError, InputError, ComputationError

__all__ = [
    'get_logger', 'setup_logging', 'LoggerMixin', 'Config',
    'QubitsError', 'InputError', 'ComputationError'
]
