"""
Utility modules for the categorical morphology toolkit

Includes:
- logger: Logging configuration and timed operations
- config: Configuration management
"""

from .logger import setup_logger, get_logger, set_level, log_operation
from .config import Config, get_config

__all__ = [
    'setup_logger',
    'get_logger',
    'set_level',
    'log_operation',
    'Config',
    'get_config'
]
