"""
Logging utilities for the categorical morphology toolkit

Every module logs under one "catmorph" hierarchy: get_logger("pipeline")
returns the "catmorph.pipeline" logger, and only the "catmorph" root carries
handlers. Changing the level of the root (CLI --log-level, LOG_LEVEL) changes
it for every module.

Usage:
    from utils.logger import get_logger

    logger = get_logger(__name__)
    logger.debug("dilate_i(i=%d) on %s", 2, (48, 48))

    with log_operation(logger, "step 0: open", category=2, radius=1.0) as ctx:
        run_step()
    print(ctx.duration)
"""

import logging
import os
import sys
import time
from pathlib import Path
from typing import Optional

ROOT_LOGGER = "catmorph"

# Console lines stay short; the file handler records where a message came from
CONSOLE_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
FILE_FORMAT = "%(asctime)s %(levelname)s %(name)s %(filename)s:%(lineno)d: %(message)s"
DATE_FORMAT = "%H:%M:%S"

LEVEL_COLORS = {
    'DEBUG': '\033[36m',     # Cyan
    'INFO': '\033[32m',      # Green
    'WARNING': '\033[33m',   # Yellow
    'ERROR': '\033[31m',     # Red
    'CRITICAL': '\033[35m',  # Magenta
}
RESET = '\033[0m'


class ColoredFormatter(logging.Formatter):
    """Colours the level name when stderr is a terminal"""

    def __init__(self, fmt: str = CONSOLE_FORMAT, use_colors: bool = True):
        super().__init__(fmt, DATE_FORMAT)
        self.use_colors = use_colors and sys.stderr.isatty()

    def format(self, record: logging.LogRecord) -> str:
        if not self.use_colors:
            return super().format(record)
        # copy, so a file handler on the same logger keeps the plain level name
        record = logging.makeLogRecord(record.__dict__)
        color = LEVEL_COLORS.get(record.levelname)
        if color:
            record.levelname = f"{color}{record.levelname}{RESET}"
        return super().format(record)


def qualified_name(name: str) -> str:
    """Module name inside the catmorph hierarchy ("__main__" maps to the root)"""
    if name in (ROOT_LOGGER, "__main__", ""):
        return ROOT_LOGGER
    if name.startswith(ROOT_LOGGER + "."):
        return name
    return f"{ROOT_LOGGER}.{name}"


def setup_logger(
    name: str = ROOT_LOGGER,
    level: str = "INFO",
    log_file: Optional[str] = None,
    log_to_console: bool = True,
    use_colors: bool = True
) -> logging.Logger:
    """
    Set up and configure a logger

    Console output goes to stderr so command output on stdout stays parseable.

    Args:
        name: Logger name (the root by default)
        level: Log level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Optional file path to write logs
        log_to_console: Whether to output to console
        use_colors: Whether to use colored output in console

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.handlers.clear()

    level_num = getattr(logging, level.upper(), logging.INFO)
    logger.setLevel(level_num)

    if log_to_console:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(ColoredFormatter(CONSOLE_FORMAT, use_colors))
        logger.addHandler(console_handler)

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = logging.FileHandler(log_path)
        file_handler.setFormatter(logging.Formatter(FILE_FORMAT))
        logger.addHandler(file_handler)

    logger.propagate = False
    return logger


def get_logger(name: str = ROOT_LOGGER) -> logging.Logger:
    """
    Logger for a module, configuring the catmorph root on first use

    The root reads LOG_LEVEL, LOG_TO_FILE and LOG_FILE_PATH from the
    environment; module loggers inherit its level and handlers.
    """
    root = logging.getLogger(ROOT_LOGGER)
    if not root.handlers:
        log_file = None
        if os.environ.get("LOG_TO_FILE", "false").lower() == "true":
            log_file = os.environ.get("LOG_FILE_PATH", "logs/catmorph.log")
        setup_logger(ROOT_LOGGER, os.environ.get("LOG_LEVEL", "INFO"), log_file)
    return logging.getLogger(qualified_name(name))


def set_level(level: str) -> None:
    """Change the level of every catmorph logger"""
    get_logger().setLevel(getattr(logging, level.upper(), logging.INFO))


class LogContext:
    """Times an operation and logs its start, end or failure"""

    def __init__(self, logger: logging.Logger, operation: str, level: int = logging.INFO, **fields):
        self.logger = logger
        self.operation = operation
        self.level = level
        self.fields = fields
        self.start = 0.0
        self.duration = 0.0

    @property
    def label(self) -> str:
        if not self.fields:
            return self.operation
        details = " ".join(f"{key}={value}" for key, value in self.fields.items())
        return f"{self.operation} [{details}]"

    def __enter__(self):
        self.start = time.perf_counter()
        self.logger.log(self.level, "Starting: %s", self.label)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.duration = time.perf_counter() - self.start
        if exc_type is None:
            self.logger.log(self.level, "Completed: %s (%.3fs)", self.label, self.duration)
        else:
            self.logger.error("Failed: %s (%.3fs) - %s", self.label, self.duration, exc_val)
        return False


def log_operation(logger: logging.Logger, operation: str, level: int = logging.INFO, **fields) -> LogContext:
    """
    Context manager timing one operation

    Keyword fields are appended to the start/end messages, e.g.
    "Completed: step 0 [op=open category=2] (0.012s)".
    """
    return LogContext(logger, operation, level, **fields)
