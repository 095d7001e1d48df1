"""
Logging setup for the package.

All module loggers hang below one package logger ("socopf"), which owns the console and
file handlers; `setup_logger(__name__)` maps "src.tra.sweeps" to "socopf.tra.sweeps".
"""

import logging
import os
import sys
from typing import Dict, Optional

from src.config import Config

# Using colorlog for colored terminal output
try:
    import colorlog
except ImportError:
    print("Optional 'colorlog' package not found. Install with 'pip install colorlog' for colored console logs.",
          file=sys.stderr)
    colorlog = None

ROOT_NAME = "socopf"
# Sweep cells log from pool threads
LOG_FORMAT = "[%(asctime)s] [%(levelname)s] [%(name)s] [%(threadName)s] - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
LOG_COLORS = {
    "DEBUG": "cyan",
    "INFO": "green",
    "WARNING": "yellow",
    "ERROR": "red",
    "CRITICAL": "red,bg_white",
}

_loggers: Dict[str, logging.Logger] = {}


def _qualified(name: str) -> str:
    if name == ROOT_NAME or name.startswith(ROOT_NAME + "."):
        return name
    if name.startswith("src."):
        name = name[len("src."):]
    return f"{ROOT_NAME}.{name}"


def _console_handler() -> logging.Handler:
    # stderr keeps the CLI summary on stdout clean
    handler = logging.StreamHandler(sys.stderr)
    if colorlog:
        handler.setFormatter(colorlog.ColoredFormatter(
            "%(log_color)s" + LOG_FORMAT + "%(reset)s", datefmt=DATE_FORMAT, log_colors=LOG_COLORS))
    else:
        handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
    return handler


def _root_logger(log_file: Optional[str]) -> logging.Logger:
    root = logging.getLogger(ROOT_NAME)
    if ROOT_NAME in _loggers:
        return root

    root.setLevel(logging.getLevelName(Config.LOG_LEVEL))
    root.propagate = False
    root.handlers.clear()
    root.addHandler(_console_handler())

    log_file = log_file or Config.LOG_FILE
    if log_file:
        log_dir = os.path.dirname(log_file)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
        root.addHandler(file_handler)

    _loggers[ROOT_NAME] = root
    return root


def setup_logger(logger_name: str, log_file: Optional[str] = None) -> logging.Logger:
    """
    Return a logger below the package logger, configuring the package logger on first use.

    Args:
        logger_name (str): Module name (usually __name__) or a short application name.
        log_file (Optional[str], optional): Log file for the package logger. Defaults to
            Config.LOG_FILE; empty disables file logging. Only the first call decides.

    Returns:
        logging.Logger: Logger that propagates to the package handlers.
    """
    name = _qualified(logger_name)
    if name in _loggers:
        return _loggers[name]

    root = _root_logger(log_file)
    if name == ROOT_NAME:
        return root

    logger = logging.getLogger(name)
    logger.handlers.clear()
    logger.propagate = True
    logger.setLevel(logging.NOTSET)
    _loggers[name] = logger
    return logger


def set_level(level: str):
    """Change the package log level (used by the CLI --verbose flag)."""
    Config.LOG_LEVEL = level.upper()
    logging.getLogger(ROOT_NAME).setLevel(logging.getLevelName(Config.LOG_LEVEL))


def clear_loggers():
    """Close the package handlers and forget every configured logger."""
    root = logging.getLogger(ROOT_NAME)
    for handler in root.handlers[:]:
        handler.close()
        root.removeHandler(handler)
    _loggers.clear()
