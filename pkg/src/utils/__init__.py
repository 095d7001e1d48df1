"""
File and logging helpers shared by every package module.
"""

from src.utils.file_handling import (
    artifact_name, ensure_directory, read_file, read_json, save_json, save_to_file, to_jsonable,
)
from src.utils.logger import clear_loggers, set_level, setup_logger

__all__ = [
    'artifact_name',
    'ensure_directory',
    'read_file',
    'read_json',
    'save_json',
    'save_to_file',
    'to_jsonable',
    'clear_loggers',
    'set_level',
    'setup_logger',
]
