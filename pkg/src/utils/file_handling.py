# src/utils/file_handling.py
"""
Reading case files and writing run artifacts (JSON reports, CSV tables, solver logs).
"""

import json
import math
import re
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np

from src.utils.logger import setup_logger

logger = setup_logger(__name__)

PathLike = Union[str, Path]


def ensure_directory(directory_path: PathLike) -> str:
    """
    Create an output directory (and parents) if needed.

    Args:
        directory_path (PathLike): Directory to create.

    Returns:
        str: Absolute path of the directory.
    """
    dir_path = Path(directory_path).resolve()
    dir_path.mkdir(parents=True, exist_ok=True)
    logger.debug(f"Output directory ready: {dir_path}")
    return str(dir_path)


def save_to_file(content: str, file_path: PathLike) -> str:
    """
    Write a text artifact with "\\n" line endings, creating its directory first.

    Args:
        content (str): Text to write.
        file_path (PathLike): Destination.

    Returns:
        str: Absolute path of the written file.
    """
    target = Path(file_path).resolve()
    ensure_directory(target.parent)
    try:
        target.write_text(content, encoding="utf-8", newline="")
    except OSError as e:
        logger.error(f"Failed to write {target}: {e}", exc_info=True)
        raise
    logger.debug(f"Wrote {len(content)} characters to {target}")
    return str(target)


def read_file(file_path: PathLike) -> str:
    """
    Read a text file such as a MATPOWER case; undecodable bytes in comments are dropped.

    Raises:
        FileNotFoundError: The path is not a file.
    """
    source = Path(file_path).resolve()
    if not source.is_file():
        logger.error(f"File not found: {source}")
        raise FileNotFoundError(f"File not found: {source}")
    try:
        return source.read_text(encoding="utf-8", errors="ignore")
    except OSError as e:
        logger.error(f"Failed to read {source}: {e}", exc_info=True)
        raise


def to_jsonable(data: Any) -> Any:
    """
    Convert numpy scalars/arrays and non-finite floats into plain JSON values.

    Infinite bounds are written as the strings "inf" / "-inf", NaN as null.
    """
    if isinstance(data, dict):
        return {str(k): to_jsonable(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [to_jsonable(v) for v in data]
    if isinstance(data, np.ndarray):
        return [to_jsonable(v) for v in data.tolist()]
    if isinstance(data, np.generic):
        return to_jsonable(data.item())
    if isinstance(data, float):
        if math.isnan(data):
            return None
        if math.isinf(data):
            return "inf" if data > 0 else "-inf"
    return data


def save_json(data: Any, file_path: PathLike) -> str:
    """Write a JSON report (indent 2) after converting numpy values; returns the absolute path."""
    target = Path(file_path).resolve()
    ensure_directory(target.parent)
    try:
        with open(target, "w", encoding="utf-8") as f:
            json.dump(to_jsonable(data), f, indent=2, ensure_ascii=False, allow_nan=False)
    except (OSError, TypeError, ValueError) as e:
        logger.error(f"Failed to save JSON to {target}: {e}", exc_info=True)
        raise
    logger.debug(f"JSON report saved to {target}")
    return str(target)


def read_json(file_path: PathLike) -> Union[Dict, List]:
    """
    Read a JSON report back.

    Raises:
        FileNotFoundError: The path is not a file.
        ValueError: The content is not valid JSON.
    """
    content = read_file(file_path)
    try:
        return json.loads(content)
    except json.JSONDecodeError as e:
        logger.error(f"Invalid JSON in {file_path}: {e}")
        raise ValueError(f"Invalid JSON format in file: {file_path}") from e


def artifact_name(*parts: str, replacement: str = "_") -> str:
    """
    Join name parts with "_" into a file stem that is valid on common file systems.

    Example:
        artifact_name("IEEE118", "load100", "xi0.3") -> "IEEE118_load100_xi0.3"
    """
    stem = "_".join(str(part) for part in parts if str(part))
    stem = "".join(c for c in stem if ord(c) >= 32)
    stem = re.sub(r'[<>:"/\\|?*\s]+', replacement, stem)
    stem = re.sub(r"\.+", ".", stem).strip(". ")
    return stem or "run"
