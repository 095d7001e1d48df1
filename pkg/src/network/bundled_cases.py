"""
Resolution of case arguments: explicit file paths or the names of shipped fixtures.

case9 and IEEE14 ship as MATPOWER text files under data/cases; the larger IEEE cases
come from the case modules of the pypower package.
"""

import importlib
from pathlib import Path
from typing import Dict, Optional, Union

from src.config import Config
from src.errors import CaseDataError
from src.network.matpower_parser import RawCase, raw_case_from_ppc, read_matpower_file
from src.network.network_model import Network, to_network
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

# name -> (pypower module, accepts series-compensated branches)
BUNDLED_CASES: Dict[str, tuple] = {
    "case9": ("pypower.case9", False),
    "case14": ("pypower.case14", False),
    "case30": ("pypower.case30", False),
    "case57": ("pypower.case57", False),
    "case118": ("pypower.case118", False),
    "case300": ("pypower.case300", True),
}

ALIASES = {
    "ieee14": "case14",
    "ieee30": "case30",
    "ieee57": "case57",
    "ieee118": "case118",
    "ieee300": "case300",
}

DISPLAY_NAMES = {
    "case9": "case9",
    "case14": "IEEE14",
    "case30": "case30",
    "case57": "IEEE57",
    "case118": "IEEE118",
    "case300": "IEEE300",
}


def canonical_name(spec: str) -> Optional[str]:
    """Return the registry key for a bundled case name, or None for anything else."""
    key = spec.strip().lower()
    key = ALIASES.get(key, key)
    return key if key in BUNDLED_CASES else None


def load_raw_case(spec: Union[str, Path]) -> RawCase:
    """
    Load a RawCase from a file path or a bundled case name.

    Args:
        spec (Union[str, Path]): Path to a `.m` file, or one of case9, case14/IEEE14,
            case30, case57/IEEE57, case118/IEEE118, case300/IEEE300.

    Returns:
        RawCase: Parsed case.

    Raises:
        FileNotFoundError: Path does not exist and the name is not a bundled case.
        CaseDataError: Bundled case data cannot be loaded.
    """
    path = Path(spec)
    if path.suffix == ".m" or path.exists():
        return read_matpower_file(path)

    key = canonical_name(str(spec))
    if key is None:
        raise FileNotFoundError(f"No case file or bundled case named '{spec}'")

    fixture = Config.CASES_DIR / f"{key}.m"
    if fixture.is_file():
        raw = read_matpower_file(fixture)
        return RawCase(raw.base_mva, raw.bus_rows, raw.gen_rows, raw.branch_rows,
                       raw.gencost_rows, name=DISPLAY_NAMES[key])

    module_name, _ = BUNDLED_CASES[key]
    try:
        module = importlib.import_module(module_name)
    except ImportError as e:
        logger.error(f"Bundled case '{key}' needs the pypower package: {e}")
        raise CaseDataError(f"Bundled case '{key}' is unavailable (pypower not installed)") from e

    ppc = getattr(module, key)()
    logger.info(f"Loaded bundled case '{DISPLAY_NAMES[key]}' from {module_name}")
    return raw_case_from_ppc(ppc, name=DISPLAY_NAMES[key])


def load_case(spec: Union[str, Path]) -> Network:
    """
    Load and convert a case into a per-unit Network.

    Args:
        spec (Union[str, Path]): File path or bundled case name (see load_raw_case).

    Returns:
        Network: Validated network at the file's (100%) load level.
    """
    raw = load_raw_case(spec)
    key = canonical_name(str(spec)) if not Path(spec).exists() else None
    allow_compensation = BUNDLED_CASES[key][1] if key else False
    return to_network(raw, allow_series_compensation=allow_compensation)
