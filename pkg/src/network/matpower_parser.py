"""
MATPOWER case file (.m) parser.

Finds the `mpc.baseMVA` scalar and the `mpc.SECTION = [ ... ];` matrices of a MATPOWER
case and captures them verbatim as numeric matrices. Supported sections:

    - mpc.baseMVA: system base MVA
    - mpc.bus:     bus data (>= 13 columns)
    - mpc.gen:     generator data (>= 10 columns)
    - mpc.branch:  branch data (>= 13 columns)
    - mpc.gencost: polynomial generator costs of degree <= 2

Any other section (areas, bus_name, dcline, ...) is ignored. Per-unit conversion happens
later in network_model.to_network.
"""

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from src.errors import MalformedFileError, MissingSectionError, UnsupportedCostError
from src.utils.file_handling import read_file
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

# Minimum column counts of the MATPOWER version 2 format
MIN_COLUMNS = {"bus": 13, "gen": 10, "branch": 13, "gencost": 4}
REQUIRED_SECTIONS = ("bus", "gen", "branch", "gencost")

# gencost MODEL column values
POLYNOMIAL_COST = 2
PIECEWISE_LINEAR_COST = 1

_COMMENT = re.compile(r"%[^\n]*")
_BASE_MVA = re.compile(r"mpc\.baseMVA\s*=\s*([^;\n]+)")
_SECTION = re.compile(r"mpc\.(\w+)\s*=\s*\[(.*?)\]\s*;?", re.DOTALL)
_CASE_NAME = re.compile(r"function\s+mpc\s*=\s*(\w+)")


@dataclass(frozen=True)
class RawCase:
    """Numeric matrices of a MATPOWER case exactly as read from the file."""
    base_mva: float
    bus_rows: np.ndarray
    gen_rows: np.ndarray
    branch_rows: np.ndarray
    gencost_rows: np.ndarray
    name: str = "case"
    extra_sections: Dict[str, np.ndarray] = field(default_factory=dict, compare=False)

    @property
    def counts(self) -> Dict[str, int]:
        return {
            "bus": int(self.bus_rows.shape[0]),
            "gen": int(self.gen_rows.shape[0]),
            "branch": int(self.branch_rows.shape[0]),
            "gencost": int(self.gencost_rows.shape[0]),
        }


def _parse_matrix(section: str, block: str) -> np.ndarray:
    """Turn the text between `[` and `]` into a 2-D float array."""
    rows = []
    for chunk in re.split(r"[;\n]", block):
        chunk = chunk.replace(",", " ").replace("...", " ").strip()
        if not chunk:
            continue
        try:
            rows.append([float(token) for token in chunk.split()])
        except ValueError as e:
            raise MalformedFileError(f"Unparseable value in mpc.{section}: '{chunk[:60]}'") from e

    if not rows:
        return np.zeros((0, MIN_COLUMNS.get(section, 0)))

    widths = {len(row) for row in rows}
    if len(widths) != 1:
        raise MalformedFileError(f"Ragged matrix in mpc.{section}: row widths {sorted(widths)}")
    return np.array(rows, dtype=float)


def validate_raw_case(raw: RawCase) -> RawCase:
    """
    Check the RawCase invariants.

    Args:
        raw (RawCase): Parsed case.

    Returns:
        RawCase: The same object, for chaining.

    Raises:
        MalformedFileError: Non-positive base, short rows, or dangling bus references.
        MissingSectionError: Empty bus, gen, branch or gencost matrix.
        UnsupportedCostError: Piecewise-linear cost or polynomial degree above 2.
    """
    if not np.isfinite(raw.base_mva) or raw.base_mva <= 0:
        raise MalformedFileError(f"baseMVA must be positive, got {raw.base_mva}")

    matrices = {
        "bus": raw.bus_rows,
        "gen": raw.gen_rows,
        "branch": raw.branch_rows,
        "gencost": raw.gencost_rows,
    }
    for section, matrix in matrices.items():
        if matrix.ndim != 2 or matrix.shape[0] == 0:
            raise MissingSectionError(f"Section mpc.{section} is missing or empty")
        if matrix.shape[1] < MIN_COLUMNS[section]:
            raise MalformedFileError(
                f"mpc.{section} has {matrix.shape[1]} columns, at least {MIN_COLUMNS[section]} required")

    bus_ids = set(raw.bus_rows[:, 0].astype(int).tolist())
    if len(bus_ids) != raw.bus_rows.shape[0]:
        raise MalformedFileError("Duplicate bus ids in mpc.bus")
    for k, (f_bus, t_bus) in enumerate(raw.branch_rows[:, :2].astype(int)):
        if f_bus not in bus_ids or t_bus not in bus_ids:
            raise MalformedFileError(f"Branch row {k + 1} references unknown bus ({f_bus}, {t_bus})")
    for k, g_bus in enumerate(raw.gen_rows[:, 0].astype(int)):
        if g_bus not in bus_ids:
            raise MalformedFileError(f"Generator row {k + 1} references unknown bus {g_bus}")

    n_gen = raw.gen_rows.shape[0]
    if raw.gencost_rows.shape[0] < n_gen:
        raise MalformedFileError(
            f"mpc.gencost has {raw.gencost_rows.shape[0]} rows for {n_gen} generators")
    # Rows beyond n_gen hold reactive costs, which the model does not use
    for k, row in enumerate(raw.gencost_rows[:n_gen]):
        model = int(row[0])
        if model == PIECEWISE_LINEAR_COST:
            raise UnsupportedCostError(f"Generator {k + 1} uses a piecewise-linear cost")
        if model != POLYNOMIAL_COST:
            raise UnsupportedCostError(f"Generator {k + 1} has unknown cost model {model}")
        n_coeffs = int(row[3])
        if n_coeffs > 3:
            raise UnsupportedCostError(f"Generator {k + 1} has a degree-{n_coeffs - 1} polynomial cost")
        if raw.gencost_rows.shape[1] < 4 + n_coeffs:
            raise MalformedFileError(f"Generator {k + 1} cost row is shorter than its NCOST={n_coeffs}")
    return raw


def parse_matpower(text: str, name: Optional[str] = None) -> RawCase:
    """
    Parse the text of a MATPOWER case file into a RawCase.

    Args:
        text (str): Full content of the `.m` file. Comments (`%` to end of line) and
            whitespace are ignored.
        name (str, optional): Label for the case; defaults to the function name in the file.

    Returns:
        RawCase: Matrices captured verbatim.

    Raises:
        MalformedFileError, MissingSectionError, UnsupportedCostError
    """
    content = _COMMENT.sub("", text)

    base_match = _BASE_MVA.search(content)
    if not base_match:
        raise MissingSectionError("mpc.baseMVA assignment not found")
    try:
        base_mva = float(base_match.group(1).strip())
    except ValueError as e:
        raise MalformedFileError(f"Unparseable baseMVA: '{base_match.group(1).strip()}'") from e

    sections: Dict[str, np.ndarray] = {}
    for match in _SECTION.finditer(content):
        section = match.group(1)
        if section in sections:
            logger.warning(f"Section mpc.{section} assigned twice; keeping the last assignment")
        try:
            sections[section] = _parse_matrix(section, match.group(2))
        except MalformedFileError:
            if section in REQUIRED_SECTIONS:
                raise
            logger.debug(f"Ignoring unparseable optional section mpc.{section}")

    missing = [s for s in REQUIRED_SECTIONS if s not in sections]
    if missing:
        raise MissingSectionError(f"Missing sections: {', '.join('mpc.' + s for s in missing)}")

    if name is None:
        name_match = _CASE_NAME.search(content)
        name = name_match.group(1) if name_match else "case"

    raw = RawCase(
        base_mva=base_mva,
        bus_rows=sections["bus"],
        gen_rows=sections["gen"],
        branch_rows=sections["branch"],
        gencost_rows=sections["gencost"],
        name=name,
        extra_sections={k: v for k, v in sections.items() if k not in REQUIRED_SECTIONS},
    )
    validate_raw_case(raw)
    logger.debug(f"Parsed {name}: {raw.counts}")
    return raw


def read_matpower_file(path: Union[str, Path]) -> RawCase:
    """
    Read and parse a MATPOWER `.m` file from disk.

    Args:
        path (Union[str, Path]): File path.

    Returns:
        RawCase: Parsed case named after the file stem unless the file declares a name.
    """
    path = Path(path)
    text = read_file(path)
    name_match = _CASE_NAME.search(text)
    raw = parse_matpower(text, name=name_match.group(1) if name_match else path.stem)
    logger.info(f"Read case '{raw.name}' from {path}: {raw.counts['bus']} buses, "
                f"{raw.counts['branch']} branches, {raw.counts['gen']} generators")
    return raw


def raw_case_from_ppc(ppc: Dict, name: str) -> RawCase:
    """
    Build a RawCase from a PYPOWER-style case dict (keys baseMVA, bus, gen, branch, gencost).

    Args:
        ppc (Dict): Case dictionary as returned by the pypower case functions.
        name (str): Case label.

    Returns:
        RawCase: Validated raw case.
    """
    if "gencost" not in ppc:
        raise MissingSectionError(f"Case {name} has no gencost matrix")
    raw = RawCase(
        base_mva=float(ppc["baseMVA"]),
        bus_rows=np.array(ppc["bus"], dtype=float, ndmin=2),
        gen_rows=np.array(ppc["gen"], dtype=float, ndmin=2),
        branch_rows=np.array(ppc["branch"], dtype=float, ndmin=2),
        gencost_rows=np.array(ppc["gencost"], dtype=float, ndmin=2),
        name=name,
    )
    return validate_raw_case(raw)
