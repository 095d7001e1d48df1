# src/config.py
import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables at module import time, BEFORE class definition
project_root = Path(__file__).parent.parent
dotenv_path = project_root / '.env'
load_dotenv(dotenv_path=dotenv_path)


def _env_float(name: str, default: float) -> float:
    value = os.getenv(name)
    return float(value) if value not in (None, "") else default


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    return int(value) if value not in (None, "") else default


class Config:
    """Stores configuration settings for the application."""

    # --- Project Root ---
    # Assumes config.py is in src/ directory
    PROJECT_ROOT = Path(__file__).parent.parent

    # --- Directories ---
    DATA_DIR = PROJECT_ROOT / "data"
    CASES_DIR = Path(os.getenv("SOCOPF_CASES_DIR", str(DATA_DIR / "cases")))
    OUTPUT_DIR = Path(os.getenv("SOCOPF_OUTPUT_DIR", str(DATA_DIR / "output")))

    TOOL_VERSION = "0.1.0"

    # --- Solver Settings ---
    # CLARABEL handles the quadratic objective natively; ECOS and SCS are accepted too
    SOLVER_BACKEND = os.getenv("SOCOPF_SOLVER_BACKEND", "CLARABEL").upper()
    FEAS_TOL = _env_float("SOCOPF_FEAS_TOL", 1e-8)
    GAP_TOL = _env_float("SOCOPF_GAP_TOL", 1e-8)
    MAX_ITERS = _env_int("SOCOPF_MAX_ITERS", 200)

    # --- Relaxation Gap Settings ---
    # Zero entries of the published gap tables sit at 1e-10..1e-15, genuine gaps at >= 1e-4
    GAP_TOL_PU = _env_float("SOCOPF_GAP_TOL_PU", 1e-6)

    # --- Penalty Settings ---
    DEFAULT_XI = _env_float("SOCOPF_DEFAULT_XI", 0.3)
    TRA_XI0 = _env_float("SOCOPF_TRA_XI0", 0.05)
    TRA_DXI = _env_float("SOCOPF_TRA_DXI", 0.05)
    TRA_K_MAX = _env_int("SOCOPF_TRA_K_MAX", 40)

    # --- Network Data Settings ---
    # Used when a branch carries no usable angmin/angmax
    DEFAULT_ANGLE_LIMIT_DEG = _env_float("SOCOPF_DEFAULT_ANGLE_LIMIT_DEG", 60.0)

    # --- Sweep Settings ---
    LOAD_GRID = tuple(round(0.05 * k, 2) for k in range(1, 21))
    MAX_WORKERS = _env_int("SOCOPF_MAX_WORKERS", 4)
    FAILED_CELL = "FAILED"

    # --- Logging ---
    LOG_LEVEL = os.getenv("SOCOPF_LOG_LEVEL", "INFO").upper()
    LOG_FILE = os.getenv("SOCOPF_LOG_FILE", os.path.join(PROJECT_ROOT, "socopf_tightness.log"))

    @classmethod
    def validate(cls):
        """Validate essential configuration settings."""
        from src.errors import ConfigurationError

        if cls.FEAS_TOL <= 0 or cls.GAP_TOL <= 0 or cls.GAP_TOL_PU <= 0:
            raise ConfigurationError("Solver and gap tolerances must be positive.")
        if cls.MAX_ITERS < 1:
            raise ConfigurationError(f"SOCOPF_MAX_ITERS must be >= 1, got {cls.MAX_ITERS}.")
        if cls.TRA_K_MAX < 1:
            raise ConfigurationError(f"SOCOPF_TRA_K_MAX must be >= 1, got {cls.TRA_K_MAX}.")
        if not 0 < cls.TRA_XI0 < 1:
            raise ConfigurationError(f"SOCOPF_TRA_XI0 must lie in (0, 1), got {cls.TRA_XI0}.")
        if not 0 < cls.TRA_DXI <= 0.5:
            raise ConfigurationError(f"SOCOPF_TRA_DXI must lie in (0, 0.5], got {cls.TRA_DXI}.")
        if cls.MAX_WORKERS < 1:
            raise ConfigurationError(f"SOCOPF_MAX_WORKERS must be >= 1, got {cls.MAX_WORKERS}.")
        if cls.SOLVER_BACKEND not in ("CLARABEL", "ECOS", "SCS"):
            raise ConfigurationError(f"Unsupported solver backend: {cls.SOLVER_BACKEND}")
        if any(not 0 < level <= 10 for level in cls.LOAD_GRID):
            raise ConfigurationError("Load grid factors must lie in (0, 10].")
