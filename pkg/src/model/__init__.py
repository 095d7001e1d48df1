"""
SOC-ACOPF program construction and solution decoding.
"""

from src.model.variables import VariableMap
from src.model.program import AffineRows, ConicProgram, RotatedConeBlock, dump_program
from src.model.builder import PenaltySpec, build_socp
from src.model.solution import OpfSolution, extract_solution

__all__ = [
    "VariableMap",
    "AffineRows",
    "ConicProgram",
    "RotatedConeBlock",
    "dump_program",
    "PenaltySpec",
    "build_socp",
    "OpfSolution",
    "extract_solution",
]
