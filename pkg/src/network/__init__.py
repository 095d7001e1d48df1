"""
Case ingestion: MATPOWER parsing, per-unit network model, load scaling and incidence.
"""

from src.network.matpower_parser import RawCase, parse_matpower, read_matpower_file, raw_case_from_ppc
from src.network.network_model import (
    Bus, BusKind, Branch, Generator, Network, Incidence,
    to_network, scale_loads, incidence,
)
from src.network.bundled_cases import load_case, load_raw_case

__all__ = [
    "RawCase",
    "parse_matpower",
    "read_matpower_file",
    "raw_case_from_ppc",
    "Bus",
    "BusKind",
    "Branch",
    "Generator",
    "Network",
    "Incidence",
    "to_network",
    "scale_loads",
    "incidence",
    "load_case",
    "load_raw_case",
]
