"""
Index layout of the SOC-ACOPF decision vector.

Blocks, in order: V (per bus), theta (per bus), p_g, q_g (per generator),
p_s, q_s, p_o, q_o, theta_l (per line). n_vars = 2|N| + 2|G| + 5|L|.
"""

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

BLOCK_ORDER = ("V", "theta", "p_g", "q_g", "p_s", "q_s", "p_o", "q_o", "theta_l")


@dataclass(frozen=True)
class VariableMap:
    n_buses: int
    n_generators: int
    n_lines: int

    @property
    def sizes(self) -> Dict[str, int]:
        n, g, l = self.n_buses, self.n_generators, self.n_lines
        return {"V": n, "theta": n, "p_g": g, "q_g": g,
                "p_s": l, "q_s": l, "p_o": l, "q_o": l, "theta_l": l}

    @property
    def offsets(self) -> Dict[str, int]:
        offsets, start = {}, 0
        for block in BLOCK_ORDER:
            offsets[block] = start
            start += self.sizes[block]
        return offsets

    @property
    def n_vars(self) -> int:
        return 2 * self.n_buses + 2 * self.n_generators + 5 * self.n_lines

    def slice(self, block: str) -> slice:
        start = self.offsets[block]
        return slice(start, start + self.sizes[block])

    def indices(self, block: str) -> np.ndarray:
        """Global indices of every entry of `block`."""
        sl = self.slice(block)
        return np.arange(sl.start, sl.stop)

    def index(self, block: str, k: int) -> int:
        if not 0 <= k < self.sizes[block]:
            raise IndexError(f"{block}[{k}] out of range (size {self.sizes[block]})")
        return self.offsets[block] + k

    def locate(self, i: int) -> Tuple[str, int]:
        """Inverse of `index`: the (block, position) owning global index i."""
        for block in BLOCK_ORDER:
            sl = self.slice(block)
            if sl.start <= i < sl.stop:
                return block, i - sl.start
        raise IndexError(f"Variable index {i} out of range (n_vars {self.n_vars})")

    def split(self, x: np.ndarray) -> Dict[str, np.ndarray]:
        return {block: np.asarray(x[self.slice(block)], dtype=float) for block in BLOCK_ORDER}

    def label(self, i: int) -> str:
        block, k = self.locate(i)
        return f"{block}[{k}]"
