"""
Standard-form conic program with a separable quadratic objective.

    minimize    sum_i curvature_i * x_i^2 + linear . x + constant
    subject to  a_eq x = b_eq
                a_ineq x <= b_ineq
                lower <= x <= upper
                (u_k, v_k, w_k) in Q_r  for every rotated-cone row k

where Q_r = {(u, v, w) : 2 u v >= |w|^2, u >= 0, v >= 0} and u, v, w are affine in x.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np
import scipy.sparse as sp

from src.utils.file_handling import save_json


@dataclass(frozen=True)
class AffineRows:
    """K affine expressions matrix @ x + offset."""
    matrix: sp.csr_matrix
    offset: np.ndarray

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x + self.offset

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class RotatedConeBlock:
    """K rotated cones sharing a name; w has `len(w)` components per cone."""
    name: str
    u: AffineRows
    v: AffineRows
    w: Tuple[AffineRows, ...]

    @property
    def n_cones(self) -> int:
        return self.u.n_rows

    @property
    def w_dim(self) -> int:
        return len(self.w)

    def evaluate(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (u, v, W) with W of shape (K, w_dim)."""
        u = self.u.evaluate(x)
        v = self.v.evaluate(x)
        w = np.column_stack([wk.evaluate(x) for wk in self.w]) if self.w else np.zeros((len(u), 0))
        return u, v, w

    def margin(self, x: np.ndarray) -> np.ndarray:
        """2uv - |w|^2 per cone."""
        u, v, w = self.evaluate(x)
        return 2.0 * u * v - np.sum(w * w, axis=1)


@dataclass(frozen=True)
class ConicProgram:
    n_vars: int
    curvature: np.ndarray
    linear: np.ndarray
    constant: float
    a_eq: sp.csr_matrix
    b_eq: np.ndarray
    a_ineq: sp.csr_matrix
    b_ineq: np.ndarray
    cones: Tuple[RotatedConeBlock, ...]
    lower: np.ndarray
    upper: np.ndarray
    eq_labels: Tuple[str, ...] = field(default=(), compare=False)
    ineq_labels: Tuple[str, ...] = field(default=(), compare=False)
    var_labels: Tuple[str, ...] = field(default=(), compare=False)

    @property
    def n_eq(self) -> int:
        return self.a_eq.shape[0]

    @property
    def n_ineq(self) -> int:
        return self.a_ineq.shape[0]

    @property
    def n_cones(self) -> int:
        return sum(block.n_cones for block in self.cones)

    def objective(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        return float(self.curvature @ (x * x) + self.linear @ x + self.constant)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return 2.0 * self.curvature * x + self.linear

    def scaled(self, factor: float) -> "ConicProgram":
        """Same feasible set, objective multiplied by `factor`."""
        return ConicProgram(
            n_vars=self.n_vars,
            curvature=self.curvature * factor,
            linear=self.linear * factor,
            constant=self.constant * factor,
            a_eq=self.a_eq, b_eq=self.b_eq,
            a_ineq=self.a_ineq, b_ineq=self.b_ineq,
            cones=self.cones,
            lower=self.lower, upper=self.upper,
            eq_labels=self.eq_labels, ineq_labels=self.ineq_labels, var_labels=self.var_labels,
        )

    def check(self) -> None:
        """Assert the structural invariants (convex objective, consistent shapes)."""
        n = self.n_vars
        assert self.curvature.shape == (n,) and np.all(self.curvature >= 0), "objective must be convex"
        assert self.linear.shape == (n,)
        assert self.a_eq.shape == (len(self.b_eq), n)
        assert self.a_ineq.shape == (len(self.b_ineq), n)
        assert self.lower.shape == (n,) and self.upper.shape == (n,)
        for block in self.cones:
            for rows in (block.u, block.v, *block.w):
                assert rows.matrix.shape == (block.n_cones, n)

    def to_dict(self) -> Dict[str, Any]:
        """Plain listing of objective, rows and cone blocks for solver-independent diffing."""
        labels = self.var_labels or tuple(f"x[{i}]" for i in range(self.n_vars))

        def row_terms(matrix: sp.csr_matrix, r: int) -> Dict[str, float]:
            start, stop = matrix.indptr[r], matrix.indptr[r + 1]
            return {labels[j]: float(v) for j, v in zip(matrix.indices[start:stop], matrix.data[start:stop])}

        def rows(matrix, rhs, names, sense) -> List[Dict[str, Any]]:
            return [{"label": names[r] if r < len(names) else f"row[{r}]", "terms": row_terms(matrix, r),
                     "sense": sense, "rhs": float(rhs[r])} for r in range(matrix.shape[0])]

        def affine(a: AffineRows, k: int) -> Dict[str, Any]:
            return {"terms": row_terms(a.matrix, k), "offset": float(a.offset[k])}

        return {
            "n_vars": self.n_vars,
            "objective": {
                "quadratic": {labels[i]: float(c) for i, c in enumerate(self.curvature) if c != 0},
                "linear": {labels[i]: float(c) for i, c in enumerate(self.linear) if c != 0},
                "constant": float(self.constant),
            },
            "equalities": rows(self.a_eq, self.b_eq, self.eq_labels, "=="),
            "inequalities": rows(self.a_ineq, self.b_ineq, self.ineq_labels, "<="),
            "bounds": [{"var": labels[i], "lower": float(self.lower[i]), "upper": float(self.upper[i])}
                       for i in range(self.n_vars)],
            "cones": [
                {"block": block.name, "index": k, "u": affine(block.u, k), "v": affine(block.v, k),
                 "w": [affine(wk, k) for wk in block.w]}
                for block in self.cones for k in range(block.n_cones)
            ],
        }


def dump_program(prog: ConicProgram, path: Union[str, Path]) -> str:
    """Write the JSON debug listing of `prog` to `path`."""
    return save_json(prog.to_dict(), path)
