from __future__ import annotations
import warnings
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import MatrixRankWarning, spsolve

from graphdual.core.errors import SimulationError
from graphdual.engine.exact import solve_rational
from graphdual.engine.partitions import Number
from graphdual.engine.strategies.base import ArithmeticBackend


def to_fraction(value: Number) -> Fraction:
    """Decimal reading for floats, so 0.25 becomes 1/4 and 0.1 becomes 1/10."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


class ExactArithmetic(ArithmeticBackend):
    name = "exact"
    exact = True

    def coerce(self, value: Number) -> Fraction:
        return to_fraction(value)

    def solve(self, rows: Sequence[dict[int, Number]], rhs: Sequence[Number]) -> list[Fraction]:
        return solve_rational(
            [{c: to_fraction(v) for c, v in row.items()} for row in rows],
            [to_fraction(v) for v in rhs],
        )


class FloatArithmetic(ArithmeticBackend):
    name = "float"

    def coerce(self, value: Number) -> float:
        return float(value)

    def solve(self, rows: Sequence[dict[int, Number]], rhs: Sequence[Number]) -> list[float]:
        n = len(rows)
        r_idx, c_idx, vals = [], [], []
        for i, row in enumerate(rows):
            for c, v in row.items():
                r_idx.append(i)
                c_idx.append(c)
                vals.append(float(v))
        matrix = sparse.csc_matrix((vals, (r_idx, c_idx)), shape=(n, n))
        b = np.array([float(v) for v in rhs])
        with warnings.catch_warnings():
            warnings.simplefilter("error", MatrixRankWarning)
            try:
                x = spsolve(matrix, b) if n > 1 else b / matrix.toarray()[0, 0]
            except (MatrixRankWarning, ZeroDivisionError, FloatingPointError) as e:
                raise SimulationError(f"singular float system of size {n}: {e}") from e
        x = np.atleast_1d(x)
        if not np.all(np.isfinite(x)):
            raise SimulationError(f"singular float system of size {n}")
        return [float(v) for v in x]
