# graphdual/engine/simplex.py
from __future__ import annotations
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from graphdual.core.errors import DomainError

SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SimplexPoint:
    """A probability vector x with x_i >= 0 and sum 1 (within ``tolerance``)."""

    coords: np.ndarray
    tolerance: float = SUM_TOL

    @classmethod
    def from_coords(cls, coords: Iterable[float], tolerance: float = SUM_TOL) -> "SimplexPoint":
        arr = np.array([float(c) for c in coords], dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise DomainError("simplex point needs at least one coordinate")
        if np.any(arr < 0):
            raise DomainError(f"simplex coordinates must be non-negative, got {arr.tolist()}")
        if abs(arr.sum() - 1.0) > max(tolerance, 1e-15 * arr.size):
            raise DomainError(f"simplex coordinates must sum to 1, got {arr.sum()!r}")
        arr.setflags(write=False)
        return cls(coords=arr, tolerance=tolerance)

    @classmethod
    def uniform(cls, r: int) -> "SimplexPoint":
        return cls.from_coords([1.0 / r] * r)

    @classmethod
    def vertex(cls, r: int, i: int) -> "SimplexPoint":
        return cls.from_coords([1.0 if k == i else 0.0 for k in range(r)])

    @property
    def dimension(self) -> int:
        return int(self.coords.size)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(int(i) for i in np.flatnonzero(self.coords > 0))

    def __len__(self) -> int:
        return self.dimension

    def __iter__(self):
        return iter(float(c) for c in self.coords)

    def __repr__(self) -> str:
        return f"SimplexPoint({self.coords.tolist()})"


def as_simplex(x: "SimplexPoint | Sequence[float]") -> SimplexPoint:
    if isinstance(x, SimplexPoint):
        return x
    return SimplexPoint.from_coords(x)
