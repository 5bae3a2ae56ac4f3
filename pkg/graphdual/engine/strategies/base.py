from __future__ import annotations
from abc import ABC, abstractmethod
from typing import Sequence

import numpy as np

from graphdual.engine.partitions import Number

# ---------- Arithmetic ----------

class ArithmeticBackend(ABC):
    name: str = ""
    exact: bool = False

    @abstractmethod
    def coerce(self, value: Number) -> Number:
        """Convert a user-supplied scalar into the backend's number type."""
        raise NotImplementedError

    @abstractmethod
    def solve(self, rows: Sequence[dict[int, Number]], rhs: Sequence[Number]) -> list[Number]:
        """
        Solve the square sparse system given as one ``{column: value}`` dict per
        row. A singular system raises SimulationError.
        """
        raise NotImplementedError

# ---------- SDE boundary ----------

class BoundaryPolicy(ABC):
    name: str = ""

    @abstractmethod
    def apply(self, x: np.ndarray) -> np.ndarray:
        """
        Repair coordinates that left [0, inf) after a step, in place.
        Returns the boolean mask of the coordinates that had to be touched.
        """
        raise NotImplementedError
