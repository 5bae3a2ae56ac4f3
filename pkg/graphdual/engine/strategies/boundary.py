from __future__ import annotations
import numpy as np

from graphdual.engine.strategies.base import BoundaryPolicy


class AbsorbAtZero(BoundaryPolicy):
    """
    Coordinates pushed below zero are set to exactly 0. With no drift the edge
    noise of a zero coordinate vanishes, so it stays 0 afterwards.
    """

    name = "absorb_at_zero"

    def apply(self, x: np.ndarray) -> np.ndarray:
        negative = x < 0.0
        x[negative] = 0.0
        return negative


class ReflectClip(BoundaryPolicy):
    """Mirror negative coordinates back into the orthant; the caller renormalises."""

    name = "reflect_clip"

    def apply(self, x: np.ndarray) -> np.ndarray:
        negative = x < 0.0
        x[negative] = -x[negative]
        return negative
