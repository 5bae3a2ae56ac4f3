# graphdual/engine/stats.py
from __future__ import annotations
import math
from dataclasses import dataclass

import numpy as np


@dataclass
class RunningMoments:
    """Count / mean / M2 accumulator; batches merge with the pairwise update."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def push_batch(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            return
        batch_mean = float(values.mean())
        batch = RunningMoments(
            count=int(values.size),
            mean=batch_mean,
            m2=float(((values - batch_mean) ** 2).sum()),
        )
        self.merge(batch)

    def merge(self, other: "RunningMoments") -> None:
        if other.count == 0:
            return
        if self.count == 0:
            self.count, self.mean, self.m2 = other.count, other.mean, other.m2
            return
        total = self.count + other.count
        delta = other.mean - self.mean
        self.mean += delta * other.count / total
        self.m2 += other.m2 + delta * delta * self.count * other.count / total
        self.count = total

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def std_error(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count > 1 else 0.0


def proportion_std_error(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n) if n > 0 else 0.0
