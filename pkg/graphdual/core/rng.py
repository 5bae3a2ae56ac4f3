# graphdual/core/rng.py
"""
Seeded random streams.

Every Monte Carlo replicate (or chunk of replicates) draws from its own
counter-based Philox stream derived from ``SeedSequence(entropy).spawn``.
The stream for index ``k`` depends only on ``(entropy, k)``, never on how
many workers run the chunks.
"""
from __future__ import annotations
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field


class SeedRecord(BaseModel):
    entropy: int = Field(..., ge=0)
    spawn_key: tuple[int, ...] = ()

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(self.sequence()))

    def sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.entropy, spawn_key=self.spawn_key)

    def child(self, index: int) -> "SeedRecord":
        return SeedRecord(entropy=self.entropy, spawn_key=(*self.spawn_key, index))


def resolve_seed(seed: Optional[int]) -> SeedRecord:
    """Use the given seed, or draw one from OS entropy so it can be recorded."""
    if seed is None:
        seed = int(np.random.SeedSequence().entropy)
    return SeedRecord(entropy=int(seed))


def as_generator(rng: "np.random.Generator | SeedRecord | int | None") -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, SeedRecord):
        return rng.generator()
    return resolve_seed(rng).generator()


def stream_records(root: SeedRecord, count: int) -> Sequence[SeedRecord]:
    return [root.child(k) for k in range(count)]
