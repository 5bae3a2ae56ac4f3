# graphdual/engine/particles.py
"""
The discrete collision model with N particles on the vertices of a graph.

At each step an unordered pair of distinct particles is drawn uniformly. If
they sit on adjacent vertices, both move to one of the two vertices with
probability 1/2; otherwise nothing happens. Occupied vertices can only be
vacated, so the occupied set shrinks until it is independent.
"""
from __future__ import annotations
import math
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np
import structlog

from graphdual.core.errors import ValidationError
from graphdual.core.rng import SeedRecord, as_generator
from graphdual.engine.graph_core import GraphSpec

log = structlog.get_logger(__name__)

Method = Literal["jump", "literal"]


@dataclass(frozen=True)
class FinderConfig:
    particles: int
    threshold: Optional[int] = None  # None -> 50 N^2
    method: Method = "jump"

    def __post_init__(self) -> None:
        if self.threshold is not None and self.threshold < 1:
            raise ValidationError(f"threshold M must be at least 1, got {self.threshold}")
        if self.method not in ("jump", "literal"):
            raise ValidationError(f"unknown method {self.method!r}")

    @property
    def effective_threshold(self) -> int:
        return self.threshold if self.threshold is not None else 50 * self.particles ** 2

    def check(self, g: GraphSpec) -> None:
        if self.particles < g.vertex_count:
            raise ValidationError(
                f"need at least one particle per vertex: N={self.particles} < r={g.vertex_count}"
            )


@dataclass
class FinderResult:
    vertices: frozenset[int]
    iterations: int
    converged: bool
    threshold: int
    counts: tuple[int, ...]
    seed: Optional[SeedRecord] = field(default=None)

    def to_document(self) -> dict:
        doc = {
            "set": sorted(v + 1 for v in self.vertices),
            "iterations": self.iterations,
            "converged": self.converged,
            "threshold": self.threshold,
            "counts": list(self.counts),
        }
        if self.seed is not None:
            doc["seed"] = self.seed.model_dump(mode="json")
        return doc


def initial_positions(r: int, n_particles: int, gen: np.random.Generator) -> np.ndarray:
    """Particle k < r sits on vertex k; the remaining particles are placed uniformly."""
    rest = gen.integers(0, r, size=n_particles - r)
    return np.concatenate([np.arange(r, dtype=np.int64), rest.astype(np.int64)])


def has_adjacent_occupied(g: GraphSpec, counts: Sequence[int]) -> bool:
    return any(counts[u] > 0 and counts[v] > 0 for u, v in g.edges)


def _collision_weights(g: GraphSpec, counts: np.ndarray) -> np.ndarray:
    e = g.edge_array
    return (counts[e[:, 0]] * counts[e[:, 1]]).astype(float)


def _collide(g: GraphSpec, counts: np.ndarray, weights: np.ndarray, gen: np.random.Generator) -> None:
    """Resolve one colliding pair: edge chosen by n_u n_v, winning side by a fair coin."""
    k = int(np.searchsorted(np.cumsum(weights), gen.random() * weights.sum(), side="right"))
    k = min(k, len(weights) - 1)
    u, v = (int(w) for w in g.edge_array[k])
    if gen.random() < 0.5:
        u, v = v, u
    counts[u] += 1
    counts[v] -= 1


def _find_jump(g: GraphSpec, counts: np.ndarray, threshold: int, gen: np.random.Generator) -> int:
    """Skip runs of non-colliding draws with a geometric variable; same law as drawing pairs one by one."""
    n = int(counts.sum())
    pairs = n * (n - 1) / 2.0
    iterations = 0
    while True:
        weights = _collision_weights(g, counts)
        w = weights.sum()
        if w == 0.0:
            return iterations + threshold
        draws = int(gen.geometric(w / pairs))
        if draws - 1 >= threshold:
            return iterations + threshold
        iterations += draws
        _collide(g, counts, weights, gen)


def _find_literal(g: GraphSpec, positions: np.ndarray, threshold: int, gen: np.random.Generator) -> int:
    adj = g.adjacency
    iterations = 0
    streak = 0
    while streak < threshold:
        i, j = gen.choice(positions.size, size=2, replace=False)
        iterations += 1
        vi, vj = positions[i], positions[j]
        if adj[vi, vj]:
            target = vi if gen.random() < 0.5 else vj
            positions[i] = positions[j] = target
            streak = 0
        else:
            streak += 1
    return iterations


def find_independent_set(
    g: GraphSpec,
    cfg: FinderConfig,
    rng: "np.random.Generator | SeedRecord | int | None" = None,
) -> FinderResult:
    cfg.check(g)
    seed = rng if isinstance(rng, SeedRecord) else None
    gen = as_generator(rng)
    threshold = cfg.effective_threshold
    positions = initial_positions(g.vertex_count, cfg.particles, gen)

    if cfg.method == "literal":
        iterations = _find_literal(g, positions, threshold, gen)
        counts = np.bincount(positions, minlength=g.vertex_count)
    else:
        counts = np.bincount(positions, minlength=g.vertex_count).astype(np.int64)
        iterations = _find_jump(g, counts, threshold, gen)

    converged = not has_adjacent_occupied(g, counts)
    if not converged:
        log.warning("particles.unconverged", graph=g.label, threshold=threshold, iterations=iterations)
    return FinderResult(
        vertices=frozenset(int(v) for v in np.flatnonzero(counts)),
        iterations=iterations,
        converged=converged,
        threshold=threshold,
        counts=tuple(int(c) for c in counts),
        seed=seed,
    )


# ---------------- raw collision dynamics ----------------

@dataclass
class Trajectory:
    steps: np.ndarray
    times: np.ndarray
    states: np.ndarray   # rows are n(s)/N
    particles: int
    absorbed_at: Optional[float] = None  # diffusion time at which the occupied set became independent

    def to_rows(self) -> list[list[float]]:
        return [[int(s), float(t), *map(float, x)] for s, t, x in zip(self.steps, self.times, self.states)]


def run_compromise_process(
    g: GraphSpec,
    n0: Sequence[int],
    steps: int,
    record_every: int = 1,
    rng: "np.random.Generator | SeedRecord | int | None" = None,
    *,
    alpha: float = 0.0,
) -> Trajectory:
    """
    Collision dynamics without a stopping rule, recorded every ``record_every``
    steps. Time is rescaled by N(N-1)/2 steps per diffusion unit. With
    ``alpha > 0`` each step first moves one uniformly chosen particle to a
    uniformly chosen other vertex with probability alpha(r-1)/(N-1).
    """
    counts = np.array([int(c) for c in n0], dtype=np.int64)
    r = g.vertex_count
    if counts.size != r or np.any(counts < 0):
        raise ValidationError(f"n0 must hold {r} non-negative counts")
    n = int(counts.sum())
    if n < 2:
        raise ValidationError("need at least two particles")
    if steps < 0 or record_every < 1:
        raise ValidationError("steps must be non-negative and record_every positive")
    mutation = alpha * (r - 1) / (n - 1) if alpha > 0 else 0.0
    if mutation > 1.0:
        raise ValidationError(f"mutation probability {mutation} exceeds 1; use more particles")
    if mutation > 0 and r < 2:
        raise ValidationError("mutation needs at least two vertices")
    gen = as_generator(rng)
    pairs = n * (n - 1) / 2.0
    scale = pairs

    record_steps = np.arange(0, steps + 1, record_every, dtype=np.int64)
    states = np.empty((record_steps.size, r))
    absorbed_at: Optional[float] = None
    if mutation == 0 and not has_adjacent_occupied(g, counts):
        absorbed_at = 0.0

    step = 0
    k = 0
    while k < record_steps.size:
        weights = _collision_weights(g, counts)
        p_collide = weights.sum() / pairs
        p_event = 1.0 - (1.0 - mutation) * (1.0 - p_collide)
        next_event = step + int(gen.geometric(p_event)) if p_event > 0 else math.inf
        while k < record_steps.size and record_steps[k] < next_event:
            states[k] = counts / n
            k += 1
        if next_event > steps:
            break
        step = int(next_event)
        if gen.random() * p_event < mutation:
            _mutate(counts, gen)
            if gen.random() < _collision_weights(g, counts).sum() / pairs:
                _collide(g, counts, _collision_weights(g, counts), gen)
        else:
            _collide(g, counts, weights, gen)
        if absorbed_at is None and mutation == 0 and not has_adjacent_occupied(g, counts):
            absorbed_at = step / scale

    return Trajectory(
        steps=record_steps,
        times=record_steps / scale,
        states=states,
        particles=n,
        absorbed_at=absorbed_at,
    )


def _mutate(counts: np.ndarray, gen: np.random.Generator) -> None:
    r = counts.size
    source = int(np.searchsorted(np.cumsum(counts), gen.random() * counts.sum(), side="right"))
    target = int(gen.integers(0, r - 1))
    if target >= source:
        target += 1
    counts[source] -= 1
    counts[target] += 1
