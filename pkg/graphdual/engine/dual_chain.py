# graphdual/engine/dual_chain.py
"""
Dual Markov chains on multi-indices.

The collision chain moves one particle from a vertex holding ``a_i >= 2``
particles to a neighbour, at rate ``a_i(a_i-1)/2`` per neighbour. The
drifted variant additionally erases one particle at vertex ``i`` at rate
``alpha*a_i/2``. Both carry the killing potential ``k(a)`` that links the
chain to diffusion moments through the Feynman-Kac formula.

Exact rates keep the arithmetic type of ``alpha`` (int/Fraction stay exact);
the simulation kernels work in float64.
"""
from __future__ import annotations
import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterator, Mapping, Optional, Sequence

import numpy as np
import structlog
from scipy import linalg, sparse
from scipy.sparse.linalg import expm_multiply

from graphdual.core.errors import DomainError, GuardError, PreconditionError, SimulationError, ValidationError
from graphdual.core.rng import SeedRecord, as_generator
from graphdual.core.settings import settings
from graphdual.engine.graph_core import GraphSpec, algebraic_connectivity, connectivity_lower_bound
from graphdual.engine.partitions import Number, Partition, as_partition, colex_key, enumerate_partitions

log = structlog.get_logger(__name__)

DENSE_EXPM_LIMIT = 2_000


class Variant(str, Enum):
    COLLISION = "collision"
    COLLISION_WITH_ERASURE = "collision_with_erasure"


class LongRun(str, Enum):
    ABSORBS_INTO_01 = "absorbs_into_01"
    UNIFORM_ON_POSITIVE_PARTITIONS = "uniform_on_positive_partitions"


@dataclass(frozen=True)
class ChainConfig:
    graph: GraphSpec
    alpha: Number = 0
    variant: Variant = Variant.COLLISION

    def __post_init__(self) -> None:
        alpha = self.alpha
        if isinstance(alpha, int) and not isinstance(alpha, bool):
            object.__setattr__(self, "alpha", Fraction(alpha))
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.alpha < 0:
            raise ValidationError(f"alpha must be non-negative, got {self.alpha}")
        if self.variant is Variant.COLLISION_WITH_ERASURE and self.alpha <= 0:
            raise ValidationError("collision_with_erasure needs alpha > 0")
        if self.variant is Variant.COLLISION and self.alpha != 0:
            raise ValidationError("alpha > 0 requires the collision_with_erasure variant")

    @classmethod
    def for_alpha(cls, graph: GraphSpec, alpha: Number = 0) -> "ChainConfig":
        variant = Variant.COLLISION_WITH_ERASURE if alpha > 0 else Variant.COLLISION
        return cls(graph=graph, alpha=alpha, variant=variant)

    @property
    def drifted(self) -> bool:
        return self.variant is Variant.COLLISION_WITH_ERASURE

    def check_state(self, a: Sequence[int]) -> Partition:
        return as_partition(a, self.graph.vertex_count)


@dataclass(frozen=True)
class RateRow:
    source: Partition
    moves: tuple[tuple[Partition, Number], ...]
    total_rate: Number

    @property
    def diagonal(self) -> Number:
        return -self.total_rate

    def as_dict(self) -> dict[Partition, Number]:
        return dict(self.moves)


@dataclass
class ChainPath:
    states: list[Partition]
    holding_times: list[float]
    killing_increments: list[float]
    seed: Optional[SeedRecord] = None
    absorbed: bool = False
    horizon: Optional[float] = None

    @property
    def killing_integral(self) -> float:
        return float(sum(self.killing_increments))

    @property
    def event_count(self) -> int:
        return len(self.states) - 1

    @property
    def elapsed(self) -> float:
        return float(sum(self.holding_times))

    @property
    def final_state(self) -> Partition:
        return self.states[-1]

    def to_jsonl(self) -> str:
        rows = []
        for k, state in enumerate(self.states):
            held = k < len(self.holding_times)
            rows.append(json.dumps({
                "state": list(state),
                "holding_time": self.holding_times[k] if held else None,
                "killing_increment": self.killing_increments[k] if held else None,
            }))
        return "\n".join(rows) + "\n"


@dataclass
class BatchResult:
    """Final states and functionals of independent replicates run side by side."""

    final_states: np.ndarray
    times: np.ndarray
    killing: np.ndarray
    events: np.ndarray
    absorbed: np.ndarray
    seed: Optional[SeedRecord] = field(default=None)

    @property
    def size(self) -> int:
        return int(self.times.size)


# ---------------- exact rates ----------------

def rate_row(cfg: ChainConfig, a: Sequence[int]) -> RateRow:
    a = cfg.check_state(a)
    g = cfg.graph
    moves: list[tuple[Partition, Number]] = []
    for i, ai in enumerate(a):
        if ai < 2:
            continue
        rate = ai * (ai - 1) // 2
        for j in sorted(g.neighbours[i]):
            target = list(a)
            target[i] -= 1
            target[j] += 1
            moves.append((tuple(target), rate))
    if cfg.drifted:
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            target = list(a)
            target[i] -= 1
            moves.append((tuple(target), cfg.alpha * ai / 2))
    total = sum((rate for _, rate in moves), 0)
    return RateRow(source=a, moves=tuple(moves), total_rate=total)


def killing_rate(cfg: ChainConfig, a: Sequence[int]) -> Number:
    a = cfg.check_state(a)
    g = cfg.graph
    value: Number = sum(a[u] * a[v] for u, v in g.edges)
    value -= sum(int(d) * ai * (ai - 1) // 2 for d, ai in zip(g.degrees, a))
    if cfg.drifted:
        value += cfg.alpha * (g.vertex_count - 1) * sum(a) / 2
    return value


def generator_entries(
    cfg: ChainConfig, states: Sequence[Partition], *, with_killing: bool = True
) -> Iterator[tuple[int, int, Number]]:
    """(row, col, value) of ``R - diag(k)`` (or of ``R`` alone) restricted to ``states``."""
    index = {s: k for k, s in enumerate(states)}
    for row, state in enumerate(states):
        rr = rate_row(cfg, state)
        diag = rr.diagonal
        if with_killing:
            diag -= killing_rate(cfg, state)
        if diag:
            yield row, row, diag
        for target, rate in rr.moves:
            col = index.get(target)
            if col is None:
                raise DomainError(f"state set is not closed: {state} -> {target}")
            yield row, col, rate


def generator_matrix(cfg: ChainConfig, states: Sequence[Partition], *, with_killing: bool = False) -> sparse.csr_matrix:
    rows, cols, vals = [], [], []
    for i, j, v in generator_entries(cfg, states, with_killing=with_killing):
        rows.append(i)
        cols.append(j)
        vals.append(float(v))
    n = len(states)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


# ---------------- float kernels ----------------

def _weights(cfg: ChainConfig, states: np.ndarray) -> np.ndarray:
    src, _ = cfg.graph.directed_edges
    s = states[:, src].astype(float)
    collide = s * (s - 1.0) / 2.0
    if not cfg.drifted:
        return collide
    return np.concatenate([collide, (float(cfg.alpha) / 2.0) * states.astype(float)], axis=1)


def _killing(cfg: ChainConfig, states: np.ndarray) -> np.ndarray:
    g = cfg.graph
    s = states.astype(float)
    e = g.edge_array
    value = (s[:, e[:, 0]] * s[:, e[:, 1]]).sum(axis=1) if g.edge_count else np.zeros(len(s))
    value -= (g.degrees * s * (s - 1.0) / 2.0).sum(axis=1)
    if cfg.drifted:
        value += float(cfg.alpha) * (g.vertex_count - 1) / 2.0 * s.sum(axis=1)
    return value


def _apply_moves(cfg: ChainConfig, states: np.ndarray, rows: np.ndarray, choice: np.ndarray) -> None:
    src, dst = cfg.graph.directed_edges
    n_dir = src.size
    collide = choice < n_dir
    rc, ch = rows[collide], choice[collide]
    states[rc, src[ch]] -= 1
    states[rc, dst[ch]] += 1
    if cfg.drifted:
        re = rows[~collide]
        states[re, choice[~collide] - n_dir] -= 1


def _choose(weights: np.ndarray, totals: np.ndarray, u: np.ndarray) -> np.ndarray:
    cumulative = np.cumsum(weights, axis=1)
    choice = (cumulative <= (u * totals)[:, None]).sum(axis=1)
    return np.minimum(choice, weights.shape[1] - 1)


def simulate_path(
    cfg: ChainConfig,
    a0: Sequence[int],
    horizon: Optional[float] = None,
    rng: "np.random.Generator | SeedRecord | int | None" = None,
    *,
    event_budget: Optional[int] = None,
) -> ChainPath:
    """
    Gillespie path from ``a0``. With ``horizon=None`` the path runs until an
    absorbing state (no moves left); otherwise it stops at ``horizon`` and the
    last segment is truncated there.
    """
    if horizon is not None and horizon <= 0:
        raise ValidationError(f"horizon must be positive, got {horizon}")
    start = cfg.check_state(a0)
    budget = event_budget or settings.EVENT_BUDGET
    seed = rng if isinstance(rng, SeedRecord) else None
    gen = as_generator(rng)

    state = np.array([start], dtype=np.int64)
    path = ChainPath(states=[start], holding_times=[], killing_increments=[], seed=seed, horizon=horizon)
    t = 0.0
    while True:
        w = _weights(cfg, state)
        total = float(w.sum())
        k = float(_killing(cfg, state)[0])
        if total == 0.0:
            path.absorbed = True
            if horizon is not None:
                path.holding_times.append(horizon - t)
                path.killing_increments.append(k * (horizon - t))
            break
        hold = float(gen.standard_exponential()) / total
        if horizon is not None and t + hold >= horizon:
            path.holding_times.append(horizon - t)
            path.killing_increments.append(k * (horizon - t))
            break
        path.holding_times.append(hold)
        path.killing_increments.append(k * hold)
        t += hold
        choice = _choose(w, np.array([total]), np.array([gen.random()]))
        _apply_moves(cfg, state, np.array([0]), choice)
        path.states.append(tuple(int(v) for v in state[0]))
        if len(path.states) - 1 > budget:
            raise SimulationError(f"event budget of {budget} exhausted before absorption from {start}")
    return path


def simulate_batch(
    cfg: ChainConfig,
    a0: Sequence[int],
    n_paths: int,
    horizon: Optional[float] = None,
    rng: "np.random.Generator | SeedRecord | int | None" = None,
    *,
    event_budget: Optional[int] = None,
) -> BatchResult:
    """Vectorised ``simulate_path`` over ``n_paths`` replicates; keeps only end-of-path functionals."""
    if n_paths < 1:
        raise ValidationError("n_paths must be positive")
    if horizon is not None and horizon <= 0:
        raise ValidationError(f"horizon must be positive, got {horizon}")
    start = cfg.check_state(a0)
    budget = event_budget or settings.EVENT_BUDGET
    seed = rng if isinstance(rng, SeedRecord) else None
    gen = as_generator(rng)

    states = np.tile(np.array(start, dtype=np.int64), (n_paths, 1))
    times = np.zeros(n_paths)
    killing = np.zeros(n_paths)
    events = np.zeros(n_paths, dtype=np.int64)
    absorbed = np.zeros(n_paths, dtype=bool)
    active = np.ones(n_paths, dtype=bool)

    while active.any():
        rows = np.flatnonzero(active)
        w = _weights(cfg, states[rows])
        totals = w.sum(axis=1)
        k = _killing(cfg, states[rows])

        stuck = totals == 0.0
        if stuck.any():
            done = rows[stuck]
            absorbed[done] = True
            active[done] = False
            if horizon is not None:
                killing[done] += k[stuck] * (horizon - times[done])
                times[done] = horizon
            live = ~stuck
            rows, w, totals, k = rows[live], w[live], totals[live], k[live]
            if rows.size == 0:
                continue

        hold = gen.standard_exponential(rows.size) / totals
        if horizon is not None:
            over = times[rows] + hold >= horizon
            if over.any():
                done = rows[over]
                killing[done] += k[over] * (horizon - times[done])
                times[done] = horizon
                active[done] = False
                keep = ~over
                rows, w, totals, k, hold = rows[keep], w[keep], totals[keep], k[keep], hold[keep]
                if rows.size == 0:
                    continue

        killing[rows] += k * hold
        times[rows] += hold
        choice = _choose(w, totals, gen.random(rows.size))
        _apply_moves(cfg, states, rows, choice)
        events[rows] += 1
        if events[rows].max() > budget:
            raise SimulationError(f"event budget of {budget} exhausted before absorption from {start}")

    return BatchResult(
        final_states=states, times=times, killing=killing, events=events, absorbed=absorbed, seed=seed
    )


# ---------------- exact transition law ----------------

def reachable_states(cfg: ChainConfig, a0: Sequence[int], *, guard: Optional[int] = None) -> list[Partition]:
    """States reachable from ``a0``, ordered by particle count then colexicographically."""
    guard = guard or settings.STATE_SPACE_GUARD
    start = cfg.check_state(a0)
    seen = {start}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        for target, _ in rate_row(cfg, state).moves:
            if target not in seen:
                seen.add(target)
                if len(seen) > guard:
                    raise GuardError(f"reachable state space exceeds guard of {guard} states")
                queue.append(target)
    return sorted(seen, key=lambda s: (sum(s), colex_key(s)))


def transition_probabilities_exact(
    cfg: ChainConfig, a0: Sequence[int], t: float, *, guard: Optional[int] = None
) -> dict[Partition, float]:
    if t < 0:
        raise DomainError(f"time must be non-negative, got {t}")
    start = cfg.check_state(a0)
    states = reachable_states(cfg, start, guard=guard)
    index = {s: k for k, s in enumerate(states)}
    p0 = np.zeros(len(states))
    p0[index[start]] = 1.0
    if t == 0:
        p = p0
    else:
        q = generator_matrix(cfg, states)
        if len(states) <= DENSE_EXPM_LIMIT:
            p = linalg.expm(q.toarray().T * t) @ p0
        else:
            p = expm_multiply(q.T.tocsr() * t, p0)
        p[np.abs(p) < 1e-15] = 0.0
    log.debug("dual.transition_solved", states=len(states), t=t)
    return {s: float(v) for s, v in zip(states, p)}


def classify_long_run(cfg: ChainConfig, a0: Sequence[int]) -> LongRun:
    if cfg.drifted:
        raise PreconditionError("the drifted chain always absorbs at 0; classification applies to the collision chain")
    n = sum(cfg.check_state(a0))
    if n <= cfg.graph.vertex_count:
        return LongRun.ABSORBS_INTO_01
    return LongRun.UNIFORM_ON_POSITIVE_PARTITIONS


def long_run_law(cfg: ChainConfig, a0: Sequence[int]) -> Optional[dict[Partition, float]]:
    """Uniform law on positive partitions when the chain does not absorb, else None."""
    if classify_long_run(cfg, a0) is LongRun.ABSORBS_INTO_01:
        return None
    support = enumerate_partitions(sum(a0), cfg.graph.vertex_count, positive_only=True)
    return {s: 1.0 / len(support) for s in support}


def is_absorbing_01(state: Sequence[int]) -> bool:
    return all(v <= 1 for v in state)


def occupancy_histogram(final_states: np.ndarray) -> dict[Partition, float]:
    rows, counts = np.unique(np.asarray(final_states), axis=0, return_counts=True)
    total = counts.sum()
    return {tuple(int(v) for v in row): float(c) / total for row, c in zip(rows, counts)}


def total_variation(p: Mapping[Partition, float], q: Mapping[Partition, float]) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


@dataclass(frozen=True)
class MixingGap:
    algebraic_connectivity: float
    lower_bound: float
    diameter: int


def dual_mixing_gap(g: GraphSpec) -> MixingGap:
    """Spectral gap of the collision chain with r+1 particles (equal to the Laplacian's)."""
    return MixingGap(
        algebraic_connectivity=algebraic_connectivity(g),
        lower_bound=connectivity_lower_bound(g),
        diameter=g.diameter(),
    )
