# graphdual/engine/sde.py
"""
Euler-Maruyama simulation of the simplex diffusion.

Every edge (i, j) carries one Brownian increment per step, scaled by
sqrt(x_i x_j), added to x_i and subtracted from x_j, so the noise keeps the
coordinate sum fixed. The optional linear drift is alpha(1 - r x_i)/2.
Paths of one call advance together as rows of a matrix.
"""
from __future__ import annotations
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
import structlog

from graphdual.core.errors import DomainError, PreconditionError, ValidationError
from graphdual.core.rng import SeedRecord, as_generator
from graphdual.engine.graph_core import GraphSpec, is_independent_set
from graphdual.engine.simplex import SimplexPoint, as_simplex
from graphdual.engine.stats import proportion_std_error
from graphdual.engine.strategies.base import BoundaryPolicy
from graphdual.engine.strategies.registry import build_boundary

log = structlog.get_logger(__name__)

CLIP_WARN_FRACTION = 1e-3
SUPPORT_EPS = 1e-6


@dataclass(frozen=True)
class SdeConfig:
    graph: GraphSpec
    alpha: float = 0.0
    dt: float = 1e-4
    scheme: str = "euler_maruyama"
    boundary_policy: str = "absorb_at_zero"

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if self.alpha < 0:
            raise ValidationError(f"alpha must be non-negative, got {self.alpha}")
        if self.scheme != "euler_maruyama":
            raise ValidationError(f"unsupported scheme {self.scheme!r}")
        build_boundary(self.boundary_policy)

    @property
    def policy(self) -> BoundaryPolicy:
        return build_boundary(self.boundary_policy)


@dataclass
class SdeRun:
    times: np.ndarray
    paths: np.ndarray            # (n_paths, n_records, r)
    clip_fraction: float
    renormalisation_drift: float
    warnings: list[str] = field(default_factory=list)
    seed: Optional[SeedRecord] = None

    @property
    def final(self) -> np.ndarray:
        return self.paths[:, -1, :]

    def to_rows(self) -> list[list[float]]:
        rows = []
        for p in range(self.paths.shape[0]):
            for k, t in enumerate(self.times):
                rows.append([p, float(t), *map(float, self.paths[p, k])])
        return rows


class _Stepper:
    """Advances a block of paths; tracks clipping and renormalisation drift."""

    def __init__(self, cfg: SdeConfig, gen: np.random.Generator):
        g = cfg.graph
        self.cfg = cfg
        self.gen = gen
        self.policy = cfg.policy
        self.edges = g.edge_array
        self.incidence = np.zeros((g.edge_count, g.vertex_count))
        self.incidence[np.arange(g.edge_count), self.edges[:, 0]] = 1.0
        self.incidence[np.arange(g.edge_count), self.edges[:, 1]] = -1.0
        self.sqrt_dt = math.sqrt(cfg.dt)
        self.clipped = 0
        self.touched = 0
        self.drift = 0.0

    def step(self, x: np.ndarray) -> np.ndarray:
        """Advance ``x`` in place; returns the mask of coordinates the boundary policy repaired."""
        cfg = self.cfg
        pos = np.maximum(x, 0.0)
        scale = np.sqrt(pos[:, self.edges[:, 0]] * pos[:, self.edges[:, 1]])
        noise = self.gen.standard_normal(scale.shape) * self.sqrt_dt
        x += (scale * noise) @ self.incidence
        if cfg.alpha > 0:
            x += 0.5 * cfg.alpha * (1.0 - cfg.graph.vertex_count * x) * cfg.dt
        repaired = self.policy.apply(x)
        self.clipped += int(repaired.sum())
        self.touched += x.size
        total = x.sum(axis=1, keepdims=True)
        self.drift = max(self.drift, float(np.abs(total - 1.0).max()))
        x /= total
        return repaired

    @property
    def clip_fraction(self) -> float:
        return self.clipped / self.touched if self.touched else 0.0

    def report(self, run_warnings: list[str]) -> None:
        if self.clip_fraction > CLIP_WARN_FRACTION:
            message = f"clipped {self.clip_fraction:.2e} of coordinate updates; consider a smaller dt"
            run_warnings.append(message)
            log.warning("sde.clipping", fraction=self.clip_fraction, dt=self.cfg.dt)
        log.debug("sde.renormalised", max_drift=self.drift)


def _start(cfg: SdeConfig, x0: "SimplexPoint | Sequence[float]", n_paths: int) -> np.ndarray:
    point = as_simplex(x0)
    if point.dimension != cfg.graph.vertex_count:
        raise DomainError(f"x0 has {point.dimension} coordinates, graph has {cfg.graph.vertex_count} vertices")
    if n_paths < 1:
        raise ValidationError("n_paths must be positive")
    return np.tile(np.array(point.coords, dtype=float), (n_paths, 1))


def simulate_sde(
    cfg: SdeConfig,
    x0: "SimplexPoint | Sequence[float]",
    t_end: float,
    rng: "np.random.Generator | SeedRecord | int | None" = None,
    *,
    n_paths: int = 1,
    record_every: Optional[int] = None,
) -> SdeRun:
    """Paths on [0, t_end], recorded every ``record_every`` steps (default: start and end only)."""
    if t_end < 0:
        raise ValidationError(f"t_end must be non-negative, got {t_end}")
    x = _start(cfg, x0, n_paths)
    seed = rng if isinstance(rng, SeedRecord) else None
    stepper = _Stepper(cfg, as_generator(rng))
    n_steps = int(round(t_end / cfg.dt))
    every = record_every or max(n_steps, 1)

    times, snapshots = [0.0], [x.copy()]
    for k in range(1, n_steps + 1):
        stepper.step(x)
        if k % every == 0 or k == n_steps:
            times.append(k * cfg.dt)
            snapshots.append(x.copy())

    run = SdeRun(
        times=np.array(times),
        paths=np.stack(snapshots, axis=1),
        clip_fraction=stepper.clip_fraction,
        renormalisation_drift=stepper.drift,
        seed=seed,
    )
    stepper.report(run.warnings)
    return run


# ---------------- exit times ----------------

@dataclass
class ExitTimeSample:
    times: np.ndarray           # inf where no exit happened before t_max
    face: frozenset[int]
    x0: np.ndarray
    t_max: float
    lower_bound_constant: float
    face_edges: int

    @property
    def n_paths(self) -> int:
        return int(self.times.size)

    def survival(self, t: float) -> float:
        if t <= 0:
            return 1.0
        return float(np.mean(self.times > t))

    def survival_std_error(self, t: float) -> float:
        return proportion_std_error(self.survival(t), self.n_paths)

    def lower_bound(self, t: float) -> float:
        return self.lower_bound_constant * math.exp(-t * self.face_edges)


def exit_time_lower_bound(
    x: "SimplexPoint | Sequence[float]", face: Iterable[int], g: GraphSpec, t: float
) -> float:
    """c_x exp(-t |E_U|) with c_x = (prod_{i in U} x_i) |U|^|U|."""
    members = sorted(g.check_vertices(face))
    point = as_simplex(x)
    size = len(members)
    c_x = math.prod(float(point.coords[i]) for i in members) * size ** size
    return c_x * math.exp(-t * g.induced_edge_count(members))


def empirical_exit_time(
    cfg: SdeConfig,
    x0: "SimplexPoint | Sequence[float]",
    face: Iterable[int],
    n_paths: int,
    rng: "np.random.Generator | SeedRecord | int | None" = None,
    *,
    t_max: float = 10.0,
) -> ExitTimeSample:
    """Monte Carlo exit times from the interior of the face; a path exits at the first step that takes a face coordinate to zero or below."""
    g = cfg.graph
    members = g.check_vertices(face)
    if is_independent_set(g, members):
        raise PreconditionError("the face of an independent set is never left")
    if cfg.alpha > 0:
        raise PreconditionError("exit times are defined for the undrifted diffusion")
    x = _start(cfg, x0, n_paths)
    point = x[0]
    if any(point[i] <= 0 for i in members) or any(point[i] > 0 for i in range(g.vertex_count) if i not in members):
        raise PreconditionError("x0 must lie strictly inside the face")

    stepper = _Stepper(cfg, as_generator(rng))
    cols = sorted(members)
    times = np.full(n_paths, np.inf)
    alive = np.ones(n_paths, dtype=bool)
    n_steps = int(math.ceil(t_max / cfg.dt))
    for k in range(1, n_steps + 1):
        rows = np.flatnonzero(alive)
        if rows.size == 0:
            break
        block = x[rows]
        repaired = stepper.step(block)
        x[rows] = block
        # a reflected face coordinate crossed zero during the step
        hit = ((block[:, cols] <= 0.0) | repaired[:, cols]).any(axis=1)
        times[rows[hit]] = k * cfg.dt
        alive[rows[hit]] = False

    warnings: list[str] = []
    stepper.report(warnings)
    size = len(cols)
    return ExitTimeSample(
        times=times,
        face=frozenset(members),
        x0=point.copy(),
        t_max=t_max,
        lower_bound_constant=math.prod(float(point[i]) for i in cols) * size ** size,
        face_edges=g.induced_edge_count(cols),
    )


# ---------------- supports ----------------

@dataclass
class SupportProfile:
    frequencies: dict[frozenset[int], float]
    n_paths: int
    t_end: float
    eps: float

    def std_error(self, support: frozenset[int]) -> float:
        return proportion_std_error(self.frequencies.get(support, 0.0), self.n_paths)

    def to_document(self) -> dict:
        return {
            "paths": self.n_paths,
            "t": self.t_end,
            "eps": self.eps,
            "supports": [
                {"set": sorted(v + 1 for v in s), "frequency": f, "stdError": self.std_error(s)}
                for s, f in sorted(self.frequencies.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))
            ],
        }


def empirical_support_profile(
    cfg: SdeConfig,
    x0: "SimplexPoint | Sequence[float]",
    t_end: float,
    n_paths: int,
    rng: "np.random.Generator | SeedRecord | int | None" = None,
    *,
    eps: float = SUPPORT_EPS,
) -> SupportProfile:
    if cfg.alpha > 0:
        raise PreconditionError("support profiles are defined for the undrifted diffusion")
    run = simulate_sde(cfg, x0, t_end, rng, n_paths=n_paths)
    return support_profile(run.final, t_end, eps)


def support_profile(final: np.ndarray, t_end: float, eps: float = SUPPORT_EPS) -> SupportProfile:
    """Frequencies of the coordinate supports {i : x_i > eps} over the rows of ``final``."""
    counts: dict[frozenset[int], int] = {}
    for row in final:
        support = frozenset(int(i) for i in np.flatnonzero(row > eps))
        counts[support] = counts.get(support, 0) + 1
    n_paths = int(final.shape[0])
    return SupportProfile(
        frequencies={s: c / n_paths for s, c in counts.items()},
        n_paths=n_paths,
        t_end=t_end,
        eps=eps,
    )
