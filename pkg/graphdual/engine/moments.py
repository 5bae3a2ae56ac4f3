# graphdual/engine/moments.py
"""
Moments of the diffusion on the simplex.

Time-dependent moments solve the closed linear system ``m' = (R - diag(k)) m``
indexed by multi-indices (the dual chain's generator minus its killing
rate). Stationary moments of the drifted diffusion solve the same system at
equilibrium, one order at a time, with ``m_0 = 1``. Closed forms used as
oracles live here too.
"""
from __future__ import annotations
import csv
import io
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Literal, Optional, Sequence, Union

import numpy as np
import structlog
from scipy import linalg, sparse
from scipy.sparse.linalg import expm_multiply

from graphdual.core.errors import DomainError, GuardError, PreconditionError, SimulationError, ValidationError
from graphdual.core.rng import SeedRecord
from graphdual.core.settings import settings
from graphdual.engine.dual_chain import (
    DENSE_EXPM_LIMIT,
    ChainConfig,
    generator_entries,
    killing_rate,
    rate_row,
    simulate_batch,
)
from graphdual.engine.graph_core import GraphSpec, is_independent_set
from graphdual.engine.partitions import (
    InvariantSpec,
    Number,
    Partition,
    as_partition,
    embed,
    enumerate_partitions,
    evaluate_monomial,
    invariant_coefficients,
    partition_count,
    rising,
)
from graphdual.engine.simplex import SimplexPoint, as_simplex
from graphdual.engine.stats import RunningMoments
from graphdual.engine.strategies.registry import build_arithmetic

log = structlog.get_logger(__name__)

MomentKind = Literal["time_dependent", "stationary"]


def format_value(value: Number) -> Union[str, float]:
    """Rationals serialise as ``"p/q"``; floats stay floats."""
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, int):
        return f"{value}/1"
    return float(value)


@dataclass
class MomentTable:
    entries: dict[Partition, Number]
    order: int
    kind: MomentKind
    vertex_count: int
    t: Optional[float] = None
    alpha: Optional[Number] = None

    def value(self, a: Sequence[int]) -> Number:
        a = as_partition(a, self.vertex_count)
        if sum(a) > self.order:
            raise DomainError(f"moment of order {sum(a)} requested from a table of order {self.order}")
        try:
            return self.entries[a]
        except KeyError:
            raise DomainError(f"moment {a} is not covered by this {self.kind} table") from None

    __getitem__ = value

    def __len__(self) -> int:
        return len(self.entries)

    def rows(self) -> list[dict]:
        return [{"a": list(a), "value": format_value(v)} for a, v in self.entries.items()]

    def to_document(self) -> dict:
        doc: dict = {"kind": self.kind, "order": self.order, "vertices": self.vertex_count, "rows": self.rows()}
        if self.t is not None:
            doc["t"] = self.t
        if self.alpha is not None:
            doc["alpha"] = format_value(self.alpha)
        return doc

    def csv_header(self) -> list[str]:
        header = [f"a_{i + 1}" for i in range(self.vertex_count)] + ["value"]
        return ["t", *header] if self.t is not None else header

    def csv_rows(self) -> list[list]:
        prefix = [self.t] if self.t is not None else []
        return [[*prefix, *a, format_value(v)] for a, v in self.entries.items()]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.csv_header())
        writer.writerows(self.csv_rows())
        return buf.getvalue()


# ---------------- time-dependent moments ----------------

def moment_states(r: int, n: int, drifted: bool) -> list[Partition]:
    if not drifted:
        return enumerate_partitions(n, r)
    return [a for k in range(n + 1) for a in enumerate_partitions(k, r)]


def check_state_count(r: int, n: int, drifted: bool, guard: Optional[int]) -> int:
    guard = guard or settings.STATE_SPACE_GUARD
    count = math.comb(n + r, r) if drifted else partition_count(n, r)
    if count > guard:
        raise GuardError(f"order {n} on {r} vertices needs {count} moment states, guard is {guard}")
    return count


def moment_generator(
    g: GraphSpec, n: int, alpha: Number = 0, *, guard: Optional[int] = None
) -> tuple[list[Partition], sparse.csr_matrix]:
    """Ordered states and the sparse matrix of the closed moment system of order ``n``."""
    if n < 0:
        raise DomainError(f"order must be non-negative, got {n}")
    cfg = ChainConfig.for_alpha(g, alpha)
    check_state_count(g.vertex_count, n, cfg.drifted, guard)
    states = moment_states(g.vertex_count, n, cfg.drifted)
    rows, cols, vals = [], [], []
    for i, j, v in generator_entries(cfg, states, with_killing=True):
        rows.append(i)
        cols.append(j)
        vals.append(float(v))
    matrix = sparse.csr_matrix((vals, (rows, cols)), shape=(len(states), len(states)))
    return states, matrix


def solve_moment_ode(
    g: GraphSpec,
    x0: "SimplexPoint | Sequence[float]",
    n: int,
    t_grid: Sequence[float],
    alpha: Number = 0,
    *,
    guard: Optional[int] = None,
) -> list[MomentTable]:
    """
    One table per time in ``t_grid``. Without drift the tables cover every
    multi-index of order ``n``; with drift, every order up to ``n``.
    """
    x = as_simplex(x0)
    if x.dimension != g.vertex_count:
        raise DomainError(f"x0 has {x.dimension} coordinates, graph has {g.vertex_count} vertices")
    if n < 1:
        raise DomainError(f"order must be at least 1, got {n}")
    if any(t < 0 for t in t_grid):
        raise DomainError("times must be non-negative")
    states, matrix = moment_generator(g, n, alpha, guard=guard)
    m0 = np.array([float(evaluate_monomial(x, a)) for a in states])
    dense = matrix.toarray() if len(states) <= DENSE_EXPM_LIMIT else None

    tables = []
    for t in t_grid:
        if t == 0:
            m = m0
        elif dense is not None:
            m = linalg.expm(dense * t) @ m0
        else:
            m = expm_multiply(matrix * t, m0)
        tables.append(MomentTable(
            entries={a: float(v) for a, v in zip(states, m)},
            order=n,
            kind="time_dependent",
            vertex_count=g.vertex_count,
            t=float(t),
            alpha=alpha if alpha else None,
        ))
    log.debug("moments.ode_solved", graph=g.label, order=n, states=len(states), times=len(t_grid))
    return tables


def invariant_value(spec: InvariantSpec, moments: "MomentTable | SimplexPoint | Sequence[float]", r: int) -> float:
    """Sum of f(n,a) times the moment (or monomial) at each embedded index."""
    total = 0.0
    for local, coef in invariant_coefficients(spec).items():
        a = embed(local, spec.independent_set, r)
        if isinstance(moments, MomentTable):
            total += float(coef) * float(moments.value(a))
        else:
            total += float(coef) * float(evaluate_monomial(moments, a))
    return total


def check_invariant_support(g: GraphSpec, spec: InvariantSpec) -> list[int]:
    """Vertices adjacent to every member of V_I; raises if there are none."""
    members = g.check_vertices(spec.independent_set)
    if not is_independent_set(g, members):
        raise PreconditionError(f"{sorted(v + 1 for v in members)} is not an independent set of {g.label}")
    shared = [j for j in range(g.vertex_count) if members <= g.neighbours[j]]
    if not shared:
        raise PreconditionError(
            f"vertices {sorted(v + 1 for v in members)} share no adjacent vertex in {g.label}"
        )
    if len({g.neighbours[v] for v in members}) > 1:
        log.warning("moments.invariant_neighbourhoods_differ", graph=g.label, vertices=sorted(members))
    return shared


def invariant_drift_check(
    g: GraphSpec,
    spec: InvariantSpec,
    x0: "SimplexPoint | Sequence[float]",
    t_grid: Sequence[float],
    *,
    guard: Optional[int] = None,
) -> float:
    check_invariant_support(g, spec)
    x = as_simplex(x0)
    start = invariant_value(spec, x, g.vertex_count)
    tables = solve_moment_ode(g, x, spec.order, list(t_grid), guard=guard)
    deviation = max((abs(invariant_value(spec, tab, g.vertex_count) - start) for tab in tables), default=0.0)
    log.debug("moments.invariant_checked", graph=g.label, order=spec.order, deviation=deviation)
    return deviation


# ---------------- stationary moments ----------------

def solve_stationary_recurrence(
    g: GraphSpec,
    alpha: Number,
    a_max: "int | Sequence[int]",
    *,
    backend: Optional[str] = None,
    guard: Optional[int] = None,
) -> MomentTable:
    """
    Stationary moments of every order up to ``a_max`` (an order, or a
    multi-index whose order is used). Orders are solved in increasing
    order; each one is a sparse linear system fed by the order below.
    """
    n = a_max if isinstance(a_max, int) else sum(as_partition(a_max, g.vertex_count))
    arithmetic = build_arithmetic(backend)
    alpha = arithmetic.coerce(alpha)
    if alpha <= 0:
        raise ValidationError(f"alpha must be positive, got {alpha}")
    if n < 0:
        raise DomainError(f"order must be non-negative, got {n}")
    check_state_count(g.vertex_count, n, True, guard)
    cached = _stationary_table(g, alpha, n, arithmetic.name)
    # callers own their copy; the cached table stays untouched
    return replace(cached, entries=dict(cached.entries))


@lru_cache(maxsize=64)
def _stationary_table(g: GraphSpec, alpha: Number, n: int, backend: str) -> MomentTable:
    arithmetic = build_arithmetic(backend)
    cfg = ChainConfig.for_alpha(g, alpha)
    r = g.vertex_count
    one = arithmetic.coerce(1)
    entries: dict[Partition, Number] = {tuple([0] * r): one}

    for k in range(1, n + 1):
        states = enumerate_partitions(k, r)
        index = {a: j for j, a in enumerate(states)}
        rows: list[dict[int, Number]] = []
        rhs: list[Number] = []
        for a in states:
            rr = rate_row(cfg, a)
            row: dict[int, Number] = {index[a]: arithmetic.coerce(rr.diagonal - killing_rate(cfg, a))}
            b = arithmetic.coerce(0)
            for target, rate in rr.moves:
                if sum(target) == k:
                    row[index[target]] = arithmetic.coerce(rate)
                else:
                    b -= arithmetic.coerce(rate) * entries[target]
            rows.append(row)
            rhs.append(b)
        solution = arithmetic.solve(rows, rhs)
        for a, v in zip(states, solution):
            if v <= 0:
                raise SimulationError(f"non-positive stationary moment {v} at {a}; system is ill-conditioned")
            entries[a] = v
        log.debug("moments.stationary_order_solved", graph=g.label, order=k, states=len(states))

    return MomentTable(entries=entries, order=n, kind="stationary", vertex_count=r, alpha=alpha)


# ---------------- closed forms ----------------

def dirichlet_moment(r: int, alpha: Number, a: Sequence[int]) -> Number:
    """Moment of the symmetric Dirichlet(alpha, ..., alpha) law on r coordinates."""
    a = as_partition(a, r)
    if isinstance(alpha, int):
        alpha = Fraction(alpha)
    num = math.prod((rising(alpha, k) for k in a), start=Fraction(1) if isinstance(alpha, Fraction) else 1.0)
    return num / rising(r * alpha, sum(a))


def ewens_probability(theta: Number, a: Sequence[int]) -> Number:
    a = as_partition(a)
    if not a or any(v < 1 for v in a):
        raise DomainError(f"block sizes must all be positive, got {a}")
    if isinstance(theta, int):
        theta = Fraction(theta)
    n, l = sum(a), len(a)
    return theta ** l / rising(theta, n) * math.prod(math.factorial(v - 1) for v in a)


@dataclass(frozen=True)
class StarAbsorption:
    """Absorption masses on e_1, e_2, e_3 and the edge conv{e_2, e_3} of the star S_2."""

    p1: float
    p2: float
    p3: float
    p23: float

    def as_dict(self) -> dict[frozenset[int], float]:
        return {
            frozenset({0}): self.p1,
            frozenset({1}): self.p2,
            frozenset({2}): self.p3,
            frozenset({1, 2}): self.p23,
        }


def s2_absorption_masses(x: "SimplexPoint | Sequence[float]") -> StarAbsorption:
    """Vertex 1 is the centre of the star."""
    x = as_simplex(x)
    if x.dimension != 3:
        raise DomainError(f"the star S_2 has 3 vertices, got a point with {x.dimension}")
    x1, x2, x3 = (float(c) for c in x.coords)
    if not 0.0 < x1 < 1.0:
        raise PreconditionError(f"the centre coordinate must lie in (0, 1), got {x1}")

    def leaf(xi: float) -> float:
        return (x1 / 2.0) * ((2.0 - x1) / math.sqrt((2.0 - x1) ** 2 - 4.0 * xi) - 1.0)

    p2, p3 = leaf(x2), leaf(x3)
    p23 = max(1.0 - x1 - p2 - p3, 0.0)
    return StarAbsorption(p1=x1, p2=p2, p3=p3, p23=p23)


@dataclass(frozen=True)
class ExitSeries:
    value: float
    raw: float
    terms: int
    flagged: bool


def _subset_power_sums(x: Sequence[Fraction]):
    """Yields S_l = sum over W of (-1)^(s-|W|) (sum_W x)^l for l = 0, 1, 2, ..."""
    s = len(x)
    sigmas, signs = [], []
    for size in range(s + 1):
        for members in combinations(range(s), size):
            sigmas.append(sum((x[i] for i in members), Fraction(0)))
            signs.append(-1 if (s - size) % 2 else 1)
    powers = [Fraction(1)] * len(sigmas)
    while True:
        yield sum((sg * p for sg, p in zip(signs, powers)), Fraction(0))
        powers = [p * sig for p, sig in zip(powers, sigmas)]


def exit_survival_series(
    r: int,
    s: int,
    x: "SimplexPoint | Sequence[float]",
    t: float,
    series_tol: float = 1e-10,
    *,
    index_cap: Optional[int] = None,
    guard: Optional[int] = None,
) -> ExitSeries:
    """P(tau_U > t) on K_r for a face U of size s, with truncation details."""
    if not 2 <= s <= r:
        raise DomainError(f"need 2 <= s <= r, got s={s}, r={r}")
    point = as_simplex(x)
    if point.dimension != s:
        raise DomainError(f"x must have s={s} coordinates, got {point.dimension}")
    if np.any(point.coords <= 0):
        raise PreconditionError("x must lie strictly inside the face")
    guard = guard or settings.INCLUSION_EXCLUSION_GUARD
    if s > guard:
        raise GuardError(f"inclusion-exclusion over {s} face vertices exceeds guard of {guard}")
    if t <= 0:
        return ExitSeries(value=1.0, raw=1.0, terms=0, flagged=False)
    cap = index_cap or settings.SERIES_INDEX_CAP

    sums_iter = _subset_power_sums([Fraction(float(c)) for c in point.coords])
    power_sums: list[Fraction] = []

    def power_sum(l: int) -> Fraction:
        while len(power_sums) <= l:
            power_sums.append(next(sums_iter))
        return power_sums[l]

    partial = 0.0
    i = s
    while True:
        if i - s > cap:
            raise GuardError(f"exit-time series did not converge within {cap} terms at t={t}")
        inner = Fraction(0)
        coef = Fraction(1)  # (2-i)_l (i+1)_l / (l! (l+1)!)
        for l in range(i - 1):
            if l >= s - 2:
                inner += coef * (power_sum(l + 2) - power_sum(l + 1))
            coef = coef * (2 - i + l) * (i + 1 + l) / ((l + 1) * (l + 2))
        weight = (2 * i - 1) * (-1) ** i * math.exp(-i * (i - 1) * t / 2.0)
        term = weight * float(inner)
        partial += term
        if i >= s + 5 and abs(term) <= series_tol * abs(partial):
            break
        i += 1

    flagged = partial < -10 * series_tol or partial > 1 + 10 * series_tol
    if flagged:
        log.warning("moments.exit_series_out_of_range", s=s, t=t, value=partial)
    value = min(max(partial, 0.0), 1.0)
    return ExitSeries(value=value, raw=partial, terms=i - s + 1, flagged=flagged)


def complete_graph_exit_cdf(
    r: int,
    s: int,
    x: "SimplexPoint | Sequence[float]",
    t: float,
    series_tol: float = 1e-10,
    *,
    index_cap: Optional[int] = None,
) -> float:
    """Survival probability P_x(tau_U > t) of the face interior, clamped to [0, 1]."""
    return exit_survival_series(r, s, x, t, series_tol, index_cap=index_cap).value


def exit_survival_asymptote(s: int, x: Sequence[float], t: float) -> float:
    double_factorial = math.prod(range(2 * s - 1, 0, -2))
    return double_factorial * 2 ** (s - 1) * math.prod(float(c) for c in x) * math.exp(-s * (s - 1) * t / 2.0)


# ---------------- duality by simulation ----------------

@dataclass
class FeynmanKacEstimate:
    mean: float
    std_error: float
    samples: int
    seed: Optional[SeedRecord] = field(default=None)


def feynman_kac_moment(
    cfg: ChainConfig,
    a: Sequence[int],
    x: "SimplexPoint | Sequence[float]",
    t: float,
    n_paths: int,
    rng: "np.random.Generator | SeedRecord | int | None" = None,
) -> FeynmanKacEstimate:
    """Monte Carlo value of E_a[x^a(t) exp(-int k)], the dual side of m_a(t)."""
    point = as_simplex(x)
    a = cfg.check_state(a)
    if n_paths < 2:
        raise ValidationError("n_paths must be at least 2")
    if t == 0:
        return FeynmanKacEstimate(mean=float(evaluate_monomial(point, a)), std_error=0.0, samples=n_paths)
    batch = simulate_batch(cfg, a, n_paths, horizon=t, rng=rng)
    values = np.prod(point.coords[None, :] ** batch.final_states, axis=1) * np.exp(-batch.killing)
    acc = RunningMoments()
    acc.push_batch(values)
    return FeynmanKacEstimate(mean=acc.mean, std_error=acc.std_error, samples=acc.count, seed=batch.seed)

