# graphdual/engine/cftp.py
"""
Unbiased estimation of stationary moments by running the drifted dual chain
backwards until every particle is erased.

Each replicate returns ``exp(-int k(a(s)) ds)`` accumulated up to total
erasure; its mean is the stationary moment ``m_a(alpha)``. Replicates run in
fixed-size chunks, one Philox stream per chunk index, and chunk summaries are
merged in chunk order, so results do not depend on the worker count.
"""
from __future__ import annotations
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Optional, Sequence, Union

import numpy as np
import structlog

from graphdual.core.errors import ValidationError
from graphdual.core.rng import SeedRecord, resolve_seed, stream_records
from graphdual.core.settings import settings
from graphdual.engine.dual_chain import ChainConfig, simulate_batch, simulate_path
from graphdual.engine.graph_core import GraphSpec
from graphdual.engine.moments import format_value, solve_stationary_recurrence
from graphdual.engine.partitions import Number, Partition, as_partition, multinomial
from graphdual.engine.stats import RunningMoments
from graphdual.engine.strategies.arithmetic import to_fraction

log = structlog.get_logger(__name__)

Mode = Literal["exact", "monte_carlo"]
SeedLike = Union[SeedRecord, int, np.random.Generator, None]


@dataclass(frozen=True)
class EstimateTarget:
    graph: str
    a: Partition
    alpha: Number
    quantity: str = "moment"

    def to_document(self) -> dict:
        return {"graph": self.graph, "a": list(self.a), "alpha": format_value(self.alpha), "quantity": self.quantity}


@dataclass
class EstimateResult:
    mean: float
    std_error: float
    samples: int
    seed: SeedRecord
    target: EstimateTarget

    @property
    def flags(self) -> list[str]:
        # raw means are never clamped; a mean outside [0, 1] means too few samples
        return [] if 0.0 <= self.mean <= 1.0 else ["mean_outside_unit_interval"]

    def scaled(self, factor: int, quantity: str) -> "EstimateResult":
        target = EstimateTarget(self.target.graph, self.target.a, self.target.alpha, quantity)
        return EstimateResult(self.mean * factor, self.std_error * factor, self.samples, self.seed, target)

    def to_document(self) -> dict:
        return {
            "mean": self.mean,
            "stdError": self.std_error,
            "samples": self.samples,
            "seed": self.seed.model_dump(mode="json"),
            "target": self.target.to_document(),
            "flags": self.flags,
        }


@dataclass
class StepCountResult:
    mean: float
    std_error: float
    samples: int
    bound: float
    edge_count: int
    seed: SeedRecord

    @property
    def ratio(self) -> float:
        """Mean event count over the bound shape n + n(n-1)/(2 alpha)."""
        return self.mean / self.bound

    def to_document(self) -> dict:
        return {
            "mean": self.mean,
            "stdError": self.std_error,
            "samples": self.samples,
            "bound": self.bound,
            "ratio": self.ratio,
            "edgeCount": self.edge_count,
            "seed": self.seed.model_dump(mode="json"),
        }


@dataclass
class SelectionReport:
    candidates: list[str]
    probabilities: list[Number]
    bayes_factors: list[list[Number]]
    sample: Partition
    alpha: Number
    mode: Mode
    std_errors: Optional[list[float]] = None
    bayes_factor_std_errors: Optional[list[list[float]]] = None
    seed: Optional[SeedRecord] = field(default=None)

    def index(self, label: str) -> int:
        try:
            return self.candidates.index(label)
        except ValueError:
            raise ValidationError(f"unknown candidate {label!r}") from None

    def bayes_factor(self, g: str, h: str) -> Number:
        return self.bayes_factors[self.index(g)][self.index(h)]

    def best(self) -> str:
        k = max(range(len(self.candidates)), key=lambda i: self.probabilities[i])
        return self.candidates[k]

    def to_document(self) -> dict:
        doc: dict = {
            "mode": self.mode,
            "sample": list(self.sample),
            "alpha": format_value(self.alpha),
            "candidates": [
                {"graph": label, "probability": format_value(p)}
                for label, p in zip(self.candidates, self.probabilities)
            ],
            "bayesFactors": [[format_value(v) for v in row] for row in self.bayes_factors],
        }
        if self.std_errors is not None:
            for entry, se in zip(doc["candidates"], self.std_errors):
                entry["stdError"] = se
            doc["bayesFactorStdErrors"] = self.bayes_factor_std_errors
        if self.seed is not None:
            doc["seed"] = self.seed.model_dump(mode="json")
        return doc


# ---------------- single replicate ----------------

def _check_inputs(g: GraphSpec, a: Sequence[int], alpha: Number) -> tuple[Partition, ChainConfig]:
    a = as_partition(a, g.vertex_count)
    if alpha <= 0:
        raise ValidationError(f"alpha must be positive, got {alpha}")
    if sum(a) < 1:
        raise ValidationError("the sample must contain at least one particle")
    return a, ChainConfig.for_alpha(g, float(alpha))


def cftp_sample(
    g: GraphSpec,
    a: Sequence[int],
    alpha: Number,
    rng: "np.random.Generator | SeedRecord | int | None" = None,
    *,
    event_budget: Optional[int] = None,
) -> float:
    """One draw of exp(-int k) along a drifted dual path run to total erasure."""
    a, cfg = _check_inputs(g, a, alpha)
    path = simulate_path(cfg, a, horizon=None, rng=rng, event_budget=event_budget)
    return math.exp(-path.killing_integral)


# ---------------- chunked estimation ----------------

@dataclass(frozen=True)
class _Chunk:
    cfg: ChainConfig
    a: Partition
    size: int
    seed: SeedRecord
    budget: int


def _run_chunk(chunk: _Chunk) -> tuple[RunningMoments, RunningMoments]:
    batch = simulate_batch(chunk.cfg, chunk.a, chunk.size, horizon=None, rng=chunk.seed, event_budget=chunk.budget)
    values, events = RunningMoments(), RunningMoments()
    values.push_batch(np.exp(-batch.killing))
    events.push_batch(batch.events.astype(float))
    return values, events


def _root_seed(rng: SeedLike) -> SeedRecord:
    if isinstance(rng, SeedRecord):
        return rng
    if isinstance(rng, np.random.Generator):
        return SeedRecord(entropy=int(rng.integers(2**63)))
    return resolve_seed(rng)


def _run_replicates(
    cfg: ChainConfig,
    a: Partition,
    n_samples: int,
    root: SeedRecord,
    threads: Optional[int],
    chunk_size: Optional[int],
    event_budget: Optional[int],
) -> tuple[RunningMoments, RunningMoments]:
    size = chunk_size or settings.CHUNK_SIZE
    budget = event_budget or settings.EVENT_BUDGET
    starts = range(0, n_samples, size)
    chunks = [
        _Chunk(cfg=cfg, a=a, size=min(size, n_samples - start), seed=seed, budget=budget)
        for start, seed in zip(starts, stream_records(root, len(starts)))
    ]
    workers = min(settings.worker_count(threads), len(chunks))
    if workers <= 1:
        parts = [_run_chunk(c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, chunks))

    values, events = RunningMoments(), RunningMoments()
    for k, (v, e) in enumerate(parts):
        values.merge(v)
        events.merge(e)
        log.debug("cftp.chunk_merged", chunk=k, samples=v.count)
    return values, events


def estimate_moment(
    g: GraphSpec,
    a: Sequence[int],
    alpha: Number,
    n_samples: int,
    rng: SeedLike = None,
    *,
    threads: Optional[int] = None,
    chunk_size: Optional[int] = None,
    event_budget: Optional[int] = None,
) -> EstimateResult:
    if n_samples < 2:
        raise ValidationError(f"need at least 2 samples, got {n_samples}")
    a, cfg = _check_inputs(g, a, alpha)
    root = _root_seed(rng)
    values, _ = _run_replicates(cfg, a, n_samples, root, threads, chunk_size, event_budget)
    result = EstimateResult(
        mean=values.mean,
        std_error=values.std_error,
        samples=values.count,
        seed=root,
        target=EstimateTarget(graph=g.label, a=a, alpha=alpha),
    )
    log.info("cftp.estimated", graph=g.label, a=list(a), samples=result.samples, mean=result.mean,
             std_error=result.std_error)
    if result.flags:
        log.warning("cftp.mean_outside_unit_interval", graph=g.label, mean=result.mean)
    return result


def _normalise_mode(mode: str) -> Mode:
    key = mode.strip().lower().replace("-", "_")
    if key in ("exact",):
        return "exact"
    if key in ("monte_carlo", "mc"):
        return "monte_carlo"
    raise ValidationError(f"unknown mode {mode!r}; expected exact or monte_carlo")


def expected_sample_probability(
    g: GraphSpec,
    a: Sequence[int],
    alpha: Number,
    mode: str = "exact",
    n_samples: int = 100_000,
    rng: SeedLike = None,
    *,
    threads: Optional[int] = None,
    guard: Optional[int] = None,
) -> "Fraction | EstimateResult":
    """multinomial(a) * m_a(alpha): exactly, or as a Monte Carlo estimate."""
    a = as_partition(a, g.vertex_count)
    weight = multinomial(a)
    if _normalise_mode(mode) == "exact":
        table = solve_stationary_recurrence(g, to_fraction(alpha), sum(a), guard=guard)
        return weight * table.value(a)
    est = estimate_moment(g, a, alpha, n_samples, rng, threads=threads)
    return est.scaled(weight, "sample_probability")


def select_graph(
    candidates: Sequence[GraphSpec],
    a: Sequence[int],
    alpha: Number,
    mode: str = "exact",
    n_samples: int = 100_000,
    rng: SeedLike = None,
    *,
    threads: Optional[int] = None,
) -> SelectionReport:
    """Expected sample probabilities of ``a`` under each candidate and all pairwise Bayes factors."""
    if not candidates:
        raise ValidationError("at least one candidate graph is required")
    a = tuple(int(v) for v in a)
    for g in candidates:
        if g.vertex_count != len(a):
            raise ValidationError(f"{g.label} has {g.vertex_count} vertices but the sample has {len(a)} entries")
    labels = [g.label for g in candidates]
    mode = _normalise_mode(mode)

    if mode == "exact":
        exact_alpha = to_fraction(alpha)
        probs: list[Number] = [expected_sample_probability(g, a, exact_alpha) for g in candidates]
        factors = [[p / q for q in probs] for p in probs]
        report = SelectionReport(labels, probs, factors, a, exact_alpha, mode)
    else:
        root = _root_seed(rng)
        estimates = [
            expected_sample_probability(g, a, alpha, "monte_carlo", n_samples, root.child(k), threads=threads)
            for k, g in enumerate(candidates)
        ]
        probs = [e.mean for e in estimates]
        ses = [e.std_error for e in estimates]
        factors, factor_ses = [], []
        for p, sp in zip(probs, ses):
            row, row_se = [], []
            for q, sq in zip(probs, ses):
                bf = p / q if q else math.inf
                # delta method on the ratio of independent estimates
                rel = math.hypot(sp / p, sq / q) if p and q else math.inf
                row.append(bf)
                row_se.append(bf * rel if math.isfinite(bf) else math.inf)
            factors.append(row)
            factor_ses.append(row_se)
        report = SelectionReport(labels, probs, factors, a, float(alpha), mode, ses, factor_ses, root)

    log.info("cftp.graph_selected", mode=mode, best=report.best(), candidates=labels)
    return report


def step_count_statistics(
    g: GraphSpec,
    a: Sequence[int],
    alpha: Number,
    n_samples: int,
    rng: SeedLike = None,
    *,
    threads: Optional[int] = None,
    chunk_size: Optional[int] = None,
) -> StepCountResult:
    """Event counts per replicate, against the n + n(n-1)/(2 alpha) shape."""
    if n_samples < 2:
        raise ValidationError(f"need at least 2 samples, got {n_samples}")
    a, cfg = _check_inputs(g, a, alpha)
    root = _root_seed(rng)
    _, events = _run_replicates(cfg, a, n_samples, root, threads, chunk_size, None)
    n = sum(a)
    bound = n + n * (n - 1) / (2.0 * float(alpha))
    return StepCountResult(
        mean=events.mean,
        std_error=events.std_error,
        samples=events.count,
        bound=bound,
        edge_count=g.edge_count,
        seed=root,
    )
