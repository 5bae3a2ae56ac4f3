# graphdual/cli/simulate.py
from __future__ import annotations
import argparse
import math

import numpy as np

from graphdual.cli.common import RunContext, add_output_flags, add_seed_flags, graph_arg, parse_floats, parse_ints, validated
from graphdual.core.errors import ValidationError
from graphdual.core.settings import settings
from graphdual.engine.dual_chain import (
    ChainConfig, LongRun, classify_long_run, is_absorbing_01, long_run_law, occupancy_histogram,
    simulate_batch, simulate_path, total_variation,
)
from graphdual.engine.particles import initial_positions, run_compromise_process
from graphdual.engine.sde import SdeConfig, simulate_sde, support_profile
from graphdual.engine.simplex import SimplexPoint
from graphdual.schemas.models import SimulateDiscreteParams, SimulateDualParams, SimulateSdeParams


def register(subparsers) -> None:
    d = subparsers.add_parser("simulate-dual", help="Gillespie paths of the dual particle chain")
    d.add_argument("--graph", required=True)
    d.add_argument("--alpha", type=float, default=0.0)
    d.add_argument("--start", required=True, help="initial particle counts, e.g. 2,1,0,1")
    d.add_argument("--t", type=float, default=None, help="horizon (default: run to absorption)")
    d.add_argument("--paths", type=int, default=1_000)
    d.add_argument("--export-paths", type=int, default=1, help="full paths written as path_<k>.jsonl")
    add_seed_flags(d)
    add_output_flags(d)
    d.set_defaults(handler=run_dual)

    s = subparsers.add_parser("simulate-sde", help="Euler-Maruyama paths of the simplex diffusion")
    s.add_argument("--graph", required=True)
    s.add_argument("--alpha", type=float, default=0.0)
    s.add_argument("--x0", default=None, help="initial point (default: uniform)")
    s.add_argument("--dt", type=float, default=1e-4)
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--paths", type=int, default=100)
    s.add_argument("--record-every", type=int, default=None)
    s.add_argument("--boundary-policy", default=None, help="absorb_at_zero (default) or reflect_clip")
    s.add_argument("--eps", type=float, default=1e-6, help="support threshold")
    add_seed_flags(s)
    add_output_flags(s)
    s.set_defaults(handler=run_sde)

    c = subparsers.add_parser("simulate-discrete", help="raw collision dynamics of N particles")
    c.add_argument("--graph", required=True)
    group = c.add_mutually_exclusive_group(required=True)
    group.add_argument("--n0", default=None, help="initial counts per vertex")
    group.add_argument("--particles", type=int, default=None, help="N particles, one per vertex then uniform")
    c.add_argument("--steps", type=int, required=True)
    c.add_argument("--record-every", type=int, default=1)
    c.add_argument("--alpha", type=float, default=0.0)
    add_seed_flags(c)
    add_output_flags(c)
    c.set_defaults(handler=run_discrete)


def _summary(values: np.ndarray) -> dict:
    n = values.size
    std = float(values.std(ddof=1)) if n > 1 else 0.0
    return {"mean": float(values.mean()), "stdError": std / math.sqrt(n)}


def run_dual(args: argparse.Namespace, ctx: RunContext) -> None:
    params = validated(
        SimulateDualParams,
        graph=args.graph,
        alpha=args.alpha,
        start=parse_ints(args.start),
        t=args.t,
        paths=args.paths,
        export_paths=args.export_paths,
    )
    g = graph_arg(params.graph)
    cfg = ChainConfig.for_alpha(g, params.alpha)
    start = cfg.check_state(params.start)
    long_run = None if cfg.drifted else classify_long_run(cfg, start)
    if params.t is None and long_run is LongRun.UNIFORM_ON_POSITIVE_PARTITIONS:
        raise ValidationError(f"the chain from {sum(start)} > r particles never absorbs; pass --t")
    seed = ctx.seed(args.seed)

    batch = simulate_batch(cfg, start, params.paths, horizon=params.t, rng=seed.child(0))
    histogram = occupancy_histogram(batch.final_states)
    result: dict = {
        "graph": g.to_document(),
        "start": list(start),
        "time": _summary(batch.times),
        "killing": _summary(batch.killing),
        "events": _summary(batch.events.astype(float)),
        "absorbedFraction": float(batch.absorbed.mean()),
        "finalStates": [
            {"state": list(state), "frequency": freq}
            for state, freq in sorted(histogram.items(), key=lambda kv: -kv[1])
        ],
    }
    if long_run is not None:
        result["longRun"] = long_run.value
        if long_run is LongRun.ABSORBS_INTO_01:
            result["absorbedInto01Fraction"] = float(
                sum(freq for state, freq in histogram.items() if is_absorbing_01(state))
            )
        elif math.comb(sum(start) - 1, g.vertex_count - 1) <= settings.STATE_SPACE_GUARD:
            result["tvToUniform"] = total_variation(histogram, long_run_law(cfg, start))

    if params.export_paths:
        count = min(params.export_paths, params.paths)
        for k in range(count):
            path = simulate_path(cfg, start, params.t, seed.child(1 + k))
            ctx.repo.write_text(f"path_{k + 1}.jsonl", path.to_jsonl())
    ctx.table(
        "final_states.csv",
        ["state", "frequency"],
        [[" ".join(map(str, state)), freq] for state, freq in histogram.items()],
    )
    ctx.emit(params, result, seed)


def run_sde(args: argparse.Namespace, ctx: RunContext) -> None:
    params = validated(
        SimulateSdeParams,
        graph=args.graph,
        alpha=args.alpha,
        x0=parse_floats(args.x0) if args.x0 else None,
        dt=args.dt,
        t=args.t,
        paths=args.paths,
        record_every=args.record_every,
        boundary_policy=args.boundary_policy,
        eps=args.eps,
    )
    g = graph_arg(params.graph)
    cfg = SdeConfig(
        graph=g, alpha=params.alpha, dt=params.dt,
        boundary_policy=params.boundary_policy or "absorb_at_zero",
    )
    x0 = params.x0 or SimplexPoint.uniform(g.vertex_count)
    seed = ctx.seed(args.seed)
    run = simulate_sde(cfg, x0, params.t, seed, n_paths=params.paths, record_every=params.record_every)

    final = run.final
    result: dict = {
        "graph": g.to_document(),
        "x0": [float(v) for v in x0],
        "finalMean": final.mean(axis=0).tolist(),
        "finalSecondMoment": (final ** 2).mean(axis=0).tolist(),
        "clipFraction": run.clip_fraction,
        "renormalisationDrift": run.renormalisation_drift,
        "warnings": run.warnings,
    }
    if cfg.alpha == 0:
        result["supports"] = support_profile(final, params.t, params.eps).to_document()
    ctx.repo.write_csv(
        "paths.csv",
        ["path", "t", *(f"x{i + 1}" for i in range(g.vertex_count))],
        run.to_rows(),
    )
    ctx.emit(params, result, seed)


def run_discrete(args: argparse.Namespace, ctx: RunContext) -> None:
    params = validated(
        SimulateDiscreteParams,
        graph=args.graph,
        n0=parse_ints(args.n0) if args.n0 else None,
        particles=args.particles,
        steps=args.steps,
        record_every=args.record_every,
        alpha=args.alpha,
    )
    g = graph_arg(params.graph)
    seed = ctx.seed(args.seed)
    gen = seed.generator()
    if params.n0 is not None:
        n0 = params.n0
    else:
        if params.particles < g.vertex_count:
            raise ValidationError(f"need at least one particle per vertex: N={params.particles} < r={g.vertex_count}")
        positions = initial_positions(g.vertex_count, params.particles, gen)
        n0 = np.bincount(positions, minlength=g.vertex_count).tolist()
    traj = run_compromise_process(g, n0, params.steps, params.record_every, gen, alpha=params.alpha)

    ctx.repo.write_csv(
        "trajectory.csv",
        ["step", "t", *(f"x{i + 1}" for i in range(g.vertex_count))],
        traj.to_rows(),
    )
    result = {
        "graph": g.to_document(),
        "n0": [int(v) for v in n0],
        "particles": traj.particles,
        "records": int(traj.steps.size),
        "final": traj.states[-1].tolist(),
        "absorbedAt": traj.absorbed_at,
    }
    ctx.emit(params, result, seed)
