# graphdual/cli/estimate.py
from __future__ import annotations
import argparse

from graphdual.cli.common import (
    RunContext, add_output_flags, add_seed_flags, graph_arg, parse_ints, parse_names, parse_rational, validated,
)
from graphdual.engine.cftp import estimate_moment, select_graph, step_count_statistics
from graphdual.engine.moments import format_value
from graphdual.schemas.models import EstimateParams, SelectGraphParams


def register(subparsers) -> None:
    p = subparsers.add_parser("estimate", help="Monte Carlo estimate of a stationary moment")
    p.add_argument("--graph", required=True)
    p.add_argument("--a", required=True, help="sample counts per vertex, e.g. 1,0,1,0")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--steps", action="store_true", help="also report event counts per replicate")
    add_seed_flags(p, threads=True)
    add_output_flags(p)
    p.set_defaults(handler=run_estimate)

    s = subparsers.add_parser("select-graph", help="expected sample probabilities and Bayes factors")
    s.add_argument("--graphs", required=True, help="comma-separated graph names or files")
    s.add_argument("--a", required=True)
    s.add_argument("--alpha", required=True)
    s.add_argument("--mode", choices=("exact", "mc"), default="exact")
    s.add_argument("--samples", type=int, default=100_000)
    add_seed_flags(s, threads=True)
    add_output_flags(s)
    s.set_defaults(handler=run_select)


def run_estimate(args: argparse.Namespace, ctx: RunContext) -> None:
    params = validated(
        EstimateParams,
        graph=args.graph,
        a=parse_ints(args.a),
        alpha=args.alpha,
        samples=args.samples,
        threads=args.threads,
        steps=args.steps,
    )
    g = graph_arg(params.graph)
    seed = ctx.seed(args.seed)
    est = estimate_moment(g, params.a, params.alpha, params.samples, seed, threads=params.threads)
    result = {"estimate": est.to_document()}
    if params.steps:
        steps = step_count_statistics(g, params.a, params.alpha, params.samples, seed, threads=params.threads)
        result["steps"] = steps.to_document()
    ctx.table("estimate.csv", ["graph", "mean", "std_error", "samples"],
              [[g.label, est.mean, est.std_error, est.samples]])
    ctx.emit(params, result, seed)


def run_select(args: argparse.Namespace, ctx: RunContext) -> None:
    params = validated(
        SelectGraphParams,
        graphs=parse_names(args.graphs),
        a=parse_ints(args.a),
        alpha=args.alpha,
        mode=args.mode,
        samples=args.samples,
        threads=args.threads,
    )
    graphs = [graph_arg(ref) for ref in params.graphs]
    alpha = parse_rational(params.alpha)
    seed = ctx.seed(args.seed) if params.mode == "mc" else None
    report = select_graph(
        graphs, params.a, alpha if params.mode == "exact" else float(alpha),
        mode=params.mode, n_samples=params.samples, rng=seed, threads=params.threads,
    )
    ctx.table(
        "bayes_factors.csv",
        ["graph", "probability", *report.candidates],
        [[label, format_value(p), *map(format_value, row)]
         for label, p, row in zip(report.candidates, report.probabilities, report.bayes_factors)],
    )
    ctx.emit(params, {"selection": report.to_document(), "best": report.best()}, seed)
