# graphdual/cli/independent_sets.py
from __future__ import annotations
import argparse
from collections import Counter

from graphdual.cli.common import RunContext, add_output_flags, add_seed_flags, graph_arg, validated
from graphdual.engine.graph_core import is_independent_set
from graphdual.engine.particles import FinderConfig, find_independent_set
from graphdual.schemas.models import FindIsParams


def register(subparsers) -> None:
    p = subparsers.add_parser("find-is", help="randomised independent-set search with colliding particles")
    p.add_argument("--graph", required=True)
    p.add_argument("--particles", type=int, required=True, help="N, at least the vertex count")
    p.add_argument("--threshold", type=int, default=None, help="M, default 50 N^2")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--method", choices=("jump", "literal"), default="jump")
    add_seed_flags(p)
    add_output_flags(p)
    p.set_defaults(handler=run)


def run(args: argparse.Namespace, ctx: RunContext) -> None:
    params = validated(
        FindIsParams,
        graph=args.graph,
        particles=args.particles,
        threshold=args.threshold,
        runs=args.runs,
        method=args.method,
    )
    g = graph_arg(params.graph)
    cfg = FinderConfig(particles=params.particles, threshold=params.threshold, method=params.method)
    seed = ctx.seed(args.seed)

    results = [find_independent_set(g, cfg, seed.child(k)) for k in range(params.runs)]
    converged = [res for res in results if res.converged]
    sets = Counter(tuple(sorted(v + 1 for v in res.vertices)) for res in converged)
    summary = {
        "runs": params.runs,
        "converged": len(converged),
        "convergedFraction": len(converged) / params.runs,
        "allIndependent": all(is_independent_set(g, res.vertices) for res in converged),
        "threshold": cfg.effective_threshold,
        "sets": [
            {"set": list(members), "count": count, "frequency": count / params.runs}
            for members, count in sorted(sets.items(), key=lambda kv: (-kv[1], kv[0]))
        ],
    }
    ctx.table(
        "runs.csv",
        ["run", "converged", "iterations", "set"],
        [[k, res.converged, res.iterations, " ".join(str(v + 1) for v in sorted(res.vertices))]
         for k, res in enumerate(results)],
    )
    ctx.emit(params, {"graph": g.to_document(), "summary": summary,
                      "runs": [res.to_document() for res in results]}, seed)
