# graphdual/cli/spectrum.py
from __future__ import annotations
import argparse

from graphdual.cli.common import RunContext, add_output_flags, graph_arg, validated
from graphdual.engine.dual_chain import dual_mixing_gap
from graphdual.engine.graph_core import enumerate_independent_sets, laplacian_spectrum
from graphdual.schemas.models import SpectrumParams


def register(subparsers) -> None:
    p = subparsers.add_parser("spectrum", help="Laplacian spectrum, dual mixing gap and independent sets")
    p.add_argument("--graph", required=True)
    p.add_argument("--independent-sets", action="store_true", help="also enumerate independent sets")
    p.add_argument("--all-sets", action="store_true", help="list every independent set, not only maximal ones")
    add_output_flags(p)
    p.set_defaults(handler=run)


def run(args: argparse.Namespace, ctx: RunContext) -> None:
    params = validated(
        SpectrumParams,
        graph=args.graph,
        independent_sets=args.independent_sets,
        maximal_only=not args.all_sets,
    )
    g = graph_arg(params.graph)
    eigenvalues = laplacian_spectrum(g)
    gap = dual_mixing_gap(g)
    result: dict = {
        "graph": g.to_document(),
        "eigenvalues": eigenvalues,
        "algebraicConnectivity": gap.algebraic_connectivity,
        "lowerBound": gap.lower_bound,
        "diameter": gap.diameter,
    }
    ctx.table("spectrum.csv", ["index", "eigenvalue"], enumerate(eigenvalues, start=1))
    if params.independent_sets:
        sets = enumerate_independent_sets(g, maximal_only=params.maximal_only)
        result["independentSets"] = {
            "maximalOnly": params.maximal_only,
            "sets": [sorted(v + 1 for v in s) for s in sets],
        }
    ctx.emit(params, result)
