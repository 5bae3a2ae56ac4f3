# graphdual/cli/moments.py
from __future__ import annotations
import argparse

from graphdual.cli.common import (
    RunContext, add_output_flags, graph_arg, parse_floats, parse_rational, validated,
)
from graphdual.core.errors import ValidationError
from graphdual.engine.moments import check_state_count, solve_moment_ode, solve_stationary_recurrence
from graphdual.engine.simplex import SimplexPoint
from graphdual.schemas.models import MomentsParams


def register(subparsers) -> None:
    p = subparsers.add_parser(
        "moments",
        help="stationary moments (with --alpha) or time-dependent moments (with --t)",
    )
    p.add_argument("--graph", required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--alpha", default=None, help="drift strength, rational text allowed (1/4)")
    p.add_argument("--t", default=None, help="comma-separated times for the moment ODE")
    p.add_argument("--x0", default=None, help="comma-separated initial point (default: uniform)")
    p.add_argument("--exact", action="store_true", help="rational arithmetic for stationary moments")
    add_output_flags(p)
    p.set_defaults(handler=run)


def run(args: argparse.Namespace, ctx: RunContext) -> None:
    params = validated(
        MomentsParams,
        graph=args.graph,
        order=args.order,
        alpha=args.alpha,
        t=parse_floats(args.t) if args.t else None,
        x0=parse_floats(args.x0) if args.x0 else None,
        exact=args.exact,
    )
    g = graph_arg(params.graph)
    alpha = parse_rational(params.alpha) if params.alpha is not None else None
    check_state_count(g.vertex_count, params.order, bool(alpha) or params.t is None, None)

    if params.t is None:
        if alpha is None:
            raise ValidationError("stationary moments need --alpha; pass --t for time-dependent moments")
        table = solve_stationary_recurrence(
            g, alpha if params.exact else float(alpha), params.order,
            backend="exact" if params.exact else "float",
        )
        result = {"graph": g.to_document(), "table": table.to_document()}
        ctx.table("moments.csv", table.csv_header(), table.csv_rows())
    else:
        if params.exact:
            raise ValidationError("--exact applies to stationary moments; the moment ODE is solved in floating point")
        x0 = params.x0 or SimplexPoint.uniform(g.vertex_count)
        tables = solve_moment_ode(g, x0, params.order, params.t, alpha=float(alpha) if alpha else 0)
        result = {"graph": g.to_document(), "tables": [tab.to_document() for tab in tables]}
        ctx.table("moments.csv", tables[0].csv_header(), [row for tab in tables for row in tab.csv_rows()])
    ctx.emit(params, result)