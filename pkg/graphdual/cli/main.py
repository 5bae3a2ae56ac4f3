# graphdual/cli/main.py
from __future__ import annotations
import sys
from typing import Optional, Sequence

import structlog

from graphdual import __version__
from graphdual.cli import (
    estimate,
    independent_sets,
    moments,
    simulate,
    spectrum,
)
from graphdual.cli.common import CliArgumentParser, RunContext
from graphdual.core.errors import GraphDualError, SimulationError, ValidationError
from graphdual.core.logger import setup_logging
from graphdual.schemas.models import ErrorBody

log = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_VALIDATION = 2


def build_parser() -> CliArgumentParser:
    parser = CliArgumentParser(prog="graphdual", description="Collision particle systems on graphs")
    parser.add_argument("--version", action="version", version=f"graphdual {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=CliArgumentParser)
    # --- Commands ---
    for module in (moments, estimate, independent_sets, simulate, spectrum):
        module.register(subparsers)
    return parser


def _report_error(err: GraphDualError) -> None:
    sys.stderr.write(ErrorBody(**err.to_dict()).model_dump_json() + "\n")


def dispatch(argv: Sequence[str]) -> int:
    """Parse, run one subcommand and write its outputs; returns the process exit code."""
    argv = list(argv)
    try:
        args = build_parser().parse_args(argv)
        ctx = RunContext(args.command, argv, args.output, args.format)
        args.handler(args, ctx)
    except ValidationError as e:
        log.warning("cli.rejected", error=str(e), type=e.kind)
        _report_error(e)
        return EXIT_VALIDATION
    except GraphDualError as e:
        log.error("cli.failed", error=str(e), type=e.kind)
        _report_error(e)
        return EXIT_RUNTIME
    except Exception as e:
        log.exception("cli.crashed")
        _report_error(SimulationError(f"{type(e).__name__}: {e}"))
        return EXIT_RUNTIME
    finally:
        structlog.contextvars.clear_contextvars()
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    setup_logging()
    return dispatch(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    raise SystemExit(main())
