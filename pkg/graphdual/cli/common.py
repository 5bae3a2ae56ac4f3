# graphdual/cli/common.py
from __future__ import annotations
import argparse
import json
import platform
import subprocess
import sys
import time
import uuid
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence, Type, TypeVar

import networkx
import numpy
import pydantic
import scipy
import structlog

import graphdual
from graphdual.core.errors import ValidationError
from graphdual.core.logger import bind_seed
from graphdual.core.rng import SeedRecord, resolve_seed
from graphdual.core.settings import settings
from graphdual.engine.graph_core import GraphSpec, load_graph
from graphdual.persistence.repo import ReportRepo, digest_of_json
from graphdual.schemas.models import Report, RunManifest

log = structlog.get_logger(__name__)

P = TypeVar("P", bound=pydantic.BaseModel)


class CliArgumentParser(argparse.ArgumentParser):
    """Argument errors become ValidationError so they share the JSON error path and exit code 2."""

    def error(self, message: str):
        raise ValidationError(f"{self.prog}: {message}")


# ---------------- argument parsing ----------------

def parse_ints(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ValidationError(f"expected comma-separated integers, got {text!r}") from None


def parse_floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ValidationError(f"expected comma-separated numbers, got {text!r}") from None


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"expected a rational number such as 1/4 or 0.25, got {text!r}") from None


def parse_names(text: str) -> list[str]:
    """Split a graph list on commas, keeping K<p>,<q> names together."""
    tokens = [tok.strip() for tok in text.split(",") if tok.strip()]
    out: list[str] = []
    for tok in tokens:
        if tok.isdigit() and out and out[-1].startswith("K") and out[-1][1:].isdigit():
            out[-1] = f"{out[-1]},{tok}"
        else:
            out.append(tok)
    return out


def validated(model: Type[P], **values) -> P:
    try:
        return model(**values)
    except pydantic.ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first.get("loc", ())) or "(root)"
        raise ValidationError(f"invalid {where}: {first.get('msg')}") from e


def graph_arg(ref: str) -> GraphSpec:
    return load_graph(ref)


def add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output", default=None, help="output directory (default: OUTPUT_DIR/<command>-<run id>)")
    p.add_argument("--format", choices=("json", "csv"), default="json", help="also write tables as CSV with csv")


def add_seed_flags(p: argparse.ArgumentParser, threads: bool = False) -> None:
    p.add_argument("--seed", type=int, default=None, help="root seed; drawn from OS entropy and recorded when omitted")
    if threads:
        p.add_argument("--threads", type=int, default=None, help="worker processes (default: THREADS setting)")


# ---------------- run context ----------------

def describe_version() -> str:
    root = Path(graphdual.__file__).resolve().parent.parent
    try:
        out = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=root, capture_output=True, text=True, timeout=5, check=True,
        )
        described = out.stdout.strip()
        if described:
            return f"{graphdual.__version__}+{described}"
    except (OSError, subprocess.SubprocessError):
        pass
    return graphdual.__version__


def library_versions() -> dict[str, str]:
    return {
        "graphdual": describe_version(),
        "python": platform.python_version(),
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "networkx": networkx.__version__,
        "pydantic": pydantic.VERSION,
    }


class RunContext:
    """One CLI invocation: output directory, report, CSV tables and manifest."""

    def __init__(self, command: str, argv: Sequence[str], output: Optional[str], fmt: str):
        self.command = command
        self.argv = list(argv)
        self.run_id = uuid.uuid4().hex
        self.format = fmt
        self.started = datetime.now(timezone.utc)
        self._t0 = time.perf_counter()
        target = output or str(Path(settings.OUTPUT_DIR) / f"{command}-{self.run_id[:8]}")
        self.repo = ReportRepo(target)
        structlog.contextvars.bind_contextvars(command=command, run_id=self.run_id)

    def seed(self, seed: Optional[int]) -> SeedRecord:
        record = resolve_seed(seed)
        bind_seed(record.entropy)
        return record

    def table(self, name: str, header: Sequence[str], rows: Iterable[Sequence[object]]) -> None:
        if self.format == "csv":
            self.repo.write_csv(name, header, rows)

    def emit(self, params: pydantic.BaseModel, result: dict, seed: Optional[SeedRecord] = None) -> dict:
        report = Report(
            command=self.command,
            version=describe_version(),
            runId=self.run_id,
            seed=seed,
            parameters=json.loads(params.model_dump_json()),
            result=result,
        )
        document = self.repo.write_report(report)
        outputs = self.repo.output_digests()
        manifest = RunManifest(
            command=self.command,
            runId=self.run_id,
            argv=self.argv,
            parameters=document["parameters"],
            seed=seed,
            versions=library_versions(),
            startedAt=self.started.isoformat(),
            wallTime=time.perf_counter() - self._t0,
            outputs=outputs,
            outputsDigest=digest_of_json(outputs),
        )
        self.repo.write_manifest(manifest)
        sys.stdout.write(json.dumps(document, indent=2) + "\n")
        return document


Handler = Callable[[argparse.Namespace, RunContext], None]
