from __future__ import annotations
import csv
import hashlib
import json
from pathlib import Path
from typing import Iterable, Sequence

import structlog

from graphdual.core.errors import ValidationError
from graphdual.schemas.models import Report, RunManifest
from graphdual.schemas.validator import REPORT_SCHEMA, validate_or_raise

log = structlog.get_logger(__name__)

MANIFEST_NAME = "manifest.json"
REPORT_NAME = "report.json"


def digest_of_json(document: object) -> str:
    # stable digest of a JSON document
    payload = json.dumps(document, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


def digest_of_file(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


class ReportRepo:
    """Writes a run's report, tables and manifest into one output directory."""

    def __init__(self, output_dir: "str | Path"):
        self.root = Path(output_dir)
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ValidationError(f"cannot create output directory {self.root}: {e}") from e
        self.written: list[str] = []

    def _path(self, name: str) -> Path:
        path = self.root / name
        if name not in self.written:
            self.written.append(name)
        return path

    def write_report(self, report: Report) -> dict:
        """Schema-validate and write ``report.json``; returns the JSON document."""
        document = json.loads(report.model_dump_json())
        validate_or_raise(document, REPORT_SCHEMA)
        self.write_json(REPORT_NAME, document)
        return document

    def write_json(self, name: str, document: object) -> Path:
        path = self._path(name)
        path.write_text(json.dumps(document, indent=2, sort_keys=False) + "\n", encoding="utf-8")
        log.debug("repo.written", file=name)
        return path

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
        path = self._path(name)
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        log.debug("repo.written", file=name)
        return path

    def write_text(self, name: str, text: str) -> Path:
        path = self._path(name)
        path.write_text(text, encoding="utf-8")
        log.debug("repo.written", file=name)
        return path

    def output_digests(self) -> dict[str, str]:
        return {name: digest_of_file(self.root / name) for name in self.written}

    def write_manifest(self, manifest: RunManifest) -> Path:
        path = self.root / MANIFEST_NAME
        path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
        log.info("repo.manifest_written", dir=str(self.root), outputs=len(manifest.outputs))
        return path
