# graphdual/schemas/validator.py
from __future__ import annotations
import json
from functools import lru_cache
from pathlib import Path
from jsonschema import Draft202012Validator

from graphdual.core.errors import ValidationError

GRAPH_SCHEMA = "graph_schema.json"
REPORT_SCHEMA = "report_schema.json"


@lru_cache(maxsize=None)
def _load_schema(name: str) -> Draft202012Validator:
    schema_path = Path(__file__).with_name(name)

    try:
        schema_dict = json.loads(schema_path.read_text(encoding="utf-8"))
    except Exception as e:
        raise RuntimeError(f"Failed to load schema {name}: {e}") from e

    try:
        Draft202012Validator.check_schema(schema_dict)
        return Draft202012Validator(schema_dict)
    except Exception as e:
        raise RuntimeError(f"Invalid JSON schema {name}: {e}") from e


def schema_errors(document: object, name: str) -> list[dict]:
    validator = _load_schema(name)
    errors = sorted(validator.iter_errors(document), key=lambda e: list(e.path))
    return [
        {"at": "/".join(str(p) for p in e.path) or "(root)", "message": e.message}
        for e in errors
    ]


def validate_or_raise(document: object, name: str = GRAPH_SCHEMA) -> None:
    """Raise ValidationError describing the first schema violation, if any."""
    errors = schema_errors(document, name)
    if errors:
        first = errors[0]
        raise ValidationError(f"schema validation failed at {first['at']}: {first['message']}")
