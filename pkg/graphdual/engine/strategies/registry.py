from __future__ import annotations
from typing import Dict, Optional, Type

from graphdual.core.errors import ValidationError
from graphdual.engine.strategies.arithmetic import ExactArithmetic, FloatArithmetic
from graphdual.engine.strategies.base import ArithmeticBackend, BoundaryPolicy
from graphdual.engine.strategies.boundary import AbsorbAtZero, ReflectClip

ARITHMETIC: Dict[str, Type[ArithmeticBackend]] = {
    "exact": ExactArithmetic,
    "rational": ExactArithmetic,   # alias
    "float": FloatArithmetic,
}

BOUNDARY: Dict[str, Type[BoundaryPolicy]] = {
    "absorb_at_zero": AbsorbAtZero,
    "reflect_clip": ReflectClip,
}


def _build_or_default(mapping, key: Optional[str], default_cls, kind: str):
    if key is None:
        return default_cls()
    cls = mapping.get(key)
    if cls is None:
        raise ValidationError(f"unknown {kind} {key!r}; expected one of {sorted(mapping)}")
    return cls()


def build_arithmetic(name: Optional[str] = None) -> ArithmeticBackend:
    return _build_or_default(ARITHMETIC, name, ExactArithmetic, "arithmetic backend")


def build_boundary(name: Optional[str] = None) -> BoundaryPolicy:
    return _build_or_default(BOUNDARY, name, AbsorbAtZero, "boundary policy")
