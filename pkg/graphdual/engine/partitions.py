# graphdual/engine/partitions.py
"""
Multi-index arithmetic over ordered integer partitions.

A partition vector is a plain tuple of non-negative ints ``a = (a_1..a_r)``.
Enumeration order is colexicographic: vectors are compared from the last
coordinate backwards. Multinomials are exact Python ints; ``0**0 == 1``.
"""
from __future__ import annotations
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence, Union

from graphdual.core.errors import DomainError, ValidationError
from graphdual.engine.simplex import SimplexPoint

Partition = tuple[int, ...]
Number = Union[int, float, Fraction]

WEIGHT_SUM_TOL = 1e-12


def as_partition(values: Iterable[int], r: int | None = None) -> Partition:
    a = tuple(int(v) for v in values)
    if any(v < 0 for v in a):
        raise DomainError(f"partition entries must be non-negative, got {a}")
    if r is not None and len(a) != r:
        raise DomainError(f"partition has {len(a)} entries, expected {r}")
    return a


def colex_key(a: Partition) -> tuple[int, ...]:
    return tuple(reversed(a))


def enumerate_partitions(n: int, r: int, positive_only: bool = False) -> list[Partition]:
    """Π_{n,r}^{≥0} (or Π_{n,r} when ``positive_only``) in colexicographic order."""
    if n < 0 or r < 1:
        raise DomainError(f"need n >= 0 and r >= 1, got n={n}, r={r}")
    if positive_only:
        if n < r:
            raise DomainError(f"no positive partitions of {n} into {r} parts")
        return [tuple(v + 1 for v in a) for a in enumerate_partitions(n - r, r)]
    out: list[Partition] = []
    # stars and bars: choose r-1 bar positions among n+r-1 slots
    for bars in combinations(range(n + r - 1), r - 1):
        prev = -1
        parts = []
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(n + r - 1 - prev - 1)
        out.append(tuple(parts))
    out.sort(key=colex_key)
    return out


def partition_count(n: int, r: int, positive_only: bool = False) -> int:
    if positive_only:
        return math.comb(n - 1, r - 1) if n >= r else 0
    return math.comb(n + r - 1, r - 1)


def multinomial(a: Sequence[int]) -> int:
    """n! / prod a_i! as an exact integer."""
    out = math.factorial(sum(a))
    for v in a:
        out //= math.factorial(v)
    return out


def evaluate_monomial(x: "SimplexPoint | Sequence[Number]", a: Sequence[int]) -> Number:
    coords = list(x) if not isinstance(x, SimplexPoint) else [float(c) for c in x.coords]
    if len(coords) != len(a):
        raise DomainError(f"dimension mismatch: point has {len(coords)} coords, index has {len(a)}")
    return math.prod((c ** k if k else 1) for c, k in zip(coords, a))


@dataclass(frozen=True)
class InvariantSpec:
    independent_set: tuple[int, ...]
    weights: tuple[Number, ...]
    order: int

    def __post_init__(self) -> None:
        if len(self.independent_set) != len(self.weights):
            raise ValidationError("one weight per independent-set vertex is required")
        if len(set(self.independent_set)) != len(self.independent_set):
            raise ValidationError("independent set has duplicate vertices")
        total = sum(self.weights)
        exact = all(isinstance(w, (int, Fraction)) for w in self.weights)
        if (total != 0) if exact else abs(total) > WEIGHT_SUM_TOL:
            raise ValidationError(f"invariant weights must sum to zero, got {total}")
        if self.order < len(self.independent_set) + 1:
            raise ValidationError(
                f"invariant order must be at least |V_I|+1 = {len(self.independent_set) + 1}"
            )

    @classmethod
    def build(cls, independent_set: Iterable[int], weights: Iterable[Number], order: int) -> "InvariantSpec":
        pairs = sorted(zip((int(v) for v in independent_set), weights))
        return cls(
            independent_set=tuple(v for v, _ in pairs),
            weights=tuple(w for _, w in pairs),
            order=order,
        )


def invariant_coefficients(spec: InvariantSpec) -> dict[Partition, Number]:
    """f(n,a) = C(n-|V_I|, a-1) C(n,a) c^a over positive partitions of n on V_I (local coordinates)."""
    s = len(spec.independent_set)
    n = spec.order
    out: dict[Partition, Number] = {}
    for a in enumerate_partitions(n, s, positive_only=True):
        shifted = tuple(v - 1 for v in a)
        c_pow = math.prod((c ** k for c, k in zip(spec.weights, a)), start=1)
        out[a] = multinomial(shifted) * multinomial(a) * c_pow
    return out


def embed(local: Partition, vertices: Sequence[int], r: int) -> Partition:
    """Place a partition over ``vertices`` into a length-r vector."""
    full = [0] * r
    for v, k in zip(vertices, local):
        full[v] = k
    return tuple(full)


def rising(z: Number, k: int) -> Number:
    """Rising factorial (z)_k = z(z+1)...(z+k-1)."""
    out: Number = 1
    for j in range(k):
        out = out * (z + j)
    return out
