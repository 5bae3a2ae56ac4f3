import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphdual.core.errors import DomainError, ValidationError
from graphdual.engine.partitions import (
    InvariantSpec,
    as_partition,
    colex_key,
    enumerate_partitions,
    evaluate_monomial,
    invariant_coefficients,
    multinomial,
    partition_count,
    rising,
)
from graphdual.engine.simplex import SimplexPoint


def test_order_two_on_four_vertices_is_colex():
    assert enumerate_partitions(2, 4) == [
        (2, 0, 0, 0), (1, 1, 0, 0), (0, 2, 0, 0), (1, 0, 1, 0), (0, 1, 1, 0),
        (0, 0, 2, 0), (1, 0, 0, 1), (0, 1, 0, 1), (0, 0, 1, 1), (0, 0, 0, 2),
    ]


def test_positive_partitions():
    assert enumerate_partitions(5, 4, positive_only=True) == [
        (2, 1, 1, 1), (1, 2, 1, 1), (1, 1, 2, 1), (1, 1, 1, 2),
    ]
    with pytest.raises(DomainError):
        enumerate_partitions(3, 4, positive_only=True)


@given(st.integers(0, 7), st.integers(1, 5), st.booleans())
def test_enumeration_size_and_order(n, r, positive):
    if positive and n < r:
        return
    parts = enumerate_partitions(n, r, positive_only=positive)
    assert len(parts) == partition_count(n, r, positive_only=positive)
    assert len(set(parts)) == len(parts)
    assert all(sum(a) == n for a in parts)
    assert [colex_key(a) for a in parts] == sorted(colex_key(a) for a in parts)


@given(st.lists(st.integers(0, 6), min_size=1, max_size=5))
def test_multinomial_sums_to_power(a):
    assert multinomial(a) * math.prod(math.factorial(v) for v in a) == math.factorial(sum(a))


def test_multinomials_over_a_level_sum_to_r_to_the_n():
    assert sum(multinomial(a) for a in enumerate_partitions(4, 3)) == 3 ** 4


def test_monomial_uses_zero_to_the_zero_as_one():
    x = SimplexPoint.vertex(3, 0)
    assert evaluate_monomial(x, (2, 0, 0)) == 1.0
    assert evaluate_monomial(x, (1, 1, 0)) == 0.0
    assert evaluate_monomial([Fraction(1, 2), Fraction(1, 2)], (1, 2)) == Fraction(1, 8)
    with pytest.raises(DomainError):
        evaluate_monomial(x, (1, 1))


def test_as_partition_validates():
    assert as_partition([1, 0, 2], 3) == (1, 0, 2)
    with pytest.raises(DomainError):
        as_partition([1, -1])
    with pytest.raises(DomainError):
        as_partition([1, 1], 3)


def test_rising_factorial():
    assert rising(Fraction(1, 2), 3) == Fraction(1, 2) * Fraction(3, 2) * Fraction(5, 2)
    assert rising(4, 0) == 1


def test_invariant_spec_checks():
    with pytest.raises(ValidationError, match="sum to zero"):
        InvariantSpec.build([0, 2], [1, 1], 3)
    with pytest.raises(ValidationError, match="at least"):
        InvariantSpec.build([0, 2], [1, -1], 2)
    with pytest.raises(ValidationError, match="duplicate"):
        InvariantSpec(independent_set=(0, 0), weights=(1, -1), order=3)


def test_invariant_coefficients_order_three():
    spec = InvariantSpec.build([1, 3], [1, -1], 3)
    assert invariant_coefficients(spec) == {(2, 1): -3, (1, 2): 3}


def test_invariant_coefficients_cycle_fourth_order():
    spec = InvariantSpec.build([1, 3], [1, -1], 4)
    assert invariant_coefficients(spec) == {(1, 3): -4, (2, 2): 12, (3, 1): -4}


def test_zero_weights_give_zero_coefficients():
    spec = InvariantSpec.build([0, 2, 4], [0, 0, 0], 5)
    assert set(invariant_coefficients(spec).values()) == {0}


@given(
    st.lists(st.integers(-5, 5), min_size=1, max_size=3),
    st.fractions(min_value=-4, max_value=4, max_denominator=7),
    st.integers(0, 3),
)
def test_invariant_coefficients_scale_with_weights(head, s, extra):
    weights = [Fraction(w) for w in head] + [-Fraction(sum(head))]
    members = list(range(0, 2 * len(weights), 2))
    n = len(weights) + 1 + extra
    base = invariant_coefficients(InvariantSpec.build(members, weights, n))
    scaled = invariant_coefficients(InvariantSpec.build(members, [s * w for w in weights], n))
    assert scaled.keys() == base.keys()
    assert all(scaled[a] == s ** n * base[a] for a in base)
