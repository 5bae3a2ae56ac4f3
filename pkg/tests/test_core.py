from fractions import Fraction

import numpy as np
import pytest
import structlog
from hypothesis import given
from hypothesis import strategies as st

from graphdual.core.errors import DomainError, GuardError, SimulationError, ValidationError
from graphdual.core.logger import bind_seed, plain_values
from graphdual.core.rng import SeedRecord, as_generator, resolve_seed, stream_records
from graphdual.core.settings import Settings
from graphdual.engine.exact import solve_rational
from graphdual.engine.simplex import SimplexPoint
from graphdual.engine.stats import RunningMoments, proportion_std_error
from graphdual.engine.strategies.arithmetic import FloatArithmetic, to_fraction
from graphdual.engine.strategies.registry import build_arithmetic, build_boundary


def test_error_kinds():
    err = GuardError("too many states")
    assert isinstance(err, ValidationError)
    assert err.to_dict() == {"type": "guard_error", "message": "too many states"}
    assert SimulationError("x").to_dict()["type"] == "simulation_error"


def test_log_values_are_plain():
    event = plain_values(None, "info", {
        "event": "x", "alpha": Fraction(1, 4), "n": np.int64(3), "a": (1, np.int32(0)), "x": np.array([0.5]),
    })
    assert event == {"event": "x", "alpha": "1/4", "n": 3, "a": [1, 0], "x": [0.5]}
    assert type(event["n"]) is int


def test_bound_seed_reaches_context():
    structlog.contextvars.clear_contextvars()
    bind_seed(17)
    try:
        assert structlog.contextvars.get_contextvars()["seed"] == 17
    finally:
        structlog.contextvars.clear_contextvars()


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("GRAPHDUAL_THREADS", "3")
    monkeypatch.setenv("GRAPHDUAL_LOG_LEVEL", " debug ")
    s = Settings()
    assert s.worker_count() == 3
    assert s.worker_count(1) == 1
    assert s.LOG_LEVEL == "DEBUG"
    s.validate_guards()
    with pytest.raises(ValueError):
        Settings(CHUNK_SIZE=0).validate_guards()


def test_seed_streams_are_stable():
    root = SeedRecord(entropy=42)
    a = root.child(3).generator().random(4)
    b = SeedRecord(entropy=42, spawn_key=(3,)).generator().random(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, root.child(4).generator().random(4))
    assert [s.spawn_key for s in stream_records(root, 3)] == [(0,), (1,), (2,)]


def test_seed_resolution():
    assert resolve_seed(5) == SeedRecord(entropy=5)
    assert resolve_seed(None).entropy >= 0
    gen = np.random.default_rng(0)
    assert as_generator(gen) is gen


def test_simplex_point_validation():
    assert SimplexPoint.uniform(4).support == frozenset(range(4))
    assert SimplexPoint.vertex(3, 1).support == frozenset({1})
    with pytest.raises(DomainError):
        SimplexPoint.from_coords([0.7, 0.7])
    with pytest.raises(DomainError):
        SimplexPoint.from_coords([1.2, -0.2])


def test_rational_solver():
    rows = [{0: Fraction(2), 1: Fraction(1)}, {0: Fraction(1), 1: Fraction(3)}]
    assert solve_rational(rows, [Fraction(3), Fraction(5)]) == [Fraction(4, 5), Fraction(7, 5)]
    with pytest.raises(SimulationError, match="singular"):
        solve_rational([{0: 1, 1: 2}, {0: 2, 1: 4}], [1, 2])


@given(st.lists(st.lists(st.integers(-5, 5), min_size=3, max_size=3), min_size=3, max_size=3),
       st.lists(st.integers(-9, 9), min_size=3, max_size=3))
def test_rational_solver_solves(matrix, rhs):
    a = np.array(matrix, dtype=float)
    if abs(np.linalg.det(a)) < 0.5:
        return
    rows = [{j: Fraction(v) for j, v in enumerate(row) if v} for row in matrix]
    x = solve_rational(rows, [Fraction(v) for v in rhs])
    for row, b in zip(matrix, rhs):
        assert sum(Fraction(v) * xi for v, xi in zip(row, x)) == b


def test_float_backend_flags_singular_systems():
    with pytest.raises(SimulationError):
        FloatArithmetic().solve([{0: 1.0, 1: 2.0}, {0: 2.0, 1: 4.0}], [1.0, 2.0])


def test_registry():
    assert build_arithmetic().name == "exact"
    assert build_arithmetic("rational").name == "exact"
    assert build_boundary("reflect_clip").name == "reflect_clip"
    with pytest.raises(ValidationError):
        build_boundary("wrap")
    assert to_fraction(0.1) == Fraction(1, 10)


@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=60), st.integers(1, 59))
def test_running_moments_merge(values, cut):
    cut = min(cut, len(values) - 1)
    whole = RunningMoments()
    whole.push_batch(np.array(values))
    left, right = RunningMoments(), RunningMoments()
    for v in values[:cut]:
        left.push_batch(np.array([v]))
    right.push_batch(np.array(values[cut:]))
    left.merge(right)
    assert left.count == whole.count
    assert left.mean == pytest.approx(whole.mean, abs=1e-9)
    assert left.variance == pytest.approx(np.var(values, ddof=1), rel=1e-6, abs=1e-6)


def test_proportion_std_error():
    assert proportion_std_error(0.5, 100) == pytest.approx(0.05)
    assert proportion_std_error(0.5, 0) == 0.0
