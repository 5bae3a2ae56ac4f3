import math

import numpy as np
import pytest

from graphdual.core.errors import DomainError, PreconditionError, ValidationError
from graphdual.core.rng import SeedRecord
from graphdual.engine.graph_core import builtin_graph
from graphdual.engine.moments import complete_graph_exit_cdf, s2_absorption_masses
from graphdual.engine.sde import (
    SdeConfig,
    empirical_exit_time,
    empirical_support_profile,
    exit_time_lower_bound,
    simulate_sde,
    support_profile,
)
from graphdual.engine.strategies.boundary import AbsorbAtZero, ReflectClip


def test_config_validation(c4):
    with pytest.raises(ValidationError):
        SdeConfig(graph=c4, dt=0)
    with pytest.raises(ValidationError):
        SdeConfig(graph=c4, scheme="milstein")
    with pytest.raises(ValidationError):
        SdeConfig(graph=c4, boundary_policy="wrap")
    assert isinstance(SdeConfig(graph=c4).policy, AbsorbAtZero)
    assert isinstance(SdeConfig(graph=c4, boundary_policy="reflect_clip").policy, ReflectClip)


def test_boundary_policies_repair_in_place():
    x = np.array([[0.5, -0.1, 0.6]])
    np.testing.assert_array_equal(AbsorbAtZero().apply(x), [[False, True, False]])
    np.testing.assert_allclose(x, [[0.5, 0.0, 0.6]])
    y = np.array([[0.5, -0.1, 0.6]])
    np.testing.assert_array_equal(ReflectClip().apply(y), [[False, True, False]])
    np.testing.assert_allclose(y, [[0.5, 0.1, 0.6]])


def test_paths_stay_on_the_simplex(c4):
    cfg = SdeConfig(graph=c4, dt=1e-3)
    run = simulate_sde(cfg, [0.1, 0.2, 0.3, 0.4], 1.0, SeedRecord(entropy=4), n_paths=50, record_every=100)
    assert run.paths.shape == (50, 11, 4)
    np.testing.assert_allclose(run.times, np.linspace(0, 1, 11))
    np.testing.assert_allclose(run.paths.sum(axis=2), 1.0, atol=1e-12)
    assert (run.paths >= 0).all()
    assert run.seed == SeedRecord(entropy=4)
    assert len(run.to_rows()) == 50 * 11


def test_start_point_is_checked(c4):
    cfg = SdeConfig(graph=c4)
    with pytest.raises(DomainError):
        simulate_sde(cfg, [0.5, 0.5], 1.0)
    with pytest.raises(DomainError):
        simulate_sde(cfg, [0.5, 0.5, 0.5, 0.5], 1.0)


def test_mean_is_a_martingale(c4):
    x0 = np.array([0.1, 0.2, 0.3, 0.4])
    run = simulate_sde(SdeConfig(graph=c4, dt=1e-3), x0, 0.5, 21, n_paths=2_000)
    final = run.final
    se = final.std(axis=0, ddof=1) / math.sqrt(final.shape[0])
    assert (np.abs(final.mean(axis=0) - x0) < 4 * se + 1e-3).all()


def test_complete_graph_fixation_frequencies():
    g = builtin_graph("K3")
    x0 = np.array([0.2, 0.3, 0.5])
    profile = empirical_support_profile(SdeConfig(graph=g, dt=2e-3), x0, 12.0, 1_000, rng=8)
    for i in range(3):
        freq = profile.frequencies.get(frozenset({i}), 0.0)
        assert abs(freq - x0[i]) < 4 * profile.std_error(frozenset({i})) + 0.03


def test_star_support_frequencies(s2):
    x0 = [1 / 3, 1 / 3, 1 / 3]
    masses = s2_absorption_masses(x0).as_dict()
    profile = empirical_support_profile(SdeConfig(graph=s2, dt=2e-3), x0, 15.0, 1_000, rng=6)
    for support, mass in masses.items():
        freq = profile.frequencies.get(support, 0.0)
        assert abs(freq - mass) < 4 * profile.std_error(support) + 0.03


def test_drifted_two_vertex_stationary_moments():
    g = builtin_graph("K2")
    cfg = SdeConfig(graph=g, alpha=1.0, dt=1e-3)
    run = simulate_sde(cfg, [0.5, 0.5], 8.0, 13, n_paths=2_000)
    x1 = run.final[:, 0]
    # Dirichlet(1, 1): mean 1/2, second moment 1/3
    assert abs(x1.mean() - 0.5) < 4 * x1.std(ddof=1) / math.sqrt(x1.size) + 0.01
    assert abs((x1 ** 2).mean() - 1 / 3) < 4 * (x1 ** 2).std(ddof=1) / math.sqrt(x1.size) + 0.01


def test_support_profile_counts_rows():
    final = np.array([[1.0, 0.0, 0.0], [0.0, 0.5, 0.5], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    profile = support_profile(final, 1.0)
    assert profile.frequencies == {frozenset({0}): 0.5, frozenset({1, 2}): 0.25, frozenset({1}): 0.25}
    assert profile.to_document()["supports"][0]["set"] == [1]


def test_exit_time_lower_bound(c4):
    value = exit_time_lower_bound([0.25] * 4, [0, 1], c4, 2.0)
    assert value == pytest.approx(0.25 * 0.25 * 4 * math.exp(-2.0))


def test_exit_time_preconditions(c4):
    cfg = SdeConfig(graph=c4)
    with pytest.raises(PreconditionError, match="independent"):
        empirical_exit_time(cfg, [0.5, 0.0, 0.5, 0.0], [0, 2], 10)
    with pytest.raises(PreconditionError, match="inside the face"):
        empirical_exit_time(cfg, [0.25] * 4, [0, 1], 10)
    with pytest.raises(PreconditionError, match="undrifted"):
        empirical_exit_time(SdeConfig(graph=c4, alpha=1.0), [0.5, 0.5, 0.0, 0.0], [0, 1], 10)


def test_two_vertex_exit_times_match_series():
    g = builtin_graph("K2")
    sample = empirical_exit_time(SdeConfig(graph=g, dt=1e-3), [0.5, 0.5], [0, 1], 2_000, rng=31, t_max=3.0)
    for t in (0.2, 0.5, 1.0, 2.0):
        exact = complete_graph_exit_cdf(2, 2, [0.5, 0.5], t)
        # Euler steps overshoot the boundary late, so allow a discretisation band
        assert abs(sample.survival(t) - exact) < 4 * sample.survival_std_error(t) + 0.03
        assert sample.lower_bound(t) <= exact + 1e-12


def test_reflected_paths_still_record_exits():
    g = builtin_graph("K2")
    absorbed = empirical_exit_time(SdeConfig(graph=g, dt=1e-3), [0.5, 0.5], [0, 1], 500, rng=3, t_max=3.0)
    reflected = empirical_exit_time(
        SdeConfig(graph=g, dt=1e-3, boundary_policy="reflect_clip"), [0.5, 0.5], [0, 1], 500, rng=3, t_max=3.0
    )
    # both policies see the same noise until the first crossing
    np.testing.assert_array_equal(reflected.times, absorbed.times)
    assert np.isfinite(reflected.times).mean() > 0.8
    assert reflected.survival(2.0) < 1.0


@pytest.mark.slow
def test_halving_dt_moves_moments_by_less_than_one_se():
    g = builtin_graph("K2")
    x0 = [0.5, 0.5]
    coarse = simulate_sde(SdeConfig(graph=g, alpha=1.0, dt=2e-3), x0, 4.0, 41, n_paths=20_000).final[:, 0]
    fine = simulate_sde(SdeConfig(graph=g, alpha=1.0, dt=1e-3), x0, 4.0, 42, n_paths=20_000).final[:, 0]
    for f in (lambda v: v, lambda v: v ** 2):
        a, b = f(coarse), f(fine)
        se = math.sqrt(a.var(ddof=1) / a.size + b.var(ddof=1) / b.size)
        # independent runs: one SE plus a discretisation band
        assert abs(a.mean() - b.mean()) < se + 5e-3
