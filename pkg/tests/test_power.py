import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from activeris.orchestrator import PLANS, initial_state
from activeris.simulation import generate_channels
from activeris.model import ChannelEstimates, ResourceState, RisState, SystemConfig, sum_rate_nat
from activeris.power import (
    PowerIterate,
    clamp_power,
    expansion_point,
    lagrangian_gradient,
    lagrangian_gradients,
    optimize_power,
    power_step,
    sngv_gradient,
    sngv_gradients,
)
from tests import oracles
from tests.helpers import random_instance


def negative_sum(cfg, est, W, ris, p):
    return oracles.log_sums(cfg, est, W, ris, p)[1]


def log_sum_total(cfg, est, W, ris, p):
    return oracles.log_sums(cfg, est, W, ris, p)[0]


def noiseless_single_user(rng, M=3, N=2):
    cfg = SystemConfig(M=M, N=N, K=1, p_max=0.1, sigma_n_sq=0.0, sigma_0_sq=1e-3,
                       sigma_d_sq=0.0, sigma_r_sq=0.0, sigma_G_sq=0.0)
    cn = lambda s: rng.standard_normal(s) + 1j * rng.standard_normal(s)
    est = ChannelEstimates(cn((1, M)), cn((1, M, N)), cn((M, N)))
    W = cn((M, 1))
    return cfg, est, ResourceState([0.05], W / np.linalg.norm(W)), RisState(np.ones(N), rng.uniform(0, 6, N))


def test_single_user_noise_free_slopes(rng):
    cfg, est, res, ris = noiseless_single_user(rng)
    it = expansion_point(cfg, est, res, ris)
    assert sngv_gradient(cfg, est, res, ris, it, 0) == 0.0
    h = est.h_d[0] + est.H[0] @ ris.phi
    A = abs(np.vdot(res.W[:, 0], h)) ** 2
    t = oracles.sinr_terms(cfg, est, res, ris, 0)
    psi = t["ris_noise"] + t["csi_error"] + t["rx_noise"]
    assert lagrangian_gradient(cfg, est, res, ris, it, 0) == pytest.approx(A / (res.p[0] * A + psi), rel=1e-12)
    assert lagrangian_gradient(cfg, est, res, ris, it, 0) > 0


def test_zero_power_start_pushes_every_user_up(rng):
    cfg, est, res, ris = random_instance(rng, M=3, N=2, K=3, noisy=False)
    res0 = ResourceState(np.zeros(cfg.K), res.W)
    g = lagrangian_gradients(cfg, est, res0, ris, expansion_point(cfg, est, res0, ris))
    assert np.all(g > 0)


def test_sngv_linear_in_direct_error_variance(rng):
    cfg, est, res, ris = random_instance(rng, M=3, N=2, K=1, noisy=False)
    cfg1 = dataclasses.replace(cfg, sigma_d_sq=0.2)
    cfg2 = dataclasses.replace(cfg, sigma_d_sq=0.4)
    # keep the denominator fixed so only the numerator changes
    it = PowerIterate(res.p, np.ones(1), 0)
    g1 = sngv_gradient(cfg1, est, res, ris, it, 0)
    g2 = sngv_gradient(cfg2, est, res, ris, it, 0)
    assert g2 == pytest.approx(2 * g1, rel=1e-13)


@pytest.mark.parametrize("seed", range(10))
def test_sngv_gradient_matches_finite_difference(seed):
    rng = np.random.default_rng(seed)
    cfg, est, res, ris = random_instance(rng, M=3, N=3, K=3)
    it = expansion_point(cfg, est, res, ris)
    fd = oracles.central_difference(lambda p: negative_sum(cfg, est, res.W, ris, p), res.p)
    np.testing.assert_allclose(sngv_gradients(cfg, est, res, ris, it), fd, rtol=1e-4)


@pytest.mark.parametrize("seed", range(10))
def test_lagrangian_gradient_matches_finite_difference(seed):
    rng = np.random.default_rng(100 + seed)
    cfg, est, res, ris = random_instance(rng, M=3, N=3, K=3)
    # expansion point differs from the evaluation point
    p_r = rng.uniform(0.1, 1.0, cfg.K) * cfg.p_max
    it = expansion_point(cfg, est, ResourceState(p_r, res.W), ris)
    slope = oracles.central_difference(lambda p: negative_sum(cfg, est, res.W, ris, p), p_r)
    fd = oracles.central_difference(lambda p: log_sum_total(cfg, est, res.W, ris, p), res.p) - slope
    np.testing.assert_allclose(lagrangian_gradients(cfg, est, res, ris, it), fd, rtol=1e-4)


@pytest.mark.parametrize("chi, expected", [(0.15, 0.1), (-0.02, 0.0), (0.05, 0.05)])
def test_clamp(chi, expected):
    assert clamp_power(chi, 0.1) == expected


def test_power_step_is_clamped_ascent(instance):
    cfg, est, res, ris = instance
    it = expansion_point(cfg, est, res, ris)
    chi = res.p + cfg.step_p * lagrangian_gradients(cfg, est, res, ris, it)
    np.testing.assert_array_equal(power_step(cfg, est, res, ris, it), np.clip(chi, 0, cfg.p_max))


def test_single_user_reaches_full_power(rng):
    for _ in range(5):
        cfg, est, res, ris = noiseless_single_user(rng)
        out = optimize_power(cfg, est, res, ris)
        assert out.state.p[0] == cfg.p_max
        assert out.converged


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_power_iterates_stay_feasible_and_never_lose_rate(seed):
    cfg, est, res, ris = random_instance(np.random.default_rng(seed), M=3, N=3, K=3)
    out = optimize_power(cfg, est, res, ris)
    assert out.state.is_feasible(cfg.p_max)
    assert sum_rate_nat(cfg, est, out.state, ris) >= sum_rate_nat(cfg, est, res, ris) - cfg.epsilon
    assert out.loops >= 1


def test_inner_ascent_on_fixed_linearisation_is_monotone(rng):
    cfg, est, res, ris = random_instance(rng, M=3, N=3, K=3)
    it = expansion_point(cfg, est, res, ris)
    slope = sngv_gradients(cfg, est, res, ris, it)

    def surrogate(p):
        return log_sum_total(cfg, est, res.W, ris, p) - float(np.dot(slope, p - it.p_expand))

    p = np.array(res.p)
    values = [surrogate(p)]
    for _ in range(40):
        g = lagrangian_gradients(cfg, est, ResourceState(p, res.W), ris, it)
        p = np.clip(p + 1e-3 * g, 0, cfg.p_max)
        values.append(surrogate(p))
    assert np.all(np.diff(values) >= -1e-9)


@pytest.mark.parametrize("seed", range(4))
def test_complementary_slackness_at_convergence(seed):
    cfg, est, res, ris = random_instance(np.random.default_rng(seed), M=3, N=3, K=3)
    cfg = dataclasses.replace(cfg, epsilon=1e-12, step_p=0.05)
    out = optimize_power(cfg, est, res, ris)
    p = out.state.p
    g = lagrangian_gradients(cfg, est, out.state, ris, expansion_point(cfg, est, out.state, ris))
    at_bound = (p == 0) | (p == cfg.p_max)
    assert np.all(at_bound | (np.abs(g) <= 1e-4))
    # at a bound the gradient must point outwards
    assert np.all(g[p == 0] <= 1e-4) and np.all(g[p == cfg.p_max] >= -1e-4)


def grid_best(cfg, est, res, ris, points=201):
    grid = np.linspace(0, cfg.p_max, points)
    best = -np.inf
    for p1 in grid:
        for p2 in grid:
            best = max(best, sum_rate_nat(cfg, est, ResourceState([p1, p2], res.W), ris))
    return best


@pytest.mark.parametrize("seed", range(3))
def test_two_user_power_within_two_percent_of_grid(seed):
    # default powers and noise levels; channels and starting point random
    cfg = SystemConfig(M=2, N=2, K=2)
    est = generate_channels(cfg, np.random.default_rng(seed))
    res, ris = initial_state(cfg, PLANS["active_optimized"], seed)
    out = optimize_power(cfg, est, res, ris)
    assert sum_rate_nat(cfg, est, out.state, ris) >= 0.98 * grid_best(cfg, est, res, ris)


@pytest.mark.parametrize("seed", range(3))
def test_two_user_low_snr_power_matches_grid_with_tight_tolerance(seed):
    # at rates of a fraction of a nat the default epsilon is itself a few percent
    cfg, est, res, ris = random_instance(np.random.default_rng(200 + seed), M=2, N=2, K=2)
    cfg = dataclasses.replace(cfg, epsilon=1e-8)
    out = optimize_power(cfg, est, res, ris)
    assert sum_rate_nat(cfg, est, out.state, ris) >= 0.98 * grid_best(cfg, est, res, ris)
