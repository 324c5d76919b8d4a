import numpy as np
import pytest

from zospg.diagnostics import (
    bias_bound,
    common_directions,
    estimator_bias,
    estimator_mean,
    second_moment,
    second_moment_bound,
)
from zospg.kernel import build_kernel
from zospg.oracle import GaussianNoise, anisotropic_quadratic, quartic

X = np.array([0.3, -0.2, 0.4])


def test_bias_on_quartic_matches_closed_form():
    # for sum x_i^4 with K = 3r: E[g] - grad = 36/5 tau^2 x / (n + 2)
    k = build_kernel(3.0)
    dirs = common_directions(200_000, 3, seed=1)
    for tau in (0.4, 0.1):
        got = estimator_bias(quartic(3), X, tau, k, dirs)
        want = 36 / 5 * tau**2 * X / 5
        assert np.allclose(got, want, rtol=0.02, atol=1e-4 * tau**2)


def test_bias_vanishes_on_quadratic():
    k = build_kernel(3.0)
    got = estimator_bias(anisotropic_quadratic(), X, 0.3, k, common_directions(1000, 3))
    assert np.max(np.abs(got)) < 1e-12


def test_bias_within_theoretical_ceiling():
    k = build_kernel(3.0)
    q = quartic(3)
    dirs = common_directions(20_000, 3)
    for tau in (0.5, 0.2, 0.05):
        assert np.linalg.norm(estimator_bias(q, X, tau, k, dirs)) <= bias_bound(k, q.holder_L, 3, tau)


def test_estimator_mean_standard_error_shrinks():
    k = build_kernel(3.0)
    _, se1 = estimator_mean(anisotropic_quadratic(), X, 0.1, k, np.random.default_rng(0), 10_000)
    _, se2 = estimator_mean(anisotropic_quadratic(), X, 0.1, k, np.random.default_rng(0), 40_000, batch=7000)
    assert np.allclose(se2, se1 / 2, rtol=0.1)


def test_second_moment_noise_term_dominates_small_tau():
    k = build_kernel(3.0)
    m = second_moment(anisotropic_quadratic(), np.zeros(3), 0.01, k, GaussianNoise(0.01), np.random.default_rng(0), 200_000)
    # at the optimum with a quadratic the difference is pure noise: n^2 sigma^2 2 kappa / (4 tau^2) * E||e||^2
    want = (3 / (2 * 0.01)) ** 2 * 2 * 0.01**2 * k.kappa
    assert m == pytest.approx(want, rel=0.02)
    assert m <= second_moment_bound(k, 3, 8.0, 0.01, 0.01)
