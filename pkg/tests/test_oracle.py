import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from zospg.geometry import Ball
from zospg.oracle import (
    AlternatingBias,
    ConstantBias,
    DomainError,
    FunctionObjective,
    GaussianNoise,
    NoNoise,
    QueryLedger,
    UniformNoise,
    anisotropic_quadratic,
    convex_quartic,
    make_noise,
    make_test_suite,
    noisy_pair,
    quadratic,
    quartic,
    suite_by_name,
)

SUITE = make_test_suite()


def test_anisotropic_quadratic_values():
    f = anisotropic_quadratic()
    assert f.value(np.ones(3)) == pytest.approx(5.25)
    assert f.gamma == pytest.approx(0.5)
    assert f.value(np.zeros(3)) == 0.0
    assert f.f_star == 0.0
    assert np.array_equal(f.optimum[0], np.zeros(3))


def test_noiseless_pair_example():
    f = anisotropic_quadratic()
    ledger = QueryLedger()
    y, yp = noisy_pair(f, NoNoise(), [0.5, 0, 0], [0, 0, 0], 1, np.random.default_rng(0), ledger)
    assert (y, yp) == (0.0625, 0.0)
    assert ledger.count == 2


def test_constant_bias_is_exact():
    f = anisotropic_quadratic()
    x = np.array([0.2, -0.4, 0.1])
    y, yp = noisy_pair(f, ConstantBias(0.3), x, -x, 5, np.random.default_rng(0), QueryLedger())
    assert y - f.value(x) == pytest.approx(0.3, abs=1e-15)
    assert yp - f.value(-x) == pytest.approx(0.3, abs=1e-15)


def test_alternating_bias_follows_query_index():
    xi = AlternatingBias(0.2).draw(5, 4, None)
    assert np.array_equal(xi, [-0.2, 0.2, -0.2, 0.2])
    assert AlternatingBias(-0.2).sigma_effective == 0.2


def test_gaussian_noise_second_moment():
    xi = GaussianNoise(0.1).draw(0, 100_000, np.random.default_rng(3))
    assert np.mean(xi**2) <= 0.01 * (1 + 5 / math.sqrt(1e5))


def test_uniform_noise_variance_and_support():
    xi = UniformNoise(0.1).draw(0, 100_000, np.random.default_rng(3))
    assert np.max(np.abs(xi)) <= 0.1 * math.sqrt(3)
    assert np.mean(xi**2) <= 0.01 * (1 + 5 / math.sqrt(1e5))


def test_make_noise():
    assert make_noise("gaussian", sigma=0.5) == GaussianNoise(0.5)
    assert make_noise("none").sigma_effective == 0.0
    with pytest.raises(ValueError):
        make_noise("laplace", sigma=1.0)
    with pytest.raises(ValueError):
        GaussianNoise(-1.0)


def test_noise_ignores_algorithm_stream():
    # the noise draw depends only on its own generator and the query index
    a = GaussianNoise(1.0).draw(0, 50, np.random.default_rng(9))
    np.random.default_rng(123).standard_normal(1000)  # unrelated draws elsewhere
    b = GaussianNoise(1.0).draw(0, 50, np.random.default_rng(9))
    assert np.array_equal(a, b)


def test_gaussian_draws_do_not_depend_on_chunking():
    whole = GaussianNoise(1.0).draw(0, 1000, np.random.default_rng(4))
    rng = np.random.default_rng(4)
    parts = np.concatenate([GaussianNoise(1.0).draw(i, 2, rng) for i in range(0, 1000, 2)])
    assert np.array_equal(whole, parts)


@pytest.mark.parametrize("obj", SUITE, ids=lambda o: o.name)
def test_gradient_matches_finite_differences(obj, rng):
    h = 1e-6
    for x in rng.uniform(-1, 1, size=(100, 3)):
        fd = np.array([(obj.value(x + h * e) - obj.value(x - h * e)) / (2 * h) for e in np.eye(3)])
        assert np.allclose(obj.grad(x), fd, atol=1e-6)


@pytest.mark.parametrize("obj", SUITE, ids=lambda o: o.name)
def test_strong_convexity_spot_check(obj, rng):
    for _ in range(200):
        x, z = rng.uniform(-1, 1, size=(2, 3))
        lower = obj.value(x) + obj.grad(x) @ (z - x) + 0.5 * obj.gamma * np.sum((z - x) ** 2)
        assert obj.value(z) >= lower - 1e-12


@pytest.mark.parametrize("obj", SUITE, ids=lambda o: o.name)
def test_lipschitz_bound_dominates_gradient(obj, rng):
    for rad in (0.5, 1.0, 2.0):
        x = rng.normal(size=(500, 3))
        x = rad * x / np.linalg.norm(x, axis=1, keepdims=True) * rng.uniform(0, 1, (500, 1))
        assert np.max(np.linalg.norm(obj.grad(x), axis=1)) <= obj.lipschitz_G(rad) + 1e-12


def test_quadratic_lipschitz_matches_largest_eigenvalue():
    assert anisotropic_quadratic().lipschitz_G(1.5) == pytest.approx(8 * 1.5)


def test_general_quadratic_constrained_optimum():
    g = suite_by_name("general_quadratic")
    x_star, f_star = g.optimum
    assert np.linalg.norm(x_star) <= 1 + 1e-12
    pts = np.random.default_rng(0).normal(size=(2000, 3))
    pts = pts / np.maximum(1, np.linalg.norm(pts, axis=1, keepdims=True))
    assert np.all(g.value(pts) >= f_star - 1e-12)


def test_unknown_suite_member():
    with pytest.raises(KeyError):
        suite_by_name("rosenbrock")


def test_quadratic_requires_strong_convexity():
    with pytest.raises(ValueError):
        quadratic(np.diag([1.0, 0.0]))


def test_quartic_holder_remainder_bound(rng):
    # |f(x+h) - f(x) - <grad, h> - h'Hh/2| <= L ||h||^3 with |x|, |x+h| inside radius 2
    q = quartic(3, 1.0)
    for _ in range(2000):
        x = rng.uniform(-1, 1, 3)
        h = rng.uniform(-1, 1, 3)
        hess = np.diag(12 * x**2) + np.eye(3)
        rem = q.value(x + h) - q.value(x) - q.grad(x) @ h - 0.5 * h @ hess @ h
        assert abs(rem) <= q.holder_L * np.linalg.norm(h) ** 3


def test_regularized_is_exact_at_center():
    f = convex_quartic()
    x0 = np.array([1.0, 0.0, 0.0])
    w = f.regularized(0.1, x0)
    assert w.gamma == pytest.approx(0.1)
    assert w.value(x0) == f.value(x0)
    assert w.optimum is None
    with pytest.raises(ValueError):
        w.regularized(0.1, x0)


def test_function_objective_regularized():
    f = FunctionObjective(2, fn=lambda x: float(x @ x), grad_fn=lambda x: 2 * x, G_fn=lambda r: 2 * r)
    w = f.regularized(0.5, np.array([1.0, 0.0]))
    x = np.array([0.3, -0.2])
    assert w.value(x) == pytest.approx(x @ x + 0.25 * ((x[0] - 1) ** 2 + x[1] ** 2))
    assert np.allclose(w.grad(x), 2 * x + 0.5 * (x - [1.0, 0.0]))
    assert w.lipschitz_G(1.0) == pytest.approx(2 + 0.5 * 2)


def test_domain_check():
    f = FunctionObjective(2, fn=lambda x: float(x @ x), domain=Ball(np.zeros(2), 1.0), inflation=0.1)
    with pytest.raises(DomainError):
        noisy_pair(f, NoNoise(), [1.2, 0.0], [0.0, 0.0], 1, np.random.default_rng(0), QueryLedger())


@settings(max_examples=100, deadline=None)
@given(x=arrays(float, 3, elements=st.floats(-3, 3)))
def test_vectorized_value_matches_pointwise(x):
    for obj in SUITE:
        batch = obj.value(np.stack([x, -x]))
        assert batch[0] == pytest.approx(obj.value(x), rel=1e-12, abs=1e-12)
