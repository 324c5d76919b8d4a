import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zospg.kernel import (
    build_kernel,
    eval_kernel,
    kernel_constants,
    kernel_moment,
    legendre,
    legendre_deriv_at_zero,
    max_order,
)

BETAS = [2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0, 7.0]


@pytest.mark.parametrize("beta,l", [(2, 1), (2.5, 2), (3, 2), (3.5, 3), (4, 3), (5, 4), (6, 5), (7, 6), (3.01, 3)])
def test_order_is_largest_integer_strictly_below_beta(beta, l):
    assert max_order(beta) == l
    assert build_kernel(beta).l == l


@pytest.mark.parametrize("m,r,want", [(0, 0.7, 1.0), (1, -0.3, -0.3), (2, 0.5, -0.125)])
def test_legendre_values(m, r, want):
    assert legendre(m, r) == pytest.approx(want, abs=1e-15)


def test_legendre_against_numpy():
    r = np.linspace(-1, 1, 101)
    for m in range(10):
        ref = np.polynomial.legendre.legval(r, [0] * m + [1])
        assert np.allclose(legendre(m, r), ref, atol=1e-13)


@pytest.mark.parametrize("m,want", [(0, 0.0), (1, math.sqrt(3.0)), (2, 0.0)])
def test_derivative_at_zero(m, want):
    assert legendre_deriv_at_zero(m) == pytest.approx(want, abs=1e-14)


def test_derivative_at_zero_against_numpy():
    for m in range(12):
        c = np.polynomial.legendre.Legendre([0] * m + [1]).deriv()(0.0)
        assert legendre_deriv_at_zero(m) == pytest.approx(math.sqrt(2 * m + 1) * c, abs=1e-12)


@pytest.mark.parametrize("beta", BETAS)
def test_even_coefficients_vanish(beta):
    k = build_kernel(beta)
    assert len(k.coefficients) == k.l + 1
    assert all(c == 0.0 for c in k.coefficients[0::2])
    assert k.kappa > 0 and k.kappa_beta > 0


@pytest.mark.parametrize("beta,fn", [
    (2.5, lambda r: 3 * r),
    (4.0, lambda r: 15 * r / 4 * (5 - 7 * r**2)),
    (6.0, lambda r: 105 * r / 64 * (99 * r**4 - 126 * r**2 + 35)),
])
def test_printed_polynomials(beta, fn):
    r = np.linspace(-1, 1, 257)
    assert np.max(np.abs(eval_kernel(build_kernel(beta), r) - fn(r))) < 1e-12


@pytest.mark.parametrize("beta,r,want", [(3.0, 0.5, 1.5), (5.0, 1.0, -7.5), (7.0, 0.0, 0.0), (2.0, 0.0, 0.0)])
def test_eval_examples(beta, r, want):
    assert eval_kernel(build_kernel(beta), r) == pytest.approx(want, abs=1e-12)


def test_monomial_coefficients_match_values():
    k = build_kernel(7.0)
    r = np.linspace(-1, 1, 50)
    assert np.allclose(np.polynomial.polynomial.polyval(r, k.monomial_coefficients()), k(r), atol=1e-12)


@pytest.mark.parametrize("beta,j,want", [(3.0, 1, 1.0), (3.0, 0, 0.0), (5.0, 3, 0.0)])
def test_moment_examples(beta, j, want):
    assert kernel_moment(build_kernel(beta), j) == pytest.approx(want, abs=1e-12)


def test_moment_against_exact_rational_integration():
    # E[r^j K] from the monomial form: (1/2) sum_i a_i * 2/(i+j+1) for i+j even
    k = build_kernel(6.0)
    a = k.monomial_coefficients()
    for j in range(0, 9):
        exact = sum(a[i] / (i + j + 1) for i in range(len(a)) if (i + j) % 2 == 0)
        assert kernel_moment(k, j) == pytest.approx(exact, abs=1e-12)


def test_linear_kernel_constants():
    k = build_kernel(2.0)
    assert k.kappa == pytest.approx(3.0, abs=1e-12)
    assert k.kappa_beta == pytest.approx(0.75, abs=1e-12)


def test_kappa_beta_against_brute_force():
    # independent oracle: fine midpoint rule of (1/2)|r|^beta |K(r)|
    M = 2_000_000
    r = -1 + (np.arange(M) + 0.5) * (2.0 / M)
    for beta in (3.5, 5.0, 7.0):
        k = build_kernel(beta)
        brute = 0.5 * np.sum(np.abs(r) ** beta * np.abs(eval_kernel(k, r))) * (2.0 / M)
        assert k.kappa_beta == pytest.approx(brute, rel=1e-6)


def test_kappa_is_sum_of_squared_coefficients():
    for beta in BETAS:
        k = build_kernel(beta)
        assert k.kappa == pytest.approx(sum(c * c for c in k.coefficients), rel=1e-12)


def test_kernel_constants_matches_spec_fields():
    k = build_kernel(5.0)
    kb, kk = kernel_constants(k)
    assert (kb, kk) == pytest.approx((k.kappa_beta, k.kappa))


def test_rejects_beta_at_most_one():
    with pytest.raises(ValueError):
        build_kernel(1.0)


def test_rejects_low_quadrature_order():
    with pytest.raises(ValueError):
        build_kernel(5.0, quadrature_order=3)


@settings(max_examples=60, deadline=None)
@given(beta=st.sampled_from(BETAS), r=st.floats(-1, 1))
def test_kernel_is_odd(beta, r):
    k = build_kernel(beta)
    assert eval_kernel(k, -r) == pytest.approx(-eval_kernel(k, r), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(beta=st.floats(2.0, 8.0))
def test_moment_conditions_for_arbitrary_beta(beta):
    k = build_kernel(beta)
    for j in range(k.l + 1):
        assert abs(kernel_moment(k, j) - (1.0 if j == 1 else 0.0)) < 1e-10
