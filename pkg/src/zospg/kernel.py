"""Legendre-polynomial smoothing kernels on [-1, 1].

A kernel of order ``beta`` is

    K(r) = sum_{m=0}^{l} p_m'(0) p_m(r),    p_m(r) = sqrt(2m + 1) L_m(r),

where ``l`` is the largest integer strictly below ``beta`` and ``L_m`` is the
Legendre polynomial of degree ``m``.  Since the ``p_m`` are orthonormal for
the uniform law on [-1, 1], ``E[r^j K(r)] = d/dr r^j |_{r=0}`` for every
``j <= l``: the kernel kills every moment up to ``l`` except the first one,
which equals 1.

All expectations here are taken against the uniform density 1/2 on [-1, 1],
including the constants ``kappa_beta = E[|r|^beta |K(r)|]`` and
``kappa = E[K(r)^2]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy import integrate, optimize

__all__ = [
    "KernelSpec",
    "build_kernel",
    "eval_kernel",
    "kernel_constants",
    "kernel_moment",
    "legendre",
    "legendre_deriv_at_zero",
    "max_order",
]

# Grid used to bracket sign changes of K before bisection.
_ROOT_GRID = 4001


def max_order(beta: float) -> int:
    """Largest integer strictly less than ``beta``."""
    return math.ceil(beta) - 1


def legendre(m: int, r):
    """Legendre polynomial ``L_m`` at ``r`` via the Bonnet recurrence.

    Works elementwise when ``r`` is an array.
    """
    if m < 0:
        raise ValueError(f"order must be nonnegative, got {m}")
    r = np.asarray(r, dtype=float)
    prev = np.ones_like(r)
    if m == 0:
        return prev if prev.ndim else float(prev)
    cur = r.copy()
    for j in range(1, m):
        prev, cur = cur, ((2 * j + 1) * r * cur - j * prev) / (j + 1)
    return cur if cur.ndim else float(cur)


@lru_cache(maxsize=None)
def _legendre_at_zero(m: int) -> tuple[float, float]:
    # (L_m(0), L_m'(0)) from L_{j+1}(0) = -j/(j+1) L_{j-1}(0) and
    # L'_{j+1} = L'_{j-1} + (2j+1) L_j.
    val = [1.0, 0.0]
    der = [0.0, 1.0]
    for j in range(1, m):
        val.append(-j / (j + 1) * val[j - 1])
        der.append(der[j - 1] + (2 * j + 1) * val[j])
    return val[m], der[m]


def legendre_deriv_at_zero(m: int) -> float:
    """Derivative of the normalized polynomial ``sqrt(2m+1) L_m`` at 0."""
    if m < 0:
        raise ValueError(f"order must be nonnegative, got {m}")
    return math.sqrt(2 * m + 1) * _legendre_at_zero(m)[1]


@dataclass(frozen=True)
class KernelSpec:
    """Smoothing kernel of smoothness order ``beta``.

    ``coefficients[m]`` is the weight of the orthonormal polynomial ``p_m``;
    even entries are stored (as zeros) so the list is indexed by degree.
    """

    beta: float
    l: int
    coefficients: tuple[float, ...]
    kappa_beta: float = float("nan")
    kappa: float = float("nan")
    quadrature_order: int = 0

    def __call__(self, r):
        return eval_kernel(self, r)

    def monomial_coefficients(self) -> np.ndarray:
        """Power-series coefficients of K, lowest degree first."""
        scaled = [c * math.sqrt(2 * m + 1) for m, c in enumerate(self.coefficients)]
        return npleg.leg2poly(scaled)


def build_kernel(beta: float, quadrature_order: int | None = None) -> KernelSpec:
    """Build the Legendre kernel for smoothness ``beta`` and its constants.

    Parameters
    ----------
    beta : float
        Smoothness order, must exceed 1.
    quadrature_order : int, optional
        Number of Gauss-Legendre nodes for the polynomial moments.  Defaults
        to ``2 l + 8``; anything below ``l + 1`` cannot integrate ``K^2``
        exactly and is rejected.
    """
    beta = float(beta)
    if not beta > 1.0:
        raise ValueError(f"beta must be > 1, got {beta}")
    l = max_order(beta)
    if quadrature_order is None:
        quadrature_order = 2 * l + 8
    if quadrature_order < l + 1:
        raise ValueError(
            f"quadrature_order={quadrature_order} is too small for degree-{2 * l} exactness"
        )
    coeffs = tuple(legendre_deriv_at_zero(m) for m in range(l + 1))
    spec = KernelSpec(beta=beta, l=l, coefficients=coeffs, quadrature_order=quadrature_order)
    kappa_beta, kappa = kernel_constants(spec)
    return KernelSpec(
        beta=beta,
        l=l,
        coefficients=coeffs,
        kappa_beta=kappa_beta,
        kappa=kappa,
        quadrature_order=quadrature_order,
    )


def eval_kernel(spec: KernelSpec, r):
    """Evaluate ``K(r) = sum_m c_m sqrt(2m+1) L_m(r)``; vectorized over ``r``."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    prev = np.ones_like(r)
    cur = r
    for m, c in enumerate(spec.coefficients):
        if m == 0:
            lm = prev
        elif m == 1:
            lm = cur
        else:
            j = m - 1
            prev, cur = cur, ((2 * j + 1) * r * cur - j * prev) / (j + 1)
            lm = cur
        if c != 0.0:
            out = out + c * math.sqrt(2 * m + 1) * lm
    return out if out.ndim else float(out)


def _gauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = npleg.leggauss(order)
    return nodes, weights / 2.0


def kernel_moment(spec: KernelSpec, j: int) -> float:
    """``E[r^j K(r)]`` for ``r ~ U[-1, 1]`` by Gauss-Legendre quadrature.

    The rule is sized to integrate ``r^j K(r)`` exactly, so the result is
    exact up to round-off for any ``j``.
    """
    order = max(spec.quadrature_order, (j + spec.l) // 2 + 1)
    nodes, weights = _gauss(order)
    return float(np.dot(weights, nodes**j * eval_kernel(spec, nodes)))


def _kernel_roots(spec: KernelSpec) -> list[float]:
    grid = np.linspace(-1.0, 1.0, _ROOT_GRID)
    vals = eval_kernel(spec, grid)
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0.0:
            roots.append(optimize.bisect(lambda u: eval_kernel(spec, u), a, b, xtol=1e-15))
    return roots


def kernel_constants(spec: KernelSpec) -> tuple[float, float]:
    """Return ``(kappa_beta, kappa)`` under the uniform-expectation convention.

    ``kappa`` is a polynomial moment and is integrated exactly.  The
    integrand of ``kappa_beta`` has kinks at the kernel roots and at 0, so
    [-1, 1] is split there and each smooth piece goes to adaptive quadrature.
    """
    nodes, weights = _gauss(max(spec.quadrature_order, spec.l + 1))
    kappa = float(np.dot(weights, eval_kernel(spec, nodes) ** 2))

    beta = spec.beta
    breaks = sorted({-1.0, 0.0, 1.0, *_kernel_roots(spec)})

    def integrand(u):
        return abs(u) ** beta * abs(eval_kernel(spec, u))

    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b - a <= 0.0:
            continue
        val, _ = integrate.quad(integrand, a, b, epsabs=1e-14, epsrel=1e-12, limit=200)
        total += val
    return total / 2.0, kappa
