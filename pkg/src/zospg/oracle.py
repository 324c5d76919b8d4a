"""Objectives, noise models and the two-query noisy oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .geometry import Ball, FeasibleSet, distance

__all__ = [
    "AlternatingBias",
    "ConstantBias",
    "DomainError",
    "FunctionObjective",
    "GaussianNoise",
    "NoNoise",
    "NoiseModel",
    "Objective",
    "PolynomialObjective",
    "QueryLedger",
    "UniformNoise",
    "anisotropic_quadratic",
    "convex_quartic",
    "make_noise",
    "make_test_suite",
    "noisy_pair",
    "quadratic",
    "quartic",
]


class DomainError(ValueError):
    """A query point lies outside the objective's declared domain."""


class Objective:
    """Base class for test objectives.

    Subclasses provide ``value`` (vectorized over leading axes) and may
    provide ``grad``.  Metadata:

    gamma : strong-convexity modulus (0 for merely convex functions)
    holder_L : declared Hoelder constant used by the step schedules
    optimum : ``(x_star, f_star)`` over the intended feasible set, if known
    domain, inflation : the function is only promised on ``domain`` inflated
        by ``inflation``; ``domain=None`` means all of R^n
    """

    name: str = "objective"
    dim: int
    gamma: float = 0.0
    holder_L: float = 1.0
    optimum: tuple[np.ndarray, float] | None = None
    domain: FeasibleSet | None = None
    inflation: float = math.inf

    def value(self, x):
        raise NotImplementedError

    def grad(self, x):
        raise NotImplementedError

    def lipschitz_G(self, radius: float) -> float:
        """Bound on ``||grad f||`` over the origin-centred ball of ``radius``."""
        raise NotImplementedError

    def __call__(self, x):
        return self.value(x)

    @property
    def f_star(self) -> float | None:
        return None if self.optimum is None else self.optimum[1]

    def in_domain(self, x) -> bool:
        if self.domain is None or math.isinf(self.inflation):
            return True
        return distance(self.domain, x) <= self.inflation + 1e-12


@dataclass(eq=False)
class PolynomialObjective(Objective):
    """Quartic polynomial

        f(x) = 1/2 x'Ax + b'x + c + q * sum_i x_i^4 + s * ||x||^4
               + reg/2 * ||x - center||^2

    This is the family the compiled loop understands.  ``reg``/``center``
    carry a proximal regularizer so that ``f + reg/2 ||x - center||^2``
    evaluates to exactly ``f(center)`` at the center.
    """

    dim: int
    A: np.ndarray
    b: np.ndarray
    c: float = 0.0
    quartic_coef: float = 0.0
    norm4_coef: float = 0.0
    reg: float = 0.0
    center: np.ndarray | None = None
    gamma: float = 0.0
    holder_L: float = 1.0
    optimum: tuple[np.ndarray, float] | None = None
    domain: FeasibleSet | None = None
    inflation: float = math.inf
    name: str = "polynomial"

    def __post_init__(self):
        self.A = np.ascontiguousarray(self.A, dtype=float)
        self.b = np.ascontiguousarray(self.b, dtype=float)
        if self.A.shape != (self.dim, self.dim) or self.b.shape != (self.dim,):
            raise ValueError("A must be (n, n) and b must be (n,)")
        if not np.allclose(self.A, self.A.T):
            raise ValueError("A must be symmetric")
        self.center = (
            np.zeros(self.dim)
            if self.center is None
            else np.ascontiguousarray(self.center, dtype=float)
        )

    def value(self, x):
        x = np.asarray(x, dtype=float)
        sq = np.sum(x * x, axis=-1)
        d = x - self.center
        return (
            0.5 * np.einsum("...i,ij,...j->...", x, self.A, x)
            + x @ self.b
            + self.c
            + self.quartic_coef * np.sum(x**4, axis=-1)
            + self.norm4_coef * sq * sq
            + 0.5 * self.reg * np.sum(d * d, axis=-1)
        )

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        sq = np.sum(x * x, axis=-1, keepdims=True)
        return (
            x @ self.A
            + self.b
            + 4.0 * self.quartic_coef * x**3
            + 4.0 * self.norm4_coef * sq * x
            + self.reg * (x - self.center)
        )

    def lipschitz_G(self, radius: float) -> float:
        # ||x^3||_2 <= ||x||^3, so both quartic terms are bounded by 4 rho^3.
        op = float(np.linalg.norm(self.A, 2))
        rho = float(radius)
        return (
            op * rho
            + float(np.linalg.norm(self.b))
            + 4.0 * (abs(self.quartic_coef) + abs(self.norm4_coef)) * rho**3
            + abs(self.reg) * (rho + float(np.linalg.norm(self.center)))
        )

    def regularized(self, gamma: float, center) -> "PolynomialObjective":
        """``f + gamma/2 ||x - center||^2`` with the optimum left unknown."""
        if self.reg != 0.0:
            raise ValueError("objective is already regularized")
        return replace(
            self,
            reg=float(gamma),
            center=np.array(center, dtype=float),
            gamma=self.gamma + float(gamma),
            optimum=None,
            name=f"{self.name}+prox({gamma:g})",
        )

    def packed(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Coefficient arrays in the layout the loop kernels expect."""
        scal = np.array([self.c, self.quartic_coef, self.norm4_coef, self.reg], dtype=float)
        return self.A, self.b, self.center, scal


@dataclass(eq=False)
class FunctionObjective(Objective):
    """Objective given by plain callables (runs on the Python loop only)."""

    dim: int
    fn: Callable[[np.ndarray], float]
    grad_fn: Callable[[np.ndarray], np.ndarray] | None = None
    G_fn: Callable[[float], float] | None = None
    gamma: float = 0.0
    holder_L: float = 1.0
    optimum: tuple[np.ndarray, float] | None = None
    domain: FeasibleSet | None = None
    inflation: float = math.inf
    name: str = "function"

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return float(self.fn(x))
        return np.apply_along_axis(self.fn, -1, x)

    def grad(self, x):
        if self.grad_fn is None:
            raise NotImplementedError(f"{self.name} has no gradient")
        return self.grad_fn(np.asarray(x, dtype=float))

    def lipschitz_G(self, radius: float) -> float:
        if self.G_fn is None:
            raise NotImplementedError(f"{self.name} declares no Lipschitz bound")
        return float(self.G_fn(radius))

    def regularized(self, gamma: float, center) -> "FunctionObjective":
        center = np.array(center, dtype=float)
        f, g, G = self.fn, self.grad_fn, self.G_fn
        return FunctionObjective(
            dim=self.dim,
            fn=_Prox(f, gamma, center),
            grad_fn=None if g is None else _ProxGrad(g, gamma, center),
            G_fn=None if G is None else _ProxG(G, gamma, float(np.linalg.norm(center))),
            gamma=self.gamma + gamma,
            holder_L=self.holder_L,
            domain=self.domain,
            inflation=self.inflation,
            name=f"{self.name}+prox({gamma:g})",
        )


@dataclass(frozen=True)
class _Prox:
    f: Callable
    gamma: float
    center: np.ndarray

    def __call__(self, x):
        d = x - self.center
        return self.f(x) + 0.5 * self.gamma * float(d @ d)


@dataclass(frozen=True)
class _ProxGrad:
    g: Callable
    gamma: float
    center: np.ndarray

    def __call__(self, x):
        return self.g(x) + self.gamma * (x - self.center)


@dataclass(frozen=True)
class _ProxG:
    G: Callable
    gamma: float
    cnorm: float

    def __call__(self, radius):
        return self.G(radius) + self.gamma * (radius + self.cnorm)


# -- test suite -----------------------------------------------------------------


def quadratic(A, b=None, *, holder_L: float = 0.01, name: str = "quadratic",
              feasible: FeasibleSet | None = None) -> PolynomialObjective:
    """``1/2 x'Ax + b'x`` with ``A`` symmetric positive definite.

    A quadratic has zero Taylor remainder beyond degree 2, so any positive
    ``holder_L`` is admissible; it only shapes the step schedule.  When
    ``feasible`` is given the constrained optimum is found numerically.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[0] != A.shape[1]:
        A = np.diag(A.ravel())
    n = A.shape[0]
    b = np.zeros(n) if b is None else np.asarray(b, dtype=float)
    gamma = float(np.linalg.eigvalsh(A).min())
    if gamma <= 0:
        raise ValueError("quadratic must be strongly convex")
    obj = PolynomialObjective(dim=n, A=A, b=b, gamma=gamma, holder_L=holder_L, name=name)
    x_star = np.linalg.solve(A, -b)
    if feasible is not None and not feasible.contains(x_star):
        x_star = _constrained_min(obj, feasible)
    obj.optimum = (x_star, float(obj.value(x_star)))
    return obj


def _constrained_min(obj: Objective, fset: FeasibleSet) -> np.ndarray:
    # projected gradient with a safe constant step; only used for suite setup
    step = 1.0 / max(float(np.linalg.norm(getattr(obj, "A", np.eye(obj.dim)), 2)), 1e-12)
    x = fset.project(np.zeros(obj.dim))
    for _ in range(100_000):
        x_new = fset.project(x - step * obj.grad(x))
        if np.linalg.norm(x_new - x) < 1e-15:
            break
        x = x_new
    return x


def anisotropic_quadratic() -> PolynomialObjective:
    """``x1^2/4 + x2^2 + 4 x3^2`` on the unit ball, with the declared L = 0.01."""
    obj = quadratic(np.diag([0.5, 2.0, 8.0]), holder_L=0.01, name="anisotropic_quadratic")
    return obj


def quartic(n: int = 3, gamma: float = 1.0, *, radius: float = 2.0) -> PolynomialObjective:
    """``sum_i x_i^4 + gamma/2 ||x||^2``.

    Its degree-2 Taylor remainder is ``sum_i (4 x_i h_i^3 + h_i^4)``, bounded
    by ``6 rho ||h||^3`` on the ball of radius ``rho = radius``; that is the
    declared Hoelder constant for kernels with ``l = 2``.
    """
    return PolynomialObjective(
        dim=n,
        A=gamma * np.eye(n),
        b=np.zeros(n),
        quartic_coef=1.0,
        gamma=gamma,
        holder_L=6.0 * radius,
        optimum=(np.zeros(n), 0.0),
        name="quartic",
    )


def convex_quartic(n: int = 3, *, radius: float = 2.0) -> PolynomialObjective:
    """``||x||^4``: convex, flat at the origin (gamma = 0).

    Remainder ``4<x,h>||h||^2 + ||h||^4 <= 6 rho ||h||^3`` on radius ``rho``.
    """
    return PolynomialObjective(
        dim=n,
        A=np.zeros((n, n)),
        b=np.zeros(n),
        norm4_coef=1.0,
        gamma=0.0,
        holder_L=6.0 * radius,
        optimum=(np.zeros(n), 0.0),
        name="convex_quartic",
    )


def make_test_suite(spectrum=(1.0, 3.0, 10.0), seed: int = 0) -> list[PolynomialObjective]:
    """The standard objectives: anisotropic quadratic, a rotated quadratic with the
    given ``spectrum``, the strongly convex quartic and the convex quartic."""
    rng = np.random.default_rng(seed)
    spectrum = np.asarray(spectrum, dtype=float)
    n = spectrum.shape[0]
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    A = q @ np.diag(spectrum) @ q.T
    A = 0.5 * (A + A.T)
    b = 0.1 * rng.standard_normal(n)
    general = quadratic(A, b, name="general_quadratic", feasible=Ball(np.zeros(n), 1.0))
    return [anisotropic_quadratic(), general, quartic(3, 1.0), convex_quartic(3)]


def suite_by_name(name: str) -> PolynomialObjective:
    for obj in make_test_suite():
        if obj.name == name:
            return obj
    raise KeyError(name)


# -- noise --------------------------------------------------------------------------


class NoiseModel:
    """Additive observation noise.

    ``draw`` sees only the global query index and its own generator: the
    interface has no access to the algorithm's radii or directions.
    """

    sigma_effective: float = 0.0

    def draw(self, start: int, count: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class NoNoise(NoiseModel):
    def draw(self, start, count, rng):
        return np.zeros(count)

    @property
    def sigma_effective(self) -> float:
        return 0.0


@dataclass(frozen=True)
class GaussianNoise(NoiseModel):
    sigma: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")

    def draw(self, start, count, rng):
        return self.sigma * rng.standard_normal(count)

    @property
    def sigma_effective(self) -> float:
        return self.sigma


@dataclass(frozen=True)
class UniformNoise(NoiseModel):
    """Uniform on ``[-sigma sqrt(3), sigma sqrt(3)]`` (variance ``sigma^2``)."""

    sigma: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")

    def draw(self, start, count, rng):
        half = self.sigma * math.sqrt(3.0)
        return rng.uniform(-half, half, count)

    @property
    def sigma_effective(self) -> float:
        return self.sigma


@dataclass(frozen=True)
class ConstantBias(NoiseModel):
    b: float

    def draw(self, start, count, rng):
        return np.full(count, float(self.b))

    @property
    def sigma_effective(self) -> float:
        return abs(self.b)


@dataclass(frozen=True)
class AlternatingBias(NoiseModel):
    """``+b`` on even query indices, ``-b`` on odd ones."""

    b: float

    def draw(self, start, count, rng):
        idx = np.arange(start, start + count)
        return np.where(idx % 2 == 0, float(self.b), -float(self.b))

    @property
    def sigma_effective(self) -> float:
        return abs(self.b)


def make_noise(kind: str, **params) -> NoiseModel:
    kinds = {
        "none": NoNoise,
        "gaussian": GaussianNoise,
        "uniform": UniformNoise,
        "constant_bias": ConstantBias,
        "alternating_bias": AlternatingBias,
    }
    try:
        cls = kinds[kind]
    except KeyError:
        raise ValueError(f"unknown noise kind {kind!r}; expected one of {sorted(kinds)}") from None
    return cls(**params)


@dataclass
class QueryLedger:
    count: int = 0


def noisy_pair(obj: Objective, noise: NoiseModel, x_plus, x_minus, k: int,
               rng: np.random.Generator, ledger: QueryLedger) -> tuple[float, float]:
    """Observe ``f(x_plus) + xi`` and ``f(x_minus) + xi'`` at iteration ``k`` (1-based).

    The two noise values are queries ``2(k-1)`` and ``2(k-1) + 1``.
    """
    for pt in (x_plus, x_minus):
        if not obj.in_domain(pt):
            raise DomainError(f"query {np.asarray(pt).tolist()} is outside the domain of {obj.name}")
    xi = noise.draw(2 * (k - 1), 2, rng)
    ledger.count += 2
    return float(obj.value(x_plus)) + float(xi[0]), float(obj.value(x_minus)) + float(xi[1])
