"""Zeroth-order stochastic projected gradient with kernel smoothing.

Each iteration draws ``r ~ U[-1, 1]`` and a unit direction ``e``, queries the
noisy objective at ``x +/- tau_k r e`` and steps along

    g = n / (2 tau_k) * (y - y') * K(r) * e

followed by a Euclidean projection.  ``tau_k`` and ``alpha_k = 2 / (gamma k)``
follow the strongly convex schedule; the reported point is the running
average of the iterates.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import optimize

from . import _backend
from .geometry import Ball, Box, FeasibleSet, project, sample_directions, sample_scalars, split_streams
from .kernel import KernelSpec, build_kernel, eval_kernel
from .oracle import NoiseModel, Objective, PolynomialObjective, QueryLedger, noisy_pair

__all__ = [
    "ConfigError",
    "RunAborted",
    "RunConfig",
    "Trace",
    "alpha_schedule",
    "bound_constants",
    "c_prime",
    "gradient_estimate",
    "kernel_for",
    "n_epsilon",
    "run_regularized",
    "run_zospg",
    "sample_gradient_estimates",
    "tau_coefficient",
    "tau_schedule",
    "theoretical_bound",
]

CHUNK = 1 << 16


class ConfigError(ValueError):
    """Inconsistent run configuration."""


class RunAborted(RuntimeError):
    """A run hit a non-finite objective value."""

    def __init__(self, message: str, trace: "Trace | None" = None):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class RunConfig:
    """Tunables of one optimizer run.

    ``tau_override`` replaces the smoothing-radius coefficient and is
    mandatory when ``sigma == 0``.  ``alpha_override`` replaces the step
    coefficient ``2 / gamma`` (so ``alpha_k = alpha_override / k``).
    Checkpoints are ``checkpoints`` if given, else every ``record_every``
    iterations, else ~60 log-spaced points; ``N`` is always recorded.
    """

    beta: float
    gamma: float
    sigma: float
    holder_L: float
    N: int
    seed: int | tuple[int, ...] = 0
    tau_override: float | None = None
    alpha_override: float | None = None
    c_star: float = 9.0
    checkpoints: Sequence[int] | None = None
    record_every: int | None = None

    def __post_init__(self):
        if int(self.N) < 1:
            raise ConfigError(f"N must be >= 1, got {self.N}")
        if not self.beta >= 2.0:
            raise ConfigError(f"beta must be >= 2, got {self.beta}")
        if self.sigma < 0:
            raise ConfigError("sigma must be nonnegative")
        if not self.holder_L > 0:
            raise ConfigError("holder_L must be positive")
        if not self.c_star > 0:
            raise ConfigError("c_star must be positive")
        if self.tau_override is not None and not self.tau_override > 0:
            raise ConfigError("tau_override must be positive")
        if self.record_every is not None and self.record_every < 1:
            raise ConfigError("record_every must be >= 1")


@lru_cache(maxsize=None)
def kernel_for(beta: float) -> KernelSpec:
    return build_kernel(beta)


def tau_coefficient(cfg: RunConfig, kernel: KernelSpec, n: int) -> float:
    """``tau_1``: the factor in front of ``k^(-1/(2 beta))``."""
    if cfg.tau_override is not None:
        return float(cfg.tau_override)
    if cfg.sigma == 0:
        raise ConfigError("sigma = 0 makes the smoothing radius vanish; set tau_override")
    beta = cfg.beta
    num = 3.0 * kernel.kappa * cfg.sigma**2 * n
    den = 2.0 * (beta - 1.0) * (kernel.kappa_beta * cfg.holder_L) ** 2
    return (num / den) ** (1.0 / (2.0 * beta))


def tau_schedule(cfg: RunConfig, kernel: KernelSpec, k, n: int):
    """Smoothing radius ``tau_k``; ``k`` may be an integer array."""
    return tau_coefficient(cfg, kernel, n) * np.asarray(k, dtype=float) ** (-1.0 / (2.0 * cfg.beta))


def alpha_schedule(cfg: RunConfig, k):
    """Step size ``2 / (gamma k)``, or ``alpha_override / k``."""
    k = np.asarray(k, dtype=float)
    if cfg.alpha_override is not None:
        return cfg.alpha_override / k
    if not cfg.gamma > 0:
        raise ConfigError(f"step schedule needs gamma > 0, got {cfg.gamma}")
    return 2.0 / (cfg.gamma * k)


def gradient_estimate(n: int, tau: float, y: float, y_prime: float, e, K_r: float) -> np.ndarray:
    if not tau > 0:
        raise ValueError("tau must be positive")
    return (n / (2.0 * tau)) * (y - y_prime) * K_r * np.asarray(e, dtype=float)


def sample_gradient_estimates(obj: Objective, x, tau: float, kernel: KernelSpec,
                              rng: np.random.Generator, size: int,
                              noise: NoiseModel | None = None,
                              noise_rng: np.random.Generator | None = None) -> np.ndarray:
    """``size`` independent draws of the estimator at a fixed point ``x``."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    r = sample_scalars(size, rng)
    e = sample_directions(size, n, rng)
    d = (tau * r)[:, None] * e
    diff = obj.value(x + d) - obj.value(x - d)
    if noise is not None:
        xi = noise.draw(0, 2 * size, noise_rng).reshape(size, 2)
        diff = diff + xi[:, 0] - xi[:, 1]
    return ((n / (2.0 * tau)) * diff * eval_kernel(kernel, r))[:, None] * e


# -- bounds ----------------------------------------------------------------------


def bound_constants(cfg: RunConfig, kernel: KernelSpec, G: float) -> tuple[float, float]:
    """``(A1, A2)`` of the strongly convex rate."""
    beta = cfg.beta
    a1 = (
        3.0 * beta
        * (kernel.kappa * cfg.sigma**2) ** ((beta - 1.0) / beta)
        * (kernel.kappa_beta * cfg.holder_L) ** (2.0 / beta)
    )
    a2 = cfg.c_star * kernel.kappa * G**2
    return a1, a2


def theoretical_bound(cfg: RunConfig, kernel: KernelSpec, G: float, N, n: int):
    """Upper bound on ``E[f(xbar_N)] - f*``; vectorized over ``N``."""
    N = np.asarray(N, dtype=float)
    if np.any(N < 1):
        raise ValueError("N must be >= 1")
    if not cfg.gamma > 0:
        raise ConfigError("bound needs gamma > 0")
    beta = cfg.beta
    a1, a2 = bound_constants(cfg, kernel, G)
    val = (
        n ** (2.0 - 1.0 / beta) * a1 / N ** ((beta - 1.0) / beta)
        + a2 * n * (1.0 + np.log(N)) / N
    ) / cfg.gamma
    return float(val) if val.ndim == 0 else val


def c_prime(rho: float, n_max: float = 1e12) -> float:
    """Smallest ``c'`` with ``1 + ln N <= c' N^(rho/(rho+1))`` for ``1 <= N <= n_max``."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    p = rho / (rho + 1.0)
    t_max = math.log(n_max)

    def neg(t):
        return -(1.0 + t) * math.exp(-p * t)

    res = optimize.minimize_scalar(neg, bounds=(0.0, t_max), method="bounded",
                                   options={"xatol": 1e-12})
    return max(-res.fun, -neg(0.0), -neg(t_max))


def n_epsilon(cfg: RunConfig, kernel: KernelSpec, G: float, eps: float, R: float, n: int,
              rho: float = 0.1, c_prime_value: float | None = None) -> int:
    """Iterations after which the regularized run is ``eps``-accurate."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not rho > 0:
        raise ValueError("rho must be positive")
    beta = cfg.beta
    cp = c_prime(rho) if c_prime_value is None else c_prime_value
    a1, a2 = bound_constants(cfg, kernel, G)
    first = (
        (R * math.sqrt(2.0 * a1)) ** (2.0 * beta / (beta - 1.0))
        * n ** (2.0 + 1.0 / (beta - 1.0))
        / eps ** (2.0 + 2.0 / (beta - 1.0))
    )
    second = (
        (R * math.sqrt(2.0 * cp * a2)) ** (2.0 * (1.0 + rho))
        * n ** (1.0 + rho)
        / eps ** (2.0 * (1.0 + rho))
    )
    return max(1, math.ceil(max(first, second)))


def lipschitz_on(obj: Objective, fset: FeasibleSet, tau1: float) -> float:
    """Gradient bound on the ``tau1``-neighbourhood of ``fset``."""
    return obj.lipschitz_G(fset.bounding_radius() + tau1)


# -- runner ------------------------------------------------------------------------


@dataclass
class Trace:
    """Record of one run.

    ``errors`` is ``f(xbar_k) - f*`` at each checkpoint (NaN when the
    optimum is unknown), ``best_errors`` the best iterate so far.
    """

    iterations: np.ndarray
    values: np.ndarray
    errors: np.ndarray
    best_errors: np.ndarray
    iterates: np.ndarray
    averages: np.ndarray
    queries: np.ndarray
    x_last: np.ndarray
    x_bar: np.ndarray
    query_count: int
    wall_clock: float
    backend: str
    tau1: float
    extra: dict = field(default_factory=dict)

    @property
    def final_error(self) -> float:
        return float(self.errors[-1])


def _checkpoints(cfg: RunConfig) -> np.ndarray:
    N = int(cfg.N)
    if cfg.checkpoints is not None:
        cps = [int(c) for c in cfg.checkpoints if 1 <= int(c) <= N]
    elif cfg.record_every is not None:
        cps = list(range(cfg.record_every, N + 1, cfg.record_every))
    else:
        cps = np.geomspace(1, N, 60).astype(np.int64).tolist()
    return np.array(sorted(set(cps) | {N}), dtype=np.int64)


def _set_arrays(fset: FeasibleSet, n: int):
    if isinstance(fset, Ball):
        return 1, np.ascontiguousarray(fset.center), np.zeros(n), fset.radius
    if isinstance(fset, Box):
        return 2, np.ascontiguousarray(fset.lower), np.ascontiguousarray(fset.upper), 0.0
    raise TypeError(f"unsupported feasible set {fset!r}")


def run_zospg(cfg: RunConfig, obj: Objective, fset: FeasibleSet, noise: NoiseModel, x0, *,
              error_obj: Objective | None = None, kernel: KernelSpec | None = None,
              backend: str | None = None) -> Trace:
    """Run ``cfg.N`` iterations from ``x0`` and return the trace.

    ``error_obj`` is the function whose suboptimality is reported (defaults
    to ``obj``).  Polynomial objectives go through the loop backend
    (compiled when available); anything else uses the plain Python loop.
    """
    n = obj.dim
    x0 = np.array(x0, dtype=float)
    if x0.shape != (n,) or fset.dim != n:
        raise ConfigError(f"dimension mismatch: x0 {x0.shape}, objective {n}, set {fset.dim}")
    if not fset.contains(x0):
        raise ConfigError(f"x0={x0.tolist()} is not in the feasible set")
    kernel = kernel_for(float(cfg.beta)) if kernel is None else kernel
    error_obj = obj if error_obj is None else error_obj
    tau1 = tau_coefficient(cfg, kernel, n)
    if obj.domain is not None and tau1 > obj.inflation:
        raise ConfigError(
            f"tau_1={tau1:.4g} exceeds the declared domain inflation {obj.inflation:.4g} of {obj.name}"
        )
    alpha_schedule(cfg, 1)  # validates gamma early

    cps = _checkpoints(cfg)
    alg_rng, noise_rng = split_streams(cfg.seed)
    use_core = (
        isinstance(obj, PolynomialObjective)
        and isinstance(error_obj, PolynomialObjective)
        and n <= 64
    )
    if use_core:
        bname, core = _backend.get(backend)
    else:
        bname, core = "python-generic", None

    N = int(cfg.N)
    ncp = cps.shape[0]
    out_avg = np.empty(ncp)
    out_best = np.empty(ncp)
    out_x = np.empty((ncp, n))
    out_xbar = np.empty((ncp, n))
    x = x0.copy()
    xbar = np.zeros(n)
    state = np.array([math.inf])
    ledger = QueryLedger()
    set_kind, s1, s2, srad = _set_arrays(fset, n)
    if use_core:
        Ao, bo, co, so = obj.packed()
        Ae, be, ce, se = error_obj.packed()
    rec_pos = 0
    t0 = time.perf_counter()

    for start in range(0, N, CHUNK):
        m = min(CHUNK, N - start)
        ks = np.arange(start + 1, start + m + 1)
        taus = np.ascontiguousarray(tau_schedule(cfg, kernel, ks, n))
        alphas = np.ascontiguousarray(alpha_schedule(cfg, ks))
        r = sample_scalars(m, alg_rng)
        e = sample_directions(m, n, alg_rng)
        kr = np.ascontiguousarray(eval_kernel(kernel, r))
        hi = np.searchsorted(cps, start + m, side="right")
        rec = np.ascontiguousarray(cps[rec_pos:hi] - start - 1)
        if use_core:
            xi = noise.draw(2 * start, 2 * m, noise_rng).reshape(m, 2)
            status = core.run_chunk(
                x, xbar, state, Ao, bo, co, so, Ae, be, ce, se,
                set_kind, s1, s2, srad, taus, alphas, r, kr, e, np.ascontiguousarray(xi),
                start, rec, out_avg[rec_pos:hi], out_best[rec_pos:hi],
                out_x[rec_pos:hi], out_xbar[rec_pos:hi],
            )
            if status >= 0:
                ledger.count += 2 * (status + 1)
                _abort(start + status + 1, x, obj)
            ledger.count += 2 * m
        else:
            x = _python_chunk(
                obj, error_obj, fset, noise, noise_rng, ledger, x, xbar, state,
                taus, alphas, r, kr, e, start, rec,
                out_avg[rec_pos:hi], out_best[rec_pos:hi], out_x[rec_pos:hi], out_xbar[rec_pos:hi],
            )
        rec_pos = hi

    elapsed = time.perf_counter() - t0
    f_star = error_obj.f_star
    f_star = math.nan if f_star is None else f_star
    return Trace(
        iterations=cps,
        values=out_avg,
        errors=out_avg - f_star,
        best_errors=out_best - f_star,
        iterates=out_x,
        averages=out_xbar,
        queries=2 * cps,
        x_last=x,
        x_bar=xbar.copy(),
        query_count=ledger.count,
        wall_clock=elapsed,
        backend=bname,
        tau1=tau1,
    )


def _abort(k: int, x, obj: Objective):
    raise RunAborted(f"non-finite value of {obj.name} at iteration {k} near x={np.asarray(x).tolist()}")


def _python_chunk(obj, error_obj, fset, noise, noise_rng, ledger, x, xbar, state,
                  taus, alphas, r, kr, e, start, rec, out_avg, out_best, out_x, out_xbar):
    n = x.shape[0]
    p = 0
    for i in range(taus.shape[0]):
        k = start + i + 1
        d = (taus[i] * r[i]) * e[i]
        y, y_prime = noisy_pair(obj, noise, x + d, x - d, k, noise_rng, ledger)
        if not (math.isfinite(y) and math.isfinite(y_prime)):
            _abort(k, x, obj)
        g = gradient_estimate(n, taus[i], y, y_prime, e[i], kr[i])
        fx = float(error_obj.value(x))
        if not math.isfinite(fx):
            _abort(k, x, obj)
        state[0] = min(state[0], fx)
        xbar += (x - xbar) / k
        if p < rec.shape[0] and rec[p] == i:
            out_avg[p] = error_obj.value(xbar)
            out_best[p] = state[0]
            out_x[p] = x
            out_xbar[p] = xbar
            p += 1
        x = project(fset, x - alphas[i] * g)
    return x


def run_regularized(cfg: RunConfig, obj: Objective, fset: FeasibleSet, noise: NoiseModel, x0,
                    eps: float, R: float, **kwargs) -> Trace:
    """Solve a merely convex problem through ``f + gamma/2 ||x - x0||^2``, ``gamma = eps/R^2``.

    The step schedule uses the wrapper's modulus; errors are measured on the
    original objective.
    """
    if not eps > 0 or not R > 0:
        raise ConfigError("eps and R must be positive")
    x0 = np.asarray(x0, dtype=float)
    if obj.optimum is not None and np.linalg.norm(x0 - obj.optimum[0]) > R + 1e-12:
        raise ConfigError("R must be at least ||x0 - x*||")
    gamma = eps / R**2
    wrapped = obj.regularized(gamma, x0)
    trace = run_zospg(replace(cfg, gamma=wrapped.gamma), wrapped, fset, noise, x0,
                      error_obj=obj, **kwargs)
    trace.extra["reg_gamma"] = gamma
    trace.extra["wrapped"] = wrapped
    return trace
