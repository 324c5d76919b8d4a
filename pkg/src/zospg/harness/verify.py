"""Self-check of kernels, projections, estimator and backends."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .. import _backend
from ..diagnostics import (
    common_directions,
    estimator_bias,
    estimator_mean,
    second_moment,
    second_moment_bound,
)
from ..geometry import Ball, Box
from ..kernel import KernelSpec, build_kernel, eval_kernel, kernel_moment
from ..oracle import GaussianNoise, anisotropic_quadratic, quartic
from ..optimizer import RunConfig, run_zospg

__all__ = ["CLOSED_FORMS", "Check", "Report", "verify_suite"]

MOMENT_BETAS = (2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0, 7.0)

CLOSED_FORMS: dict[float, Callable[[np.ndarray], np.ndarray]] = {
    3.0: lambda r: 3.0 * r,
    5.0: lambda r: 15.0 * r / 4.0 * (5.0 - 7.0 * r**2),
    7.0: lambda r: 105.0 * r / 64.0 * (99.0 * r**4 - 126.0 * r**2 + 35.0),
}


@dataclass
class Check:
    name: str
    passed: bool
    detail: str
    advisory: bool = False


@dataclass
class Report:
    checks: list[Check] = field(default_factory=list)

    def add(self, name: str, passed: bool, detail: str, advisory: bool = False) -> None:
        self.checks.append(Check(name, bool(passed), detail, advisory))

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks if not c.advisory)

    def format(self) -> str:
        width = max(len(c.name) for c in self.checks)
        lines = []
        for c in self.checks:
            mark = "PASS" if c.passed else ("WARN" if c.advisory else "FAIL")
            lines.append(f"{mark}  {c.name:<{width}}  {c.detail}")
        failed = sum(not c.passed and not c.advisory for c in self.checks)
        lines.append(f"{len(self.checks)} checks, {failed} failed")
        return "\n".join(lines)


def _moments(report: Report, builder) -> None:
    for beta in MOMENT_BETAS:
        k = builder(beta)
        worst = max(abs(kernel_moment(k, j) - (1.0 if j == 1 else 0.0)) for j in range(k.l + 1))
        report.add(f"moments beta={beta:g}", worst < 1e-10, f"max deviation {worst:.2e} (tol 1e-10)")


def _closed_forms(report: Report, builder) -> None:
    r = np.linspace(-1.0, 1.0, 1000)
    for beta, fn in CLOSED_FORMS.items():
        err = float(np.max(np.abs(eval_kernel(builder(beta), r) - fn(r))))
        report.add(f"closed form beta={beta:g}", err < 1e-10, f"max |diff| {err:.2e} (tol 1e-10)")


def _constants(report: Report, builder) -> None:
    for beta in MOMENT_BETAS:
        k = builder(beta)
        lim = 2.0 * math.sqrt(2.0) * (beta - 1.0)
        report.add(f"kappa_beta bound beta={beta:g}", k.kappa_beta <= lim,
                   f"{k.kappa_beta:.4f} <= {lim:.4f}")
        exact = float(np.sum(np.square(k.coefficients)))
        report.add(f"kappa = sum c_m^2 beta={beta:g}", abs(k.kappa - exact) < 1e-9 * exact,
                   f"{k.kappa:.6f} vs {exact:.6f}")
        lim2 = math.sqrt(3.0) * beta**1.5
        report.add(f"kappa literature bound beta={beta:g}", k.kappa <= lim2,
                   f"{k.kappa:.4f} <= {lim2:.4f} (advisory)", advisory=True)


def _projections(report: Report, rng: np.random.Generator) -> None:
    sets = [
        Ball(np.array([0.2, -0.1, 0.0]), 0.7),
        Box(np.array([-1.0, 0.0, -0.5]), np.array([0.5, 2.0, 0.5])),
    ]
    for s in sets:
        pts = rng.normal(scale=2.0, size=(500, 3))
        proj = np.array([s.project(p) for p in pts])
        inside = all(s.contains(p, atol=1e-12) for p in proj)
        idem = max(float(np.max(np.abs(s.project(p) - p))) for p in proj)
        d_in = np.linalg.norm(pts[1:] - pts[:-1], axis=1)
        d_out = np.linalg.norm(proj[1:] - proj[:-1], axis=1)
        nonexp = bool(np.all(d_out <= d_in + 1e-12))
        kind = type(s).__name__.lower()
        report.add(f"projection {kind}", inside and idem <= 1e-12 and nonexp,
                   f"feasible={inside} idempotence={idem:.1e} nonexpansive={nonexp}")


def _unbiased(report: Report, builder, size: int) -> None:
    obj = anisotropic_quadratic()
    x = np.array([0.3, -0.2, 0.4])
    mean, se = estimator_mean(obj, x, 0.1, builder(3.0), np.random.default_rng(7), size)
    z = np.abs(mean - obj.grad(x)) / se
    report.add("unbiased on quadratic", bool(np.all(z < 4.0)),
               f"max |z| = {float(z.max()):.2f} over {size} draws (tol 4 SE)")


def _bias_slope(report: Report, builder, count: int) -> float:
    obj = quartic(3)
    x = np.array([0.3, -0.2, 0.4])
    taus = np.array([0.4, 0.2, 0.1, 0.05])
    dirs = common_directions(count, 3, seed=11)
    k = builder(3.0)
    norms = [float(np.linalg.norm(estimator_bias(obj, x, t, k, dirs))) for t in taus]
    slope = float(np.polyfit(np.log(taus), np.log(norms), 1)[0])
    report.add("bias slope on quartic", abs(slope - 2.0) <= 0.3, f"slope {slope:.3f} (want 2 +/- 0.3)")
    return slope


def _second_moment(report: Report, builder, size: int) -> None:
    obj = anisotropic_quadratic()
    k = builder(3.0)
    sigma = 0.01
    x = np.array([0.3, -0.2, 0.4])
    rng = np.random.default_rng(5)
    worst = 0.0
    for tau in (0.01, 0.05, 0.1, 0.5):
        G = obj.lipschitz_G(1.0 + tau)
        m = second_moment(obj, x, tau, k, GaussianNoise(sigma), rng, size)
        worst = max(worst, m / second_moment_bound(k, 3, G, sigma, tau))
    report.add("second moment bound", worst <= 1.0, f"max ratio {worst:.3f} (want <= 1)")


def _parity(report: Report) -> None:
    if "cython" not in _backend.available():
        report.add("backend parity", True, "compiled backend not built; python only (advisory)", advisory=True)
        return
    cfg = RunConfig(beta=3.0, gamma=0.5, sigma=0.01, holder_L=0.01, N=3000, seed=3, record_every=500)
    obj = anisotropic_quadratic()
    args = (cfg, obj, Ball(np.zeros(3), 1.0), GaussianNoise(0.01), np.array([0.5, 0.0, 0.0]))
    a = run_zospg(*args, backend="cython")
    b = run_zospg(*args, backend="python")
    same = np.array_equal(a.errors, b.errors) and np.array_equal(a.x_last, b.x_last)
    report.add("backend parity", same, "cython and python traces bitwise equal" if same else "traces differ")


def verify_suite(quick: bool = False,
                 kernel_builder: Callable[[float], KernelSpec] = build_kernel) -> Report:
    """Run every check; ``kernel_builder`` lets tests inject a broken kernel."""
    report = Report()
    _moments(report, kernel_builder)
    _closed_forms(report, kernel_builder)
    _constants(report, kernel_builder)
    _projections(report, np.random.default_rng(0))
    _unbiased(report, kernel_builder, 100_000 if quick else 1_000_000)
    _bias_slope(report, kernel_builder, 20_000 if quick else 200_000)
    _second_moment(report, kernel_builder, 20_000 if quick else 200_000)
    _parity(report)
    return report
