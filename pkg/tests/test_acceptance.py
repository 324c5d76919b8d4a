"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line; the lines are repeated in the
"acceptance criteria" section of the pytest terminal summary.
"""

import filecmp
import math
import os
from dataclasses import replace

import numpy as np
import pytest

from zospg.diagnostics import (
    common_directions,
    estimator_bias,
    estimator_mean,
    second_moment,
    second_moment_bound,
)
from zospg.geometry import Ball
from zospg.harness.config import bundled_config, load_config
from zospg.harness.experiment import run_experiment
from zospg.harness.verify import CLOSED_FORMS, MOMENT_BETAS
from zospg.kernel import build_kernel, eval_kernel, kernel_moment
from zospg.oracle import GaussianNoise, anisotropic_quadratic, convex_quartic, make_test_suite, quartic
from zospg.optimizer import (
    RunConfig,
    lipschitz_on,
    n_epsilon,
    run_regularized,
    run_zospg,
    tau_coefficient,
    theoretical_bound,
)

UNIT_BALL = Ball(np.zeros(3), 1.0)
WORKERS = max(1, min(8, os.cpu_count() or 1))


def test_criterion_01_kernel_moments(acceptance_record):
    worst = 0.0
    for beta in MOMENT_BETAS:
        k = build_kernel(beta)
        for j in range(k.l + 1):
            worst = max(worst, abs(kernel_moment(k, j) - (1.0 if j == 1 else 0.0)))
    ok = worst < 1e-10
    acceptance_record(1, ok, f"max moment deviation {worst:.2e} over 8 kernels (tol 1e-10)")
    assert ok


def test_criterion_02_closed_forms(acceptance_record):
    r = np.linspace(-1.0, 1.0, 1000)
    errs = {b: float(np.max(np.abs(eval_kernel(build_kernel(b), r) - fn(r)))) for b, fn in CLOSED_FORMS.items()}
    ok = max(errs.values()) < 1e-10
    acceptance_record(2, ok, "max |diff| " + ", ".join(f"beta={b:g}: {e:.1e}" for b, e in errs.items()) + " (tol 1e-10)")
    assert ok


def test_criterion_03_constant_bounds(acceptance_record):
    bad_kb, bad_k = [], []
    for beta in MOMENT_BETAS:
        k = build_kernel(beta)
        if not k.kappa_beta <= 2 * math.sqrt(2) * (beta - 1):
            bad_kb.append(f"beta={beta:g}")
        lim = math.sqrt(3) * beta**1.5
        if not k.kappa <= lim:
            bad_k.append(f"beta={beta:g} ({k.kappa:.2f} > {lim:.2f})")
    ok = not bad_kb and not bad_k
    detail = (f"kappa_beta bound violated: {', '.join(bad_kb) or 'none'}; "
              f"kappa bound violated: {', '.join(bad_k) or 'none'}")
    acceptance_record(3, ok, detail)
    assert ok, detail


def test_criterion_04_estimator_exactness(acceptance_record):
    f = anisotropic_quadratic()
    x = np.array([0.3, -0.2, 0.4])
    mean, se = estimator_mean(f, x, 0.1, build_kernel(3.0), np.random.default_rng(2024), 1_000_000)
    z = np.abs(mean - f.grad(x)) / se
    ok = bool(np.all(z < 4.0))
    acceptance_record(4, ok, f"|mean - grad| / SE = {np.round(z, 2).tolist()} (tol 4)")
    assert ok


def test_criterion_05_bias_slope(acceptance_record):
    q = quartic(3)
    x = np.array([0.3, -0.2, 0.4])
    taus = np.array([0.4, 0.2, 0.1, 0.05])
    dirs = common_directions(200_000, 3, seed=2024)
    k = build_kernel(3.0)
    norms = np.array([np.linalg.norm(estimator_bias(q, x, t, k, dirs)) for t in taus])
    slope = float(np.polyfit(np.log(taus), np.log(norms), 1)[0])
    ok = abs(slope - 2.0) <= 0.3
    acceptance_record(5, ok, f"log-log slope {slope:.3f} (want 2.0 +/- 0.3)")
    assert ok


def test_criterion_06_second_moment(acceptance_record):
    sigma = 0.01
    noise = GaussianNoise(sigma)
    k = build_kernel(3.0)
    rng = np.random.default_rng(2024)
    points = [np.zeros(3), np.array([0.3, -0.2, 0.4]), np.array([0.0, 0.0, 1.0]), np.array([0.6, 0.6, -0.5])]
    worst, where = 0.0, ""
    for obj in make_test_suite():
        for tau in np.geomspace(0.01, 0.5, 8):
            G = obj.lipschitz_G(1.0 + tau)
            bound = second_moment_bound(k, 3, G, sigma, tau)
            for x in points:
                ratio = second_moment(obj, x, tau, k, noise, rng, 100_000) / bound
                if ratio > worst:
                    worst, where = ratio, f"{obj.name}, tau={tau:.3g}"
    ok = worst <= 1.0
    acceptance_record(6, ok, f"max E||g||^2 / bound = {worst:.4f} at {where} (want <= 1)")
    assert ok


def _rate_run(holder_L):
    f = anisotropic_quadratic()
    cps = np.unique(np.round(np.geomspace(1e3, 1e5, 41)).astype(int))
    cfg = RunConfig(beta=3.0, gamma=f.gamma, sigma=0.01, holder_L=holder_L, N=100_000, checkpoints=cps)
    x0 = np.array([0.5, 0.0, 0.0])
    errs = np.mean([run_zospg(replace(cfg, seed=(7, s)), f, UNIT_BALL, GaussianNoise(0.01), x0).errors
                    for s in range(100)], axis=0)
    tail = cps >= 10_000
    slope = float(np.polyfit(np.log(cps[tail]), np.log(errs[tail]), 1)[0])
    k = build_kernel(3.0)
    G = lipschitz_on(f, UNIT_BALL, tau_coefficient(cfg, k, 3))
    bound = theoretical_bound(cfg, k, G, cps, 3)
    return slope, bool(np.all(bound >= errs)), float(np.min(bound / errs))


def test_criterion_07_rate(acceptance_record):
    # constants of the quadratic experiment (declared L = 0.01)
    slope, below, margin = _rate_run(0.01)
    # diagnostic only: with a larger declared L the smoothing radius shrinks
    # and the noise-driven regime is reached within 1e5 iterations
    slope_l1, _, _ = _rate_run(1.0)
    ok = abs(slope - (-2.0 / 3.0)) <= 0.15 and below
    acceptance_record(
        7, ok,
        f"tail slope {slope:.3f} (want -0.667 +/- 0.15), bound >= mean at all checkpoints: {below} "
        f"(min ratio {margin:.3g}); diagnostic slope with L=1: {slope_l1:.3f}",
    )
    assert below
    assert abs(slope - (-2.0 / 3.0)) <= 0.15


@pytest.fixture(scope="module")
def figure2_runs(tmp_path_factory):
    cfg = load_config(bundled_config("figure2"))
    base = tmp_path_factory.mktemp("figure2")
    first = run_experiment(cfg, base / "first", workers=WORKERS)
    second = run_experiment(cfg, base / "second", workers=WORKERS)
    return first, second


def test_criterion_08_figure2_ordering(figure2_runs, acceptance_record):
    res, _ = figure2_runs
    final = {c.label: (float(c.mean[-1]), float(c.half_width[-1])) for c in res.curves}
    e2, e3, e5 = (final[c.label] for c in res.curves)
    ok = e3[0] < e2[0] and e5[0] < e2[0]
    acceptance_record(
        8, ok,
        "mean error at N=1e5 +/- 95% CI: " + ", ".join(f"beta={b}: {m:.3e} +/- {h:.1e}"
                                                     for b, (m, h) in zip((2, 3, 5), (e2, e3, e5)))
        + f"; beta3<beta2: {e3[0] < e2[0]}, beta5<beta2: {e5[0] < e2[0]}",
    )
    assert res.complete
    assert e3[0] < e2[0]
    assert e5[0] < e2[0]


def test_criterion_09_regularized_convex(acceptance_record):
    f = convex_quartic(3)
    eps, R, sigma = 0.2, 1.0, 0.01
    x0 = np.array([1.0, 0.0, 0.0])
    wrapped = f.regularized(eps / R**2, x0)
    base = RunConfig(beta=3.0, gamma=wrapped.gamma, sigma=sigma, holder_L=f.holder_L, N=1)
    k = build_kernel(3.0)
    G = lipschitz_on(wrapped, UNIT_BALL, tau_coefficient(base, k, 3))
    N = n_epsilon(base, k, G, eps, R, 3)
    if N > 10_000_000:
        pytest.fail(f"n_epsilon = {N} exceeds 1e7; the fallback property would apply")
    cfg = replace(base, N=N, checkpoints=[N])
    errs = [run_regularized(replace(cfg, seed=(9, s)), f, UNIT_BALL, GaussianNoise(sigma), x0, eps, R).final_error
            for s in range(30)]
    mean = float(np.mean(errs))
    ok = mean <= eps
    acceptance_record(9, ok, f"N = n_epsilon = {N}, mean error over 30 seeds {mean:.3e} (want <= {eps})")
    assert ok


def test_criterion_10_determinism(figure2_runs, acceptance_record):
    a, b = figure2_runs
    files = sorted(p.relative_to(a.out_dir) for p in a.out_dir.rglob("*.csv"))
    same = [filecmp.cmp(a.out_dir / p, b.out_dir / p, shallow=False) for p in files]
    ok = bool(files) and all(same) and files == sorted(p.relative_to(b.out_dir) for p in b.out_dir.rglob("*.csv"))
    acceptance_record(10, ok, f"{sum(same)}/{len(files)} CSV files byte-identical across two runs")
    assert ok
