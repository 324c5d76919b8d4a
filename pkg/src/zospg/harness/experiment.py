"""Multi-seed experiment runner and CSV aggregation.

Output layout under ``<out>/``::

    trials/<slug>/trial_0000.csv   iteration,error,queries
    aggregate_<slug>.csv           iteration,mean,ci_low,ci_high
    bound_<slug>.csv               iteration,bound
    summary.json                   labels, statuses, aborted trials, metadata
    figure.svg
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from ..optimizer import (
    RunAborted,
    RunConfig,
    kernel_for,
    lipschitz_on,
    run_regularized,
    run_zospg,
    tau_coefficient,
    theoretical_bound,
)
from .config import ExperimentConfig, MethodSpec

__all__ = [
    "AggregateCurve",
    "BoundCurve",
    "ExperimentResult",
    "aggregate",
    "ci_quantile",
    "method_bound",
    "method_run_config",
    "read_aggregate_csv",
    "read_bound_csv",
    "read_trial_csv",
    "run_experiment",
    "slug",
    "trial_seed",
]

OUT_ENV = "ZOSPG_OUT_DIR"
NORMAL_Q = 1.96


@dataclass
class AggregateCurve:
    label: str
    iterations: np.ndarray
    mean: np.ndarray
    half_width: np.ndarray  # NaN when a single trial makes the CI undefined
    trials: int
    complete: bool = True

    @property
    def ci_low(self) -> np.ndarray:
        return self.mean - self.half_width

    @property
    def ci_high(self) -> np.ndarray:
        return self.mean + self.half_width


@dataclass
class BoundCurve:
    label: str
    iterations: np.ndarray
    values: np.ndarray


@dataclass
class ExperimentResult:
    out_dir: Path
    curves: list[AggregateCurve]
    bounds: list[BoundCurve]
    aborted: dict[str, list[dict]] = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return not self.aborted


def slug(index: int, method: MethodSpec) -> str:
    return f"m{index}_beta{method.beta:g}".replace(".", "p")


def trial_seed(master: int, method_index: int, trial: int) -> tuple[int, int, int]:
    return (int(master), int(method_index), int(trial))


def ci_quantile(trials: int) -> float:
    if trials >= 30:
        return NORMAL_Q
    return float(stats.t.ppf(0.975, trials - 1))


def aggregate(errors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean and 0.95 half-width over axis 0 (trials)."""
    errors = np.asarray(errors, dtype=float)
    T = errors.shape[0]
    mean = np.mean(errors, axis=0)
    if T < 2:
        return mean, np.full_like(mean, math.nan)
    sd = np.std(errors, axis=0, ddof=1)
    return mean, ci_quantile(T) * sd / math.sqrt(T)


def method_run_config(cfg: ExperimentConfig, method: MethodSpec, seed) -> RunConfig:
    obj = cfg.objective()
    return RunConfig(
        beta=method.beta,
        gamma=obj.gamma,
        sigma=cfg.sigma,
        holder_L=obj.holder_L,
        N=cfg.N,
        seed=seed,
        tau_override=method.tau_override,
        alpha_override=method.alpha_override,
        c_star=method.c_star,
        record_every=cfg.stride,
    )


def _run_trial(args):
    cfg, index, trial, master, backend = args
    method = cfg.methods[index]
    run_cfg = method_run_config(cfg, method, trial_seed(master, index, trial))
    obj = cfg.objective()
    try:
        if method.regularized:
            tr = run_regularized(run_cfg, obj, cfg.fset, cfg.noise, cfg.x0, method.eps, method.R,
                                 backend=backend)
        else:
            tr = run_zospg(run_cfg, obj, cfg.fset, cfg.noise, cfg.x0, backend=backend)
    except RunAborted as exc:
        return index, trial, None, str(exc)
    return index, trial, (tr.iterations, tr.errors, tr.queries), None


def method_bound(cfg: ExperimentConfig, method: MethodSpec, iterations) -> BoundCurve | None:
    """Strongly convex rate bound for ``method``; ``None`` for regularized runs."""
    if method.regularized:
        return None
    obj = cfg.objective()
    run_cfg = method_run_config(cfg, method, 0)
    kernel = kernel_for(method.beta)
    tau1 = tau_coefficient(run_cfg, kernel, obj.dim)
    G = lipschitz_on(obj, cfg.fset, tau1)
    values = theoretical_bound(run_cfg, kernel, G, np.asarray(iterations, dtype=float), obj.dim)
    return BoundCurve(f"bound {method.label}", np.asarray(iterations), np.atleast_1d(values))


def _fmt(v) -> str:
    return repr(float(v))


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_trial_csv(path: Path, iterations, errors, queries) -> None:
    _write_csv(path, ["iteration", "error", "queries"],
               ([int(k), _fmt(e), int(q)] for k, e, q in zip(iterations, errors, queries)))


def write_aggregate_csv(path: Path, curve: AggregateCurve) -> None:
    _write_csv(path, ["iteration", "mean", "ci_low", "ci_high"],
               ([int(k), _fmt(m), _fmt(lo), _fmt(hi)]
                for k, m, lo, hi in zip(curve.iterations, curve.mean, curve.ci_low, curve.ci_high)))


def write_bound_csv(path: Path, bound: BoundCurve) -> None:
    _write_csv(path, ["iteration", "bound"],
               ([int(k), _fmt(v)] for k, v in zip(bound.iterations, bound.values)))


def _read_columns(path) -> dict[str, np.ndarray]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    header, body = rows[0], rows[1:]
    cols = list(zip(*body)) if body else [()] * len(header)
    return {name: np.array([float(v) for v in col]) for name, col in zip(header, cols)}


def read_trial_csv(path) -> dict[str, np.ndarray]:
    return _read_columns(path)


def read_bound_csv(path, label: str | None = None) -> BoundCurve:
    cols = _read_columns(path)
    return BoundCurve(label or Path(path).stem, cols["iteration"].astype(np.int64), cols["bound"])


def read_aggregate_csv(path, label: str | None = None) -> AggregateCurve:
    """Load an aggregate file; the label comes from a sibling summary.json when present."""
    path = Path(path)
    cols = _read_columns(path)
    trials, complete = 0, True
    summary = path.parent / "summary.json"
    if summary.exists():
        info = json.loads(summary.read_text(encoding="utf-8"))
        for m in info.get("methods", []):
            if m.get("aggregate") == path.name:
                label = label or m["label"]
                trials = m["trials_completed"]
                complete = m["status"] == "complete"
    mean = cols["mean"]
    return AggregateCurve(
        label=label or path.stem,
        iterations=cols["iteration"].astype(np.int64),
        mean=mean,
        half_width=cols["ci_high"] - mean,
        trials=trials,
        complete=complete,
    )


def resolve_out_dir(cfg: ExperimentConfig, out: str | os.PathLike | None) -> Path:
    if out is not None:
        return Path(out)
    if os.environ.get(OUT_ENV):
        return Path(os.environ[OUT_ENV]) / cfg.name
    if cfg.out_dir:
        return Path(cfg.out_dir)
    return Path("results") / cfg.name


def run_experiment(cfg: ExperimentConfig, out_dir=None, *, workers: int = 1, seed: int | None = None,
                   backend: str | None = None, plot: bool = True) -> ExperimentResult:
    """Run every method x trial, write the CSV files and return the aggregates.

    ``seed`` overrides the master seed of the config.  Trials run in a process
    pool of ``workers``; all files are written by this process afterwards.
    """
    master = cfg.seed if seed is None else int(seed)
    out = resolve_out_dir(cfg, out_dir)
    out.mkdir(parents=True, exist_ok=True)

    jobs = [(cfg, i, t, master, backend) for i in range(len(cfg.methods)) for t in range(cfg.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_trial, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_run_trial(j) for j in jobs]

    curves: list[AggregateCurve] = []
    bounds: list[BoundCurve] = []
    aborted: dict[str, list[dict]] = {}
    methods_info = []
    for i, method in enumerate(cfg.methods):
        s = slug(i, method)
        tdir = out / "trials" / s
        tdir.mkdir(parents=True, exist_ok=True)
        rows = []
        iterations = None
        for idx, trial, data, err in results:
            if idx != i:
                continue
            if data is None:
                aborted.setdefault(s, []).append({"trial": trial, "error": err})
                continue
            iterations, errors, queries = data
            write_trial_csv(tdir / f"trial_{trial:04d}.csv", iterations, errors, queries)
            rows.append(errors)
        complete = s not in aborted
        agg_name = f"aggregate_{s}.csv"
        if rows:
            mean, hw = aggregate(np.vstack(rows))
            curve = AggregateCurve(method.label, iterations, mean, hw, len(rows), complete)
            write_aggregate_csv(out / agg_name, curve)
            curves.append(curve)
            bound = method_bound(cfg, method, iterations)
            if bound is not None:
                write_bound_csv(out / f"bound_{s}.csv", bound)
                bounds.append(bound)
        methods_info.append({
            "slug": s,
            "label": method.label,
            "beta": method.beta,
            "baseline": method.baseline,
            "status": "complete" if complete else "incomplete",
            "trials_requested": cfg.trials,
            "trials_completed": len(rows),
            "aborted": aborted.get(s, []),
            "aggregate": agg_name if rows else None,
        })

    summary = {
        "name": cfg.name,
        "master_seed": master,
        "trials": cfg.trials,
        "iterations": cfg.N,
        "stride": cfg.stride,
        "x0": cfg.x0.tolist(),
        "noise": cfg.noise_spec,
        "problem": cfg.problem,
        "methods": methods_info,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                                      encoding="utf-8")
    if plot and curves:
        from .plotting import emit_plot

        noise = ", ".join(f"{k}={v}" for k, v in cfg.noise_spec.items())
        emit_plot(curves, out / "figure.svg", bounds=bounds,
                  title=f"{cfg.name}: {cfg.trials} trials, noise {noise}")
    return ExperimentResult(out, curves, bounds, aborted)
