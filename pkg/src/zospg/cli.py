"""Command line entry point: ``zospg run|plot|verify|bound``."""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from .optimizer import (
    ConfigError,
    RunAborted,
    bound_constants,
    c_prime,
    kernel_for,
    lipschitz_on,
    n_epsilon,
    tau_coefficient,
    theoretical_bound,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ABORT = 3
EXIT_VERIFY = 4


def _cmd_run(args) -> int:
    from .harness.config import load_config
    from .harness.experiment import run_experiment

    cfg = load_config(args.config)
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    res = run_experiment(cfg, args.out, workers=args.workers, seed=args.seed, backend=args.backend)
    for c in res.curves:
        flag = "" if c.complete else "  [incomplete]"
        print(f"{c.label}: mean error at N={int(c.iterations[-1])} = {c.mean[-1]:.4e}{flag}")
    print(f"wrote {res.out_dir}")
    if not res.complete:
        for s, items in res.aborted.items():
            print(f"{s}: {len(items)} trial(s) aborted; first: {items[0]['error']}", file=sys.stderr)
        return EXIT_ABORT
    return EXIT_OK


def _cmd_plot(args) -> int:
    from .harness.experiment import read_aggregate_csv, read_bound_csv
    from .harness.plotting import emit_plot

    curves, bounds = [], []
    for p in args.aggregates:
        p = Path(p)
        if not p.exists():
            raise ConfigError(f"{p}: no such file")
        curves.append(read_aggregate_csv(p))
        if args.bounds:
            b = p.with_name(p.name.replace("aggregate_", "bound_", 1))
            if b.exists() and b != p:
                bounds.append(read_bound_csv(b, f"bound {curves[-1].label}"))
            else:
                print(f"no bound file next to {p}", file=sys.stderr)
    out = Path(args.output) if args.output else Path(args.aggregates[0]).with_name("plot.svg")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        emit_plot(curves, out, bounds=bounds)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    print(f"wrote {out}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .harness.verify import verify_suite

    report = verify_suite(quick=args.quick)
    print(report.format())
    return EXIT_OK if report.ok else EXIT_VERIFY


def _cmd_bound(args) -> int:
    from .harness.config import load_config
    from .harness.experiment import method_run_config

    cfg = load_config(args.config)
    obj = cfg.objective()
    n = obj.dim
    out = []
    for m in cfg.methods:
        kernel = kernel_for(m.beta)
        rc = method_run_config(cfg, m, 0)
        row = {"label": m.label, "beta": m.beta, "kappa": kernel.kappa, "kappa_beta": kernel.kappa_beta}
        target = obj
        eps = m.eps if m.regularized else cfg.bound.get("eps")
        R = m.R if m.regularized else cfg.bound.get("R")
        rho = m.rho if m.regularized else float(cfg.bound.get("rho", 0.1))
        if m.regularized:
            target = obj.regularized(m.eps / m.R**2, cfg.x0)
        tau1 = tau_coefficient(rc, kernel, n)
        G = lipschitz_on(target, cfg.fset, tau1)
        a1, a2 = bound_constants(rc, kernel, G)
        row.update(tau1=tau1, G=G, A1=a1, A2=a2)
        if not m.regularized and obj.gamma > 0:
            row["strongly_convex_bound_at_N"] = theoretical_bound(rc, kernel, G, cfg.N, n)
        if eps is not None and R is not None:
            row.update(eps=float(eps), R=float(R), rho=rho, c_prime=c_prime(rho),
                       N_eps=n_epsilon(rc, kernel, G, float(eps), float(R), n, rho))
        out.append(row)
    if args.json:
        print(json.dumps(out, indent=2))
    else:
        for row in out:
            print(row.pop("label"))
            for k, v in row.items():
                print(f"  {k:<28} {v:.6g}" if isinstance(v, float) else f"  {k:<28} {v}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zospg", description="Kernel-smoothed zeroth-order projected gradient")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a multi-seed experiment from a TOML config")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (default: $ZOSPG_OUT_DIR/<name>, else results/<name>)")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--seed", type=int, help="override the master seed")
    r.add_argument("--backend", choices=["auto", "cython", "python"], default=None)
    r.set_defaults(func=_cmd_run)

    pl = sub.add_parser("plot", help="plot aggregate CSV files to SVG")
    pl.add_argument("aggregates", nargs="+")
    pl.add_argument("--bounds", action="store_true", help="overlay the matching bound_*.csv files")
    pl.add_argument("-o", "--output")
    pl.set_defaults(func=_cmd_plot)

    v = sub.add_parser("verify", help="run the self-check suite")
    v.add_argument("--quick", action="store_true")
    v.set_defaults(func=_cmd_verify)

    b = sub.add_parser("bound", help="print rate constants and iteration counts for a config")
    b.add_argument("config")
    b.add_argument("--json", action="store_true")
    b.set_defaults(func=_cmd_bound)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RunAborted as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
