"""Log-log SVG figures of aggregate error curves."""

from __future__ import annotations

import math
import warnings
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.ticker import LogLocator  # noqa: E402

__all__ = ["PlotWarning", "emit_plot"]

_RC = {
    "svg.fonttype": "none",
    "svg.hashsalt": "zospg",
    "path.simplify": False,
}


class PlotWarning(UserWarning):
    pass


def _floor(curves, bounds) -> float:
    pos = [v[v > 0] for c in curves for v in (np.asarray(c.mean), np.asarray(c.ci_low))]
    pos += [np.asarray(b.values)[np.asarray(b.values) > 0] for b in bounds]
    pos = [p for p in pos if p.size]
    if not pos:
        return 1e-16
    lo = min(float(p.min()) for p in pos)
    return 10.0 ** math.floor(math.log10(lo) - 1)


def _clip(values, floor: float, what: str) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    bad = ~(v > 0) & ~np.isnan(v)
    if bad.any():
        warnings.warn(f"{what}: {int(bad.sum())} non-positive value(s) clipped to {floor:g}",
                      PlotWarning, stacklevel=3)
        v = np.where(bad, floor, v)
    return v


def emit_plot(curves: Sequence, path, *, bounds: Sequence = (), title: str | None = None) -> list[str]:
    """Write a standalone SVG and return the legend labels in order.

    Each curve gets its mean as a line and the CI as a shaded band; each
    bound is drawn dashed.  Non-positive values cannot sit on a log axis and
    are clipped to one decade below the smallest positive value.
    """
    curves = list(curves)
    bounds = list(bounds)
    if not curves:
        raise ValueError("emit_plot needs at least one curve")
    floor = _floor(curves, bounds)
    labels = []
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(7.0, 4.8))
        for c in curves:
            it = np.asarray(c.iterations, dtype=float)
            mean = _clip(c.mean, floor, c.label)
            (line,) = ax.plot(it, mean, lw=1.4, label=c.label)
            lo, hi = np.asarray(c.ci_low, dtype=float), np.asarray(c.ci_high, dtype=float)
            if np.isfinite(lo).any():
                ax.fill_between(it, np.maximum(lo, floor), np.maximum(hi, floor),
                                color=line.get_color(), alpha=0.2, lw=0)
            labels.append(c.label)
        for b in bounds:
            ax.plot(np.asarray(b.iterations, dtype=float), _clip(b.values, floor, b.label),
                    ls="--", lw=1.0, label=b.label)
            labels.append(b.label)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.yaxis.set_major_locator(LogLocator(base=10.0, numticks=30))
        ax.xaxis.set_major_locator(LogLocator(base=10.0, numticks=30))
        ax.set_xlabel("iteration N")
        ax.set_ylabel("f(x̄_N) − f*")
        if title:
            ax.set_title(title, fontsize=9)
        ax.grid(True, which="major", alpha=0.3)
        ax.legend(fontsize=8)
        fig.tight_layout()
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return labels
