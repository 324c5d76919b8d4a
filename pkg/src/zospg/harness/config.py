"""Experiment configuration files.

An experiment is one TOML file::

    [experiment]
    name = "figure2"
    trials = 100          # seeds per method
    iterations = 100000   # N
    seed = 0              # master seed
    stride = 100          # iterations between recorded points
    x0 = [0.5, 0.0, 0.0]

    [problem]
    id = "anisotropic_quadratic"   # suite member, or "quadratic" with diag/matrix (+ b)
    holder_L = 0.01          # optional override of the declared constant

    [set]
    kind = "ball"            # or "box" with lower/upper
    center = [0.0, 0.0, 0.0]
    radius = 1.0

    [noise]
    kind = "gaussian"        # none | gaussian | uniform | constant_bias | alternating_bias
    sigma = 0.01

    [[methods]]
    label = "..."
    beta = 3.0
    # baseline = true        required for beta = 2
    # tau_override, alpha_override, c_star, eps/R/rho (regularized run)

    [bound]                  # optional, used by `zospg bound`
    eps = 0.1
    R = 1.0
    rho = 0.1
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from ..geometry import Ball, Box, FeasibleSet
from ..kernel import build_kernel
from ..oracle import (
    NoiseModel,
    PolynomialObjective,
    anisotropic_quadratic,
    convex_quartic,
    make_noise,
    quadratic,
    quartic,
    suite_by_name,
)
from ..optimizer import ConfigError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

__all__ = ["ExperimentConfig", "MethodSpec", "bundled_config", "load_config", "parse_config"]

SUITE_IDS = ("anisotropic_quadratic", "general_quadratic", "quartic", "convex_quartic", "quadratic")


@dataclass(frozen=True)
class MethodSpec:
    label: str
    beta: float
    baseline: bool = False
    tau_override: float | None = None
    alpha_override: float | None = None
    c_star: float = 9.0
    eps: float | None = None
    R: float | None = None
    rho: float = 0.1

    @property
    def regularized(self) -> bool:
        return self.eps is not None


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    problem: dict
    fset: FeasibleSet
    noise: NoiseModel
    noise_spec: dict
    methods: tuple[MethodSpec, ...]
    trials: int
    N: int
    seed: int
    stride: int
    x0: np.ndarray
    out_dir: str | None = None
    bound: dict = field(default_factory=dict)
    source: str | None = None

    def objective(self) -> PolynomialObjective:
        return build_problem(self.problem)

    @property
    def sigma(self) -> float:
        return self.noise.sigma_effective


def build_problem(spec: dict) -> PolynomialObjective:
    spec = dict(spec)
    pid = spec.pop("id")
    holder_L = spec.pop("holder_L", None)
    if pid == "anisotropic_quadratic":
        obj = anisotropic_quadratic()
    elif pid == "quadratic":
        if "matrix" in spec:
            A = np.asarray(spec["matrix"], dtype=float)
        elif "diag" in spec:
            A = np.diag(np.asarray(spec["diag"], dtype=float))
        else:
            raise ConfigError("problem: inline quadratic needs 'diag' or 'matrix'")
        obj = quadratic(A, spec.get("b"))
    elif pid == "quartic":
        obj = quartic(int(spec.get("dim", 3)), float(spec.get("gamma", 1.0)))
    elif pid == "convex_quartic":
        obj = convex_quartic(int(spec.get("dim", 3)))
    elif pid in SUITE_IDS:
        obj = suite_by_name(pid)
    else:
        raise ConfigError(f"problem.id: unknown problem {pid!r}; known: {', '.join(SUITE_IDS)}")
    if holder_L is not None:
        if not float(holder_L) > 0:
            raise ConfigError("problem.holder_L: must be positive")
        obj.holder_L = float(holder_L)
    return obj


def _vector(value, where: str, n: int | None = None) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a list of numbers") from None
    if arr.ndim != 1 or (n is not None and arr.shape[0] != n):
        raise ConfigError(f"{where}: expected a vector of length {n}")
    return arr


def _require(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigError(f"{where}.{key}: missing")
    return table[key]


def _build_set(spec: dict, n: int) -> FeasibleSet:
    kind = spec.get("kind", "ball")
    try:
        if kind == "ball":
            center = _vector(spec.get("center", [0.0] * n), "set.center", n)
            return Ball(center, float(spec.get("radius", 1.0)))
        if kind == "box":
            return Box(
                _vector(_require(spec, "lower", "set"), "set.lower", n),
                _vector(_require(spec, "upper", "set"), "set.upper", n),
            )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"set: {exc}") from None
    raise ConfigError(f"set.kind: unknown set kind {kind!r} (ball or box)")


def _build_method(i: int, spec: dict, sigma: float) -> MethodSpec:
    where = f"methods[{i}]"
    try:
        beta = float(_require(spec, "beta", where))
    except (TypeError, ValueError):
        raise ConfigError(f"{where}.beta: not a number") from None
    baseline = bool(spec.get("baseline", False))
    if beta < 2.0:
        raise ConfigError(f"{where}.beta: {beta} is inadmissible (need beta > 2, or 2 for the baseline)")
    if beta == 2.0 and not baseline:
        raise ConfigError(f"{where}.beta: beta = 2 is only allowed with baseline = true")
    tau_override = spec.get("tau_override")
    if sigma == 0 and tau_override is None:
        raise ConfigError(f"{where}.tau_override: required when the noise level is 0")
    eps = spec.get("eps")
    R = spec.get("R")
    if eps is not None:
        if not float(eps) > 0:
            raise ConfigError(f"{where}.eps: must be positive")
        if R is None or not float(R) > 0:
            raise ConfigError(f"{where}.R: a positive R is required with eps")
    label = spec.get("label") or f"kernel ZO-SPG beta={beta:g}"
    build_kernel(beta)
    return MethodSpec(
        label=str(label),
        beta=beta,
        baseline=baseline,
        tau_override=None if tau_override is None else float(tau_override),
        alpha_override=None if spec.get("alpha_override") is None else float(spec["alpha_override"]),
        c_star=float(spec.get("c_star", 9.0)),
        eps=None if eps is None else float(eps),
        R=None if R is None else float(R),
        rho=float(spec.get("rho", 0.1)),
    )


def parse_config(data: dict, source: str | None = None) -> ExperimentConfig:
    """Validate a parsed TOML document."""
    exp = data.get("experiment", {})
    name = str(exp.get("name", Path(source).stem if source else "experiment"))
    trials = int(exp.get("trials", 100))
    if trials < 1:
        raise ConfigError(f"experiment.trials: must be >= 1, got {trials}")
    N = int(exp.get("iterations", 100_000))
    if N < 1:
        raise ConfigError(f"experiment.iterations: must be >= 1, got {N}")
    stride = int(exp.get("stride", 100))
    if stride < 1:
        raise ConfigError(f"experiment.stride: must be >= 1, got {stride}")

    problem = dict(data.get("problem", {}))
    if "id" not in problem:
        raise ConfigError("problem.id: missing")
    obj = build_problem(problem)
    n = obj.dim
    fset = _build_set(data.get("set", {}), n)

    noise_spec = dict(data.get("noise", {"kind": "gaussian", "sigma": 0.01}))
    kind = noise_spec.pop("kind", "gaussian")
    try:
        noise = make_noise(kind, **noise_spec)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"noise: {exc}") from None
    noise_spec["kind"] = kind

    x0 = _vector(exp.get("x0", [0.5] + [0.0] * (n - 1)), "experiment.x0", n)
    if not fset.contains(x0):
        raise ConfigError("experiment.x0: starting point is outside the feasible set")

    methods = data.get("methods", [])
    if not methods:
        raise ConfigError("methods: at least one [[methods]] entry is required")
    specs = tuple(_build_method(i, m, noise.sigma_effective) for i, m in enumerate(methods))
    if obj.gamma <= 0 and any(not m.regularized for m in specs):
        raise ConfigError(f"methods: {obj.name} is not strongly convex; use eps/R (regularized runs)")

    return ExperimentConfig(
        name=name,
        problem=problem,
        fset=fset,
        noise=noise,
        noise_spec=noise_spec,
        methods=specs,
        trials=trials,
        N=N,
        seed=int(exp.get("seed", 0)),
        stride=stride,
        x0=x0,
        out_dir=exp.get("out_dir"),
        bound=dict(data.get("bound", {})),
        source=source,
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    try:
        return parse_config(data, source=str(path))
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def bundled_config(name: str = "figure2") -> Path:
    """Path of a configuration shipped with the package."""
    return Path(str(resources.files("zospg").joinpath("configs", f"{name}.toml")))
