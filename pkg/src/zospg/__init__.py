"""Kernel-smoothed zeroth-order stochastic projected gradient."""

from ._backend import DEFAULT as BACKEND
from ._backend import available as available_backends
from .geometry import Ball, Box, project, sample_direction, sample_scalar
from .kernel import KernelSpec, build_kernel, eval_kernel, kernel_constants, kernel_moment
from .oracle import (
    AlternatingBias,
    ConstantBias,
    FunctionObjective,
    GaussianNoise,
    NoNoise,
    PolynomialObjective,
    QueryLedger,
    UniformNoise,
    make_test_suite,
    noisy_pair,
)
from .optimizer import (
    ConfigError,
    RunAborted,
    RunConfig,
    Trace,
    alpha_schedule,
    gradient_estimate,
    n_epsilon,
    run_regularized,
    run_zospg,
    tau_schedule,
    theoretical_bound,
)

__version__ = "0.1.0"
