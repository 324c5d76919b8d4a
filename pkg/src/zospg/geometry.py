"""Feasible sets with exact Euclidean projection, and the random draws of
the zeroth-order method (unit-sphere directions, uniform radii)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Ball",
    "Box",
    "FeasibleSet",
    "make_rng",
    "project",
    "sample_direction",
    "sample_directions",
    "sample_scalar",
    "sample_scalars",
    "split_streams",
]


def _vec(x) -> np.ndarray:
    arr = np.array(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Ball:
    """Closed Euclidean ball ``{x : ||x - center|| <= radius}``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        if not self.radius > 0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def project(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d = x - self.center
        nrm = np.sqrt(np.sum(d * d, axis=-1, keepdims=True))
        outside = nrm > self.radius
        # interior points are returned untouched, not re-assembled from center + d
        scaled = self.center + d * (self.radius / np.where(outside, nrm, 1.0))
        return np.where(outside, scaled, x)

    def contains(self, x, atol: float = 1e-12) -> bool:
        return bool(np.linalg.norm(np.asarray(x) - self.center) <= self.radius + atol)

    def bounding_radius(self) -> float:
        """Radius of the smallest origin-centred ball containing the set."""
        return float(np.linalg.norm(self.center)) + self.radius

    def __repr__(self):
        return f"Ball(center={self.center.tolist()}, radius={self.radius})"


@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned box ``{x : lower <= x <= upper}``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo, hi = _vec(self.lower), _vec(self.upper)
        if lo.shape != hi.shape:
            raise ValueError("box bounds must have equal length")
        if np.any(lo > hi):
            raise ValueError("box lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def project(self, x: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=float), self.lower, self.upper)

    def contains(self, x, atol: float = 0.0) -> bool:
        x = np.asarray(x)
        return bool(np.all(x >= self.lower - atol) and np.all(x <= self.upper + atol))

    def bounding_radius(self) -> float:
        corner = np.maximum(np.abs(self.lower), np.abs(self.upper))
        return float(np.linalg.norm(corner))

    def __repr__(self):
        return f"Box(lower={self.lower.tolist()}, upper={self.upper.tolist()})"


FeasibleSet = Ball | Box


def project(fset: FeasibleSet, x) -> np.ndarray:
    """Euclidean projection of ``x`` onto ``fset``."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != fset.dim:
        raise ValueError(f"point has dimension {x.shape[-1]}, set has {fset.dim}")
    return fset.project(x)


def distance(fset: FeasibleSet, x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(x - project(fset, x)))


# -- randomness -------------------------------------------------------------


def make_rng(seed) -> np.random.Generator:
    """Generator seeded from an int or a tuple of ints (e.g. ``(master, method, trial)``)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(np.random.SeedSequence(seed))


def split_streams(seed) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (algorithm, noise) generators derived from one seed.

    The algorithm stream feeds the radii and directions; the noise stream is
    only ever handed to the noise model.
    """
    entropy = seed if isinstance(seed, int) else tuple(int(s) for s in seed)
    alg, noise = np.random.SeedSequence(entropy).spawn(2)
    return np.random.default_rng(alg), np.random.default_rng(noise)


def sample_directions(count: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` independent unit vectors, uniform on the sphere in R^n."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    e = rng.standard_normal((count, n))
    nrm = np.linalg.norm(e, axis=1)
    bad = nrm == 0.0
    while np.any(bad):
        e[bad] = rng.standard_normal((int(bad.sum()), n))
        nrm[bad] = np.linalg.norm(e[bad], axis=1)
        bad = nrm == 0.0
    return e / nrm[:, None]


def sample_direction(n: int, rng: np.random.Generator) -> np.ndarray:
    return sample_directions(1, n, rng)[0]


def sample_scalars(count: int, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, count)


def sample_scalar(rng: np.random.Generator) -> float:
    return float(rng.uniform(-1.0, 1.0))
