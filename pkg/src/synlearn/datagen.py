"""Synthetic benchmark data: isotropic Gaussian blobs with guaranteed center
separation, and noisy 1-D regression targets z = fn(x) + Gaussian error."""

import math
from dataclasses import dataclass

import numpy as np

from .fnn import SupervisedSet
from .mixture import Dataset
from .seeding import derive_rng

_REGRESSION_FNS = ("sinc", "linear", "sine")


@dataclass(frozen=True)
class BlobSpec:
    """k isotropic Gaussian clusters in dim dimensions.

    ``separation`` is the minimum inter-center distance in units of sigma;
    centers sit on a scaled integer lattice (shuffled by seed), which makes
    the separation guarantee deterministic rather than rejection-sampled.
    """

    k: int
    per_cluster_n: int
    dim: int
    separation: float
    sigma: float
    seed: int = 0

    def __post_init__(self):
        if self.k < 1 or self.per_cluster_n < 1 or self.dim < 1:
            raise ValueError("k, per_cluster_n and dim must all be >= 1")
        if not (self.separation > 0 and self.sigma > 0):
            raise ValueError("separation and sigma must be > 0")


@dataclass(frozen=True)
class RegressionSpec:
    """n noisy samples of a named scalar function on [lo, hi]."""

    fn: str
    n: int
    domain: tuple = (-1.0, 1.0)
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.fn not in _REGRESSION_FNS:
            raise ValueError(f"unknown fn {self.fn!r}, choose from {_REGRESSION_FNS}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        lo, hi = self.domain
        if not lo < hi:
            raise ValueError(f"domain must satisfy lo < hi, got [{lo}, {hi}]")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")


def _lattice_centers(spec: BlobSpec, rng: np.random.Generator) -> np.ndarray:
    """k distinct points of (separation * sigma) * Z^dim, shuffled by seed.

    Distinct lattice points differ by at least one unit step, so every pair
    is at least separation * sigma apart.
    """
    side = max(1, math.ceil(spec.k ** (1.0 / spec.dim)))
    while side**spec.dim < spec.k:
        side += 1
    grids = np.meshgrid(*([np.arange(side)] * spec.dim), indexing="ij")
    lattice = np.stack([g.ravel() for g in grids], axis=1).astype(float)
    order = rng.permutation(lattice.shape[0])[: spec.k]
    return lattice[order] * (spec.separation * spec.sigma)


def gen_blobs(spec: BlobSpec) -> Dataset:
    """Draw per_cluster_n isotropic Gaussian points around each center.

    Labels give the component index of every point.
    """
    rng = derive_rng(spec.seed, "blobs")
    centers = _lattice_centers(spec, rng)
    chunks = [
        center + spec.sigma * rng.standard_normal((spec.per_cluster_n, spec.dim))
        for center in centers
    ]
    labels = np.repeat(np.arange(spec.k), spec.per_cluster_n)
    return Dataset(np.vstack(chunks), labels)


def gen_regression(spec: RegressionSpec) -> SupervisedSet:
    """x uniform on the domain, z = fn(x) plus Gaussian noise, both (n, 1)."""
    rng = derive_rng(spec.seed, "regression")
    lo, hi = spec.domain
    x = rng.uniform(lo, hi, (spec.n, 1))
    if spec.fn == "sinc":
        clean = np.sinc(x)
    elif spec.fn == "linear":
        clean = x.copy()
    else:
        clean = np.sin(x)
    z = clean + spec.noise_sigma * rng.standard_normal(x.shape)
    return SupervisedSet(x, z)
