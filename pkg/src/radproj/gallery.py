"""Bundled example measures.

Grid densities (gaussian mixtures, a ramped annulus, uniform squares),
point-cloud samplers (segments, squares, disks, mixtures), deterministic
atom clusters, and iterated-function-system presets.  The named pairs from
:func:`measure_pair` put a smooth planar measure well away from a small
atomic companion, with the atomic support separated from the convex hull
of the smooth support so the projection identity applies.
"""
from __future__ import annotations

import numpy as np

from .measures import AffineMap, DiscreteMeasure, GridDensity, GridSpec, from_points, ifs_sample
from .seeding import derive_rng

__all__ = [
    "gaussian_mixture_grid",
    "gaussian_mixture_samples",
    "annulus_grid",
    "uniform_segment",
    "uniform_square_samples",
    "uniform_square_grid",
    "uniform_disk_samples",
    "ring_atoms",
    "ifs_preset",
    "measure_pair",
    "PAIR_NAMES",
    "IFS_PRESETS",
]


def _mixture_box(centers: np.ndarray, sigmas: np.ndarray, pad_sigmas: float):
    lo = np.min(centers - pad_sigmas * sigmas[:, None], axis=0)
    hi = np.max(centers + pad_sigmas * sigmas[:, None], axis=0)
    return lo, hi


def gaussian_mixture_grid(centers, sigmas, weights, resolution: int = 512,
                          pad_sigmas: float = 4.0) -> GridDensity:
    """Isotropic gaussian mixture sampled on a covering grid.

    The grid box extends ``pad_sigmas`` standard deviations beyond each
    component centre; the tiny tail mass outside is discarded by the grid
    normalisation.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    sigmas = np.asarray(sigmas, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if centers.shape[0] != sigmas.shape[0] or centers.shape[0] != weights.shape[0]:
        raise ValueError("centers, sigmas and weights must have equal lengths")
    if np.any(sigmas <= 0) or np.any(weights <= 0):
        raise ValueError("sigmas and weights must be positive")
    weights = weights / weights.sum()
    dim = centers.shape[1]
    lo, hi = _mixture_box(centers, sigmas, pad_sigmas)

    def density(pts: np.ndarray) -> np.ndarray:
        out = np.zeros(pts.shape[0])
        for c, sg, w in zip(centers, sigmas, weights):
            q = np.sum((pts - c) ** 2, axis=1) / (2.0 * sg * sg)
            out += w * np.exp(-q) / ((2.0 * np.pi) ** (dim / 2) * sg**dim)
        return out

    return GridDensity.from_function(density, GridSpec.cover(lo, hi, resolution))


def gaussian_mixture_samples(n: int, seed: int, centers, sigmas, weights,
                             pad_sigmas: float = 4.0) -> DiscreteMeasure:
    """Equal-weight samples of a gaussian mixture, conditioned to the same
    box the gridded mixture lives on (tail draws are redrawn)."""
    centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    sigmas = np.asarray(sigmas, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    weights = weights / weights.sum()
    lo, hi = _mixture_box(centers, sigmas, pad_sigmas)
    rng = derive_rng(seed, centers, sigmas)
    comp = rng.choice(centers.shape[0], size=n, p=weights)
    pts = centers[comp] + rng.normal(size=(n, centers.shape[1])) * sigmas[comp, None]
    bad = np.any((pts < lo) | (pts > hi), axis=1)
    while np.any(bad):
        k = int(np.count_nonzero(bad))
        comp2 = rng.choice(centers.shape[0], size=k, p=weights)
        pts[bad] = centers[comp2] + rng.normal(size=(k, centers.shape[1])) * sigmas[comp2, None]
        bad = np.any((pts < lo) | (pts > hi), axis=1)
    return from_points(pts)


def annulus_grid(center=(0.0, 0.0), r_inner: float = 0.75, r_outer: float = 1.5,
                 ramp: float = 0.12, resolution: int = 512) -> GridDensity:
    """Planar annulus with cosine-ramped edges of width ``ramp``."""
    center = np.asarray(center, dtype=np.float64)
    if not 0 < r_inner < r_outer:
        raise ValueError("need 0 < r_inner < r_outer")
    if not 0 < ramp <= 0.5 * (r_outer - r_inner):
        raise ValueError("ramp must be positive and fit inside the annulus")

    def density(pts: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(pts - center, axis=1)
        out = np.zeros_like(r)
        rise = (r >= r_inner) & (r < r_inner + ramp)
        out[rise] = 0.5 * (1.0 - np.cos(np.pi * (r[rise] - r_inner) / ramp))
        flat = (r >= r_inner + ramp) & (r <= r_outer - ramp)
        out[flat] = 1.0
        fall = (r > r_outer - ramp) & (r <= r_outer)
        out[fall] = 0.5 * (1.0 - np.cos(np.pi * (r_outer - r[fall]) / ramp))
        return out

    lo = center - r_outer
    hi = center + r_outer
    return GridDensity.from_function(density, GridSpec.cover(lo, hi, resolution))


def uniform_segment(n: int, seed: int, a=(0.0, 0.0), b=(1.0, 0.0)) -> DiscreteMeasure:
    """Equal-weight uniform samples on the segment from a to b."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    rng = derive_rng(seed, a, b)
    u = rng.uniform(size=n)
    return from_points(a + u[:, None] * (b - a))


def uniform_square_samples(n: int, seed: int, lo=(0.0, 0.0), hi=(1.0, 1.0)) -> DiscreteMeasure:
    """Equal-weight uniform samples in an axis box (any dim)."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    rng = derive_rng(seed, lo, hi)
    u = rng.uniform(size=(n, lo.shape[0]))
    return from_points(lo + u * (hi - lo))


def uniform_square_grid(lo=(0.0, 0.0), hi=(1.0, 1.0), resolution: int = 256) -> GridDensity:
    """Uniform density on an axis box, grid-aligned so the box boundary
    falls on cell boundaries and the indicator is represented exactly."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)

    def density(pts: np.ndarray) -> np.ndarray:
        inside = np.all((pts > lo) & (pts < hi), axis=1)
        return inside.astype(np.float64)

    return GridDensity.from_function(density, GridSpec.cover(lo, hi, resolution))


def uniform_disk_samples(n: int, seed: int, center=(0.0, 0.0),
                         radius: float = 1.0) -> DiscreteMeasure:
    """Equal-weight uniform samples in a planar disk."""
    center = np.asarray(center, dtype=np.float64)
    rng = derive_rng(seed, center, radius)
    r = radius * np.sqrt(rng.uniform(size=n))
    th = rng.uniform(0.0, 2.0 * np.pi, size=n)
    pts = center + np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
    return from_points(pts)


def ring_atoms(center, radius: float, count: int, weights=None) -> DiscreteMeasure:
    """Deterministic cluster of atoms on a circle (a compact companion
    measure for the identity comparisons)."""
    center = np.asarray(center, dtype=np.float64)
    if center.shape != (2,):
        raise ValueError("ring_atoms builds planar clusters")
    th = 2.0 * np.pi * (np.arange(count) + 0.5) / count
    pts = center + radius * np.stack([np.cos(th), np.sin(th)], axis=1)
    return from_points(pts, weights)


IFS_PRESETS = {
    # attractor: Sierpinski triangle, dimension log 3 / log 2
    "sierpinski": lambda: [
        AffineMap.toward([0.0, 0.0], 0.5),
        AffineMap.toward([1.0, 0.0], 0.5),
        AffineMap.toward([0.5, np.sqrt(3.0) / 2.0], 0.5),
    ],
    # attractor: Cantor middle-thirds set on the unit segment, dim log 2 / log 3
    "cantor-line": lambda: [
        AffineMap.toward([0.0, 0.0], 1.0 / 3.0),
        AffineMap.toward([1.0, 0.0], 1.0 / 3.0),
    ],
    # attractor: the full unit segment, dimension 1
    "segment": lambda: [
        AffineMap.toward([0.0, 0.0], 0.5),
        AffineMap.toward([1.0, 0.0], 0.5),
    ],
    # attractor: the full unit square, dimension 2
    "square4": lambda: [
        AffineMap.toward([0.0, 0.0], 0.5),
        AffineMap.toward([1.0, 0.0], 0.5),
        AffineMap.toward([0.0, 1.0], 0.5),
        AffineMap.toward([1.0, 1.0], 0.5),
    ],
}


def ifs_preset(name: str, n: int, seed: int) -> DiscreteMeasure:
    """Chaos-game samples of a named attractor."""
    if name not in IFS_PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(IFS_PRESETS)}")
    return ifs_sample(IFS_PRESETS[name](), n, seed)


PAIR_NAMES = ("gaussians", "annulus-bump", "three-bumps")


def measure_pair(name: str, resolution: int = 512, seed: int = 11):
    """Named (mu, nu) pairs for the projection identity: a smooth planar
    grid density and a small atomic measure separated from the convex hull
    of its support by at least 1."""
    if name == "gaussians":
        mu = gaussian_mixture_grid(
            centers=[[-1.1, 0.55], [-0.4, -0.5]],
            sigmas=[0.32, 0.38],
            weights=[0.6, 0.4],
            resolution=resolution,
        )
        rng = derive_rng(seed, 1.0)
        th = rng.uniform(0.0, 2.0 * np.pi, size=8)
        rad = 0.4 * np.sqrt(rng.uniform(size=8))
        pts = np.stack([2.6 + rad * np.cos(th), 0.1 + rad * np.sin(th)], axis=1)
        nu = from_points(pts, rng.uniform(0.5, 1.5, size=8))
    elif name == "annulus-bump":
        mu = annulus_grid(resolution=resolution)
        nu = ring_atoms([3.2, 0.0], 0.35, 12)
    elif name == "three-bumps":
        mu = gaussian_mixture_grid(
            centers=[[-0.9, 0.75], [-1.35, -0.55], [-0.2, -0.1]],
            sigmas=[0.26, 0.30, 0.22],
            weights=[0.4, 0.35, 0.25],
            resolution=resolution,
        )
        nu = from_points([[2.1, 0.4], [2.45, -0.35]], [0.55, 0.45])
    else:
        raise ValueError(f"unknown pair {name!r}; choose from {PAIR_NAMES}")
    return mu, nu
