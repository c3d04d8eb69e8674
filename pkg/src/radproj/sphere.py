"""Equal-area partitions of the unit circle and unit sphere.

The circle is split into uniform arcs.  The 2-sphere uses zonal rings of
near-square cells: ring boundaries are placed so every cell has area
exactly ``4*pi/resolution``, and each ring is split uniformly in longitude.
Densities on these partitions support L^p norms, weighted p-power
integrals and spherical-cap sums.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "SphereGrid",
    "SphereDensity",
    "make_sphere_grid",
    "lp_norm_sphere",
    "lp_norm_weighted",
    "cap_sums",
]


@dataclass(frozen=True)
class SphereGrid:
    """Equal-area partition of S^{dim-1} into ``resolution`` bins.

    ``centers`` holds one unit vector per bin and ``areas`` the surface
    measure of each bin.  For dim=3 the zonal ring structure (z boundaries,
    per-ring bin counts) is kept for lookups and refinement.
    """

    dim: int
    centers: np.ndarray
    areas: np.ndarray
    ring_bounds: np.ndarray | None = None  # dim=3: decreasing z boundaries, R+1
    ring_counts: np.ndarray | None = None  # dim=3: bins per ring, sums to resolution

    @property
    def resolution(self) -> int:
        return self.centers.shape[0]

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())

    @cached_property
    def ring_start(self) -> np.ndarray | None:
        if self.ring_counts is None:
            return None
        return np.concatenate([[0], np.cumsum(self.ring_counts)[:-1]])

    @cached_property
    def bin_ring(self) -> np.ndarray | None:
        if self.ring_counts is None:
            return None
        return np.repeat(np.arange(len(self.ring_counts)), self.ring_counts)

    def bin_index(self, directions) -> np.ndarray:
        """Bin index for each direction (rows need not be normalised)."""
        d = np.atleast_2d(np.asarray(directions, dtype=np.float64))
        if d.shape[1] != self.dim:
            raise ValueError(f"directions must have {self.dim} components")
        norms = np.linalg.norm(d, axis=1)
        if np.any(norms == 0):
            raise ValueError("zero vector has no direction")
        n = self.resolution
        if self.dim == 2:
            theta = np.mod(np.arctan2(d[:, 1], d[:, 0]), 2.0 * np.pi)
            width = 2.0 * np.pi / n
            return np.minimum((theta / width).astype(np.int64), n - 1)
        z = d[:, 2] / norms
        inner = -self.ring_bounds[1:-1]  # increasing
        ring = np.searchsorted(inner, -z, side="left")
        counts = self.ring_counts[ring]
        phi = np.mod(np.arctan2(d[:, 1], d[:, 0]), 2.0 * np.pi)
        j = np.minimum((phi * counts / (2.0 * np.pi)).astype(np.int64), counts - 1)
        return self.ring_start[ring] + j

    def bins_signature(self) -> tuple:
        return (self.dim, self.resolution)


def _ring_layout(resolution: int) -> np.ndarray:
    """Bins per zonal ring for the dim=3 partition, summing to resolution."""
    area = 4.0 * np.pi / resolution
    n_rings = max(2, int(round(np.pi / np.sqrt(area))))
    theta = np.linspace(0.0, np.pi, n_rings + 1)
    band = 2.0 * np.pi * (np.cos(theta[:-1]) - np.cos(theta[1:]))
    quota = band / area
    counts = np.maximum(1, np.rint(quota).astype(np.int64))
    # adjust to the exact total, moving single bins at the largest deficit
    while counts.sum() != resolution:
        deficit = quota - counts
        if counts.sum() < resolution:
            counts[np.argmax(deficit)] += 1
        else:
            eligible = np.where(counts > 1, deficit, np.inf)
            counts[np.argmin(eligible)] -= 1
    return counts


def make_sphere_grid(dim: int, resolution: int) -> SphereGrid:
    """Equal-area partition of S^{dim-1} with ``resolution`` bins.

    dim=2: uniform arcs starting at angle 0.  dim=3: zonal equal-area rings.
    """
    if dim == 2:
        if resolution < 4:
            raise ValueError("need at least 4 arcs on the circle")
        width = 2.0 * np.pi / resolution
        theta = (np.arange(resolution) + 0.5) * width
        centers = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        areas = np.full(resolution, width)
        return SphereGrid(2, centers, areas)
    if dim == 3:
        if resolution < 8:
            raise ValueError("need at least 8 bins on the sphere")
        counts = _ring_layout(resolution)
        # ring boundaries in z chosen so each bin has area exactly 4*pi/N
        cum = np.cumsum(counts)
        bounds = np.concatenate([[1.0], 1.0 - 2.0 * cum / resolution])
        bounds[-1] = -1.0
        centers = np.empty((resolution, 3))
        pos = 0
        for l, m in enumerate(counts):
            zc = 0.5 * (bounds[l] + bounds[l + 1])
            rho = np.sqrt(max(0.0, 1.0 - zc * zc))
            phi = (np.arange(m) + 0.5) * (2.0 * np.pi / m)
            centers[pos : pos + m, 0] = rho * np.cos(phi)
            centers[pos : pos + m, 1] = rho * np.sin(phi)
            centers[pos : pos + m, 2] = zc
            pos += m
        areas = np.full(resolution, 4.0 * np.pi / resolution)
        return SphereGrid(3, centers, areas, ring_bounds=bounds, ring_counts=counts)
    raise ValueError(f"dim must be 2 or 3, got {dim}")


@dataclass(frozen=True)
class SphereDensity:
    """Density with respect to surface measure on a :class:`SphereGrid`."""

    grid: SphereGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (self.grid.resolution,):
            raise ValueError("values must have one entry per bin")
        object.__setattr__(self, "values", vals)

    @property
    def mass(self) -> float:
        return float(np.sum(self.values * self.grid.areas))

    @property
    def bin_masses(self) -> np.ndarray:
        return self.values * self.grid.areas

    def bins_signature(self) -> tuple:
        return self.grid.bins_signature()


def lp_norm_sphere(f: SphereDensity, p: float) -> float:
    """L^p norm of a sphere density: (sum value^p * area)^(1/p).

    ``p=numpy.inf`` returns the largest bin value.
    """
    if p == np.inf:
        return float(np.max(np.abs(f.values)))
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return float(np.sum(f.values**p * f.grid.areas) ** (1.0 / p))


def lp_norm_weighted(f, p, w) -> float | np.ndarray:
    """p-th power integral of a density against a companion measure.

    Computes ``sum_bins f(bin)^p * w_mass(bin)`` where both densities live
    on identical bins.  Note this is the p-th power of the weighted L^p
    norm, the form the projection identity integrates over directions.
    ``p`` may be a scalar or a 1d array of exponents (one value returned
    per exponent).
    """
    if f.bins_signature() != w.bins_signature():
        raise ValueError("densities live on different bins")
    p_arr = np.asarray(p, dtype=np.float64)
    if np.any(p_arr < 1):
        raise ValueError(f"p must be >= 1, got {p}")
    fv = np.asarray(f.values, dtype=np.float64).ravel()
    wm = np.asarray(w.bin_masses, dtype=np.float64).ravel()
    if p_arr.ndim == 0:
        return float(np.sum(fv**p_arr * wm))
    out = np.array([np.sum(fv**pk * wm) for pk in p_arr])
    return out


def cap_sums(grid: SphereGrid, weights: np.ndarray, radius: float) -> np.ndarray:
    """For every bin centre c, the sum of ``weights`` over bins whose centre
    lies within angular distance ``radius`` of c.

    ``weights`` may be (n,) or (k, n) for a batch; the result matches.  On
    the circle contiguous-arc windows are accumulated with a cumulative
    sum; on the sphere a dot-product mask is used.
    """
    w = np.atleast_2d(np.asarray(weights, dtype=np.float64))
    n = grid.resolution
    if w.shape[-1] != n:
        raise ValueError("weights must have one entry per bin")
    if radius >= np.pi:
        out = np.repeat(w.sum(axis=1)[:, None], n, axis=1)
        return out if np.asarray(weights).ndim > 1 else out[0]
    if grid.dim == 2:
        width = 2.0 * np.pi / n
        m = int(np.floor(radius / width + 1e-12))
        if 2 * m + 1 >= n:
            out = np.repeat(w.sum(axis=1)[:, None], n, axis=1)
        else:
            tiled = np.concatenate([w, w, w], axis=1)
            csum = np.concatenate(
                [np.zeros((w.shape[0], 1)), np.cumsum(tiled, axis=1)], axis=1
            )
            k = np.arange(n)
            out = csum[:, n + k + m + 1] - csum[:, n + k - m]
    else:
        cos_r = np.cos(radius)
        mask = (grid.centers @ grid.centers.T) >= cos_r - 1e-15
        out = w @ mask.T
    return out if np.asarray(weights).ndim > 1 else out[0]
