"""Orthogonal and radial projections of measures.

Orthogonal projection maps a measure to a histogram density on the
hyperplane orthogonal to a direction (a line for planar measures, a plane
for spatial ones), using coordinates in a deterministic orthonormal frame.
Radial projection pushes a measure to the unit sphere as seen from a
vantage point.  :func:`weight_riesz` attaches the Riesz kernel
``c_d * |y - x|^(1-d)`` to a measure; the radial projection of that
weighted measure is the object whose sphere density the closed-form
counterpart :func:`density_formula_rhs` reproduces.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .measures import DiscreteMeasure, GridDensity, support_distance
from .seeding import derive_rng
from .sphere import SphereGrid, SphereDensity

__all__ = [
    "Direction",
    "HistogramSpec",
    "DirectionDensity",
    "WeightedMeasure",
    "orth_project",
    "radial_project",
    "weight_riesz",
    "density_formula_rhs",
]


@dataclass(frozen=True)
class Direction:
    """Unit vector in R^2 or R^3 with a deterministic orthonormal frame of
    its orthogonal complement."""

    vector: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=np.float64)
        if v.shape not in ((2,), (3,)):
            raise ValueError(f"direction must have 2 or 3 components, got {v.shape}")
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValueError("zero vector has no direction")
        v = v / norm
        v.flags.writeable = False
        object.__setattr__(self, "vector", v)

    @property
    def dim(self) -> int:
        return self.vector.shape[0]

    @cached_property
    def frame(self) -> np.ndarray:
        """(dim-1, dim) orthonormal rows spanning the orthogonal complement.

        In the plane the single row is the +90 degree rotation of the
        direction, so frames vary continuously with the direction.
        """
        e = self.vector
        if self.dim == 2:
            u = np.array([-e[1], e[0]])
            u.flags.writeable = False
            return u[None, :]
        k = int(np.argmin(np.abs(e)))
        v = np.zeros(3)
        v[k] = 1.0
        v = v - (v @ e) * e
        v /= np.linalg.norm(v)
        w = np.cross(e, v)
        out = np.stack([v, w])
        out.flags.writeable = False
        return out

    def project(self, points: np.ndarray) -> np.ndarray:
        """Frame coordinates of points projected onto the complement."""
        return np.atleast_2d(points) @ self.frame.T


def _as_direction(e) -> Direction:
    return e if isinstance(e, Direction) else Direction(np.asarray(e, dtype=np.float64))


def _support_corners(measure) -> np.ndarray:
    """Corners of the support bounding box, (2^dim, dim)."""
    if isinstance(measure, WeightedMeasure):
        measure = measure.base
    if isinstance(measure, DiscreteMeasure):
        lo, hi = measure.bounding_box()
    elif isinstance(measure, GridDensity):
        lo, hi = measure.support_box()
    else:
        raise TypeError(f"unsupported measure type {type(measure).__name__}")
    dim = lo.shape[0]
    corners = np.array(
        [[(hi if (i >> k) & 1 else lo)[k] for k in range(dim)] for i in range(2**dim)]
    )
    return corners


@dataclass(frozen=True)
class HistogramSpec:
    """Uniform histogram on the projection hyperplane: ``origin`` corner,
    square bins of side ``spacing``, ``shape`` bins per frame axis."""

    origin: np.ndarray
    spacing: float
    shape: tuple[int, ...]

    def __post_init__(self):
        origin = np.atleast_1d(np.asarray(self.origin, dtype=np.float64))
        shape = tuple(int(s) for s in np.atleast_1d(self.shape))
        if origin.shape[0] not in (1, 2) or len(shape) != origin.shape[0]:
            raise ValueError("histogram must have 1 or 2 axes matching the origin")
        if any(s < 2 for s in shape):
            raise ValueError("need at least 2 bins per axis")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        origin.flags.writeable = False
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", float(self.spacing))
        object.__setattr__(self, "shape", shape)

    @property
    def ndim(self) -> int:
        return len(self.shape)

    def axes(self) -> list[np.ndarray]:
        return [
            self.origin[k] + (np.arange(n) + 0.5) * self.spacing
            for k, n in enumerate(self.shape)
        ]

    @classmethod
    def cover_projected(cls, direction, measures, bins: int, pad_bins: int = 4,
                        include=None) -> "HistogramSpec":
        """Histogram covering the projections of all given measures.

        ``bins`` counts bins across the largest projected extent before
        padding; ``include`` adds ambient points that must fall inside.
        """
        direction = _as_direction(direction)
        tlo = np.full(direction.dim - 1, np.inf)
        thi = np.full(direction.dim - 1, -np.inf)
        for m in measures:
            t = direction.project(_support_corners(m))
            tlo = np.minimum(tlo, t.min(axis=0))
            thi = np.maximum(thi, t.max(axis=0))
        if include is not None:
            t = direction.project(np.atleast_2d(np.asarray(include, dtype=np.float64)))
            tlo = np.minimum(tlo, t.min(axis=0))
            thi = np.maximum(thi, t.max(axis=0))
        if bins < 2 * pad_bins + 2:
            raise ValueError("bins too small for the requested padding")
        span = float(np.max(thi - tlo))
        if span == 0.0:
            span = 1.0
        h = span / (bins - 2 * pad_bins)
        shape = tuple(
            int(np.ceil((thi[k] - tlo[k]) / h - 1e-12)) + 2 * pad_bins
            for k in range(tlo.shape[0])
        )
        return cls(tlo - pad_bins * h, h, shape)


@dataclass(frozen=True)
class DirectionDensity:
    """Histogram density of a projected measure on the complement of
    ``direction``; values are mass per unit (d-1)-volume in frame
    coordinates."""

    direction: Direction
    origin: np.ndarray
    spacing: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        origin = np.atleast_1d(np.asarray(self.origin, dtype=np.float64))
        if vals.ndim != self.direction.dim - 1 or origin.shape[0] != vals.ndim:
            raise ValueError("values rank must be direction dim minus 1")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", float(self.spacing))
        object.__setattr__(self, "values", vals)

    @property
    def spec(self) -> HistogramSpec:
        return HistogramSpec(self.origin, self.spacing, self.values.shape)

    @property
    def mass(self) -> float:
        return float(self.values.sum() * self.spacing**self.values.ndim)

    @property
    def bin_masses(self) -> np.ndarray:
        return self.values * self.spacing**self.values.ndim

    def bins_signature(self) -> tuple:
        return (
            tuple(np.round(self.origin, 12)),
            round(self.spacing, 12),
            self.values.shape,
        )

    def interpolate(self, coords: np.ndarray) -> np.ndarray:
        """Multilinear interpolation of the density at frame coordinates."""
        coords = np.atleast_2d(np.asarray(coords, dtype=np.float64))
        u = (coords - self.origin) / self.spacing - 0.5
        i0 = np.floor(u).astype(np.int64)
        frac = u - i0
        nd = self.values.ndim
        shape = np.asarray(self.values.shape)
        out = np.zeros(coords.shape[0])
        for corner in range(2**nd):
            bits = np.array([(corner >> k) & 1 for k in range(nd)])
            idx = i0 + bits
            w = np.prod(np.where(bits, frac, 1.0 - frac), axis=1)
            ok = np.all((idx >= 0) & (idx < shape), axis=1)
            if np.any(ok):
                vals = self.values[tuple(idx[ok].T)]
                out[ok] += w[ok] * vals
        return out


def _material_points(measure) -> tuple[np.ndarray, np.ndarray]:
    """Support points and their masses for deterministic deposit paths."""
    if isinstance(measure, DiscreteMeasure):
        return measure.points, measure.weights
    if isinstance(measure, GridDensity):
        keep = measure.cell_masses > 0
        return measure.cell_centers[keep], measure.cell_masses[keep]
    if isinstance(measure, WeightedMeasure):
        pts, masses = _material_points(measure.base)
        return pts, masses * measure.kernel(pts)
    raise TypeError(f"unsupported measure type {type(measure).__name__}")


def _cic_deposit(coords: np.ndarray, masses: np.ndarray, spec: HistogramSpec) -> np.ndarray:
    """Linear (cloud-in-cell) deposit; conserves mass exactly and errors if
    any point falls outside the histogram interior."""
    nd = spec.ndim
    u = (coords - spec.origin) / spec.spacing - 0.5
    i0 = np.floor(u).astype(np.int64)
    frac = u - i0
    shape = np.asarray(spec.shape)
    if np.any(i0 < 0) or np.any(i0 + 1 > shape - 1):
        raise ValueError("projected support falls outside the histogram; enlarge it")
    ncells = int(np.prod(shape))
    acc = np.zeros(ncells)
    for corner in range(2**nd):
        bits = np.array([(corner >> k) & 1 for k in range(nd)])
        idx = i0 + bits
        w = masses * np.prod(np.where(bits, frac, 1.0 - frac), axis=1)
        flat = np.ravel_multi_index(tuple(idx.T), spec.shape)
        acc += np.bincount(flat, weights=w, minlength=ncells)
    return acc.reshape(spec.shape)


def _floor_deposit(coords: np.ndarray, masses: np.ndarray, spec: HistogramSpec) -> np.ndarray:
    """Nearest-bin histogram deposit for point masses."""
    u = np.floor((coords - spec.origin) / spec.spacing).astype(np.int64)
    shape = np.asarray(spec.shape)
    if np.any(u < 0) or np.any(u > shape - 1):
        raise ValueError("projected support falls outside the histogram; enlarge it")
    ncells = int(np.prod(shape))
    flat = np.ravel_multi_index(tuple(u.T), spec.shape)
    return np.bincount(flat, weights=masses, minlength=ncells).reshape(spec.shape)


def orth_project(measure, direction, spec: HistogramSpec | None = None,
                 bins: int = 512) -> DirectionDensity:
    """Pushforward of ``measure`` under projection onto the complement of
    ``direction``, as a histogram density in frame coordinates.

    Point masses use nearest-bin deposits; grid cells use linear deposits
    so the density converges for smooth inputs.  Mass is conserved exactly.
    """
    direction = _as_direction(direction)
    if spec is None:
        spec = HistogramSpec.cover_projected(direction, [measure], bins)
    pts, masses = _material_points(measure)
    if pts.shape[1] != direction.dim:
        raise ValueError("measure and direction dimensions disagree")
    coords = direction.project(pts)
    base = measure.base if isinstance(measure, WeightedMeasure) else measure
    if isinstance(base, GridDensity):
        hist = _cic_deposit(coords, masses, spec)
    else:
        hist = _floor_deposit(coords, masses, spec)
    return DirectionDensity(direction, spec.origin, spec.spacing,
                            hist / spec.spacing**spec.ndim)


@dataclass(frozen=True)
class WeightedMeasure:
    """Measure reweighted by the Riesz kernel ``c_d |y - center|^(1-d)``.

    Not a probability measure; its total mass is the kernel integral
    against the base measure (midpoint quadrature for grid bases).
    """

    base: DiscreteMeasure | GridDensity
    center: np.ndarray
    c_d: float = 1.0

    def __post_init__(self):
        c = np.asarray(self.center, dtype=np.float64)
        if c.shape != (self.base.dim,):
            raise ValueError("center must match the base measure dimension")
        c.flags.writeable = False
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "c_d", float(self.c_d))

    @property
    def dim(self) -> int:
        return self.base.dim

    def kernel(self, points: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(np.atleast_2d(points) - self.center, axis=1)
        return self.c_d * r ** (1 - self.dim)

    @cached_property
    def total_mass(self) -> float:
        pts, masses = _material_points(self.base)
        return float(np.sum(masses * self.kernel(pts)))


def weight_riesz(measure, x, c_d: float = 1.0) -> WeightedMeasure:
    """Attach the Riesz kernel centred at ``x`` to ``measure``.

    ``x`` must lie strictly outside the support so the kernel is bounded on
    it.
    """
    x = np.asarray(x, dtype=np.float64)
    dist = support_distance(measure, x)
    if not dist > 0:
        raise ValueError(
            f"kernel centre must lie outside the support (support_distance={dist!r})"
        )
    return WeightedMeasure(measure, x, c_d)


def _radial_atoms(points, masses, x, grid: SphereGrid) -> np.ndarray:
    dirs = points - x
    r = np.linalg.norm(dirs, axis=1)
    if np.any(r == 0):
        raise ValueError("cannot project mass sitting at the vantage point")
    idx = grid.bin_index(dirs)
    return np.bincount(idx, weights=masses, minlength=grid.resolution)


def radial_project(measure, x, grid: SphereGrid, seed: int = 0,
                   samples_per_cell: int = 4) -> SphereDensity:
    """Pushforward of ``measure`` to the unit sphere as seen from ``x``.

    Point masses are binned exactly.  Grid densities are resolved by
    stratified Monte Carlo: ``samples_per_cell`` uniform draws per support
    cell, with the RNG substream derived from ``(seed, x)`` so results do
    not depend on call order.  For a Riesz-weighted grid the kernel is
    evaluated at each sample point.  The binned total equals the input mass
    (exactly for point masses, as the Monte Carlo estimate otherwise).
    """
    x = np.asarray(x, dtype=np.float64)
    base = measure.base if isinstance(measure, WeightedMeasure) else measure
    if x.shape != (base.dim,):
        raise ValueError("vantage point must match the measure dimension")
    if grid.dim != base.dim:
        raise ValueError("sphere grid and measure dimensions disagree")

    if isinstance(base, DiscreteMeasure):
        pts, masses = _material_points(measure)
        bin_mass = _radial_atoms(pts, masses, x, grid)
        return SphereDensity(grid, bin_mass / grid.areas)

    if not isinstance(base, GridDensity):
        raise TypeError(f"unsupported measure type {type(base).__name__}")

    keep = base.cell_masses > 0
    centers = base.cell_centers[keep]
    cell_mass = base.cell_masses[keep]
    h = base.spacing
    if samples_per_cell < 1:
        raise ValueError("samples_per_cell must be at least 1")
    rng = derive_rng(seed, x)
    acc = np.zeros(grid.resolution)
    weighted = isinstance(measure, WeightedMeasure)
    for _ in range(samples_per_cell):
        y = centers + (rng.uniform(size=centers.shape) - 0.5) * h
        dirs = y - x
        r = np.linalg.norm(dirs, axis=1)
        if np.any(r == 0):
            raise ValueError("sample coincided with the vantage point")
        contrib = cell_mass / samples_per_cell
        if weighted:
            contrib = contrib * (measure.c_d * r ** (1 - base.dim))
        idx = grid.bin_index(dirs)
        acc += np.bincount(idx, weights=contrib, minlength=grid.resolution)
    return SphereDensity(grid, acc / grid.areas)


def density_formula_rhs(measure: GridDensity, x, e, bins: int = 512) -> float:
    """Closed-form counterpart of the radial density of the Riesz-weighted
    measure at direction ``e``: restrict the measure to the open half-space
    ahead of ``x`` along ``e``, project orthogonally to ``e``, and read the
    projected density at the frame coordinates of ``x``.
    """
    if not isinstance(measure, GridDensity):
        raise TypeError("the closed form needs a grid density")
    x = np.asarray(x, dtype=np.float64)
    direction = _as_direction(e)
    if x.shape != (measure.dim,) or direction.dim != measure.dim:
        raise ValueError("point, direction and measure dimensions must agree")
    dist = support_distance(measure, x)
    if not dist > 0:
        raise ValueError(
            f"evaluation point must lie outside the support (support_distance={dist!r})"
        )

    keep = measure.cell_masses > 0
    centers = measure.cell_centers[keep]
    masses = measure.cell_masses[keep]
    ahead = (centers - x) @ direction.vector > 0
    spec = HistogramSpec.cover_projected(direction, [measure], bins, include=[x])
    if not np.any(ahead):
        return 0.0
    coords = direction.project(centers[ahead])
    hist = _cic_deposit(coords, masses[ahead], spec)
    dens = DirectionDensity(direction, spec.origin, spec.spacing,
                            hist / spec.spacing**spec.ndim)
    return float(dens.interpolate(direction.project(x[None, :]))[0])
