"""Compactly supported probability measures on R^2 and R^3.

Two concrete representations are used throughout the package:

* :class:`DiscreteMeasure`, a weighted point cloud with unit total mass;
* :class:`GridDensity`, a density sampled at the centres of a uniform grid
  of square cells, with the outermost cell layer identically zero so the
  support is strictly inside the grid box.

:func:`mollify` connects the two by convolving a measure with a compactly
supported kernel (:class:`Mollifier`) and sampling the result on a grid.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache, cached_property

import numpy as np
from scipy import integrate, signal

__all__ = [
    "DiscreteMeasure",
    "GridSpec",
    "GridDensity",
    "Mollifier",
    "AffineMap",
    "from_points",
    "ifs_sample",
    "mollify",
    "support_distance",
]

SUPPORTED_DIMS = (2, 3)

# surface area of the unit sphere S^{d-1} in R^d
_SPHERE_AREA = {2: 2.0 * np.pi, 3: 4.0 * np.pi}


def _check_dim(dim: int) -> None:
    if dim not in SUPPORTED_DIMS:
        raise ValueError(f"dimension must be one of {SUPPORTED_DIMS}, got {dim}")


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.float64, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finite weighted point cloud with total mass 1.

    Attributes
    ----------
    points : (n, dim) float64 array
    weights : (n,) float64 array, nonnegative, summing to 1
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        w = np.asarray(self.weights, dtype=np.float64)
        if pts.ndim != 2:
            raise ValueError(f"points must be a 2d array, got shape {pts.shape}")
        _check_dim(pts.shape[1])
        if w.shape != (pts.shape[0],):
            raise ValueError(
                f"weights shape {w.shape} does not match {pts.shape[0]} points"
            )
        if pts.shape[0] == 0:
            raise ValueError("measure needs at least one point")
        neg = np.flatnonzero(w < 0)
        if neg.size:
            raise ValueError(f"negative weight at index {neg[0]}")
        total = float(w.sum())
        if not np.isfinite(total) or total <= 0:
            raise ValueError("weights must have positive finite total mass")
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {total!r}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        object.__setattr__(self, "points", _readonly(pts))
        object.__setattr__(self, "weights", _readonly(w))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.points.min(axis=0), self.points.max(axis=0)

    def translated(self, shift) -> "DiscreteMeasure":
        shift = np.asarray(shift, dtype=np.float64)
        return DiscreteMeasure(self.points + shift, self.weights)

    def scaled(self, factor: float) -> "DiscreteMeasure":
        """Image measure under x -> factor * x (mass is preserved)."""
        if factor == 0:
            raise ValueError("scale factor must be nonzero")
        return DiscreteMeasure(self.points * float(factor), self.weights)


def from_points(points, weights=None) -> DiscreteMeasure:
    """Build a :class:`DiscreteMeasure`, normalising the total mass to 1.

    With ``weights=None`` all points get equal weight.  Raises on negative
    weights (reporting the offending index) and on zero total mass.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError(f"points must be a 2d array, got shape {pts.shape}")
    if weights is None:
        w = np.full(pts.shape[0], 1.0 / max(pts.shape[0], 1))
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (pts.shape[0],):
            raise ValueError(
                f"weights shape {w.shape} does not match {pts.shape[0]} points"
            )
        neg = np.flatnonzero(w < 0)
        if neg.size:
            raise ValueError(f"negative weight at index {neg[0]}")
        total = w.sum()
        if total <= 0:
            raise ValueError("total mass must be positive")
        w = w / total
    return DiscreteMeasure(pts, w)


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of square cells: ``origin`` corner, cell side ``spacing``,
    ``shape`` cells per axis.  Cell (i, ...) has centre
    ``origin + (i + 0.5) * spacing``."""

    origin: np.ndarray
    spacing: float
    shape: tuple[int, ...]

    def __post_init__(self):
        origin = np.asarray(self.origin, dtype=np.float64)
        _check_dim(origin.shape[0] if origin.ndim == 1 else -1)
        shape = tuple(int(s) for s in self.shape)
        if len(shape) != origin.shape[0]:
            raise ValueError("origin and shape dimensions disagree")
        if any(s < 3 for s in shape):
            raise ValueError("grid needs at least 3 cells per axis")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        object.__setattr__(self, "origin", _readonly(origin))
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "spacing", float(self.spacing))

    @property
    def dim(self) -> int:
        return self.origin.shape[0]

    @property
    def upper(self) -> np.ndarray:
        return self.origin + self.spacing * np.asarray(self.shape)

    def axes(self) -> list[np.ndarray]:
        """Cell-centre coordinates along each axis."""
        return [
            self.origin[k] + (np.arange(n) + 0.5) * self.spacing
            for k, n in enumerate(self.shape)
        ]

    def cell_centers(self) -> np.ndarray:
        """All cell centres as an (ncells, dim) array, C order."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    @classmethod
    def cover(cls, lo, hi, resolution: int, pad_cells: int = 4) -> "GridSpec":
        """Grid whose interior covers the box [lo, hi] with `pad_cells` extra
        cells on every side.  ``resolution`` counts cells across the largest
        extent of the box, not counting padding."""
        lo = np.asarray(lo, dtype=np.float64)
        hi = np.asarray(hi, dtype=np.float64)
        if np.any(hi < lo):
            raise ValueError("box upper corner below lower corner")
        span = float(np.max(hi - lo))
        if span == 0.0:
            span = 1.0
        if resolution < 3:
            raise ValueError("resolution must be at least 3")
        h = span / resolution
        shape = tuple(
            int(np.ceil((hi[k] - lo[k]) / h - 1e-12)) + 2 * pad_cells
            for k in range(lo.shape[0])
        )
        return cls(lo - pad_cells * h, h, shape)


@dataclass(frozen=True)
class GridDensity:
    """Probability density sampled at cell centres of a uniform grid.

    ``values`` holds the density (mass per unit volume); the mass of a cell
    is ``values * spacing**dim``.  Invariants checked on construction:
    nonnegative values, total mass 1 within 1e-9, and an identically zero
    outermost cell layer (the support is strictly inside the grid box).
    """

    origin: np.ndarray
    spacing: float
    values: np.ndarray

    def __post_init__(self):
        origin = np.asarray(self.origin, dtype=np.float64)
        vals = np.asarray(self.values, dtype=np.float64)
        _check_dim(vals.ndim)
        if origin.shape != (vals.ndim,):
            raise ValueError("origin length must match values.ndim")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        if np.any(vals < 0):
            raise ValueError("density values must be nonnegative")
        mass = float(vals.sum() * self.spacing**vals.ndim)
        if abs(mass - 1.0) > 1e-9:
            raise ValueError(f"total mass must be 1 within 1e-9, got {mass!r}")
        for axis in range(vals.ndim):
            edge = [slice(None)] * vals.ndim
            for side in (0, -1):
                edge[axis] = side
                if np.any(vals[tuple(edge)] != 0.0):
                    raise ValueError(
                        "outermost cell layer must be zero; enlarge the grid"
                    )
        object.__setattr__(self, "origin", _readonly(origin))
        object.__setattr__(self, "spacing", float(self.spacing))
        object.__setattr__(self, "values", _readonly(vals))

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def spec(self) -> GridSpec:
        return GridSpec(self.origin, self.spacing, self.values.shape)

    @property
    def total_mass(self) -> float:
        return float(self.values.sum() * self.spacing**self.dim)

    @cached_property
    def cell_centers(self) -> np.ndarray:
        return self.spec.cell_centers()

    @cached_property
    def cell_masses(self) -> np.ndarray:
        return np.ascontiguousarray(
            self.values.ravel() * self.spacing**self.dim
        )

    def support_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Tight bounding box of the closed cells carrying positive mass."""
        idx = np.argwhere(self.values > 0)
        if idx.shape[0] == 0:
            raise ValueError("density is identically zero")
        h = self.spacing
        return self.origin + idx.min(axis=0) * h, self.origin + (idx.max(axis=0) + 1) * h

    def translated(self, shift) -> "GridDensity":
        shift = np.asarray(shift, dtype=np.float64)
        return GridDensity(self.origin + shift, self.spacing, self.values)

    def scaled(self, factor: float) -> "GridDensity":
        """Image under x -> factor * x with factor > 0; density rescales by
        factor**-dim so the mass stays 1."""
        f = float(factor)
        if not f > 0:
            raise ValueError("scale factor must be positive")
        return GridDensity(self.origin * f, self.spacing * f, self.values / f**self.dim)

    @classmethod
    def from_function(cls, fn, spec: GridSpec) -> "GridDensity":
        """Sample ``fn`` at cell centres and normalise to total mass 1.

        The outermost layer is forced to zero, so ``fn`` should essentially
        vanish there; whatever tail mass falls on that layer is discarded
        before normalisation.
        """
        vals = np.asarray(fn(spec.cell_centers()), dtype=np.float64)
        vals = vals.reshape(spec.shape)
        if np.any(vals < -1e-12):
            raise ValueError("density function returned negative values")
        vals = np.clip(vals, 0.0, None)
        for axis in range(vals.ndim):
            edge = [slice(None)] * vals.ndim
            for side in (0, -1):
                edge[axis] = side
                vals[tuple(edge)] = 0.0
        total = vals.sum() * spec.spacing**spec.dim
        if total <= 0:
            raise ValueError("density function has zero mass on this grid")
        return cls(spec.origin, spec.spacing, vals / total)


def _profile_bump(r: np.ndarray) -> np.ndarray:
    out = np.zeros_like(r)
    inside = r < 1.0
    ri = r[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ri * ri))
    return out


def _profile_quartic(r: np.ndarray) -> np.ndarray:
    out = np.zeros_like(r)
    inside = r < 1.0
    ri = r[inside]
    out[inside] = (1.0 - ri * ri) ** 2
    return out


_PROFILES = {"bump": _profile_bump, "quartic": _profile_quartic}


@lru_cache(maxsize=None)
def _profile_norm(profile: str, dim: int) -> float:
    """Integral of the unnormalised radial profile over the unit ball of R^dim."""
    fn = _PROFILES[profile]
    val, _ = integrate.quad(
        lambda r: float(fn(np.array([r]))[0]) * r ** (dim - 1), 0.0, 1.0
    )
    return _SPHERE_AREA[dim] * val


@dataclass(frozen=True)
class Mollifier:
    """Radial kernel supported in the closed ball of radius ``scale``.

    Profiles: ``"bump"``, exp(-1/(1-r^2)) inside the unit ball (smooth), and
    ``"quartic"``, (1-r^2)^2 inside the unit ball (C^1, cheaper tails).
    :meth:`density` is normalised to unit mass in R^dim.
    """

    scale: float
    profile: str = "bump"

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("mollifier scale must be positive")
        if self.profile not in _PROFILES:
            raise ValueError(
                f"unknown profile {self.profile!r}; choose from {sorted(_PROFILES)}"
            )
        object.__setattr__(self, "scale", float(self.scale))

    def radial(self, r) -> np.ndarray:
        """Unnormalised profile as a function of |offset| (not rescaled)."""
        return _PROFILES[self.profile](np.asarray(r, dtype=np.float64) / self.scale)

    def density(self, offsets) -> np.ndarray:
        """Normalised kernel evaluated at offset vectors, shape (n, dim)."""
        offsets = np.asarray(offsets, dtype=np.float64)
        r = np.linalg.norm(offsets, axis=-1)
        dim = offsets.shape[-1]
        norm = _profile_norm(self.profile, dim) * self.scale**dim
        return self.radial(r) / norm


def _window_offsets(m: int, dim: int) -> np.ndarray:
    rng = np.arange(-m, m + 1)
    mesh = np.meshgrid(*([rng] * dim), indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


def _required_box_message(lo, hi, eps: float, h: float) -> str:
    need_lo = lo - (eps + 2 * h)
    need_hi = hi + (eps + 2 * h)
    return (
        "grid too small for mollification: need box "
        f"[{np.array2string(need_lo, precision=6)}, "
        f"{np.array2string(need_hi, precision=6)}] at spacing {h:g}"
    )


def _deposit_atoms(mu: DiscreteMeasure, moll: Mollifier, spec: GridSpec) -> np.ndarray:
    """Per-atom kernel deposit onto cell centres; each atom's deposit is
    renormalised so its mass lands exactly, hence total mass is exactly 1."""
    h = spec.spacing
    dim = spec.dim
    m = int(np.ceil(moll.scale / h)) + 1
    offsets = _window_offsets(m, dim)
    shape = np.asarray(spec.shape)

    # nearest cell centre per atom
    base = np.rint((mu.points - spec.origin) / h - 0.5).astype(np.int64)
    if np.any(base - m < 1) or np.any(base + m > shape - 2):
        lo, hi = mu.bounding_box()
        raise ValueError(_required_box_message(lo, hi, moll.scale, h))

    ncells = int(np.prod(shape))
    acc = np.zeros(ncells)
    chunk = max(1, 2_000_000 // offsets.shape[0])
    for start in range(0, mu.points.shape[0], chunk):
        pts = mu.points[start : start + chunk]
        w = mu.weights[start : start + chunk]
        idx = base[start : start + chunk, None, :] + offsets[None, :, :]
        centers = spec.origin + (idx + 0.5) * h
        r = np.linalg.norm(centers - pts[:, None, :], axis=2)
        k = moll.radial(r)
        ksum = k.sum(axis=1)
        flat = np.ravel_multi_index(tuple(np.moveaxis(idx, 2, 0)), spec.shape)
        ok = ksum > 0
        if np.any(ok):
            vals = k[ok] * (w[ok] / (ksum[ok] * h**dim))[:, None]
            acc += np.bincount(flat[ok].ravel(), weights=vals.ravel(), minlength=ncells)
        if np.any(~ok):
            # scale far below spacing: fall back to nearest-cell deposit
            centre_flat = np.ravel_multi_index(
                tuple(base[start : start + chunk][~ok].T), spec.shape
            )
            acc += np.bincount(
                centre_flat, weights=w[~ok] / h**dim, minlength=ncells
            )
    return acc.reshape(spec.shape)


def _convolve_grid(gd: GridDensity, moll: Mollifier, spec: GridSpec) -> np.ndarray:
    """FFT convolution of cell masses with a discretely normalised kernel."""
    h = spec.spacing
    if abs(gd.spacing - h) > 1e-9 * h:
        raise ValueError("target grid spacing must match the source grid")
    shift = (gd.origin - spec.origin) / h
    offset = np.rint(shift).astype(np.int64)
    if np.any(np.abs(shift - offset) > 1e-9):
        raise ValueError("target grid must be aligned with the source grid")

    m = int(np.ceil(moll.scale / h)) + 1
    grids = np.meshgrid(*([np.arange(-m, m + 1) * h] * spec.dim), indexing="ij")
    r = np.sqrt(sum(g * g for g in grids))
    kernel = moll.radial(r)
    ks = kernel.sum()
    if ks == 0:
        kernel[(m,) * spec.dim] = 1.0
        ks = 1.0
    kernel /= ks

    masses = gd.values * h**gd.dim
    conv = signal.fftconvolve(masses, kernel, mode="full")  # starts at offset -m
    # fftconvolve leaves tiny negative / spurious entries at roundoff level
    conv[np.abs(conv) < 1e-15 * conv.max()] = 0.0
    np.clip(conv, 0.0, None, out=conv)

    out = np.zeros(spec.shape)
    lo = offset - m
    hi = lo + np.asarray(conv.shape)
    if np.any(lo < 1) or np.any(hi > np.asarray(spec.shape) - 1):
        slo, shi = gd.support_box()
        raise ValueError(_required_box_message(slo, shi, moll.scale, h))
    sl = tuple(slice(int(a), int(b)) for a, b in zip(lo, hi))
    out[sl] = conv
    return out / h**spec.dim


def mollify(measure, mollifier: Mollifier, spec: GridSpec | None = None,
            resolution: int = 256) -> GridDensity:
    """Convolve ``measure`` with ``mollifier`` and sample on a grid.

    With ``spec=None`` a covering grid is built automatically.  For a point
    cloud it has ``resolution`` cells across the largest support extent plus
    kernel padding; for a grid density the source spacing is inherited and
    ``resolution`` is ignored.  The result has total mass 1 (exactly, up to
    accumulation roundoff) and support enlarged by at most
    ``mollifier.scale`` plus one cell diagonal.
    """
    if isinstance(measure, DiscreteMeasure):
        lo, hi = measure.bounding_box()
    elif isinstance(measure, GridDensity):
        lo, hi = measure.support_box()
    else:
        raise TypeError(f"cannot mollify {type(measure).__name__}")

    if spec is None:
        if isinstance(measure, GridDensity):
            # inherit the source spacing; just enlarge the canvas
            h = measure.spacing
            m = int(np.ceil(mollifier.scale / h)) + 2
            spec = GridSpec(
                measure.origin - m * h,
                h,
                tuple(s + 2 * m for s in measure.values.shape),
            )
        else:
            if resolution < 3:
                raise ValueError("resolution must be at least 3")
            span = float(np.max(hi - lo))
            h = (span if span > 0 else 1.0) / resolution
            pad = int(np.ceil(mollifier.scale / h)) + 4
            spec = GridSpec.cover(lo, hi, resolution, pad_cells=pad)

    if isinstance(measure, DiscreteMeasure):
        vals = _deposit_atoms(measure, mollifier, spec)
    else:
        vals = _convolve_grid(measure, mollifier, spec)
    return GridDensity(spec.origin, spec.spacing, vals)


def support_distance(measure, x) -> float:
    """Distance from point ``x`` to the support of ``measure``.

    For a point cloud this is the distance to the nearest atom; for a grid
    density, the distance to the nearest closed cell carrying positive mass.
    """
    x = np.asarray(x, dtype=np.float64)
    if isinstance(measure, DiscreteMeasure):
        if x.shape != (measure.dim,):
            raise ValueError(f"point shape {x.shape} does not match dim {measure.dim}")
        return float(np.min(np.linalg.norm(measure.points - x, axis=1)))
    if isinstance(measure, GridDensity):
        if x.shape != (measure.dim,):
            raise ValueError(f"point shape {x.shape} does not match dim {measure.dim}")
        half = 0.5 * measure.spacing
        centers = measure.cell_centers[measure.cell_masses > 0]
        gap = np.maximum(np.abs(centers - x) - half, 0.0)
        return float(np.min(np.linalg.norm(gap, axis=1)))
    raise TypeError(f"unsupported measure type {type(measure).__name__}")


@dataclass(frozen=True)
class AffineMap:
    """Affine contraction y -> linear @ y + offset."""

    linear: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        lin = np.asarray(self.linear, dtype=np.float64)
        off = np.asarray(self.offset, dtype=np.float64)
        if lin.ndim != 2 or lin.shape[0] != lin.shape[1]:
            raise ValueError("linear part must be a square matrix")
        _check_dim(lin.shape[0])
        if off.shape != (lin.shape[0],):
            raise ValueError("offset length must match the linear part")
        object.__setattr__(self, "linear", _readonly(lin))
        object.__setattr__(self, "offset", _readonly(off))

    @property
    def dim(self) -> int:
        return self.linear.shape[0]

    @property
    def contraction_ratio(self) -> float:
        return float(np.linalg.norm(self.linear, 2))

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        return np.asarray(pts) @ self.linear.T + self.offset

    def fixed_point(self) -> np.ndarray:
        eye = np.eye(self.dim)
        return np.linalg.solve(eye - self.linear, self.offset)

    @classmethod
    def toward(cls, point, ratio: float) -> "AffineMap":
        """Similarity contracting by ``ratio`` toward ``point``."""
        point = np.asarray(point, dtype=np.float64)
        dim = point.shape[0]
        return cls(ratio * np.eye(dim), (1.0 - ratio) * point)

    @classmethod
    def similarity(cls, ratio: float, translation, angle: float = 0.0) -> "AffineMap":
        """Planar similarity: rotation by ``angle``, scaling by ``ratio``,
        then translation."""
        translation = np.asarray(translation, dtype=np.float64)
        if translation.shape != (2,):
            raise ValueError("similarity() builds planar maps only")
        c, s = np.cos(angle), np.sin(angle)
        lin = ratio * np.array([[c, -s], [s, c]])
        return cls(lin, translation)


def ifs_sample(maps: list[AffineMap], n: int, seed: int, burn_in: int = 64) -> DiscreteMeasure:
    """Sample ``n`` points of the attractor of an iterated function system
    by the chaos game, equal weights, deterministic for a fixed seed.

    All maps must be strict contractions and share one dimension.
    """
    if not maps:
        raise ValueError("need at least one map")
    dim = maps[0].dim
    for i, mp in enumerate(maps):
        if mp.dim != dim:
            raise ValueError(f"map {i} has dimension {mp.dim}, expected {dim}")
        if mp.contraction_ratio >= 1.0:
            raise ValueError(
                f"map {i} is not a contraction (ratio {mp.contraction_ratio:.6g})"
            )
    if n < 1:
        raise ValueError("n must be positive")

    from .seeding import derive_rng

    rng = derive_rng(seed)
    choices = rng.integers(0, len(maps), size=burn_in + n)
    x = maps[0].fixed_point()
    pts = np.empty((n, dim))
    for k, c in enumerate(choices):
        mp = maps[c]
        x = mp.linear @ x + mp.offset
        if k >= burn_in:
            pts[k - burn_in] = x
    return DiscreteMeasure(pts, np.full(n, 1.0 / n))
