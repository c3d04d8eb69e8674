"""Scans for vantage points with anomalous radial-projection norms.

For each centre x on a lattice, the measure is pushed to the unit sphere
from x at two sphere resolutions.  Smooth pushforwards have stable p-power
norms under refinement; a norm ratio above the threshold flags the centre
as bad (the pushforward concentrates, as happens when mass lines up with
x).  The set of flagged centres is summarised by a box-counting dimension
estimate and compared against the exponent bound carried by
:class:`ScanParams`.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .measures import DiscreteMeasure, GridDensity

__all__ = [
    "ScanParams",
    "ScanReport",
    "BoxDimension",
    "admissible_p",
    "scan_centres",
    "extract_bad_set",
    "box_dimension",
]


def admissible_p(dim: int, s: float, t: float) -> float:
    """Upper admissible moment exponent
    ``min(2 - t/(dim-1), t/(2*(dim-1) - s))``.

    Requires ``dim-1 < s < dim`` and ``2*(dim-1) - s < t < dim-1``; on
    that domain the result always lies strictly between 1 and 2.
    """
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    m = dim - 1
    if not m < s < dim:
        raise ValueError(f"need {m} < s < {dim}, got s={s}")
    if not 2 * m - s < t < m:
        raise ValueError(f"need {2 * m - s:g} < t < {m}, got t={t}")
    return min(2.0 - t / m, t / (2.0 * m - s))


@dataclass(frozen=True)
class ScanParams:
    """Exponent bookkeeping for a scan: ambient dim, energy exponent s,
    projected-distance exponent t, moment exponent p."""

    dim: int
    s: float
    t: float
    p: float

    def __post_init__(self):
        admissible_p(self.dim, self.s, self.t)  # validates the domain
        if not self.p > 1:
            raise ValueError(f"need p > 1, got p={self.p}")

    @property
    def p_max(self) -> float:
        return admissible_p(self.dim, self.s, self.t)

    @property
    def delta_p(self) -> float:
        """Excess of p over the admissible bound (0 when admissible)."""
        return max(0.0, self.p - self.p_max)

    @property
    def bad_dim_bound(self) -> float:
        """Dimension bound ``2*(dim-1) - s`` for the flagged-centre set."""
        return 2.0 * (self.dim - 1) - self.s


@dataclass(frozen=True)
class BoxDimension:
    """Box-counting regression: ``estimate`` is the slope of log N(r)
    against log 1/r, ``band`` a two-sigma half-width."""

    estimate: float
    band: float
    scales: np.ndarray
    counts: np.ndarray

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "band": self.band,
            "scales": list(map(float, self.scales)),
            "counts": list(map(int, self.counts)),
        }


def box_dimension(points, scales) -> BoxDimension:
    """Box-counting dimension of a point set over the given scales.

    A set of coincident points (or a single point) short-circuits to
    dimension 0.  Otherwise at least 10 points and 4 scales are required
    for a meaningful regression.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    scales = np.sort(np.unique(np.asarray(scales, dtype=np.float64)))[::-1]
    if np.any(scales <= 0):
        raise ValueError("scales must be positive")
    if pts.shape[0] == 0:
        raise ValueError("need at least one point")
    if np.all(np.ptp(pts, axis=0) == 0):
        counts = np.ones(len(scales), dtype=np.int64)
        return BoxDimension(0.0, 0.0, scales, counts)
    if pts.shape[0] < 10:
        raise ValueError("need at least 10 points for a dimension estimate")
    if scales.shape[0] < 4:
        raise ValueError("need at least 4 scales for a dimension estimate")

    lo = pts.min(axis=0)
    counts = np.empty(len(scales), dtype=np.int64)
    for k, r in enumerate(scales):
        idx = np.floor((pts - lo) / r).astype(np.int64)
        counts[k] = np.unique(idx, axis=0).shape[0]
    xs = np.log(1.0 / scales)
    ys = np.log(counts.astype(np.float64))
    coef = np.polyfit(xs, ys, 1)
    slope = float(coef[0])
    fit = np.polyval(coef, xs)
    dof = max(len(xs) - 2, 1)
    sigma2 = float(np.sum((ys - fit) ** 2)) / dof
    sx = float(np.sum((xs - xs.mean()) ** 2))
    band = 2.0 * np.sqrt(sigma2 / sx) if sx > 0 else float("inf")
    return BoxDimension(slope, band, scales, counts)


@dataclass(frozen=True)
class ScanReport:
    """Outcome of a centre scan at two sphere resolutions."""

    region_lo: np.ndarray
    region_hi: np.ndarray
    step: float
    margin: float
    threshold: float
    p: float
    sphere_resolutions: tuple[int, int]
    centres: np.ndarray
    scanned: np.ndarray
    norms_coarse: np.ndarray
    norms_fine: np.ndarray
    bad: np.ndarray
    dim_estimate: BoxDimension | None = None
    params: ScanParams | None = None

    @property
    def ratios(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.norms_fine / self.norms_coarse

    @property
    def bad_points(self) -> np.ndarray:
        return self.centres[self.bad]

    @property
    def bound(self) -> float | None:
        return self.params.bad_dim_bound if self.params is not None else None

    def to_dict(self) -> dict:
        out = {
            "region": [list(map(float, self.region_lo)), list(map(float, self.region_hi))],
            "step": self.step,
            "margin": self.margin,
            "threshold": self.threshold,
            "p": self.p,
            "sphere_resolutions": list(self.sphere_resolutions),
            "centres": int(self.centres.shape[0]),
            "scanned": int(np.count_nonzero(self.scanned)),
            "bad": int(np.count_nonzero(self.bad)),
            "dim_estimate": None if self.dim_estimate is None else self.dim_estimate.to_dict(),
            "bound": self.bound,
            "delta_p": None if self.params is None else self.params.delta_p,
        }
        return out


def _support_atoms(measure) -> tuple[np.ndarray, np.ndarray, float]:
    """Support points, masses, and the box half-width used for distances
    (0 for true atoms, half a cell for grid densities)."""
    if isinstance(measure, DiscreteMeasure):
        return measure.points, measure.weights, 0.0
    if isinstance(measure, GridDensity):
        keep = measure.cell_masses > 0
        return (
            measure.cell_centers[keep],
            measure.cell_masses[keep],
            0.5 * measure.spacing,
        )
    raise TypeError(f"unsupported measure type {type(measure).__name__}")


def _centre_lattice(lo: np.ndarray, hi: np.ndarray, step: float) -> np.ndarray:
    counts = [max(1, int(round((hi[k] - lo[k]) / step))) for k in range(lo.shape[0])]
    axes = [lo[k] + (np.arange(counts[k]) + 0.5) * step for k in range(lo.shape[0])]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _norm_block(centres: np.ndarray, atoms: np.ndarray, masses: np.ndarray,
                p: float, resolution: int, dim: int,
                ring_inner: np.ndarray | None,
                ring_counts: np.ndarray | None,
                ring_start: np.ndarray | None) -> np.ndarray:
    """p-power sphere norms of the exact radial pushforward for a block of
    centres; one flat bincount per block."""
    b = centres.shape[0]
    n = atoms.shape[0]
    diff = atoms[None, :, :] - centres[:, None, :]
    if dim == 2:
        theta = np.mod(np.arctan2(diff[:, :, 1], diff[:, :, 0]), 2.0 * np.pi)
        width = 2.0 * np.pi / resolution
        idx = np.minimum((theta / width).astype(np.int64), resolution - 1)
        area = width
    else:
        r = np.sqrt(np.sum(diff * diff, axis=2))
        z = diff[:, :, 2] / r
        ring = np.searchsorted(ring_inner, -z, side="left")
        counts = ring_counts[ring]
        phi = np.mod(np.arctan2(diff[:, :, 1], diff[:, :, 0]), 2.0 * np.pi)
        j = np.minimum((phi * counts / (2.0 * np.pi)).astype(np.int64), counts - 1)
        idx = ring_start[ring] + j
        area = 4.0 * np.pi / resolution
    flat = idx + resolution * np.arange(b)[:, None]
    hist = np.bincount(flat.ravel(), weights=np.broadcast_to(masses, (b, n)).ravel(),
                       minlength=b * resolution).reshape(b, resolution)
    return np.sum((hist / area) ** p, axis=1) * area


def scan_centres(measure, region, step: float, p: float | None = None,
                 sphere_resolution: int = 256, margin: float = 0.1,
                 refine_factor: int = 2, threshold: float = 1.5,
                 params: ScanParams | None = None,
                 threads: int = 1) -> ScanReport:
    """Scan a lattice of vantage points for unstable radial p-norms.

    ``region`` is a (lo, hi) box; centres sit at cell midpoints of a
    ``step`` lattice.  Centres within ``margin`` of the support are
    skipped.  The radial pushforward (atoms exactly; grid cells by their
    midpoints) is binned at ``sphere_resolution`` and at ``refine_factor``
    times that; a centre is flagged bad when the fine-to-coarse ratio of
    the p-power norm reaches ``threshold``.  ``threads`` only splits the
    work; results are identical for any thread count.
    """
    if params is not None:
        if p is not None and p != params.p:
            raise ValueError("p given twice with different values")
        p = params.p
    if p is None:
        raise ValueError("an exponent p is required")
    if not p > 1:
        raise ValueError(f"need p > 1, got p={p}")
    if refine_factor < 2:
        raise ValueError("refine_factor must be at least 2")
    if not step > 0:
        raise ValueError("step must be positive")
    if threads < 1:
        raise ValueError("threads must be positive")

    lo = np.asarray(region[0], dtype=np.float64)
    hi = np.asarray(region[1], dtype=np.float64)
    dim = measure.dim
    if lo.shape != (dim,) or hi.shape != (dim,) or np.any(hi <= lo):
        raise ValueError("region must be a nonempty (lo, hi) box of the right dim")

    atoms, masses, half = _support_atoms(measure)
    centres = _centre_lattice(lo, hi, step)
    m = centres.shape[0]

    res1 = sphere_resolution
    res2 = sphere_resolution * refine_factor
    from .sphere import make_sphere_grid

    rings = {}
    for res in (res1, res2):
        if dim == 3:
            g = make_sphere_grid(3, res)
            rings[res] = (-g.ring_bounds[1:-1], g.ring_counts, g.ring_start)
        else:
            rings[res] = (None, None, None)

    norms1 = np.full(m, np.nan)
    norms2 = np.full(m, np.nan)
    scanned = np.zeros(m, dtype=bool)

    block = 128

    def work(start: int) -> None:
        stop = min(start + block, m)
        c = centres[start:stop]
        # distance to the support (cell boxes for grids, points for atoms)
        gap = np.maximum(np.abs(atoms[None, :, :] - c[:, None, :]) - half, 0.0)
        dist = np.min(np.sqrt(np.sum(gap * gap, axis=2)), axis=1)
        ok = dist > margin
        scanned[start:stop] = ok
        if not np.any(ok):
            return
        sel = c[ok]
        n1 = _norm_block(sel, atoms, masses, p, res1, dim, *rings[res1])
        n2 = _norm_block(sel, atoms, masses, p, res2, dim, *rings[res2])
        out1 = np.full(stop - start, np.nan)
        out2 = np.full(stop - start, np.nan)
        out1[ok] = n1
        out2[ok] = n2
        norms1[start:stop] = out1
        norms2[start:stop] = out2

    starts = list(range(0, m, block))
    if threads == 1:
        for st in starts:
            work(st)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, starts))

    with np.errstate(invalid="ignore", divide="ignore"):
        bad = np.where(scanned, norms2 / norms1 >= threshold, False)

    dim_est = None
    bad_pts = centres[bad]
    if bad_pts.shape[0] >= 10:
        scales = step * np.array([2.0, 4.0, 8.0, 16.0])
        dim_est = box_dimension(bad_pts, scales)

    return ScanReport(
        region_lo=lo, region_hi=hi, step=float(step), margin=float(margin),
        threshold=float(threshold), p=float(p), sphere_resolutions=(res1, res2),
        centres=centres, scanned=scanned, norms_coarse=norms1, norms_fine=norms2,
        bad=bad, dim_estimate=dim_est, params=params,
    )


def extract_bad_set(report: ScanReport, threshold: float | None = None) -> np.ndarray:
    """Flagged centres, optionally re-thresholding the stored norm ratios."""
    if threshold is None:
        return report.bad_points
    with np.errstate(invalid="ignore", divide="ignore"):
        flags = np.where(
            report.scanned, report.norms_fine / report.norms_coarse >= threshold, False
        )
    return report.centres[flags]
