"""Energies and regularity probes for discretised measures.

Riesz s-energies come in two flavours: an exact pairwise double sum for
point clouds and an FFT autocorrelation for grid densities (cell-midpoint
interactions plus an analytic same-cell term).  The module also provides a
Fourier-side fractional energy for projected line densities, ball-growth
exponent estimation, a weighted Hoelder inequality check on sphere caps,
and adaptive sphere quadrature of inverse projected-distance integrals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import fft as sfft
from scipy import integrate

from .measures import DiscreteMeasure, GridDensity
from .project import DirectionDensity
from .sphere import SphereDensity, SphereGrid, cap_sums

__all__ = [
    "EnergyReport",
    "riesz_energy",
    "riesz_energy_grid",
    "unit_cell_riesz",
    "fourier_sobolev",
    "frostman_exponent",
    "frostman_holder_check",
    "kaufman_integral",
]


@dataclass(frozen=True)
class EnergyReport:
    """Result of an energy computation.

    ``resolution`` records the discretisation actually used;
    ``error_estimate`` is a relative figure where the method provides one,
    else None.  ``divergent`` marks energies that are infinite for the
    given input (value is then ``inf``).
    """

    exponent: float
    value: float
    method: str
    resolution: dict = field(default_factory=dict)
    error_estimate: float | None = None
    divergent: bool = False

    def to_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "value": self.value,
            "method": self.method,
            "resolution": dict(self.resolution),
            "error_estimate": self.error_estimate,
            "divergent": self.divergent,
        }


def riesz_energy(measure: DiscreteMeasure, s: float, chunk: int = 1024) -> EnergyReport:
    """Riesz s-energy of a point cloud: the double sum of
    ``w_i w_j |x_i - x_j|^(-s)`` over ordered pairs i != j.

    Coincident distinct atoms make the energy infinite; the report is then
    flagged divergent.
    """
    if not s > 0:
        raise ValueError(f"exponent s must be positive, got {s}")
    pts = measure.points
    w = measure.weights
    n = pts.shape[0]
    total = 0.0
    divergent = False
    for start in range(0, n, chunk):
        block = pts[start : start + chunk]
        diff = block[:, None, :] - pts[None, :, :]
        r = np.sqrt(np.sum(diff * diff, axis=2))
        rows = np.arange(block.shape[0])
        r[rows, start + rows] = np.inf  # exclude self-pairs
        if np.any(r == 0):
            divergent = True
            break
        total += float(np.sum((w[start : start + chunk, None] * w[None, :]) * r**-s))
    if divergent:
        return EnergyReport(s, float("inf"), "pairwise", {"points": n}, None, True)
    return EnergyReport(s, total, "pairwise", {"points": n}, None, False)


@lru_cache(maxsize=None)
def unit_cell_riesz(dim: int, s: float) -> float:
    """Mean of |u - v|^(-s) for u, v independent uniform in the unit cube
    of R^dim; needs s < dim.  Reduced to a polar integral with the radial
    part done in closed form."""
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    if not 0 < s < dim:
        raise ValueError(f"need 0 < s < {dim} for a finite same-cell term, got {s}")
    if dim == 2:

        def outer(theta: float) -> float:
            c, sn = math.cos(theta), math.sin(theta)
            r = 1.0 / max(c, sn)  # exit radius of the unit square, first octant
            return (
                r ** (2 - s) / (2 - s)
                - (c + sn) * r ** (3 - s) / (3 - s)
                + c * sn * r ** (4 - s) / (4 - s)
            )

        val, _ = integrate.quad(outer, 0.0, np.pi / 2, points=[np.pi / 4])
        return 4.0 * val

    def inner(theta: float, phi: float) -> float:
        st, ct = math.sin(theta), math.cos(theta)
        w = (st * math.cos(phi), st * math.sin(phi), ct)
        r = 1.0 / max(w)
        s1 = w[0] + w[1] + w[2]
        s2 = w[0] * w[1] + w[0] * w[2] + w[1] * w[2]
        s3 = w[0] * w[1] * w[2]
        return st * (
            r ** (3 - s) / (3 - s)
            - s1 * r ** (4 - s) / (4 - s)
            + s2 * r ** (5 - s) / (5 - s)
            - s3 * r ** (6 - s) / (6 - s)
        )

    val, _ = integrate.dblquad(inner, 0.0, np.pi / 2, 0.0, np.pi / 2,
                               epsabs=1e-10, epsrel=1e-10)
    return 8.0 * val


def riesz_energy_grid(measure: GridDensity, s: float) -> EnergyReport:
    """Riesz s-energy of a grid density via FFT autocorrelation.

    Distinct cells interact at midpoint distance; each cell's own
    contribution uses the exact uniform-cell mean :func:`unit_cell_riesz`.
    Needs s < dim, else the energy is flagged divergent.
    """
    if not s > 0:
        raise ValueError(f"exponent s must be positive, got {s}")
    dim = measure.dim
    h = measure.spacing
    shape = measure.values.shape
    info = {"cells": int(np.prod(shape)), "spacing": h}
    if s >= dim:
        return EnergyReport(s, float("inf"), "grid-fft", info, None, True)

    masses = measure.values * h**dim
    padded = tuple(sfft.next_fast_len(2 * n - 1) for n in shape)
    # kernel on minimum-image lags of the padded torus
    lags = []
    for p in padded:
        k = np.arange(p)
        lags.append(np.where(k <= p // 2, k, k - p))
    mesh = np.meshgrid(*lags, indexing="ij")
    dist2 = sum((g.astype(np.float64) * h) ** 2 for g in mesh)
    with np.errstate(divide="ignore"):
        kernel = dist2 ** (-0.5 * s)
    self_term = unit_cell_riesz(dim, s) * h**-s
    kernel[(0,) * dim] = self_term

    conv = sfft.irfftn(
        sfft.rfftn(masses, padded) * sfft.rfftn(kernel, padded), padded
    )
    core = conv[tuple(slice(0, n) for n in shape)]
    value = float(np.sum(masses * core))
    self_share = float(np.sum(masses**2) * self_term)
    err = self_share / value if value > 0 else None
    return EnergyReport(s, value, "grid-fft", info, err, False)


def fourier_sobolev(f: DirectionDensity, alpha: float, pad_factor: int = 32) -> EnergyReport:
    """Fractional Fourier energy of a projected line density:
    the integral of ``|fhat(xi)|^2 |xi|^alpha`` over frequencies.

    Uses the convention ``fhat(xi) = integral f(t) exp(-2 pi i t xi) dt``,
    approximated by the DFT of the histogram values; the frequency grid is
    refined ``pad_factor`` times by zero-padding.  The error estimate
    compares against half the padding.
    """
    if f.values.ndim != 1:
        raise ValueError("Fourier energy is defined for line densities only")
    if not alpha >= 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    if pad_factor < 1:
        raise ValueError("pad_factor must be at least 1")
    v = f.values
    h = f.spacing

    def energy(pad: int) -> float:
        m = sfft.next_fast_len(pad * v.shape[0])
        spec = np.abs(np.fft.fft(v, n=m)) * h
        xi = np.fft.fftfreq(m, d=h)
        dxi = 1.0 / (m * h)
        return float(np.sum(spec**2 * np.abs(xi) ** alpha) * dxi)

    value = energy(pad_factor)
    err = None
    if pad_factor >= 2:
        coarse = energy(pad_factor // 2)
        err = abs(value - coarse) / value if value > 0 else None
    return EnergyReport(
        alpha, value, "fft", {"bins": v.shape[0], "pad_factor": pad_factor}, err
    )


def _ball_supmasses(points: np.ndarray, weights: np.ndarray,
                    radii: np.ndarray, chunk: int = 512) -> np.ndarray:
    sup = np.zeros(len(radii))
    for start in range(0, points.shape[0], chunk):
        block = points[start : start + chunk]
        diff = block[:, None, :] - points[None, :, :]
        dist = np.sqrt(np.sum(diff * diff, axis=2))
        for k, r in enumerate(radii):
            masses = (dist <= r) @ weights
            sup[k] = max(sup[k], float(masses.max()))
    return sup


def frostman_exponent(measure, radii) -> float:
    """Least-squares growth exponent of sup-ball masses.

    Fits ``log sup_x mu(B(x, r))`` against ``log r`` over the given radii,
    taking the sup over support points (atoms, positive cell centres, or
    sphere bin centres with angular balls).  Degenerate inputs whose ball
    masses do not vary return 0.0 with a warning.
    """
    import warnings

    radii = np.sort(np.unique(np.asarray(radii, dtype=np.float64)))
    if radii.shape[0] < 2:
        raise ValueError("need at least two radii")
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")

    if isinstance(measure, DiscreteMeasure):
        sup = _ball_supmasses(measure.points, measure.weights, radii)
    elif isinstance(measure, GridDensity):
        keep = measure.cell_masses > 0
        sup = _ball_supmasses(measure.cell_centers[keep], measure.cell_masses[keep], radii)
    elif isinstance(measure, SphereDensity):
        sup = np.array(
            [float(np.max(cap_sums(measure.grid, measure.bin_masses, r))) for r in radii]
        )
    else:
        raise TypeError(f"unsupported measure type {type(measure).__name__}")

    if np.any(sup <= 0):
        raise ValueError("a ball radius is too small to capture any mass")
    if np.max(sup) - np.min(sup) <= 1e-12 * np.max(sup):
        warnings.warn("ball masses do not vary over the given radii; exponent 0")
        return 0.0
    slope = np.polyfit(np.log(radii), np.log(sup), 1)[0]
    return float(slope)


def frostman_holder_check(f: SphereDensity, p: float, radius: float):
    """Cap-mass bound for a q-normalised sphere density, q = p/(p-1).

    For each bin centre c returns
    ``lhs(c) = integral of (f/||f||_q)^p over the cap of angular radius r at c``
    and
    ``rhs(c) = area(cap(c))^(2-p) * ||f/||f||_q||_q^(q(p-1))``,
    where the cap is the union of bins whose centres lie within ``radius``.
    Discrete Hoelder makes lhs <= rhs hold exactly for 1 < p < 2.
    """
    if not 1 < p < 2:
        raise ValueError(f"p must lie in (1, 2), got {p}")
    if not radius > 0:
        raise ValueError("radius must be positive")
    if np.any(f.values < 0):
        raise ValueError("density values must be nonnegative")
    q = p / (p - 1.0)
    a = f.grid.areas
    qpow = float(np.sum(f.values**q * a))
    if qpow == 0:
        n = f.grid.resolution
        return np.zeros(n), np.zeros(n)
    fn = f.values / qpow ** (1.0 / q)
    stacked = np.stack([fn**p * a, a])
    sums = cap_sums(f.grid, stacked, radius)
    lhs = sums[0]
    qnorm_pow = float(np.sum(fn**q * a))  # 1 up to roundoff; kept explicit
    rhs = sums[1] ** (2.0 - p) * qnorm_pow ** (p - 1.0)
    return lhs, rhs


def _patch_center(z0: float, z1: float, p0: float, p1: float) -> np.ndarray:
    zc = 0.5 * (z0 + z1)
    pc = 0.5 * (p0 + p1)
    rho = math.sqrt(max(0.0, 1.0 - zc * zc))
    return np.array([rho * math.cos(pc), rho * math.sin(pc), zc])


def _refine_arc(g, sliver, t0: float, t1: float, tol: float,
                max_depth: int) -> tuple[float, float]:
    """Adaptive midpoint integration of g over the arc [t0, t1]; returns
    (value, residual_bound).  Unresolved pieces at max depth or below the
    width floor are dropped and bounded by ``sliver(width)``."""
    width = t1 - t0
    if width <= 1e-13:
        return 0.0, sliver(max(width, 0.0))
    mid = 0.5 * (t0 + t1)
    whole = width * g(mid)
    split = (mid - t0) * g(0.5 * (t0 + mid)) + (t1 - mid) * g(0.5 * (mid + t1))
    if math.isfinite(whole) and math.isfinite(split) and abs(split - whole) <= tol * abs(split):
        return split, 0.0
    if max_depth == 0:
        if math.isfinite(whole):
            return whole, abs(whole)
        return 0.0, sliver(t1 - t0)
    lv, le = _refine_arc(g, sliver, t0, mid, tol, max_depth - 1)
    rv, re = _refine_arc(g, sliver, mid, t1, tol, max_depth - 1)
    return lv + rv, le + re


def _refine_patch(g, sliver, z0: float, z1: float, p0: float, p1: float,
                  tol: float, max_depth: int) -> tuple[float, float]:
    """Same as :func:`_refine_arc` on a z/longitude patch of the 2-sphere
    (area element dz dphi)."""
    extent = (z1 - z0) + (p1 - p0)
    if extent <= 1e-13:
        return 0.0, sliver(max(extent, 0.0))
    area = (z1 - z0) * (p1 - p0)
    whole = area * g(_patch_center(z0, z1, p0, p1))
    zm, pm = 0.5 * (z0 + z1), 0.5 * (p0 + p1)
    quads = (
        (z0, zm, p0, pm),
        (z0, zm, pm, p1),
        (zm, z1, p0, pm),
        (zm, z1, pm, p1),
    )
    split = 0.0
    for (za, zb, pa, pb) in quads:
        split += (zb - za) * (pb - pa) * g(_patch_center(za, zb, pa, pb))
    if math.isfinite(whole) and math.isfinite(split) and abs(split - whole) <= tol * abs(split):
        return split, 0.0
    if max_depth == 0:
        if math.isfinite(whole):
            return whole, abs(whole)
        return 0.0, sliver((z1 - z0) + (p1 - p0))
    val = err = 0.0
    for (za, zb, pa, pb) in quads:
        v, e = _refine_patch(g, sliver, za, zb, pa, pb, tol, max_depth - 1)
        val += v
        err += e
    return val, err


def kaufman_integral(x, y, t: float, sigma) -> EnergyReport:
    """Sphere average of the inverse projected distance
    ``|pi_e(x) - pi_e(y)|^(-t)`` against a direction measure.

    ``sigma`` is a :class:`SphereGrid` (taken as the uniform probability
    measure) or a :class:`SphereDensity`.  Bins near the two singular
    directions (parallel to ``x - y``) are refined adaptively, assuming the
    density is constant on each bin; unresolved slivers are dropped and
    reported in ``error_estimate`` (relative).
    """
    if isinstance(sigma, SphereDensity):
        grid = sigma.grid
        bin_masses = sigma.bin_masses
    elif isinstance(sigma, SphereGrid):
        grid = sigma
        bin_masses = grid.areas / grid.total_area
    else:
        raise TypeError("sigma must be a SphereGrid or SphereDensity")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != (grid.dim,) or y.shape != (grid.dim,):
        raise ValueError("points must match the sphere dimension")
    if not 0 < t < grid.dim - 1:
        raise ValueError(f"need 0 < t < {grid.dim - 1}, got {t}")
    u = x - y
    dist = float(np.linalg.norm(u))
    if dist == 0:
        raise ValueError("points must be distinct")
    uhat = u / dist

    def g(e: np.ndarray) -> float:
        e = e / np.linalg.norm(e)
        # vector rejection avoids the 1 - cos^2 cancellation near +-uhat
        perp = u - float(u @ e) * e
        r = float(np.linalg.norm(perp))
        if r == 0.0:
            return math.inf
        return r**-t

    n = grid.resolution
    centers = grid.centers
    with np.errstate(divide="ignore"):
        sin2 = np.clip(1.0 - (centers @ uhat) ** 2, 0.0, None)
        gvals = (dist * np.sqrt(sin2)) ** -t

    align = np.abs(centers @ uhat)
    if grid.dim == 2:
        patch_r = np.pi / n
    else:
        patch_r = math.sqrt(4.0 * np.pi / n)
    flag = align >= math.cos(4.0 * patch_r)

    value = float(np.sum(np.where(flag, 0.0, gvals * bin_masses)))
    residual = 0.0
    tol, max_depth = 1e-4, 48

    def arc_sliver(width: float) -> float:
        # window of that width around the singular direction, sin psi >= 2 psi / pi
        return dist**-t * 2.0 * (np.pi / 2.0) ** t * width ** (1.0 - t) / (1.0 - t)

    def patch_sliver(extent: float) -> float:
        rho = extent
        return (
            dist**-t * 2.0 * np.pi * (np.pi / 2.0) ** t * rho ** (2.0 - t) / (2.0 - t)
        )

    if grid.dim == 2:
        width = 2.0 * np.pi / n

        def garc(theta: float) -> float:
            return g(np.array([math.cos(theta), math.sin(theta)]))

        for b in np.flatnonzero(flag):
            t0 = b * width
            dens = bin_masses[b] / grid.areas[b]
            v, e = _refine_arc(garc, arc_sliver, t0, t0 + width, tol, max_depth)
            value += dens * v
            residual += dens * e
    else:
        bounds = grid.ring_bounds
        ring = grid.bin_ring
        start = grid.ring_start
        counts = grid.ring_counts
        for b in np.flatnonzero(flag):
            l = ring[b]
            j = b - start[l]
            dphi = 2.0 * np.pi / counts[l]
            dens = bin_masses[b] / grid.areas[b]
            v, e = _refine_patch(
                g, patch_sliver, bounds[l + 1], bounds[l], j * dphi, (j + 1) * dphi,
                tol, max_depth,
            )
            value += dens * v
            residual += dens * e

    err = residual / value if value > 0 else None
    return EnergyReport(t, value, "sphere-quadrature", {"bins": n}, err, False)
