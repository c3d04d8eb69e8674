"""Vantage-point scanning, exponent bookkeeping, and box dimensions."""
import numpy as np
import pytest

from radproj.gallery import uniform_segment, uniform_square_grid
from radproj.measures import from_points
from radproj.scan import (
    ScanParams,
    admissible_p,
    box_dimension,
    extract_bad_set,
    scan_centres,
)


def brute_box_count(points, scale):
    """Independent anchored box counter."""
    lo = points.min(axis=0)
    seen = set()
    for pt in points:
        seen.add(tuple(np.floor((pt - lo) / scale).astype(int)))
    return len(seen)


# ------------------------------------------------------------ admissible_p

def test_admissible_p_hand_values():
    # min(2 - t/1, t/(2 - s)) at d=2
    assert admissible_p(2, 1.5, 0.8) == pytest.approx(min(1.2, 1.6))
    assert admissible_p(2, 1.5, 0.8) == 1.2
    assert admissible_p(2, 1.5, 0.75) == pytest.approx(min(1.25, 1.5))
    assert admissible_p(2, 1.5, 0.75) == 1.25


def test_admissible_p_domain_rejections():
    with pytest.raises(ValueError, match="1 < s < 2"):
        admissible_p(2, 0.8, 0.7)
    with pytest.raises(ValueError, match="< t <"):
        admissible_p(2, 1.5, 0.4)  # t below 2(d-1)-s = 0.5
    with pytest.raises(ValueError, match="< t <"):
        admissible_p(2, 1.5, 1.0)
    with pytest.raises(ValueError, match="2 < s < 3"):
        admissible_p(3, 1.5, 2.7)


def test_admissible_p_sweep_stays_in_unit_interval(rng):
    for dim in (2, 3):
        m = dim - 1
        for _ in range(500):
            s = rng.uniform(m, dim)
            t = rng.uniform(2 * m - s, m)
            if not (m < s < dim and 2 * m - s < t < m):
                continue
            val = admissible_p(dim, s, t)
            assert 1.0 < val < 2.0


def test_scan_params_properties():
    params = ScanParams(2, 1.5, 0.8, 1.4)
    assert params.p_max == pytest.approx(1.2)
    assert params.delta_p == pytest.approx(0.2)
    assert params.bad_dim_bound == pytest.approx(0.5)
    below = ScanParams(2, 1.5, 0.8, 1.1)
    assert below.delta_p == 0.0
    with pytest.raises(ValueError, match="p > 1"):
        ScanParams(2, 1.5, 0.8, 1.0)


# ------------------------------------------------------------ box dimension

def test_box_dimension_exact_grid():
    # 32x32 lattice: counts are exactly 4^k, slope exactly 2
    xs = (np.arange(32) + 0.5) / 32
    pts = np.stack(np.meshgrid(xs, xs), axis=-1).reshape(-1, 2)
    result = box_dimension(pts, [0.5, 0.25, 0.125, 0.0625])
    assert result.estimate == pytest.approx(2.0, abs=1e-9)
    assert result.band < 1e-9
    np.testing.assert_array_equal(result.counts, [4, 16, 64, 256])


def test_box_dimension_counts_match_bruteforce(rng):
    pts = rng.uniform(size=(300, 2))
    scales = [0.4, 0.2, 0.1, 0.05]
    result = box_dimension(pts, scales)
    for r, c in zip(result.scales, result.counts):
        assert c == brute_box_count(pts, r)


def test_box_dimension_line_is_one(rng):
    t = rng.uniform(size=500)
    pts = np.stack([t, 0.3 * np.ones_like(t)], axis=1)
    result = box_dimension(pts, [0.25, 0.125, 0.0625, 0.03125])
    assert result.estimate == pytest.approx(1.0, abs=0.1)


def test_box_dimension_degenerate_and_errors():
    single = box_dimension(np.tile([[1.0, 2.0]], (50, 1)), [0.5, 0.25])
    assert single.estimate == 0.0 and single.band == 0.0
    with pytest.raises(ValueError, match="at least 10 points"):
        box_dimension(np.array([[0.0, 0.0], [1.0, 1.0]]), [0.5, 0.25, 0.125, 0.0625])
    with pytest.raises(ValueError, match="at least 4 scales"):
        box_dimension(np.random.default_rng(0).uniform(size=(20, 2)), [0.5, 0.25])
    with pytest.raises(ValueError, match="positive"):
        box_dimension(np.random.default_rng(0).uniform(size=(20, 2)),
                      [0.5, 0.25, -0.1, 0.05])


# ------------------------------------------------------------------- scans

def brute_norm(mu, centre, p, resolution):
    """Radial p-power norm oracle: direct angle histogram."""
    diff = mu.points - centre
    theta = np.mod(np.arctan2(diff[:, 1], diff[:, 0]), 2 * np.pi)
    width = 2 * np.pi / resolution
    idx = np.minimum((theta / width).astype(int), resolution - 1)
    hist = np.bincount(idx, weights=mu.weights, minlength=resolution)
    return float(np.sum((hist / width) ** p) * width)


def test_scan_norms_match_bruteforce():
    mu = uniform_segment(200, seed=1)
    rep = scan_centres(mu, [(-1.0, -1.0), (2.0, 1.0)], 0.5, p=1.7,
                       sphere_resolution=64)
    for k in np.flatnonzero(rep.scanned)[:10]:
        expected = brute_norm(mu, rep.centres[k], 1.7, 64)
        assert rep.norms_coarse[k] == pytest.approx(expected, rel=1e-12)


def test_scan_margin_masks_near_support():
    mu = from_points([[0.0, 0.0]])
    rep = scan_centres(mu, [(-1.0, -1.0), (1.0, 1.0)], 0.25, p=2.0, margin=0.6)
    dist = np.linalg.norm(rep.centres, axis=1)
    np.testing.assert_array_equal(rep.scanned, dist > 0.6)
    assert np.all(np.isnan(rep.norms_coarse[~rep.scanned]))


def test_scan_dirac_all_bad():
    mu = from_points([[0.05, 0.05]])
    rep = scan_centres(mu, [(-1.0, -1.0), (1.0, 1.0)], 0.2, p=2.0)
    assert np.array_equal(rep.bad, rep.scanned)
    assert rep.bad.sum() > 0


def test_scan_threads_identical():
    mu = uniform_segment(400, seed=5)
    kwargs = dict(p=2.0, sphere_resolution=128, margin=0.1)
    one = scan_centres(mu, [(-1.0, -1.0), (2.0, 1.0)], 0.1, threads=1, **kwargs)
    many = scan_centres(mu, [(-1.0, -1.0), (2.0, 1.0)], 0.1, threads=8, **kwargs)
    np.testing.assert_array_equal(one.norms_coarse, many.norms_coarse)
    np.testing.assert_array_equal(one.norms_fine, many.norms_fine)
    np.testing.assert_array_equal(one.bad, many.bad)


def test_scan_grid_measure_uses_cell_midpoints():
    gd = uniform_square_grid((0.0, 0.0), (1.0, 1.0), resolution=48)
    rep = scan_centres(gd, [(-0.6, -0.6), (1.6, 1.6)], 0.2, p=2.0, margin=0.15)
    assert rep.scanned.sum() > 0
    assert rep.bad.sum() == 0


def test_scan_report_roundtrip_and_extract():
    mu = uniform_segment(300, seed=7)
    rep = scan_centres(mu, [(-1.0, -1.0), (2.0, 1.0)], 0.1, p=2.0)
    doc = rep.to_dict()
    assert doc["centres"] == rep.centres.shape[0]
    assert doc["bad"] == int(rep.bad.sum())
    strict = extract_bad_set(rep, threshold=10.0)
    assert strict.shape[0] <= rep.bad_points.shape[0]
    np.testing.assert_array_equal(extract_bad_set(rep), rep.bad_points)


def test_scan_params_and_p_interplay():
    mu = from_points([[0.0, 0.0]])
    params = ScanParams(2, 1.5, 0.8, 1.2)
    rep = scan_centres(mu, [(-1.0, -1.0), (1.0, 1.0)], 0.5, params=params)
    assert rep.p == 1.2
    assert rep.bound == pytest.approx(0.5)
    with pytest.raises(ValueError, match="p given twice"):
        scan_centres(mu, [(-1.0, -1.0), (1.0, 1.0)], 0.5, p=1.5, params=params)
    with pytest.raises(ValueError, match="required"):
        scan_centres(mu, [(-1.0, -1.0), (1.0, 1.0)], 0.5)


def test_scan_rejects_bad_region():
    mu = from_points([[0.0, 0.0]])
    with pytest.raises(ValueError, match="region"):
        scan_centres(mu, [(1.0, 1.0), (0.0, 0.0)], 0.5, p=2.0)
