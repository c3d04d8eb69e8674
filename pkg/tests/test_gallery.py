"""Bundled measure constructions."""
import numpy as np
import pytest

from radproj.gallery import (
    PAIR_NAMES,
    annulus_grid,
    gaussian_mixture_grid,
    gaussian_mixture_samples,
    ifs_preset,
    measure_pair,
    ring_atoms,
    uniform_disk_samples,
    uniform_square_grid,
)
from radproj.measures import DiscreteMeasure, GridDensity, support_distance
from radproj.scan import box_dimension


def test_gaussian_mixture_grid_mass_and_peaks():
    gd = gaussian_mixture_grid([(-1.0, 0.0), (1.0, 0.0)], [0.2, 0.2], [0.7, 0.3],
                               resolution=200)
    assert gd.total_mass == pytest.approx(1.0, abs=1e-9)
    # the heavier bump carries the higher peak
    left = gd.values[:, : gd.values.shape[1]]
    peak = np.unravel_index(np.argmax(gd.values), gd.values.shape)
    centre = gd.origin + (np.asarray(peak) + 0.5) * gd.spacing
    np.testing.assert_allclose(centre, [-1.0, 0.0], atol=2 * gd.spacing)
    del left


def test_gaussian_mixture_samples_weights_and_seeded():
    a = gaussian_mixture_samples(500, 3, [(0.0, 0.0)], [0.5], [1.0])
    b = gaussian_mixture_samples(500, 3, [(0.0, 0.0)], [0.5], [1.0])
    np.testing.assert_array_equal(a.points, b.points)
    assert a.total_mass == pytest.approx(1.0, abs=1e-12)


def test_annulus_zero_inside_hole():
    gd = annulus_grid(resolution=256)
    r = np.linalg.norm(gd.cell_centers, axis=1)
    inside = r < 0.75 - gd.spacing
    assert np.all(gd.cell_masses[inside] == 0.0)
    assert gd.total_mass == pytest.approx(1.0, abs=1e-9)


def test_annulus_validates_geometry():
    with pytest.raises(ValueError, match="r_inner"):
        annulus_grid(r_inner=2.0, r_outer=1.0)
    with pytest.raises(ValueError, match="ramp"):
        annulus_grid(ramp=5.0)


def test_uniform_square_grid_exact_indicator():
    gd = uniform_square_grid((0.0, 0.0), (1.0, 1.0), resolution=64)
    pos = gd.values[gd.values > 0]
    np.testing.assert_allclose(pos, pos[0])  # constant density inside
    assert gd.total_mass == pytest.approx(1.0, abs=1e-12)


def test_disk_samples_inside():
    mu = uniform_disk_samples(2000, 1, center=(1.0, -2.0), radius=0.7)
    r = np.linalg.norm(mu.points - [1.0, -2.0], axis=1)
    assert r.max() <= 0.7 + 1e-12


def test_ring_atoms_layout():
    nu = ring_atoms([2.0, 0.0], 0.5, 8)
    r = np.linalg.norm(nu.points - [2.0, 0.0], axis=1)
    np.testing.assert_allclose(r, 0.5, atol=1e-12)
    np.testing.assert_allclose(nu.weights, 1.0 / 8)


def test_ifs_presets_dimensions():
    sier = ifs_preset("sierpinski", 20000, seed=2)
    est = box_dimension(sier.points, [0.25, 0.125, 0.0625, 0.03125]).estimate
    assert est == pytest.approx(np.log(3) / np.log(2), abs=0.15)
    cantor = ifs_preset("cantor-line", 20000, seed=2)
    est = box_dimension(cantor.points, [0.25, 0.125, 0.0625, 0.03125]).estimate
    assert est == pytest.approx(np.log(2) / np.log(3), abs=0.1)
    with pytest.raises(ValueError, match="unknown preset"):
        ifs_preset("pentaflake", 100, seed=0)


@pytest.mark.parametrize("name", PAIR_NAMES)
def test_pairs_are_separated(name):
    mu, nu = measure_pair(name, resolution=128)
    assert isinstance(mu, GridDensity) and isinstance(nu, DiscreteMeasure)
    assert mu.total_mass == pytest.approx(1.0, abs=1e-9)
    assert nu.total_mass == pytest.approx(1.0, abs=1e-12)
    for x in nu.points:
        assert support_distance(mu, x) > 0.9


def test_pairs_deterministic():
    a = measure_pair("gaussians", resolution=64)[1]
    b = measure_pair("gaussians", resolution=64)[1]
    np.testing.assert_array_equal(a.points, b.points)
    with pytest.raises(ValueError, match="unknown pair"):
        measure_pair("spiral")
