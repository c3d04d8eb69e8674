"""File formats for measures, densities, reports and run manifests.

Measures travel as JSON (atoms or grid), point clouds additionally as CSV
with an optional trailing weight column.  Densities and scan tables are
written as CSV, sphere views optionally as ASCII PGM images.  Every run
directory gets a manifest with content hashes of the artifacts.
"""
from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
from pathlib import Path

import numpy as np

from .measures import DiscreteMeasure, GridDensity
from .project import DirectionDensity
from .sphere import SphereDensity, SphereGrid, make_sphere_grid

__all__ = [
    "save_measure",
    "load_measure",
    "load_points_csv",
    "save_points_csv",
    "save_direction_density",
    "save_sphere_density",
    "save_sphere_grid",
    "load_sphere_grid",
    "save_scan_table",
    "write_pgm",
    "sha256_file",
    "write_manifest",
    "write_json",
]


def save_measure(measure, path) -> None:
    """Write a measure as JSON (kind "atoms" or "grid")."""
    path = Path(path)
    if isinstance(measure, DiscreteMeasure):
        doc = {
            "kind": "atoms",
            "dim": measure.dim,
            "points": measure.points.tolist(),
            "weights": measure.weights.tolist(),
        }
    elif isinstance(measure, GridDensity):
        doc = {
            "kind": "grid",
            "dim": measure.dim,
            "origin": measure.origin.tolist(),
            "spacing": measure.spacing,
            "shape": list(measure.values.shape),
            "values": measure.values.ravel().tolist(),
        }
    else:
        raise TypeError(f"cannot serialise {type(measure).__name__}")
    path.write_text(json.dumps(doc))


def load_measure(path):
    """Read a measure written by :func:`save_measure` (validates on build)."""
    doc = json.loads(Path(path).read_text())
    kind = doc.get("kind")
    if kind == "atoms":
        return DiscreteMeasure(np.asarray(doc["points"]), np.asarray(doc["weights"]))
    if kind == "grid":
        values = np.asarray(doc["values"], dtype=np.float64).reshape(doc["shape"])
        return GridDensity(np.asarray(doc["origin"]), float(doc["spacing"]), values)
    raise ValueError(f"unknown measure kind {kind!r} in {path}")


def load_points_csv(path, dim: int | None = None) -> DiscreteMeasure:
    """Point cloud from CSV rows ``x,y[,z][,weight]``.

    Columns beyond the ambient dimension are taken as weights (the total is
    normalised to 1).  The dimension comes from ``dim``, else from a header
    row naming the columns, else from the column count with three columns
    read as a weighted planar cloud.
    """
    from .measures import from_points

    path = Path(path)
    with path.open() as fh:
        first = fh.readline()
    skip = 0
    header = None
    try:
        [float(tok) for tok in first.strip().split(",")]
    except ValueError:
        skip = 1
        header = [tok.strip().lower() for tok in first.strip().split(",")]
    data = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
    ncols = data.shape[1]
    if dim is None:
        if header is not None and "z" in header:
            dim = 3
        elif ncols == 2:
            dim = 2
        elif ncols == 3:
            dim = 2  # x, y, weight by convention
        elif ncols == 4:
            dim = 3
        else:
            raise ValueError(f"expected 2-4 columns in {path}, got {ncols}")
    if ncols == dim:
        return from_points(data)
    if ncols == dim + 1:
        return from_points(data[:, :dim], data[:, dim])
    raise ValueError(
        f"{path}: {ncols} columns do not fit a {dim}-dimensional cloud"
    )


def save_points_csv(measure: DiscreteMeasure, path) -> None:
    header = ",".join("xyz"[: measure.dim]) + ",weight"
    data = np.column_stack([measure.points, measure.weights])
    np.savetxt(path, data, delimiter=",", header=header, comments="")


def save_direction_density(dens: DirectionDensity, path) -> None:
    """Projected density as CSV: frame coordinates then the value."""
    path = Path(path)
    axes = dens.spec.axes()
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        if dens.values.ndim == 1:
            w.writerow(["t", "value"])
            for t, v in zip(axes[0], dens.values):
                w.writerow([repr(float(t)), repr(float(v))])
        else:
            w.writerow(["t1", "t2", "value"])
            for i, a in enumerate(axes[0]):
                for j, b in enumerate(axes[1]):
                    w.writerow([repr(float(a)), repr(float(b)), repr(float(dens.values[i, j]))])


def save_sphere_density(dens: SphereDensity, path) -> None:
    """Sphere density as CSV: bin index, centre components, area, value."""
    path = Path(path)
    g = dens.grid
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin"] + [f"c{k}" for k in range(g.dim)] + ["area", "value"])
        for b in range(g.resolution):
            w.writerow(
                [b]
                + [repr(float(c)) for c in g.centers[b]]
                + [repr(float(g.areas[b])), repr(float(dens.values[b]))]
            )


def save_sphere_grid(grid: SphereGrid, path) -> None:
    doc = {
        "dim": grid.dim,
        "resolution": grid.resolution,
        "centers": grid.centers.tolist(),
        "areas": grid.areas.tolist(),
    }
    Path(path).write_text(json.dumps(doc))


def load_sphere_grid(path) -> SphereGrid:
    """Rebuild the deterministic partition and verify the stored geometry."""
    doc = json.loads(Path(path).read_text())
    grid = make_sphere_grid(int(doc["dim"]), int(doc["resolution"]))
    if not np.allclose(grid.centers, np.asarray(doc["centers"]), atol=1e-12):
        raise ValueError(f"sphere grid in {path} does not match the bundled partition")
    return grid


def save_scan_table(report, path) -> None:
    """Per-centre scan table as CSV."""
    path = Path(path)
    dim = report.centres.shape[1]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            list("xyz"[:dim]) + ["scanned", "norm_coarse", "norm_fine", "ratio", "bad"]
        )
        ratios = report.ratios
        for k in range(report.centres.shape[0]):
            w.writerow(
                [repr(float(c)) for c in report.centres[k]]
                + [
                    int(report.scanned[k]),
                    repr(float(report.norms_coarse[k])),
                    repr(float(report.norms_fine[k])),
                    repr(float(ratios[k])),
                    int(report.bad[k]),
                ]
            )


def write_pgm(path, array: np.ndarray, maxval: int = 255, log_scale: bool = False) -> None:
    """Greyscale ASCII PGM of a 2d array (row 0 at the top)."""
    arr = np.asarray(array, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("PGM output needs a 2d array")
    if log_scale:
        arr = np.log1p(np.clip(arr, 0.0, None))
    top = arr.max()
    scaled = np.zeros_like(arr) if top <= 0 else arr / top
    pix = np.clip(np.rint(scaled * maxval), 0, maxval).astype(np.int64)
    lines = ["P2", f"{arr.shape[1]} {arr.shape[0]}", f"{maxval}"]
    for row in pix:
        lines.append(" ".join(map(str, row)))
    Path(path).write_text("\n".join(lines) + "\n")


def write_json(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, config: dict, artifacts: list[str],
                   extra: dict | None = None) -> Path:
    """Write ``manifest.json`` with config echo and artifact hashes."""
    import scipy

    from . import __version__

    out_dir = Path(out_dir)
    entries = {}
    for name in artifacts:
        p = out_dir / name
        entries[name] = {"sha256": sha256_file(p), "bytes": p.stat().st_size}
    canon = json.dumps(config, sort_keys=True).encode()
    doc = {
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "versions": {
            "radproj": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "config": config,
        "config_sha256": hashlib.sha256(canon).hexdigest(),
        "artifacts": entries,
    }
    if extra:
        doc.update(extra)
    path = out_dir / "manifest.json"
    write_json(doc, path)
    return path
