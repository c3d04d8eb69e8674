"""Command line front end.

Subcommands build measures from a TOML config, run one computation each,
and write artifacts plus a hashed manifest into an output directory:

* ``gen``       materialise the configured measure,
* ``energy``    Riesz or Fourier-side energy,
* ``project``   orthogonal projection histogram,
* ``radial``    radial pushforward seen from a centre,
* ``identity``  both sides of the projection identity,
* ``scan``      vantage-point scan for unstable radial norms,
* ``boxdim``    box-counting dimension of a point set.

Any config value can be overridden on the command line with a flag of the
same dotted name, for example ``--identity.sphere 360`` or
``--measure.resolution=256``.  Exit codes: 0 on success, 1 when a
configured numerical acceptance bound is violated, 2 on usage, config or
file errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import gallery, io
from .energy import fourier_sobolev, riesz_energy, riesz_energy_grid
from .identity import identity_report, mollification_limit_study
from .measures import DiscreteMeasure, GridDensity, from_points
from .project import Direction, orth_project, radial_project, weight_riesz
from .scan import ScanParams, box_dimension, scan_centres
from .sphere import make_sphere_grid

_SUBCOMMANDS = ("gen", "energy", "project", "radial", "identity", "scan", "boxdim")


class CliError(Exception):
    """Raised for condition mapped to exit code 2; carries a category."""

    def __init__(self, category: str, message: str):
        super().__init__(message)
        self.category = category


def _load_config(path_arg: str | None) -> dict:
    if path_arg is None:
        return {}
    path = Path(path_arg)
    if not path.exists():
        from importlib import resources

        name = path_arg if path_arg.endswith(".toml") else path_arg + ".toml"
        ref = resources.files("radproj") / "configs" / name
        if ref.is_file():
            return tomllib.loads(ref.read_text())
        raise CliError("config", f"config not found: {path_arg}")
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise CliError("config", f"{path}: {exc}") from exc


def _parse_override(token: str, follower: str | None) -> tuple[str, object, bool]:
    """Parse ``--a.b=v`` or ``--a.b v``; returns (dotted, value, used_follower)."""
    body = token[2:]
    if "=" in body:
        dotted, raw = body.split("=", 1)
        used = False
    else:
        dotted = body
        if follower is None:
            raise CliError("usage", f"flag --{body} needs a value")
        raw = follower
        used = True
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw  # bare string
    return dotted, value, used


def _apply_overrides(config: dict, unknown: list[str]) -> dict:
    i = 0
    while i < len(unknown):
        token = unknown[i]
        if not token.startswith("--") or token == "--":
            raise CliError("usage", f"unrecognised argument: {token}")
        follower = unknown[i + 1] if i + 1 < len(unknown) else None
        dotted, value, used = _parse_override(token, follower)
        keys = dotted.split(".")
        if not all(keys):
            raise CliError("usage", f"bad override name: {token}")
        node = config
        for k in keys[:-1]:
            node = node.setdefault(k, {})
            if not isinstance(node, dict):
                raise CliError("config", f"override {dotted} clashes with a scalar")
        node[keys[-1]] = value
        i += 2 if used else 1
    return config


def _section(config: dict, name: str) -> dict:
    sec = config.get(name, {})
    if not isinstance(sec, dict):
        raise CliError("config", f"[{name}] must be a table")
    return sec


def _need(sec: dict, key: str, where: str):
    if key not in sec:
        raise CliError("config", f"missing {where}.{key}")
    return sec[key]


def build_measure(sec: dict, seed: int, where: str = "measure"):
    """Construct a measure from a config table."""
    kind = _need(sec, "kind", where)
    try:
        if kind == "atoms":
            return from_points(_need(sec, "points", where), sec.get("weights"))
        if kind == "file":
            path = Path(_need(sec, "path", where))
            if not path.exists():
                raise CliError("io", f"measure file not found: {path}")
            if path.suffix == ".csv":
                return io.load_points_csv(path, dim=sec.get("dim"))
            return io.load_measure(path)
        if kind == "gaussian-mixture-grid":
            return gallery.gaussian_mixture_grid(
                _need(sec, "centers", where), _need(sec, "sigmas", where),
                _need(sec, "weights", where), resolution=sec.get("resolution", 512),
                pad_sigmas=sec.get("pad_sigmas", 4.0),
            )
        if kind == "gaussian-mixture-samples":
            return gallery.gaussian_mixture_samples(
                sec.get("n", 10000), sec.get("seed", seed),
                _need(sec, "centers", where), _need(sec, "sigmas", where),
                _need(sec, "weights", where), pad_sigmas=sec.get("pad_sigmas", 4.0),
            )
        if kind == "annulus-grid":
            return gallery.annulus_grid(
                sec.get("center", (0.0, 0.0)), sec.get("r_inner", 0.75),
                sec.get("r_outer", 1.5), sec.get("ramp", 0.12),
                resolution=sec.get("resolution", 512),
            )
        if kind == "segment":
            return gallery.uniform_segment(
                sec.get("n", 10000), sec.get("seed", seed),
                sec.get("a", (0.0, 0.0)), sec.get("b", (1.0, 0.0)),
            )
        if kind == "square-samples":
            return gallery.uniform_square_samples(
                sec.get("n", 10000), sec.get("seed", seed),
                sec.get("lo", (0.0, 0.0)), sec.get("hi", (1.0, 1.0)),
            )
        if kind == "square-grid":
            return gallery.uniform_square_grid(
                sec.get("lo", (0.0, 0.0)), sec.get("hi", (1.0, 1.0)),
                resolution=sec.get("resolution", 256),
            )
        if kind == "disk-samples":
            return gallery.uniform_disk_samples(
                sec.get("n", 10000), sec.get("seed", seed),
                sec.get("center", (0.0, 0.0)), sec.get("radius", 1.0),
            )
        if kind == "ring-atoms":
            return gallery.ring_atoms(
                sec.get("center", (0.0, 0.0)), sec.get("radius", 1.0),
                sec.get("count", 12), sec.get("weights"),
            )
        if kind == "ifs":
            return gallery.ifs_preset(
                _need(sec, "preset", where), sec.get("n", 10000), sec.get("seed", seed)
            )
    except (ValueError, TypeError) as exc:
        raise CliError("config", f"[{where}] {exc}") from exc
    raise CliError("config", f"unknown measure kind {kind!r} in [{where}]")


def _build_pair(config: dict, seed: int):
    msec = _section(config, "measure")
    if msec.get("kind") == "pair":
        name = _need(msec, "name", "measure")
        try:
            return gallery.measure_pair(name, resolution=msec.get("resolution", 512))
        except ValueError as exc:
            raise CliError("config", str(exc)) from exc
    mu = build_measure(msec, seed)
    nsec = _section(config, "nu")
    if not nsec:
        raise CliError("config", "identity needs a [nu] table or measure.kind='pair'")
    nu = build_measure(nsec, seed, where="nu")
    return mu, nu


def _out_dir(args, config: dict) -> Path:
    out = args.out or _section(config, "run").get("out")
    if out is None:
        raise CliError("usage", "an output directory is required (--out or run.out)")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _seed(args, config: dict) -> int:
    if args.seed is not None:
        return args.seed
    return int(_section(config, "run").get("seed", 0))


def _measure_artifacts(measure, out: Path, stem: str = "measure") -> list[str]:
    names = []
    io.save_measure(measure, out / f"{stem}.json")
    names.append(f"{stem}.json")
    if isinstance(measure, DiscreteMeasure):
        io.save_points_csv(measure, out / f"{stem}.csv")
        names.append(f"{stem}.csv")
    else:
        io.write_pgm(out / f"{stem}.pgm", measure.values.T[::-1], log_scale=True)
        names.append(f"{stem}.pgm")
    return names


def cmd_gen(args, config: dict) -> int:
    seed = _seed(args, config)
    out = _out_dir(args, config)
    measure = build_measure(_section(config, "measure"), seed)
    names = _measure_artifacts(measure, out)
    io.write_manifest(out, config, names)
    print(f"gen: wrote {', '.join(names)} to {out}")
    return 0


def cmd_energy(args, config: dict) -> int:
    seed = _seed(args, config)
    out = _out_dir(args, config)
    measure = build_measure(_section(config, "measure"), seed)
    esec = _section(config, "energy")
    xsec = _section(config, "exponents")
    method = esec.get("method", "auto")
    names = []
    if method == "fourier":
        alpha = float(_need(xsec, "alpha", "exponents"))
        psec = _section(config, "projection")
        direction = Direction(np.asarray(_need(psec, "direction", "projection"), dtype=float))
        dens = orth_project(measure, direction, bins=int(psec.get("bins", 512)))
        io.save_direction_density(dens, out / "projection.csv")
        names.append("projection.csv")
        report = fourier_sobolev(dens, alpha)
    else:
        s = float(_need(xsec, "s", "exponents"))
        if method == "auto":
            method = "grid" if isinstance(measure, GridDensity) else "pairwise"
        if method == "grid":
            if not isinstance(measure, GridDensity):
                raise CliError("config", "energy.method='grid' needs a grid measure")
            report = riesz_energy_grid(measure, s)
        elif method == "pairwise":
            if not isinstance(measure, DiscreteMeasure):
                raise CliError("config", "energy.method='pairwise' needs an atomic measure")
            report = riesz_energy(measure, s)
        else:
            raise CliError("config", f"unknown energy.method {method!r}")
    io.write_json(report.to_dict(), out / "energy.json")
    names.append("energy.json")
    io.write_manifest(out, config, names)
    print(
        f"energy: exponent={report.exponent:g} value={report.value:.10g} "
        f"method={report.method}"
    )
    return 0


def cmd_project(args, config: dict) -> int:
    seed = _seed(args, config)
    out = _out_dir(args, config)
    measure = build_measure(_section(config, "measure"), seed)
    psec = _section(config, "projection")
    direction = Direction(np.asarray(_need(psec, "direction", "projection"), dtype=float))
    dens = orth_project(measure, direction, bins=int(psec.get("bins", 512)))
    names = ["projection.csv"]
    io.save_direction_density(dens, out / "projection.csv")
    if dens.values.ndim == 2:
        io.write_pgm(out / "projection.pgm", dens.values.T[::-1], log_scale=True)
        names.append("projection.pgm")
    summary = {
        "direction": direction.vector.tolist(),
        "bins": list(dens.values.shape),
        "spacing": dens.spacing,
        "mass": dens.mass,
        "max_density": float(dens.values.max()),
    }
    io.write_json(summary, out / "projection.json")
    names.append("projection.json")
    io.write_manifest(out, config, names)
    print(f"project: mass={dens.mass:.10g} max={summary['max_density']:.10g}")
    return 0


def cmd_radial(args, config: dict) -> int:
    seed = _seed(args, config)
    out = _out_dir(args, config)
    measure = build_measure(_section(config, "measure"), seed)
    rsec = _section(config, "radial")
    centre = np.asarray(_need(rsec, "centre", "radial"), dtype=float)
    grid = make_sphere_grid(measure.dim, int(rsec.get("sphere", 720)))
    target = measure
    if rsec.get("weighted", False):
        target = weight_riesz(measure, centre)
    dens = radial_project(
        target, centre, grid, seed=seed,
        samples_per_cell=int(rsec.get("samples_per_cell", 4)),
    )
    io.save_sphere_density(dens, out / "radial.csv")
    summary = {
        "centre": centre.tolist(),
        "sphere": grid.resolution,
        "weighted": bool(rsec.get("weighted", False)),
        "mass": dens.mass,
        "max_density": float(dens.values.max()),
    }
    io.write_json(summary, out / "radial.json")
    names = ["radial.csv", "radial.json"]
    io.write_manifest(out, config, names)
    print(f"radial: mass={dens.mass:.10g} max={summary['max_density']:.10g}")
    return 0


def cmd_identity(args, config: dict) -> int:
    seed = _seed(args, config)
    out = _out_dir(args, config)
    mu, nu = _build_pair(config, seed)
    lsec = _section(config, "identity")
    p = float(_section(config, "exponents").get("p", lsec.get("p", 2.0)))
    sphere_resolution = int(lsec.get("sphere", 720))
    bins = int(lsec.get("bins", 512))
    spc = int(lsec.get("samples_per_cell", 4))
    try:
        report = identity_report(
            mu, nu, p, sphere_resolution=sphere_resolution, bins=bins,
            seed=seed, samples_per_cell=spc,
        )
    except ValueError as exc:
        raise CliError("config", str(exc)) from exc
    doc = report.to_dict()
    names = ["identity.json"]

    scales = lsec.get("mollify_scales")
    if scales:
        if not isinstance(mu, DiscreteMeasure):
            raise CliError("config", "mollify_scales needs an atomic measure")
        study = mollification_limit_study(
            mu, nu, p, scales,
            resolution=int(lsec.get("mollify_resolution", 256)),
            sphere_resolution=min(sphere_resolution, 360),
            bins=min(bins, 256), seed=seed, samples_per_cell=spc,
        )
        io.write_json(study.to_dict(), out / "mollify.json")
        names.append("mollify.json")

    if args.dump_intermediates:
        sphere = make_sphere_grid(mu.dim, sphere_resolution)
        from .identity import identity_lhs, identity_rhs

        _, dens_list, _ = identity_lhs(mu, nu, p, sphere, seed=seed,
                                     samples_per_cell=spc, details=True)
        for i, dens in enumerate(dens_list):
            name = f"radial_atom_{i}.csv"
            io.save_sphere_density(dens, out / name)
            names.append(name)
        _, pairs, _ = identity_rhs(mu, nu, p, sphere, bins=bins, details=True)
        stride = max(1, len(pairs) // 8)
        for b in range(0, len(pairs), stride):
            _, pm, _ = pairs[b]
            name = f"projection_dir_{b}.csv"
            io.save_direction_density(pm, out / name)
            names.append(name)

    io.write_json(doc, out / "identity.json")
    io.write_manifest(out, config, names)
    print(
        f"identity: p={report.p:g} lhs={report.lhs:.10g} rhs={report.rhs:.10g} "
        f"gap={report.gap:.4%}"
    )
    max_gap = lsec.get("max_gap")
    if max_gap is not None and report.gap > float(max_gap):
        print(f"error: acceptance: gap {report.gap:.4%} exceeds {float(max_gap):.4%}",
              file=sys.stderr)
        return 1
    return 0


def cmd_scan(args, config: dict) -> int:
    seed = _seed(args, config)
    out = _out_dir(args, config)
    measure = build_measure(_section(config, "measure"), seed)
    ssec = _section(config, "scan")
    xsec = _section(config, "exponents")
    region = _need(ssec, "region", "scan")
    params = None
    if "s" in xsec and "t" in xsec:
        try:
            params = ScanParams(
                measure.dim, float(xsec["s"]), float(xsec["t"]),
                float(_need(xsec, "p", "exponents")),
            )
        except ValueError as exc:
            raise CliError("config", str(exc)) from exc
    p = float(_need(xsec, "p", "exponents")) if params is None else None
    try:
        report = scan_centres(
            measure, region, float(_need(ssec, "step", "scan")), p=p,
            sphere_resolution=int(ssec.get("sphere", 256)),
            margin=float(ssec.get("margin", 0.1)),
            refine_factor=int(ssec.get("refine", 2)),
            threshold=float(ssec.get("threshold", 1.5)),
            params=params, threads=args.threads,
        )
    except (ValueError, TypeError) as exc:
        raise CliError("config", str(exc)) from exc
    io.write_json(report.to_dict(), out / "scan.json")
    io.save_scan_table(report, out / "scan.csv")
    names = ["scan.json", "scan.csv"]
    bad = report.bad_points
    if bad.shape[0]:
        header = ",".join("xyz"[: bad.shape[1]])
        np.savetxt(out / "bad_points.csv", bad, delimiter=",", header=header, comments="")
        names.append("bad_points.csv")
    if measure.dim == 2:
        shape = tuple(
            max(1, int(round((report.region_hi[k] - report.region_lo[k]) / report.step)))
            for k in range(2)
        )
        io.write_pgm(out / "bad.pgm", report.bad.reshape(shape).T[::-1].astype(float))
        names.append("bad.pgm")
    io.write_manifest(out, config, names)
    est = report.dim_estimate
    print(
        f"scan: centres={report.centres.shape[0]} scanned={int(report.scanned.sum())} "
        f"bad={int(report.bad.sum())}"
        + (f" boxdim={est.estimate:.3f}+-{est.band:.3f}" if est else "")
    )
    return 0


def cmd_boxdim(args, config: dict) -> int:
    out = _out_dir(args, config)
    bsec = _section(config, "boxdim")
    pts = _need(bsec, "points", "boxdim")
    if isinstance(pts, str):
        path = Path(pts)
        if not path.exists():
            raise CliError("io", f"points file not found: {path}")
        pts = io.load_points_csv(path).points
    scales = _need(bsec, "scales", "boxdim")
    try:
        result = box_dimension(np.asarray(pts, dtype=float), scales)
    except ValueError as exc:
        raise CliError("config", str(exc)) from exc
    io.write_json(result.to_dict(), out / "boxdim.json")
    io.write_manifest(out, config, ["boxdim.json"])
    print(f"boxdim: estimate={result.estimate:.4f} band={result.band:.4f}")
    return 0


_HANDLERS = {
    "gen": cmd_gen,
    "energy": cmd_energy,
    "project": cmd_project,
    "radial": cmd_radial,
    "identity": cmd_identity,
    "scan": cmd_scan,
    "boxdim": cmd_boxdim,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radproj",
        description="projection laboratory for compactly supported measures",
    )
    parser.add_argument("command", choices=_SUBCOMMANDS)
    parser.add_argument("--config", help="TOML config file or bundled config name")
    parser.add_argument("--out", help="output directory (overrides run.out)")
    parser.add_argument("--seed", type=int, help="override run.seed")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for the scan")
    parser.add_argument("--dump-intermediates", action="store_true",
                        help="also write per-atom and per-direction densities")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args, unknown = parser.parse_known_args(argv)
    except SystemExit:
        return 2
    try:
        config = _load_config(args.config)
        config = _apply_overrides(config, unknown)
        return _HANDLERS[args.command](args, config)
    except CliError as exc:
        print(f"error: {exc.category}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
