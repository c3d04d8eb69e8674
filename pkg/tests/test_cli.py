"""End-to-end command line checks via subprocess."""
import json
import subprocess
import sys

import numpy as np
import pytest

from radproj import io


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "radproj.cli", *map(str, args)],
        capture_output=True,
        text=True,
    )


def write_config(path, text):
    path.write_text(text)
    return path


def test_gen_atoms_roundtrip(tmp_path):
    cfg = write_config(tmp_path / "c.toml", """
[run]
seed = 3
[measure]
kind = "atoms"
points = [[0.0, 0.0], [1.0, 0.5]]
weights = [3.0, 1.0]
""")
    out = tmp_path / "out"
    res = run_cli("gen", "--config", cfg, "--out", out)
    assert res.returncode == 0, res.stderr
    mu = io.load_measure(out / "measure.json")
    np.testing.assert_array_equal(mu.points, [[0.0, 0.0], [1.0, 0.5]])
    np.testing.assert_allclose(mu.weights, [0.75, 0.25])
    doc = json.loads((out / "manifest.json").read_text())
    assert doc["artifacts"]["measure.json"]["sha256"] == io.sha256_file(out / "measure.json")


def test_gen_is_deterministic(tmp_path):
    cfg = write_config(tmp_path / "c.toml", """
[run]
seed = 12
[measure]
kind = "gaussian-mixture-samples"
centers = [[0.0, 0.0]]
sigmas = [0.5]
weights = [1.0]
n = 400
""")
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        res = run_cli("gen", "--config", cfg, "--out", out)
        assert res.returncode == 0, res.stderr
        outs.append((out / "measure.json").read_bytes())
    assert outs[0] == outs[1]


def test_override_reaches_manifest(tmp_path):
    cfg = write_config(tmp_path / "c.toml", """
[measure]
kind = "segment"
n = 100
""")
    out = tmp_path / "out"
    res = run_cli("gen", "--config", cfg, "--out", out,
                  "--run.seed", "77", "--measure.n=40")
    assert res.returncode == 0, res.stderr
    doc = json.loads((out / "manifest.json").read_text())
    assert doc["config"]["run"]["seed"] == 77
    assert doc["config"]["measure"]["n"] == 40
    mu = io.load_measure(out / "measure.json")
    assert mu.points.shape[0] == 40


def test_bundled_config_energy(tmp_path):
    out = tmp_path / "out"
    res = run_cli("energy", "--config", "segment_energy", "--out", out,
                  "--measure.n", "600")
    assert res.returncode == 0, res.stderr
    doc = json.loads((out / "energy.json").read_text())
    assert doc["method"] == "pairwise"
    assert doc["value"] == pytest.approx(8.0 / 3.0, rel=0.05)


def test_project_artifacts(tmp_path):
    cfg = write_config(tmp_path / "c.toml", """
[measure]
kind = "square-grid"
lo = [0.0, 0.0]
hi = [1.0, 1.0]
resolution = 32
[projection]
direction = [1.0, 0.0]
bins = 64
""")
    out = tmp_path / "out"
    res = run_cli("project", "--config", cfg, "--out", out)
    assert res.returncode == 0, res.stderr
    doc = json.loads((out / "projection.json").read_text())
    assert doc["mass"] == pytest.approx(1.0, abs=1e-9)
    rows = (out / "projection.csv").read_text().strip().splitlines()
    assert rows[0] == "t,value"


def test_boxdim_inline_points(tmp_path):
    rng = np.random.default_rng(4)
    pts = rng.uniform(size=(400, 2)).tolist()
    cfg = write_config(tmp_path / "c.toml", f"""
[boxdim]
points = {pts}
scales = [0.5, 0.25, 0.125, 0.0625]
""")
    out = tmp_path / "out"
    res = run_cli("boxdim", "--config", cfg, "--out", out)
    assert res.returncode == 0, res.stderr
    doc = json.loads((out / "boxdim.json").read_text())
    assert doc["estimate"] == pytest.approx(2.0, abs=0.5)


def test_identity_gap_gate_exit_one(tmp_path):
    cfg = write_config(tmp_path / "c.toml", """
[run]
seed = 11
[measure]
kind = "pair"
name = "gaussians"
resolution = 64
[exponents]
p = 2.0
[identity]
sphere = 48
bins = 48
samples_per_cell = 1
max_gap = 1e-12
""")
    out = tmp_path / "out"
    res = run_cli("identity", "--config", cfg, "--out", out)
    assert res.returncode == 1
    assert res.stderr.startswith("error: acceptance:")
    assert len(res.stderr.strip().splitlines()) == 1
    # the report is still written for inspection
    assert (out / "identity.json").exists()


def test_missing_config_exits_two(tmp_path):
    res = run_cli("gen", "--config", "no-such-config", "--out", tmp_path / "o")
    assert res.returncode == 2
    assert res.stderr.startswith("error: config: config not found")
    assert len(res.stderr.strip().splitlines()) == 1


def test_missing_out_exits_two(tmp_path):
    cfg = write_config(tmp_path / "c.toml", """
[measure]
kind = "segment"
n = 10
""")
    res = run_cli("gen", "--config", cfg)
    assert res.returncode == 2
    assert "output directory" in res.stderr


def test_unknown_measure_kind_exits_two(tmp_path):
    cfg = write_config(tmp_path / "c.toml", """
[measure]
kind = "perlin"
""")
    res = run_cli("gen", "--config", cfg, "--out", tmp_path / "o")
    assert res.returncode == 2
    assert "unknown measure kind" in res.stderr


def test_measure_file_not_found_names_path(tmp_path):
    cfg = write_config(tmp_path / "c.toml", """
[measure]
kind = "file"
path = "/nowhere/mu.json"
""")
    res = run_cli("gen", "--config", cfg, "--out", tmp_path / "o")
    assert res.returncode == 2
    assert res.stderr.startswith("error: io:")
    assert "/nowhere/mu.json" in res.stderr


def test_stray_argument_exits_two(tmp_path):
    cfg = write_config(tmp_path / "c.toml", """
[measure]
kind = "segment"
n = 10
""")
    res = run_cli("gen", "--config", cfg, "--out", tmp_path / "o", "stray-token")
    assert res.returncode == 2
    assert res.stderr.startswith("error: usage:")
