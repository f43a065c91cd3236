import filecmp
import json
import os

import numpy as np
import pytest

from flatfront import catalog, cli, mesh
from flatfront.errors import ExcludedParameter, InvalidPoint
from flatfront.legendrian import front_point, random_sl2


def test_ball_project_examples():
    assert np.allclose(mesh.ball_project(np.array([1.0, 0, 0, 0])), 0)
    t = 1.3
    v = mesh.ball_project(np.array([np.cosh(t), 0, 0, np.sinh(t)]))
    assert np.allclose(v, [0, 0, np.tanh(t / 2)])


def test_ball_project_random_points():
    rng = np.random.default_rng(0)
    E = np.array([random_sl2(rng, 2.0) for _ in range(10000)])
    v = mesh.ball_project(front_point(E))
    assert np.all(np.linalg.norm(v, axis=-1) < 1)


@pytest.mark.parametrize("bad", [np.array([1.0, 0, 0]), np.array([np.nan, 0, 0, 0]),
                                 np.array([2.0, 0, 0, 0]), np.array([-1.0, 0, 0, 0])])
def test_ball_project_rejects(bad):
    with pytest.raises(InvalidPoint):
        mesh.ball_project(bad)


@pytest.fixture(scope="module")
def peach():
    return catalog.build(catalog.peach())


def test_peach_mesh(peach):
    m = mesh.sample_surface(peach, grid=48)
    assert len(m.triangles) > 0 and m.triangles.max() < len(m.vertices)
    assert np.all(np.linalg.norm(m.vertices, axis=-1) < 1)
    assert m.meta["singular_polylines"] >= 1
    assert m.meta["singular_rho_deviation"] < 1e-6
    assert not m.degenerate
    assert set(np.unique(m.scalars["dh2_sign"])) <= {-1.0, 0.0, 1.0}


def test_mesh_deterministic(peach, tmp_path):
    for sub in ("a", "b"):
        m = mesh.sample_surface(peach, grid=32)
        mesh.write_mesh(m, tmp_path / sub, "peach")
    names = sorted(os.listdir(tmp_path / "a"))
    assert names == sorted(os.listdir(tmp_path / "b"))
    for n in names:
        assert filecmp.cmp(tmp_path / "a" / n, tmp_path / "b" / n, shallow=False)


def test_cylinder_caustic_degenerate():
    d = catalog.build(catalog.cylinder())
    m = mesh.sample_surface(d, target="caustic", grid=32)
    assert m.degenerate and m.meta["span_rank"] == 2


def test_excluded_parameter_refused():
    d = catalog.build(catalog.hourglass())
    mesh.refuse_excluded(d, 0.4)
    d = catalog.build(catalog.cylinder(k=2.0))
    t = d.excluded_parallel_params()[0][0]
    with pytest.raises(ExcludedParameter):
        mesh.sample_surface(d, t=t, grid=16)


def run_cli(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_catalog(capsys):
    code, out, _ = run_cli(["catalog", "--list"], capsys)
    assert code == 0 and "peach" in out and "pfront-3end" in out
    code, out, _ = run_cli(["catalog", "--show", "uend-model", "-p", "m=3"], capsys)
    assert code == 0 and json.loads(out)["params"]["m"] == 3


def test_cli_input_errors(capsys, tmp_path):
    assert run_cli(["build", "torus"], capsys)[0] == 2
    assert run_cli(["build", "peach", "-p", "b=0"], capsys)[0] == 2
    assert run_cli(["verify", "peach", "-p", "oops"], capsys)[0] == 2
    t = catalog.build(catalog.cylinder(k=2.0)).excluded_parallel_params()[0][0]
    code, _, err = run_cli(["parallel", "cylinder", "--t", str(t), "--out", str(tmp_path)], capsys)
    assert code == 2 and "excluded" in err


def test_cli_build_and_locus(capsys, tmp_path):
    code, out, _ = run_cli(["--grid", "24", "build", "peach", "--out", str(tmp_path)], capsys)
    assert code == 0
    info = json.loads(out)
    assert set(info["files"]) == {"peach_front.obj", "peach_singular.obj", "peach_normals.obj",
                                  "peach_scalars.csv"}
    for f in info["files"]:
        assert (tmp_path / f).exists()
    code, out, _ = run_cli(["singular-locus", "peach", "--grid", "48"], capsys)
    rows = out.strip().splitlines()
    assert code == 0 and rows[0] == "polyline,x,y"
    xs = np.array([float(r.split(",")[1]) for r in rows[1:]])
    assert np.max(np.abs(xs)) < 1e-6


def test_cli_classify_ends(capsys):
    code, out, _ = run_cli(["classify-ends", "peach"], capsys)
    assert code == 0
    header, row = out.strip().splitlines()
    assert header.startswith("label,z,sheet")
    assert "notFiniteType" in row


def test_cli_verify(capsys, tmp_path):
    code, out, _ = run_cli(["verify", "peach", "--suite", "core-identities", "--points", "10",
                            "--out", str(tmp_path)], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["pass"]
    assert (tmp_path / "peach_verify_core-identities.json").exists()
    code, out, _ = run_cli(["verify", "pfront-3end", "-p", "c=1", "--suite", "pfront"], capsys)
    assert code == 1 and not json.loads(out)["pass"]
