import json

import numpy as np
import pytest

import gausstab as gs
from gausstab.cli import main
from gausstab.config import ConfigError, load_config


SPHERE_CFG = """
# quick unit sphere run
surface.kind = sphere
surface.radius = 1.0
surface.resolution = 4
eig.count = 8
estimates.R = 4.0
"""

PLANE_CFG = """
surface.kind = plane_disk
surface.trunc = 8.0
surface.resolution = 5
eig.count = 6
estimates.R = 4.0
estimates.M = 0.0
"""


@pytest.fixture
def sphere_cfg(tmp_path):
    path = tmp_path / "sphere.cfg"
    path.write_text(SPHERE_CFG)
    return path


@pytest.fixture
def plane_cfg(tmp_path):
    path = tmp_path / "plane.cfg"
    path.write_text(PLANE_CFG)
    return path


def test_config_parsing(sphere_cfg):
    cfg = load_config(sphere_cfg)
    assert cfg.surface_kind == "sphere"
    assert cfg.eig_count == 8
    assert cfg.est_R == 4.0
    flat = cfg.to_flat_dict()
    assert flat["surface.kind"] == "sphere"
    assert flat["tol.zero"] == 1e-2


def test_config_overrides(sphere_cfg):
    cfg = load_config(sphere_cfg, overrides=[("tol.zero", "0.02"), ("eig.count", "5")])
    assert cfg.tol_zero == 0.02
    assert cfg.eig_count == 5


def test_config_rejects_unknown_key(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("surface.knid = sphere\n")
    with pytest.raises(ConfigError, match="surface.knid"):
        load_config(path)


def test_config_rejects_bad_value(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("surface.radius = big\n")
    with pytest.raises(ConfigError, match="surface.radius"):
        load_config(path)


def test_gen_writes_off(sphere_cfg, tmp_path, capsys):
    out = tmp_path / "ico.off"
    assert main(["gen", "--config", str(sphere_cfg), "--out", str(out)]) == 0
    mesh = gs.read_mesh(out)
    assert mesh.n_vertices == 2562
    assert "2562" in capsys.readouterr().out


def test_gen_plane_obj_is_flat(plane_cfg, tmp_path):
    out = tmp_path / "disk.obj"
    assert main(["gen", "--config", str(plane_cfg), "--out", str(out)]) == 0
    mesh = gs.read_mesh(out)
    assert np.all(mesh.vertices[:, 2] == 0.0)


def test_gen_invalid_radius_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("surface.kind = sphere\nsurface.radius = -1\n")
    code = main(["gen", "--config", str(path), "--out", str(tmp_path / "x.off")])
    assert code == 2
    assert "radius" in capsys.readouterr().err


def test_analyze_sphere_report(sphere_cfg, tmp_path):
    out = tmp_path / "report.json"
    code = main(["analyze", "--config", str(sphere_cfg), "--out", str(out)])
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["schema_version"] == 1
    assert rep["index"]["index"] == 3
    assert rep["splitting"]["kernel_dim"] == 0
    assert rep["localized_span"]["all_negative"] is True
    assert rep["checks"]["passed"] is True
    assert rep["analytic"]["index"] == 3
    assert (tmp_path / "report_spectrum.png").exists()
    assert all(np.isfinite(v) for v in rep["spectrum"]["eigenvalues"])


def test_analyze_deterministic(sphere_cfg, tmp_path):
    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    main(["analyze", "--config", str(sphere_cfg), "--out", str(out1), "--no-figures"])
    main(["analyze", "--config", str(sphere_cfg), "--out", str(out2), "--no-figures"])
    r1, r2 = json.loads(out1.read_text()), json.loads(out2.read_text())
    r1.pop("timings")
    r2.pop("timings")
    assert json.dumps(r1, sort_keys=True) == json.dumps(r2, sort_keys=True)
    assert not (tmp_path / "r1_spectrum.png").exists()


def test_analyze_imported_mesh(sphere_cfg, tmp_path):
    mesh_path = tmp_path / "m.off"
    main(["gen", "--config", str(sphere_cfg), "--out", str(mesh_path)])
    out = tmp_path / "mesh_report.json"
    code = main(
        ["analyze", "--config", str(sphere_cfg), "--mesh", str(mesh_path), "--out", str(out)]
    )
    assert code == 0
    rep = json.loads(out.read_text())
    assert "analytic" not in rep  # imported meshes carry no closed forms


def test_estimates_plane(plane_cfg, tmp_path):
    out = tmp_path / "est.json"
    code = main(["estimates", "--config", str(plane_cfg), "--out", str(out)])
    assert code == 0
    rep = json.loads(out.read_text())
    names = {e["name"] for e in rep["estimates"]}
    assert {"modified_stability", "integral_curvature", "simons_residual",
            "mean_value", "area_lower_bound", "pointwise_decay"} <= names
    ok = [e for e in rep["estimates"] if e["hypothesis_ok"]]
    assert ok and all(e["margin"] >= 0 for e in ok)
    assert (tmp_path / "est_margins.png").exists()


def test_convergence_csv(tmp_path):
    cfg = tmp_path / "conv.cfg"
    cfg.write_text("surface.kind = sphere\neig.count = 4\nestimates.R = 4.0\n")
    out = tmp_path / "conv.csv"
    code = main(["convergence", "--config", str(cfg), "--levels", "3..4", "--out", str(out)])
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("level,n_vertices,")
    assert len(lines) == 3
    assert (tmp_path / "conv_convergence.png").exists()


def test_analyze_check_failure_exit_code(tmp_path):
    cfg = tmp_path / "strict.cfg"
    cfg.write_text(SPHERE_CFG + "check.rel_tol = 1e-9\n")
    out = tmp_path / "strict.json"
    code = main(["analyze", "--config", str(cfg), "--out", str(out), "--no-figures"])
    assert code == 1
    rep = json.loads(out.read_text())
    assert rep["checks"]["failures"]


def test_analyze_torus_runs(tmp_path):
    cfg = tmp_path / "torus.cfg"
    cfg.write_text(
        "surface.kind = torus\nsurface.radius = 2.0\nsurface.minor_radius = 0.5\n"
        "surface.resolution = 3\neig.count = 4\nestimates.R = 4.0\n"
    )
    out = tmp_path / "torus.json"
    code = main(["analyze", "--config", str(cfg), "--out", str(out), "--no-figures"])
    assert code == 0  # no closed forms, so no hard assertions
    rep = json.loads(out.read_text())
    assert rep["splitting"]["kernel_dim"] == 0
    assert "analytic" not in rep


def test_tol_override_flag(sphere_cfg, tmp_path):
    out = tmp_path / "r.json"
    code = main(
        ["analyze", "--config", str(sphere_cfg), "--out", str(out),
         "--tol", "zero=0.03", "--no-figures"]
    )
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["config"]["tol.zero"] == 0.03
