import numpy as np
import pytest

import gausstab as gs
from gausstab.meshio import read_obj, read_off, write_obj, write_off


def test_off_roundtrip(tmp_path):
    mesh = gs.generate(gs.SurfaceSpec(kind="sphere", resolution=2))
    path = tmp_path / "mesh.off"
    write_off(mesh, path)
    back = read_off(path)
    assert np.array_equal(back.vertices, mesh.vertices)
    assert np.array_equal(back.faces, mesh.faces)
    assert np.array_equal(back.boundary_vertex, mesh.boundary_vertex)


def test_obj_roundtrip(tmp_path):
    mesh = gs.generate(gs.SurfaceSpec(kind="plane_disk", resolution=3, trunc=2.0))
    path = tmp_path / "mesh.obj"
    write_obj(mesh, path)
    back = read_obj(path)
    assert np.allclose(back.vertices, mesh.vertices)
    assert np.array_equal(back.faces, mesh.faces)


def test_obj_lines_roundtrip(tmp_path):
    mesh = gs.generate(gs.SurfaceSpec(kind="sphere", resolution=3, dim=1))
    path = tmp_path / "circle.obj"
    write_obj(mesh, path)
    back = read_obj(path)
    assert back.dim == 1
    assert np.allclose(back.vertices, mesh.vertices)


def test_off_rejects_garbage(tmp_path):
    path = tmp_path / "bad.off"
    path.write_text("PLY\n0 0 0\n")
    with pytest.raises(ValueError, match="not an OFF"):
        read_off(path)


def test_dispatch_by_extension(tmp_path):
    mesh = gs.generate(gs.SurfaceSpec(kind="sphere", resolution=1))
    gs.write_mesh(mesh, tmp_path / "m.off")
    gs.write_mesh(mesh, tmp_path / "m.obj")
    assert gs.read_mesh(tmp_path / "m.off").n_vertices == mesh.n_vertices
    assert gs.read_mesh(tmp_path / "m.obj").n_faces == mesh.n_faces
    with pytest.raises(ValueError, match="format"):
        gs.write_mesh(mesh, tmp_path / "m.stl")
