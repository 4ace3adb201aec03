"""ASCII OFF and OBJ import/export for triangle meshes."""

from __future__ import annotations

import numpy as np

from .surface import SurfaceMesh, make_mesh


def write_off(mesh: SurfaceMesh, path):
    if mesh.dim != 2:
        raise ValueError("OFF export supports triangle meshes only")
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{mesh.n_vertices} {mesh.n_faces} 0\n")
        for v in mesh.vertices:
            fh.write(f"{v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
        for f in mesh.faces:
            fh.write(f"3 {f[0]} {f[1]} {f[2]}\n")


def read_off(path) -> SurfaceMesh:
    with open(path) as fh:
        tokens = fh.read().split()
    if not tokens or tokens[0] != "OFF":
        raise ValueError(f"{path}: not an OFF file")
    nv, nf = int(tokens[1]), int(tokens[2])
    pos = 4
    verts = np.array(tokens[pos:pos + 3 * nv], dtype=float).reshape(nv, 3)
    pos += 3 * nv
    faces = []
    for _ in range(nf):
        k = int(tokens[pos])
        if k != 3:
            raise ValueError(f"{path}: only triangular faces are supported")
        faces.append([int(t) for t in tokens[pos + 1:pos + 4]])
        pos += k + 1
    return make_mesh(verts, np.array(faces, dtype=np.int64), dim=2)


def write_obj(mesh: SurfaceMesh, path):
    with open(path, "w") as fh:
        for v in mesh.vertices:
            coords = " ".join(f"{c:.17g}" for c in v)
            if mesh.dim == 1:
                coords += " 0"
            fh.write(f"v {coords}\n")
        tag = "f" if mesh.dim == 2 else "l"
        for f in mesh.faces:
            fh.write(tag + "".join(f" {i + 1}" for i in f) + "\n")


def read_obj(path) -> SurfaceMesh:
    verts, faces, lines = [], [], []
    with open(path) as fh:
        for raw in fh:
            parts = raw.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                verts.append([float(p) for p in parts[1:4]])
            elif parts[0] == "f":
                ids = [int(p.split("/")[0]) - 1 for p in parts[1:]]
                if len(ids) != 3:
                    raise ValueError(f"{path}: only triangular faces are supported")
                faces.append(ids)
            elif parts[0] == "l":
                ids = [int(p) - 1 for p in parts[1:]]
                lines.append(ids)
    if faces and lines:
        raise ValueError(f"{path}: mixed line and face elements")
    if lines:
        v = np.asarray(verts, dtype=float)[:, :2]
        return make_mesh(v, np.asarray(lines, dtype=np.int64), dim=1)
    return make_mesh(
        np.asarray(verts, dtype=float), np.asarray(faces, dtype=np.int64), dim=2
    )


def write_mesh(mesh: SurfaceMesh, path):
    """Dispatch on file extension: .off or .obj."""
    path = str(path)
    if path.endswith(".off"):
        write_off(mesh, path)
    elif path.endswith(".obj"):
        write_obj(mesh, path)
    else:
        raise ValueError(f"unsupported mesh format: {path}")


def read_mesh(path) -> SurfaceMesh:
    path = str(path)
    if path.endswith(".off"):
        return read_off(path)
    if path.endswith(".obj"):
        return read_obj(path)
    raise ValueError(f"unsupported mesh format: {path}")
