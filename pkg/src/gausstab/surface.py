"""Oriented simplicial hypersurfaces in R^{n+1} and their extrinsic geometry.

Meshes are triangles for surfaces (n=2) and segments for curves (n=1).
Geometry (normals, mean curvature, full shape operator) is estimated per
vertex by fitting an osculating quadric over the tangent plane of the
vertex star.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

EPS_GEOM = 1e-12  # minimum admissible face measure, length^n
FIT_COND_LIMIT = 1e8  # quadric fits above this condition number get flagged

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0

_ICOSA_VERTS = np.array(
    [
        [-1, GOLDEN, 0], [1, GOLDEN, 0], [-1, -GOLDEN, 0], [1, -GOLDEN, 0],
        [0, -1, GOLDEN], [0, 1, GOLDEN], [0, -1, -GOLDEN], [0, 1, -GOLDEN],
        [GOLDEN, 0, -1], [GOLDEN, 0, 1], [-GOLDEN, 0, -1], [-GOLDEN, 0, 1],
    ],
    dtype=float,
)

_ICOSA_FACES = np.array(
    [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [5, 4, 9], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ],
    dtype=np.int64,
)


class MeshError(ValueError):
    """Mesh data violates a structural invariant."""


class GeometryError(ValueError):
    """Inputs do not support the requested geometric computation."""


@dataclass(frozen=True)
class SurfaceSpec:
    """Parametric description of a generator surface.

    ``resolution`` is a dyadic level: every generator roughly doubles its
    linear resolution per level, so ``refine`` is consistent with
    regenerating one level up.
    """

    kind: str  # plane_disk | sphere | cylinder | torus | graph
    resolution: int = 4
    dim: int = 2
    radius: float = 1.0
    center: tuple = (0.0, 0.0, 0.0)
    offset: float = 0.0        # plane offset along its normal axis
    trunc: float = 8.0         # plane disk truncation radius
    half_height: float = 12.0  # cylinder axial truncation
    minor_radius: float = 0.5  # torus tube radius
    amplitude: float = 0.5     # graph bump height
    extent: float = 4.0        # graph half extent

    def validate(self):
        if self.kind not in ("plane_disk", "sphere", "cylinder", "torus", "graph"):
            raise ValueError(f"unknown surface kind {self.kind!r}")
        if self.resolution < 1:
            raise ValueError(f"resolution must be >= 1, got {self.resolution}")
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.kind in ("sphere", "cylinder", "torus") and self.radius <= 0:
            raise ValueError(f"radius must be > 0, got {self.radius}")
        if self.kind == "plane_disk" and self.trunc <= 0:
            raise ValueError(f"trunc must be > 0, got {self.trunc}")
        if self.kind == "cylinder":
            if self.dim != 2:
                raise ValueError("cylinder generator requires dim=2")
            if self.half_height <= 0:
                raise ValueError(f"half_height must be > 0, got {self.half_height}")
        if self.kind == "torus":
            if self.dim != 2:
                raise ValueError("torus generator requires dim=2")
            if not 0 < self.minor_radius < self.radius:
                raise ValueError("torus needs 0 < minor_radius < radius")
        if self.kind == "graph":
            if self.dim != 2:
                raise ValueError("graph generator requires dim=2")
            if self.extent <= 0:
                raise ValueError(f"extent must be > 0, got {self.extent}")


@dataclass(frozen=True)
class SurfaceMesh:
    """Immutable oriented mesh: positions, simplices, boundary flags.

    ``reproject(points, on_boundary)`` maps refined vertices back onto the
    generator surface; it is None for imported meshes and does not take
    part in equality.
    """

    vertices: np.ndarray            # (nv, dim+1)
    faces: np.ndarray               # (nf, dim+1) oriented simplices
    dim: int
    boundary_vertex: np.ndarray     # (nv,) bool
    reproject: Optional[Callable] = field(default=None, compare=False, repr=False)

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_faces(self):
        return self.faces.shape[0]

    @property
    def is_closed(self):
        return not bool(self.boundary_vertex.any())

    def interior_indices(self):
        return np.flatnonzero(~self.boundary_vertex)


def _freeze(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _edge_structure(faces, n_vertices, dim):
    """Directed/undirected edge bookkeeping.

    Returns (boundary_vertex_mask, undirected_edges, edge_face_count).
    Raises MeshError on inconsistent orientation or non-manifold facets.
    For dim=1 the facets are single vertices: an oriented segment (i, j)
    contributes i as a tail and j as a head, and consistency means no
    vertex is a head twice or a tail twice.
    """
    if dim == 1:
        tails = np.bincount(faces[:, 0], minlength=n_vertices)
        heads = np.bincount(faces[:, 1], minlength=n_vertices)
        if faces.size and max(tails.max(), heads.max()) > 1:
            raise MeshError("non-manifold or inconsistently oriented curve vertex")
        boundary = (tails + heads) == 1
        return boundary, faces.copy(), None
    directed = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    key_dir = directed[:, 0].astype(np.int64) * n_vertices + directed[:, 1]
    if np.unique(key_dir).size != key_dir.size:
        raise MeshError("orientation inconsistency: repeated directed edge")
    und = np.sort(directed, axis=1)
    key_und = und[:, 0].astype(np.int64) * n_vertices + und[:, 1]
    uniq, counts = np.unique(key_und, return_counts=True)
    if counts.max(initial=0) > 2:
        raise MeshError("non-manifold edge: shared by more than two faces")
    boundary_keys = uniq[counts == 1]
    boundary = np.zeros(n_vertices, dtype=bool)
    boundary[boundary_keys // n_vertices] = True
    boundary[boundary_keys % n_vertices] = True
    edges = np.stack([uniq // n_vertices, uniq % n_vertices], axis=1)
    return boundary, edges, counts


def face_measures(vertices, faces, dim):
    """Area of each triangle (dim=2) or length of each segment (dim=1)."""
    if dim == 2:
        e1 = vertices[faces[:, 1]] - vertices[faces[:, 0]]
        e2 = vertices[faces[:, 2]] - vertices[faces[:, 0]]
        return 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)
    return np.linalg.norm(vertices[faces[:, 1]] - vertices[faces[:, 0]], axis=1)


def make_mesh(vertices, faces, dim=2, reproject=None):
    """Validate raw arrays and build an immutable SurfaceMesh.

    Checks global orientation consistency, minimum face measure, and
    derives boundary flags from edge incidence.
    """
    vertices = np.asarray(vertices, dtype=float)
    faces = np.asarray(faces, dtype=np.int64)
    if vertices.ndim != 2 or vertices.shape[1] != dim + 1:
        raise MeshError(f"vertices must be (nv, {dim + 1}), got {vertices.shape}")
    if faces.ndim != 2 or faces.shape[1] != dim + 1:
        raise MeshError(f"faces must be (nf, {dim + 1}), got {faces.shape}")
    if faces.size and (faces.min() < 0 or faces.max() >= len(vertices)):
        raise MeshError("face index out of range")
    measures = face_measures(vertices, faces, dim)
    if faces.size and measures.min() < EPS_GEOM:
        raise MeshError(f"degenerate face: measure {measures.min():.3e} < {EPS_GEOM}")
    boundary, _, _ = _edge_structure(faces, len(vertices), dim)
    return SurfaceMesh(
        vertices=_freeze(vertices),
        faces=_freeze(faces),
        dim=dim,
        boundary_vertex=_freeze(boundary),
        reproject=reproject,
    )


# ---------------------------------------------------------------------------
# generators


def _sphere_reproject(center, radius):
    center = np.asarray(center, dtype=float)

    def proj(points, on_boundary):
        rel = points - center
        rel *= radius / np.linalg.norm(rel, axis=1, keepdims=True)
        return center + rel

    return proj


def _icosphere(level, radius, center):
    verts = _ICOSA_VERTS / np.linalg.norm(_ICOSA_VERTS, axis=1, keepdims=True)
    faces = _ICOSA_FACES
    # orient outward from the origin
    fn = np.cross(verts[faces[:, 1]] - verts[faces[:, 0]], verts[faces[:, 2]] - verts[faces[:, 0]])
    cent = verts[faces].mean(axis=1)
    flip = np.einsum("ij,ij->i", fn, cent) < 0
    faces = faces.copy()
    faces[flip] = faces[flip][:, [0, 2, 1]]

    for _ in range(level):
        verts, faces, _ = _split_triangles(verts, faces)
        verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    return verts * radius + np.asarray(center, dtype=float), faces


def _split_triangles(verts, faces):
    """One 1->4 subdivision pass; new vertices at edge midpoints.

    Also reports which midpoints sit on boundary edges.
    """
    n = len(verts)
    und = np.sort(
        np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]]), axis=1
    )
    keys = und[:, 0].astype(np.int64) * n + und[:, 1]
    uniq, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
    mids = 0.5 * (verts[uniq // n] + verts[uniq % n])
    new_verts = np.vstack([verts, mids])
    m = inverse.reshape(3, -1).T + n  # midpoint ids per face: [01, 12, 20]
    a, b, c = faces[:, 0], faces[:, 1], faces[:, 2]
    ab, bc, ca = m[:, 0], m[:, 1], m[:, 2]
    new_faces = np.concatenate(
        [
            np.stack([a, ab, ca], axis=1),
            np.stack([b, bc, ab], axis=1),
            np.stack([c, ca, bc], axis=1),
            np.stack([ab, bc, ca], axis=1),
        ]
    )
    return new_verts, new_faces, counts == 1


def _disk(rings, trunc, offset):
    """Spiderweb disk mesh in the plane x3 = offset: ring j holds 6j vertices."""
    pts = [(0.0, 0.0)]
    for j in range(1, rings + 1):
        r = trunc * j / rings
        t = 2.0 * np.pi * np.arange(6 * j) / (6 * j)
        pts.extend(zip(r * np.cos(t), r * np.sin(t)))
    pts = np.asarray(pts)
    verts = np.column_stack([pts, np.full(len(pts), float(offset))])

    def start(j):
        return 1 + 3 * j * (j - 1) if j >= 1 else 0

    def idx(j, t):
        if j == 0:
            return 0
        return start(j) + (t % (6 * j))

    faces = []
    for j in range(1, rings + 1):
        for s in range(6):
            inner = [idx(j - 1, s * (j - 1) + a) for a in range(j)]
            outer = [idx(j, s * j + a) for a in range(j + 1)]
            for a in range(j):
                faces.append((outer[a], outer[a + 1], inner[min(a, j - 1)]))
            for a in range(j - 1):
                faces.append((inner[a], outer[a + 1], inner[a + 1]))
    faces = np.asarray(faces, dtype=np.int64)

    def proj(points, on_boundary):
        out = points.copy()
        rad = np.linalg.norm(out[on_boundary, :2], axis=1)
        out[on_boundary, :2] *= (trunc / rad)[:, None]
        return out

    return verts, faces, proj


def _cylinder(level, radius, half_height):
    n_theta = 3 * 2 ** max(level - 1, 0)
    dz_target = 2.0 * np.pi * radius / n_theta
    n_z = max(2, round(2.0 * half_height / dz_target))
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    z = np.linspace(-half_height, half_height, n_z + 1)
    tt, zz = np.meshgrid(theta, z)  # row-major: vertex (i,j) -> j*n_theta + i
    verts = np.column_stack(
        [radius * np.cos(tt).ravel(), radius * np.sin(tt).ravel(), zz.ravel()]
    )
    i = np.arange(n_theta)
    j = np.arange(n_z)
    ii, jj = np.meshgrid(i, j)
    a = (jj * n_theta + ii).ravel()
    b = (jj * n_theta + (ii + 1) % n_theta).ravel()
    c = ((jj + 1) * n_theta + ii).ravel()
    d = ((jj + 1) * n_theta + (ii + 1) % n_theta).ravel()
    faces = np.concatenate(
        [np.stack([a, b, c], axis=1), np.stack([b, d, c], axis=1)]
    ).astype(np.int64)

    def proj(points, on_boundary):
        out = points.copy()
        rad = np.linalg.norm(out[:, :2], axis=1)
        out[:, :2] *= (radius / rad)[:, None]
        return out

    return verts, faces, proj


def _torus(level, major, minor):
    n_u = 3 * 2 ** level
    n_v = max(6, 3 * 2 ** max(level - 1, 0))
    u = 2.0 * np.pi * np.arange(n_u) / n_u
    v = 2.0 * np.pi * np.arange(n_v) / n_v
    uu, vv = np.meshgrid(u, v)
    ring = major + minor * np.cos(vv)
    verts = np.column_stack(
        [(ring * np.cos(uu)).ravel(), (ring * np.sin(uu)).ravel(), (minor * np.sin(vv)).ravel()]
    )
    i = np.arange(n_u)
    j = np.arange(n_v)
    ii, jj = np.meshgrid(i, j)
    a = (jj * n_u + ii).ravel()
    b = (jj * n_u + (ii + 1) % n_u).ravel()
    c = (((jj + 1) % n_v) * n_u + ii).ravel()
    d = (((jj + 1) % n_v) * n_u + (ii + 1) % n_u).ravel()
    faces = np.concatenate(
        [np.stack([a, b, c], axis=1), np.stack([b, d, c], axis=1)]
    ).astype(np.int64)

    def proj(points, on_boundary):
        out = points.copy()
        rho = np.linalg.norm(out[:, :2], axis=1)
        ring_dir = out[:, :2] / rho[:, None]
        q = np.column_stack([rho - major, out[:, 2]])
        q *= minor / np.linalg.norm(q, axis=1, keepdims=True)
        out[:, :2] = (major + q[:, 0])[:, None] * ring_dir
        out[:, 2] = q[:, 1]
        return out

    return verts, faces, proj


def _graph(level, amplitude, extent):
    m = 2 ** level

    def height(xy):
        return amplitude * np.exp(-0.5 * (xy[:, 0] ** 2 + xy[:, 1] ** 2))

    g = np.linspace(-extent, extent, m + 1)
    xx, yy = np.meshgrid(g, g)
    xy = np.column_stack([xx.ravel(), yy.ravel()])
    verts = np.column_stack([xy, height(xy)])
    i = np.arange(m)
    ii, jj = np.meshgrid(i, i)
    a = (jj * (m + 1) + ii).ravel()
    b = (jj * (m + 1) + ii + 1).ravel()
    c = ((jj + 1) * (m + 1) + ii).ravel()
    d = ((jj + 1) * (m + 1) + ii + 1).ravel()
    faces = np.concatenate(
        [np.stack([a, b, c], axis=1), np.stack([b, d, c], axis=1)]
    ).astype(np.int64)

    def proj(points, on_boundary):
        out = points.copy()
        out[:, 2] = height(out[:, :2])
        return out

    return verts, faces, proj


def _circle(level, radius, center):
    n = 6 * 2 ** level
    t = 2.0 * np.pi * np.arange(n) / n
    verts = np.column_stack([radius * np.cos(t), radius * np.sin(t)])
    verts += np.asarray(center[:2], dtype=float)
    segs = np.stack([np.arange(n), (np.arange(n) + 1) % n], axis=1)
    return verts, segs.astype(np.int64), _sphere_reproject(np.asarray(center[:2]), radius)


def _interval(level, trunc, offset):
    n = 8 * 2 ** level
    x = np.linspace(-trunc, trunc, n + 1)
    verts = np.column_stack([x, np.full(n + 1, float(offset))])
    # ordered right-to-left so the induced normal points along +e2
    segs = np.stack([np.arange(n, 0, -1), np.arange(n - 1, -1, -1)], axis=1)
    return verts, segs.astype(np.int64), None


def generate(spec: SurfaceSpec) -> SurfaceMesh:
    """Build the mesh described by ``spec``.

    Sphere meshes are icosahedral subdivisions re-projected to the sphere;
    noncompact generators (plane disk, cylinder, graph) are truncated and
    carry boundary flags on the cut locus.
    """
    spec.validate()
    if spec.dim == 1:
        if spec.kind == "sphere":
            v, f, proj = _circle(spec.resolution, spec.radius, spec.center)
        elif spec.kind == "plane_disk":
            v, f, proj = _interval(spec.resolution, spec.trunc, spec.offset)
        else:
            raise ValueError(f"kind {spec.kind!r} is not available for dim=1")
        return make_mesh(v, f, dim=1, reproject=proj)

    if spec.kind == "sphere":
        v, f = _icosphere(spec.resolution, spec.radius, spec.center)
        proj = _sphere_reproject(spec.center, spec.radius)
    elif spec.kind == "plane_disk":
        v, f, proj = _disk(2 ** spec.resolution, spec.trunc, spec.offset)
    elif spec.kind == "cylinder":
        v, f, proj = _cylinder(spec.resolution, spec.radius, spec.half_height)
    elif spec.kind == "torus":
        v, f, proj = _torus(spec.resolution, spec.radius, spec.minor_radius)
    else:
        v, f, proj = _graph(spec.resolution, spec.amplitude, spec.extent)
    return make_mesh(v, f, dim=2, reproject=proj)


def refine(mesh: SurfaceMesh) -> SurfaceMesh:
    """Subdivide every face 1->4 (dim=2) or 1->2 (dim=1).

    New vertices sit at edge midpoints and are pulled back onto the
    generator surface when the mesh carries a reprojection map.
    """
    verts, faces, dim = mesh.vertices, mesh.faces, mesh.dim
    n = len(verts)
    if dim == 2:
        new_verts, new_faces, mid_boundary = _split_triangles(verts, faces)
    else:
        mids = 0.5 * (verts[faces[:, 0]] + verts[faces[:, 1]])
        new_verts = np.vstack([verts, mids])
        mid_ids = n + np.arange(len(faces))
        new_faces = np.concatenate(
            [
                np.stack([faces[:, 0], mid_ids], axis=1),
                np.stack([mid_ids, faces[:, 1]], axis=1),
            ]
        )
        mid_boundary = np.zeros(len(faces), dtype=bool)
    if mesh.reproject is not None:
        mask = np.concatenate([mesh.boundary_vertex, mid_boundary])
        new_verts = mesh.reproject(new_verts, mask)
    return make_mesh(new_verts, new_faces, dim=dim, reproject=mesh.reproject)


# ---------------------------------------------------------------------------
# discrete extrinsic geometry


@dataclass(frozen=True)
class GeometryField:
    """Per-vertex extrinsic data of a mesh.

    ``shape_operator`` holds the fitted second-fundamental tensor in
    ambient coordinates (symmetric, annihilates the normal), so that
    A(X, Y) = X . shape_operator . Y for tangent vectors X, Y.
    ``flagged`` lists vertices whose quadric fit was ill conditioned.
    """

    normal: np.ndarray              # (nv, d) unit
    mean_curvature: np.ndarray      # (nv,)
    second_form_sq: np.ndarray      # (nv,) |A|^2
    tangential_position: np.ndarray  # (nv, d)
    vertex_area: np.ndarray         # (nv,) lumped barycentric measure
    shape_operator: np.ndarray      # (nv, d, d)
    flagged: np.ndarray             # ill-conditioned fit vertex ids


def vertex_areas(mesh: SurfaceMesh) -> np.ndarray:
    """Lumped (barycentric) vertex measures: 1/(dim+1) of incident faces."""
    measures = face_measures(mesh.vertices, mesh.faces, mesh.dim)
    areas = np.zeros(mesh.n_vertices)
    share = measures / (mesh.dim + 1)
    for c in range(mesh.dim + 1):
        np.add.at(areas, mesh.faces[:, c], share)
    return areas


def vertex_normals(mesh: SurfaceMesh) -> np.ndarray:
    """Measure-weighted average of incident face normals, normalized."""
    v, f = mesh.vertices, mesh.faces
    if mesh.dim == 2:
        fn = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])  # 2*area*normal
    else:
        t = v[f[:, 1]] - v[f[:, 0]]
        fn = np.column_stack([t[:, 1], -t[:, 0]])  # length*normal
    acc = np.zeros_like(v)
    for c in range(mesh.dim + 1):
        np.add.at(acc, f[:, c], fn)
    norms = np.linalg.norm(acc, axis=1)
    if norms.min(initial=np.inf) <= 0:
        raise GeometryError("vanishing averaged normal at some vertex")
    return acc / norms[:, None]


def _adjacency_lists(mesh):
    f = mesh.faces
    if mesh.dim == 2:
        pairs = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
    else:
        pairs = f
    pairs = np.concatenate([pairs, pairs[:, ::-1]])
    keys = pairs[:, 0].astype(np.int64) * mesh.n_vertices + pairs[:, 1]
    uniq = np.unique(keys)
    rows = (uniq // mesh.n_vertices).astype(np.int64)
    cols = (uniq % mesh.n_vertices).astype(np.int64)
    order = np.argsort(rows, kind="stable")
    rows, cols = rows[order], cols[order]
    indptr = np.searchsorted(rows, np.arange(mesh.n_vertices + 1))
    return [cols[indptr[i]:indptr[i + 1]] for i in range(mesh.n_vertices)]


def _fit_point_sets(mesh):
    """One-ring neighbor sets, widened to the two-ring for small stars."""
    ring1 = _adjacency_lists(mesh)
    min_ring = 6 if mesh.dim == 2 else 3
    sets = []
    for i, nb in enumerate(ring1):
        if len(nb) < min_ring:
            two = set()
            for j in nb:
                two.update(ring1[j].tolist())
            two.update(nb.tolist())
            two.discard(i)
            sets.append(np.fromiter(two, dtype=np.int64))
        else:
            sets.append(nb)
    return sets


def _tangent_frames(normals):
    """Orthonormal (t1, t2) completing each unit normal."""
    n = normals
    pick = np.abs(n).argmin(axis=1)
    helper = np.eye(3)[pick]
    t1 = np.cross(n, helper)
    t1 /= np.linalg.norm(t1, axis=1, keepdims=True)
    t2 = np.cross(n, t1)
    return t1, t2


def _symeig2(p, q, r):
    """Eigendecomposition of symmetric [[p, q], [q, r]] batches."""
    mean = 0.5 * (p + r)
    disc = np.sqrt(np.maximum(0.25 * (p - r) ** 2 + q * q, 0.0))
    k1, k2 = mean - disc, mean + disc
    # eigenvector for k2: pick the better-conditioned column
    v1 = np.stack([q, k2 - p], axis=1)
    v2 = np.stack([k2 - r, q], axis=1)
    use2 = np.linalg.norm(v2, axis=1) > np.linalg.norm(v1, axis=1)
    vec2 = np.where(use2[:, None], v2, v1)
    nrm = np.linalg.norm(vec2, axis=1)
    degenerate = nrm < 1e-300
    vec2[degenerate] = [1.0, 0.0]
    nrm[degenerate] = 1.0
    vec2 /= nrm[:, None]
    vec1 = np.stack([-vec2[:, 1], vec2[:, 0]], axis=1)
    return k1, k2, vec1, vec2


def compute_geometry(mesh: SurfaceMesh) -> GeometryField:
    """Estimate normals, curvatures, and the shape operator per vertex.

    A quadratic height function over the tangent plane of each vertex star
    (one-ring, or two-ring for stars with few neighbors) is fitted by least
    squares; principal curvatures follow from the generalized eigenproblem
    of the fitted fundamental forms. Sign convention: H = div N, so the
    origin-centered sphere of radius R with outward normal has H = dim/R.
    """
    if mesh.dim == 1:
        return _compute_geometry_1d(mesh)
    v = mesh.vertices
    nv = mesh.n_vertices
    normals = vertex_normals(mesh)
    t1, t2 = _tangent_frames(normals)
    sets = _fit_point_sets(mesh)

    kmax = max(len(s) for s in sets)
    nbr = np.zeros((nv, kmax), dtype=np.int64)
    mask = np.zeros((nv, kmax))
    for i, s in enumerate(sets):
        nbr[i, : len(s)] = s
        mask[i, : len(s)] = 1.0

    delta = (v[nbr] - v[:, None, :]) * mask[..., None]
    scale = np.sqrt(np.maximum((delta ** 2).sum(axis=(1, 2)) / mask.sum(axis=1), 1e-300))
    delta = delta / scale[:, None, None]
    u = np.einsum("vkd,vd->vk", delta, t1)
    w = np.einsum("vkd,vd->vk", delta, t2)
    h = np.einsum("vkd,vd->vk", delta, normals)

    cols = np.stack([u, w, 0.5 * u * u, u * w, 0.5 * w * w], axis=2) * mask[..., None]
    G = np.einsum("vki,vkj->vij", cols, cols)
    rhs = np.einsum("vki,vk->vi", cols, h * mask)

    eigs = np.linalg.eigvalsh(G)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.sqrt(np.abs(eigs[:, -1]) / np.maximum(np.abs(eigs[:, 0]), 1e-300))
    flagged = np.flatnonzero(~np.isfinite(cond) | (cond > FIT_COND_LIMIT))

    ridge = 1e-14 * np.trace(G, axis1=1, axis2=2)
    G = G + ridge[:, None, None] * np.eye(5)
    coef = np.linalg.solve(G, rhs[:, :, None])[:, :, 0]
    d, e = coef[:, 0], coef[:, 1]
    hess = np.empty((nv, 2, 2))
    hess[:, 0, 0] = coef[:, 2] / scale
    hess[:, 0, 1] = hess[:, 1, 0] = coef[:, 3] / scale
    hess[:, 1, 1] = coef[:, 4] / scale

    W = np.sqrt(1.0 + d * d + e * e)
    B = -hess / W[:, None, None]  # second fundamental form, H = div N convention

    # generalized eigenproblem (B, I_f) via the Cholesky factor of I_f
    l11 = np.sqrt(1.0 + d * d)
    l21 = d * e / l11
    l22 = np.sqrt(np.maximum(1.0 + e * e - l21 * l21, 1e-300))
    iL = np.zeros((nv, 2, 2))
    iL[:, 0, 0] = 1.0 / l11
    iL[:, 1, 0] = -l21 / (l11 * l22)
    iL[:, 1, 1] = 1.0 / l22
    Bt = np.einsum("vab,vbc,vdc->vad", iL, B, iL)
    k1, k2, y1, y2 = _symeig2(Bt[:, 0, 0], Bt[:, 0, 1], Bt[:, 1, 1])
    y1 = np.einsum("vba,vb->va", iL, y1)  # iL^T @ y
    y2 = np.einsum("vba,vb->va", iL, y2)

    r_u = t1 + d[:, None] * normals
    r_w = t2 + e[:, None] * normals
    q1 = y1[:, :1] * r_u + y1[:, 1:] * r_w  # ambient-orthonormal principal directions
    q2 = y2[:, :1] * r_u + y2[:, 1:] * r_w
    shape_op = (
        k1[:, None, None] * np.einsum("vi,vj->vij", q1, q1)
        + k2[:, None, None] * np.einsum("vi,vj->vij", q2, q2)
    )

    # the fitted linear terms correct the averaged normal; the corrected
    # normal varies coherently between neighboring vertices, which keeps
    # discrete operators applied to <v, N> consistent
    normals = (normals - d[:, None] * t1 - e[:, None] * t2) / W[:, None]
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)

    H = k1 + k2
    asq = k1 * k1 + k2 * k2
    xdotn = np.einsum("vd,vd->v", v, normals)
    return GeometryField(
        normal=_freeze(normals),
        mean_curvature=_freeze(H),
        second_form_sq=_freeze(asq),
        tangential_position=_freeze(v - xdotn[:, None] * normals),
        vertex_area=_freeze(vertex_areas(mesh)),
        shape_operator=_freeze(shape_op),
        flagged=_freeze(flagged),
    )


def _compute_geometry_1d(mesh):
    v = mesh.vertices
    nv = mesh.n_vertices
    normals = vertex_normals(mesh)
    tangents = np.column_stack([-normals[:, 1], normals[:, 0]])
    sets = _fit_point_sets(mesh)

    kmax = max(len(s) for s in sets)
    nbr = np.zeros((nv, kmax), dtype=np.int64)
    mask = np.zeros((nv, kmax))
    for i, s in enumerate(sets):
        nbr[i, : len(s)] = s
        mask[i, : len(s)] = 1.0
    delta = (v[nbr] - v[:, None, :]) * mask[..., None]
    scale = np.sqrt(np.maximum((delta ** 2).sum(axis=(1, 2)) / mask.sum(axis=1), 1e-300))
    delta = delta / scale[:, None, None]
    u = np.einsum("vkd,vd->vk", delta, tangents)
    h = np.einsum("vkd,vd->vk", delta, normals)
    cols = np.stack([u, 0.5 * u * u], axis=2) * mask[..., None]
    G = np.einsum("vki,vkj->vij", cols, cols)
    rhs = np.einsum("vki,vk->vi", cols, h * mask)
    eigs = np.linalg.eigvalsh(G)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.sqrt(np.abs(eigs[:, -1]) / np.maximum(np.abs(eigs[:, 0]), 1e-300))
    flagged = np.flatnonzero(~np.isfinite(cond) | (cond > FIT_COND_LIMIT))
    G = G + (1e-14 * np.trace(G, axis1=1, axis2=2))[:, None, None] * np.eye(2)
    coef = np.linalg.solve(G, rhs[:, :, None])[:, :, 0]
    d = coef[:, 0]
    a = coef[:, 1] / scale
    W = np.sqrt(1.0 + d * d)
    kappa = -a / W ** 3
    r_u = tangents + d[:, None] * normals
    q = r_u / W[:, None]
    shape_op = kappa[:, None, None] * np.einsum("vi,vj->vij", q, q)
    normals = (normals - d[:, None] * tangents) / W[:, None]
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    xdotn = np.einsum("vd,vd->v", v, normals)
    return GeometryField(
        normal=_freeze(normals),
        mean_curvature=_freeze(kappa),
        second_form_sq=_freeze(kappa * kappa),
        tangential_position=_freeze(v - xdotn[:, None] * normals),
        vertex_area=_freeze(vertex_areas(mesh)),
        shape_operator=_freeze(shape_op),
        flagged=_freeze(flagged),
    )


def criticality_residual(mesh, geom, weight):
    """Weighted mean and spread of H - <x,N>/2 over interior vertices.

    Returns (C_hat, residual): the measure-weighted mean of the putative
    constant and its weighted standard deviation. A small residual relative
    to |C_hat| certifies the critical-point condition H = <x,N>/2 + C.
    """
    interior = mesh.interior_indices()
    if interior.size == 0:
        raise GeometryError("criticality residual needs interior vertices")
    x = mesh.vertices[interior]
    n = geom.normal[interior]
    c = geom.mean_curvature[interior] - 0.5 * np.einsum("vd,vd->v", x, n)
    wts = np.exp(weight.f(x)) * geom.vertex_area[interior]
    total = wts.sum()
    c_hat = float(np.dot(wts, c) / total)
    residual = float(np.sqrt(np.dot(wts, (c - c_hat) ** 2) / total))
    return c_hat, residual


def max_edge_length(mesh) -> float:
    if mesh.dim == 1:
        return float(face_measures(mesh.vertices, mesh.faces, 1).max())
    _, edges, _ = _edge_structure(mesh.faces, mesh.n_vertices, mesh.dim)
    return float(np.linalg.norm(mesh.vertices[edges[:, 0]] - mesh.vertices[edges[:, 1]], axis=1).max())
