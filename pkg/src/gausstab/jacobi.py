"""Second-variation operators on weighted meshes and their spectra.

The quadratic form of interest is

    Q(u, v) = u^T (S - V) v,

where S is the weighted stiffness (the Dirichlet form of the measure
e^f dA, whose weak form already contains the drift term of the weighted
Laplacian) and V is the diagonal potential (|A|^2 - Hess_f(N, N)) in the
lumped measure. Eigenvalues follow the convention L u = -lambda u, so the
generalized problem reads (S - V) u = lambda M u and stability on the
mean-zero subspace means the constrained spectrum is nonnegative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .measure import radial_cutoff, weighted_measure
from .surface import face_measures

DEFAULT_TAU_ZERO = 1e-2
DEFAULT_TAU_CLUSTER = 5e-2
DEFAULT_TAU_SPLIT = 1e-6
DENSE_CUTOFF = 400  # interior sizes at or below this use dense solvers


class AssemblyError(ValueError):
    """Mesh/geometry cannot be assembled into operators."""


class EigensolverError(RuntimeError):
    """Iterative eigensolver failed to converge."""


class IndexUndeterminedError(RuntimeError):
    """Computed window too small to certify the index."""


def stiffness_matrix(mesh, face_scale=None) -> sp.csr_matrix:
    """Element-wise Dirichlet form: cotangent weights for triangles,
    inverse lengths for segments, each element scaled by ``face_scale``."""
    v, f = mesh.vertices, mesh.faces
    nv = mesh.n_vertices
    if face_scale is None:
        face_scale = np.ones(mesh.n_faces)
    if mesh.dim == 1:
        length = np.linalg.norm(v[f[:, 1]] - v[f[:, 0]], axis=1)
        w = face_scale / length
        i, j = f[:, 0], f[:, 1]
        rows = np.concatenate([i, j, i, j])
        cols = np.concatenate([j, i, i, j])
        vals = np.concatenate([-w, -w, w, w])
        return sp.csr_matrix((vals, (rows, cols)), shape=(nv, nv))
    rows, cols, vals = [], [], []
    for c in range(3):
        i, j, k = f[:, c], f[:, (c + 1) % 3], f[:, (c + 2) % 3]
        e1 = v[j] - v[i]
        e2 = v[k] - v[i]
        cross = np.linalg.norm(np.cross(e1, e2), axis=1)
        cot = np.einsum("fd,fd->f", e1, e2) / cross
        w = 0.5 * cot * face_scale
        rows.extend([j, k, j, k])
        cols.extend([k, j, j, k])
        vals.extend([-w, -w, w, w])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    return sp.csr_matrix((vals, (rows, cols)), shape=(nv, nv))


def face_gradients(mesh, values) -> np.ndarray:
    """Gradient of the piecewise-linear interpolant, constant per face."""
    v, f = mesh.vertices, mesh.faces
    values = np.asarray(values, dtype=float)
    if mesh.dim == 1:
        e = v[f[:, 1]] - v[f[:, 0]]
        l2 = np.einsum("fd,fd->f", e, e)
        return (values[f[:, 1]] - values[f[:, 0]])[:, None] * e / l2[:, None]
    e1 = v[f[:, 1]] - v[f[:, 0]]
    e2 = v[f[:, 2]] - v[f[:, 0]]
    n = np.cross(e1, e2)
    a2 = np.einsum("fd,fd->f", n, n)  # (2*area)^2
    g = (
        values[f[:, 0], None] * np.cross(n, v[f[:, 2]] - v[f[:, 1]])
        + values[f[:, 1], None] * np.cross(n, v[f[:, 0]] - v[f[:, 2]])
        + values[f[:, 2], None] * np.cross(n, v[f[:, 1]] - v[f[:, 0]])
    )
    return g / a2[:, None]


def vertex_gradient(mesh, values) -> np.ndarray:
    """Measure-weighted average of incident face gradients."""
    g = face_gradients(mesh, values)
    m = face_measures(mesh.vertices, mesh.faces, mesh.dim)
    acc = np.zeros_like(mesh.vertices)
    tot = np.zeros(mesh.n_vertices)
    for c in range(mesh.dim + 1):
        np.add.at(acc, mesh.faces[:, c], g * m[:, None])
        np.add.at(tot, mesh.faces[:, c], m)
    return acc / tot[:, None]


@dataclass(frozen=True)
class OperatorAssembly:
    """Weighted stiffness, lumped mass, and potential on one mesh.

    Matrices are stored on all vertices; ``interior`` lists the
    degrees of freedom kept after removing Dirichlet (boundary) rows.
    """

    stiffness: sp.csr_matrix     # S, full vertex set
    mass: np.ndarray             # diagonal of M (vertex weights)
    potential: np.ndarray        # diagonal of V
    interior: np.ndarray         # kept dof ids
    n_vertices: int

    def operator_matrix(self) -> sp.csr_matrix:
        """S - V restricted to interior dofs."""
        K = self.stiffness - sp.diags(self.potential)
        return K[self.interior][:, self.interior].tocsr()

    def mass_interior(self) -> np.ndarray:
        return self.mass[self.interior]

    def quad_form(self, u, v=None) -> float:
        """Q(u, v) on full-length vertex vectors."""
        if v is None:
            v = u
        Ku = self.stiffness @ v - self.potential * v
        return float(np.dot(u, Ku))

    def extend(self, u_int) -> np.ndarray:
        """Zero-pad an interior vector to the full vertex set."""
        out_shape = (self.n_vertices,) + u_int.shape[1:]
        full = np.zeros(out_shape)
        full[self.interior] = u_int
        return full


def assemble(mesh, geom, weight) -> OperatorAssembly:
    """Build S, M, V for the given weight.

    The Gaussian tag uses the exact specialization Hess_f(N, N) = -1/2;
    custom weights evaluate their Hessian pointwise. Boundary vertices are
    removed from the interior dof set (Dirichlet condition for compactly
    supported variations).
    """
    interior = mesh.interior_indices()
    if interior.size == 0:
        raise AssemblyError("no interior vertices to assemble on")
    vw = np.exp(weight.f(mesh.vertices))
    face_scale = vw[mesh.faces].mean(axis=1)
    S = stiffness_matrix(mesh, face_scale)
    mass = vw * geom.vertex_area
    if weight.tag == "gaussian":
        hess_nn = np.full(mesh.n_vertices, -0.5)
    else:
        hess_nn = weight.hess_quad(mesh.vertices, geom.normal)
    potential = (geom.second_form_sq - hess_nn) * mass
    return OperatorAssembly(
        stiffness=S,
        mass=mass,
        potential=potential,
        interior=interior,
        n_vertices=mesh.n_vertices,
    )


@dataclass(frozen=True)
class SpectrumResult:
    """Ascending eigenvalues of (S - V) u = lambda M u with eigenfunctions.

    Eigenfunctions are full-length vertex vectors (zero on the boundary),
    M-orthonormal. ``multiplicities`` groups eigenvalues into clusters
    whose internal gaps stay below the clustering tolerance.
    """

    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray   # (nv, k)
    multiplicities: tuple
    constrained: bool
    tau_cluster: float

    def clusters(self):
        """(mean eigenvalue, multiplicity) per cluster, ascending."""
        out = []
        start = 0
        for m in self.multiplicities:
            out.append((float(self.eigenvalues[start:start + m].mean()), m))
            start += m
        return out


def _cluster_sizes(eigenvalues, tau):
    if len(eigenvalues) == 0:
        return ()
    sizes = []
    count = 1
    for a, b in zip(eigenvalues[:-1], eigenvalues[1:]):
        if b - a <= tau:
            count += 1
        else:
            sizes.append(count)
            count = 1
    sizes.append(count)
    return tuple(sizes)


def _dense_smallest(K, m, k, constrained):
    """Dense reference path for small interior problems."""
    A = K.toarray() / np.sqrt(np.outer(m, m))
    if constrained:
        q = np.sqrt(m)
        q = q / np.linalg.norm(q)
        # Householder reflector mapping e1 -> q; columns 2.. span q-perp
        w = q.copy()
        w[0] -= 1.0
        nw = np.linalg.norm(w)
        if nw < 1e-14:
            B = np.eye(len(q))[:, 1:]
        else:
            w /= nw
            B = (np.eye(len(q)) - 2.0 * np.outer(w, w))[:, 1:]
        Ar = B.T @ A @ B
        vals, vecs = np.linalg.eigh(Ar)
        y = B @ vecs[:, :k]
    else:
        vals, vecs = np.linalg.eigh(A)
        y = vecs[:, :k]
    return vals[:k], y


def _deflated_opinv(K, m, sigma, q):
    """Exact (P A P + alpha q q^T - sigma)^{-1} via a rank-2 update of A - sigma.

    A is the mass-normalized operator; q the unit constraint direction.
    """
    n = K.shape[0]
    s = 1.0 / np.sqrt(m)
    A = sp.diags(s) @ K @ sp.diags(s)
    A = A.tocsc()
    lu = spla.splu((A - sigma * sp.identity(n, format="csc")).tocsc())
    w = A @ q
    beta = float(q @ w)
    alpha = 1e4 * (1.0 + abs(sigma))
    U = np.column_stack([q, w])
    Cinv = np.array([[0.0, -1.0], [-1.0, -(beta + alpha)]])
    Z = np.column_stack([lu.solve(U[:, 0]), lu.solve(U[:, 1])])
    small = Cinv + U.T @ Z

    def opinv(vec):
        y = lu.solve(vec)
        return y - Z @ np.linalg.solve(small, U.T @ y)

    def matvec(vec):
        pv = vec - q * (q @ vec)
        out = A @ pv
        out -= q * (q @ out)
        out += alpha * q * (q @ vec)
        return out

    op_inv = spla.LinearOperator((n, n), matvec=opinv)
    op_d = spla.LinearOperator((n, n), matvec=matvec)
    return op_d, op_inv


def constrained_spectrum(
    assembly: OperatorAssembly,
    k: int,
    constrained: bool = True,
    tau_cluster: float = DEFAULT_TAU_CLUSTER,
    seed: int = 0,
) -> SpectrumResult:
    """Smallest k eigenpairs of (S - V) u = lambda M u.

    With ``constrained`` the solve runs on the M-orthogonal complement of
    the constants (the linearized volume constraint), enforced exactly
    inside the iteration by deflation of the constant direction.
    """
    K = assembly.operator_matrix()
    m = assembly.mass_interior()
    n = K.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < interior size, got k={k}, n={n}")

    if n <= DENSE_CUTOFF:
        vals, y = _dense_smallest(K, m, k, constrained)
    else:
        vmax = float(np.max(assembly.potential[assembly.interior] / m))
        sigma = -max(vmax, 0.0) - 1.0
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(n)
        try:
            if constrained:
                q = np.sqrt(m)
                q /= np.linalg.norm(q)
                v0 -= q * (q @ v0)
                op_d, op_inv = _deflated_opinv(K, m, sigma, q)
                vals, y = spla.eigsh(
                    op_d, k=k, sigma=sigma, which="LM", OPinv=op_inv, v0=v0
                )
            else:
                s = 1.0 / np.sqrt(m)
                A = (sp.diags(s) @ K @ sp.diags(s)).tocsc()
                vals, y = spla.eigsh(A, k=k, sigma=sigma, which="LM", v0=v0)
        except spla.ArpackNoConvergence as exc:
            raise EigensolverError(
                f"eigensolver stalled: {len(exc.eigenvalues)}/{k} pairs converged"
            ) from exc
        order = np.argsort(vals)
        vals, y = vals[order], y[:, order]

    u = y / np.sqrt(m)[:, None]
    funcs = assembly.extend(u)
    return SpectrumResult(
        eigenvalues=np.asarray(vals, dtype=float),
        eigenfunctions=funcs,
        multiplicities=_cluster_sizes(vals, tau_cluster),
        constrained=constrained,
        tau_cluster=tau_cluster,
    )


@dataclass(frozen=True)
class IndexReport:
    """Negative-eigenvalue count of the constrained form.

    ``zero_band`` is the symmetric tolerance used to separate genuine
    negatives from discrete zero modes.
    """

    index: int
    zero_modes: int
    spectral_gap: float
    zero_band: float


def stability_index(spectrum: SpectrumResult, tau_zero: float = DEFAULT_TAU_ZERO) -> IndexReport:
    """Count constrained eigenvalues below the zero band.

    The band is tau_zero * (1 + |lambda_min|). Raises when the computed
    window does not reach past the band (index would be a lower bound
    only).
    """
    if not spectrum.constrained:
        raise ValueError("index is defined for the constrained spectrum")
    lam = spectrum.eigenvalues
    band = tau_zero * (1.0 + abs(float(lam[0])))
    if lam[-1] <= band:
        raise IndexUndeterminedError(
            f"largest computed eigenvalue {lam[-1]:.4g} still inside the zero band {band:.4g}"
        )
    negative = int(np.sum(lam < -band))
    zero = int(np.sum(np.abs(lam) <= band))
    outside = np.abs(lam[np.abs(lam) > band])
    gap = float(outside.min()) if outside.size else float("nan")
    return IndexReport(index=negative, zero_modes=zero, spectral_gap=gap, zero_band=band)


class TranslationResidual(NamedTuple):
    residual: float
    exact_kernel: bool


def translation_residual(assembly, geom, v, kernel_rtol=1e-8) -> TranslationResidual:
    """Relative defect of the translation identity L<v,N> = <v,N>/2.

    Measured as ||(S - V) u + M u / 2||_{M^{-1}} / ||u||_M on interior
    dofs for u = <v, N>. Directions in the splitting kernel give u = 0 and
    are reported as exact kernel with residual zero.
    """
    v = np.asarray(v, dtype=float)
    u_full = geom.normal @ v
    idx = assembly.interior
    u = u_full[idx]
    m = assembly.mass_interior()
    norm_u = np.sqrt(np.dot(m, u * u))
    scale = np.linalg.norm(v) * np.sqrt(m.sum())
    if norm_u <= kernel_rtol * scale:
        return TranslationResidual(residual=0.0, exact_kernel=True)
    K = assembly.operator_matrix()
    r = K @ u + 0.5 * m * u
    res = np.sqrt(np.sum(r * r / m)) / norm_u
    return TranslationResidual(residual=float(res), exact_kernel=False)


@dataclass(frozen=True)
class SplitReport:
    """Gram matrix of the translation functions <e_a, N> and its kernel.

    ``kernel_dim`` counts directions v with <v, N> = 0 in the weighted
    L2 sense; those directions span the linear factor split off by the
    surface.
    """

    gram: np.ndarray
    singular_values: np.ndarray
    kernel_dim: int
    axis_directions: np.ndarray  # (kernel_dim, d)


def splitting_kernel(mesh, geom, weight, tau_split: float = DEFAULT_TAU_SPLIT) -> SplitReport:
    """Numerical kernel of v -> <v, N> from the translation Gram matrix."""
    w = weighted_measure(mesh, geom, weight).vertex_weight
    N = geom.normal
    gram = np.einsum("v,va,vb->ab", w, N, N)
    vals, vecs = np.linalg.eigh(gram)
    smax = float(vals[-1])
    kernel = vals < tau_split * smax
    return SplitReport(
        gram=gram,
        singular_values=vals[::-1].copy(),
        kernel_dim=int(kernel.sum()),
        axis_directions=vecs[:, kernel].T.copy(),
    )


class LocalizedSpanResult(NamedTuple):
    eigenvalues: np.ndarray
    dimension: int


def localized_span_spectrum(
    mesh, geom, weight, cutoff_radius: float, tau_split: float = DEFAULT_TAU_SPLIT
) -> LocalizedSpanResult:
    """Spectrum of Q restricted to phi_R * span{1, <e_a, N>}.

    The cutoff localizes the span of the constants and translation
    functions; numerically dependent columns (e.g. translation directions
    in the splitting kernel) are dropped by a Gram threshold. On critical
    surfaces of finite weighted area all returned eigenvalues are
    negative once the cutoff radius is large enough.
    """
    phi = radial_cutoff(mesh, cutoff_radius)
    assembly = assemble(mesh, geom, weight)
    idx = assembly.interior
    cols = [phi] + [phi * geom.normal[:, a] for a in range(mesh.vertices.shape[1])]
    B = np.stack(cols, axis=1)[idx]
    m = assembly.mass_interior()
    gram = B.T @ (m[:, None] * B)
    vals, vecs = np.linalg.eigh(gram)
    keep = vals > tau_split * max(float(vals[-1]), 1e-300)
    if not keep.any():
        return LocalizedSpanResult(eigenvalues=np.empty(0), dimension=0)
    basis = B @ (vecs[:, keep] / np.sqrt(vals[keep]))  # M-orthonormal columns
    K = assembly.operator_matrix()
    Qr = basis.T @ (K @ basis)
    Qr = 0.5 * (Qr + Qr.T)
    return LocalizedSpanResult(
        eigenvalues=np.linalg.eigvalsh(Qr), dimension=int(keep.sum())
    )


# ---------------------------------------------------------------------------
# discrete checks of the weighted integration-by-parts identities


def product_rule_gap(mesh, geom, weight, phi, f):
    """Both sides of int phi f L(phi f) = int phi^2 f Lf - int |grad phi|^2 f^2.

    Returns (lhs, rhs, scale); the identity holds up to quadrature error,
    measured relative to ``scale``.
    """
    assembly = assemble(mesh, geom, weight)
    phi = np.asarray(phi, dtype=float)
    f = np.asarray(f, dtype=float)
    pf = phi * f
    lhs = -assembly.quad_form(pf)
    term1 = -float((phi * phi * f) @ (assembly.stiffness @ f - assembly.potential * f))
    g = face_gradients(mesh, phi)
    g2 = np.einsum("fd,fd->f", g, g)
    fm = face_measures(mesh.vertices, mesh.faces, mesh.dim)
    ew = np.exp(weight.f(mesh.vertices))
    face_mass = fm * ew[mesh.faces].mean(axis=1)
    f2_face = (f ** 2)[mesh.faces].mean(axis=1)
    term2 = float(np.sum(g2 * f2_face * face_mass))
    rhs = term1 - term2
    scale = abs(term1) + abs(term2) + abs(lhs)
    return lhs, rhs, scale


def translation_pairing_gap(mesh, geom, weight, phi, v):
    """Both sides of int phi^2 |A|^2 <v,N> = 2 int phi A(grad phi, v^T).

    Valid on critical surfaces. Returns (lhs, rhs, scale) with the scale
    built from the absolute integrands.
    """
    w = weighted_measure(mesh, geom, weight).vertex_weight
    phi = np.asarray(phi, dtype=float)
    v = np.asarray(v, dtype=float)
    vn = geom.normal @ v
    lhs_density = phi * phi * geom.second_form_sq * vn
    lhs = float(np.dot(w, lhs_density))
    grad_phi = vertex_gradient(mesh, phi)
    vt = v[None, :] - vn[:, None] * geom.normal
    a_pair = np.einsum("vd,vde,ve->v", grad_phi, geom.shape_operator, vt)
    rhs_density = 2.0 * phi * a_pair
    rhs = float(np.dot(w, rhs_density))
    scale = float(np.dot(w, np.abs(lhs_density)) + np.dot(w, np.abs(rhs_density)))
    return lhs, rhs, scale
