"""Numerical evaluation of the curvature and stability estimates.

Each check reports both sides of its inequality (holds iff lhs <= rhs),
the margin rhs - lhs, and whether the estimate's hypotheses were met on
the input surface. Failing hypotheses downgrade a report to informational
rather than pass/fail; the classical estimates here genuinely require
stability, which only flat surfaces can provide.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analytic import unit_ball_volume
from .jacobi import assemble, constrained_spectrum, stiffness_matrix
from .measure import mean_normal, weighted_measure
from .surface import GeometryError, criticality_residual

DEFAULT_TAU_SIMONS = 0.5
DEFAULT_CRIT_TOL = 5e-2
CURVATURE_SLACK = 2e-2  # relative slack when verifying |H| <= M discretely


def stability_constant(n: int) -> float:
    """Constant in the cutoff stability inequality: 12 per direction,
    summed over an orthonormal frame of n+1 directions."""
    return 12.0 * (n + 1)


def choi_schoen_epsilon(n: int, M: float) -> float:
    """Largest small-energy threshold that forces the pointwise bound:
    omega_n e^{-(M + 2 + M^2/2)} / 4."""
    return unit_ball_volume(n) * np.exp(-(M + 2.0 + 0.5 * M * M)) / 4.0


@dataclass(frozen=True)
class EstimateReport:
    name: str
    lhs: float
    rhs: float
    margin: float
    hypothesis_ok: bool
    locus: Optional[int] = None

    @classmethod
    def make(cls, name, lhs, rhs, hypothesis_ok, locus=None):
        lhs = float(lhs)
        rhs = float(rhs)
        return cls(
            name=name,
            lhs=lhs,
            rhs=rhs,
            margin=rhs - lhs,
            hypothesis_ok=bool(hypothesis_ok),
            locus=None if locus is None else int(locus),
        )

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


@dataclass(frozen=True)
class ScreenResult:
    """Criticality and stability screen shared by the estimate battery."""

    stable: bool
    critical: bool
    lambda_min: float
    c_hat: float
    residual: float


def stability_screen(
    mesh, geom, weight, tau_zero=1e-2, crit_tol=DEFAULT_CRIT_TOL, seed=0
) -> ScreenResult:
    """Check the critical-point condition and constrained nonnegativity.

    The surface passes when the weighted spread of H - <x,N>/2 is small
    against 1 + |C| and the smallest constrained eigenvalue clears the
    zero band from below.
    """
    c_hat, residual = criticality_residual(mesh, geom, weight)
    critical = residual <= crit_tol * (1.0 + abs(c_hat))
    assembly = assemble(mesh, geom, weight)
    spec = constrained_spectrum(assembly, k=1, constrained=True, seed=seed)
    lam = float(spec.eigenvalues[0])
    stable = critical and lam >= -tau_zero * (1.0 + abs(lam))
    return ScreenResult(
        stable=stable, critical=critical, lambda_min=lam, c_hat=c_hat, residual=residual
    )


# ---------------------------------------------------------------------------
# extrinsic-ball quadrature


def _triangle_accumulate(P, U, center, radius, weight_f, max_depth):
    """Integral of the linear interpolant over the part of the triangles
    inside the Euclidean ball, by recursive 1->4 splitting of straddlers."""
    total = 0.0
    for depth in range(max_depth + 1):
        if P.shape[0] == 0:
            break
        d = np.linalg.norm(P - center, axis=2)
        diam = np.maximum(
            np.linalg.norm(P[:, 0] - P[:, 1], axis=1),
            np.maximum(
                np.linalg.norm(P[:, 1] - P[:, 2], axis=1),
                np.linalg.norm(P[:, 2] - P[:, 0], axis=1),
            ),
        )
        fully_in = d.max(axis=1) <= radius
        fully_out = d.min(axis=1) - diam >= radius
        take = fully_in
        if depth == max_depth:
            # last pass: classify straddlers by their centroid
            centroids = P.mean(axis=1)
            take = np.linalg.norm(centroids - center, axis=1) <= radius
        if take.any():
            Pi, Ui = P[take], U[take]
            area = 0.5 * np.linalg.norm(
                np.cross(Pi[:, 1] - Pi[:, 0], Pi[:, 2] - Pi[:, 0]), axis=1
            )
            mean_u = Ui.mean(axis=1)
            if weight_f is not None:
                mean_u = mean_u * np.exp(weight_f(Pi.mean(axis=1)))
            total += float(np.dot(area, mean_u))
        if depth == max_depth:
            break
        split = ~(fully_in | fully_out)
        Ps, Us = P[split], U[split]
        if Ps.shape[0] == 0:
            break
        M01 = 0.5 * (Ps[:, 0] + Ps[:, 1])
        M12 = 0.5 * (Ps[:, 1] + Ps[:, 2])
        M20 = 0.5 * (Ps[:, 2] + Ps[:, 0])
        u01 = 0.5 * (Us[:, 0] + Us[:, 1])
        u12 = 0.5 * (Us[:, 1] + Us[:, 2])
        u20 = 0.5 * (Us[:, 2] + Us[:, 0])
        P = np.concatenate(
            [
                np.stack([Ps[:, 0], M01, M20], axis=1),
                np.stack([Ps[:, 1], M12, M01], axis=1),
                np.stack([Ps[:, 2], M20, M12], axis=1),
                np.stack([M01, M12, M20], axis=1),
            ]
        )
        U = np.concatenate(
            [
                np.stack([Us[:, 0], u01, u20], axis=1),
                np.stack([Us[:, 1], u12, u01], axis=1),
                np.stack([Us[:, 2], u20, u12], axis=1),
                np.stack([u01, u12, u20], axis=1),
            ]
        )
    return total


def _segment_accumulate(P, U, center, radius, weight_f):
    """Exact clipping of segments against the ball: |x(t) - c|^2 is
    quadratic in the parameter, so the inside interval is closed form."""
    a = P[:, 0] - center
    e = P[:, 1] - P[:, 0]
    A = np.einsum("sd,sd->s", e, e)
    B = 2.0 * np.einsum("sd,sd->s", a, e)
    C = np.einsum("sd,sd->s", a, a) - radius * radius
    disc = B * B - 4.0 * A * C
    total = 0.0
    hit = disc > 0
    sq = np.sqrt(np.maximum(disc, 0.0))
    t0 = np.clip((-B - sq) / (2.0 * A), 0.0, 1.0)
    t1 = np.clip((-B + sq) / (2.0 * A), 0.0, 1.0)
    frac = np.where(hit, t1 - t0, 0.0)
    keep = frac > 0
    if not keep.any():
        return 0.0
    tm = 0.5 * (t0 + t1)
    length = np.sqrt(A) * frac
    mid_val = U[:, 0] * (1 - tm) + U[:, 1] * tm
    if weight_f is not None:
        mid_pts = P[:, 0] + tm[:, None] * e
        mid_val = mid_val * np.exp(weight_f(mid_pts))
    total = float(np.dot(length[keep], mid_val[keep]))
    return total


def ball_region_integral(
    mesh, center, radius, vertex_values=None, weight=None, max_depth=8
) -> float:
    """Integral over the mesh inside the Euclidean ball B_radius(center).

    Integrates the piecewise-linear interpolant of ``vertex_values``
    (area when omitted), optionally against the weight e^f evaluated at
    element midpoints. Straddling triangles are refined recursively, so
    the ball boundary is resolved well below the mesh scale.
    """
    center = np.asarray(center, dtype=float)
    values = (
        np.ones(mesh.n_vertices)
        if vertex_values is None
        else np.asarray(vertex_values, dtype=float)
    )
    P = mesh.vertices[mesh.faces]
    U = values[mesh.faces]
    wf = None if weight is None else weight.f
    if mesh.dim == 1:
        return _segment_accumulate(P, U, center, radius, wf)
    return _triangle_accumulate(P, U, center, radius, wf, max_depth)


# ---------------------------------------------------------------------------
# the estimate battery


def modified_stability_report(mesh, geom, weight, phi, screen=None) -> EstimateReport:
    """Cutoff form of the stability inequality.

    lhs combines the normal dispersion around the weighted mean normal
    with the |A|^2 energy seen by that mean; rhs is the cutoff Dirichlet
    energy scaled by the dimensional constant. Requires phi >= 0 supported
    away from the boundary; hypothesis is the stability screen.
    """
    phi = np.asarray(phi, dtype=float)
    if np.any(phi < 0):
        raise ValueError("phi must be nonnegative")
    if not np.any(phi > 0):
        raise ValueError("phi must not vanish identically")
    if np.any(phi[mesh.boundary_vertex] != 0):
        raise ValueError("phi must vanish on the boundary")
    if screen is None:
        screen = stability_screen(mesh, geom, weight)
    w = weighted_measure(mesh, geom, weight).vertex_weight
    n_phi = mean_normal(mesh, geom, weight, phi)
    disp = ((geom.normal - n_phi) ** 2).sum(axis=1)
    lhs = float(np.dot(w, phi * phi * disp))
    lhs += float(np.dot(n_phi, n_phi) * np.dot(w, phi * phi * geom.second_form_sq))
    vw = np.exp(weight.f(mesh.vertices))
    S = stiffness_matrix(mesh, vw[mesh.faces].mean(axis=1))
    rhs = stability_constant(mesh.dim) * float(phi @ (S @ phi))
    return EstimateReport.make("modified_stability", lhs, rhs, screen.stable)


def integral_curvature_report(mesh, geom, weight, R, screen=None) -> EstimateReport:
    """Weighted |A|^2 mass of the inner ball against the annulus mass.

    lhs = int_{B_R} |A|^2 dA_mu, rhs = 2 B_n R^{-2} A_mu(B_2R \\ B_R);
    the hypothesis couples the area comparison A_mu(B_R) >= rhs with the
    stability screen.
    """
    if R <= 0:
        raise ValueError("R must be > 0")
    extent = float(np.linalg.norm(mesh.vertices, axis=1).max())
    if not mesh.is_closed and R >= extent:
        raise ValueError(
            f"probe radius R={R} reaches past the truncated mesh (extent {extent:.3g})"
        )
    if screen is None:
        screen = stability_screen(mesh, geom, weight)
    ball = ball_region_integral(mesh, np.zeros(mesh.vertices.shape[1]), R, weight=weight)
    ball2 = ball_region_integral(
        mesh, np.zeros(mesh.vertices.shape[1]), 2.0 * R, weight=weight
    )
    annulus = max(ball2 - ball, 0.0)
    lhs = ball_region_integral(
        mesh, np.zeros(mesh.vertices.shape[1]), R, geom.second_form_sq, weight=weight
    )
    rhs = 2.0 * stability_constant(mesh.dim) * annulus / R ** 2
    hypothesis = bool(ball >= rhs) and screen.stable
    return EstimateReport.make("integral_curvature", lhs, rhs, hypothesis)


def simons_residual_report(mesh, geom, C, tau=DEFAULT_TAU_SIMONS) -> EstimateReport:
    """Pointwise defect of the Simons-type inequality for |A|^2.

    rho = Delta |A|^2 + (|x|^2/8)|A|^2 + (2 + C^2)|A|^4 must be
    nonnegative on critical surfaces; lhs is the worst violation -min rho
    against the tolerance rhs = tau. Uses the unweighted cotangent
    Laplacian, surfaces in R^3 only.
    """
    if mesh.dim != 2:
        raise ValueError("the Simons residual is defined for surfaces in R^3")
    n_flagged = len(geom.flagged)
    if n_flagged > 0.01 * mesh.n_vertices:
        raise GeometryError(
            f"{n_flagged} vertices with unreliable curvature fits (> 1%)"
        )
    interior = mesh.interior_indices()
    if interior.size == 0:
        raise GeometryError("no interior vertices")
    S0 = stiffness_matrix(mesh)
    asq = geom.second_form_sq
    lap = -(S0 @ asq) / geom.vertex_area
    x2 = np.einsum("vd,vd->v", mesh.vertices, mesh.vertices)
    rho = lap + 0.125 * x2 * asq + (2.0 + C * C) * asq * asq
    rho_int = rho[interior]
    worst = int(interior[np.argmin(rho_int)])
    lhs = -float(rho_int.min())
    return EstimateReport.make("simons_residual", lhs, tau, True, locus=worst)


def _ball_vertex_ids(mesh, p, radius):
    d = np.linalg.norm(mesh.vertices - mesh.vertices[p], axis=1)
    return np.flatnonzero(d <= radius)


def mean_value_report(mesh, geom, p, f, s, t, lam, M) -> EstimateReport:
    """Extrinsic mean value inequality at vertex p.

    omega_n f(p) <= e^{(lam/2t + M)s} s^{-n} int_{B_s(p)} f dA for
    nonnegative f with Delta f >= -lam t^{-2} f on B_t(p) and |H| <= M
    there. Areas are Euclidean (unweighted).
    """
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        raise ValueError("f must be nonnegative")
    if s > t:
        raise ValueError("need s <= t")
    if s <= 0:
        raise ValueError("need s > 0")
    in_s = _ball_vertex_ids(mesh, p, s)
    if mesh.boundary_vertex[in_s].any():
        raise ValueError("B_s(p) touches the boundary; the bound needs interior balls")
    in_t = _ball_vertex_ids(mesh, p, t)
    h_ok = bool(np.all(np.abs(geom.mean_curvature[in_t]) <= M * (1 + CURVATURE_SLACK) + 1e-12))
    S0 = stiffness_matrix(mesh)
    lap_f = -(S0 @ f) / geom.vertex_area
    in_t_interior = in_t[~mesh.boundary_vertex[in_t]]
    sub_ok = bool(
        np.all(lap_f[in_t_interior] >= -lam / t ** 2 * f[in_t_interior] - 1e-9 * (1 + np.abs(f[in_t_interior])))
    )
    n = mesh.dim
    lhs = unit_ball_volume(n) * float(f[p])
    integral = ball_region_integral(mesh, mesh.vertices[p], s, f)
    rhs = np.exp((lam / (2.0 * t) + M) * s) * s ** (-n) * integral
    return EstimateReport.make("mean_value", lhs, rhs, h_ok and sub_ok, locus=p)


def area_lower_bound_report(mesh, geom, p, s, M) -> EstimateReport:
    """Monotonicity-type lower bound on extrinsic ball areas:
    omega_n e^{-Ms} s^n <= Area(B_s(p) cap Sigma) when |H| <= M there."""
    if s <= 0:
        raise ValueError("need s > 0")
    in_s = _ball_vertex_ids(mesh, p, s)
    if mesh.boundary_vertex[in_s].any():
        raise ValueError("B_s(p) touches the boundary; the bound needs interior balls")
    h_ok = bool(np.all(np.abs(geom.mean_curvature[in_s]) <= M * (1 + CURVATURE_SLACK) + 1e-12))
    n = mesh.dim
    lhs = unit_ball_volume(n) * np.exp(-M * s) * s ** n
    rhs = ball_region_integral(mesh, mesh.vertices[p], s)
    return EstimateReport.make("area_lower_bound", lhs, rhs, h_ok, locus=p)


def pointwise_decay_report(mesh, geom, weight, R, gamma, M, screen=None) -> EstimateReport:
    """Small-annulus-energy pointwise decay of |A|^2 near the origin.

    When the weighted annulus mass is exponentially small and the inner
    ball dominates, stable critical surfaces in R^3 satisfy
    sup_{B_{R/4}} |A|^2 <= 16 R^2 e^{-gamma R^2}.
    """
    if mesh.dim != 2:
        raise ValueError("the pointwise decay bound is for surfaces in R^3")
    if R <= 1:
        raise ValueError("need R > 1")
    extent = float(np.linalg.norm(mesh.vertices, axis=1).max())
    if not mesh.is_closed and R >= extent:
        raise ValueError(
            f"probe radius R={R} reaches past the truncated mesh (extent {extent:.3g})"
        )
    if screen is None:
        screen = stability_screen(mesh, geom, weight)
    origin = np.zeros(mesh.vertices.shape[1])
    ball = ball_region_integral(mesh, origin, R, weight=weight)
    ball2 = ball_region_integral(mesh, origin, 2.0 * R, weight=weight)
    annulus = max(ball2 - ball, 0.0)
    b_n = stability_constant(mesh.dim)
    area_hyp = ball >= 2.0 * b_n * annulus / R ** 2
    eps = choi_schoen_epsilon(mesh.dim, M)
    small_hyp = annulus < (R ** 2 / (2.0 * b_n)) * np.exp(-(1.0 / 16.0 + gamma) * R ** 2) * eps
    hypothesis = bool(area_hyp) and bool(small_hyp) and screen.stable
    r = np.linalg.norm(mesh.vertices, axis=1)
    core = np.flatnonzero(r <= R / 4.0)
    if core.size:
        lhs = float(geom.second_form_sq[core].max())
        locus = int(core[np.argmax(geom.second_form_sq[core])])
    else:
        lhs, locus = 0.0, None
    rhs = 16.0 * R ** 2 * np.exp(-gamma * R ** 2)
    return EstimateReport.make("pointwise_decay", lhs, rhs, hypothesis, locus=locus)
