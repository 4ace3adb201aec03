"""Closed-form reference spectra, critical constants, and index predictors.

Eigenvalues follow the convention L u = -lambda u of the jacobi module, so
stability corresponds to nonnegative constrained eigenvalues.
"""

from __future__ import annotations

import math


class DegenerateRadiusError(ValueError):
    """An eigenvalue sits exactly at zero; the index jumps here."""


def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n (2 for n=1, pi for n=2)."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def plane_spectrum(n: int, k: int):
    """k-th eigenvalue level of the flat hyperplane through any offset.

    The weighted operator on a hyperplane is a shifted harmonic
    oscillator: lambda_k = (k - 1)/2 with the degree-k polynomial
    eigenspaces of dimension C(k+n-1, n-1).
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    return (k - 1) / 2.0, math.comb(k + n - 1, n - 1)


def sphere_harmonic_multiplicity(n: int, k: int) -> int:
    """Dimension of degree-k spherical harmonics on S^n."""
    if k == 0:
        return 1
    return (2 * k + n - 1) * math.factorial(k + n - 2) // (
        math.factorial(k) * math.factorial(n - 1)
    )


def sphere_spectrum(n: int, R: float, k: int):
    """k-th eigenvalue level of the origin-centered radius-R sphere.

    lambda_k = (k (k + n - 1) - n) / R^2 - 1/2, the Laplacian spectrum
    shifted by the curvature potential |A|^2 + 1/2 = n/R^2 + 1/2. Level 1
    is always (-1/2, n+1): the translation functions <v, N>.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if R <= 0:
        raise ValueError("R must be > 0")
    lam = (k * (k + n - 1) - n) / R ** 2 - 0.5
    return lam, sphere_harmonic_multiplicity(n, k)


def sphere_index(n: int, R: float) -> int:
    """Constrained index of the radius-R sphere: multiplicities of the
    negative levels k >= 1 (constants are excluded by the constraint)."""
    if R <= 0:
        raise ValueError("R must be > 0")
    total = 0
    k = 1
    while True:
        lam, mult = sphere_spectrum(n, R, k)
        if abs(lam) < 1e-12:
            raise DegenerateRadiusError(
                f"level k={k} sits at zero for R={R}; index is discontinuous here"
            )
        if lam > 0:
            return total
        total += mult
        k += 1


def critical_constant(kind: str, n: int, value: float = 0.0, k_cyl: int = 1) -> float:
    """Constant C in H = <x,N>/2 + C for the model families.

    plane: offset c with unit normal on the offset side -> C = -c/2.
    sphere: origin-centered radius R -> C = n/R - R/2.
    cylinder: S^k_R x R^{n-k} -> C = k/R - R/2.
    """
    if kind == "plane":
        return -value / 2.0
    if kind == "sphere":
        if value <= 0:
            raise ValueError("sphere radius must be > 0")
        return n / value - value / 2.0
    if kind == "cylinder":
        if value <= 0:
            raise ValueError("cylinder radius must be > 0")
        if not 1 <= k_cyl <= n:
            raise ValueError("cylinder sphere factor needs 1 <= k <= n")
        return k_cyl / value - value / 2.0
    raise ValueError(f"unknown kind {kind!r}")


def min_x_bound(n: int, M: float) -> float:
    """Reach of critical surfaces: any surface with |C| <= M meets the
    ball of radius D = M + sqrt(M^2 + 2n), the positive root of
    2n - D^2 + 2 M D = 0."""
    if M < 0:
        raise ValueError("M must be >= 0")
    return M + math.sqrt(M * M + 2.0 * n)
