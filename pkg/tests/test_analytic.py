import itertools
import math

import numpy as np
import pytest

from gausstab import analytic


def count_monomials(n, k):
    """Brute-force count of degree-k monomials in n variables."""
    return sum(1 for c in itertools.product(range(k + 1), repeat=n) if sum(c) == k)


def harmonic_dim(n, k):
    """dim of degree-k harmonics on S^n via homogeneous polynomial counts."""
    total = count_monomials(n + 1, k)
    lower = count_monomials(n + 1, k - 2) if k >= 2 else 0
    return total - lower


def test_plane_spectrum_values():
    assert analytic.plane_spectrum(2, 0) == (-0.5, 1)
    assert analytic.plane_spectrum(2, 1) == (0.0, 2)
    assert analytic.plane_spectrum(2, 2) == (0.5, 3)
    for n in (1, 2, 3):
        for k in range(6):
            lam, mult = analytic.plane_spectrum(n, k)
            assert lam == (k - 1) / 2.0
            assert mult == count_monomials(n, k)


def test_sphere_spectrum_values():
    assert analytic.sphere_spectrum(2, 1.0, 1) == (-0.5, 3)
    assert analytic.sphere_spectrum(2, 1.0, 2) == (3.5, 5)
    assert analytic.sphere_spectrum(2, 1.0, 0) == (-2.5, 1)
    for n in (1, 2, 3):
        for k in range(6):
            _, mult = analytic.sphere_spectrum(n, 1.0, k)
            assert mult == harmonic_dim(n, k)


def test_translation_level_independent_of_radius():
    for n in (1, 2, 3):
        for R in (0.5, 1.0, 2.0, 7.3):
            assert analytic.sphere_spectrum(n, R, 1) == (-0.5, n + 1)


def test_sphere_index():
    assert analytic.sphere_index(2, 1.0) == 3
    assert analytic.sphere_index(2, 2.0) == 3
    assert analytic.sphere_index(2, 2.8) == 3
    assert analytic.sphere_index(2, 3.0) == 8


def test_sphere_index_degenerate_radius():
    with pytest.raises(analytic.DegenerateRadiusError):
        analytic.sphere_index(2, math.sqrt(8.0))


def test_sphere_index_nondecreasing():
    prev = 0
    for R in np.linspace(0.3, 6.0, 40):
        try:
            idx = analytic.sphere_index(2, float(R))
        except analytic.DegenerateRadiusError:
            continue
        assert idx >= prev
        prev = idx


def test_critical_constant():
    assert analytic.critical_constant("plane", 2, 0.0) == 0.0
    assert analytic.critical_constant("plane", 2, 1.0) == -0.5
    assert analytic.critical_constant("sphere", 2, 2.0) == 0.0
    assert analytic.critical_constant("sphere", 2, 1.0) == 1.5
    assert analytic.critical_constant("cylinder", 2, 1.0, k_cyl=1) == 0.5
    with pytest.raises(ValueError):
        analytic.critical_constant("sphere", 2, -1.0)
    with pytest.raises(ValueError):
        analytic.critical_constant("donut", 2, 1.0)


def test_min_x_bound():
    assert analytic.min_x_bound(2, 0.0) == 2.0
    assert analytic.min_x_bound(2, 1.5) == pytest.approx(4.0)
    assert analytic.min_x_bound(1, 0.0) == pytest.approx(math.sqrt(2.0))
    for n in (1, 2, 3):
        for M in (0.0, 0.7, 2.5):
            D = analytic.min_x_bound(n, M)
            assert abs(2 * n - D * D + 2 * M * D) < 1e-12
            assert D > 0


def test_unit_ball_volume():
    assert analytic.unit_ball_volume(1) == pytest.approx(2.0)
    assert analytic.unit_ball_volume(2) == pytest.approx(math.pi)
    assert analytic.unit_ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0)
