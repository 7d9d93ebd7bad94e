import math

import numpy as np
import pytest

from fockvolterra.quadrature import QuadratureGrid, angles_for, auto_radius


def test_gaussian_integral():
    g = QuadratureGrid(8.0)
    assert g.integrate(lambda z: np.exp(-np.abs(z) ** 2)) == pytest.approx(math.pi, rel=1e-13)


def test_log_integrate_matches_integrate():
    g = QuadratureGrid(10.0)
    a = g.integrate(lambda z: np.exp(-np.abs(z) ** 2 / 2) * np.abs(z) ** 4).real
    b = math.exp(g.log_integrate(lambda z: -np.abs(z) ** 2 / 2 + 4 * np.log(np.abs(z))))
    # int r^5 e^{-r^2/2} dr * 2 pi = 8 * 2 pi
    assert a == pytest.approx(16 * math.pi, rel=1e-12)
    assert b == pytest.approx(a, rel=1e-12)


def test_annulus_adds_up():
    inner = QuadratureGrid(3.0)
    outer = inner.annulus(9.0)
    f = lambda z: np.exp(-np.abs(z) ** 2)  # noqa: E731
    assert inner.integrate(f) + outer.integrate(f) == pytest.approx(math.pi, rel=1e-13)


def test_shifted_center():
    g = QuadratureGrid(8.0, center=3 - 2j)
    val = g.integrate(lambda z: np.exp(-np.abs(z - (3 - 2j)) ** 2))
    assert val == pytest.approx(math.pi, rel=1e-13)


def test_angular_resolution_for_oscillating_exponent():
    k = 200.0
    n = angles_for(k)
    g = QuadratureGrid(1.0, n_angles=n, r_min=0.0)
    th = g.theta
    approx = np.mean(np.exp(k * np.cos(2 * th) - k))
    from scipy.special import ive
    assert approx == pytest.approx(ive(0, k), rel=1e-12)


def test_grid_validation():
    with pytest.raises(ValueError):
        QuadratureGrid(1.0, r_min=2.0)
    with pytest.raises(ValueError):
        QuadratureGrid(1.0, n_angles=7)


def test_auto_radius_detects_growth():
    assert auto_radius(lambda z: np.abs(z) ** 2 / 4) == math.inf
    assert auto_radius(lambda z: -np.abs(z) ** 2) < 10
