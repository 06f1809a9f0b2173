import numpy as np
import pytest

from bubblelab.quadrature import QuadratureError, panel_edges, plane_integral, polar_integral


def test_panel_edges_cluster_at_focus():
    e = panel_edges(0.0, 4.0, 1.0, 1e-3)
    assert e[0] == 0.0 and e[-1] == 4.0
    assert np.all(np.diff(e) > 0)
    assert np.min(np.abs(e - 1.0)) == 0.0
    assert np.sum(np.abs(e - 1.0) < 1e-2) > 6


def test_gaussian_bump_off_centre():
    eps = 1e-3
    f = lambda z: np.exp(-np.abs(z - 1.0) ** 2 / eps**2)  # noqa: E731
    val, err = polar_integral(f, 0.0, 2.0, 1.0, eps)
    assert abs(val.real - np.pi * eps**2) < 1e-8 * np.pi * eps**2


def test_plane_integral_with_algebraic_tail():
    f = lambda z: 1.0 / (1.0 + np.abs(z) ** 2) ** 2  # noqa: E731
    val, err = plane_integral(f, 0.0, 1.0)
    assert abs(val.real - np.pi) < 1e-9


def test_strict_failure_carries_estimate():
    f = lambda z: np.cos(40 * z.real)  # noqa: E731
    with pytest.raises(QuadratureError) as exc:
        polar_integral(f, 0.0, 1.0, 0.5, 1.0, n_theta=8, n_gauss=4)
    assert exc.value.achieved > 0
    val, err = polar_integral(f, 0.0, 1.0, 0.5, 1.0, n_theta=8, n_gauss=4, strict=False)
    assert err == exc.value.achieved
