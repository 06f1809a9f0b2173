import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bubblelab.profiles import (
    BubbleParams,
    RootConfiguration,
    bubble_mass,
    far_field_value,
    flat_profile,
    global_profile,
    integral_identity,
    kernel_basis,
    local_harmonic_part,
    local_maxima,
    profile_density,
    profile_gradient,
    roots_log_identity,
    second_radial_solution,
    solve_radial_projection,
)


def fd_laplacian(f, z, h):
    out = 0.0
    for d in (1.0, 1j):
        out = out + (-f(z + 2 * h * d) + 16 * f(z + h * d) - 30 * f(z)
                     + 16 * f(z - h * d) - f(z - 2 * h * d)) / (12 * h**2)
    return out


@pytest.mark.parametrize("N,p", [(0, 0.0), (1, 0.0), (2, 0.2), (3, -0.2j)])
def test_profile_solves_liouville(N, p):
    params = BubbleParams(N, 3.0, 1.5, p)
    rng = np.random.default_rng(N)
    z = 2.0 * rng.standard_normal(40) + 2.0j * rng.standard_normal(40)
    lap = fd_laplacian(lambda y: global_profile(params, y), z, 1e-3)
    res = lap + profile_density(params, z)
    assert np.max(np.abs(res)) < 1e-5


@pytest.mark.parametrize("N", [0, 1, 2])
def test_maxima_have_height_mu_and_zero_gradient(N):
    params = BubbleParams(N, 5.0, 2.0, 0.1 + 0.05j, theta=0.3)
    q = local_maxima(params)
    assert len(q) == N + 1
    np.testing.assert_allclose(global_profile(params, q), 5.0, atol=1e-12)
    assert np.max(np.abs(profile_gradient(params, q))) < 1e-8


def test_gradient_matches_finite_differences():
    params = BubbleParams(2, 2.0, 1.0, 0.3)
    z = np.array([0.3 + 0.4j, -1.2 + 0.1j, 0.9 - 1.5j])
    h = 1e-6
    gx = (global_profile(params, z + h) - global_profile(params, z - h)) / (2 * h)
    gy = (global_profile(params, z + 1j * h) - global_profile(params, z - 1j * h)) / (2 * h)
    g = np.asarray(profile_gradient(params, z))
    g = g if np.iscomplexobj(g) else g[..., 0] + 1j * g[..., 1]
    np.testing.assert_allclose(g, gx + 1j * gy, atol=1e-7)


@settings(max_examples=25, deadline=None)
@given(N=st.integers(1, 4), r=st.floats(0.05, 3.0), t=st.floats(0, 2 * np.pi))
def test_rotational_symmetry(N, r, t):
    params = BubbleParams(N, 4.0)
    z = r * np.exp(1j * t)
    rot = np.exp(2j * np.pi / (N + 1))
    assert abs(global_profile(params, z) - global_profile(params, z * rot)) < 1e-11


@pytest.mark.parametrize("N", [0, 1, 2, 3])
@pytest.mark.parametrize("mu", [4.0, 8.0])
def test_mass_quantization(N, mu):
    m = bubble_mass(BubbleParams(N, mu, 1.0, 0.2))
    assert abs(m - 8 * np.pi * (N + 1)) <= 1e-8 * 8 * np.pi * (N + 1)


def test_per_core_mass_at_half_gap():
    params = BubbleParams(2, 10.0)
    q = local_maxima(params)
    half = abs(q[1] - q[0]) / 2
    for c in q:
        assert abs(bubble_mass(params, half, center=c) - 8 * np.pi) < 0.05


def test_mass_rejects_bad_radius():
    with pytest.raises(ValueError):
        bubble_mass(BubbleParams(1, 4.0), R=-1.0)
    with pytest.raises(ValueError):
        bubble_mass(BubbleParams(1, 4.0), center=1.0)


@pytest.mark.parametrize("kind", ["d_mu", "d_P", "d_Pbar"])
def test_integral_identities(kind):
    val, err = integral_identity(BubbleParams(1, 4.0, 1.0, 0.2), kind)
    assert abs(val) <= 1e-7 * 16 * np.pi


def test_roots_log_identity():
    for N in range(1, 9):
        for m in range(N + 1):
            assert abs(roots_log_identity(N, m) - np.log(N + 1)) < 1e-12
    with pytest.raises(ValueError):
        roots_log_identity(0)


@pytest.mark.parametrize("N", [0, 1, 2])
def test_far_field_value_decays_like_R_to_minus_N_plus_1(N):
    params = BubbleParams(N, 6.0, 1.0)
    errs = []
    for R in (10.0, 20.0, 40.0):
        V = global_profile(params, R * np.exp(1j * np.linspace(0, 2 * np.pi, 17)))
        errs.append(np.max(np.abs(V - far_field_value(params, R))))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    np.testing.assert_allclose(rates, N + 1, atol=0.05)
    with pytest.raises(ValueError):
        far_field_value(params, 1.5)


@pytest.mark.parametrize("i", [0, 1, 2])
def test_kernel_basis_is_annihilated(i):
    h0 = 3.0
    rng = np.random.default_rng(i)
    z = rng.uniform(-5, 5, 30) + 1j * rng.uniform(-5, 5, 30)
    f = lambda y: kernel_basis(h0, i, y)  # noqa: E731
    res = fd_laplacian(f, z, 1e-2) + h0 * np.exp(flat_profile(h0, z)) * f(z)
    assert np.max(np.abs(res)) < 1e-6


def test_second_radial_solution_wronskian():
    h0 = 2.0
    r = np.geomspace(1e-3, 1e3, 100)
    g, dg = second_radial_solution(h0, r, r0=1.0, derivative=True)
    c = h0 / 8 * r**2
    g1 = (1 - c) / (1 + c)
    dg1 = -4 * (h0 / 8) * r / (1 + c) ** 2
    W = r * (g1 * dg - dg1 * g)
    assert np.ptp(W) < 1e-8
    with pytest.raises(ValueError):
        second_radial_solution(8.0, r, r0=1.0)


def test_radial_projection_bound_is_stable():
    h0 = 1.0
    consts = []
    for r_max in (1e2, 1e3):
        g = solve_radial_projection(h0, lambda r: 1.0 / (1 + r) ** 3, r_max)
        r = np.geomspace(1e-3, r_max, 300)
        consts.append(np.max(np.abs(g(r)) / np.log(2 + r)))
    assert 0.5 < consts[1] / consts[0] < 2.0


def test_radial_projection_solves_the_ode():
    h0 = 1.0
    f = lambda r: np.exp(-r)  # noqa: E731
    g = solve_radial_projection(h0, f, 20.0)
    r = np.linspace(0.5, 8.0, 20)
    h = 1e-3
    g2 = (g(r + h) - 2 * g(r) + g(r - h)) / h**2
    g1 = (g(r + h) - g(r - h)) / (2 * h)
    U = flat_profile(h0, r.astype(complex))
    res = g2 + g1 / r + h0 * np.exp(U) * g(r) - f(r)
    assert np.max(np.abs(res)) < 1e-4
    with pytest.raises(TypeError):
        solve_radial_projection(h0, 1.0, 10.0)


def test_local_harmonic_part_vanishes_at_its_centre():
    cfg = RootConfiguration(2)
    q = cfg.points()
    free = lambda y, eta: 0.0  # noqa: E731
    assert abs(local_harmonic_part(cfg, free, 0, q[0])) < 1e-14
    z = q[0] + 0.1 * np.exp(1j * np.linspace(0, 2 * np.pi, 5))
    lap = fd_laplacian(lambda y: local_harmonic_part(cfg, free, 0, y), z, 1e-3)
    assert np.max(np.abs(lap)) < 1e-6


def test_params_validation():
    with pytest.raises(ValueError):
        BubbleParams(-1, 1.0)
    with pytest.raises(ValueError):
        BubbleParams(1, 1.0, h0=0.0)
    with pytest.raises(ValueError):
        BubbleParams(1, np.nan)
    assert BubbleParams(1, 1.0, theta=7.0).theta == pytest.approx(7.0 - 2 * np.pi)
