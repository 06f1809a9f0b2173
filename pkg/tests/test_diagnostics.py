import numpy as np
import pytest

from bubblelab.diagnostics import (
    BlowupDiagnostics,
    FieldEvaluator,
    MatchedSolution,
    PohozaevReport,
    ProfileEvaluator,
    SumEvaluator,
    TrendReport,
    UnmatchedProfile,
    compare_profiles,
    find_maxima,
    fit_trend,
    gradient_from_pohozaev,
    harnack_deficit,
    match_profile,
    measured_gradient,
    pohozaev_report,
    trend_report,
    vanishing_trend,
)
from bubblelab.grid import Field, PolarGrid
from bubblelab.profiles import BubbleParams, bubble_mass, global_profile, local_maxima
from bubblelab.solver import CoefficientField, solve_linearized


def scaled_bubble(N, mu=6.0, d=0.2, theta=0.0):
    P = BubbleParams(N, mu, 1.0, theta=theta)
    g = PolarGrid.for_bubbles(1.0, 128, 256, ring=d, core=d * P.core_width)
    return P, Field.from_function(g, lambda z: global_profile(P, z / d) - 2 * (N + 1) * np.log(d))


@pytest.mark.parametrize("N", [0, 1, 2])
def test_find_maxima_on_exact_bubbles(N):
    P, u = scaled_bubble(N)
    D = find_maxima(u, N)
    assert len(D.maxima) == N + 1
    np.testing.assert_allclose(np.angle(D.maxima[1:]) % (2 * np.pi),
                               2 * np.pi * np.arange(1, N + 1) / (N + 1), atol=1e-8)
    assert D.delta == pytest.approx(0.2, abs=1e-8)
    assert D.mu == pytest.approx(6.0, abs=1e-7)
    assert D.height_spread < 1e-7
    assert D.harnack_deficit == pytest.approx(6.0, abs=0.2)
    assert not D.simple  # the Harnack quantity blows up at any off-origin core
    rows = list(D.rows())
    assert len(rows) == N + 1 and len(rows[0]) == len(BlowupDiagnostics.COLUMNS)


def test_anchor_is_smallest_angle():
    P, u = scaled_bubble(2, theta=2 * np.pi / 3 + 0.1)
    D = find_maxima(u, 2)
    assert np.angle(D.maxima[0]) == pytest.approx(0.1, abs=1e-8)
    assert np.all(np.diff(np.angle(D.maxima) % (2 * np.pi)) > 0)


def test_harnack_deficit_of_flat_bubble_is_small():
    P, u = scaled_bubble(1)
    flat = Field.from_function(u.grid, lambda z: -2 * np.log(1 + np.abs(z) ** 2))
    assert harnack_deficit(u, 1) > harnack_deficit(flat, 1)


def test_match_and_compare_exact_profile():
    P = BubbleParams(1, 6.0, 1.0)
    g = PolarGrid.for_bubbles(4.0, 96, 256, ring=1.0, core=P.core_width)
    v = Field.from_function(g, lambda z: global_profile(P, z))
    M = match_profile(v, 1, 1.0)
    assert M.mu == pytest.approx(6.0, abs=1e-7)
    assert abs(M.p) < 1e-7
    c = compare_profiles(v, M)
    assert c.C_core < 1e-3 and c.C_annulus < 1e-3
    with pytest.raises(UnmatchedProfile):
        compare_profiles(v, BubbleParams(1, 7.0, 1.0))


def test_evaluators_agree():
    P = BubbleParams(1, 3.0)
    g = PolarGrid.for_bubbles(3.0, 96, 128, ring=1.0, core=P.core_width)
    fe = FieldEvaluator(Field.from_function(g, lambda z: global_profile(P, z)))
    pe = ProfileEvaluator(P)
    z = np.array([0.5 + 0.2j, -1.5 + 0.3j])
    np.testing.assert_allclose(fe.value(z), pe.value(z), atol=1e-7)
    s = SumEvaluator(pe, pe, -1.0)
    np.testing.assert_allclose(s.value(z), 0.0, atol=1e-14)


@pytest.mark.parametrize("N", [0, 1, 2])
def test_pohozaev_exact_bubble(N):
    P = BubbleParams(N, 6.0, 1.0, 0.1 + 0.05j)
    H = CoefficientField.constant(1.0)
    c = local_maxima(P)[-1]
    for radius in (0.1, 0.3):
        for k in range(8):
            xi = (np.cos(k * np.pi / 4), np.sin(k * np.pi / 4))
            r = pohozaev_report(P, H, N, c, radius, xi)
            assert abs(r.residual) <= 1e-6 * r.scale
    assert len(list(r.rows())[0]) == len(PohozaevReport.COLUMNS)


def test_pohozaev_is_linear_in_direction():
    P = BubbleParams(2, 6.0, 1.0)
    H = CoefficientField("1 + 0.1*x1*x2")
    c = local_maxima(P)[1]
    a = pohozaev_report(P, H, 2, c, 0.3, (1, 0))
    b = pohozaev_report(P, H, 2, c, 0.3, (0, 1))
    ab = pohozaev_report(P, H, 2, c, 0.3, (0.6, -0.8))
    for f in ("bulk_term", "boundary_mass_term", "boundary_gradient_term"):
        expect = 0.6 * getattr(a, f) - 0.8 * getattr(b, f)
        assert abs(getattr(ab, f) - expect) <= 1e-10 * max(1.0, abs(expect))


def test_pohozaev_bulk_sees_coefficient_gradient():
    h0, a = 1.0, 0.02
    P = BubbleParams(1, 8.0, h0)
    q = local_maxima(P)[1]
    r1 = pohozaev_report(P, CoefficientField(f"1 + {a}*x1"), 1, q, 0.3, (1, 0))
    r0 = pohozaev_report(P, CoefficientField.constant(h0), 1, q, 0.3, (1, 0))
    mass = bubble_mass(P, 0.3, center=q)
    # the weight's own gradient adds 2N a cos^2(beta) times the local mass
    assert r1.bulk_term - r0.bulk_term == pytest.approx(a * mass * 3, rel=0.02)


def manufactured(N, delta, a=(0.5, 0.0), R=4.0, mu=6.0):
    P = BubbleParams(N, mu, 1.0)
    g = PolarGrid.for_bubbles(R, 96, 256, ring=1.0, core=P.core_width)
    V = global_profile(P, g.z)
    dens = np.abs(g.z) ** (2 * N) * np.exp(V)
    rhs = -(a[0] * (g.z.real - 1) + a[1] * g.z.imag) * dens
    w = solve_linearized(g, CoefficientField.constant(1.0), N, V, rhs)
    v = SumEvaluator(ProfileEvaluator(P), FieldEvaluator(w), delta)
    H = CoefficientField(f"1 + {a[0]}*(x1 - {delta}) + {a[1]}*x2").rescaled(delta)
    return MatchedSolution(v, P, H, delta)


@pytest.mark.parametrize("N", [1, 2])
@pytest.mark.parametrize("delta", [1e-3, 1e-2])
def test_gradient_from_pohozaev_manufactured(N, delta):
    m = manufactured(N, delta)
    for s in range(1, N + 1):
        est = gradient_from_pohozaev(m, s, 0.3, n_circle=1024)
        assert np.max(np.abs(est - (0.5, 0.0))) <= 0.1 * 0.5
    with pytest.raises(ValueError):
        gradient_from_pohozaev(m, 0, 0.3)


def test_fit_trend_recovers_injected_model():
    d = np.array([0.2, 0.1, 0.05, 0.02])
    mu = np.array([3.0, 4.0, 5.0, 6.5])
    a, b = 0.7, 2.5
    m = a * d + b * mu * np.exp(-mu) / d
    fa, fb = fit_trend(d, mu, m)
    assert fa == pytest.approx(a, rel=1e-6) and fb == pytest.approx(b, rel=1e-6)
    rep = trend_report(d[::-1], mu[::-1], m[::-1])
    assert np.all(np.diff(rep.delta) < 0)
    assert rep.dominated and rep.fit_residual < 1e-9
    assert fit_trend(d, mu, np.zeros(4)) == (0.0, 0.0)
    with pytest.raises(ValueError):
        trend_report(d[:2], mu[:2], m[:2])


def test_trend_flags():
    d = np.array([0.3, 0.2, 0.1])
    mu = np.array([2.0, 2.5, 3.0])
    rep = trend_report(d, mu, [0.1, 0.05, 0.02])
    assert rep.dominated
    assert not rep.small_delta_attained
    assert len(list(rep.rows())[0]) == len(TrendReport.COLUMNS)


def test_measured_gradient_of_symmetric_member():
    class Member:
        pass

    g = PolarGrid.for_bubbles(1.0, 32, 64, ring=0.5, core=0.05)
    m = Member()
    m.coefficient = CoefficientField("2 + 0.4*x1 - 0.2*x2")
    m.u = Field.from_function(g, lambda z: 0.1 * z.real + np.abs(z) ** 2)
    # grad log H(0) = (0.2, -0.1); grad phi(0) = (0.1, 0)
    assert measured_gradient(m) == pytest.approx(abs(0.3 - 0.1j), abs=1e-12)
    m.delta, m.mu = 0.1, 3.0
    with pytest.raises(ValueError):
        vanishing_trend([m, m])
