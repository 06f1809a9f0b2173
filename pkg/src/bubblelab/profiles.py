"""Closed-form bubbles of the singular Liouville equation and their invariants.

The global solutions of ``Delta V + h0 |y|^{2N} e^V = 0`` in the plane with
finite mass are

    V(y) = log( e^mu / (1 + c e^mu |w - t|^2)^2 ),   w = (y e^{-i theta})^{N+1},

with ``c = h0 / (8 (N+1)^2)`` and target ``t = 1 + p``.  Everything here is
evaluated in log space so heights up to ``mu = 40`` (and far beyond) are
representable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import cumulative_simpson, solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .grid import Field, PolarGrid
from .quadrature import QuadratureError, plane_integral, polar_integral

__all__ = [
    "BubbleParams",
    "RootConfiguration",
    "RadialFunction",
    "UnderResolvedGrid",
    "flat_profile",
    "global_profile",
    "profile_gradient",
    "profile_density",
    "profile_residual",
    "local_maxima",
    "bubble_mass",
    "far_field_value",
    "kernel_basis",
    "second_radial_solution",
    "solve_radial_projection",
    "integral_identity",
    "roots_log_identity",
    "local_harmonic_part",
]


class UnderResolvedGrid(ValueError):
    """The grid cannot resolve the bubble cores it is asked to carry."""


def _point(z) -> np.ndarray:
    z = np.asarray(z)
    if z.ndim and z.shape[-1] == 2 and not np.iscomplexobj(z):
        z = z[..., 0] + 1j * z[..., 1]
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise ValueError("non-finite evaluation point")
    return z


@dataclass(frozen=True)
class BubbleParams:
    """Parameters of one exact global bubble.

    Attributes
    ----------
    N : int
        Singularity order (number of bubbles minus one).
    mu : float
        Height: ``V(e^{i theta} (1+p)^{1/(N+1)}) = mu``.
    h0 : float
        Frozen coefficient value.
    p : complex
        Translation of the target point ``1 + p`` in the ``y^{N+1}`` plane.
    theta : float
        Rotation phase, normalized to ``[0, 2 pi)``.
    """

    N: int
    mu: float
    h0: float = 1.0
    p: complex = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 0:
            raise ValueError(f"N must be a nonnegative integer, got {self.N}")
        if not self.h0 > 0 or not np.isfinite(self.h0):
            raise ValueError(f"h0 must be positive and finite, got {self.h0}")
        if not np.isfinite(self.mu) or not np.isfinite(complex(self.p)):
            raise ValueError("mu and p must be finite")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "p", complex(self.p))
        object.__setattr__(self, "theta", float(self.theta) % (2 * np.pi))

    @property
    def target(self) -> complex:
        return 1.0 + self.p

    @property
    def log_c(self) -> float:
        """``log(c)`` with ``c = h0 / (8 (N+1)^2)``."""
        return float(np.log(self.h0 / (8.0 * (self.N + 1) ** 2)))

    @property
    def core_width(self) -> float:
        """Length scale of each core in the ``y`` plane."""
        return float(np.sqrt(8.0 / self.h0) * np.exp(-self.mu / 2) / abs(self.target) ** (self.N / (self.N + 1)))

    def w(self, y) -> np.ndarray:
        return (_point(y) * np.exp(-1j * self.theta)) ** (self.N + 1)


@dataclass(frozen=True)
class RootConfiguration:
    """Angles ``beta_l = 2 pi l / (N+1)`` of the bubble centres."""

    N: int
    beta: tuple = field(init=False)

    def __post_init__(self):
        if self.N < 0:
            raise ValueError("N must be nonnegative")
        object.__setattr__(self, "beta", tuple(2 * np.pi * np.arange(self.N + 1) / (self.N + 1)))

    def points(self, theta: float = 0.0) -> np.ndarray:
        return np.exp(1j * (np.asarray(self.beta) + theta))


class RadialFunction:
    """A radial profile ``r -> g(r)`` on ``[0, r_max]`` with its derivative.

    Built either from callables (closed forms) or from samples with
    derivatives, in which case a cubic Hermite interpolant is used and
    :meth:`derivative` is the exact derivative of that interpolant.
    """

    def __init__(self, fn, deriv, r_max: float = np.inf, name: str = ""):
        self._fn, self._deriv = fn, deriv
        self.r_max = float(r_max)
        self.name = name

    @classmethod
    def from_samples(cls, r, values, derivs, name: str = "") -> "RadialFunction":
        spline = CubicHermiteSpline(r, values, derivs)
        dspline = spline.derivative()
        r0, v0 = float(r[0]), float(values[0])

        def fn(x):
            x = np.asarray(x, dtype=float)
            return np.where(x < r0, v0, spline(np.maximum(x, r0)))

        def deriv(x):
            x = np.asarray(x, dtype=float)
            return np.where(x < r0, 0.0, dspline(np.maximum(x, r0)))

        return cls(fn, deriv, r_max=float(r[-1]), name=name)

    def _check(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < 0) or np.any(r > self.r_max * (1 + 1e-12)):
            raise ValueError(f"radius outside [0, {self.r_max}]")
        return r

    def __call__(self, r):
        return self._fn(self._check(r))

    def derivative(self, r):
        return self._deriv(self._check(r))


# -- profiles -------------------------------------------------------------------


def flat_profile(h0: float, z) -> np.ndarray:
    """Radial bubble ``U = -2 log(1 + h0 |z|^2 / 8)`` with maximum 0 at 0."""
    if not h0 > 0:
        raise ValueError("h0 must be positive")
    r2 = np.abs(_point(z)) ** 2
    return -2.0 * np.log1p(h0 * r2 / 8.0)


def _log_kd2(params: BubbleParams, y) -> np.ndarray:
    """``log(K |w - t|^2)`` where ``K = c e^mu``."""
    d = np.abs(params.w(y) - params.target)
    with np.errstate(divide="ignore"):
        return params.mu + params.log_c + 2.0 * np.log(d)


def global_profile(params: BubbleParams, y) -> np.ndarray:
    """Evaluate the global bubble ``V(y)``."""
    return params.mu - 2.0 * np.logaddexp(0.0, _log_kd2(params, y))


def profile_gradient(params: BubbleParams, y) -> np.ndarray:
    """Gradient of ``V`` as the complex number ``V_x + i V_y``."""
    y = _point(y)
    N = params.N
    rot = np.exp(-1j * params.theta)
    zr = y * rot
    w = zr ** (N + 1)
    d2 = np.abs(w - params.target) ** 2
    inv_k = np.exp(-(params.mu + params.log_c))
    dw = (N + 1) * zr**N * rot
    return -4.0 * (w - params.target) * np.conj(dw) / (inv_k + d2)


def profile_density(params: BubbleParams, y) -> np.ndarray:
    """``h0 |y|^{2N} e^V``, the mass density of the bubble."""
    y = _point(y)
    return params.h0 * np.abs(y) ** (2 * params.N) * np.exp(global_profile(params, y))


def _require_resolved(params: BubbleParams, grid: PolarGrid) -> None:
    roots = local_maxima(params)
    radius = float(np.abs(roots[0]))
    if radius >= grid.R:
        raise UnderResolvedGrid(f"bubble radius {radius:.3g} outside the grid (R={grid.R})")
    limit = min(1.0, np.sqrt(8.0 / params.h0)) * np.exp(-params.mu / 2) / 4.0 * radius
    dr, arc = grid.spacing_near(radius)
    if max(dr, arc) > limit:
        raise UnderResolvedGrid(
            f"node spacing near |y|={radius:.3g} is {max(dr, arc):.3e} "
            f"(radial {dr:.3e}, arc {arc:.3e}); cores need at most {limit:.3e}")


def profile_residual(params: BubbleParams, grid: PolarGrid) -> Field:
    """Discrete residual ``Delta_h V + h0 |y|^{2N} e^V`` on ``grid``.

    Raises :class:`UnderResolvedGrid` when the node spacing near the bubble
    ring exceeds a quarter of the core scale.  The boundary ring carries no
    equation and is reported as zero.
    """
    _require_resolved(params, grid)
    V = global_profile(params, grid.z)
    res = grid.laplacian(V) + profile_density(params, grid.z)
    res[-1] = 0.0
    return Field(grid, res, name="profile_residual")


def local_maxima(params: BubbleParams) -> np.ndarray:
    """The ``N+1`` maxima of ``V``: rotated ``(N+1)``-th roots of ``1+p``."""
    n = params.N + 1
    t = params.target
    base = abs(t) ** (1.0 / n) * np.exp(1j * np.angle(t) / n)
    return base * np.exp(1j * (params.theta + 2 * np.pi * np.arange(n) / n))


def _w_plane_scales(params: BubbleParams) -> tuple[float, float]:
    """Centre radius and width of the bump in the ``w = y^{N+1}`` plane."""
    return abs(params.target), float(np.exp(-0.5 * (params.mu + params.log_c)))


def _w_density(params: BubbleParams):
    """Mass density in ``w`` coordinates, already divided by ``N+1``.

    ``int h0 |y|^{2N} e^V dy = (1/(N+1)) int h0 e^mu / (1 + K|w-t|^2)^2 dw``.
    """
    log_k = params.mu + params.log_c
    t = params.target
    scale = params.h0 * np.exp(params.mu - 2 * log_k) / (params.N + 1)

    def f(w):
        d2 = np.abs(w - t) ** 2
        return scale / (np.exp(-log_k) + d2) ** 2

    return f


def bubble_mass(params: BubbleParams, R: float = np.inf, center=None,
                return_error: bool = False):
    """Mass ``int h0 |y|^{2N} e^V`` over ``B_R`` (``R = inf`` for the plane).

    With ``center`` given the disk is ``B(center, R)``; this is how single
    cores are measured.  Raises :class:`QuadratureError` (carrying the achieved
    estimate) when tolerance is not met.
    """
    if not R > 0:
        raise ValueError("R must be positive")
    tau, width = _w_plane_scales(params)
    if center is None:
        f = _w_density(params)
        if np.isinf(R):
            val, err = plane_integral(f, tau, width)
        else:
            val, err = polar_integral(f, 0.0, R ** (params.N + 1), tau, width)
    else:
        if np.isinf(R):
            raise ValueError("a finite radius is required with a center")
        c = complex(_point(center))
        val, err = polar_integral(lambda y: profile_density(params, y), c, R,
                                  0.0, params.core_width)
    val = float(np.real(val))
    return (val, err) if return_error else val


def far_field_value(params: BubbleParams, R: float) -> float:
    """Leading-order value of ``V`` on the circle ``|y| = R``."""
    if R <= 2:
        raise ValueError("far-field expansion needs R > 2")
    N = params.N
    return float(-params.mu - 2 * np.log(params.h0 / 8) + 4 * np.log(N + 1)
                 - 4 * (N + 1) * np.log(R))


# -- linearized kernels and radial ODEs --------------------------------------------


def kernel_basis(h0: float, i: int, x) -> np.ndarray:
    """Bounded kernel elements of ``Delta + h0 e^U`` at the flat bubble."""
    if i not in (0, 1, 2):
        raise ValueError(f"kernel index must be 0, 1 or 2, got {i}")
    if not h0 > 0:
        raise ValueError("h0 must be positive")
    z = _point(x)
    c1r2 = h0 / 8.0 * np.abs(z) ** 2
    if i == 0:
        return (1.0 - c1r2) / (1.0 + c1r2)
    comp = z.real if i == 1 else z.imag
    return comp / (1.0 + c1r2)


def _g01(h0, r):
    c = h0 / 8.0 * np.asarray(r, dtype=float) ** 2
    return (1.0 - c) / (1.0 + c)


def _g01_prime(h0, r):
    r = np.asarray(r, dtype=float)
    c1 = h0 / 8.0
    return -4.0 * c1 * r / (1.0 + c1 * r**2) ** 2


@lru_cache(maxsize=64)
def _g02_dense(h0: float, r0: float, t_lo: float, t_hi: float):
    """Dense solution of ``g_tt + r^2 h0 e^U g = 0`` with ``t = log r``."""
    c1 = h0 / 8.0

    def rhs(t, y):
        r2 = np.exp(2 * t)
        return [y[1], -r2 * h0 / (1 + c1 * r2) ** 2 * y[0]]

    t0 = float(np.log(r0))
    sols = []
    for t_end in (t_lo, t_hi):
        if t_end == t0:
            sols.append(None)
            continue
        sol = solve_ivp(rhs, (t0, t_end), [0.0, r0], method="DOP853",
                        rtol=1e-13, atol=1e-14, dense_output=True)
        if not sol.success:
            raise RuntimeError(f"second radial solution: integrator failed ({sol.message})")
        sols.append(sol.sol)
    return t0, sols[0], sols[1]


def _g02_eval(h0, r, r0=1.0):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("second radial solution is defined for r > 0")
    t = np.log(r)
    lo = float(np.floor(min(t.min(), np.log(r0)) - 1))
    hi = float(np.ceil(max(t.max(), np.log(r0)) + 1))
    t0, below, above = _g02_dense(float(h0), float(r0), lo, hi)
    out = np.empty((2,) + t.shape)
    mask = t < t0
    if np.any(mask):
        out[:, mask] = below(t[mask])
    if np.any(~mask):
        out[:, ~mask] = above(t[~mask])
    return out[0], out[1] / r


def second_radial_solution(h0: float, r, r0: float = 1.0, derivative: bool = False):
    """Second solution ``g02`` of ``g'' + g'/r + h0 e^U g = 0``.

    Normalized by ``g02(r0) = 0`` and ``g02'(r0) = 1``.  ``r0 = 1`` is the
    default; when ``g01(r0)`` vanishes (``h0 = 8, r0 = 1``) the pair
    ``(g01, g02)`` is linearly dependent and another ``r0`` must be used.
    """
    if not h0 > 0:
        raise ValueError("h0 must be positive")
    if abs(_g01(h0, r0)) < 1e-6:
        raise ValueError(f"g01 vanishes at r0={r0}; choose another normalization radius")
    g, dg = _g02_eval(h0, r, r0)
    return (g, dg) if derivative else g


def solve_radial_projection(h0: float, rhs, r_max: float, n: int = 4097,
                            r_min: float = 1e-8) -> RadialFunction:
    """Solve ``g'' + g'/r + h0 e^U g = f`` with ``g(0) = g'(0) = 0``.

    Variation of parameters with the basis ``(g01, g02)``; the integrals are
    accumulated with Simpson's rule on a grid uniform in ``log r``.
    """
    if r_max <= r_min:
        raise ValueError("r_max must exceed r_min")
    f = rhs if callable(rhs) else None
    if f is None:
        raise TypeError("rhs must be callable")
    probe = np.array([r_min, 1e2 * r_min])
    fp = np.abs(np.asarray(f(probe), dtype=float))
    if not np.all(np.isfinite(fp)) or probe[0] ** 2 * fp[0] > max(1e-6, 2 * probe[1] ** 2 * fp[1]):
        raise ValueError("rhs is not integrable against r at the origin")
    r0 = 0.5 / np.sqrt(h0 / 8.0)
    t = np.linspace(np.log(r_min), np.log(r_max), n)
    r = np.exp(t)
    fr = np.asarray(f(r), dtype=float)
    g1, dg1 = _g01(h0, r), _g01_prime(h0, r)
    g2, dg2 = second_radial_solution(h0, r, r0=r0, derivative=True)
    wr = r0 * _g01(h0, r0)
    start1 = r_min**2 * fr[0] / 2.0
    i1 = start1 + cumulative_simpson(r**2 * g1 * fr, x=t, initial=0.0)
    i2 = cumulative_simpson(r**2 * g2 * fr, x=t, initial=0.0)
    g = (g2 * i1 - g1 * i2) / wr
    dg = (dg2 * i1 - dg1 * i2) / wr
    r = np.concatenate(([0.0], r))
    g = np.concatenate(([0.0], g))
    dg = np.concatenate(([0.0], dg))
    return RadialFunction.from_samples(r, g, dg, name="projection")


# -- identities -----------------------------------------------------------------


def integral_identity(params: BubbleParams, kind: str):
    """Quadrature value of a vanishing invariant integral and its error.

    ``d_mu``: ``int h0 dV/dmu |y|^{2N} e^V``.  ``d_P``/``d_Pbar``: the same
    with the Wirtinger derivative in the translation ``p`` (complex valued).
    Integrals are evaluated in ``w = y^{N+1}`` coordinates on the whole
    plane.  Returns ``(value, error_estimate)``.
    """
    log_k = params.mu + params.log_c
    inv_k = np.exp(-log_k)
    t = params.target
    pref = params.h0 * np.exp(params.mu - 2 * log_k) / (params.N + 1)
    if kind == "d_mu":
        def f(w):
            d2 = np.abs(w - t) ** 2
            return pref * (inv_k - d2) / (inv_k + d2) ** 3
    elif kind in ("d_P", "d_Pbar"):
        sign = 1 if kind == "d_P" else -1

        def f(w):
            diff = w - t
            d2 = np.abs(diff) ** 2
            val = pref * 2.0 * np.conj(diff) / (inv_k + d2) ** 3
            return val if sign > 0 else np.conj(val)
    else:
        raise ValueError(f"unknown identity kind {kind!r}")
    tau, width = _w_plane_scales(params)
    scale = 8 * np.pi * (params.N + 1)
    try:
        val, err = plane_integral(f, tau, width, atol=1e-9 * scale, rtol=0.0)
    except QuadratureError as exc:  # report, never hide
        val, err = exc.value, exc.achieved
    if kind == "d_mu":
        val = float(np.real(val))
    return val, float(err)


def roots_log_identity(N: int, m: int = 0) -> float:
    """``sum_{l != m} log |e^{i beta_m} - e^{i beta_l}|`` (equals ``log(N+1)``)."""
    if N < 1:
        raise ValueError("N must be at least 1")
    q = RootConfiguration(N).points()
    diffs = np.abs(q[m] - np.delete(q, m))
    return float(np.sum(np.log(diffs)))


def local_harmonic_part(config: RootConfiguration, regular_part, m: int, y,
                        theta: float = 0.0) -> np.ndarray:
    """Harmonic function around ``Q_m`` built from the other bubble centres.

    ``sum_{l != m} [-4 log(|y - Q_l| / |Q_m - Q_l|)
                   + 8 pi (regular_part(y, Q_l) - regular_part(Q_m, Q_l))]``,
    which vanishes at ``Q_m``.  ``regular_part(y, eta)`` is any evaluator of a
    Green's regular part (use ``lambda y, eta: 0`` for the free-space sum).
    """
    q = config.points(theta)
    y = _point(y)
    out = np.zeros(y.shape)
    for l, ql in enumerate(q):
        if l == m:
            continue
        d = np.abs(y - ql)
        if np.any(d < 1e-14):
            raise ValueError(f"evaluation at the singular node Q_{l}")
        out = out - 4.0 * np.log(d / abs(q[m] - ql))
        out = out + 8 * np.pi * (np.asarray(regular_part(y, ql)) - regular_part(q[m], ql))
    return out
