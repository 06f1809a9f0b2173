"""Newton solution of ``Delta u + |x|^{2N} H(x) e^u = 0`` on a disk.

The discrete residual is

    F(u) = P (L u + K e^u) + (I - P) u        (interior rings)
    F(u) = u - g                              (boundary ring)

with ``L`` the polar Laplacian of :class:`~bubblelab.grid.PolarGrid`, ``P``
its polar filter and ``K = |x|^{2N} H``.  Newton steps are solved with
right-preconditioned GMRES; the preconditioner inverts, for every angular
mode separately, the radial operator plus the ring-averaged linearization
``K e^u``.  Those banded factorizations (one per Fourier mode) are the hot
kernel and go through :class:`~bubblelab.banded.BandedBatch`.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
import scipy.sparse.linalg as spla

from scipy.optimize import brentq

from .banded import BandedBatch, bandwidths, to_band
from .disk_green import BoundaryTrace, GreensDisk, harmonic_extension
from .expr import parse_expr
from .grid import Field, PolarGrid

__all__ = [
    "CoefficientField",
    "NewtonReport",
    "SolverError",
    "NewtonDivergence",
    "NewtonMaxIterations",
    "NonPositiveCoefficient",
    "assemble_residual",
    "newton_solve",
    "balanced_solve",
    "solve_linearized",
    "rescale",
    "split_harmonic",
    "FamilyPolicy",
    "FamilyMember",
    "ContinuationFamily",
    "FamilyError",
    "continuation_family",
    "mu_from_delta",
    "residual_floor",
    "check_resolution",
    "save_checkpoint",
    "load_checkpoint",
]

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


class SolverError(RuntimeError):
    """Base class for solver failures; ``best`` holds the best iterate."""

    def __init__(self, message, best=None, report=None):
        super().__init__(message)
        self.best = best
        self.report = report


class NewtonDivergence(SolverError):
    """The residual could not be decreased even after maximal backtracking."""


class NewtonMaxIterations(SolverError):
    """The iteration budget ran out before the tolerance was met."""


class NonPositiveCoefficient(ValueError):
    """The coefficient is not bounded below by a positive constant on the disk."""


# -- coefficients -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CoefficientField:
    """Smooth positive coefficient ``H`` given as a closed-form expression.

    ``delta`` and ``theta`` implement the rotated, rescaled coefficient
    ``y -> H(delta e^{i theta} y)`` without touching the expression.
    Points are complex numbers ``x1 + i x2``.
    """

    expression: str
    delta: float = 1.0
    theta: float = 0.0

    @cached_property
    def _expr(self):
        return parse_expr(self.expression)

    @cached_property
    def _grad(self):
        e = self._expr
        return e.diff("x1"), e.diff("x2")

    @cached_property
    def _hess(self):
        g1, g2 = self._grad
        return g1.diff("x1"), g1.diff("x2"), g2.diff("x2")

    @classmethod
    def constant(cls, c: float = 1.0) -> "CoefficientField":
        return cls(repr(float(c)))

    @property
    def is_constant(self) -> bool:
        return not self._expr.uses()

    def _x(self, z):
        x = self.delta * np.exp(1j * self.theta) * np.asarray(z, dtype=complex)
        return x.real, x.imag

    def __call__(self, z) -> np.ndarray:
        return self._expr(*self._x(z))

    value = __call__

    def gradient(self, z) -> np.ndarray:
        """``grad_y H(delta e^{i theta} y)`` as a complex number."""
        x1, x2 = self._x(z)
        g1, g2 = self._grad
        g = g1(x1, x2) + 1j * g2(x1, x2)
        return self.delta * np.exp(-1j * self.theta) * g

    def hessian(self, z) -> np.ndarray:
        """Hessian in ``y`` coordinates, shape ``(..., 2, 2)``."""
        x1, x2 = self._x(z)
        h11, h12, h22 = (h(x1, x2) for h in self._hess)
        Hx = np.stack([np.stack([h11, h12], -1), np.stack([h12, h22], -1)], -2)
        c, s = np.cos(self.theta), np.sin(self.theta)
        Q = np.array([[c, -s], [s, c]])
        return self.delta**2 * np.einsum("ji,...jk,kl->...il", Q, Hx, Q)

    def rescaled(self, delta: float, theta: float = 0.0) -> "CoefficientField":
        """``y -> H_self(delta e^{i theta} y)``."""
        return CoefficientField(self.expression, self.delta * delta, self.theta + theta)

    def bounds(self, R: float, n: int = 64) -> tuple[float, float]:
        """``(c_lo, c_hi)`` sampled on the disk of radius ``R``."""
        r = R * np.sqrt(np.linspace(0, 1, n))
        th = 2 * np.pi * np.arange(2 * n) / (2 * n)
        v = self(r[:, None] * np.exp(1j * th)[None, :])
        lo, hi = float(np.min(v)), float(np.max(v))
        if not np.isfinite(lo) or not np.isfinite(hi) or lo <= 0:
            raise NonPositiveCoefficient(
                f"coefficient {self.expression!r} has range [{lo:.3g}, {hi:.3g}] on |x| <= {R:.3g}")
        return lo, hi

    def descriptor(self) -> dict:
        return {"expression": self.expression, "delta": self.delta, "theta": self.theta}


# -- discrete problem --------------------------------------------------------------


def _boundary_values(grid: PolarGrid, boundary) -> np.ndarray:
    g = boundary.values if isinstance(boundary, BoundaryTrace) else np.asarray(boundary, float)
    if g.shape != (grid.n_t,):
        raise ValueError(f"boundary has {g.shape} samples, grid needs ({grid.n_t},)")
    return g


class _Problem:
    def __init__(self, grid: PolarGrid, H: CoefficientField, N: int, boundary):
        if N < 0 or int(N) != N:
            raise ValueError("N must be a nonnegative integer")
        self.grid = grid
        self.g = _boundary_values(grid, boundary)
        self.K = np.abs(grid.z) ** (2 * N) * H(grid.z)
        self.filtered = grid.filter_mask is not None

    def residual(self, u: np.ndarray) -> np.ndarray:
        grid = self.grid
        F = grid.laplacian(u) + grid.polar_filter(self.K * np.exp(u))
        if self.filtered:
            F += u - grid.polar_filter(u)
        F[-1] = u[-1] - self.g
        return F

    def jacobian(self, u: np.ndarray):
        grid, W = self.grid, self.K * np.exp(u)

        def apply(v):
            out = grid.laplacian(v) + grid.polar_filter(W * v)
            if self.filtered:
                out += v - grid.polar_filter(v)
            out[-1] = v[-1]
            return out

        return apply, W


class _ModePreconditioner:
    """Per-mode banded inverse of ``L - m^2/r^2 + mean_theta(W)``."""

    def __init__(self, grid: PolarGrid, W: np.ndarray):
        n, modes = grid.n_r, grid.modes
        ops = {p: grid.radial_operator(p) for p in (1, -1)}
        kl = ku = 0
        for A in ops.values():
            a, b = bandwidths(A)
            kl, ku = max(kl, a), max(ku, b)
        bands = {p: to_band(ops[p], kl, ku) for p in (1, -1)}
        M = len(modes)
        ab = np.empty((M, 2 * kl + ku + 1, n))
        ab[0::2] = bands[1]
        ab[1::2] = bands[-1]
        diag_row = kl + ku
        wbar = W.mean(axis=1)
        r2 = grid.r**2
        ab[:, diag_row, :] += wbar[None, :] - (modes[:, None] ** 2) / r2[None, :]
        # identity rows: filtered modes and the Dirichlet ring
        limit = grid.mode_limit
        rows_off = (modes[:, None] > limit[None, :])
        rows_off[:, -1] = True
        jj = np.arange(n)
        for off in range(-kl, ku + 1):
            c = jj + off
            ok = (c >= 0) & (c < n)
            band_rows = kl + ku - off
            sel = rows_off[:, jj[ok]]
            blk = ab[:, band_rows, c[ok]]
            blk[sel] = 0.0
            ab[:, band_rows, c[ok]] = blk
        ab[:, diag_row, :] = np.where(rows_off, 1.0, ab[:, diag_row, :])
        self.kl, self.ku = kl, ku
        self.lu = BandedBatch(ab, kl, ku)
        self.grid = grid

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        grid = self.grid
        c = np.fft.rfft(rhs, axis=1)  # (n_r, M)
        b = np.stack([c.real, c.imag], axis=-1).transpose(1, 0, 2)  # (M, n_r, 2)
        x = self.lu.solve(np.ascontiguousarray(b))
        cx = (x[..., 0] + 1j * x[..., 1]).T
        return np.fft.irfft(cx, n=grid.n_t, axis=1)


def assemble_residual(grid: PolarGrid, H: CoefficientField, N: int, boundary, u) -> Field:
    """Discrete residual ``F(u)``; the Dirichlet ring holds ``u - boundary``."""
    values = u.values if isinstance(u, Field) else np.asarray(u, dtype=float)
    if isinstance(u, Field) and u.grid is not grid and u.grid.descriptor() != grid.descriptor():
        raise ValueError("field lives on a different grid")
    if values.shape != grid.shape:
        raise ValueError(f"u has shape {values.shape}, grid is {grid.shape}")
    if not np.all(np.isfinite(values)):
        raise ValueError("u has non-finite values")
    return Field(grid, _Problem(grid, H, N, boundary).residual(values), name="residual")


@dataclass
class NewtonReport:
    """Convergence history of one :func:`newton_solve` call."""

    iterations: int = 0
    residuals: list = field(default_factory=list)
    damping: list = field(default_factory=list)
    krylov_iterations: list = field(default_factory=list)
    converged: bool = False
    message: str = ""

    @property
    def final_residual(self) -> float:
        return self.residuals[-1] if self.residuals else np.inf


def _gmres(apply, prec, rhs, rtol, restart=80, maxiter=20):
    n = rhs.size
    shape = rhs.shape
    A = spla.LinearOperator((n, n), matvec=lambda v: apply(v.reshape(shape)).ravel())
    Minv = spla.LinearOperator((n, n), matvec=lambda v: prec.solve(v.reshape(shape)).ravel())
    count = [0]

    def cb(_):
        count[0] += 1

    x, info = spla.gmres(A, rhs.ravel(), rtol=rtol, atol=0.0, restart=restart,
                         maxiter=maxiter, M=Minv, callback=cb, callback_type="pr_norm")
    return x.reshape(shape), info, count[0]


def newton_solve(grid: PolarGrid, H: CoefficientField, N: int, boundary, u0,
                 tol: float = 1e-10, max_iter: int = 40, max_halvings: int = 30,
                 armijo: float = 1e-4) -> tuple[Field, NewtonReport]:
    """Damped Newton iteration for ``F(u) = 0`` until ``max|F| <= tol``.

    Raises
    ------
    NewtonDivergence
        No step length ``2^-k`` (``k <= max_halvings``) decreases the residual.
    NewtonMaxIterations
        ``max_iter`` steps without reaching ``tol``.
    Both carry the iterate with the smallest residual in ``best``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    u = np.array(u0.values if isinstance(u0, Field) else u0, dtype=float)
    if u.shape != grid.shape or not np.all(np.isfinite(u)):
        raise ValueError("initial guess must be finite and match the grid")
    prob = _Problem(grid, H, N, boundary)
    rep = NewtonReport()
    F = prob.residual(u)
    fnorm = float(np.max(np.abs(F)))
    rep.residuals.append(fnorm)
    best = (fnorm, u.copy())
    for it in range(max_iter):
        if fnorm <= tol:
            rep.converged = True
            rep.message = "converged"
            return Field(grid, u, name="u"), rep
        apply, W = prob.jacobian(u)
        prec = _ModePreconditioner(grid, W)
        eta = min(1e-4, max(1e-13, 0.1 * tol / max(fnorm, tol)))
        du, info, kits = _gmres(apply, prec, -F, rtol=eta)
        rep.krylov_iterations.append(kits)
        merit = float(np.linalg.norm(F))
        lam = 1.0
        for _ in range(max_halvings + 1):
            trial = u + lam * du
            with np.errstate(over="ignore", invalid="ignore"):
                Ft = prob.residual(trial)
            if np.all(np.isfinite(Ft)) and np.linalg.norm(Ft) <= (1 - armijo * lam) * merit:
                break
            lam *= 0.5
        else:
            rep.iterations = it
            rep.message = f"no descent after {max_halvings} halvings (residual {fnorm:.3e})"
            raise NewtonDivergence(rep.message, best=Field(grid, best[1], name="u"), report=rep)
        u, F = trial, Ft
        fnorm = float(np.max(np.abs(F)))
        rep.iterations = it + 1
        rep.damping.append(lam)
        rep.residuals.append(fnorm)
        log.debug("newton %d: |F|=%.3e lambda=%g gmres=%d info=%d", it + 1, fnorm, lam, kits, info)
        if fnorm < best[0]:
            best = (fnorm, u.copy())
    if fnorm <= tol:
        rep.converged = True
        rep.message = "converged"
        return Field(grid, u, name="u"), rep
    rep.message = f"{max_iter} iterations without reaching tol (residual {fnorm:.3e})"
    raise NewtonMaxIterations(rep.message, best=Field(grid, best[1], name="u"), report=rep)


class _BalancedPreconditioner:
    """Mode preconditioner bordered by the lift columns and constraint rows.

    Applies the exact inverse of ``[[M, B], [C, 0]]`` with ``M`` the banded
    mode preconditioner, using the 2x2 Schur complement ``C M^-1 B``.
    """

    def __init__(self, base: _ModePreconditioner, B: np.ndarray, C: np.ndarray, w: np.ndarray):
        self.base, self.C, self.w = base, C, w
        self.X = np.stack([base.solve(b) for b in B])
        self.S = np.array([[np.sum(w * C[i] * self.X[j]) for j in range(2)] for i in range(2)])

    def solve(self, r: np.ndarray, s: np.ndarray):
        x1 = self.base.solve(r)
        cx = np.array([np.sum(self.w * self.C[i] * x1) for i in range(2)])
        dg = np.linalg.solve(self.S, cx - s)
        return x1 - np.tensordot(dg, self.X, axes=1), dg


def _translation_constraints(grid: PolarGrid, K: np.ndarray, anchor: np.ndarray) -> np.ndarray:
    """Weighted translation modes ``K e^V d_j V`` normalized so ``<Z_j, d_j V> = 1``."""
    vr, vt = grid.d_r(anchor), grid.d_theta(anchor)
    c, s = np.cos(grid.theta)[None, :], np.sin(grid.theta)[None, :]
    r = grid.r[:, None]
    dV = (c * vr - s * vt / r, s * vr + c * vt / r)
    W0 = K * np.exp(anchor)
    Z = []
    for d in dV:
        z = W0 * d
        z[-1] = 0.0
        Z.append(z / np.sum(grid.area_weights * z * d))
    return np.stack(Z)


def balanced_solve(grid: PolarGrid, H: CoefficientField, N: int, boundary, anchor, u0=None,
                   tol: float = 1e-10, max_iter: int = 40, max_halvings: int = 30,
                   armijo: float = 1e-4):
    """Newton solve with a linear boundary lift ``g . y`` as two extra unknowns.

    The Dirichlet data become ``boundary + g_1 y_1 + g_2 y_2`` and two
    constraints ``<u - anchor, Z_j> = 0`` (weighted translation modes of the
    anchor) pin the cores.  A gradient of ``H`` pushes all cores the same way,
    which the pinned configuration cannot absorb; the lift is the boundary
    slope that balances it.

    Returns
    -------
    (Field, ndarray, NewtonReport)
        The solution, the lift ``g`` and the convergence history.  Residuals
        include the constraint values.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    V = np.asarray(anchor.values if isinstance(anchor, Field) else anchor, dtype=float)
    u = np.array(V if u0 is None else (u0.values if isinstance(u0, Field) else u0), dtype=float)
    if u.shape != grid.shape or V.shape != grid.shape:
        raise ValueError("anchor and initial guess must match the grid")
    prob = _Problem(grid, H, N, boundary)
    g0 = prob.g.copy()
    w = grid.area_weights
    C = _translation_constraints(grid, prob.K, V)
    B = np.zeros((2,) + grid.shape)
    B[0, -1] = -grid.R * np.cos(grid.theta)
    B[1, -1] = -grid.R * np.sin(grid.theta)
    n = u.size

    def residual(u, g):
        prob.g = g0 + grid.R * (g[0] * np.cos(grid.theta) + g[1] * np.sin(grid.theta))
        F = prob.residual(u)
        c = np.array([np.sum(w * C[j] * (u - V)) for j in range(2)])
        return F, c

    lift = np.zeros(2)
    rep = NewtonReport()
    F, c = residual(u, lift)
    fnorm = max(float(np.max(np.abs(F))), float(np.max(np.abs(c))))
    rep.residuals.append(fnorm)
    for it in range(max_iter):
        if fnorm <= tol:
            break
        apply, W = prob.jacobian(u)
        prec = _BalancedPreconditioner(_ModePreconditioner(grid, W), B, C, w)

        def op(x):
            du, dg = x[:n].reshape(grid.shape), x[n:]
            top = apply(du) + np.tensordot(dg, B, axes=1)
            bot = [np.sum(w * C[j] * du) for j in range(2)]
            return np.concatenate([top.ravel(), bot])

        def pre(x):
            du, dg = prec.solve(x[:n].reshape(grid.shape), x[n:])
            return np.concatenate([du.ravel(), dg])

        A = spla.LinearOperator((n + 2, n + 2), matvec=op)
        M = spla.LinearOperator((n + 2, n + 2), matvec=pre)
        rhs = -np.concatenate([F.ravel(), c])
        eta = min(1e-4, max(1e-13, 0.1 * tol / max(fnorm, tol)))
        count = [0]
        x, info = spla.gmres(A, rhs, rtol=eta, atol=0.0, restart=80, maxiter=20, M=M,
                             callback=lambda _: count.__setitem__(0, count[0] + 1),
                             callback_type="pr_norm")
        rep.krylov_iterations.append(count[0])
        du, dg = x[:n].reshape(grid.shape), x[n:]
        merit = float(np.hypot(np.linalg.norm(F), np.linalg.norm(c)))
        lam = 1.0
        for _ in range(max_halvings + 1):
            with np.errstate(over="ignore", invalid="ignore"):
                Ft, ct = residual(u + lam * du, lift + lam * dg)
            if np.all(np.isfinite(Ft)) and np.hypot(np.linalg.norm(Ft), np.linalg.norm(ct)) \
                    <= (1 - armijo * lam) * merit:
                break
            lam *= 0.5
        else:
            rep.iterations = it
            rep.message = f"no descent after {max_halvings} halvings (residual {fnorm:.3e})"
            raise NewtonDivergence(rep.message, best=Field(grid, u, name="u"), report=rep)
        u, lift, F, c = u + lam * du, lift + lam * dg, Ft, ct
        fnorm = max(float(np.max(np.abs(F))), float(np.max(np.abs(c))))
        rep.iterations = it + 1
        rep.damping.append(lam)
        rep.residuals.append(fnorm)
        log.debug("balanced newton %d: |F|=%.3e lift=(%.3e, %.3e) lambda=%g gmres=%d",
                  it + 1, fnorm, lift[0], lift[1], lam, count[0])
    if fnorm <= tol:
        rep.converged = True
        rep.message = "converged"
        return Field(grid, u, name="u"), lift, rep
    rep.message = f"{max_iter} iterations without reaching tol (residual {fnorm:.3e})"
    raise NewtonMaxIterations(rep.message, best=Field(grid, u, name="u"), report=rep)


def solve_linearized(grid: PolarGrid, H: CoefficientField, N: int, u, rhs,
                     boundary=0.0, rtol: float = 1e-10, maxiter: int = 200) -> Field:
    """Solve ``(Delta_h + |x|^{2N} H e^u) w = rhs`` with ``w = boundary`` on ``|x| = R``.

    Uses the Newton Jacobian and preconditioner; ``rhs`` on the Dirichlet
    ring is ignored.
    """
    values = u.values if isinstance(u, Field) else np.asarray(u, dtype=float)
    b = np.array(rhs.values if isinstance(rhs, Field) else rhs, dtype=float)
    if values.shape != grid.shape or b.shape != grid.shape:
        raise ValueError("u and rhs must match the grid")
    prob = _Problem(grid, H, N, np.zeros(grid.n_t))
    apply, W = prob.jacobian(values)
    if prob.filtered:
        b = grid.polar_filter(b)
    b[-1] = np.broadcast_to(np.asarray(boundary, dtype=float), (grid.n_t,))
    w, info, _ = _gmres(apply, _ModePreconditioner(grid, W), b, rtol=rtol, maxiter=maxiter)
    if info != 0:
        raise SolverError(f"linearized solve did not converge (gmres info {info})",
                          best=Field(grid, w, name="w"))
    return Field(grid, w, name="w")


# -- rescaling and harmonic split ------------------------------------------------


def rescale(u: Field, delta: float, theta: float, N: int, target: PolarGrid | None = None) -> Field:
    """``v(y) = u(delta e^{i theta} y) + 2(N+1) log delta`` on ``B_{R/delta}``.

    Without ``target`` the map is an exact relabelling of the nodes (grid
    scaled by ``1/delta``); rotations by a multiple of the angular spacing
    are exact rolls.  Other targets are filled by interpolation.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    shift = 2 * (N + 1) * np.log(delta)
    g = u.grid
    if target is None:
        step = 2 * np.pi / g.n_t
        k = theta / step
        if abs(k - round(k)) > 1e-9:
            raise ValueError("rotation must be a multiple of the angular spacing without a target grid")
        vals = np.roll(u.values, -int(round(k)) % g.n_t, axis=1) + shift
        return Field(g.scaled(delta), vals, name=u.name)
    pts = delta * np.exp(1j * theta) * target.z
    if np.any(np.abs(pts) > g.R * (1 + 1e-12)):
        raise ValueError("target grid reaches outside the source disk")
    return Field(target, u(pts) + shift, name=u.name)


def split_harmonic(u: Field, disk: GreensDisk | None = None) -> tuple[Field, Field]:
    """``(u - phi, phi)`` with ``phi`` the harmonic extension of u's trace
    minus its mean (so ``phi(0) = 0``)."""
    g = u.grid
    disk = disk or GreensDisk(g.R)
    if abs(disk.R - g.R) > 1e-12 * g.R:
        raise ValueError("disk and grid radius differ")
    trace = BoundaryTrace(u.boundary_trace())
    phi = harmonic_extension(disk, trace, g.z)
    phi[-1] = trace.values - trace.mean
    return Field(g, u.values - phi, name="u_lift"), Field(g, phi, name="phi")


# -- continuation families ------------------------------------------------------


class FamilyError(SolverError):
    """A continuation step failed even after bisecting the schedule."""

    def __init__(self, message, members=(), best=None, report=None):
        super().__init__(message, best=best, report=report)
        self.members = list(members)


def mu_from_delta(delta: float) -> float:
    """Height on the small-delta curve ``delta = mu e^{-mu}`` (branch ``mu > 1``)."""
    if not 0 < delta < np.exp(-1):
        raise ValueError("the small-delta curve needs 0 < delta < 1/e")
    return float(brentq(lambda m: np.log(m) - m - np.log(delta), 1.0, 800.0, xtol=1e-14))


@dataclass(frozen=True)
class FamilyPolicy:
    """How family members are built.

    Attributes
    ----------
    tau : float
        Radius of the original disk ``B_tau``.
    mu : tuple of float or None
        Heights per member; ``None`` follows the curve ``delta = mu e^{-mu}``.
    n_r, n_t : int
        Grid size of the rescaled problem on ``B_{tau/delta}``.
    tol : float or None
        Newton tolerance on ``max |F|`` in rescaled coordinates.  ``None``
        uses ``1e-10`` raised to ten times the round-off floor of the stencil
        (see :func:`residual_floor`) on fine-cored grids.
    core_factor : float
        Grid core width in units of the bubble core width.
    balance : bool
        Solve with :func:`balanced_solve`: a linear boundary lift absorbs the
        collective force of a nonconstant ``H`` while the cores stay pinned.
    ramp : int
        Number of homotopy steps from ``H(delta e_1)`` to ``H`` in balanced
        mode.
    """

    tau: float = 1.0
    mu: tuple | None = None
    n_r: int = 128
    n_t: int = 128
    tol: float | None = None
    core_factor: float = 1.0
    max_iter: int = 60
    balance: bool = False
    ramp: int = 4

    def heights(self, schedule) -> list:
        if self.mu is None:
            return [mu_from_delta(d) for d in schedule]
        if len(self.mu) != len(schedule):
            raise ValueError("mu schedule and delta schedule differ in length")
        return [float(m) for m in self.mu]


@dataclass(frozen=True, eq=False)
class FamilyMember:
    """One converged member.

    ``v`` lives on ``B_{tau/delta}`` (bubbles at unit distance), ``u`` is the
    same solution on ``B_tau``; ``params`` is the exact profile whose trace
    was imposed; ``coefficient`` is ``H`` in the original variable and
    ``tol`` the Newton tolerance the member met.  ``lift`` is the gradient of
    the linear boundary lift in original coordinates (zero unless the family
    was balanced).
    """

    delta: float
    mu: float
    N: int
    v: Field
    u: Field
    params: object
    coefficient: CoefficientField
    report: NewtonReport
    diagnostics: object = None
    tol: float = float("nan")
    lift: tuple = (0.0, 0.0)

    @property
    def rescaled_coefficient(self) -> CoefficientField:
        return self.coefficient.rescaled(self.delta)


@dataclass(frozen=True, eq=False)
class ContinuationFamily:
    coefficient: CoefficientField
    N: int
    policy: FamilyPolicy
    members: tuple = ()

    def __post_init__(self):
        mus = [m.mu for m in self.members]
        if any(b <= a for a, b in zip(mus, mus[1:])):
            raise ValueError("family heights must increase strictly")
        for m in self.members:
            if not m.report.converged:
                raise ValueError("every family member must be converged")

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def residual_floor(grid: PolarGrid, level: float) -> float:
    """Round-off level of ``max |F|`` for values of size ``level`` on ``grid``.

    The radial second difference divides rounding errors of ``u`` by the
    smallest squared spacing and the angular one multiplies them by the
    largest squared mode; the radial constant was measured on exact bubbles.
    """
    dr = float(np.min(np.diff(grid.r)))
    ulp = float(np.spacing(abs(level) + 1.0))
    return ulp * (5.3 / dr**2 + (grid.n_t / 2) ** 2)


def check_resolution(grid: PolarGrid, params) -> None:
    """Require at most half a core width between nodes at the bubble ring.

    Raises :class:`~bubblelab.profiles.UnderResolvedGrid` otherwise.
    """
    from .profiles import UnderResolvedGrid, local_maxima

    ring = float(np.abs(local_maxima(params)[0]))
    if ring >= grid.R:
        raise UnderResolvedGrid(f"bubble ring {ring:.3g} lies outside the grid (R={grid.R:.3g})")
    spacing = max(grid.spacing_near(ring))
    if spacing > 0.5 * params.core_width:
        raise UnderResolvedGrid(
            f"under-resolved: node spacing {spacing:.3e} at the bubble ring exceeds half the "
            f"core width {params.core_width:.3e}; raise n_r or n_t")


def _member_grid(policy: FamilyPolicy, delta: float, width: float) -> PolarGrid:
    return PolarGrid.for_bubbles(policy.tau / delta, policy.n_r, policy.n_t, ring=1.0,
                                 core=policy.core_factor * width)


def _solve_member(H, N, delta, mu, policy, warm):
    from .profiles import BubbleParams, global_profile

    h0 = float(H(delta))
    params = BubbleParams(N, mu, h0)
    grid = _member_grid(policy, delta, params.core_width)
    check_resolution(grid, params)
    V = global_profile(params, grid.z)
    u0 = V.copy()
    if warm is not None:
        v_prev, V_prev_params = warm
        pts = grid.z[:-1]
        inside = np.abs(pts) < v_prev.grid.R
        corr = np.zeros(pts.shape)
        corr[inside] = v_prev(pts[inside]) - global_profile(V_prev_params, pts[inside])
        u0[:-1] += corr
    Hy = H.rescaled(delta)
    Hy.bounds(grid.R)
    if warm is not None:
        # the previous correction is shaped by the previous core; keep it only if it helps
        r_warm = assemble_residual(grid, Hy, N, V[-1], u0).max_norm()
        if assemble_residual(grid, Hy, N, V[-1], V).max_norm() < r_warm:
            u0 = V
    tol = policy.tol if policy.tol is not None else max(1e-10, 10 * residual_floor(grid, mu))
    if policy.balance:
        v, g = V, np.zeros(2)
        for s in (float(x) for x in np.linspace(0.0, 1.0, max(1, policy.ramp) + 1)[1:]):
            Hs = CoefficientField(f"{h0!r} + {s!r}*(({H.expression}) - {h0!r})", H.delta, H.theta)
            v, g, rep = balanced_solve(grid, Hs.rescaled(delta), N, V[-1], V, u0=v, tol=tol,
                                       max_iter=policy.max_iter)
        u = rescale(v, 1.0 / delta, 0.0, N)
        lift = (float(g[0] / delta), float(g[1] / delta))
        return FamilyMember(delta, mu, N, v, u, params, H, rep, tol=tol, lift=lift)
    v, rep = newton_solve(grid, Hy, N, V[-1], u0, tol=tol, max_iter=policy.max_iter)
    u = rescale(v, 1.0 / delta, 0.0, N)
    return FamilyMember(delta, mu, N, v, u, params, H, rep, tol=tol)


def continuation_family(H: CoefficientField, N: int, delta_schedule, policy: FamilyPolicy | None = None,
                        diagnose=True) -> ContinuationFamily:
    """Solve a family of rescaled problems along a decreasing ``delta`` schedule.

    Each member imposes the exact profile (height ``mu``, coefficient frozen
    at ``H(delta e_1)``) on ``|y| = tau/delta`` and is warm-started from the
    previous member's correction ``v - V``.  A failed step is retried once
    after inserting the geometric midpoint of the schedule.
    """
    policy = policy or FamilyPolicy()
    deltas = [float(d) for d in delta_schedule]
    if any(d <= 0 for d in deltas) or any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("delta schedule must be positive and strictly decreasing")
    if not deltas:
        return ContinuationFamily(H, N, policy, ())
    if any(d >= policy.tau for d in deltas):
        raise ValueError("every delta must be below tau")
    mus = policy.heights(deltas)
    members, warm = [], None
    prev = None
    for d, mu in zip(deltas, mus):
        try:
            m = _solve_member(H, N, d, mu, policy, warm)
        except SolverError as first:
            if prev is None:
                raise FamilyError(f"member delta={d:g} failed: {first}", members,
                                  best=first.best, report=first.report) from first
            d_mid, mu_mid = np.sqrt(prev[0] * d), 0.5 * (prev[1] + mu)
            log.info("bisecting schedule at delta=%g", d_mid)
            try:
                mid = _solve_member(H, N, d_mid, mu_mid, policy, warm)
                m = _solve_member(H, N, d, mu, policy, (mid.v, mid.params))
            except SolverError as second:
                raise FamilyError(f"member delta={d:g} failed after bisection: {second}", members,
                                  best=second.best, report=second.report) from second
        members.append(m)
        warm = (m.v, m.params)
        prev = (d, mu)
    if diagnose:
        from .diagnostics import find_maxima

        members = [replace(m, diagnostics=find_maxima(m.u, N)) for m in members]
    return ContinuationFamily(H, N, policy, tuple(members))


# -- checkpoints ------------------------------------------------------------------


def save_checkpoint(path, u: Field, H: CoefficientField, N: int, **meta) -> None:
    """Write ``u`` with a versioned JSON header to an ``.npz`` container."""
    header = {
        "version": CHECKPOINT_VERSION,
        "grid": u.grid.descriptor(),
        "coefficient": H.descriptor(),
        "N": int(N),
        "order": "r-major, then theta",
        **{k: (float(v) if isinstance(v, (np.floating, float)) else v) for k, v in meta.items()},
    }
    with open(path, "wb") as fh:
        np.savez(fh, header=np.frombuffer(json.dumps(header, sort_keys=True).encode(), dtype=np.uint8),
                 values=np.ascontiguousarray(u.values))


def load_checkpoint(path) -> tuple[Field, dict]:
    with np.load(path) as data:
        header = json.loads(bytes(data["header"]).decode())
        values = np.array(data["values"])
    if header.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {header.get('version')}")
    grid = PolarGrid.from_descriptor(header["grid"])
    return Field(grid, values, name="u"), header
