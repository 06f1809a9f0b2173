"""Polar grids on a disk, sampled fields, and the discrete polar Laplacian.

The radial direction is discretized by fourth-order finite differences in a
mapped coordinate ``s`` in which nodes are uniform; the map clusters nodes
around an optional ring radius (where bubbles sit) and grows geometrically
towards the outer boundary.  The angular direction is Fourier-spectral.

Nodes sit at ``s_j = (j + 1/2) ds`` so the origin is never a node.  Stencils
that reach across the origin read the reflected node ``(r, theta + pi)``,
which is the per-Fourier-mode parity closure (even modes see a Neumann-like
condition, odd modes a Dirichlet-like one).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

__all__ = [
    "RadialMap",
    "PolarGrid",
    "Field",
    "fornberg_weights",
    "fourier_eval",
]

ORDER = 4
FILTER_EPS = 1e-14


def fornberg_weights(z: float, x: np.ndarray, m: int) -> np.ndarray:
    """Finite-difference weights for derivatives 0..m at ``z`` from nodes ``x``.

    Returns an array of shape ``(m + 1, len(x))``.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = np.zeros((m + 1, n))
    c1 = 1.0
    c4 = x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


@dataclass(frozen=True)
class RadialMap:
    """Odd, analytic map ``s(r)`` whose uniform nodes cluster near ``ring``.

    The node density ``ds/dr`` is a sum of a Lorentzian of width ``core`` at the
    ring (resolves bubble cores), a ``1/|r - ring|`` term (resolves the
    logarithmic annulus around each core) and a ``1/r`` background (geometric
    growth out to large radii).  Every term is mirrored at ``-ring`` so the map
    is odd in ``r``.
    """

    ring: float | None = None
    core: float = 0.1
    w_core: float = 1.0
    w_annulus: float = 0.5
    w_background: float = 1.0
    r0: float = 1.0

    def s(self, r):
        r = np.asarray(r, dtype=float)
        out = self.w_background * np.arcsinh(r / self.r0)
        if self.ring is not None:
            e, a, b = self.core, (r - self.ring) / self.core, (r + self.ring) / self.core
            out = out + self.w_core * (np.arctan(a) + np.arctan(b))
            out = out + self.w_annulus * (np.arcsinh(a) + np.arcsinh(b))
        return out

    def ds(self, r):
        r = np.asarray(r, dtype=float)
        out = self.w_background / np.sqrt(r**2 + self.r0**2)
        if self.ring is not None:
            e = self.core
            for d in (r - self.ring, r + self.ring):
                q = d**2 + e**2
                out = out + self.w_core * e / q + self.w_annulus / np.sqrt(q)
        return out

    def d2s(self, r):
        r = np.asarray(r, dtype=float)
        out = -self.w_background * r / (r**2 + self.r0**2) ** 1.5
        if self.ring is not None:
            e = self.core
            for d in (r - self.ring, r + self.ring):
                q = d**2 + e**2
                out = out - self.w_core * 2 * e * d / q**2 - self.w_annulus * d / q**1.5
        return out

    def r_of_s(self, s, r_max: float) -> np.ndarray:
        """Invert the map on ``[0, r_max]`` by safeguarded Newton iteration."""
        s = np.asarray(s, dtype=float)
        lo = np.zeros_like(s)
        hi = np.full_like(s, r_max)
        r = np.full_like(s, 0.5 * r_max)
        for _ in range(200):
            f = self.s(r) - s
            lo = np.where(f < 0, r, lo)
            hi = np.where(f >= 0, r, hi)
            step = r - f / self.ds(r)
            bad = (step <= lo) | (step >= hi)
            r_new = np.where(bad, 0.5 * (lo + hi), step)
            if np.all(np.abs(r_new - r) <= 1e-15 * np.maximum(1.0, np.abs(r))):
                r = r_new
                break
            r = r_new
        return r


@dataclass(frozen=True, eq=False)
class PolarGrid:
    """Discretization of the disk ``B_R`` in ``(r, theta)``.

    Parameters
    ----------
    R : float
        Disk radius.  The last radial node lies exactly on ``|x| = R``.
    n_r : int
        Number of radial nodes (including the boundary node).
    n_t : int
        Number of angular nodes; must be even.
    rmap : RadialMap
        Radial clustering map.
    filter_radius : float, optional
        Analyticity radius ``rho`` of the polar filter.  Inside ``rho`` the
        angular mode ``m`` of a smooth field decays like ``(r/rho)^m``, so
        ring ``j`` keeps only ``m <= log(1e-14) / log(r_j / rho)``.  Without
        the filter the spectral term ``u_thth / r^2`` amplifies the rounding
        of the samples near the origin by ``(n_t/2)^2 / r^2``.  ``None`` picks
        half the ring radius (or ``R/4`` without a ring); ``0`` disables it.
    """

    R: float
    n_r: int
    n_t: int
    rmap: RadialMap = field(default_factory=RadialMap)
    filter_radius: float | None = None

    def __post_init__(self):
        if self.R <= 0:
            raise ValueError("grid radius must be positive")
        if self.n_t % 2 or self.n_t < 4:
            raise ValueError(f"n_t must be even and >= 4, got {self.n_t}")
        if self.n_r < 8:
            raise ValueError(f"n_r must be >= 8, got {self.n_r}")

    @classmethod
    def for_bubbles(cls, R, n_r, n_t, ring=1.0, core=0.1, **kw):
        """Grid clustered at ``ring`` with core width ``core``."""
        kw.setdefault("r0", ring)
        return cls(R, n_r, n_t, RadialMap(ring=ring, core=core, **kw))

    @classmethod
    def uniform(cls, R, n_r, n_t):
        """Nearly uniform radial nodes (background map only, large ``r0``)."""
        return cls(R, n_r, n_t, RadialMap(ring=None, r0=10.0 * R))

    def descriptor(self) -> dict:
        m = self.rmap
        return {
            "R": self.R, "n_r": self.n_r, "n_t": self.n_t, "ring": m.ring,
            "core": m.core, "w_core": m.w_core, "w_annulus": m.w_annulus,
            "w_background": m.w_background, "r0": m.r0,
            "filter_radius": self.filter_radius,
        }

    @classmethod
    def from_descriptor(cls, d: dict) -> "PolarGrid":
        rmap = RadialMap(d["ring"], d["core"], d["w_core"], d["w_annulus"],
                         d["w_background"], d["r0"])
        return cls(d["R"], d["n_r"], d["n_t"], rmap, d.get("filter_radius"))

    def refined(self, factor: int = 2, angular: bool = False) -> "PolarGrid":
        n_t = self.n_t * factor if angular else self.n_t
        return PolarGrid(self.R, self.n_r * factor, n_t, self.rmap, self.filter_radius)

    def scaled(self, delta: float) -> "PolarGrid":
        """The same nodes with every radius divided by ``delta``."""
        m = self.rmap
        rmap = RadialMap(None if m.ring is None else m.ring / delta, m.core / delta,
                         m.w_core, m.w_annulus, m.w_background, m.r0 / delta)
        rf = self.filter_radius
        return PolarGrid(self.R / delta, self.n_r, self.n_t, rmap,
                         None if rf is None else rf / delta)

    # -- nodes -----------------------------------------------------------------

    @cached_property
    def ds(self) -> float:
        return float(self.rmap.s(self.R)) / (self.n_r - 0.5)

    @cached_property
    def s(self) -> np.ndarray:
        return (np.arange(self.n_r) + 0.5) * self.ds

    @cached_property
    def r(self) -> np.ndarray:
        r = self.rmap.r_of_s(self.s, self.R)
        r[-1] = self.R
        return r

    @cached_property
    def theta(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n_t) / self.n_t

    @cached_property
    def dr_ds(self) -> np.ndarray:
        return 1.0 / self.rmap.ds(self.r)

    @cached_property
    def d2r_ds2(self) -> np.ndarray:
        return -self.rmap.d2s(self.r) * self.dr_ds**3

    @cached_property
    def x(self) -> np.ndarray:
        return self.r[:, None] * np.cos(self.theta)[None, :]

    @cached_property
    def y(self) -> np.ndarray:
        return self.r[:, None] * np.sin(self.theta)[None, :]

    @cached_property
    def z(self) -> np.ndarray:
        return self.r[:, None] * np.exp(1j * self.theta)[None, :]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_r, self.n_t)

    @cached_property
    def modes(self) -> np.ndarray:
        return np.arange(self.n_t // 2 + 1)

    @cached_property
    def mode_limit(self) -> np.ndarray:
        """Highest angular mode kept on every ring by the polar filter."""
        m_max = self.n_t // 2
        rho = self.filter_radius
        if rho is None:
            rho = 0.5 * self.rmap.ring if self.rmap.ring is not None else 0.25 * self.R
        if rho == 0:
            return np.full(self.n_r, m_max)
        q = np.minimum(self.r / rho, 1.0)
        with np.errstate(divide="ignore"):
            lim = np.where(q < 1.0, np.floor(np.log(FILTER_EPS) / np.log(q)), m_max)
        return np.clip(lim, 1, m_max).astype(int)

    @cached_property
    def filter_mask(self) -> np.ndarray | None:
        """Boolean ``(n_r, n_t/2 + 1)`` mask of kept modes (``None`` if all)."""
        mask = self.modes[None, :] <= self.mode_limit[:, None]
        return None if mask.all() else mask

    def polar_filter(self, u: np.ndarray) -> np.ndarray:
        """Zero the angular modes above each ring's limit."""
        mask = self.filter_mask
        if mask is None:
            return u
        c = np.fft.rfft(u, axis=-1)
        return np.fft.irfft(np.where(mask, c, 0.0), n=self.n_t, axis=-1)

    def spacing_near(self, radius: float) -> tuple[float, float]:
        """Radial and arc-length node spacing at the node nearest ``radius``."""
        j = int(np.argmin(np.abs(self.r - radius)))
        jj = min(max(j, 1), self.n_r - 1)
        dr = self.r[jj] - self.r[jj - 1]
        return float(dr), float(self.r[j] * 2 * np.pi / self.n_t)

    @cached_property
    def area_weights(self) -> np.ndarray:
        """Quadrature weights for integrals over ``B_R`` on the grid.

        Midpoint rule in ``s`` (nodes are cell centres) times the trapezoid
        rule in theta; second-order in ``s``, only used for coarse totals.
        """
        w = np.full(self.n_r, self.ds)
        w[-1] = 0.5 * self.ds
        return (w * self.r * self.dr_ds)[:, None] * np.full(self.n_t, 2 * np.pi / self.n_t)

    # -- radial difference operators --------------------------------------------

    def _stencils(self):
        """Rows of the radial D1/D2 operators in ``s``.

        D2 is fourth order; D1 is sixth order because it is multiplied by
        ``1/r``, which would otherwise cost an order near the origin.  Returns
        per-row ``(cols, w1, w2)`` where negative columns denote the reflected
        node ``-col - 1``.
        """
        n = self.n_r

        def window(j, width, lo):
            start = min(max(j - width // 2, lo), n - width)
            return np.arange(start, start + width)

        rows = []
        for j in range(n - 1):
            c1 = window(j, 7, -3)
            c2 = window(j, 7 if j < 4 else (6 if j == n - 2 else 5), -3)
            cols = np.arange(min(c1[0], c2[0]), max(c1[-1], c2[-1]) + 1)
            w1 = np.zeros(len(cols))
            w2 = np.zeros(len(cols))
            w1[c1 - cols[0]] = fornberg_weights(0.0, (c1 - j).astype(float), 1)[1]
            w2[c2 - cols[0]] = fornberg_weights(0.0, (c2 - j).astype(float), 2)[2]
            rows.append((cols, w1 / self.ds, w2 / self.ds**2))
        return rows

    def _radial_matrix(self, parity: int, which: str) -> sp.csr_matrix:
        n = self.n_r
        data, ii, jj = [], [], []
        for j, (cols, w1, w2) in enumerate(self._stencils()):
            w = w1 if which == "d1" else w2
            for c, wc in zip(cols, w):
                if wc == 0.0:
                    continue
                if c < 0:
                    c, wc = -c - 1, parity * wc
                ii.append(j)
                jj.append(c)
                data.append(wc)
        return sp.csr_matrix((data, (ii, jj)), shape=(n, n))

    @cached_property
    def radial_coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        """Coefficients ``(a2, a1)`` with ``u_rr + u_r / r = a2 u_ss + a1 u_s``."""
        rp, rpp, r = self.dr_ds, self.d2r_ds2, self.r
        a2 = 1.0 / rp**2
        a1 = -rpp / rp**3 + 1.0 / (r * rp)
        return a2, a1

    def radial_operator(self, parity: int) -> sp.csr_matrix:
        """``d^2/dr^2 + (1/r) d/dr`` for one parity class; boundary row zero."""
        a2, a1 = self.radial_coefficients
        L = sp.diags(a2) @ self._radial_matrix(parity, "d2") + sp.diags(a1) @ self._radial_matrix(parity, "d1")
        return L.tocsr()

    def radial_derivative_operator(self, parity: int) -> sp.csr_matrix:
        """``d/dr`` (fourth order; the boundary row uses a one-sided stencil)."""
        D1 = self._radial_matrix(parity, "d1").tolil()
        n = self.n_r
        c = np.arange(n - 5, n)
        D1[n - 1, :] = 0.0
        D1[n - 1, c] = fornberg_weights(0.0, (c - (n - 1)).astype(float), 1)[1] / self.ds
        return (sp.diags(1.0 / self.dr_ds) @ D1.tocsr()).tocsr()

    @cached_property
    def _phys_ops(self):
        # Physical-space split: the part acting on the same column and the part
        # acting on the reflected column (theta + pi).
        plus = self.radial_operator(+1)
        minus = self.radial_operator(-1)
        same = 0.5 * (plus + minus)
        refl = 0.5 * (plus - minus)
        return same.tocsr(), refl.tocsr()

    @cached_property
    def _phys_d1(self):
        plus = self.radial_derivative_operator(+1)
        minus = self.radial_derivative_operator(-1)
        return (0.5 * (plus + minus)).tocsr(), (0.5 * (plus - minus)).tocsr()

    def reflect(self, u: np.ndarray) -> np.ndarray:
        """Values at ``theta + pi`` (the reflected column)."""
        return np.roll(u, -self.n_t // 2, axis=-1)

    def laplacian(self, u: np.ndarray) -> np.ndarray:
        """Filtered discrete polar Laplacian ``P L u``; boundary ring zero."""
        same, refl = self._phys_ops
        out = same @ u + refl @ self.reflect(u)
        out += self.d2_theta(u) / self.r[:, None] ** 2
        out[-1] = 0.0
        return self.polar_filter(out)

    def d_r(self, u: np.ndarray) -> np.ndarray:
        same, refl = self._phys_d1
        return same @ u + refl @ self.reflect(u)

    def d_theta(self, u: np.ndarray) -> np.ndarray:
        c = np.fft.rfft(u, axis=-1)
        m = self.modes.astype(float)
        c = 1j * m * c
        c[..., -1] = 0.0
        return np.fft.irfft(c, n=self.n_t, axis=-1)

    def d2_theta(self, u: np.ndarray) -> np.ndarray:
        c = np.fft.rfft(u, axis=-1)
        return np.fft.irfft(-(self.modes**2) * c, n=self.n_t, axis=-1)

    # -- interpolation --------------------------------------------------------------

    def _radial_weights(self, r: np.ndarray, width: int = 6):
        """Lagrange weights in ``s`` for off-grid radii.

        Returns ``(cols, reflected, weights)`` each of shape ``(P, width)``.
        """
        s = self.rmap.s(np.asarray(r, dtype=float))
        pos = s / self.ds - 0.5
        start = np.floor(pos).astype(int) - (width // 2 - 1)
        start = np.minimum(start, self.n_r - width)
        cols = start[:, None] + np.arange(width)[None, :]
        nodes = (cols + 0.5) * self.ds
        w = np.ones(cols.shape)
        for k in range(width):
            for q in range(width):
                if q != k:
                    w[:, k] *= (s - nodes[:, q]) / (nodes[:, k] - nodes[:, q])
        reflected = cols < 0
        cols = np.where(reflected, -cols - 1, cols)
        return cols, reflected, w

    def radial_rows(self, u: np.ndarray, r: np.ndarray) -> np.ndarray:
        """Interpolate every angular column of ``u`` to radii ``r``: ``(P, n_t)``."""
        cols, refl, w = self._radial_weights(np.atleast_1d(r))
        ur = self.reflect(u)
        vals = np.where(refl[..., None], ur[cols], u[cols])
        return np.einsum("pk,pkt->pt", w, vals)


def fourier_eval(rows: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant of each row at its angle."""
    n = rows.shape[-1]
    c = np.fft.rfft(rows, axis=-1) / n
    m = np.arange(c.shape[-1])
    scale = np.full(c.shape[-1], 2.0)
    scale[0] = 1.0
    if n % 2 == 0:
        scale[-1] = 1.0
    ph = np.exp(1j * np.outer(theta, m))
    if n % 2 == 0:
        ph[:, -1] = np.cos(m[-1] * theta)
    return np.real(np.sum(scale * c * ph, axis=-1))


@dataclass(frozen=True, eq=False)
class Field:
    """Scalar samples on a :class:`PolarGrid`, shape ``(n_r, n_t)``."""

    grid: PolarGrid
    values: np.ndarray
    name: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"field shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError(f"field {self.name!r} has non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: PolarGrid, f, name: str = "") -> "Field":
        """Sample ``f(z)`` (complex points) on the grid."""
        return cls(grid, np.asarray(f(grid.z), dtype=float), name)

    def with_values(self, values, name: str | None = None) -> "Field":
        return Field(self.grid, values, self.name if name is None else name)

    def __call__(self, points) -> np.ndarray:
        """Interpolate at complex points (fourth/fifth-order radial, spectral angular)."""
        pts = np.atleast_1d(np.asarray(points, dtype=complex))
        out = np.empty(pts.shape, dtype=float)
        flat, res = pts.ravel(), out.ravel()
        for i in range(0, len(flat), 4096):
            chunk = flat[i:i + 4096]
            rows = self.grid.radial_rows(self.values, np.abs(chunk))
            res[i:i + 4096] = fourier_eval(rows, np.angle(chunk))
        return out

    def gradient(self, points) -> np.ndarray:
        """Gradient at complex points, returned as complex ``u_x + i u_y``."""
        g = self.grid
        pts = np.atleast_1d(np.asarray(points, dtype=complex))
        ur = Field(g, g.d_r(self.values))(pts)
        ut = Field(g, g.d_theta(self.values))(pts)
        r, th = np.abs(pts), np.angle(pts)
        return (ur + 1j * ut / r) * np.exp(1j * th)

    def spherical_average(self) -> np.ndarray:
        """Angular mean on every ring."""
        return self.values.mean(axis=1)

    def boundary_trace(self) -> np.ndarray:
        return np.array(self.values[-1])

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.values)))
