"""Dirichlet Green's function of a disk, harmonic extension and representation.

``G(y, eta) = -(1/2pi) log|y - eta| + (1/2pi) log(|R^2 - conj(eta) y| / R)``
solves ``-Delta_y G = delta_eta`` in ``B_R`` with ``G = 0`` on ``|y| = R``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Field
from .quadrature import _gauss

__all__ = [
    "GreensDisk",
    "BoundaryTrace",
    "UnderSampledTrace",
    "green_value",
    "green_gradient",
    "harmonic_extension",
    "harmonic_gradient_at_origin",
    "represent",
]

TWO_PI = 2 * np.pi


class UnderSampledTrace(ValueError):
    """The boundary samples do not resolve the trace (trailing modes too large)."""


@dataclass(frozen=True)
class GreensDisk:
    """The disk ``B_R`` centred at the origin."""

    R: float

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError(f"disk radius must be positive, got {self.R}")


@dataclass(frozen=True, eq=False)
class BoundaryTrace:
    """Samples of a function at ``n`` equispaced angles on ``|y| = R``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        n = v.size
        if v.ndim != 1 or n < 16 or n & (n - 1):
            raise ValueError(f"trace needs a power-of-two sample count >= 16, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("trace has non-finite samples")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, disk: GreensDisk, f, n: int = 256) -> "BoundaryTrace":
        th = TWO_PI * np.arange(n) / n
        return cls(np.asarray(f(disk.R * np.exp(1j * th)), dtype=float))

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    def coefficients(self) -> np.ndarray:
        """Complex coefficients ``c_m`` with ``trace = sum Re(c_m e^{i m theta})``."""
        c = np.fft.rfft(self.values) / self.n
        c[1:] *= 2.0
        c[-1] *= 0.5
        return c


def _as_complex(y) -> np.ndarray:
    y = np.asarray(y)
    if not np.iscomplexobj(y) and y.ndim and y.shape[-1] == 2:
        y = y[..., 0] + 1j * y[..., 1]
    return np.asarray(y, dtype=complex)


def _check_eta(disk, eta):
    if np.any(np.abs(eta) >= disk.R):
        raise ValueError("source point must lie inside the disk")


def green_value(disk: GreensDisk, y, eta, part: str = "full") -> np.ndarray:
    """Green's function (``part='full'``) or its regular part (``'regular'``)."""
    y, eta = _as_complex(y), _as_complex(eta)
    _check_eta(disk, eta)
    if np.any(np.abs(y) > disk.R * (1 + 1e-12)):
        raise ValueError("evaluation point outside the disk")
    R = disk.R
    regular = np.log(np.abs(R * R - np.conj(eta) * y) / R) / TWO_PI
    if part == "regular":
        return regular
    if part != "full":
        raise ValueError(f"unknown part {part!r}")
    d = np.abs(y - eta)
    if np.any(d == 0):
        raise ValueError("coincident points: the full Green's function is singular")
    return regular - np.log(d) / TWO_PI


def green_gradient(disk: GreensDisk, y, eta, part: str = "full") -> np.ndarray:
    """``grad_y G`` as an array with a trailing axis of length 2."""
    y, eta = _as_complex(y), _as_complex(eta)
    _check_eta(disk, eta)
    R = disk.R
    g = np.conj(-np.conj(eta) / (R * R - np.conj(eta) * y)) / TWO_PI
    if part == "full":
        d = y - eta
        if np.any(d == 0):
            raise ValueError("coincident points: the full Green's function is singular")
        g = g - 1.0 / np.conj(d) / TWO_PI
    elif part != "regular":
        raise ValueError(f"unknown part {part!r}")
    return np.stack([g.real, g.imag], axis=-1)


def _check_aliasing(trace: BoundaryTrace, rtol: float = 1e-9) -> np.ndarray:
    c = trace.coefficients()
    tail = np.abs(c[3 * (len(c) - 1) // 4:])
    ref = max(np.max(np.abs(c[1:])), abs(trace.mean), 1.0)
    if tail.max() > rtol * ref:
        raise UnderSampledTrace(
            f"trailing Fourier coefficients of the trace reach {tail.max():.2e} "
            f"(relative {tail.max() / ref:.2e}); sample the boundary more densely")
    return c


def harmonic_extension(disk: GreensDisk, trace: BoundaryTrace, y,
                       check: bool = True) -> np.ndarray:
    """Harmonic function with boundary values ``trace - mean(trace)``.

    Evaluated as the angular Fourier series with exact radial factors
    ``(r/R)^m``; vanishes at the origin.
    """
    y = _as_complex(y)
    if np.any(np.abs(y) > disk.R * (1 + 1e-12)):
        raise ValueError("evaluation point outside the disk")
    c = _check_aliasing(trace) if check else trace.coefficients()
    m = np.arange(len(c))
    z = y[..., None] / disk.R
    rm = np.abs(z) ** m
    ph = np.exp(1j * m * np.angle(z))
    terms = np.real(c[1:] * ph[..., 1:]) * rm[..., 1:]
    return np.sum(terms, axis=-1)


def harmonic_gradient_at_origin(disk: GreensDisk, trace: BoundaryTrace) -> np.ndarray:
    """Gradient at 0 of the harmonic extension: ``(a_1, b_1) / R``.

    ``a_1, b_1`` are the coefficients of ``cos`` and ``sin`` in the trace.
    """
    c1 = trace.coefficients()[1]
    return np.array([c1.real, -c1.imag]) / disk.R


def _mode_kernel(m: int, r: float, rho: np.ndarray, R: float) -> np.ndarray:
    lo, hi = np.minimum(r, rho), np.maximum(r, rho)
    if m == 0:
        return np.log(R / hi)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = ((lo / hi) ** m - (lo * hi / (R * R)) ** m) / (2.0 * m)
    return np.where(hi > 0, k, 0.0)


def represent(disk: GreensDisk, source: Field, trace: BoundaryTrace, y,
              n_gauss: int = 8) -> np.ndarray:
    """Green's representation ``trace part + int_B G(y, eta) source(eta) d eta``.

    The bulk integral is evaluated mode by mode: the source's angular Fourier
    coefficients are integrated against the radial Green's kernels, which
    treat the logarithmic singularity at ``y`` analytically.  Radial
    quadrature is composite Gauss in the grid coordinate ``s`` with a panel
    break at ``|y|``.
    """
    grid = source.grid
    if abs(grid.R - disk.R) > 1e-12 * disk.R:
        raise ValueError("source grid and disk radius differ")
    pts = np.atleast_1d(_as_complex(y))
    if np.any(np.abs(pts) >= disk.R):
        raise ValueError("representation points must be interior")
    xg, wg = _gauss(n_gauss)
    S = grid.ds * (grid.n_r - 0.5)
    n_t = grid.n_t
    modes = np.arange(n_t // 2 + 1)
    out = np.empty(pts.shape, dtype=float)
    for idx, p in enumerate(pts):
        r_y = abs(p)
        s_y = float(grid.rmap.s(r_y))
        nodes, weights = [], []
        for a, b in ((0.0, s_y), (s_y, S)):
            if b <= a:
                continue
            k = max(1, int(np.ceil((b - a) / (2 * grid.ds))))
            e = np.linspace(a, b, k + 1)
            lo, hi = e[:-1, None], e[1:, None]
            nodes.append((0.5 * (hi - lo) * xg + 0.5 * (hi + lo)).ravel())
            weights.append((0.5 * (hi - lo) * wg).ravel())
        s_nodes = np.concatenate(nodes)
        s_w = np.concatenate(weights)
        rho = grid.rmap.r_of_s(s_nodes, grid.R)
        jac = 1.0 / grid.rmap.ds(rho)
        rows = grid.radial_rows(source.values, rho)
        coef = np.fft.rfft(rows, axis=-1) / n_t
        total = 0.0
        base = rho * jac * s_w
        for m in modes:
            cm = np.sum(_mode_kernel(m, r_y, rho, grid.R) * coef[:, m] * base)
            scale = 1.0 if m in (0, n_t // 2) else 2.0
            total += scale * np.real(cm * np.exp(1j * m * np.angle(p)))
        out[idx] = total
    boundary = trace.mean + harmonic_extension(disk, trace, pts, check=False)
    return (out + boundary).reshape(np.shape(y)) if np.ndim(y) else float(out[0] + boundary[0])
