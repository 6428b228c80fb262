"""Sine-basis machinery for homogeneous Dirichlet problems on intervals and rectangles.

Fields are plain numpy arrays holding samples at the interior nodes of a grid
(shape ``(n,)`` in 1D, ``(nx, ny)`` in 2D). Boundary values are implicitly zero.

Coefficient convention (fixed throughout the package)::

    f(x_j) = sum_k c_k sin(k pi x_j / L),   x_j = j h,  h = L / (n + 1)

and the tensor product of this in 2D. With that normalisation the discrete
Parseval identity reads ``h * sum |f_j|^2 == (L / 2) * sum |c_k|^2`` (1D) and
``hx hy sum |f|^2 == (Lx Ly / 4) sum |c|^2`` (2D).

Differential operators use the continuum symbols ``(k pi / L)^2`` rather than
finite-difference symbols, so the analysis calculators and the solvers agree
on the eigenvalues they talk about.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import fft

from .errors import ParameterError, ShapeError


@dataclass(frozen=True)
class Grid1D:
    """Uniform interior nodes of (0, L)."""

    L: float
    n: int

    def __post_init__(self):
        if not self.L > 0:
            raise ParameterError(f"L must be > 0, got {self.L}")
        if int(self.n) != self.n or self.n < 2:
            raise ParameterError(f"n must be an integer >= 2, got {self.n}")

    @property
    def ndim(self) -> int:
        return 1

    @property
    def shape(self) -> tuple[int]:
        return (self.n,)

    @property
    def size(self) -> int:
        return self.n

    @property
    def h(self) -> float:
        return self.L / (self.n + 1)

    @property
    def cell_volume(self) -> float:
        return self.h

    @property
    def volume(self) -> float:
        return self.L

    @cached_property
    def x(self) -> np.ndarray:
        return self.h * np.arange(1, self.n + 1)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """``k pi / L`` for k = 1..n."""
        return np.arange(1, self.n + 1) * math.pi / self.L

    @cached_property
    def laplacian_symbol(self) -> np.ndarray:
        """Continuum Dirichlet eigenvalues in coefficient layout."""
        return self.wavenumbers**2

    @property
    def parseval_constant(self) -> float:
        return self.L / 2


@dataclass(frozen=True)
class Grid2D:
    """Tensor-product interior nodes of the rectangle (0, Lx) x (0, Ly)."""

    Lx: float
    Ly: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.Lx > 0 and self.Ly > 0):
            raise ParameterError(f"Lx, Ly must be > 0, got {self.Lx}, {self.Ly}")
        for name in ("nx", "ny"):
            v = getattr(self, name)
            if int(v) != v or v < 2:
                raise ParameterError(f"{name} must be an integer >= 2, got {v}")

    @property
    def ndim(self) -> int:
        return 2

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def size(self) -> int:
        return self.nx * self.ny

    @property
    def hx(self) -> float:
        return self.Lx / (self.nx + 1)

    @property
    def hy(self) -> float:
        return self.Ly / (self.ny + 1)

    @property
    def cell_volume(self) -> float:
        return self.hx * self.hy

    @property
    def volume(self) -> float:
        return self.Lx * self.Ly

    @cached_property
    def x(self) -> np.ndarray:
        return self.hx * np.arange(1, self.nx + 1)

    @cached_property
    def y(self) -> np.ndarray:
        return self.hy * np.arange(1, self.ny + 1)

    @cached_property
    def kx(self) -> np.ndarray:
        return np.arange(1, self.nx + 1) * math.pi / self.Lx

    @cached_property
    def ky(self) -> np.ndarray:
        return np.arange(1, self.ny + 1) * math.pi / self.Ly

    @cached_property
    def laplacian_symbol(self) -> np.ndarray:
        return self.kx[:, None] ** 2 + self.ky[None, :] ** 2

    @property
    def parseval_constant(self) -> float:
        return self.Lx * self.Ly / 4


Grid = Grid1D | Grid2D


def _check_shape(values: np.ndarray, grid: Grid, what: str = "field") -> np.ndarray:
    values = np.asarray(values)
    if values.shape != grid.shape:
        raise ShapeError(f"{what} has shape {values.shape}, grid expects {grid.shape}")
    return values


def sine_transform(field: np.ndarray, grid: Grid) -> np.ndarray:
    """Sine coefficients ``c`` with ``field(x_j) = sum_k c_k sin(k pi x_j / L)``."""
    field = _check_shape(field, grid)
    # DST-I is its own inverse up to the factor 2(n+1) per axis.
    scale = 1.0
    for n in grid.shape:
        scale *= n + 1
    return fft.dstn(field, type=1) / scale


def inverse_sine_transform(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    """Evaluate a sine series at the interior nodes."""
    coeffs = _check_shape(coeffs, grid, "coefficients")
    return fft.dstn(coeffs, type=1) / 2**grid.ndim


def _cosine_series(coeffs: np.ndarray, axis: int) -> np.ndarray:
    # Evaluates sum_{k=1..n} b_k cos(k pi j / (n+1)) for j = 1..n along `axis`
    # via DCT-I on the zero-padded coefficient vector.
    pad = [(0, 0)] * coeffs.ndim
    pad[axis] = (1, 1)
    padded = np.pad(coeffs, pad)
    out = fft.dct(padded, type=1, axis=axis) / 2
    n = coeffs.shape[axis]
    return np.take(out, np.arange(1, n + 1), axis=axis)


def derivative(field: np.ndarray, grid: Grid, axis: int = 0) -> np.ndarray:
    """Spectral first derivative along `axis`, sampled at the interior nodes.

    The derivative of a sine series is a cosine series; it does not vanish on
    the boundary, but only interior samples are returned.
    """
    field = _check_shape(field, grid)
    c = sine_transform(field, grid)
    k = grid.wavenumbers if grid.ndim == 1 else (grid.kx, grid.ky)[axis]
    shape = [1] * grid.ndim
    shape[axis] = -1
    out = _cosine_series(c * k.reshape(shape), axis)
    for other in range(grid.ndim):
        if other != axis:
            out = fft.dst(out, type=1, axis=other) / 2
    return out


def dirichlet_eigenvalues(grid: Grid) -> list[tuple]:
    """Continuum Dirichlet Laplacian eigenvalues, ascending.

    1D entries are ``(k, lam)``; 2D entries are ``((m, k), lam)`` with ties
    broken lexicographically on ``(m, k)``.
    """
    if grid.ndim == 1:
        return [(k, float(lam)) for k, lam in enumerate(grid.laplacian_symbol, start=1)]
    lam = grid.laplacian_symbol
    entries = [((m + 1, k + 1), float(lam[m, k])) for m in range(grid.nx) for k in range(grid.ny)]
    entries.sort(key=lambda e: (e[1], e[0]))
    return entries


def sorted_mode_indices(grid: Grid) -> np.ndarray:
    """Flat coefficient indices ordered like :func:`dirichlet_eigenvalues`."""
    lam = grid.laplacian_symbol.ravel()
    # lexsort keys: last is primary; flat index order equals (m, k) lexicographic order
    return np.lexsort((np.arange(lam.size), lam))


def anisotropic_symbol(D1: float, D2: float, grid: Grid2D, mode: tuple[int, int] | None = None):
    """Symbol of ``-D1 d_xx - D2 d_yy`` in the sine basis.

    Returns the full ``(nx, ny)`` multiplier array, or a single value when
    `mode` = (m, k) is given (1-based).
    """
    if not (D1 > 0 and D2 > 0):
        raise ParameterError(f"D1 and D2 must be > 0, got D1={D1}, D2={D2}")
    if mode is None:
        return D1 * grid.kx[:, None] ** 2 + D2 * grid.ky[None, :] ** 2
    m, k = mode
    if not (1 <= m <= grid.nx and 1 <= k <= grid.ny):
        raise ParameterError(f"mode {mode} outside 1..{grid.nx} x 1..{grid.ny}; sine modes start at 1")
    return D1 * (m * math.pi / grid.Lx) ** 2 + D2 * (k * math.pi / grid.Ly) ** 2


def helmholtz_solve(c: float, f: np.ndarray, grid: Grid) -> np.ndarray:
    """Solve ``(id - c Laplacian) u = f`` with homogeneous Dirichlet data."""
    if c < 0:
        raise ParameterError(f"c must be >= 0 for a positive definite operator, got {c}")
    coeffs = sine_transform(f, grid)
    return inverse_sine_transform(coeffs / (1.0 + c * grid.laplacian_symbol), grid)


def backward_step_multiplier(eps, tau, lam):
    """Per-mode gain ``(1 + eps lam) / (1 + (eps - tau) lam)`` of the implicit linear step.

    Vectorised over `lam`. The gain is 1 at ``lam = 0``, increases with `lam`
    and stays below ``eps / (eps - tau)``.
    """
    if not eps > 0:
        raise ParameterError(f"eps must be > 0, got {eps}")
    if not 0 < tau < eps:
        raise ParameterError(f"tau must satisfy 0 < tau < eps (tau={tau}, eps={eps})")
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ParameterError("eigenvalues must be >= 0")
    out = (1.0 + eps * lam) / (1.0 + (eps - tau) * lam)
    return float(out) if out.ndim == 0 else out


def l2_norm(field: np.ndarray, grid: Grid) -> float:
    """Nodal L2 norm, weight h per interior node (trapezoid with zero boundary)."""
    field = _check_shape(field, grid)
    return math.sqrt(grid.cell_volume * float(np.sum(np.abs(field) ** 2)))


def spectral_l2_norm(coeffs: np.ndarray, grid: Grid) -> float:
    return math.sqrt(grid.parseval_constant * float(np.sum(np.abs(coeffs) ** 2)))


def gradient_norm(field: np.ndarray, grid: Grid) -> float:
    """``||grad f||`` from the sine coefficients."""
    c = sine_transform(field, grid)
    return math.sqrt(grid.parseval_constant * float(np.sum(grid.laplacian_symbol * np.abs(c) ** 2)))


def minus_laplacian(field: np.ndarray, grid: Grid) -> np.ndarray:
    c = sine_transform(field, grid)
    return inverse_sine_transform(grid.laplacian_symbol * c, grid)
