"""Forward integration of the chevron system with optional Galerkin feedback.

2D (rectangle)::

    tau A_t  = A + Lap A - phi^2 A - |A|^2 A - 2i c1 phi A_y + i beta A phi_y - mu P_N A
    phi_t    = D1 phi_xx + D2 phi_yy - h phi + phi |A|^2 - c2 Im(conj(A) A_y)

1D (interval): the same with every y-derivative dropped, which leaves

    tau A_t = A + A_xx - phi^2 A - |A|^2 A - mu P_N A
    phi_t   = D1 phi_xx - h phi + phi |A|^2

First-order IMEX: the diffusion terms are solved implicitly per sine mode,
everything else is explicit and evaluated by collocation at the nodes (no
dealiasing).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .backward import TrajectoryRecord, energy_functional
from .errors import NonFiniteStateError, ParameterError, UndefinedRateError
from .spectral import (
    Grid,
    anisotropic_symbol,
    derivative,
    gradient_norm,
    inverse_sine_transform,
    l2_norm,
    sine_transform,
    sorted_mode_indices,
)


class AdmissibilityWarning(UserWarning):
    """Parameters outside the range where global well-posedness is known."""


@dataclass(frozen=True)
class ChevronParams:
    tau_relax: float = 1.0
    c1: float = 0.0
    c2: float = 0.0
    h: float = 0.5
    beta: float = 0.0
    D1: float = 1.0
    D2: float = 1.0

    def __post_init__(self):
        if not self.tau_relax > 0:
            raise ParameterError("tau_relax must be > 0")
        if not (self.D1 > 0 and self.D2 > 0):
            raise ParameterError("D1 and D2 must be > 0")
        for name in ("c1", "c2", "h"):
            if not getattr(self, name) >= 0:
                raise ParameterError(f"{name} must be >= 0")
        if not math.isfinite(self.beta):
            raise ParameterError("beta must be finite")
        if not self.admissible:
            warnings.warn(
                f"c1={self.c1}, c2={self.c2}, h={self.h}: outside (c1 < 1 or c1 >= 2 c2) and h > 0",
                AdmissibilityWarning,
                stacklevel=3,
            )

    @property
    def admissible(self) -> bool:
        return (self.c1 < 1 or self.c1 >= 2 * self.c2) and self.h > 0


@dataclass(frozen=True)
class FeedbackParams:
    mu: float = 0.0
    N: int = 0

    def __post_init__(self):
        if not self.mu >= 0:
            raise ParameterError("mu must be >= 0")
        if int(self.N) != self.N or self.N < 0:
            raise ParameterError("N must be a non-negative integer")

    @property
    def active(self) -> bool:
        return self.mu > 0 and self.N > 0


@dataclass(frozen=True)
class ForwardState:
    t: float
    A: np.ndarray
    phi: np.ndarray


def galerkin_feedback(A: np.ndarray, fp: FeedbackParams, grid: Grid) -> np.ndarray:
    """``-mu * sum_{k<=N} (A, w_k) w_k`` over the N lowest Dirichlet modes."""
    if fp.N > grid.size:
        raise ParameterError(f"N={fp.N} exceeds the {grid.size} modes of the grid")
    A = np.asarray(A)
    if not fp.active:
        return np.zeros_like(A)
    c = sine_transform(A, grid)
    keep = np.zeros(grid.size, dtype=bool)
    keep[sorted_mode_indices(grid)[: fp.N]] = True
    # the sine basis is discretely orthogonal, so truncating coefficients is the L2 projection
    projected = np.where(keep.reshape(grid.shape), c, 0.0)
    return -fp.mu * inverse_sine_transform(projected, grid)


def _phi_symbol(p: ChevronParams, grid: Grid) -> np.ndarray:
    if grid.ndim == 1:
        return p.D1 * grid.laplacian_symbol
    return anisotropic_symbol(p.D1, p.D2, grid)


def step_forward(state: ForwardState, p: ChevronParams, fp: FeedbackParams, dt: float, grid: Grid) -> ForwardState:
    if not dt > 0:
        raise ParameterError("dt must be > 0")
    A, phi = state.A, state.phi
    with np.errstate(all="ignore"):
        A_new, phi_new = _imex_update(A, phi, p, fp, dt, grid)
    if not (np.all(np.isfinite(A_new)) and np.all(np.isfinite(phi_new))):
        raise NonFiniteStateError(f"non-finite state after step at t={state.t + dt}")
    return ForwardState(state.t + dt, A_new, phi_new)


def _imex_update(A, phi, p: ChevronParams, fp: FeedbackParams, dt: float, grid: Grid):
    a2 = np.abs(A) ** 2

    rhs_A = A - phi**2 * A - a2 * A
    rhs_phi = -p.h * phi + phi * a2
    if grid.ndim == 2:
        A_y = derivative(A, grid, axis=1)
        phi_y = derivative(phi, grid, axis=1)
        rhs_A = rhs_A - 2j * p.c1 * phi * A_y + 1j * p.beta * A * phi_y
        rhs_phi = rhs_phi - p.c2 * np.imag(np.conj(A) * A_y)
    if fp.active:
        rhs_A = rhs_A + galerkin_feedback(A, fp, grid)

    cA = sine_transform(A + (dt / p.tau_relax) * rhs_A, grid)
    cA /= 1.0 + (dt / p.tau_relax) * grid.laplacian_symbol
    cphi = sine_transform(phi + dt * rhs_phi, grid)
    cphi /= 1.0 + dt * _phi_symbol(p, grid)

    return inverse_sine_transform(cA, grid), inverse_sine_transform(cphi, grid)


def make_state(A0, phi0, grid: Grid, t: float = 0.0) -> ForwardState:
    A = np.array(A0, dtype=complex)
    phi = np.array(phi0, dtype=float)
    if A.shape != grid.shape or phi.shape != grid.shape:
        raise ParameterError(f"initial fields must have shape {grid.shape}")
    return ForwardState(t, A, phi)


def forward_record(state: ForwardState, grid: Grid, dt: float) -> TrajectoryRecord:
    return TrajectoryRecord(
        t=state.t,
        tau_used=dt,
        l2_A=l2_norm(state.A, grid),
        h1_A=gradient_norm(state.A, grid),
        energy_F=energy_functional(state.A, grid),
        max_abs_A=float(np.max(np.abs(state.A))),
        l2_phi=l2_norm(state.phi, grid),
        h1_phi=gradient_norm(state.phi, grid),
    )


def v1_norm(record: TrajectoryRecord) -> float:
    """``||grad A||^2 + ||grad phi||^2``."""
    return record.h1_A**2 + record.h1_phi**2


def run_forward(
    state0: ForwardState,
    p: ChevronParams,
    fp: FeedbackParams,
    dt: float,
    t_end: float,
    grid: Grid,
    record_every: int = 100,
    return_state: bool = False,
):
    """Fixed-step integration to `t_end`, recording diagnostics every `record_every` steps.

    The initial state and the final state are always recorded. With
    `return_state` the final :class:`ForwardState` is returned as well.
    """
    if not dt > 0 or not t_end >= 0:
        raise ParameterError("dt must be > 0 and t_end >= 0")
    if record_every < 1:
        raise ParameterError("record_every must be >= 1")
    n_steps = int(round(t_end / dt))
    state = state0
    records = [forward_record(state, grid, dt)]
    for i in range(1, n_steps + 1):
        state = step_forward(state, p, fp, dt, grid)
        # rebuild t from the step count to avoid drift
        state = ForwardState(state0.t + i * dt, state.A, state.phi)
        if i % record_every == 0 or i == n_steps:
            records.append(forward_record(state, grid, dt))
    if return_state:
        return records, state
    return records


def measure_decay_rate(records) -> float:
    """Least-squares slope of ``ln(||grad A||^2 + ||grad phi||^2)`` against t.

    Only the second half of the records is used, so the initial transient does
    not bias the rate.
    """
    if len(records) < 10:
        raise UndefinedRateError(f"need at least 10 records, got {len(records)}")
    window = records[len(records) // 2 :]
    t = np.array([r.t for r in window])
    v = np.array([v1_norm(r) for r in window])
    ok = v > 0
    if ok.sum() < 2:
        raise UndefinedRateError("V1 norms vanish on the fitting window")
    slope, _ = np.polyfit(t[ok], np.log(v[ok]), 1)
    return float(slope)
