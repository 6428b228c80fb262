"""Backward-in-time evolution of the 1D amplitude equation with phi = 0.

The reversed equation ``A_t = -A_xx + (|A|^2 - 1) A`` is anti-diffusive and
cannot be stepped directly. It is integrated as the maximizing gradient flow of

    F(A) = 1/2 ||A_x||^2 + 1/4 || |A|^2 - 1 ||^2

in the H1_eps metric ``||A||^2 + eps ||A_x||^2``, i.e.

    (id - eps d_xx) A_t = -A_xx + (|A|^2 - 1) A,

by Lie splitting: the pointwise cubic flow is solved in closed form and the
linear flow with one implicit step, diagonal in the sine basis. The step size
is chosen adaptively below the blow-up horizon of the cubic flow; blow-up is
declared once that step underflows ``blow_tol``.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteStateError, ParameterError, StepTooLargeError
from .spectral import (
    Grid,
    Grid1D,
    backward_step_multiplier,
    gradient_norm,
    inverse_sine_transform,
    l2_norm,
    sine_transform,
)

log = logging.getLogger(__name__)


class Termination(str, enum.Enum):
    BLOW_UP = "BlowUp"
    HORIZON_REACHED = "HorizonReached"
    NON_FINITE = "NonFinite"


@dataclass(frozen=True)
class BackwardParams:
    eps: float
    tau_max: float = 1e-2
    safety_blow: float = 0.5
    safety_eps: float = 0.5
    blow_tol: float = 1e-15
    t_end: float | None = None
    record_every: int = 100
    snapshot_every: int | None = None
    # guards runs that can neither blow up nor reach t_end
    max_steps: int | None = None

    def __post_init__(self):
        if not self.eps > 0:
            raise ParameterError("eps must be > 0")
        if not 0 < self.safety_blow < 1:
            raise ParameterError("safety_blow must lie in (0, 1)")
        if not 0 < self.safety_eps < 1:
            raise ParameterError("safety_eps must lie in (0, 1)")
        if not self.blow_tol > 0:
            raise ParameterError("blow_tol must be > 0")
        if not self.tau_max > self.blow_tol:
            raise ParameterError("tau_max must exceed blow_tol")
        if self.t_end is not None and not self.t_end > 0:
            raise ParameterError("t_end must be > 0")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ParameterError("record_every must be a positive integer")
        if self.snapshot_every is not None and self.snapshot_every < 1:
            raise ParameterError("snapshot_every must be a positive integer")
        if self.max_steps is not None and self.max_steps < 1:
            raise ParameterError("max_steps must be a positive integer")


@dataclass
class BlowupReport:
    terminated_by: Termination
    t_blow: float
    steps_taken: int
    final_max_abs: float
    final_l2: float
    # the step size proposed when the loop stopped (inf if none was proposed)
    last_tau: float = math.inf
    energy_violations: int = 0


@dataclass(frozen=True)
class TrajectoryRecord:
    t: float
    tau_used: float
    l2_A: float
    h1_A: float
    energy_F: float
    max_abs_A: float
    l2_phi: float = 0.0
    h1_phi: float = 0.0


@dataclass
class BackwardResult:
    report: BlowupReport
    records: list[TrajectoryRecord]
    # (step index, t, field) triples
    snapshots: list[tuple[int, float, np.ndarray]] = field(default_factory=list)


def _require_finite(A: np.ndarray) -> None:
    if not np.all(np.isfinite(A)):
        raise NonFiniteStateError("field contains non-finite values")


def blowup_horizon(A: np.ndarray) -> float:
    """Largest step the pointwise cubic flow can take before some node blows up.

    ``inf`` if ``max |A| <= 1``, else ``1/2 log(M^2 / (M^2 - 1))`` with
    ``M = max |A|``.
    """
    A = np.asarray(A)
    _require_finite(A)
    if A.size == 0:
        return math.inf
    m2 = float(np.max(np.abs(A) ** 2))
    if m2 <= 1.0:
        return math.inf
    # log1p keeps full relative accuracy when M is huge
    return 0.5 * math.log1p(1.0 / (m2 - 1.0))


def nonlinear_exact_step(A: np.ndarray, tau: float) -> np.ndarray:
    """Advance ``A_t = (|A|^2 - 1) A`` by `tau` exactly at every node."""
    A = np.asarray(A)
    _require_finite(A)
    if not tau >= 0:
        raise ParameterError(f"tau must be >= 0, got {tau}")
    if tau >= blowup_horizon(A):
        raise StepTooLargeError(f"tau={tau} reaches the blow-up horizon {blowup_horizon(A)}")
    a2 = np.abs(A) ** 2
    # |A|^2 + (1 - |A|^2) e^{2 tau}  ==  1 - (|A|^2 - 1)(e^{2 tau} - 1)
    denom = 1.0 - (a2 - 1.0) * math.expm1(2.0 * tau)
    return A / np.sqrt(denom)


def linear_implicit_step(A_hat: np.ndarray, eps: float, tau: float, grid: Grid1D) -> np.ndarray:
    """Implicit step of ``(id - eps d_xx) A_t = -A_xx``, exact in the sine basis."""
    gain = backward_step_multiplier(eps, tau, grid.laplacian_symbol)
    return inverse_sine_transform(gain * sine_transform(A_hat, grid), grid)


def adaptive_timestep(A: np.ndarray, p: BackwardParams) -> float:
    return min(p.tau_max, p.safety_blow * blowup_horizon(A), p.safety_eps * p.eps)


def energy_functional(A: np.ndarray, grid: Grid) -> float:
    """``1/2 ||A_x||^2 + 1/4 int (|A|^2 - 1)^2 dx``.

    Gradient term from the sine coefficients; quartic term by the composite
    trapezoid rule including the boundary nodes, where ``A = 0`` and the
    integrand equals 1. Works on 2D grids as well.
    """
    A = np.asarray(A)
    _require_finite(A)
    grad = gradient_norm(A, grid)
    # boundary nodes contribute volume - cell_volume * size, since the integrand is 1 there
    quartic = grid.cell_volume * float(np.sum((np.abs(A) ** 2 - 1.0) ** 2 - 1.0)) + grid.volume
    return 0.5 * grad**2 + 0.25 * quartic


def _record(A: np.ndarray, grid: Grid1D, t: float, tau: float) -> TrajectoryRecord:
    return TrajectoryRecord(
        t=t,
        tau_used=tau,
        l2_A=l2_norm(A, grid),
        h1_A=gradient_norm(A, grid),
        energy_F=energy_functional(A, grid),
        max_abs_A=float(np.max(np.abs(A))),
    )


def split_step(A: np.ndarray, tau: float, eps: float, grid: Grid1D) -> np.ndarray:
    """One Lie-splitting step: exact cubic flow, then the implicit linear step."""
    return linear_implicit_step(nonlinear_exact_step(A, tau), eps, tau, grid)


def run_backward(A0: np.ndarray, grid: Grid1D, p: BackwardParams) -> BackwardResult:
    """Evolve `A0` until blow-up, the horizon ``p.t_end`` or loss of finiteness.

    Records are taken at t = 0, every ``p.record_every`` steps and at the final
    accepted state. Numerical failure is reported through
    ``report.terminated_by``; this function does not raise on it.
    """
    A = np.array(A0, dtype=complex)
    if A.shape != grid.shape:
        raise ParameterError(f"initial field shape {A.shape} does not match grid {grid.shape}")
    t = 0.0
    steps = 0
    tau = math.inf
    tau_used = 0.0
    violations = 0
    records = []
    snapshots = []

    if not np.all(np.isfinite(A)):
        report = BlowupReport(Termination.NON_FINITE, 0.0, 0, math.nan, math.nan)
        return BackwardResult(report, records, snapshots)

    last = _record(A, grid, t, 0.0)
    records.append(last)
    if p.snapshot_every is not None:
        snapshots.append((0, t, A.copy()))
    last_recorded_step = 0
    energy = last.energy_F
    status = None

    while True:
        if p.t_end is not None and t >= p.t_end:
            status = Termination.HORIZON_REACHED
            break
        if p.max_steps is not None and steps >= p.max_steps:
            status = Termination.HORIZON_REACHED
            break
        tau = adaptive_timestep(A, p)
        if tau < p.blow_tol:
            status = Termination.BLOW_UP
            break
        if p.t_end is not None:
            tau = min(tau, p.t_end - t)
        with np.errstate(all="ignore"):
            A_next = split_step(A, tau, p.eps, grid)
        if not np.all(np.isfinite(A_next)):
            status = Termination.NON_FINITE
            break
        A = A_next
        t += tau
        tau_used = tau
        steps += 1

        new_energy = energy_functional(A, grid)
        if new_energy < energy - 1e-8 * (1.0 + abs(energy)):
            violations += 1
            log.debug("energy decreased at step %d: %.17g -> %.17g", steps, energy, new_energy)
        energy = new_energy

        if steps % p.record_every == 0:
            last = _record(A, grid, t, tau)
            records.append(last)
            last_recorded_step = steps
        if p.snapshot_every is not None and steps % p.snapshot_every == 0:
            snapshots.append((steps, t, A.copy()))

    if steps > last_recorded_step:
        records.append(_record(A, grid, t, tau_used))
    if violations:
        log.info("energy monitor: %d steps with decreasing F", violations)

    report = BlowupReport(
        terminated_by=status,
        t_blow=t,
        steps_taken=steps,
        final_max_abs=float(np.max(np.abs(A))),
        final_l2=l2_norm(A, grid),
        last_tau=tau,
        energy_violations=violations,
    )
    return BackwardResult(report, records, snapshots)
