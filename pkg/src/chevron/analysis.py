"""Closed-form thresholds and small data-analysis helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import ParameterError, ResolutionError
from .forward import ChevronParams, FeedbackParams, ForwardState, make_state, step_forward
from .spectral import Grid, Grid1D, dirichlet_eigenvalues, l2_norm, sine_transform


def first_eigenvalue(L: float) -> float:
    return (math.pi / L) ** 2


def blowup_threshold(L: float) -> float:
    """``(1 - lambda_1) L``: backward solutions with ``||A_0||^2`` above it blow up."""
    if not L > 0:
        raise ParameterError("L must be > 0")
    return (1.0 - first_eigenvalue(L)) * L


def _check_blowup_domain(psi0: float, L: float) -> float:
    threshold = blowup_threshold(L)
    if not (psi0 > threshold and psi0 > 0):
        raise ParameterError(
            f"psi0={psi0} must exceed max(0, (1 - lambda_1) L) = {max(threshold, 0.0)}; the integral diverges"
        )
    return first_eigenvalue(L) - 1.0


def blowup_lower_bound_time(psi0: float, L: float) -> float:
    """Closed form of ``int_{psi0}^inf ds / (2 (s^2 / L + (lambda_1 - 1) s))``.

    With ``a = lambda_1 - 1`` the integral is ``log1p(a L / psi0) / (2 a)``,
    which tends to ``L / (2 psi0)`` as ``a -> 0``.
    """
    a = _check_blowup_domain(psi0, L)
    x = a * L / psi0
    if abs(x) < 1e-8:
        # series of log1p(x)/x avoids 0/0
        return L / (2.0 * psi0) * (1.0 - x / 2.0 + x * x / 3.0)
    return math.log1p(x) / (2.0 * a)


def blowup_lower_bound_time_quadrature(psi0: float, L: float, tol: float = 1e-10) -> float:
    """Same integral by adaptive quadrature after ``s = psi0 / u``.

    The substitution maps ``[psi0, inf)`` to ``(0, 1]`` and turns the
    integrand into ``1 / (2 (psi0 / L + a u))``.
    """
    a = _check_blowup_domain(psi0, L)
    value, _ = integrate.quad(lambda u: 0.5 / (psi0 / L + a * u), 0.0, 1.0, epsabs=0.0, epsrel=tol, limit=200)
    return value


def stabilization_delta0(c1: float, c2: float) -> float:
    if not 0 <= c1 < 1:
        raise ParameterError(f"c1 must lie in [0, 1), got {c1}")
    if not c2 >= 0:
        raise ParameterError(f"c2 must be >= 0, got {c2}")
    return 2.0 * (1.0 - c1) / (2.0 + c2)


def stabilization_mode_count(c1: float, c2: float, grid: Grid) -> int:
    """Smallest N with ``lambda_{N+1} > 1 / delta_0``."""
    required = 1.0 / stabilization_delta0(c1, c2)
    for N, (_, lam) in enumerate(dirichlet_eigenvalues(grid)):
        if lam > required:
            return N
    raise ResolutionError(f"no eigenvalue of the grid exceeds 1/delta0 = {required}; refine the grid")


def mode_completeness_defect(N: int, grid: Grid) -> float:
    """``lambda_{N+1}^{-1/2}``, the defect of the first N mode functionals for (H1_0, L2)."""
    if int(N) != N or not 0 <= N < grid.size:
        raise ParameterError(f"N must lie in 0..{grid.size - 1}, got {N}")
    return dirichlet_eigenvalues(grid)[N][1] ** -0.5


@dataclass(frozen=True)
class DeterminingInputs:
    gamma: float
    M_R: float
    R: float = 1.0

    def __post_init__(self):
        if not 0 <= self.gamma < 0.5:
            raise ParameterError(f"gamma must lie in [0, 1/2), got {self.gamma}")
        if not self.M_R > 0:
            raise ParameterError("M_R must be > 0")
        if not self.R > 0:
            raise ParameterError("R must be > 0")


def determining_threshold(d: DeterminingInputs) -> float:
    g = d.gamma
    return math.sqrt((1 + 2 * g) / (1 - 2 * g)) * ((1 + 2 * g) * d.M_R) ** (1.0 / (2 * g - 1))


def min_determining_modes(d: DeterminingInputs, grid: Grid) -> int:
    threshold = determining_threshold(d)
    for N, (_, lam) in enumerate(dirichlet_eigenvalues(grid)):
        if lam**-0.5 < threshold:
            return N
    raise ResolutionError(f"defect never drops below {threshold} on this grid")


@dataclass(frozen=True)
class ScalingFit:
    exponent: float
    intercept: float
    residual: float


def fit_blowup_scaling(pairs) -> ScalingFit:
    """Least squares of ``ln t_blow`` on ``ln eps``; residual is the max absolute one."""
    pairs = list(pairs)
    if len(pairs) < 3:
        raise ParameterError("need at least 3 (eps, t_blow) pairs")
    arr = np.asarray(pairs, dtype=float)
    if np.any(~(arr > 0)):
        raise ParameterError("eps and t_blow must all be > 0")
    x, y = np.log(arr[:, 0]), np.log(arr[:, 1])
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = float(np.max(np.abs(y - (slope * x + intercept))))
    return ScalingFit(float(slope), float(intercept), residual)


@dataclass
class SweepResult:
    # (eps, t_blow, steps, final_max_abs), sorted by eps
    rows: list[tuple[float, float, int, float]]
    fit: ScalingFit | None = None


@dataclass
class DeterminingReport:
    N: int
    window: float
    window_ends: list[float] = field(default_factory=list)
    # per window, per mode j = 1..N: int_window |l_j(u - v)|^2 dt
    mode_integrals: list[list[float]] = field(default_factory=list)
    # ||u - v||_{V0} at each window end
    full_distance: list[float] = field(default_factory=list)
    initial_distance: float = 0.0
    initial_mode_fraction: list[float] = field(default_factory=list)
    modes_decay: bool = False
    full_decay: bool = False

    @property
    def consistent(self) -> bool:
        # observed mode decay should come with decay of the full distance
        return (not self.modes_decay) or self.full_decay


def _mode_sq(dA: np.ndarray, dphi: np.ndarray, N: int, grid: Grid1D) -> np.ndarray:
    # (u, w_j) = sqrt(L/2) c_j for L2-normalised w_j
    scale = grid.parseval_constant
    cA = sine_transform(dA, grid)[:N]
    cphi = sine_transform(dphi, grid)[:N]
    return scale * (np.abs(cA) ** 2 + np.abs(cphi) ** 2)


def _distance(dA, dphi, grid) -> float:
    return math.hypot(l2_norm(dA, grid), l2_norm(dphi, grid))


def determining_modes_experiment(
    ic_pair,
    p: ChevronParams,
    N: int,
    dt: float,
    t_end: float,
    grid: Grid1D,
    window: float = 1.0,
    decay_factor: float = 1e-2,
) -> DeterminingReport:
    """Evolve two 1D states side by side and compare mode and full distances.

    `ic_pair` is ``((A0, phi0), (B0, psi0))``. The mode functionals are
    ``l_j(u) = ((A, w_j), (phi, w_j))`` for the first N sine modes, and
    ``|l_j(u - v)|^2`` sums both components. A quantity is said to decay when
    its last value is at most `decay_factor` times its largest value (or is
    exactly zero). This illustrates the determining property; it proves
    nothing about it.
    """
    if grid.ndim != 1:
        raise ParameterError("the determining-modes experiment runs on 1D grids")
    if not p.h > 0:
        raise ParameterError("h must be > 0")
    if int(N) != N or not 1 <= N <= grid.size:
        raise ParameterError(f"N must lie in 1..{grid.size}")
    (A0, phi0), (B0, psi0) = ic_pair
    u: ForwardState = make_state(A0, phi0, grid)
    v: ForwardState = make_state(B0, psi0, grid)
    fp = FeedbackParams()

    report = DeterminingReport(N=N, window=window)
    dA, dphi = u.A - v.A, u.phi - v.phi
    report.initial_distance = _distance(dA, dphi, grid)
    sq = _mode_sq(dA, dphi, N, grid)
    d2 = report.initial_distance**2
    report.initial_mode_fraction = [float(x / d2) if d2 > 0 else 0.0 for x in sq]

    steps_per_window = max(1, int(round(window / dt)))
    n_windows = int(round(t_end / (steps_per_window * dt)))
    for w in range(n_windows):
        acc = np.zeros(N)
        prev = sq
        for _ in range(steps_per_window):
            u = step_forward(u, p, fp, dt, grid)
            v = step_forward(v, p, fp, dt, grid)
            dA, dphi = u.A - v.A, u.phi - v.phi
            cur = _mode_sq(dA, dphi, N, grid)
            acc += 0.5 * dt * (prev + cur)
            prev = cur
        sq = prev
        report.window_ends.append((w + 1) * steps_per_window * dt)
        report.mode_integrals.append([float(x) for x in acc])
        report.full_distance.append(_distance(dA, dphi, grid))

    def decays(series) -> bool:
        series = np.asarray(series, dtype=float)
        if series.size == 0:
            return False
        peak = float(np.max(series))
        return series[-1] == 0.0 or series[-1] <= decay_factor * peak

    totals = [sum(m) for m in report.mode_integrals]
    report.modes_decay = decays(totals)
    report.full_decay = decays([report.initial_distance, *report.full_distance])
    return report
