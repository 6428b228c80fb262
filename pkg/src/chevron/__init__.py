"""Spectral simulation and analysis tools for the chevron pattern equations."""

from .analysis import (
    DeterminingInputs,
    ScalingFit,
    SweepResult,
    blowup_lower_bound_time,
    blowup_lower_bound_time_quadrature,
    blowup_threshold,
    determining_modes_experiment,
    determining_threshold,
    fit_blowup_scaling,
    min_determining_modes,
    mode_completeness_defect,
    stabilization_delta0,
    stabilization_mode_count,
)
from .backward import (
    BackwardParams,
    BlowupReport,
    Termination,
    TrajectoryRecord,
    adaptive_timestep,
    blowup_horizon,
    energy_functional,
    linear_implicit_step,
    nonlinear_exact_step,
    run_backward,
)
from .forward import (
    ChevronParams,
    FeedbackParams,
    ForwardState,
    galerkin_feedback,
    make_state,
    measure_decay_rate,
    run_forward,
    step_forward,
)
from .spectral import (
    Grid1D,
    Grid2D,
    anisotropic_symbol,
    backward_step_multiplier,
    dirichlet_eigenvalues,
    helmholtz_solve,
    inverse_sine_transform,
    sine_transform,
)

__version__ = "0.1.0"
