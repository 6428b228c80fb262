"""Shared fixtures-free helpers: initial conditions and reference integrators."""

import math

import numpy as np
from scipy.integrate import solve_ivp


def oscillatory_ic(grid):
    x, L = grid.x, grid.L
    return 5 * np.sin(20 * math.pi * x / L) ** 3 + 2 * np.sin(12 * math.pi * x / L) ** 3 - np.sin(4 * math.pi * x / L) ** 3


def reference_flow(rhs, A0, t):
    """Integrate the complex ODE A' = rhs(A) to time t with a tight 8th-order RK."""
    n = A0.size

    def f(_, y):
        d = rhs(y[:n] + 1j * y[n:])
        return np.concatenate([d.real, d.imag])

    sol = solve_ivp(f, (0.0, t), np.concatenate([A0.real, A0.imag]), method="DOP853", rtol=1e-13, atol=1e-15)
    y = sol.y[:, -1]
    return y[:n] + 1j * y[n:]
