import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chevron.errors import ParameterError, ShapeError
from chevron.spectral import (
    Grid1D,
    Grid2D,
    anisotropic_symbol,
    backward_step_multiplier,
    derivative,
    dirichlet_eigenvalues,
    gradient_norm,
    helmholtz_solve,
    inverse_sine_transform,
    l2_norm,
    minus_laplacian,
    sine_transform,
    spectral_l2_norm,
)


def direct_sine_coeffs(f, L):
    """O(n^2) oracle: c_k = 2/(n+1) sum_j f_j sin(k pi x_j / L)."""
    n = len(f)
    x = L * np.arange(1, n + 1) / (n + 1)
    k = np.arange(1, n + 1)
    S = np.sin(np.outer(k, x) * math.pi / L)
    return 2.0 / (n + 1) * S @ f


def direct_synthesis(c, L):
    n = len(c)
    x = L * np.arange(1, n + 1) / (n + 1)
    k = np.arange(1, n + 1)
    return np.sin(np.outer(x, k) * math.pi / L) @ c


class TestGrid:
    def test_nodes(self):
        g = Grid1D(10.0, 4)
        assert g.h == pytest.approx(2.0)
        np.testing.assert_allclose(g.x, [2, 4, 6, 8])

    @pytest.mark.parametrize("L, n", [(0.0, 4), (-1.0, 4), (1.0, 1), (1.0, 2.5)])
    def test_invalid_1d(self, L, n):
        with pytest.raises(ParameterError):
            Grid1D(L, n)

    def test_invalid_2d(self):
        with pytest.raises(ParameterError):
            Grid2D(1.0, 0.0, 4, 4)
        with pytest.raises(ParameterError):
            Grid2D(1.0, 1.0, 4, 1)


class TestSineTransform:
    def test_basis_function(self):
        g = Grid1D(10.0, 50)
        c = sine_transform(np.sin(math.pi * g.x / g.L), g)
        expected = np.zeros(50)
        expected[0] = 1.0
        np.testing.assert_allclose(c, expected, atol=1e-14)

    def test_zeros(self):
        g = Grid1D(3.0, 17)
        assert np.all(sine_transform(np.zeros(17), g) == 0)
        assert np.all(inverse_sine_transform(np.zeros(17), g) == 0)

    @pytest.mark.parametrize("n", [8, 32, 64])
    def test_matches_direct_summation(self, n):
        rng = np.random.default_rng(n)
        g = Grid1D(7.3, n)
        f = rng.normal(size=n) + 1j * rng.normal(size=n)
        np.testing.assert_allclose(sine_transform(f, g), direct_sine_coeffs(f, g.L), rtol=0, atol=1e-12)

    def test_inverse_basis(self):
        g = Grid1D(10.0, 20)
        c = np.zeros(20)
        c[0] = 1.0
        np.testing.assert_allclose(inverse_sine_transform(c, g), np.sin(math.pi * g.x / 10), atol=1e-15)

    def test_inverse_matches_direct_synthesis(self):
        rng = np.random.default_rng(3)
        g = Grid1D(2.0, 32)
        c = rng.normal(size=32) + 1j * rng.normal(size=32)
        np.testing.assert_allclose(inverse_sine_transform(c, g), direct_synthesis(c, g.L), atol=1e-12)

    def test_round_trip_random_coeffs(self):
        rng = np.random.default_rng(5)
        g = Grid1D(1.0, 32)
        c = rng.normal(size=32) + 1j * rng.normal(size=32)
        back = sine_transform(inverse_sine_transform(c, g), g)
        assert np.max(np.abs(back - c)) < 1e-12

    def test_size_mismatch(self):
        g = Grid1D(1.0, 8)
        with pytest.raises(ShapeError):
            sine_transform(np.zeros(9), g)
        with pytest.raises(ShapeError):
            inverse_sine_transform(np.zeros(7), g)

    def test_2d_tensor_basis(self):
        g = Grid2D(2.0, 3.0, 12, 9)
        f = np.sin(2 * math.pi * g.x / g.Lx)[:, None] * np.sin(3 * math.pi * g.y / g.Ly)[None, :]
        c = sine_transform(f, g)
        expected = np.zeros(g.shape)
        expected[1, 2] = 1.0
        np.testing.assert_allclose(c, expected, atol=1e-14)

    def test_2d_matches_direct(self):
        rng = np.random.default_rng(11)
        g = Grid2D(1.0, 2.0, 8, 6)
        f = rng.normal(size=g.shape)
        oracle = np.array([direct_sine_coeffs(row, g.Ly) for row in f])
        oracle = np.array([direct_sine_coeffs(col, g.Lx) for col in oracle.T]).T
        np.testing.assert_allclose(sine_transform(f, g), oracle, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(
    n=st.integers(2, 200),
    L=st.floats(0.1, 100.0),
    seed=st.integers(0, 2**32 - 1),
    scale=st.floats(1e-3, 1e6),
)
def test_round_trip_property(n, L, seed, scale):
    rng = np.random.default_rng(seed)
    g = Grid1D(L, n)
    f = scale * (rng.normal(size=n) + 1j * rng.normal(size=n))
    back = inverse_sine_transform(sine_transform(f, g), g)
    assert np.max(np.abs(back - f)) < 1e-12 * (1 + np.max(np.abs(f)))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 256), seed=st.integers(0, 2**32 - 1))
def test_parseval(n, seed):
    rng = np.random.default_rng(seed)
    g = Grid1D(4.5, n)
    f = rng.normal(size=n) + 1j * rng.normal(size=n)
    nodal = l2_norm(f, g)
    assert spectral_l2_norm(sine_transform(f, g), g) == pytest.approx(nodal, rel=1e-10)


def test_parseval_2d():
    rng = np.random.default_rng(2)
    g = Grid2D(1.5, 2.5, 20, 30)
    f = rng.normal(size=g.shape)
    assert spectral_l2_norm(sine_transform(f, g), g) == pytest.approx(l2_norm(f, g), rel=1e-10)


class TestEigenvalues:
    def test_first_L10(self):
        lam = dirichlet_eigenvalues(Grid1D(10.0, 100))
        assert lam[0][0] == 1
        assert lam[0][1] == pytest.approx(0.0986960440108936, rel=1e-14)

    def test_L_pi(self):
        lam = dirichlet_eigenvalues(Grid1D(math.pi, 10))
        np.testing.assert_allclose([v for _, v in lam], np.arange(1, 11) ** 2, rtol=1e-14)

    def test_2d_ordering(self):
        lam = dirichlet_eigenvalues(Grid2D(math.pi, math.pi, 5, 5))
        values = [v for _, v in lam]
        assert values == sorted(values)
        assert lam[0] == ((1, 1), pytest.approx(2.0))
        assert lam[1][0] == (1, 2) and lam[2][0] == (2, 1)
        assert lam[1][1] == pytest.approx(5.0) and lam[2][1] == pytest.approx(5.0)
        assert lam[3][1] == pytest.approx(8.0)

    @pytest.mark.parametrize("k", [1, 3, 10])
    def test_operator_consistency(self, k):
        g = Grid1D(10.0, 64)
        f = np.sin(k * math.pi * g.x / g.L)
        lam = (k * math.pi / g.L) ** 2
        np.testing.assert_allclose(minus_laplacian(f, g), lam * f, atol=1e-13 * lam)


class TestAnisotropicSymbol:
    def test_isotropic_reduction(self):
        g = Grid2D(1.0, 2.0, 6, 7)
        np.testing.assert_allclose(anisotropic_symbol(1.0, 1.0, g), g.laplacian_symbol, rtol=1e-15)

    def test_single_mode(self):
        g = Grid2D(math.pi, math.pi, 4, 4)
        assert anisotropic_symbol(2.0, 0.5, g, mode=(1, 1)) == pytest.approx(2.5)

    def test_zero_mode_rejected(self):
        g = Grid2D(math.pi, math.pi, 4, 4)
        with pytest.raises(ParameterError):
            anisotropic_symbol(1.0, 1.0, g, mode=(0, 1))

    @pytest.mark.parametrize("D1, D2", [(0.0, 1.0), (1.0, -1.0)])
    def test_nonpositive_coefficients(self, D1, D2):
        with pytest.raises(ParameterError):
            anisotropic_symbol(D1, D2, Grid2D(1.0, 1.0, 3, 3))


class TestHelmholtz:
    def test_identity_at_zero(self):
        g = Grid1D(10.0, 40)
        f = np.random.default_rng(0).normal(size=40)
        np.testing.assert_allclose(helmholtz_solve(0.0, f, g), f, atol=1e-13)

    def test_first_mode(self):
        g = Grid1D(10.0, 100)
        f = np.sin(math.pi * g.x / 10)
        u = helmholtz_solve(0.1, f, g)
        factor = 1 / (1 + 0.1 * (math.pi / 10) ** 2)
        assert factor == pytest.approx(0.990227, abs=1e-6)
        np.testing.assert_allclose(u, factor * f, atol=1e-14)

    def test_zero_rhs(self):
        g = Grid1D(1.0, 10)
        assert np.all(helmholtz_solve(1.0, np.zeros(10), g) == 0)

    def test_negative_c(self):
        with pytest.raises(ParameterError):
            helmholtz_solve(-0.1, np.zeros(5), Grid1D(1.0, 5))

    def test_solves_equation(self):
        g = Grid1D(3.0, 50)
        f = np.random.default_rng(1).normal(size=50)
        u = helmholtz_solve(0.3, f, g)
        np.testing.assert_allclose(u + 0.3 * minus_laplacian(u, g), f, atol=1e-12)

    def test_linearity(self):
        rng = np.random.default_rng(9)
        g = Grid1D(2.0, 64)
        f, h = rng.normal(size=64) + 1j * rng.normal(size=64), rng.normal(size=64)
        alpha = 2.7 - 1.3j
        lhs = helmholtz_solve(0.4, alpha * f + h, g)
        rhs = alpha * helmholtz_solve(0.4, f, g) + helmholtz_solve(0.4, h, g)
        assert np.max(np.abs(lhs - rhs)) < 1e-12


class TestBackwardStepMultiplier:
    def test_lambda_zero(self):
        assert backward_step_multiplier(0.1, 0.05, 0.0) == 1.0

    def test_value(self):
        assert backward_step_multiplier(0.1, 0.05, 100.0) == pytest.approx(11 / 6, rel=1e-15)

    def test_limit(self):
        m = backward_step_multiplier(0.1, 0.05, 1e12)
        assert m < 2.0
        assert m == pytest.approx(2.0, rel=1e-9)

    @pytest.mark.parametrize("tau", [0.1, 0.2, 0.0, -0.01])
    def test_bad_tau(self, tau):
        with pytest.raises(ParameterError):
            backward_step_multiplier(0.1, tau, 1.0)

    @settings(max_examples=100, deadline=None)
    @given(eps=st.floats(1e-4, 10.0), frac=st.floats(1e-6, 0.999))
    def test_sweep_properties(self, eps, frac):
        tau = frac * eps
        lam = np.concatenate([[0.0], np.logspace(-4, 8, 200)])
        m = backward_step_multiplier(eps, tau, lam)
        assert np.all(m >= 1.0)
        assert np.all(np.diff(m) >= 0)
        assert np.all(m < eps / (eps - tau) * (1 + 1e-15))


def test_derivative_of_sine():
    g = Grid1D(10.0, 64)
    f = np.sin(3 * math.pi * g.x / 10)
    expected = 3 * math.pi / 10 * np.cos(3 * math.pi * g.x / 10)
    np.testing.assert_allclose(derivative(f, g), expected, atol=1e-12)


def test_derivative_y_2d():
    g = Grid2D(2.0, 3.0, 16, 20)
    f = np.sin(math.pi * g.x / 2)[:, None] * np.sin(2 * math.pi * g.y / 3)[None, :]
    expected = np.sin(math.pi * g.x / 2)[:, None] * (2 * math.pi / 3 * np.cos(2 * math.pi * g.y / 3))[None, :]
    np.testing.assert_allclose(derivative(f, g, axis=1), expected, atol=1e-12)


def test_gradient_norm_of_mode():
    g = Grid1D(10.0, 100)
    f = np.sin(2 * math.pi * g.x / 10)
    # ||f'||^2 = (2 pi / L)^2 L / 2
    assert gradient_norm(f, g) ** 2 == pytest.approx((2 * math.pi / 10) ** 2 * 5, rel=1e-12)
