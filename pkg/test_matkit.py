#!/usr/bin/env python3
"""
Tests for the matrix kit: exponentials, hold integrals, norms and the
Lyapunov solve, checked against independent numpy oracles.
"""

import sys
import unittest
from pathlib import Path

import numpy as np
from scipy.integrate import trapezoid

# Add the project root to Python path
sys.path.insert(0, str(Path(__file__).parent))

from dosctrl_app.utils.errors import CertificationError, DimensionError, DomainError
from dosctrl_app.utils.matkit import (as_mat, hold_integral, is_hurwitz, log_norm_2, lyap_solve,
                                      mat_exp, spectral_norm, sym_eig_extremes, zoh_discretize)


def taylor_exp(M, terms=60):
    result = np.eye(M.shape[0])
    term = np.eye(M.shape[0])
    for k in range(1, terms):
        term = term @ M / k
        result = result + term
    return result


class TestMatExp(unittest.TestCase):
    """Matrix exponential against a truncated power series"""

    def test_against_series(self):
        rng = np.random.Generator(np.random.Philox(11))
        for _ in range(100):
            n = int(rng.integers(1, 5))
            M = rng.normal(size=(n, n))
            M *= rng.uniform(0.0, 2.0) / max(np.linalg.norm(M, 2), 1e-12)
            self.assertLessEqual(np.max(np.abs(mat_exp(M) - taylor_exp(M))), 1e-9)

    def test_time_scaling(self):
        M = np.array([[0.0, 1.0], [-2.0, -0.5]])
        np.testing.assert_allclose(mat_exp(M, 0.3), taylor_exp(0.3 * M), atol=1e-12)

    def test_zero_time_is_identity(self):
        np.testing.assert_allclose(mat_exp(np.array([[1.0, 1.0], [0.0, 1.0]]), 0.0), np.eye(2))

    def test_nilpotent_closed_form(self):
        np.testing.assert_allclose(mat_exp([[0.0, 1.0], [0.0, 0.0]], 2.5), [[1.0, 2.5], [0.0, 1.0]],
                                   atol=1e-14)

    def test_semigroup(self):
        rng = np.random.Generator(np.random.Philox(13))
        for _ in range(20):
            M = rng.normal(size=(3, 3))
            s, t = rng.uniform(0.0, 1.0, size=2)
            np.testing.assert_allclose(mat_exp(M, s) @ mat_exp(M, t), mat_exp(M, s + t), atol=1e-8)

    def test_rejects_non_square(self):
        with self.assertRaises(DimensionError):
            mat_exp(np.ones((2, 3)))


class TestHoldIntegral(unittest.TestCase):
    """Zero-order-hold integral against trapezoidal quadrature"""

    def test_against_trapezoid(self):
        rng = np.random.Generator(np.random.Philox(5))
        for _ in range(10):
            A = rng.normal(size=(3, 3))
            B = rng.normal(size=(3, 2))
            delta = float(rng.uniform(0.05, 0.5))
            grid = np.linspace(0.0, delta, 4001)
            values = np.array([mat_exp(A, s) @ B for s in grid])
            expected = trapezoid(values, grid, axis=0)
            np.testing.assert_allclose(hold_integral(A, B, delta), expected, atol=1e-6)

    def test_scalar_closed_form(self):
        a, delta = 1.5, 0.2
        expected = (np.exp(a * delta) - 1.0) / a
        self.assertAlmostEqual(hold_integral([[a]], [[1.0]], delta)[0, 0], expected, places=12)

    def test_zero_dynamics(self):
        B = np.array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_allclose(hold_integral(np.zeros((2, 2)), B, 0.3), 0.3 * B, atol=1e-14)

    def test_stable_diagonal(self):
        np.testing.assert_allclose(hold_integral(-np.eye(2), np.eye(2), 1.0),
                                   (1.0 - np.exp(-1.0)) * np.eye(2), atol=1e-12)

    def test_derivative_is_exponential_times_b(self):
        A = np.array([[1.0, 1.0], [0.0, 1.0]])
        B = np.array([[1.0], [0.5]])
        h = 1e-8
        slope = (hold_integral(A, B, 0.1 + h) - hold_integral(A, B, 0.1)) / h
        np.testing.assert_allclose(slope, mat_exp(A, 0.1) @ B, atol=1e-6)

    def test_zero_length(self):
        np.testing.assert_array_equal(hold_integral(np.eye(2), np.eye(2), 0.0), np.zeros((2, 2)))

    def test_negative_length(self):
        with self.assertRaises(DomainError):
            hold_integral(np.eye(2), np.eye(2), -0.1)

    def test_zoh_discretize_consistent(self):
        A = np.array([[1.0, 1.0], [0.0, 1.0]])
        B = np.array([[1.0], [0.5]])
        A_d, B_d = zoh_discretize(A, B, 0.01)
        np.testing.assert_allclose(A_d, mat_exp(A, 0.01), atol=1e-14)
        np.testing.assert_allclose(B_d, hold_integral(A, B, 0.01), atol=1e-14)

    def test_row_mismatch(self):
        with self.assertRaises(DimensionError):
            hold_integral(np.eye(2), np.ones((3, 1)), 0.1)


class TestNorms(unittest.TestCase):

    def test_log_norm_of_jordan_block(self):
        self.assertAlmostEqual(log_norm_2([[1.0, 1.0], [0.0, 1.0]]), 1.5, delta=1e-9)

    def test_log_norm_shift(self):
        self.assertAlmostEqual(log_norm_2(-np.eye(3)), -1.0, places=12)
        rng = np.random.Generator(np.random.Philox(7))
        for _ in range(10):
            M = rng.normal(size=(3, 3))
            c = float(rng.uniform(-2.0, 2.0))
            self.assertAlmostEqual(log_norm_2(M + c * np.eye(3)), log_norm_2(M) + c, places=10)

    def test_spectral_norm_dominates_entries(self):
        rng = np.random.Generator(np.random.Philox(9))
        M = rng.normal(size=(4, 3))
        self.assertGreaterEqual(spectral_norm(M) + 1e-12, np.max(np.abs(M)))
        self.assertAlmostEqual(spectral_norm(np.eye(3)), 1.0, places=12)

    def test_log_norm_bounds_exponential_growth(self):
        A = np.array([[-1.0, 3.0], [0.0, -2.0]])
        mu = log_norm_2(A)
        for t in (0.1, 0.5, 1.0, 2.0):
            self.assertLessEqual(spectral_norm(mat_exp(A, t)), np.exp(mu * t) + 1e-12)

    def test_spectral_norm_power_iteration(self):
        rng = np.random.Generator(np.random.Philox(3))
        M = rng.normal(size=(4, 4))
        v = np.ones(4)
        for _ in range(500):
            v = M.T @ (M @ v)
            v /= np.linalg.norm(v)
        self.assertAlmostEqual(spectral_norm(M), np.linalg.norm(M @ v), places=8)

    def test_is_hurwitz(self):
        self.assertTrue(is_hurwitz(-np.eye(2)))
        self.assertFalse(is_hurwitz([[1.0, 1.0], [0.0, 1.0]]))
        self.assertFalse(is_hurwitz(np.zeros((2, 2))))

    def test_sym_eig_extremes(self):
        lo, hi = sym_eig_extremes([[2.0, 0.0], [0.0, 5.0]])
        self.assertAlmostEqual(lo, 2.0, places=12)
        self.assertAlmostEqual(hi, 5.0, places=12)

    def test_sym_eig_rejects_asymmetric(self):
        with self.assertRaises(DomainError):
            sym_eig_extremes([[1.0, 2.0], [0.0, 1.0]])

    def test_as_mat_rejects_nan(self):
        with self.assertRaises(DomainError):
            as_mat([[1.0, float('nan')]])


class TestLyapunov(unittest.TestCase):

    def test_diagonal_case(self):
        P = lyap_solve(-2.0 * np.eye(2), np.eye(2))
        np.testing.assert_allclose(P, np.eye(2) / 4.0, atol=1e-12)

    def test_closed_forms(self):
        np.testing.assert_allclose(lyap_solve(-np.eye(2), 2.0 * np.eye(2)), np.eye(2), atol=1e-12)
        np.testing.assert_allclose(lyap_solve(np.diag([-1.0, -2.0]), np.eye(2)), np.diag([0.5, 0.25]),
                                   atol=1e-12)

    def test_residual_on_random_stable_systems(self):
        rng = np.random.Generator(np.random.Philox(21))
        for _ in range(50):
            n = int(rng.integers(2, 6))
            M = rng.normal(size=(n, n))
            Phi = M - (np.max(np.linalg.eigvals(M).real) + 0.5) * np.eye(n)
            L = rng.normal(size=(n, n))
            Q = L @ L.T + np.eye(n)
            P = lyap_solve(Phi, Q)
            self.assertLessEqual(np.max(np.abs(Phi.T @ P + P @ Phi + Q)), 1e-9 * max(1.0, np.max(np.abs(Q))))
            self.assertGreater(np.min(np.linalg.eigvalsh(P)), 0.0)

    def test_not_hurwitz(self):
        with self.assertRaises(CertificationError):
            lyap_solve([[1.0, 1.0], [0.0, 1.0]], np.eye(2))

    def test_q_must_be_positive_definite(self):
        with self.assertRaises(DomainError):
            lyap_solve(-np.eye(2), np.diag([1.0, -1.0]))


if __name__ == '__main__':
    unittest.main()
