#!/usr/bin/env python3
"""
Tests for the certification layer: certificate scalars of the double
integrator example, period and σ bounds, the static-feedback tolerance,
the error gains, ISS constants and controller verdicts.
"""

import math
import sys
import unittest
from pathlib import Path

import numpy as np

# Add the project root to Python path
sys.path.insert(0, str(Path(__file__).parent))

from dosctrl_app.utils.certify import (LyapCert, build_cert, delta_bound, hold_growth,
                                       iss_bound, iss_constants, main_lhs, rho_analog,
                                       rho_digital, sigma_for_period, sigma_max, static_bound,
                                       static_bound_envelope, verdict)
from dosctrl_app.utils.control import ControllerKind, Gain, Plant
from dosctrl_app.utils.dos import DosBudget
from dosctrl_app.utils.errors import CertificationError, DomainError, InfeasibleError

A = np.array([[1.0, 1.0], [0.0, 1.0]])
B = np.eye(2)
K = np.array([[-2.1961, -0.7545], [-0.7545, -2.7146]])


def example_cert():
    return build_cert(Plant(A, B), Gain(K))


def manual_cert(mu_A=-1.0, phi_norm=2.0, gamma1=1.0, gamma2=1.0, alpha1=1.0, alpha2=1.0):
    eye = np.eye(2)
    return LyapCert(Q_L=eye, P=eye, Phi=-eye, gamma1=gamma1, gamma2=gamma2,
                    gamma3=2.0 * alpha2, alpha1=alpha1, alpha2=alpha2,
                    phi_norm=phi_norm, mu_A=mu_A)


class TestCertificate(unittest.TestCase):
    """Scalars of the double-integrator example with Q_L = I"""

    @classmethod
    def setUpClass(cls):
        cls.cert = example_cert()

    def test_scalars(self):
        c = self.cert
        self.assertEqual(c.gamma1, 1.0)
        self.assertAlmostEqual(c.gamma2, 2.1080, delta=5e-4)
        self.assertAlmostEqual(c.alpha1, 0.2779, delta=5e-4)
        self.assertAlmostEqual(c.alpha2, 0.4497, delta=5e-4)
        self.assertAlmostEqual(c.phi_norm, 1.9021, delta=5e-4)
        self.assertAlmostEqual(c.mu_A, 1.5, delta=1e-9)
        self.assertAlmostEqual(c.gamma3, 2.0 * c.alpha2, places=10)

    def test_lyapunov_equation(self):
        c = self.cert
        np.testing.assert_allclose(c.Phi.T @ c.P + c.P @ c.Phi, -np.eye(2), atol=1e-10)
        np.testing.assert_allclose(c.P, c.P.T, atol=1e-14)

    def test_unstable_closed_loop(self):
        with self.assertRaises(CertificationError):
            build_cert(Plant(A, B), Gain(np.zeros((2, 2))))

    def test_scalars_dict(self):
        self.assertEqual(set(self.cert.scalars()),
                         {'gamma1', 'gamma2', 'gamma3', 'alpha1', 'alpha2', 'phi_norm', 'mu_A'})


class TestPeriodBounds(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.cert = example_cert()

    def test_sigma_max(self):
        self.assertAlmostEqual(sigma_max(self.cert), 0.4744, delta=1e-4)

    def test_delta_bound_at_sigma_max(self):
        self.assertAlmostEqual(delta_bound(self.cert, sigma_max(self.cert)), 0.1508, delta=1e-3)

    def test_delta_bound_is_increasing_in_sigma(self):
        values = [delta_bound(self.cert, s) for s in np.linspace(0.01, sigma_max(self.cert), 20)]
        self.assertTrue(all(b > a for a, b in zip(values, values[1:])))

    def test_delta_bound_domain(self):
        with self.assertRaises(DomainError):
            delta_bound(self.cert, 0.0)
        with self.assertRaises(DomainError):
            delta_bound(self.cert, 0.48)
        with self.assertRaises(DomainError):
            delta_bound(self.cert, None)

    def test_manual_period_bound(self):
        # μ_A <= 0: bound = σ/((1+σ) max{‖Φ‖,1})
        self.assertAlmostEqual(delta_bound(manual_cert(), 1.0), 0.25)

    def test_delta_bound_decreases_with_phi_norm(self):
        values = [delta_bound(manual_cert(mu_A=0.5, phi_norm=p), 0.5) for p in (1.0, 1.5, 2.0, 4.0)]
        self.assertTrue(all(b < a for a, b in zip(values, values[1:])))

    def test_hold_growth(self):
        self.assertAlmostEqual(hold_growth(1.5, 0.1), math.expm1(0.15) / 1.5, places=14)
        self.assertEqual(hold_growth(-2.0, 0.1), 0.1)
        self.assertEqual(hold_growth(0.0, 0.3), 0.3)

    def test_sigma_for_period_inverts_the_bound(self):
        for period in (0.01, 0.05, 0.1, 0.14):
            sigma = sigma_for_period(self.cert, period)
            self.assertAlmostEqual(delta_bound(self.cert, sigma), period, places=10)

    def test_sigma_for_period_infeasible(self):
        with self.assertRaises(InfeasibleError):
            sigma_for_period(self.cert, 0.2)
        with self.assertRaises(InfeasibleError):
            sigma_for_period(self.cert, 1.0)
        with self.assertRaises(DomainError):
            sigma_for_period(self.cert, 0.0)


class TestStaticBound(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.cert = example_cert()

    def test_example_bound(self):
        sigma, bound = static_bound(self.cert, 0.1)
        self.assertAlmostEqual(bound, 0.0321, delta=1e-3)
        self.assertAlmostEqual(sigma, 0.2582, delta=1e-3)

    def test_envelope(self):
        self.assertAlmostEqual(static_bound_envelope(self.cert), 0.0683, delta=1e-3)

    def test_decreasing_in_period_and_below_envelope(self):
        envelope = static_bound_envelope(self.cert)
        bounds = [static_bound(self.cert, d)[1] for d in (0.001, 0.01, 0.05, 0.1, 0.14)]
        self.assertTrue(all(b < a for a, b in zip(bounds, bounds[1:])))
        self.assertTrue(all(0 < b <= envelope for b in bounds))

    def test_long_period_infeasible(self):
        with self.assertRaises(InfeasibleError):
            static_bound(self.cert, 1.0)

    def test_no_input_coupling(self):
        # γ2 = 0: σ is unbounded and the tolerance is 1
        cert = build_cert(Plant(-2.0 * np.eye(2), np.eye(2)), Gain(np.zeros((2, 2))))
        self.assertEqual(cert.gamma2, 0.0)
        self.assertIsNone(sigma_max(cert))
        self.assertAlmostEqual(delta_bound(cert, None), 0.5)
        self.assertAlmostEqual(static_bound(cert, 0.1)[1], 1.0)


class TestGains(unittest.TestCase):

    def test_rho_analog(self):
        self.assertAlmostEqual(rho_analog(manual_cert(mu_A=-1.0), 0.0, 0.1), 1.1)
        self.assertAlmostEqual(rho_analog(manual_cert(mu_A=0.0), 1.9, 0.1), 3.0)
        self.assertAlmostEqual(rho_analog(manual_cert(mu_A=1.5), 0.9, 0.1),
                               (1.0 + 1.0 / 1.5) * math.exp(1.5), places=10)

    def test_rho_analog_domain(self):
        with self.assertRaises(DomainError):
            rho_analog(manual_cert(), -1.0, 0.1)
        with self.assertRaises(DomainError):
            rho_analog(manual_cert(), 1.0, 0.0)

    def test_rho_digital(self):
        rho_hat, rho_tilde = rho_digital(manual_cert(mu_A=-1.0), 1.0, 0.1, 1.1)
        self.assertEqual(rho_hat, 1.0)
        self.assertAlmostEqual(rho_tilde, 3.2)

    def test_rho_digital_example(self):
        cert = example_cert()
        rho_hat, rho_tilde = rho_digital(cert, 0.47, 0.01, 2.0)
        self.assertAlmostEqual(rho_hat, math.exp(0.015), places=12)
        self.assertAlmostEqual(rho_tilde, 0.47 + math.exp(0.015) * 2.0 * 1.47, places=12)

    def test_rho_digital_tick_too_long(self):
        with self.assertRaises(InfeasibleError):
            rho_digital(example_cert(), 0.1, 0.1, 1.0)


class TestIss(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.cert = example_cert()

    def test_analog_constants(self):
        c = self.cert
        consts = iss_constants(c, 5.0)
        gamma4 = c.gamma2 * 5.0 + c.gamma3
        self.assertAlmostEqual(consts.gamma4, gamma4)
        self.assertAlmostEqual(consts.gamma5, gamma4 ** 2 / 2.0)
        self.assertAlmostEqual(consts.omega1, 1.0 / (2.0 * c.alpha2))

    def test_digital_decay(self):
        c = self.cert
        consts = iss_constants(c, 5.0, digital=True, sigma=0.3)
        self.assertAlmostEqual(consts.omega1, (1.0 - 0.3 * c.gamma2) / (2.0 * c.alpha2))

    def test_digital_decay_vanishes_at_sigma_max(self):
        consts = iss_constants(self.cert, 1.0, digital=True, sigma=sigma_max(self.cert) - 1e-9)
        self.assertGreater(consts.omega1, 0.0)
        self.assertLess(consts.omega1, 1e-6)

    def test_digital_infeasible_sigma(self):
        with self.assertRaises(InfeasibleError):
            iss_constants(self.cert, 1.0, digital=True, sigma=0.48)

    def test_iss_bound(self):
        consts = iss_constants(self.cert, 1.0)
        values = iss_bound(consts, 2.0, [0.0, 1.0], [0.0, 0.1])
        self.assertAlmostEqual(values[0], 2.0)
        self.assertAlmostEqual(values[1], math.exp(-consts.omega1) * 2.0
                               + consts.gamma5 / consts.omega1 * 0.01)


class TestVerdict(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.cert = example_cert()

    def test_main_lhs(self):
        self.assertAlmostEqual(main_lhs(DosBudget(tau_D=0.96, T=1.29), 0.1), 0.8793, delta=5e-4)

    def test_example_budget(self):
        budget = DosBudget(eta=1.0, tau_D=0.96, kappa=0.5, T=1.29)
        report = verdict(self.cert, budget, 0.1, 'analog', tick=0.01)
        self.assertTrue(report.certified)
        self.assertEqual(report.verdicts, {'static': False, 'analog': True, 'digital': True})
        self.assertAlmostEqual(report.Q_deadline, 0.6 / (1.0 - report.main_lhs))
        self.assertAlmostEqual(report.rho, rho_analog(self.cert, report.Q_deadline, 0.1))
        self.assertAlmostEqual(report.delta_bound, 0.1508, delta=1e-3)
        self.assertAlmostEqual(report.static_bound, 0.0321, delta=1e-3)
        self.assertIsNotNone(report.gamma4)
        self.assertAlmostEqual(report.omega1, 1.0 / (2.0 * self.cert.alpha2))

    def test_digital_tick(self):
        budget = DosBudget(eta=1.0, tau_D=0.96, kappa=0.5, T=1.29)
        report = verdict(self.cert, budget, 0.1, ControllerKind.DIGITAL, tick=0.01)
        self.assertTrue(report.certified)
        self.assertAlmostEqual(report.sigma, sigma_for_period(self.cert, 0.01))
        self.assertAlmostEqual(report.rho_hat, math.exp(0.015))
        self.assertAlmostEqual(report.omega1,
                               (1.0 - report.sigma * self.cert.gamma2) / (2.0 * self.cert.alpha2))

    def test_digital_needs_tick(self):
        report = verdict(self.cert, DosBudget(tau_D=0.96, T=1.29), 0.1, 'digital')
        self.assertFalse(report.certified)
        self.assertTrue(any('tick' in note for note in report.notes))

    def test_digital_tick_too_long(self):
        report = verdict(self.cert, DosBudget(tau_D=0.96, T=1.29), 0.1, 'digital', tick=0.2)
        self.assertFalse(report.verdicts['digital'])
        self.assertTrue(report.verdicts['analog'])

    def test_pulse_train_budget(self):
        report = verdict(self.cert, DosBudget(eta=1.0, tau_D=0.1), 0.1, 'analog', tick=0.01)
        self.assertEqual(report.main_lhs, 1.0)
        self.assertFalse(any(report.verdicts.values()))
        self.assertIsNone(report.Q_deadline)
        self.assertIsNone(report.gamma4)

    def test_static_certified_for_mild_attacks(self):
        report = verdict(self.cert, DosBudget(kappa=1.0, T=50.0), 0.1, 'static')
        self.assertAlmostEqual(report.main_lhs, 0.02)
        self.assertTrue(report.certified)

    def test_static_infeasible_period(self):
        report = verdict(self.cert, DosBudget(kappa=1.0, T=50.0), 1.0, 'static')
        self.assertFalse(report.certified)
        self.assertIsNone(report.static_bound)
        self.assertTrue(any(note.startswith('static') for note in report.notes))

    def test_verdicts_are_monotone(self):
        previous = True
        for T in (50.0, 10.0, 3.0, 1.5, 1.2, 1.05):
            ok = verdict(self.cert, DosBudget(tau_D=0.96, T=T), 0.1, 'analog').certified
            self.assertTrue(previous or not ok)
            previous = ok
        self.assertFalse(previous)

    def test_report_dict(self):
        report = verdict(self.cert, DosBudget(tau_D=0.96, T=1.29), 0.1, 'analog')
        data = report.to_dict()
        self.assertTrue(data['certified'])
        self.assertEqual(data['budget'], {'eta': 0.0, 'tau_D': 0.96, 'kappa': 0.0, 'T': 1.29})
        self.assertEqual(data['controller_kind'], 'analog')


if __name__ == '__main__':
    unittest.main()
