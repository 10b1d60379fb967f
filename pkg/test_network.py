#!/usr/bin/env python3
"""
Tests for the transmission schedule and the resolution of attempts against
DoS signals.
"""

import sys
import tempfile
import unittest
from pathlib import Path

import numpy as np

# Add the project root to Python path
sys.path.insert(0, str(Path(__file__).parent))

from dosctrl_app.utils.certify import build_cert, verdict
from dosctrl_app.utils.control import Gain, Plant
from dosctrl_app.utils.dos import (DosBudget, DosInterval, DosSignal, dos_mask, fit_budget,
                                   gen_blocking_interval, gen_pulse_train, in_dos, read_dos_csv)
from dosctrl_app.utils.errors import DomainError, EmptySequenceError
from dosctrl_app.utils.network import Schedule, TxLog, max_gap, resolve_attempts


class TestSchedule(unittest.TestCase):

    def test_attempt_count_includes_horizon(self):
        self.assertEqual(Schedule(0.1).attempt_count(50.0), 501)
        self.assertEqual(Schedule(0.1).attempt_count(0.05), 1)
        self.assertEqual(Schedule(0.1).attempt_count(-1.0), 0)

    def test_rejects_bad_period(self):
        for delta in (0.0, -0.1, float('inf')):
            with self.assertRaises(DomainError):
                Schedule(delta)


class TestResolveAttempts(unittest.TestCase):

    def test_no_dos_every_attempt_succeeds(self):
        log = resolve_attempts(Schedule(0.1), DosSignal(), 1.0)
        self.assertEqual(len(log.times), 11)
        self.assertEqual(len(log.successes), 11)
        self.assertEqual(log.failure_rate, 0.0)

    def test_pulse_train_blocks_everything(self):
        log = resolve_attempts(Schedule(0.1), gen_pulse_train(0.1, 10.0), 10.0)
        self.assertEqual(log.successes, ())
        self.assertEqual(log.failure_rate, 1.0)
        with self.assertRaises(EmptySequenceError):
            max_gap(log)

    def test_pulse_train_budget_is_not_admissible(self):
        sig = gen_pulse_train(0.1, 10.0)
        eta, kappa = fit_budget(sig, 0.1, None, 10.0)
        budget = DosBudget(eta=eta, tau_D=0.1, kappa=kappa)
        self.assertAlmostEqual(budget.condition_lhs(0.1), 1.0)

    def test_blocking_interval(self):
        horizon = 20.0
        log = resolve_attempts(Schedule(0.1), gen_blocking_interval(horizon), horizon - 0.05)
        self.assertEqual(log.successes, ())
        budget = DosBudget(eta=1.0, kappa=0.0, T=1.0)
        self.assertEqual(budget.condition_lhs(0.1), 1.0)
        self.assertFalse(budget.is_well_posed(0.1))

    def test_blocking_interval_fails_certification(self):
        horizon = 20.0
        sig = gen_blocking_interval(horizon)
        eta, kappa = fit_budget(sig, None, 1.0, horizon)
        self.assertAlmostEqual(eta, 1.0)
        self.assertAlmostEqual(kappa, 0.0, delta=1e-12)
        A = np.array([[1.0, 1.0], [0.0, 1.0]])
        K = np.array([[-2.1961, -0.7545], [-0.7545, -2.7146]])
        cert = build_cert(Plant(A, np.eye(2)), Gain(K))
        for kind in ('static', 'analog', 'digital'):
            report = verdict(cert, DosBudget(eta=eta, kappa=kappa, T=1.0), 0.1, kind, tick=0.01)
            self.assertFalse(report.certified, kind)
            self.assertFalse(any(report.verdicts.values()), kind)

    def test_failure_rate(self):
        # 500 attempts in [0, 49.9]; only every fifth one lands outside DoS
        sig = DosSignal(tuple(DosInterval(0.5 * k + 0.05, 0.4) for k in range(100)))
        log = resolve_attempts(Schedule(0.1), sig, 49.9)
        self.assertEqual(len(log.times), 500)
        self.assertEqual(len(log.successes), 100)
        self.assertAlmostEqual(log.failure_rate, 0.8)

    def test_interval_boundaries(self):
        sig = DosSignal((DosInterval(0.2, 0.2),))
        log = resolve_attempts(Schedule(0.1), sig, 0.5)
        outcome = dict(zip([round(t, 10) for t in log.times], log.success))
        self.assertFalse(outcome[0.2])
        self.assertFalse(outcome[0.3])
        self.assertTrue(outcome[0.4])
        self.assertTrue(outcome[0.1])

    def test_decimal_pulse_train_file_blocks_every_attempt(self):
        # attempt instants such as 3 * 0.1 = 0.30000000000000004 must hit the pulse at 0.3
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'pulses.csv'
            path.write_text('h,tau\n' + ''.join(f'{k / 10:.1f},0\n' for k in range(101)))
            sig = read_dos_csv(path)
        log = resolve_attempts(Schedule(0.1), sig, 10.0)
        self.assertEqual(len(log.times), 101)
        self.assertEqual(log.successes, ())
        self.assertTrue(np.all(dos_mask(sig, np.array(log.times))))

    def test_onsets_and_ends_matched_with_tolerance(self):
        sig = DosSignal((DosInterval(0.3, 0.0), DosInterval(1.0, 1.0)))
        self.assertTrue(in_dos(sig, 0.3 + 1e-12))
        self.assertTrue(in_dos(sig, 0.3 - 1e-12))
        self.assertFalse(in_dos(sig, 0.3 + 1e-6))
        self.assertTrue(in_dos(sig, 1.0 - 1e-12))
        self.assertTrue(in_dos(sig, 2.0 - 1e-6))
        self.assertFalse(in_dos(sig, 2.0 - 1e-12))


class TestMaxGap(unittest.TestCase):

    def test_example(self):
        log = TxLog((0.0, 0.1, 0.2, 0.3, 0.4), (True, False, False, True, True))
        z0, gap = max_gap(log)
        self.assertEqual(z0, 0.0)
        self.assertAlmostEqual(gap, 0.3)

    def test_single_success(self):
        self.assertEqual(max_gap(TxLog((0.0, 0.1), (False, True))), (0.1, 0.0))

    def test_length_mismatch(self):
        with self.assertRaises(DomainError):
            TxLog((0.0, 0.1), (True,))

    def test_empty_log(self):
        self.assertEqual(TxLog((), ()).failure_rate, 0.0)


if __name__ == '__main__':
    unittest.main()
