#!/usr/bin/env python3
"""
Network Module

Periodic transmission schedule t_k = kΔ and the sequence of successful
transmissions {z_m} obtained by resolving every attempt against a DoS
signal. An attempt fails iff it falls inside some H_n, including a pulse
instant h_n.
"""

import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .dos import DosSignal, dos_mask
from .errors import DomainError, EmptySequenceError

logger = logging.getLogger('dosctrl.network')


@dataclass(frozen=True)
class Schedule:
    """Periodic transmission attempts with period delta, starting at t_0 = 0"""
    delta: float

    def __post_init__(self):
        if not (np.isfinite(self.delta) and self.delta > 0):
            raise DomainError(f"transmission period must be positive, got {self.delta}")

    def attempt_count(self, horizon: float) -> int:
        """Number of attempts kΔ <= horizon (horizon inclusive)"""
        if horizon < 0:
            return 0
        return int(np.floor(horizon / self.delta + 1e-9)) + 1

    def attempt_time(self, k: int) -> float:
        return k * self.delta


@dataclass(frozen=True)
class TxLog:
    """Outcome of every transmission attempt up to a horizon"""
    times: Tuple[float, ...]
    success: Tuple[bool, ...]
    successes: Tuple[float, ...] = field(init=False)

    def __post_init__(self):
        if len(self.times) != len(self.success):
            raise DomainError("attempt times and outcomes differ in length")
        object.__setattr__(
            self, 'successes',
            tuple(t for t, ok in zip(self.times, self.success) if ok)
        )

    @property
    def attempts(self) -> Tuple[Tuple[float, bool], ...]:
        return tuple(zip(self.times, self.success))

    @property
    def failure_rate(self) -> float:
        if not self.times:
            return 0.0
        return 1.0 - len(self.successes) / len(self.times)


def resolve_attempts(sched: Schedule, sig: DosSignal, horizon: float) -> TxLog:
    """Resolve every attempt kΔ <= horizon against the DoS signal"""
    times = tuple(sched.attempt_time(k) for k in range(sched.attempt_count(horizon)))
    success = tuple(bool(ok) for ok in ~dos_mask(sig, times))
    log = TxLog(times, success)
    logger.debug("resolved %d attempts, %d successful", len(times), len(log.successes))
    return log


def max_gap(log: TxLog) -> Tuple[float, float]:
    """
    Return (z_0, largest z_{m+1} - z_m).

    With a single success the gap is 0.
    """
    if not log.successes:
        raise EmptySequenceError("no successful transmission in the log")
    z = np.asarray(log.successes)
    gap = float(np.max(np.diff(z))) if len(z) > 1 else 0.0
    return float(z[0]), gap
