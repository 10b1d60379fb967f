#!/usr/bin/env python3
"""
DoS Signal Module

Attack-signal model for the network channel. A DoS signal is a sorted
sequence of intervals H_n = {h_n} ∪ [h_n, h_n + τ_n). This module provides
the counting and measure functions over time windows, the frequency and
duration budget (η, τ_D) / (κ, T) checks, minimal-budget fitting,
generators for random PWM jammers and the two well-posedness
counterexamples, and the deadline Q within which a successful transmission
is guaranteed.

Unbounded τ_D or T is represented by None, so 1/T and Δ/τ_D contribute an
exact zero.
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .conf import get_setting
from .errors import ConfigError, DomainError, InfeasibleError

logger = logging.getLogger('dosctrl.dos')

Range = Tuple[float, float]


@dataclass(frozen=True)
class DosInterval:
    """One DoS interval starting at h and lasting tau seconds (tau=0 is a pulse)"""
    h: float
    tau: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'h', float(self.h))
        object.__setattr__(self, 'tau', float(self.tau))
        if not (np.isfinite(self.h) and np.isfinite(self.tau)):
            raise DomainError(f"DoS interval must be finite, got ({self.h}, {self.tau})")
        if self.h < 0 or self.tau < 0:
            raise DomainError(f"DoS interval needs h >= 0 and tau >= 0, got ({self.h}, {self.tau})")

    @property
    def end(self) -> float:
        return self.h + self.tau


@dataclass(frozen=True)
class DosSignal:
    """Normalized DoS realization: strictly increasing h, no overlaps"""
    intervals: Tuple[DosInterval, ...] = ()
    repairs: int = field(default=0, compare=False)

    def __post_init__(self):
        starts = np.array([iv.h for iv in self.intervals], dtype=float)
        ends = np.array([iv.end for iv in self.intervals], dtype=float)
        if len(starts) > 1:
            if np.any(np.diff(starts) <= 0) or np.any(starts[1:] < ends[:-1]):
                raise DomainError("DoS intervals must be sorted and non-overlapping; use normalize()")
        object.__setattr__(self, '_starts', starts)
        object.__setattr__(self, '_ends', ends)

    @property
    def starts(self) -> np.ndarray:
        return self._starts

    @property
    def ends(self) -> np.ndarray:
        return self._ends

    def __len__(self) -> int:
        return len(self.intervals)

    @property
    def extent(self) -> float:
        """Time at which the last interval ends (0 for an empty signal)"""
        return float(self._ends.max()) if len(self.intervals) else 0.0


@dataclass(frozen=True)
class DosBudget:
    """
    Frequency and duration budget of an attacker.

    n(a, b) <= eta + (b - a)/tau_D and |Ξ(a, b)| <= kappa + (b - a)/T for
    every window. tau_D=None or T=None means unbounded.
    """
    eta: float = 0.0
    tau_D: Optional[float] = None
    kappa: float = 0.0
    T: Optional[float] = None

    def __post_init__(self):
        if self.eta < 0 or self.kappa < 0:
            raise DomainError(f"eta and kappa must be non-negative, got {self.eta}, {self.kappa}")
        if self.tau_D is not None and not self.tau_D > 0:
            raise DomainError(f"tau_D must be positive, got {self.tau_D}")
        # T = 1 is kept representable as the boundary of the well-posed range
        if self.T is not None and not self.T >= 1:
            raise DomainError(f"T must be >= 1, got {self.T}")

    @property
    def inv_T(self) -> float:
        return 0.0 if self.T is None else 1.0 / self.T

    def rate(self, delta: float) -> float:
        """Δ/τ_D, exactly 0 when τ_D is unbounded"""
        return 0.0 if self.tau_D is None else delta / self.tau_D

    def condition_lhs(self, delta: float) -> float:
        """Left side 1/T + Δ/τ_D of the main stability condition"""
        return self.inv_T + self.rate(delta)

    def is_well_posed(self, delta: float) -> bool:
        """τ_D > Δ and T > 1"""
        tau_ok = self.tau_D is None or self.tau_D > delta
        t_ok = self.T is None or self.T > 1
        return tau_ok and t_ok

    def to_dict(self) -> dict:
        return {'eta': self.eta, 'tau_D': self.tau_D, 'kappa': self.kappa, 'T': self.T}


def normalize(intervals: Iterable[Union[DosInterval, Sequence[float]]]) -> DosSignal:
    """
    Build a DosSignal from raw intervals.

    Sorts by start time and merges overlapping intervals (and intervals
    sharing a start time) into their union. Logs a warning when the input
    needed either repair.
    """
    raw: List[DosInterval] = []
    for iv in intervals:
        if isinstance(iv, DosInterval):
            raw.append(iv)
        else:
            h, tau = iv
            raw.append(DosInterval(float(h), float(tau)))

    unsorted = any(raw[k + 1].h < raw[k].h for k in range(len(raw) - 1))
    raw.sort(key=lambda iv: (iv.h, iv.tau))

    merged: List[Tuple[float, float]] = []
    merges = 0
    for iv in raw:
        if merged:
            h0, e0 = merged[-1]
            if iv.h == h0 or iv.h < e0:
                merged[-1] = (h0, max(e0, iv.end))
                merges += 1
                continue
        merged.append((iv.h, iv.end))

    repairs = merges + (1 if unsorted else 0)
    if repairs:
        logger.warning(
            "DoS intervals normalized: %s%d merged",
            "reordered, " if unsorted else "", merges
        )
    return DosSignal(tuple(DosInterval(h, e - h) for h, e in merged), repairs=repairs)


def _check_window(a: float, b: float):
    if a > b:
        raise DomainError(f"window start {a} is after window end {b}")


def count_transitions(sig: DosSignal, a: float, b: float) -> int:
    """Number of DoS off/on transitions h_n with a <= h_n < b"""
    _check_window(a, b)
    starts = sig.starts
    return int(np.searchsorted(starts, b, side='left') - np.searchsorted(starts, a, side='left'))


def dos_measure(sig: DosSignal, a: float, b: float) -> float:
    """Lebesgue measure of the DoS set intersected with [a, b]"""
    _check_window(a, b)
    if not len(sig):
        return 0.0
    lo = np.maximum(sig.starts, a)
    hi = np.minimum(sig.ends, b)
    return float(np.sum(np.clip(hi - lo, 0.0, None)))


def _time_tolerance(times):
    """Matching slack for instants such as kΔ that carry rounding error"""
    return get_setting('TIME_TOLERANCE', 1e-9) * np.maximum(1.0, np.abs(times))


def in_dos(sig: DosSignal, t: float) -> bool:
    """
    True iff t lies in some H_n (a pulse instant h_n counts as DoS).

    Instants within the time tolerance of an onset h_n are in DoS; instants
    within it of an interval end are not.
    """
    return bool(dos_mask(sig, np.array([t]))[0])


def dos_mask(sig: DosSignal, times) -> np.ndarray:
    """Vectorized in_dos over an array of times"""
    times = np.asarray(times, dtype=float)
    if not len(sig):
        return np.zeros(times.shape, dtype=bool)
    tol = _time_tolerance(times)
    idx = np.searchsorted(sig.starts, times + tol, side='right') - 1
    safe = np.clip(idx, 0, None)
    hit = (np.abs(times - sig.starts[safe]) <= tol) | (times < sig.ends[safe] - tol)
    return (idx >= 0) & hit


def prolonged_measure(sig: DosSignal, delta: float, a: float, b: float) -> float:
    """
    Measure of the DoS set with every interval prolonged by one period Δ,
    intersected with [a, b].

    (b - a) minus this value is the DoS-free time left once every attack is
    stretched by one period. Over a window starting at an onset h_n it is
    positive only if the window holds a successful transmission attempt.
    """
    _check_window(a, b)
    if delta < 0:
        raise DomainError(f"prolongation must be non-negative, got {delta}")
    total = 0.0
    cur_lo = cur_hi = None
    for h, e in zip(sig.starts, sig.ends + delta):
        if cur_hi is not None and h <= cur_hi:
            cur_hi = max(cur_hi, e)
            continue
        if cur_hi is not None:
            total += max(0.0, min(cur_hi, b) - max(cur_lo, a))
        cur_lo, cur_hi = h, e
    if cur_hi is not None:
        total += max(0.0, min(cur_hi, b) - max(cur_lo, a))
    return float(total)


def _running_best(values: np.ndarray, offsets: np.ndarray) -> float:
    """max over i <= j of values[j] + offsets[i]"""
    best = -np.inf
    best_offset = -np.inf
    for value, offset in zip(values, offsets):
        best_offset = max(best_offset, offset)
        best = max(best, value + best_offset)
    return best


def fit_budget(sig: DosSignal, tau_D: Optional[float], T: Optional[float],
               horizon: float) -> Tuple[float, float]:
    """
    Smallest (η, κ) for which the signal meets the budget over [0, horizon].

    The suprema are attained on extremal windows: counting windows that
    start at some h_i and end just after some h_j, and duration windows that
    start at some h_i and end at some h_j + τ_j.
    """
    if tau_D is not None and not tau_D > 0:
        raise DomainError(f"tau_D must be positive, got {tau_D}")
    if T is not None and not T >= 1:
        raise DomainError(f"T must be >= 1, got {T}")
    if horizon < 0:
        raise DomainError(f"horizon must be non-negative, got {horizon}")

    inside = sig.starts < horizon
    starts = sig.starts[inside]
    if not len(starts):
        return 0.0, 0.0

    # frequency: (j - i + 1) - (h_j - h_i)/tau_D
    rate = 0.0 if tau_D is None else 1.0 / tau_D
    idx = np.arange(len(starts), dtype=float)
    eta_min = _running_best(idx + 1.0 - rate * starts, -idx + rate * starts)

    # duration: sum_{k=i..j} len_k - (e_j - h_i)/T
    inv_T = 0.0 if T is None else 1.0 / T
    ends = np.minimum(sig.ends[inside], horizon)
    cumulative = np.cumsum(ends - starts)
    before = np.concatenate(([0.0], cumulative[:-1]))
    kappa_min = _running_best(cumulative - inv_T * ends, inv_T * starts - before)

    return max(0.0, float(eta_min)), max(0.0, float(kappa_min))


def check_budget(sig: DosSignal, budget: DosBudget, horizon: float,
                 tolerance: float = None) -> bool:
    """True iff both budget inequalities hold for all 0 <= a <= b <= horizon"""
    if tolerance is None:
        tolerance = get_setting('BUDGET_TOLERANCE', 1e-9)
    eta_min, kappa_min = fit_budget(sig, budget.tau_D, budget.T, horizon)
    return eta_min <= budget.eta + tolerance and kappa_min <= budget.kappa + tolerance


def dos_free_deadline(budget: DosBudget, delta: float) -> float:
    """
    Deadline Q = (κ + ηΔ)(1 - 1/T - Δ/τ_D)^{-1}.

    The first successful transmission happens no later than Q and
    consecutive successes are at most Q + Δ apart.
    """
    if not delta > 0:
        raise DomainError(f"transmission period must be positive, got {delta}")
    lhs = budget.condition_lhs(delta)
    if lhs >= 1.0:
        raise InfeasibleError(
            f"1/T + Δ/τ_D = {lhs:.6g} is not below 1; no deadline exists"
        )
    return (budget.kappa + budget.eta * delta) / (1.0 - lhs)


def averaged_budget(sig: DosSignal, horizon: float) -> Tuple[Optional[float], Optional[float]]:
    """Horizon-averaged (τ̄_D, T̄) = (horizon/n, horizon/|Ξ|); None when undefined"""
    n = count_transitions(sig, 0.0, horizon)
    measure = dos_measure(sig, 0.0, horizon)
    tau_bar = horizon / n if n else None
    t_bar = horizon / measure if measure > 0 else None
    return tau_bar, t_bar


def _check_range(name: str, rng: Range):
    lo, hi = rng
    if lo < 0 or hi < lo:
        raise DomainError(f"{name} must satisfy 0 <= low <= high, got {rng}")


def gen_random_pwm(off_range: Range, on_range: Range, horizon: float,
                   seed: int) -> DosSignal:
    """
    Random pulse-width-modulated jammer.

    Alternates DoS-free gaps drawn from off_range and attack durations drawn
    from on_range (both uniform) until the horizon, starting with a gap.
    Uses a Philox counter-based generator so a seed gives the same signal
    on every platform.
    """
    _check_range("off_range", off_range)
    _check_range("on_range", on_range)
    if not off_range[1] > 0:
        raise DomainError("off_range must allow positive gaps")
    if not horizon > 0:
        raise DomainError(f"horizon must be positive, got {horizon}")

    rng = np.random.Generator(np.random.Philox(seed))
    intervals: List[DosInterval] = []
    t = 0.0
    while True:
        t += rng.uniform(*off_range)
        if t >= horizon:
            break
        duration = float(rng.uniform(*on_range))
        intervals.append(DosInterval(t, duration))
        t += duration

    logger.debug("random PWM signal: %d intervals over %.3fs (seed %d)",
                 len(intervals), horizon, seed)
    return normalize(intervals)


def gen_pulse_train(delta: float, horizon: float) -> DosSignal:
    """Zero-width pulses at every multiple of Δ up to the horizon"""
    if not delta > 0:
        raise DomainError(f"pulse period must be positive, got {delta}")
    count = int(np.floor(horizon / delta + 1e-9)) + 1 if horizon >= 0 else 0
    return DosSignal(tuple(DosInterval(k * delta, 0.0) for k in range(count)))


def gen_blocking_interval(horizon: float) -> DosSignal:
    """A single interval (0, horizon), the finite stand-in for (0, ∞)"""
    if not horizon > 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    return DosSignal((DosInterval(0.0, float(horizon)),))


def read_dos_csv(path: Union[str, Path]) -> DosSignal:
    """Read an `h,tau` CSV file; unsorted or overlapping rows are normalized"""
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8', newline='') as f:
            reader = csv.DictReader(f)
            if reader.fieldnames is None:
                return DosSignal()
            fields = [name.strip() for name in reader.fieldnames]
            if fields[:2] != ['h', 'tau']:
                raise ConfigError(f"{path}: expected header 'h,tau', got {','.join(fields)}")
            rows = []
            for line_no, row in enumerate(reader, start=2):
                try:
                    rows.append((float(row['h']), float(row['tau'])))
                except (TypeError, ValueError) as e:
                    raise ConfigError(f"{path}:{line_no}: bad row {row}") from e
    except OSError as e:
        raise ConfigError(f"cannot read DoS trace {path}: {e}") from e

    try:
        return normalize(rows)
    except DomainError as e:
        raise ConfigError(f"{path}: {e}") from e


def write_dos_csv(sig: DosSignal, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(['h', 'tau'])
        for iv in sig.intervals:
            writer.writerow([repr(iv.h), repr(iv.tau)])
    return path
