#!/usr/bin/env python3
"""
Simulation Module

Fixed-step hybrid simulation of ẋ = Ax + Bu + d with measurement
y = x + n under the static, analog-predictor and digital-predictor laws,
with transmissions resolved against a DoS signal.

The plant is advanced exactly between micro-steps (zero-order-held u and d,
one augmented matrix exponential computed per run), so no integration error
accumulates. At a micro-step instant events run in this order:
DoS state, transmission attempt, controller reset or tick, output.
"""

import csv
import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .certify import IssConstants, LyapCert, iss_bound
from .conf import get_setting
from .control import (AnalogPredState, ControllerKind, DigitalPredState, Gain, Plant,
                      StaticState, analog_reset, digital_step, static_output)
from .dos import (DosSignal, averaged_budget, count_transitions, dos_mask, dos_measure,
                  gen_random_pwm)
from .errors import ConfigError, DomainError
from .matkit import zoh_discretize
from .network import Schedule, resolve_attempts

logger = logging.getLogger('dosctrl.sim')

STEP_RATIO_TOLERANCE = 1e-6


@dataclass(frozen=True)
class NoiseSpec:
    """
    Uniform disturbance d and measurement noise n, zero-order held.

    Both are redrawn every `hold` seconds (default: every micro-step).
    quiet_after switches both off from that time on.
    """
    d_bound: float = 0.0
    n_bound: float = 0.0
    hold: Optional[float] = None
    seed: int = 0
    quiet_after: Optional[float] = None

    def __post_init__(self):
        if self.d_bound < 0 or self.n_bound < 0:
            raise ConfigError(f"noise bounds must be non-negative, got {self.d_bound}, {self.n_bound}")
        if self.hold is not None and not self.hold > 0:
            raise ConfigError(f"noise hold must be positive, got {self.hold}")

    def scaled(self, factor: float) -> 'NoiseSpec':
        return replace(self, d_bound=self.d_bound * factor, n_bound=self.n_bound * factor)


@dataclass(frozen=True)
class SimConfig:
    """Initial state, horizon, micro-step and controller (b ticks per Δ for digital)"""
    x0: Tuple[float, ...]
    t_end: float
    controller_kind: ControllerKind = ControllerKind.ANALOG
    h_sim: Optional[float] = None
    b: int = 1
    divergence_limit: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'x0', tuple(float(v) for v in np.ravel(self.x0)))
        try:
            object.__setattr__(self, 'controller_kind', ControllerKind.parse(self.controller_kind))
        except DomainError as e:
            raise ConfigError(str(e)) from e
        if not self.t_end > 0:
            raise ConfigError(f"t_end must be positive, got {self.t_end}")
        if self.h_sim is not None and not self.h_sim > 0:
            raise ConfigError(f"h_sim must be positive, got {self.h_sim}")
        if int(self.b) != self.b or self.b < 1:
            raise ConfigError(f"b must be a positive integer, got {self.b}")

    @property
    def step(self) -> float:
        return self.h_sim if self.h_sim is not None else get_setting('SIM_STEP', 1e-3)


@dataclass
class SimTrace:
    """One row per micro-step; est is x̂ (analog), α (digital) or the held y (static)"""
    controller_kind: str
    t: np.ndarray
    x: np.ndarray
    est: np.ndarray
    u: np.ndarray
    dos: np.ndarray
    attempt: np.ndarray
    success: np.ndarray
    err_norm: np.ndarray
    d: np.ndarray = field(repr=False)
    noise: np.ndarray = field(repr=False)
    w_sup: np.ndarray = field(repr=False)
    z0: Optional[float] = None
    diverged: bool = False

    def __len__(self) -> int:
        return len(self.t)

    @property
    def n(self) -> int:
        return self.x.shape[1]

    @property
    def m(self) -> int:
        return self.u.shape[1]

    @property
    def x_norm(self) -> np.ndarray:
        return np.linalg.norm(self.x, axis=1)

    def after_z0(self) -> np.ndarray:
        """Row mask t >= z_0 (all False before the first success)"""
        if self.z0 is None:
            return np.zeros(len(self), dtype=bool)
        return self.t >= self.z0

    def digest(self) -> str:
        sha = hashlib.sha256()
        for arr in (self.t, self.x, self.est, self.u, self.dos, self.attempt, self.success):
            sha.update(np.ascontiguousarray(arr).tobytes())
        return sha.hexdigest()


@dataclass(frozen=True)
class SimJob:
    """Arguments of one run(), for batch execution"""
    plant: Plant
    K: Gain
    sched: Schedule
    sig: DosSignal
    noise: NoiseSpec
    cfg: SimConfig


def _step_count(length: float, h: float, name: str) -> int:
    ratio = length / h
    steps = int(round(ratio))
    if steps < 1 or abs(ratio - steps) > STEP_RATIO_TOLERANCE * max(1.0, ratio):
        raise ConfigError(f"h_sim = {h} does not divide {name} = {length}")
    return steps


def _noise_arrays(noise: NoiseSpec, times: np.ndarray, n: int,
                  hold_steps: int) -> Tuple[np.ndarray, np.ndarray]:
    rng = np.random.Generator(np.random.Philox(noise.seed))
    blocks = (len(times) - 1) // hold_steps + 1
    d_blocks = rng.uniform(-noise.d_bound, noise.d_bound, size=(blocks, n))
    n_blocks = rng.uniform(-noise.n_bound, noise.n_bound, size=(blocks, n))
    block_of = np.arange(len(times)) // hold_steps
    d = d_blocks[block_of]
    nz = n_blocks[block_of]
    if noise.quiet_after is not None:
        quiet = times >= noise.quiet_after - 1e-12
        d[quiet] = 0.0
        nz[quiet] = 0.0
    return d, nz


def run(plant: Plant, K: Gain, sched: Schedule, sig: DosSignal, noise: NoiseSpec,
        cfg: SimConfig) -> SimTrace:
    """Simulate one closed-loop run; stops early and flags divergence when ‖x‖ blows up"""
    kind = cfg.controller_kind
    K.check(plant)
    n, m = plant.n, plant.m
    x = np.asarray(cfg.x0, dtype=float)
    if x.shape != (n,):
        raise ConfigError(f"x0 must have length {n}, got {len(cfg.x0)}")

    h = cfg.step
    limit = cfg.divergence_limit or get_setting('DIVERGENCE_LIMIT', 1e12)
    tx_steps = _step_count(sched.delta, h, "Δ")
    tick_steps = tx_steps
    if kind is ControllerKind.DIGITAL:
        if tx_steps % cfg.b:
            raise ConfigError(f"h_sim = {h} does not divide the controller tick Δ/b = {sched.delta / cfg.b}")
        tick_steps = tx_steps // cfg.b
    hold_steps = _step_count(noise.hold if noise.hold is not None else h, h, "noise hold")

    steps = int(np.floor(cfg.t_end / h + 1e-9))
    times = np.arange(steps + 1) * h

    # transmission outcomes come from the network model at t_k = kΔ
    tx = resolve_attempts(sched, sig, times[-1])
    outcome: Dict[int, bool] = {}
    for k, ok in enumerate(tx.success):
        if k * tx_steps <= steps:
            outcome[k * tx_steps] = ok

    dos = dos_mask(sig, times)
    d, nz = _noise_arrays(noise, times, n, hold_steps)
    w_sup = np.maximum.accumulate(np.linalg.norm(np.hstack([d, nz]), axis=1))

    if kind is ControllerKind.ANALOG:
        Phi = K.closed_loop(plant)
        M = np.block([[plant.A, plant.B @ K.K], [np.zeros((n, n)), Phi]])
        M_h, E_h = zoh_discretize(M, np.vstack([np.eye(n), np.zeros((n, n))]), h)
    else:
        A_h, G_h = zoh_discretize(plant.A, np.hstack([plant.B, np.eye(n)]), h)
        B_h, D_h = G_h[:, :m], G_h[:, m:]

    xs = np.zeros((steps + 1, n))
    ests = np.zeros((steps + 1, n))
    us = np.zeros((steps + 1, m))
    attempt = np.zeros(steps + 1, dtype=bool)
    success = np.zeros(steps + 1, dtype=bool)

    static = StaticState()
    analog = AnalogPredState.initial(n)
    digital = DigitalPredState.initial(plant, sched.delta, cfg.b) if kind is ControllerKind.DIGITAL else None
    u = np.zeros(m)
    est = np.zeros(n)
    z0 = None
    last = steps
    diverged = False

    for i in range(steps + 1):
        ok = outcome.get(i)
        if ok is not None:
            attempt[i] = True
            success[i] = ok
            dos[i] = not ok
        y = x + nz[i]
        if ok and z0 is None:
            z0 = float(times[i])

        if kind is ControllerKind.STATIC:
            if ok:
                static = static.receive(y)
            u = static_output(static, K)
            est = static.last_y if static.last_y is not None else np.zeros(n)
        elif kind is ControllerKind.ANALOG:
            if ok:
                analog = analog_reset(analog, y)
            est = analog.xhat
            u = K.K @ est
        elif i % tick_steps == 0:
            digital, u = digital_step(digital, plant, K, bool(ok), y if ok else None)
            est = digital.alpha

        xs[i] = x
        ests[i] = est
        us[i] = u
        if i == steps:
            break

        if kind is ControllerKind.ANALOG:
            z = M_h @ np.concatenate([x, analog.xhat]) + E_h @ d[i]
            x = z[:n]
            analog = AnalogPredState(z[n:])
        else:
            x = A_h @ x + B_h @ u + D_h @ d[i]

        if not np.all(np.isfinite(x)) or np.linalg.norm(x) > limit:
            diverged = True
            last = i
            logger.warning("%s run diverged at t=%.3f (‖x‖ > %.3g)", kind.value, times[i + 1], limit)
            break

    rows = slice(0, last + 1)
    trace = SimTrace(
        controller_kind=kind.value,
        t=times[rows],
        x=xs[rows],
        est=ests[rows],
        u=us[rows],
        dos=dos[rows],
        attempt=attempt[rows],
        success=success[rows],
        err_norm=np.linalg.norm(ests[rows] - xs[rows], axis=1),
        d=d[rows],
        noise=nz[rows],
        w_sup=w_sup[rows],
        z0=z0,
        diverged=diverged,
    )
    logger.debug("%s run: %d rows, z0=%s, diverged=%s", kind.value, len(trace), z0, diverged)
    return trace


@dataclass
class SimMetrics:
    """Aggregates of one run; None stands for an unbounded or undefined value"""
    controller_kind: str
    horizon: float
    transitions: int
    dos_measure: float
    tau_D_bar: Optional[float]
    T_bar: Optional[float]
    averaged_lhs: Optional[float]
    attempts: int
    successes: int
    failure_rate: float
    z0: Optional[float]
    sup_x: float
    sup_x_settled: Optional[float]
    final_x: float
    sup_err_after_z0: Optional[float]
    diverged: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _max_or_none(values: np.ndarray) -> Optional[float]:
    return float(np.max(values)) if len(values) else None


def metrics(trace: SimTrace, sig: DosSignal, horizon: float, delta: Optional[float] = None,
            settle: float = 5.0) -> SimMetrics:
    """Attack aggregates over [0, horizon] plus state and error extremes of the trace"""
    tau_bar, t_bar = averaged_budget(sig, horizon)
    lhs = None
    if delta is not None:
        lhs = (0.0 if t_bar is None else 1.0 / t_bar) + (0.0 if tau_bar is None else delta / tau_bar)

    attempts = int(np.sum(trace.attempt))
    successes = int(np.sum(trace.success))
    x_norm = trace.x_norm
    after = trace.after_z0()
    return SimMetrics(
        controller_kind=trace.controller_kind,
        horizon=horizon,
        transitions=count_transitions(sig, 0.0, horizon),
        dos_measure=dos_measure(sig, 0.0, horizon),
        tau_D_bar=tau_bar,
        T_bar=t_bar,
        averaged_lhs=lhs,
        attempts=attempts,
        successes=successes,
        failure_rate=1.0 - successes / attempts if attempts else 0.0,
        z0=trace.z0,
        sup_x=float(np.max(x_norm)),
        sup_x_settled=_max_or_none(x_norm[trace.t >= settle]),
        final_x=float(x_norm[-1]),
        sup_err_after_z0=_max_or_none(trace.err_norm[after]),
        diverged=trace.diverged,
    )


def lyapunov_values(trace: SimTrace, P) -> np.ndarray:
    """V(x(t)) = xᵀPx for every row"""
    P = np.asarray(P, dtype=float)
    return np.einsum('ij,jk,ik->i', trace.x, P, trace.x)


@dataclass
class EnvelopeCheck:
    rows_checked: int
    error_violations: int
    iss_violations: int
    worst_error_margin: float
    worst_iss_margin: float

    @property
    def ok(self) -> bool:
        return self.error_violations == 0 and self.iss_violations == 0


def envelope_violations(trace: SimTrace, cert: LyapCert, consts: IssConstants,
                        err_gain: float, sigma: float = 0.0,
                        slack: float = 1e-9) -> EnvelopeCheck:
    """
    Count rows t >= z_0 that break the error envelope
    err <= σ‖x‖ + gain·‖w‖∞ (analog: σ = 0, gain ρ; digital: gain ρ̃)
    or the ISS envelope on V. Margins are bound minus value (negative = violated).
    """
    mask = trace.after_z0()
    if not np.any(mask):
        return EnvelopeCheck(0, 0, 0, float('inf'), float('inf'))

    err_bound = sigma * trace.x_norm[mask] + err_gain * trace.w_sup[mask]
    err_margin = err_bound - trace.err_norm[mask]

    V = lyapunov_values(trace, cert.P)
    start = int(np.argmax(mask))
    elapsed = trace.t[mask] - trace.t[start]
    v_bound = iss_bound(consts, V[start], elapsed, trace.w_sup[mask])
    iss_margin = v_bound - V[mask]

    return EnvelopeCheck(
        rows_checked=int(np.sum(mask)),
        error_violations=int(np.sum(err_margin < -slack)),
        iss_violations=int(np.sum(iss_margin < -slack * (1.0 + v_bound))),
        worst_error_margin=float(np.min(err_margin)),
        worst_iss_margin=float(np.min(iss_margin)),
    )


def _run_job(job: SimJob) -> SimTrace:
    return run(job.plant, job.K, job.sched, job.sig, job.noise, job.cfg)


def run_batch(jobs: Sequence[SimJob], workers: Optional[int] = None) -> List[SimTrace]:
    """Run independent jobs, concurrently when workers > 1; results keep job order"""
    if workers is None:
        workers = get_setting('DOSCTRL_WORKERS', 1)
    if workers <= 1 or len(jobs) <= 1:
        return [_run_job(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(_run_job, jobs))


@dataclass
class SweepRow:
    duty_cycle: float
    failure_rate: float
    diverged: bool
    sup_x: float


def failure_tolerance_sweep(plant: Plant, K: Gain, sched: Schedule, controller_kind,
                            duty_cycles: Sequence[float], seed: int = 0,
                            horizon: float = 50.0, x0=(1.0, 1.0),
                            noise: Optional[NoiseSpec] = None, b: int = 1,
                            cycle: float = 1.0, spread: float = 0.2,
                            h_sim: Optional[float] = None,
                            workers: Optional[int] = None) -> List[SweepRow]:
    """
    Failure rate a controller survives: one random PWM jammer per duty cycle
    (mean period `cycle`, on/off lengths uniform within ±spread of their mean).
    """
    noise = noise or NoiseSpec(seed=seed)
    cfg = SimConfig(x0=tuple(x0), t_end=horizon, controller_kind=controller_kind,
                    h_sim=h_sim, b=b)
    jobs = []
    signals = []
    for idx, duty in enumerate(duty_cycles):
        if not 0 <= duty < 1:
            raise DomainError(f"duty cycle must be in [0, 1), got {duty}")
        on_mean, off_mean = duty * cycle, (1.0 - duty) * cycle
        sig = gen_random_pwm(
            (off_mean * (1 - spread), off_mean * (1 + spread)),
            (on_mean * (1 - spread), on_mean * (1 + spread)),
            horizon, seed + idx,
        )
        signals.append(sig)
        jobs.append(SimJob(plant, K, sched, sig, noise, cfg))

    rows = []
    for duty, sig, trace in zip(duty_cycles, signals, run_batch(jobs, workers)):
        rows.append(SweepRow(
            duty_cycle=float(duty),
            failure_rate=resolve_attempts(sched, sig, horizon).failure_rate,
            diverged=trace.diverged,
            sup_x=float(np.max(trace.x_norm)),
        ))
        logger.info("sweep %s duty=%.2f failure=%.3f diverged=%s",
                    cfg.controller_kind.value, duty, rows[-1].failure_rate, trace.diverged)
    return rows


def write_trace_csv(trace: SimTrace, path: Union[str, Path]) -> Path:
    """t,x1..xn,est1..estn,u1..um,dos,attempt,success,err_norm; flags as 0/1"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = (['t'] + [f'x{i + 1}' for i in range(trace.n)]
              + [f'est{i + 1}' for i in range(trace.n)]
              + [f'u{i + 1}' for i in range(trace.m)]
              + ['dos', 'attempt', 'success', 'err_norm'])
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for i in range(len(trace)):
            writer.writerow(
                [repr(float(trace.t[i]))]
                + [repr(float(v)) for v in trace.x[i]]
                + [repr(float(v)) for v in trace.est[i]]
                + [repr(float(v)) for v in trace.u[i]]
                + [int(trace.dos[i]), int(trace.attempt[i]), int(trace.success[i]),
                   repr(float(trace.err_norm[i]))]
            )
    return path
