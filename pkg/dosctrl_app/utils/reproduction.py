#!/usr/bin/env python3
"""
Reproduction Module

The embedded benchmark: a second-order unstable plant under a random PWM
jammer that blocks about 80% of the transmissions, run with the three
controllers. The exact sample paths are seed-dependent; the benchmark
checks aggregates (certificate constants, failure rate, averaged budget)
and qualitative outcomes (predictors bounded, static feedback diverges).
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from .certify import build_cert, delta_bound, sigma_max, static_bound, static_bound_envelope, verdict
from .control import ControllerKind, Gain, Plant
from .dos import (DosBudget, DosSignal, Range, averaged_budget, fit_budget, gen_random_pwm,
                  write_dos_csv)
from .errors import InfeasibleError
from .network import Schedule, resolve_attempts
from .sim import NoiseSpec, SimConfig, SimJob, SimTrace, metrics, run_batch, write_trace_csv

logger = logging.getLogger('dosctrl.reproduction')

A = [[1.0, 1.0], [0.0, 1.0]]
B = [[1.0, 0.0], [0.0, 1.0]]
K = [[-2.1961, -0.7545], [-0.7545, -2.7146]]
Q_L = [[1.0, 0.0], [0.0, 1.0]]

DELTA = 0.1
TICKS_PER_PERIOD = 10  # δ = 0.01
HORIZON = 50.0
X0 = (1.0, 1.0)
NOISE_BOUND = 0.1
LOW_NOISE_BOUND = 0.01

# reference averages of the benchmark attack: τ_D ≈ 0.96, T ≈ 1.29
REFERENCE_TAU_D = 0.96
REFERENCE_T = 1.29

OFF_RANGE: Range = (0.15, 0.28)
ON_RANGE: Range = (0.6, 0.9)
FAILURE_WINDOW: Range = (0.75, 0.85)
LHS_WINDOW: Range = (0.85, 0.95)

# static feedback counts as diverged once ‖x‖ passes this level
STATIC_DIVERGENCE_LIMIT = 1e6


def averaged_lhs(sig: DosSignal, horizon: float, delta: float) -> float:
    """1/T̄ + Δ/τ̄_D of a realization (undefined averages contribute 0)"""
    tau_bar, t_bar = averaged_budget(sig, horizon)
    return (0.0 if t_bar is None else 1.0 / t_bar) + (0.0 if tau_bar is None else delta / tau_bar)


def select_realization(off_range: Range = OFF_RANGE, on_range: Range = ON_RANGE,
                       horizon: float = HORIZON, seed: int = 0, delta: float = DELTA,
                       failure_window: Range = FAILURE_WINDOW,
                       lhs_window: Range = LHS_WINDOW,
                       max_tries: int = 1000) -> Tuple[DosSignal, int]:
    """
    First random PWM realization, trying seed, seed + 1, ..., whose failure
    rate and averaged 1/T̄ + Δ/τ̄_D both fall inside their windows.
    """
    sched = Schedule(delta)
    for candidate in range(seed, seed + max_tries):
        sig = gen_random_pwm(off_range, on_range, horizon, candidate)
        rate = resolve_attempts(sched, sig, horizon).failure_rate
        lhs = averaged_lhs(sig, horizon, delta)
        if failure_window[0] <= rate <= failure_window[1] and lhs_window[0] <= lhs <= lhs_window[1]:
            logger.info("DoS realization seed %d: failure rate %.3f, averaged lhs %.4f",
                        candidate, rate, lhs)
            return sig, candidate
    raise InfeasibleError(
        f"no realization in seeds {seed}..{seed + max_tries - 1} meets the failure and budget windows"
    )


@dataclass
class Reproduction:
    summary: Dict[str, Any]
    signal: DosSignal
    traces: Dict[str, SimTrace] = field(repr=False, default_factory=dict)


def reproduce(seed: int = 0, out_dir: Optional[Union[str, Path]] = None,
              workers: Optional[int] = None, h_sim: Optional[float] = None,
              horizon: float = HORIZON) -> Reproduction:
    """Run the benchmark; traces and the DoS realization are written when out_dir is given"""
    plant = Plant(A, B)
    gain = Gain(K)
    sched = Schedule(DELTA)
    tick = DELTA / TICKS_PER_PERIOD

    cert = build_cert(plant, gain, Q_L)
    s_max = sigma_max(cert)
    static_sigma, static_tol = static_bound(cert, DELTA)
    reference = DosBudget(tau_D=REFERENCE_TAU_D, T=REFERENCE_T)

    sig, dos_seed = select_realization(horizon=horizon, seed=seed)
    tau_bar, t_bar = averaged_budget(sig, horizon)
    eta, kappa = fit_budget(sig, tau_bar, t_bar, horizon)
    budget = DosBudget(eta=eta, tau_D=tau_bar, kappa=kappa, T=t_bar)
    report = verdict(cert, budget, DELTA, ControllerKind.DIGITAL, tick=tick)

    noise = NoiseSpec(d_bound=NOISE_BOUND, n_bound=NOISE_BOUND, seed=dos_seed + 1)
    low_noise = noise.scaled(LOW_NOISE_BOUND / NOISE_BOUND)

    def config(kind: ControllerKind, limit: Optional[float] = None) -> SimConfig:
        return SimConfig(x0=X0, t_end=horizon, controller_kind=kind, h_sim=h_sim,
                         b=TICKS_PER_PERIOD, divergence_limit=limit)

    jobs = {
        'analog': SimJob(plant, gain, sched, sig, noise, config(ControllerKind.ANALOG)),
        'digital': SimJob(plant, gain, sched, sig, noise, config(ControllerKind.DIGITAL)),
        'static': SimJob(plant, gain, sched, sig, noise,
                         config(ControllerKind.STATIC, STATIC_DIVERGENCE_LIMIT)),
        'analog_low_noise': SimJob(plant, gain, sched, sig, low_noise, config(ControllerKind.ANALOG)),
        'digital_low_noise': SimJob(plant, gain, sched, sig, low_noise, config(ControllerKind.DIGITAL)),
    }
    traces = dict(zip(jobs, run_batch(list(jobs.values()), workers)))

    runs = {name: metrics(trace, sig, horizon, DELTA).to_dict() for name, trace in traces.items()}
    summary: Dict[str, Any] = {
        'constants': {
            **cert.scalars(),
            'sigma_max': s_max,
            'delta_bound': delta_bound(cert, s_max),
            'static_sigma': static_sigma,
            'static_bound': static_tol,
            'static_bound_envelope': static_bound_envelope(cert),
            'reference_lhs': reference.condition_lhs(DELTA),
        },
        'dos': {
            'seed': dos_seed,
            'intervals': len(sig),
            'failure_rate': resolve_attempts(sched, sig, horizon).failure_rate,
            'averaged_lhs': averaged_lhs(sig, horizon, DELTA),
            **budget.to_dict(),
        },
        'certification': report.to_dict(),
        'runs': runs,
    }

    if out_dir is not None:
        out_dir = Path(out_dir)
        files = {'dos': str(write_dos_csv(sig, out_dir / 'dos.csv'))}
        for name, trace in traces.items():
            files[name] = str(write_trace_csv(trace, out_dir / f'trace_{name}.csv'))
        summary['files'] = files

    logger.info(
        "benchmark: analog sup|x|(t>=5)=%s digital=%s static diverged=%s",
        runs['analog']['sup_x_settled'], runs['digital']['sup_x_settled'], runs['static']['diverged']
    )
    return Reproduction(summary=summary, signal=sig, traces=traces)
