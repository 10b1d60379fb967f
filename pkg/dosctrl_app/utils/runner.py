#!/usr/bin/env python3
"""
Command Runner Module

The four toolkit commands (certify, simulate, dos-fit, reproduce-iv), shared
by the batch CLI and the Django management commands. Each command writes
its documents under an output directory, renders a summary table on
stderr, and returns (exit_code, path of the main document).
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from .certify import build_cert, verdict
from .conf import get_setting
from .dos import DosBudget, count_transitions, dos_free_deadline, fit_budget, read_dos_csv
from .errors import ConfigError, InfeasibleError
from .logger import OperationType, RunLogger
from .reproduction import reproduce
from .scenario import apply_seed, load_scenario, resolve_seed
from .sim import SimJob, failure_tolerance_sweep, metrics, run_batch, write_trace_csv

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CERTIFIED = 2

DEFAULT_DUTY_CYCLES = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8)

CommandResult = Tuple[int, Path]


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def _finite(value):
    """Map non-finite floats to None so documents stay strict JSON"""
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_json(data: Dict[str, Any], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(_finite(data), f, indent=2, default=_json_default)
    return path


def optional_float(value: str) -> Optional[float]:
    """Float argument where 'inf' or 'none' means unbounded"""
    if value.strip().lower() in ('inf', 'none', 'null', ''):
        return None
    return float(value)


def output_dir(out: Optional[Union[str, Path]]) -> Path:
    path = Path(out) if out else Path(get_setting('DOSCTRL_OUT_DIR', 'out'))
    path.mkdir(parents=True, exist_ok=True)
    return path


def _fmt(value) -> str:
    if value is None:
        return "∞ / n.a."
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def _table(title: str, rows: Dict[str, Any]) -> Table:
    table = Table(title=title, show_header=True, header_style="bold magenta")
    table.add_column("Quantity", style="cyan", justify="right")
    table.add_column("Value", style="green")
    for key, value in rows.items():
        table.add_row(key, _fmt(value))
    return table


def cmd_certify(config: Union[str, Path], out: Optional[Union[str, Path]] = None,
                seed: Optional[int] = None, console: Optional[Console] = None,
                run_logger: Optional[RunLogger] = None) -> CommandResult:
    """Certify the scenario's controller; exit 0 if certified, 2 if not"""
    console = console or Console(stderr=True)
    scenario = apply_seed(load_scenario(config), seed)
    cert = build_cert(scenario.plant(), scenario.gain(), scenario.Q_L)
    budget = scenario.dos_budget()
    report = verdict(cert, budget, scenario.delta, scenario.controller,
                     tick=scenario.tick, sigma=scenario.sigma)

    path = write_json(report.to_dict(), output_dir(out) / 'report.json')
    if run_logger:
        run_logger.log_artifact('report', path, OperationType.CERTIFY)

    table = _table("Robustness report", {
        'controller': report.controller_kind,
        '1/T + Δ/τ_D': report.main_lhs,
        'σ_max': report.sigma_max,
        'δ bound (σ_max)': report.delta_bound,
        'static bound': report.static_bound,
        'Q deadline': report.Q_deadline,
        'ρ': report.rho,
        'ρ̃': report.rho_tilde,
        'ω1': report.omega1,
        **{f'{kind} certified': ok for kind, ok in report.verdicts.items()},
    })
    console.print(table)
    for note in report.notes:
        console.print(f"[yellow]{note}[/yellow]")
    return (EXIT_OK if report.certified else EXIT_NOT_CERTIFIED), path


def cmd_simulate(config: Union[str, Path], out: Optional[Union[str, Path]] = None,
                 seed: Optional[int] = None, sweep: bool = False,
                 duty_cycles: Sequence[float] = DEFAULT_DUTY_CYCLES,
                 console: Optional[Console] = None,
                 run_logger: Optional[RunLogger] = None) -> CommandResult:
    """Simulate the scenario (or sweep duty cycles); divergence is a result, not an error"""
    console = console or Console(stderr=True)
    scenario = apply_seed(load_scenario(config), seed)
    out_path = output_dir(out)

    if sweep:
        rows = failure_tolerance_sweep(
            scenario.plant(), scenario.gain(), scenario.schedule(), scenario.controller,
            duty_cycles, seed=scenario.dos_seed(), horizon=scenario.t_end, x0=scenario.x0,
            noise=scenario.noise_spec(), b=scenario.b, h_sim=scenario.h_sim,
        )
        path = write_json({'controller': scenario.controller.value,
                           'rows': [vars(r) for r in rows]}, out_path / 'sweep.json')
        table = Table(title=f"Failure tolerance ({scenario.controller.value})",
                      header_style="bold magenta")
        for column in ("duty cycle", "failure rate", "diverged", "sup ‖x‖"):
            table.add_column(column)
        for r in rows:
            table.add_row(_fmt(r.duty_cycle), _fmt(r.failure_rate), _fmt(r.diverged), f"{r.sup_x:.3g}")
        console.print(table)
        if run_logger:
            run_logger.log_artifact('sweep', path, OperationType.SWEEP)
        return EXIT_OK, path

    sig = scenario.signal()
    job = SimJob(scenario.plant(), scenario.gain(), scenario.schedule(), sig,
                 scenario.noise_spec(), scenario.sim_config())
    trace = run_batch([job], workers=1)[0]
    result = metrics(trace, sig, scenario.t_end, scenario.delta)

    trace_path = write_trace_csv(trace, out_path / 'trace.csv')
    data = result.to_dict()
    data['seed'] = {'dos': scenario.dos_seed(), 'noise': job.noise.seed}
    data['trace_digest'] = trace.digest()
    data['trace'] = str(trace_path)
    path = write_json(data, out_path / 'metrics.json')
    if run_logger:
        run_logger.log_artifact('trace', trace_path, OperationType.SIMULATE)
        run_logger.log_artifact('metrics', path, OperationType.SIMULATE)

    console.print(_table("Simulation metrics", {
        'controller': result.controller_kind,
        'n(0, horizon)': result.transitions,
        '|Ξ(0, horizon)|': result.dos_measure,
        'τ̄_D': result.tau_D_bar,
        'T̄': result.T_bar,
        'failure rate': result.failure_rate,
        'sup ‖x‖': result.sup_x,
        'final ‖x‖': result.final_x,
        'sup error after z_0': result.sup_err_after_z0,
        'diverged': result.diverged,
    }))
    return EXIT_OK, path


def cmd_dos_fit(trace_file: Union[str, Path], tau_D: Optional[float] = None,
                T: Optional[float] = None, delta: Optional[float] = None,
                horizon: Optional[float] = None, out: Optional[Union[str, Path]] = None,
                console: Optional[Console] = None,
                run_logger: Optional[RunLogger] = None) -> CommandResult:
    """Minimal (η, κ) of an `h,tau` trace for the given τ_D and T"""
    console = console or Console(stderr=True)
    sig = read_dos_csv(trace_file)
    horizon = horizon if horizon is not None else sig.extent
    eta, kappa = fit_budget(sig, tau_D, T, horizon)
    budget = DosBudget(eta=eta, tau_D=tau_D, kappa=kappa, T=T)

    data: Dict[str, Any] = {
        **budget.to_dict(),
        'horizon': horizon,
        'intervals': len(sig),
        'transitions': count_transitions(sig, 0.0, horizon),
        'repairs': sig.repairs,
    }
    if delta is not None:
        data['delta'] = delta
        data['main_lhs'] = budget.condition_lhs(delta)
        data['well_posed'] = budget.is_well_posed(delta)
        try:
            data['Q_deadline'] = dos_free_deadline(budget, delta)
            data['feasible'] = True
        except InfeasibleError:
            data['Q_deadline'] = None
            data['feasible'] = False

    path = write_json(data, output_dir(out) / 'budget.json')
    if run_logger:
        run_logger.log_artifact('budget', path, OperationType.DOS_FIT)
    console.print(_table("DoS budget", {k: v for k, v in data.items()}))
    return EXIT_OK, path


def cmd_reproduce_iv(out: Optional[Union[str, Path]] = None, seed: Optional[int] = None,
                     workers: Optional[int] = None, console: Optional[Console] = None,
                     run_logger: Optional[RunLogger] = None) -> CommandResult:
    """Run the embedded benchmark and write summary.json plus every trace"""
    console = console or Console(stderr=True)
    out_path = output_dir(out)
    result = reproduce(seed=resolve_seed(seed), out_dir=out_path, workers=workers)
    path = write_json(result.summary, out_path / 'summary.json')
    if run_logger:
        run_logger.log_artifact('summary', path, OperationType.REPRODUCE)

    console.print(_table("Certificate", result.summary['constants']))
    runs = Table(title="Controllers", header_style="bold magenta")
    for column in ("run", "failure rate", "sup ‖x‖ (t ≥ 5)", "sup error", "diverged"):
        runs.add_column(column)
    for name, m in result.summary['runs'].items():
        runs.add_row(name, _fmt(m['failure_rate']), _fmt(m['sup_x_settled']),
                     _fmt(m['sup_err_after_z0']), _fmt(m['diverged']))
    console.print(runs)
    dos = result.summary['dos']
    console.print(Panel(
        f"seed {dos['seed']}: failure rate {dos['failure_rate']:.3f}, "
        f"1/T̄ + Δ/τ̄_D = {dos['averaged_lhs']:.4f}",
        title="[bold]DoS realization[/bold]", border_style="blue"
    ))
    return EXIT_OK, path


def run_command(name: str, options: Dict[str, Any], console: Optional[Console] = None,
                run_logger: Optional[RunLogger] = None) -> CommandResult:
    """Dispatch by command name; options use the argparse destination names"""
    common = {'console': console, 'run_logger': run_logger}
    if name == 'certify':
        return cmd_certify(options['config'], options.get('out'), options.get('seed'), **common)
    if name == 'simulate':
        return cmd_simulate(options['config'], options.get('out'), options.get('seed'),
                            sweep=options.get('sweep', False),
                            duty_cycles=options.get('duty_cycles') or DEFAULT_DUTY_CYCLES,
                            **common)
    if name == 'dos-fit':
        return cmd_dos_fit(options['trace'], options.get('tau_D'), options.get('T'),
                           options.get('delta'), options.get('horizon'), options.get('out'),
                           **common)
    if name == 'reproduce-iv':
        return cmd_reproduce_iv(options.get('out'), options.get('seed'),
                                options.get('workers'), **common)
    raise ConfigError(f"unknown command '{name}'")
