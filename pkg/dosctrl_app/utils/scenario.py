#!/usr/bin/env python3
"""
Scenario Module

JSON scenario documents: plant, gain, transmission period, controller,
DoS source, noise and simulation settings. Matrices are nested row arrays,
times are seconds, and an unbounded τ_D or T is written as null.

Example:

    {
      "plant": {"A": [[1, 1], [0, 1]], "B": [[1, 0], [0, 1]]},
      "K": [[-2.1961, -0.7545], [-0.7545, -2.7146]],
      "delta": 0.1,
      "controller": "digital",
      "b": 10,
      "budget": {"tau_D": 0.96, "T": 1.29},
      "dos": {"kind": "random_pwm", "off_range": [0.15, 0.28], "on_range": [0.6, 0.9]},
      "noise": {"d_bound": 0.1, "n_bound": 0.1},
      "sim": {"x0": [1, 1], "t_end": 50},
      "seed": 7
    }
"""

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from .conf import get_setting
from .control import ControllerKind, Gain, Plant
from .dos import (DosBudget, DosSignal, fit_budget, gen_blocking_interval, gen_pulse_train,
                  gen_random_pwm, read_dos_csv)
from .errors import ConfigError, DosCtrlError
from .network import Schedule
from .sim import NoiseSpec, SimConfig

logger = logging.getLogger('dosctrl.scenario')

DOS_KINDS = ('none', 'file', 'random_pwm', 'pulse_train', 'blocking')
SCENARIO_KEYS = ('plant', 'K', 'Q_L', 'delta', 'controller', 'b', 'tick', 'sigma',
                 'budget', 'dos', 'noise', 'sim', 'seed')


@dataclass(frozen=True)
class DosSpec:
    """Where the DoS signal of a scenario comes from"""
    kind: str = 'none'
    path: Optional[str] = None
    off_range: Optional[Tuple[float, float]] = None
    on_range: Optional[Tuple[float, float]] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if self.kind not in DOS_KINDS:
            raise ConfigError(f"unknown dos kind '{self.kind}' (expected one of {', '.join(DOS_KINDS)})")
        if self.kind == 'file' and not self.path:
            raise ConfigError("dos kind 'file' needs a path")
        if self.kind == 'random_pwm' and (self.off_range is None or self.on_range is None):
            raise ConfigError("dos kind 'random_pwm' needs off_range and on_range")


@dataclass(frozen=True)
class Scenario:
    A: Any
    B: Any
    K: Any
    delta: float
    controller: ControllerKind = ControllerKind.ANALOG
    Q_L: Any = None
    b: int = 1
    sigma: Optional[float] = None
    budget: Dict[str, Optional[float]] = field(default_factory=dict)
    dos: DosSpec = field(default_factory=DosSpec)
    noise: Dict[str, Any] = field(default_factory=dict)
    x0: Tuple[float, ...] = ()
    t_end: float = 50.0
    h_sim: Optional[float] = None
    seed: Optional[int] = None
    base_dir: Optional[Path] = field(default=None, compare=False)

    def __post_init__(self):
        try:
            plant = self.plant()
            self.gain().check(plant)
            object.__setattr__(self, 'controller', ControllerKind.parse(self.controller))
        except DosCtrlError as e:
            raise ConfigError(f"invalid scenario: {e}") from e
        if not self.delta > 0:
            raise ConfigError(f"delta must be positive, got {self.delta}")
        if int(self.b) != self.b or self.b < 1:
            raise ConfigError(f"b must be a positive integer, got {self.b}")
        if self.Q_L is not None and np.shape(self.Q_L) != (plant.n, plant.n):
            raise ConfigError(f"Q_L must be {plant.n}x{plant.n}")
        if not self.x0:
            object.__setattr__(self, 'x0', tuple([1.0] * plant.n))
        elif len(self.x0) != plant.n:
            raise ConfigError(f"x0 must have length {plant.n}, got {len(self.x0)}")

    def plant(self) -> Plant:
        return Plant(self.A, self.B)

    def gain(self) -> Gain:
        return Gain(self.K)

    def schedule(self) -> Schedule:
        return Schedule(self.delta)

    @property
    def tick(self) -> Optional[float]:
        """Digital controller tick δ = Δ/b (None for the other controllers)"""
        if self.controller is ControllerKind.DIGITAL:
            return self.delta / self.b
        return None

    def dos_seed(self) -> int:
        if self.dos.seed is not None:
            return self.dos.seed
        return self.seed or 0

    def noise_spec(self) -> NoiseSpec:
        params = dict(self.noise)
        if params.get('seed') is None:
            params['seed'] = (self.seed or 0) + 1
        try:
            return NoiseSpec(**params)
        except TypeError as e:
            raise ConfigError(f"bad noise section: {e}") from e

    def sim_config(self, controller=None) -> SimConfig:
        return SimConfig(
            x0=self.x0,
            t_end=self.t_end,
            controller_kind=controller or self.controller,
            h_sim=self.h_sim,
            b=self.b,
        )

    def signal(self) -> DosSignal:
        spec = self.dos
        if spec.kind == 'file':
            path = Path(spec.path)
            if not path.is_absolute() and self.base_dir is not None:
                path = self.base_dir / path
            return read_dos_csv(path)
        if spec.kind == 'random_pwm':
            return gen_random_pwm(spec.off_range, spec.on_range, self.t_end, self.dos_seed())
        if spec.kind == 'pulse_train':
            return gen_pulse_train(self.delta, self.t_end)
        if spec.kind == 'blocking':
            return gen_blocking_interval(self.t_end)
        return DosSignal()

    def dos_budget(self, sig: Optional[DosSignal] = None) -> DosBudget:
        """
        Budget from the scenario; a missing eta or kappa is fitted on the
        DoS signal for the given τ_D and T.
        """
        tau_D = self.budget.get('tau_D')
        T = self.budget.get('T')
        eta = self.budget.get('eta')
        kappa = self.budget.get('kappa')
        if eta is None or kappa is None:
            sig = sig if sig is not None else self.signal()
            eta_fit, kappa_fit = fit_budget(sig, tau_D, T, max(self.t_end, sig.extent))
            eta = eta_fit if eta is None else eta
            kappa = kappa_fit if kappa is None else kappa
        return DosBudget(eta=eta, tau_D=tau_D, kappa=kappa, T=T)

    def with_seed(self, seed: int) -> 'Scenario':
        """Override every seed: DoS realization gets `seed`, noise `seed + 1`"""
        noise = dict(self.noise, seed=seed + 1)
        return replace(self, seed=seed, dos=replace(self.dos, seed=seed), noise=noise)

    def to_dict(self) -> Dict[str, Any]:
        dos = {'kind': self.dos.kind}
        for key in ('path', 'off_range', 'on_range', 'seed'):
            value = getattr(self.dos, key)
            if value is not None:
                dos[key] = list(value) if isinstance(value, tuple) else value
        data = {
            'plant': {'A': np.asarray(self.A, dtype=float).tolist(),
                      'B': np.asarray(self.B, dtype=float).tolist()},
            'K': np.asarray(self.K, dtype=float).tolist(),
            'delta': self.delta,
            'controller': self.controller.value,
            'b': self.b,
            'budget': dict(self.budget),
            'dos': dos,
            'noise': dict(self.noise),
            'sim': {'x0': list(self.x0), 't_end': self.t_end, 'h_sim': self.h_sim},
            'seed': self.seed,
        }
        if self.Q_L is not None:
            data['Q_L'] = np.asarray(self.Q_L, dtype=float).tolist()
        if self.sigma is not None:
            data['sigma'] = self.sigma
        return data


def _range(value, name: str) -> Optional[Tuple[float, float]]:
    if value is None:
        return None
    if len(value) != 2:
        raise ConfigError(f"{name} must be a [low, high] pair")
    return float(value[0]), float(value[1])


def _ticks_per_period(data: Dict[str, Any]) -> int:
    """b from the document; a digital tick δ is converted to b = Δ/δ"""
    b = data.get('b')
    tick = data.get('tick')
    if tick is None:
        return 1 if b is None else b
    tick = float(tick)
    if not tick > 0:
        raise ConfigError(f"tick must be positive, got {tick}")
    ratio = float(data['delta']) / tick
    ticks = int(round(ratio))
    if ticks < 1 or abs(ratio - ticks) > 1e-9 * max(1.0, ratio):
        raise ConfigError(f"tick {tick} does not divide delta {data['delta']} into whole ticks")
    if b is not None and b != ticks:
        raise ConfigError(f"b = {b} disagrees with tick {tick} (delta / tick = {ticks})")
    return ticks


def scenario_from_dict(data: Dict[str, Any], base_dir: Optional[Path] = None) -> Scenario:
    unknown = sorted(set(data) - set(SCENARIO_KEYS))
    if unknown:
        raise ConfigError(f"unknown scenario keys: {', '.join(unknown)}")
    try:
        plant = data['plant']
        dos = data.get('dos') or {}
        sim = data.get('sim') or {}
        return Scenario(
            A=plant['A'],
            B=plant['B'],
            K=data['K'],
            Q_L=data.get('Q_L'),
            delta=float(data['delta']),
            controller=data.get('controller', 'analog'),
            b=_ticks_per_period(data),
            sigma=data.get('sigma'),
            budget=dict(data.get('budget') or {}),
            dos=DosSpec(
                kind=dos.get('kind', 'none'),
                path=dos.get('path'),
                off_range=_range(dos.get('off_range'), 'off_range'),
                on_range=_range(dos.get('on_range'), 'on_range'),
                seed=dos.get('seed'),
            ),
            noise=dict(data.get('noise') or {}),
            x0=tuple(sim.get('x0') or ()),
            t_end=float(sim.get('t_end', 50.0)),
            h_sim=sim.get('h_sim'),
            seed=data.get('seed'),
            base_dir=base_dir,
        )
    except KeyError as e:
        raise ConfigError(f"scenario is missing {e}") from e
    except (TypeError, ValueError) as e:
        raise ConfigError(f"malformed scenario: {e}") from e


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read scenario {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: scenario must be a JSON object")
    logger.debug("loaded scenario %s", path)
    return scenario_from_dict(data, base_dir=path.parent)


def write_scenario(scenario: Scenario, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(scenario.to_dict(), f, indent=2)
    return path


def resolve_seed(flag: Optional[int], scenario: Optional[Scenario] = None) -> int:
    """--seed flag, then the scenario seed, then DOSCTRL_SEED, then 0"""
    if flag is not None:
        return int(flag)
    if scenario is not None and scenario.seed is not None:
        return int(scenario.seed)
    env_seed = get_setting('DOSCTRL_SEED', None)
    return int(env_seed) if env_seed is not None else 0


def apply_seed(scenario: Scenario, flag: Optional[int] = None) -> Scenario:
    """Apply the seed precedence; seeds written in the scenario win over DOSCTRL_SEED"""
    if flag is not None:
        return scenario.with_seed(int(flag))
    env_seed = get_setting('DOSCTRL_SEED', None)
    if scenario.seed is None and env_seed is not None:
        # only fills the top-level seed; dos.seed and noise.seed written in the file still apply
        return replace(scenario, seed=int(env_seed))
    return scenario
