#!/usr/bin/env python3
"""
Controller Module

The three control laws for the networked loop:

- static: u = K y(z_m) held between successful transmissions, 0 before z_0
- analog predictor: x̂ follows the plant model between transmissions and
  is reset to y(z_m) at each success; u = K x̂
- digital predictor: the same idea sampled every δ = Δ/b, with a reset
  variable α that takes the fresh measurement at success ticks
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from .errors import DimensionError, DomainError, InputContractError
from .matkit import as_mat, mat_exp, zoh_discretize


class ControllerKind(Enum):
    """Control laws supported by the simulator and the certifier"""
    STATIC = "static"
    ANALOG = "analog"
    DIGITAL = "digital"

    @classmethod
    def parse(cls, value) -> 'ControllerKind':
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            choices = ', '.join(k.value for k in cls)
            raise DomainError(f"unknown controller kind '{value}' (expected one of {choices})")


@dataclass(frozen=True)
class Plant:
    """ẋ = A x + B u + d, with full-state measurement y = x + n"""
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = as_mat(self.A, "A")
        B = as_mat(self.B, "B")
        if A.shape[0] != A.shape[1]:
            raise DimensionError(f"A must be square, got {A.shape}")
        if B.shape[0] != A.shape[0]:
            raise DimensionError(f"B needs {A.shape[0]} rows, got {B.shape}")
        object.__setattr__(self, 'A', A)
        object.__setattr__(self, 'B', B)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]


@dataclass(frozen=True)
class Gain:
    """State-feedback matrix K (m x n)"""
    K: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'K', as_mat(self.K, "K"))

    def check(self, plant: Plant):
        if self.K.shape != (plant.m, plant.n):
            raise DimensionError(
                f"K must be {plant.m}x{plant.n} for this plant, got {self.K.shape}"
            )

    def closed_loop(self, plant: Plant) -> np.ndarray:
        """Φ = A + BK"""
        self.check(plant)
        return plant.A + plant.B @ self.K


def _vector(v, size: int, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.shape != (size,):
        raise DimensionError(f"{name} must have length {size}, got {arr.shape}")
    return arr


@dataclass(frozen=True)
class StaticState:
    """Last received measurement, None before the first success"""
    last_y: Optional[np.ndarray] = None

    def receive(self, y) -> 'StaticState':
        return StaticState(np.asarray(y, dtype=float).reshape(-1).copy())


def static_output(st: StaticState, K: Gain) -> np.ndarray:
    """u = 0 before z_0, K·y(z_m) afterwards"""
    if st.last_y is None:
        return np.zeros(K.K.shape[0])
    return K.K @ st.last_y


@dataclass(frozen=True)
class AnalogPredState:
    """Impulsive predictor state x̂, right-continuous at reset instants"""
    xhat: np.ndarray

    @classmethod
    def initial(cls, n: int) -> 'AnalogPredState':
        return cls(np.zeros(n))


def analog_reset(st: AnalogPredState, y) -> AnalogPredState:
    """x̂(z_m) = y(z_m)"""
    return AnalogPredState(_vector(y, len(st.xhat), "y").copy())


def analog_flow(st: AnalogPredState, plant: Plant, K: Gain, dt: float) -> AnalogPredState:
    """Advance x̂ by dt with no reset in between: x̂ ← e^{Φ dt} x̂"""
    if not dt > 0:
        raise DomainError(f"flow length must be positive, got {dt}")
    Phi = K.closed_loop(plant)
    return AnalogPredState(mat_exp(Phi, dt) @ st.xhat)


@dataclass(frozen=True)
class DigitalPredState:
    """
    Sampled-data predictor running every delta = Δ/b.

    A_d and B_d are the zero-order-hold matrices over one controller tick.
    """
    xhat: np.ndarray
    alpha: np.ndarray
    delta: float
    b: int
    A_d: np.ndarray = field(repr=False)
    B_d: np.ndarray = field(repr=False)

    @classmethod
    def initial(cls, plant: Plant, period: float, b: int) -> 'DigitalPredState':
        """x̂(0) = 0 with controller tick δ = period / b"""
        if int(b) != b or b < 1:
            raise DomainError(f"b must be a positive integer, got {b}")
        if not period > 0:
            raise DomainError(f"transmission period must be positive, got {period}")
        delta = period / int(b)
        A_d, B_d = zoh_discretize(plant.A, plant.B, delta)
        zeros = np.zeros(plant.n)
        return cls(zeros, zeros.copy(), delta, int(b), A_d, B_d)


def digital_step(st: DigitalPredState, plant: Plant, K: Gain, is_success: bool,
                 y=None) -> Tuple[DigitalPredState, np.ndarray]:
    """
    One controller tick at qδ.

    α = y if the tick carries a successful transmission, else x̂;
    u = Kα (held over [qδ, (q+1)δ)); x̂ ← A_δ α + B_δ u.
    """
    if is_success and y is None:
        raise InputContractError("a successful tick needs the measurement y")
    if is_success:
        alpha = _vector(y, plant.n, "y").copy()
    else:
        alpha = st.xhat
    u = K.K @ alpha
    xhat_next = st.A_d @ alpha + st.B_d @ u
    return replace(st, xhat=xhat_next, alpha=alpha), u
