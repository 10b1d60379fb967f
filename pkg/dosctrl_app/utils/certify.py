#!/usr/bin/env python3
"""
Certification Module

Closed-form certificates for the networked loop under DoS:

- the Lyapunov certificate (P and the scalars γ1, γ2, γ3, α1, α2, ‖Φ‖, μ_A)
- the admissible sampling periods for a given σ and the minimal σ that
  admits a given period
- the DoS tolerance of static feedback, 1/T + Δ/τ_D < ω1/(ω1 + ω2)
- the error gains ρ (analog) and ρ̂, ρ̃ (digital) and the ISS constants
- the verdict of each controller against a DoS budget

Nothing is rounded here; presentation code rounds.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .control import ControllerKind, Gain, Plant
from .dos import DosBudget, dos_free_deadline
from .errors import DomainError, InfeasibleError
from .matkit import as_mat, log_norm_2, lyap_solve, spectral_norm, sym_eig_extremes

logger = logging.getLogger('dosctrl.certify')

BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class LyapCert:
    """Lyapunov certificate of Φ = A + BK for the design matrix Q_L"""
    Q_L: np.ndarray = field(repr=False)
    P: np.ndarray = field(repr=False)
    Phi: np.ndarray = field(repr=False)
    gamma1: float
    gamma2: float
    gamma3: float
    alpha1: float
    alpha2: float
    phi_norm: float
    mu_A: float

    def scalars(self) -> Dict[str, float]:
        return {
            'gamma1': self.gamma1, 'gamma2': self.gamma2, 'gamma3': self.gamma3,
            'alpha1': self.alpha1, 'alpha2': self.alpha2,
            'phi_norm': self.phi_norm, 'mu_A': self.mu_A,
        }

    @property
    def kappa1(self) -> float:
        """max{‖Φ‖, 1}"""
        return max(self.phi_norm, 1.0)


@dataclass(frozen=True)
class IssConstants:
    """Envelope V(x(t)) <= e^{-ω1 (t - z_0)} V(x(z_0)) + (γ5/ω1) ‖w‖²"""
    gamma4: float
    gamma5: float
    omega1: float


def build_cert(plant: Plant, K: Gain, Q_L=None) -> LyapCert:
    """Solve Φᵀ P + P Φ + Q_L = 0 and collect the certificate scalars"""
    Phi = K.closed_loop(plant)
    Q_L = np.eye(plant.n) if Q_L is None else as_mat(Q_L, "Q_L")
    P = lyap_solve(Phi, Q_L)

    gamma1, _ = sym_eig_extremes(Q_L)
    alpha1, alpha2 = sym_eig_extremes(P)
    cert = LyapCert(
        Q_L=Q_L,
        P=P,
        Phi=Phi,
        gamma1=gamma1,
        gamma2=spectral_norm(2.0 * P @ plant.B @ K.K),
        gamma3=spectral_norm(2.0 * P),
        alpha1=alpha1,
        alpha2=alpha2,
        phi_norm=spectral_norm(Phi),
        mu_A=log_norm_2(plant.A),
    )
    logger.debug("certificate: %s", cert.scalars())
    return cert


def sigma_max(cert: LyapCert) -> Optional[float]:
    """Supremum γ1/γ2 of admissible σ; None (unbounded) when γ2 = 0"""
    if cert.gamma2 == 0:
        return None
    return cert.gamma1 / cert.gamma2


def hold_growth(mu_A: float, period: float) -> float:
    """
    Growth of ∫_0^δ e^{A τ} dτ in norm: (e^{μ_A δ} - 1)/μ_A when μ_A > 0,
    bounded by δ when μ_A <= 0.
    """
    if mu_A > 0:
        return math.expm1(mu_A * period) / mu_A
    return period


def _period_bound_for_ratio(cert: LyapCert, ratio: float) -> float:
    """Largest period with hold_growth(period) <= ratio / max{‖Φ‖, 1}"""
    scaled = ratio / cert.kappa1
    if cert.mu_A > 0:
        return math.log1p(scaled * cert.mu_A) / cert.mu_A
    return scaled


def delta_bound(cert: LyapCert, sigma: Optional[float]) -> float:
    """
    Largest sampling period admissible for σ.

    Shared by the static-feedback transmission period and the digital
    controller tick. sigma=None means the σ → ∞ limit, only valid when
    γ2 = 0.
    """
    s_max = sigma_max(cert)
    if sigma is None:
        if s_max is not None:
            raise DomainError("sigma must be given when gamma2 > 0")
        return _period_bound_for_ratio(cert, 1.0)
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    if s_max is not None and sigma > s_max + BOUND_SLACK:
        raise DomainError(f"sigma = {sigma} exceeds gamma1/gamma2 = {s_max}")
    return _period_bound_for_ratio(cert, sigma / (1.0 + sigma))


def sigma_for_period(cert: LyapCert, period: float) -> float:
    """
    Smallest σ whose period bound admits the given period.

    Inverts σ/(1+σ) = max{‖Φ‖, 1} · hold_growth(period). Raises
    InfeasibleError when no admissible σ < γ1/γ2 exists.
    """
    if not period > 0:
        raise DomainError(f"period must be positive, got {period}")
    ratio = cert.kappa1 * hold_growth(cert.mu_A, period)
    if ratio >= 1.0:
        raise InfeasibleError(f"period {period} is too long for any sigma")
    sigma = ratio / (1.0 - ratio)
    s_max = sigma_max(cert)
    if s_max is not None and sigma >= s_max:
        raise InfeasibleError(
            f"period {period} needs sigma = {sigma:.6g} >= gamma1/gamma2 = {s_max:.6g}"
        )
    return sigma


def _static_ratio(cert: LyapCert, sigma: float) -> float:
    omega1 = (cert.gamma1 - cert.gamma2 * sigma) / (2.0 * cert.alpha2)
    omega2 = 2.0 * cert.gamma2 / cert.alpha1
    return omega1 / (omega1 + omega2)


def static_bound(cert: LyapCert, delta: float) -> Tuple[float, float]:
    """
    DoS tolerance of static feedback at transmission period Δ.

    Returns (σ_used, ω1/(ω1+ω2)) with σ_used the smallest σ admitting Δ.
    """
    sigma = sigma_for_period(cert, delta)
    return sigma, _static_ratio(cert, sigma)


def static_bound_envelope(cert: LyapCert) -> float:
    """σ → 0 limit of the static tolerance (upper envelope as Δ → 0)"""
    return _static_ratio(cert, 0.0)


def rho_analog(cert: LyapCert, Q_deadline: float, delta: float) -> float:
    """Gain ρ with ‖e(t)‖ <= ρ ‖w_t‖∞ for t >= z_0 (analog predictor)"""
    if Q_deadline < 0 or not delta > 0:
        raise DomainError(f"need Q >= 0 and Δ > 0, got Q={Q_deadline}, Δ={delta}")
    span = Q_deadline + delta
    if cert.mu_A <= 0:
        return 1.0 + span
    return (1.0 + 1.0 / cert.mu_A) * math.exp(cert.mu_A * span)


def rho_digital(cert: LyapCert, sigma: float, tick: float, rho: float) -> Tuple[float, float]:
    """
    Gains (ρ̂, ρ̃) with ‖φ(t)‖ <= σ‖x(t)‖ + ρ̃ ‖w_t‖∞ (digital predictor).

    ρ̂ = max{e^{μ_A δ}, 1}, ρ̃ = σ + ρ̂ ρ (1 + σ).
    """
    bound = delta_bound(cert, sigma)
    if tick > bound + BOUND_SLACK:
        raise InfeasibleError(f"controller tick {tick} exceeds the bound {bound:.6g} for sigma={sigma}")
    rho_hat = max(math.exp(cert.mu_A * tick), 1.0)
    return rho_hat, sigma + rho_hat * rho * (1.0 + sigma)


def iss_constants(cert: LyapCert, rho: float, digital: bool = False,
                  sigma: float = 0.0) -> IssConstants:
    """
    ISS constants γ4, γ5, ω1.

    Analog: γ4 = γ2 ρ + γ3, ω1 = γ1/(2α2), γ5 = γ4²/(2γ1).
    Digital: γ1 becomes γ1 - σγ2 and ρ is ρ̃.
    """
    decay = cert.gamma1
    if digital:
        decay = cert.gamma1 - sigma * cert.gamma2
        if decay <= 0:
            raise InfeasibleError(f"gamma1 - sigma*gamma2 = {decay:.6g} is not positive")
    gamma4 = cert.gamma2 * rho + cert.gamma3
    return IssConstants(
        gamma4=gamma4,
        gamma5=gamma4 ** 2 / (2.0 * decay),
        omega1=decay / (2.0 * cert.alpha2),
    )


def iss_bound(consts: IssConstants, V0: float, elapsed, w_sup) -> Any:
    """e^{-ω1 t} V0 + (γ5/ω1) w_sup²; vectorizes over elapsed and w_sup"""
    elapsed = np.asarray(elapsed, dtype=float)
    w_sup = np.asarray(w_sup, dtype=float)
    return np.exp(-consts.omega1 * elapsed) * V0 + (consts.gamma5 / consts.omega1) * w_sup ** 2


def main_lhs(budget: DosBudget, delta: float) -> float:
    """1/T + Δ/τ_D with unbounded parts contributing exactly 0"""
    return budget.condition_lhs(delta)


@dataclass
class RobustnessReport:
    """Every certification scalar plus the verdict of each controller"""
    controller_kind: str
    delta: float
    main_lhs: float
    sigma_max: Optional[float]
    delta_bound: float
    static_sigma: Optional[float]
    static_bound: Optional[float]
    Q_deadline: Optional[float] = None
    sigma: Optional[float] = None
    tick: Optional[float] = None
    rho: Optional[float] = None
    rho_hat: Optional[float] = None
    rho_tilde: Optional[float] = None
    gamma4: Optional[float] = None
    gamma5: Optional[float] = None
    omega1: Optional[float] = None
    verdicts: Dict[str, bool] = field(default_factory=dict)
    certificate: Dict[str, float] = field(default_factory=dict)
    budget: Dict[str, Optional[float]] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.verdicts.get(self.controller_kind, False)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['certified'] = self.certified
        return data


def verdict(cert: LyapCert, budget: DosBudget, delta: float, controller_kind,
            tick: Optional[float] = None, sigma: Optional[float] = None) -> RobustnessReport:
    """
    Certify each controller against a DoS budget.

    Predictors are certified iff 1/T + Δ/τ_D < 1 (the digital one also needs
    an admissible tick). Static feedback is certified iff the left side is
    below ω1/(ω1+ω2) at the smallest σ admitting Δ. ρ, ρ̃ and the ISS
    constants are filled in for the requested controller when they exist.
    """
    kind = ControllerKind.parse(controller_kind)
    lhs = main_lhs(budget, delta)
    s_max = sigma_max(cert)

    report = RobustnessReport(
        controller_kind=kind.value,
        delta=delta,
        main_lhs=lhs,
        sigma_max=s_max,
        delta_bound=delta_bound(cert, s_max),
        static_sigma=None,
        static_bound=None,
        tick=tick,
        certificate=cert.scalars(),
        budget=budget.to_dict(),
    )

    # static feedback
    try:
        report.static_sigma, report.static_bound = static_bound(cert, delta)
        static_ok = lhs < report.static_bound
    except InfeasibleError as e:
        report.notes.append(f"static: {e}")
        static_ok = False

    predictor_ok = lhs < 1.0
    if predictor_ok:
        report.Q_deadline = dos_free_deadline(budget, delta)
        report.rho = rho_analog(cert, report.Q_deadline, delta)
    else:
        report.notes.append(f"1/T + Δ/τ_D = {lhs:.6g} >= 1: no predictor can be certified")

    # digital predictor: σ from the caller, else the smallest σ admitting the tick
    digital_ok = predictor_ok
    if tick is not None:
        try:
            report.sigma = sigma if sigma is not None else sigma_for_period(cert, tick)
            if predictor_ok:
                report.rho_hat, report.rho_tilde = rho_digital(cert, report.sigma, tick, report.rho)
        except (InfeasibleError, DomainError) as e:
            report.notes.append(f"digital: {e}")
            digital_ok = False
    elif kind is ControllerKind.DIGITAL:
        report.notes.append("digital: no controller tick given")
        digital_ok = False

    report.verdicts = {
        ControllerKind.STATIC.value: static_ok,
        ControllerKind.ANALOG.value: predictor_ok,
        ControllerKind.DIGITAL.value: digital_ok,
    }

    if kind is ControllerKind.ANALOG and report.rho is not None:
        consts = iss_constants(cert, report.rho)
    elif kind is ControllerKind.DIGITAL and report.rho_tilde is not None:
        consts = iss_constants(cert, report.rho_tilde, digital=True, sigma=report.sigma)
    else:
        consts = None
    if consts is not None:
        report.gamma4, report.gamma5, report.omega1 = consts.gamma4, consts.gamma5, consts.omega1

    logger.info(
        "verdict %s: lhs=%.4f static=%s analog=%s digital=%s",
        kind.value, lhs, static_ok, predictor_ok, digital_ok
    )
    return report
