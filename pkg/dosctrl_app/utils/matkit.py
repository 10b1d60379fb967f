#!/usr/bin/env python3
"""
Matrix Kit Module

Dense small-dimension linear algebra used by every other module:
matrix exponentials, zero-order-hold integrals, logarithmic and spectral
norms, and the continuous-time Lyapunov solve behind the certificates.
"""

import logging
from typing import Tuple

import numpy as np
from scipy import linalg

from .conf import get_setting
from .errors import CertificationError, DimensionError, DomainError

logger = logging.getLogger('dosctrl.matkit')

SYMMETRY_TOLERANCE = 1e-12
LYAPUNOV_RESIDUAL_TOLERANCE = 1e-9


def as_mat(M, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D float array"""
    arr = np.atleast_2d(np.asarray(M, dtype=float))
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    return arr


def _square(M, name: str) -> np.ndarray:
    arr = as_mat(M, name)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {arr.shape}")
    return arr


def mat_exp(M, t: float = 1.0) -> np.ndarray:
    """Return e^{M t} (Padé scaling-and-squaring)"""
    arr = _square(M, "M")
    if not np.isfinite(t):
        raise DomainError(f"time must be finite, got {t}")
    return linalg.expm(arr * t)


def _augmented_exp(A: np.ndarray, B: np.ndarray, delta: float) -> np.ndarray:
    n, m = B.shape
    aug = np.zeros((n + m, n + m))
    aug[:n, :n] = A
    aug[:n, n:] = B
    return linalg.expm(aug * delta)


def _check_hold_args(A, B, delta: float) -> Tuple[np.ndarray, np.ndarray]:
    A = _square(A, "A")
    B = as_mat(B, "B")
    if B.shape[0] != A.shape[0]:
        raise DimensionError(
            f"B has {B.shape[0]} rows but A is {A.shape[0]}x{A.shape[0]}"
        )
    if not np.isfinite(delta) or delta < 0:
        raise DomainError(f"hold length must be finite and non-negative, got {delta}")
    return A, B


def hold_integral(A, B, delta: float) -> np.ndarray:
    """
    Return ∫_0^δ e^{Aτ} B dτ.

    Read off the upper-right block of exp([[A, B], [0, 0]] δ), which is
    exact for piecewise-constant inputs.
    """
    A, B = _check_hold_args(A, B, delta)
    n = A.shape[0]
    return _augmented_exp(A, B, delta)[:n, n:]


def zoh_discretize(A, B, delta: float) -> Tuple[np.ndarray, np.ndarray]:
    """Return (A_δ, B_δ) = (e^{Aδ}, ∫_0^δ e^{Aτ} B dτ) from one exponential"""
    A, B = _check_hold_args(A, B, delta)
    n = A.shape[0]
    block = _augmented_exp(A, B, delta)
    return block[:n, :n], block[:n, n:]


def log_norm_2(A) -> float:
    """Logarithmic 2-norm: largest eigenvalue of the symmetric part (A+Aᵀ)/2"""
    arr = _square(A, "A")
    return float(np.max(linalg.eigvalsh((arr + arr.T) / 2.0)))


def spectral_norm(M) -> float:
    """Largest singular value"""
    arr = as_mat(M, "M")
    return float(linalg.svdvals(arr)[0])


def is_hurwitz(M, margin: float = None) -> bool:
    """True when every eigenvalue has real part below -margin"""
    if margin is None:
        margin = get_setting('HURWITZ_MARGIN', 1e-9)
    arr = _square(M, "M")
    return bool(np.max(np.linalg.eigvals(arr).real) < -margin)


def sym_eig_extremes(S) -> Tuple[float, float]:
    """Return (λ_min, λ_max) of a symmetric matrix"""
    arr = _square(S, "S")
    asym = float(np.max(np.abs(arr - arr.T)))
    if asym > SYMMETRY_TOLERANCE:
        raise DomainError(f"matrix is not symmetric (max |S - Sᵀ| = {asym:.3e})")
    eigs = linalg.eigvalsh(arr)
    return float(eigs[0]), float(eigs[-1])


def lyap_solve(Phi, Q_L) -> np.ndarray:
    """
    Solve ΦᵀP + PΦ + Q_L = 0 for the symmetric positive-definite P.

    Raises CertificationError when Φ is not Hurwitz or the solve does not
    meet the residual tolerance.
    """
    Phi = _square(Phi, "Phi")
    Q_L = _square(Q_L, "Q_L")
    if Q_L.shape != Phi.shape:
        raise DimensionError(f"Q_L shape {Q_L.shape} does not match Phi {Phi.shape}")

    q_min, _ = sym_eig_extremes(Q_L)
    if q_min <= 0:
        raise DomainError(f"Q_L must be positive definite (λ_min = {q_min:.3e})")

    if not is_hurwitz(Phi):
        max_re = float(np.max(np.linalg.eigvals(Phi).real))
        raise CertificationError(
            f"closed-loop matrix is not Hurwitz (max Re λ = {max_re:.6g})"
        )

    try:
        P = linalg.solve_continuous_lyapunov(Phi.T, -Q_L)
    except (linalg.LinAlgError, ValueError) as e:
        raise CertificationError(f"Lyapunov solve failed: {e}") from e

    P = (P + P.T) / 2.0
    residual = float(np.max(np.abs(Phi.T @ P + P @ Phi + Q_L)))
    scale = max(1.0, float(np.max(np.abs(Q_L))))
    if residual > LYAPUNOV_RESIDUAL_TOLERANCE * scale:
        raise CertificationError(f"Lyapunov residual too large: {residual:.3e}")

    logger.debug("Lyapunov solve residual %.3e", residual)
    return P
