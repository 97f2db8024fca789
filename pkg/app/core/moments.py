"""
═══════════════════════════════════════════════════════════════════════════════
MODULE: app/core/moments.py
Fonction: Dynamique des seconds moments et écart quadratique moyen Δ(t)
Version: 1.0.0
═══════════════════════════════════════════════════════════════════════════════

Pour les variables sélectionnées φ = FX :

    Δ(t) = ‖Fα_t√P‖² + ⟨Σ, Re V(t)⟩,   α_t = e^{tA} − I,   Σ = FᵀF

où V est la solution nulle en 0 de V̇ = AV + VAᵀ + ℧ et P = Re Π la partie
réelle de la matrice des seconds moments initiaux Π = P + iΘ.

Développement à horizon court (dérivées en 0) :
    Δ(0) = 0,  Δ̇(0) = ‖FB‖²,  Δ̈(0) = 2(‖FA√P‖² + ⟨FB, FAB⟩)
et, si FB = 0, F·ReV(t)·Fᵀ ≈ (t³/3)·G BBᵀ Gᵀ.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config.settings import DECOHERENCE_SETTINGS, NUMERICS_SETTINGS
from app.core.errors import (
    DimensionError,
    DomainError,
    RankError,
    TrivialCaseError,
    UnphysicalStateError,
    ValidationError,
)
from app.core.numerics import (
    HermitianPair,
    as_matrix,
    expm,
    frobenius_inner,
    integrate_lyapunov,
    numerical_rank,
    sqrtm_psd,
    symmetry_gap,
)
from app.core.oqho_model import StateSpace

logger = logging.getLogger(__name__)


# ═══════════════════════════════════════════════════════════════════════════════
# CLASSES DE DONNÉES
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class DeviationSpec:
    """
    Fonctionnelle d'écart : F, Σ = FᵀF, P, √P et l'échelle ‖F√P‖².

    Attributs:
        F        : Matrice de sélection s×n
        Sigma    : FᵀF
        P        : Re Π (symétrique)
        sqrtP    : √P
        theta    : Θ du système (Im Π)
        ref_scale: ‖F√P‖²
        physical : P + iΘ ⪰ 0
    """

    F: np.ndarray
    Sigma: np.ndarray
    P: np.ndarray
    sqrtP: np.ndarray
    theta: np.ndarray
    ref_scale: float
    physical: bool = True


@dataclass(frozen=True)
class DeviationTrajectory:
    """
    Échantillons de Δ(t) sur une grille.

    Attributs:
        t_grid    : Instants
        delta     : Δ(t_i)
        state_term: ‖Fα_t√P‖²
        noise_term: ⟨Σ, Re V(t_i)⟩
        v_re_F    : F·ReV(t_i)·Fᵀ (s×s par instant)
        covariances: V(t_i)
    """

    t_grid: np.ndarray
    delta: np.ndarray
    state_term: np.ndarray
    noise_term: np.ndarray
    v_re_F: np.ndarray
    covariances: Tuple[HermitianPair, ...]


@dataclass(frozen=True)
class ShortHorizon:
    """Coefficients de Taylor de Δ en 0 et loi du troisième ordre."""

    delta0: float
    delta_dot0: float
    delta_ddot0: float
    leading_coefficient: float
    third_order_matrix: np.ndarray


# ═══════════════════════════════════════════════════════════════════════════════
# SPÉCIFICATION DE L'ÉCART
# ═══════════════════════════════════════════════════════════════════════════════

def min_eig_pi(P: np.ndarray, theta: np.ndarray) -> float:
    """Plus petite valeur propre de la matrice hermitienne Π = P + iΘ."""
    return float(np.linalg.eigvalsh(P + 1j * theta).min(initial=np.inf))


def deviation_spec(
    F: np.ndarray,
    P: np.ndarray,
    theta: np.ndarray,
    allow_unphysical: bool = False,
) -> DeviationSpec:
    """
    Prépare la fonctionnelle d'écart.

    Args:
        F               : s×n de rang plein ligne
        P               : Re Π, symétrique n×n
        theta           : Θ (n×n)
        allow_unphysical: Accepte P + iΘ indéfinie (avertissement seulement)

    Raises:
        DimensionError      : tailles incompatibles
        ValidationError     : P non symétrique
        UnphysicalStateError: P + iΘ non ⪰ 0
        TrivialCaseError    : ‖F√P‖² ≤ trivial_scale_tol
    """
    F = as_matrix(F, "F")
    P = as_matrix(P, "P")
    n = theta.shape[0]
    if P.shape != (n, n) or F.shape[1] != n:
        raise DimensionError(
            f"F {F.shape} et P {P.shape} incompatibles avec n = {n}"
        )
    if numerical_rank(F) < F.shape[0]:
        raise RankError("F doit être de rang plein ligne", {"rows": F.shape[0]})
    gap = symmetry_gap(P)
    if gap > NUMERICS_SETTINGS["hermitian_tol"] * (1.0 + np.max(np.abs(P))):
        raise ValidationError(
            f"P n'est pas symétrique (‖P − Pᵀ‖_max = {gap:.3e})", {"asymmetry": gap}
        )

    lam = min_eig_pi(P, theta)
    physical = lam >= -NUMERICS_SETTINGS["psd_tol"]
    if not physical:
        if not allow_unphysical:
            raise UnphysicalStateError(
                f"P + iΘ indéfinie (λ_min = {lam:.3e})", {"lambda_min": lam}
            )
        logger.warning("P + iΘ indéfinie acceptée | λ_min=%.3e", lam)

    sqrtP = sqrtm_psd(P)
    ref_scale = float(np.linalg.norm(F @ sqrtP) ** 2)
    if ref_scale <= DECOHERENCE_SETTINGS["trivial_scale_tol"]:
        raise TrivialCaseError(
            "‖F√P‖² ≈ 0 : décohérence triviale", {"ref_scale": ref_scale}
        )

    return DeviationSpec(
        F=F, Sigma=F.T @ F, P=P, sqrtP=sqrtP, theta=np.asarray(theta, dtype=float),
        ref_scale=ref_scale, physical=bool(physical),
    )


# ═══════════════════════════════════════════════════════════════════════════════
# TRAJECTOIRES
# ═══════════════════════════════════════════════════════════════════════════════

def _state_term(A: np.ndarray, spec: DeviationSpec, t: float) -> float:
    alpha = expm(A, t) - np.eye(A.shape[0])
    return float(np.linalg.norm(spec.F @ alpha @ spec.sqrtP) ** 2)


def deviation_trajectory(
    ss: StateSpace,
    spec: DeviationSpec,
    t_grid: Sequence[float],
) -> DeviationTrajectory:
    """
    Δ(t) sur `t_grid` (V intégrée par RK4).

    Returns:
        DeviationTrajectory
    """
    grid = np.asarray(t_grid, dtype=float)
    covariances = integrate_lyapunov(ss.A, ss.mho, grid)

    state = np.array([_state_term(ss.A, spec, t) for t in grid])
    noise = np.array([frobenius_inner(spec.Sigma, V.re) for V in covariances])
    v_re_F = np.stack([spec.F @ V.re @ spec.F.T for V in covariances])
    delta = state + noise

    if delta.min(initial=0.0) < -1e-10:
        logger.warning("Δ négatif sur la grille | min=%.3e", delta.min())
    logger.debug(
        "Trajectoire | points=%d | t_max=%.4g | Δ_max=%.3e",
        grid.size, grid[-1], delta.max(initial=0.0),
    )
    return DeviationTrajectory(
        t_grid=grid, delta=delta, state_term=state, noise_term=noise,
        v_re_F=v_re_F, covariances=tuple(covariances),
    )


def delta_at(
    ss: StateSpace,
    spec: DeviationSpec,
    t: float,
    start: Optional[Tuple[float, HermitianPair]] = None,
) -> Tuple[float, HermitianPair]:
    """
    Δ(t) en un instant isolé.

    Args:
        start: (t₀, V(t₀)) connu avec t₀ ≤ t ; V est alors propagée depuis t₀

    Returns:
        (Δ(t), V(t))
    """
    if t < 0.0:
        raise DomainError(f"t doit être ≥ 0, reçu {t}")
    t0, V0 = (0.0, None) if start is None else start
    if t == t0:
        V = V0 if V0 is not None else HermitianPair.zeros(ss.A.shape[0])
    else:
        V = integrate_lyapunov(ss.A, ss.mho, [0.0, t - t0], initial=V0)[-1]
    value = _state_term(ss.A, spec, t) + frobenius_inner(spec.Sigma, V.re)
    return float(value), V


def delta_rate(ss: StateSpace, spec: DeviationSpec, t: float, V: HermitianPair) -> float:
    """
    Δ̇(t) = 2⟨Fα_t√P, FAe^{tA}√P⟩ + ⟨Σ, A·ReV + ReV·Aᵀ + BBᵀ⟩, V = V(t).
    """
    E = expm(ss.A, t)
    alpha = E - np.eye(ss.A.shape[0])
    state_rate = 2.0 * frobenius_inner(
        spec.F @ alpha @ spec.sqrtP, spec.F @ ss.A @ E @ spec.sqrtP
    )
    v_rate = ss.A @ V.re + V.re @ ss.A.T + ss.mho.re
    return float(state_rate + frobenius_inner(spec.Sigma, v_rate))


def second_moment(ss: StateSpace, spec: DeviationSpec, t: float) -> HermitianPair:
    """
    Υ(t) = α_tΠα_tᵀ + V(t), seconds moments de X(t) − X(0).

    ⟨Σ, Re Υ(t)⟩ redonne Δ(t).
    """
    if t < 0.0:
        raise DomainError(f"t doit être ≥ 0, reçu {t}")
    n = ss.A.shape[0]
    alpha = expm(ss.A, t) - np.eye(n)
    V = integrate_lyapunov(ss.A, ss.mho, [0.0, t])[-1] if t > 0 else HermitianPair.zeros(n)
    re = alpha @ spec.P @ alpha.T + V.re
    im = alpha @ spec.theta @ alpha.T + V.im
    return HermitianPair(0.5 * (re + re.T), 0.5 * (im - im.T))


# ═══════════════════════════════════════════════════════════════════════════════
# HORIZON COURT
# ═══════════════════════════════════════════════════════════════════════════════

def covariance_derivatives(ss: StateSpace, k_max: int) -> List[HermitianPair]:
    """
    Dérivées V^{(k)}(0), k = 0…k_max :
    V(0) = 0, V̇(0) = ℧, V^{(k+1)}(0) = AV^{(k)}(0) + V^{(k)}(0)Aᵀ pour k ≥ 1.
    """
    if k_max < 0:
        raise DomainError(f"k_max doit être ≥ 0, reçu {k_max}")
    n = ss.A.shape[0]
    derivatives = [HermitianPair.zeros(n)]
    current = ss.mho
    for _ in range(k_max):
        derivatives.append(current)
        current = HermitianPair(
            ss.A @ current.re + current.re @ ss.A.T,
            ss.A @ current.im + current.im @ ss.A.T,
        )
    return derivatives


def short_horizon(ss: StateSpace, spec: DeviationSpec) -> ShortHorizon:
    """
    Coefficients de Δ en 0 calculés à partir de A, B, F, P (sans intégration).

    Forme générale en FA, valable pour tout F :
      Δ̇(0) = ‖FB‖²,  Δ̈(0) = 2(‖FA√P‖² + ⟨FB, FAB⟩)
    Pour un F isolant (FB = 0), FA = FA₀ = G : le coefficient dominant vaut
    ‖G√P‖² et la matrice du troisième ordre GBBᵀGᵀ/3.
    """
    F, B, A = spec.F, ss.B, ss.A
    FB = F @ B
    FA = F @ A
    fa_sqrt = float(np.linalg.norm(FA @ spec.sqrtP) ** 2)
    return ShortHorizon(
        delta0=0.0,
        delta_dot0=float(np.linalg.norm(FB) ** 2),
        delta_ddot0=2.0 * (fa_sqrt + frobenius_inner(FB, FA @ B)),
        leading_coefficient=fa_sqrt,
        third_order_matrix=(FA @ B @ B.T @ FA.T) / 3.0,
    )
