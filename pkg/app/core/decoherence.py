"""
═══════════════════════════════════════════════════════════════════════════════
MODULE: app/core/decoherence.py
Fonction: Temps de décohérence mémoire τ(ε), asymptote τ̂(ε) et balayages
Version: 1.0.0
═══════════════════════════════════════════════════════════════════════════════

τ(ε) = inf{t ≥ 0 : Δ(t) > ε‖F√P‖²}

Algorithme :
  1. Δ échantillonnée sur une grille uniforme [0, t_max]
  2. Premier point de grille où Δ dépasse strictement le seuil → encadrement
  3. Bisection sur le signe de Δ(t) − seuil, V propagée depuis la borne basse

Asymptote haute fidélité (FB = 0, G√P ≠ 0) :
    τ̂(ε) = (‖F√P‖ / ‖G√P‖)·√ε

τ infini (seuil jamais atteint avant t_max) est une issue légitime : il est
porté par `tau = None` et le drapeau `reached_t_max`, jamais par un flottant
sentinelle.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from config.settings import DECOHERENCE_SETTINGS, PARALLEL_SETTINGS, parallel_jobs
from app.core.errors import AsymptoteError, DomainError, PreconditionError
from app.core.moments import (
    DeviationSpec,
    delta_at,
    delta_rate,
    deviation_trajectory,
)
from app.core.oqho_model import StateSpace

logger = logging.getLogger(__name__)

#: Seuil sous lequel ‖G√P‖ est considéré nul
_GP_ZERO: float = 1e-14


# ═══════════════════════════════════════════════════════════════════════════════
# CLASSES DE DONNÉES
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class DecoherenceReport:
    """
    Résultat du calcul de τ(ε).

    Attributs:
        epsilon      : Niveau relatif ε
        tau          : τ(ε), None si le seuil n'est pas franchi avant t_max
        tau_hat      : τ̂(ε), None si l'asymptote n'est pas applicable
        ratio        : τ/τ̂ lorsque les deux sont définis
        threshold    : ε·‖F√P‖²
        ref_scale    : ‖F√P‖²
        t_lo, t_hi   : Encadrement final du franchissement
        t_max        : Horizon de recherche
        reached_t_max: Aucun franchissement sur [0, t_max]
        near_tangent : |Δ̇(τ)| < tangency_tol
        bisections   : Nombre d'itérations de bisection
    """

    epsilon: float
    tau: Optional[float]
    tau_hat: Optional[float]
    ratio: Optional[float]
    threshold: float
    ref_scale: float
    t_lo: Optional[float]
    t_hi: Optional[float]
    t_max: float
    reached_t_max: bool = False
    near_tangent: bool = False
    bisections: int = 0

    @property
    def is_infinite(self) -> bool:
        return self.tau is None

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["tau_kind"] = "infinite" if self.is_infinite else "finite"
        return data


@dataclass(frozen=True)
class SweepResult:
    """Rapports ordonnés par ε croissant et pente de log τ contre log ε."""

    reports: List[DecoherenceReport]
    fitted_slope: Optional[float]


# ═══════════════════════════════════════════════════════════════════════════════
# ASYMPTOTE & BORNE DE MARKOV
# ═══════════════════════════════════════════════════════════════════════════════

def _check_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not math.isfinite(epsilon) or epsilon <= 0.0:
        raise DomainError(f"ε doit être > 0, reçu {epsilon}")
    return epsilon


def approx_decoherence_time(spec: DeviationSpec, G: np.ndarray, epsilon: float) -> float:
    """
    τ̂(ε) = (‖F√P‖/‖G√P‖)·√ε.

    Raises:
        DomainError    : ε ≤ 0
        AsymptoteError : ‖G√P‖ ≤ 1e-14
    """
    epsilon = _check_epsilon(epsilon)
    gp = float(np.linalg.norm(G @ spec.sqrtP))
    if gp <= _GP_ZERO:
        raise AsymptoteError(
            "G√P = 0 : asymptote haute fidélité non applicable",
            {"gp_norm": gp},
        )
    return math.sqrt(spec.ref_scale) / gp * math.sqrt(epsilon)


def tail_bound(delta_t: float, z: float) -> float:
    """
    Borne de Markov sur P(‖F(X(t) − X(0))‖² ≥ z) : Δ(t)/z.

    Raises:
        DomainError      : Δ(t) < 0
        PreconditionError: z ≤ Δ(t)
    """
    if delta_t < 0.0:
        raise DomainError(f"Δ(t) doit être ≥ 0, reçu {delta_t}")
    if z <= delta_t or z <= 0.0:
        raise PreconditionError(
            f"La borne exige z > Δ(t) (z = {z}, Δ = {delta_t})",
            {"z": z, "delta": delta_t},
        )
    return float(delta_t / z)


# ═══════════════════════════════════════════════════════════════════════════════
# TEMPS DE DÉCOHÉRENCE
# ═══════════════════════════════════════════════════════════════════════════════

def default_horizon(ss: StateSpace, tau_hat: Optional[float]) -> float:
    """t_max = 10·τ̂ si disponible, sinon 10/‖A‖, sinon le repli configuré."""
    factor = DECOHERENCE_SETTINGS["horizon_factor"]
    if tau_hat is not None:
        return factor * tau_hat
    norm_a = float(np.linalg.norm(ss.A, 2))
    if norm_a > 0.0:
        return factor / norm_a
    return float(DECOHERENCE_SETTINGS["fallback_t_max"])


def decoherence_time(
    ss: StateSpace,
    spec: DeviationSpec,
    epsilon: float,
    t_max: Optional[float] = None,
    grid_step: Optional[float] = None,
    bisect_tol: Optional[float] = None,
    grid_points: Optional[int] = None,
) -> DecoherenceReport:
    """
    Calcule τ(ε) par détection du premier franchissement puis bisection.

    Args:
        ss        : Réalisation d'état
        spec      : Fonctionnelle d'écart (F, P)
        epsilon   : ε > 0
        t_max     : Horizon (défaut : default_horizon)
        grid_step : Pas de la grille de détection (prioritaire sur grid_points)
        bisect_tol: Largeur finale de l'encadrement (défaut : 1e-9·t_max)
        grid_points: Points de la grille de détection (défaut : 2001)

    Returns:
        DecoherenceReport
    """
    epsilon = _check_epsilon(epsilon)
    threshold = epsilon * spec.ref_scale

    try:
        tau_hat: Optional[float] = approx_decoherence_time(spec, spec.F @ ss.A0, epsilon)
    except AsymptoteError:
        tau_hat = None

    t_max = default_horizon(ss, tau_hat) if t_max is None else float(t_max)
    if not math.isfinite(t_max) or t_max <= 0.0:
        raise DomainError(f"t_max doit être > 0, reçu {t_max}")
    points = DECOHERENCE_SETTINGS["grid_points"] if grid_points is None else int(grid_points)
    if points < 2:
        raise DomainError(f"grid_points doit être ≥ 2, reçu {points}", {"grid_points": points})
    intervals = points - 1
    if grid_step is not None:
        if grid_step <= 0.0:
            raise DomainError(f"grid_step doit être > 0, reçu {grid_step}")
        intervals = max(1, int(math.ceil(t_max / grid_step)))
    bisect_tol = DECOHERENCE_SETTINGS["bisect_rel_tol"] * t_max if bisect_tol is None \
        else float(bisect_tol)

    grid = np.linspace(0.0, t_max, intervals + 1)
    traj = deviation_trajectory(ss, spec, grid)
    above = np.flatnonzero(traj.delta > threshold)

    if above.size == 0:
        logger.warning(
            "Seuil non franchi | ε=%.3e | t_max=%.4g | Δ_max/seuil=%.3e",
            epsilon, t_max, traj.delta.max() / threshold,
        )
        return DecoherenceReport(
            epsilon=epsilon, tau=None, tau_hat=tau_hat, ratio=None,
            threshold=threshold, ref_scale=spec.ref_scale,
            t_lo=None, t_hi=None, t_max=t_max, reached_t_max=True,
        )

    i = int(above[0])
    t_lo, t_hi = float(grid[i - 1]), float(grid[i])
    V_lo = traj.covariances[i - 1]
    bisections = 0
    while t_hi - t_lo > bisect_tol and bisections < DECOHERENCE_SETTINGS["max_bisections"]:
        mid = 0.5 * (t_lo + t_hi)
        value, V_mid = delta_at(ss, spec, mid, start=(t_lo, V_lo))
        if value > threshold:
            t_hi = mid
        else:
            t_lo, V_lo = mid, V_mid
        bisections += 1

    tau = 0.5 * (t_lo + t_hi)
    _, V_tau = delta_at(ss, spec, tau, start=(t_lo, V_lo))
    rate = delta_rate(ss, spec, tau, V_tau)
    near_tangent = abs(rate) < DECOHERENCE_SETTINGS["tangency_tol"]
    if near_tangent:
        logger.warning("Franchissement quasi tangent | τ=%.6g | Δ̇=%.3e", tau, rate)

    ratio = tau / tau_hat if tau_hat else None
    logger.info(
        "Décohérence | ε=%.1e | τ=%.6g | τ̂=%s | bisections=%d",
        epsilon, tau, "n/a" if tau_hat is None else f"{tau_hat:.6g}", bisections,
    )
    return DecoherenceReport(
        epsilon=epsilon, tau=tau, tau_hat=tau_hat, ratio=ratio,
        threshold=threshold, ref_scale=spec.ref_scale,
        t_lo=t_lo, t_hi=t_hi, t_max=t_max,
        near_tangent=bool(near_tangent), bisections=bisections,
    )


# ═══════════════════════════════════════════════════════════════════════════════
# BALAYAGE EN ε
# ═══════════════════════════════════════════════════════════════════════════════

def fit_loglog_slope(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    """Pente de la droite des moindres carrés de log y contre log x."""
    x_arr = np.asarray(x, dtype=float)
    y_arr = np.asarray(y, dtype=float)
    mask = np.isfinite(x_arr) & np.isfinite(y_arr) & (x_arr > 0) & (y_arr > 0)
    if mask.sum() < 2:
        return None
    slope, _ = np.polyfit(np.log(x_arr[mask]), np.log(y_arr[mask]), 1)
    return float(slope)


def epsilon_sweep(
    ss: StateSpace,
    spec: DeviationSpec,
    eps_grid: Optional[Sequence[float]] = None,
    t_max: Optional[float] = None,
    n_jobs: Optional[int] = None,
    grid_points: Optional[int] = None,
) -> SweepResult:
    """
    τ(ε) pour chaque ε de la grille, puis pente de log τ contre log ε.

    Les ε sont indépendants : évaluation parallèle (joblib) plafonnée par
    QMEMTIME_THREADS, sortie triée par ε croissant.
    """
    eps_values = sorted(
        _check_epsilon(e) for e in (eps_grid or DECOHERENCE_SETTINGS["eps_grid"])
    )
    n_jobs = parallel_jobs() if n_jobs is None else n_jobs

    reports = Parallel(n_jobs=n_jobs, backend=PARALLEL_SETTINGS["backend"])(
        delayed(decoherence_time)(ss, spec, eps, t_max=t_max, grid_points=grid_points)
        for eps in eps_values
    )
    reports = list(reports)

    finite = [r for r in reports if not r.is_infinite]
    slope = fit_loglog_slope([r.epsilon for r in finite], [r.tau for r in finite])
    logger.info(
        "Balayage ε | points=%d | finis=%d | pente=%s",
        len(reports), len(finite), "n/a" if slope is None else f"{slope:.4f}",
    )
    return SweepResult(reports=reports, fitted_slope=slope)
