"""
═══════════════════════════════════════════════════════════════════════════════
MODULE: app/core/optimizer.py
Fonction: Optimisation du couplage énergétique direct R₁₂ de l'interconnexion
Version: 1.0.0
═══════════════════════════════════════════════════════════════════════════════

F et P fixés, maximiser τ̂(ε) revient à minimiser ‖G√P‖ = 2‖FΘR√P‖, soit
la fonction quadratique convexe

    f(R₁₂) = ½‖FΘR√P‖²,   R = R* + [[0, R₁₂], [R₁₂ᵀ, 0]]

dont le gradient (produit de Frobenius) vaut −(g(R₁₂) + K) avec

    g(N) = Θ₁Σ₁₁Θ₁NP₂₂ + P₁₁NΘ₂Σ₂₂Θ₂ + Θ₁Σ₁₂Θ₂NᵀP₁₂ + P₁₂NᵀΘ₁Σ₁₂Θ₂
    K    = 2·𝐒(ΘΣΘR*P)₁₂

g est autoadjoint et semi-défini négatif. L'optimalité équivaut à
g(R₁₂) + K = 0, résolu par vectorisation (vec par colonnes) et moindres
carrés de norme minimale ; la nullité de g est rapportée.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.linalg
from joblib import Parallel, delayed

from config.settings import OPTIMIZER_SETTINGS, PARALLEL_SETTINGS, parallel_jobs
from app.core.errors import DimensionError, OptimalityViolationError
from app.core.numerics import (
    as_matrix,
    lstsq_min_norm,
    numerical_rank,
    sqrtm_psd,
    symmetrize,
)
from app.core.oqho_model import InterconnectionSpec, field_mediated_energy

logger = logging.getLogger(__name__)


# ═══════════════════════════════════════════════════════════════════════════════
# CLASSES DE DONNÉES
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class OptimizerBlocks:
    """
    Blocs de Θ, Σ = FᵀF et P conformes à (n₁, n₂), plus R*.

    Attributs:
        Theta1, Theta2          : Blocs diagonaux de Θ
        Sigma11, Sigma12, Sigma22: Blocs de Σ
        P11, P12, P22           : Blocs de P
        Rstar                   : Énergie sans couplage direct (n×n)
    """

    Theta1: np.ndarray
    Theta2: np.ndarray
    Sigma11: np.ndarray
    Sigma12: np.ndarray
    Sigma22: np.ndarray
    P11: np.ndarray
    P12: np.ndarray
    P22: np.ndarray
    Rstar: np.ndarray

    @property
    def n1(self) -> int:
        return int(self.Theta1.shape[0])

    @property
    def n2(self) -> int:
        return int(self.Theta2.shape[0])

    @property
    def Theta(self) -> np.ndarray:
        return scipy.linalg.block_diag(self.Theta1, self.Theta2)

    @property
    def Sigma(self) -> np.ndarray:
        return np.block([[self.Sigma11, self.Sigma12], [self.Sigma12.T, self.Sigma22]])

    @property
    def P(self) -> np.ndarray:
        return np.block([[self.P11, self.P12], [self.P12.T, self.P22]])


@dataclass(frozen=True)
class CouplingProblem:
    """Données du problème : F (fixé), P, blocs et R₁₂ de départ."""

    F: np.ndarray
    sqrtP: np.ndarray
    blocks: OptimizerBlocks
    R12_initial: np.ndarray


@dataclass
class OptimizationResult:
    """
    Résultat de la résolution de g(R₁₂) + K = 0.

    Attributs:
        R12_opt        : Couplage optimal de norme minimale
        residual       : ‖g(R₁₂*) + K‖_F
        f_value        : f(R₁₂*)
        f_initial      : f au couplage de départ
        grad_norm      : ‖∇f(R₁₂*)‖_F
        g_matrix_rank  : Rang de la matrice de g
        nullity        : n₁n₂ − rang (dimension de l'ensemble des solutions)
        k_norm         : ‖K‖_F
        gp_before/after: ‖G√P‖ avant / après
        tau_hat_before/after: τ̂(ε_ref) avant / après (None si ‖G√P‖ = 0)
        reference_epsilon: ε_ref
    """

    R12_opt: np.ndarray
    residual: float
    f_value: float
    f_initial: float
    grad_norm: float
    g_matrix_rank: int
    nullity: int
    k_norm: float
    gp_before: float
    gp_after: float
    tau_hat_before: Optional[float]
    tau_hat_after: Optional[float]
    reference_epsilon: float


# ═══════════════════════════════════════════════════════════════════════════════
# CONSTRUCTION DES BLOCS
# ═══════════════════════════════════════════════════════════════════════════════

def build_blocks(spec: InterconnectionSpec, F: np.ndarray, P: np.ndarray) -> OptimizerBlocks:
    """Découpe Θ, Σ = FᵀF et P selon (n₁, n₂) et calcule R*."""
    n1, n2 = spec.n1, spec.n2
    n = n1 + n2
    F = as_matrix(F, "F")
    P = as_matrix(P, "P")
    if F.shape[1] != n or P.shape != (n, n):
        raise DimensionError(f"F {F.shape} ou P {P.shape} incompatibles avec n = {n}")
    Sigma = F.T @ F
    return OptimizerBlocks(
        Theta1=spec.ccr1.theta, Theta2=spec.ccr2.theta,
        Sigma11=Sigma[:n1, :n1], Sigma12=Sigma[:n1, n1:], Sigma22=Sigma[n1:, n1:],
        P11=P[:n1, :n1], P12=P[:n1, n1:], P22=P[n1:, n1:],
        Rstar=field_mediated_energy(spec),
    )


def coupling_problem(spec: InterconnectionSpec, F: np.ndarray, P: np.ndarray) -> CouplingProblem:
    blocks = build_blocks(spec, F, P)
    return CouplingProblem(
        F=as_matrix(F, "F"), sqrtP=sqrtm_psd(P), blocks=blocks,
        R12_initial=np.asarray(spec.R12, dtype=float),
    )


def full_energy(Rstar: np.ndarray, R12: np.ndarray) -> np.ndarray:
    """R = R* + [[0, R₁₂], [R₁₂ᵀ, 0]]."""
    n1, n2 = R12.shape
    R = Rstar.copy()
    R[:n1, n1:] += R12
    R[n1:, :n1] += R12.T
    return R


# ═══════════════════════════════════════════════════════════════════════════════
# OPÉRATEUR g ET MATRICE K
# ═══════════════════════════════════════════════════════════════════════════════

def apply_g(N: np.ndarray, blocks: OptimizerBlocks) -> np.ndarray:
    """
    g(N) = Θ₁Σ₁₁Θ₁NP₂₂ + P₁₁NΘ₂Σ₂₂Θ₂ + Θ₁Σ₁₂Θ₂NᵀP₁₂ + P₁₂NᵀΘ₁Σ₁₂Θ₂.

    Raises:
        DimensionError: N n'est pas n₁×n₂
    """
    N = np.asarray(N, dtype=float)
    if N.shape != (blocks.n1, blocks.n2):
        raise DimensionError(f"N doit être {blocks.n1}×{blocks.n2}, forme {N.shape}")
    t1, t2 = blocks.Theta1, blocks.Theta2
    cross = t1 @ blocks.Sigma12 @ t2
    return (
        t1 @ blocks.Sigma11 @ t1 @ N @ blocks.P22
        + blocks.P11 @ N @ t2 @ blocks.Sigma22 @ t2
        + cross @ N.T @ blocks.P12
        + blocks.P12 @ N.T @ cross
    )


def _g_column(k: int, blocks: OptimizerBlocks) -> np.ndarray:
    E = np.zeros((blocks.n1, blocks.n2))
    # vec par colonnes : k = i + j·n₁
    E[k % blocks.n1, k // blocks.n1] = 1.0
    return apply_g(E, blocks).ravel(order="F")


def assemble_g(blocks: OptimizerBlocks, n_jobs: Optional[int] = None) -> np.ndarray:
    """
    Matrice (n₁n₂)×(n₁n₂) de g dans la base canonique, vec par colonnes :
    colonne k = vec(g(E_k)). Colonnes calculées en parallèle, assemblées
    dans l'ordre des indices.
    """
    size = blocks.n1 * blocks.n2
    n_jobs = parallel_jobs() if n_jobs is None else n_jobs
    columns = Parallel(n_jobs=n_jobs, backend=PARALLEL_SETTINGS["backend"])(
        delayed(_g_column)(k, blocks) for k in range(size)
    )
    L = np.column_stack(columns) if columns else np.zeros((0, 0))
    logger.debug("assemble_g | taille=%d | asymétrie=%.3e", size, np.max(np.abs(L - L.T), initial=0.0))
    return L


def compute_k(
    Theta: np.ndarray,
    Sigma: np.ndarray,
    Rstar: np.ndarray,
    P: np.ndarray,
    n1: int,
) -> np.ndarray:
    """K = 2·𝐒(ΘΣΘR*P)₁₂, bloc n₁×n₂."""
    n = Theta.shape[0]
    for name, X in (("Sigma", Sigma), ("Rstar", Rstar), ("P", P)):
        if X.shape != (n, n):
            raise DimensionError(f"{name} doit être {n}×{n}, forme {X.shape}")
    if not 0 < n1 < n:
        raise DimensionError(f"n₁ = {n1} hors de ]0, {n}[")
    return 2.0 * symmetrize(Theta @ Sigma @ Theta @ Rstar @ P)[:n1, n1:]


def problem_k(problem: CouplingProblem) -> np.ndarray:
    b = problem.blocks
    return compute_k(b.Theta, b.Sigma, b.Rstar, b.P, b.n1)


# ═══════════════════════════════════════════════════════════════════════════════
# OBJECTIF
# ═══════════════════════════════════════════════════════════════════════════════

def gp_norm(R: np.ndarray, F: np.ndarray, Theta: np.ndarray, sqrtP: np.ndarray) -> float:
    """‖G√P‖ = ‖F·A₀·√P‖ = 2‖FΘR√P‖."""
    return 2.0 * float(np.linalg.norm(F @ Theta @ R @ sqrtP))


def objective_and_gradient(R12: np.ndarray, problem: CouplingProblem) -> Tuple[float, np.ndarray]:
    """
    f(R₁₂) = ½‖FΘR√P‖² et ∇f(R₁₂) = −(g(R₁₂) + K).
    """
    b = problem.blocks
    R12 = np.asarray(R12, dtype=float)
    if R12.shape != (b.n1, b.n2):
        raise DimensionError(f"R12 doit être {b.n1}×{b.n2}, forme {R12.shape}")
    R = full_energy(b.Rstar, R12)
    f = 0.5 * float(np.linalg.norm(problem.F @ b.Theta @ R @ problem.sqrtP) ** 2)
    grad = -(apply_g(R12, b) + problem_k(problem))
    return f, grad


def _tau_hat(problem: CouplingProblem, gp: float, epsilon: float) -> Optional[float]:
    if gp <= 1e-14:
        return None
    ref = float(np.linalg.norm(problem.F @ problem.sqrtP))
    return ref / gp * math.sqrt(epsilon)


def optimal_coupling(
    problem: CouplingProblem,
    reference_epsilon: Optional[float] = None,
) -> OptimizationResult:
    """
    Résout assemble_g·vec(R₁₂) = −vec(K) (moindres carrés, norme minimale)
    et vérifie l'optimalité.

    Raises:
        OptimalityViolationError: résidu ‖g(R₁₂*) + K‖ au-delà de la tolérance
    """
    b = problem.blocks
    eps_ref = OPTIMIZER_SETTINGS["reference_epsilon"] if reference_epsilon is None \
        else float(reference_epsilon)

    L = assemble_g(b)
    K = problem_k(problem)
    k_norm = float(np.linalg.norm(K))
    x, lstsq_residual = lstsq_min_norm(L, -K.ravel(order="F"), OPTIMIZER_SETTINGS["lstsq_tol"])
    R12_opt = x.reshape((b.n1, b.n2), order="F")

    residual = float(np.linalg.norm(apply_g(R12_opt, b) + K))
    f_value, grad = objective_and_gradient(R12_opt, problem)
    grad_norm = float(np.linalg.norm(grad))
    f_initial, _ = objective_and_gradient(problem.R12_initial, problem)
    rank = numerical_rank(L)

    logger.info(
        "Optimisation R₁₂ | taille=%d | rang(g)=%d | ‖K‖=%.3e | résidu=%.3e | f: %.6g → %.6g",
        L.shape[0], rank, k_norm, residual, f_initial, f_value,
    )
    if residual > OPTIMIZER_SETTINGS["residual_tol"] * (1.0 + k_norm) \
            or grad_norm > OPTIMIZER_SETTINGS["grad_tol"] * (1.0 + k_norm):
        raise OptimalityViolationError(
            "Condition d'optimalité g(R₁₂) + K = 0 non satisfaite",
            {"residual": residual, "grad_norm": grad_norm, "lstsq_residual": lstsq_residual},
        )

    theta = b.Theta
    gp_before = gp_norm(full_energy(b.Rstar, problem.R12_initial), problem.F, theta, problem.sqrtP)
    gp_after = gp_norm(full_energy(b.Rstar, R12_opt), problem.F, theta, problem.sqrtP)

    return OptimizationResult(
        R12_opt=R12_opt,
        residual=residual,
        f_value=f_value,
        f_initial=f_initial,
        grad_norm=grad_norm,
        g_matrix_rank=rank,
        nullity=int(L.shape[0] - rank),
        k_norm=k_norm,
        gp_before=gp_before,
        gp_after=gp_after,
        tau_hat_before=_tau_hat(problem, gp_before, eps_ref),
        tau_hat_after=_tau_hat(problem, gp_after, eps_ref),
        reference_epsilon=eps_ref,
    )
