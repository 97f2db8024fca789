"""
═══════════════════════════════════════════════════════════════════════════════
MODULE: app/core/oqho_model.py
Fonction: Structures CCR, paramètres d'oscillateurs et réalisations d'état
Version: 1.0.0
═══════════════════════════════════════════════════════════════════════════════

Un oscillateur harmonique quantique ouvert (OQHO) à ν modes est décrit par :
  - sa matrice d'énergie R (n×n, n = 2ν, symétrique) : H = ½XᵀRX
  - sa matrice de couplage M (m×n) aux m canaux de champ : L = MX
  - son sélecteur de sortie D (r×m, lignes d'une matrice de permutation)

Réalisation (ordre des variables q₁, p₁, q₂, p₂, …) :
  A₀ = 2ΘR    Ã = 2ΘMᵀJM    A = A₀ + Ã    B = 2ΘMᵀ    C = 2DJM
  ℧ = BΩBᵀ avec Ω = I + iJ  (re = BBᵀ, im = BJBᵀ)

Interconnexion de deux OQHO (couplage direct R₁₂ + couplage par les champs
de sortie via N_k) : deux constructions indépendantes de (A, B), par blocs
et par réalisation des matrices composites (R, M), qui doivent coïncider.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Dict, Optional, Tuple

import numpy as np
import scipy.linalg

from config.constants import BJ
from config.settings import NUMERICS_SETTINGS
from app.core.errors import DimensionError, DomainError, NumericFailure, ValidationError
from app.core.numerics import HermitianPair, as_matrix, symmetry_gap

logger = logging.getLogger(__name__)

#: Tolérance de cohérence entre les deux constructions de l'interconnexion
_COMPOSE_TOL: float = 1e-10


# ═══════════════════════════════════════════════════════════════════════════════
# STRUCTURES CCR
# ═══════════════════════════════════════════════════════════════════════════════

def ccr_theta(nu: int) -> np.ndarray:
    """
    Matrice CCR Θ = ½ I_ν ⊗ bJ des variables d'un système à ν modes.

    Raises:
        DomainError: si ν < 1
    """
    if int(nu) != nu or nu < 1:
        raise DomainError(f"ν doit être un entier ≥ 1, reçu {nu}")
    return 0.5 * np.kron(np.eye(int(nu)), BJ)


def ito_j(m: int) -> np.ndarray:
    """
    Matrice J = I_{m/2} ⊗ bJ de la table d'Itô quantique Ω = I + iJ.

    Raises:
        DomainError: si m est impair ou < 2
    """
    if int(m) != m or m < 2 or m % 2:
        raise DomainError(f"m doit être pair et ≥ 2, reçu {m}")
    return np.kron(np.eye(int(m) // 2), BJ)


@dataclass(frozen=True)
class CcrStructure:
    """
    Structure CCR d'un système : Θ pour les variables, J pour les champs.

    Attributs:
        nu     : Nombre de modes ν
        theta  : Θ (n×n, n = 2ν)
        m      : Nombre de canaux de champ (pair)
        j_field: J (m×m)
    """

    nu: int
    theta: np.ndarray
    m: int
    j_field: np.ndarray

    @property
    def n(self) -> int:
        return 2 * self.nu

    @classmethod
    def build(cls, nu: int, m: int) -> "CcrStructure":
        return cls(nu=int(nu), theta=ccr_theta(nu), m=int(m), j_field=ito_j(m))

    def omega(self) -> HermitianPair:
        """Matrice d'Itô Ω = I + iJ."""
        return HermitianPair(np.eye(self.m), self.j_field.copy())


# ═══════════════════════════════════════════════════════════════════════════════
# PARAMÈTRES & RÉALISATION
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class OqhoParams:
    """
    Données physiques d'un oscillateur.

    Attributs:
        R: Matrice d'énergie n×n symétrique
        M: Matrice de couplage m×n
        D: Sélecteur de sortie r×m (None → I_m, toutes les sorties)
    """

    R: np.ndarray
    M: np.ndarray
    D: Optional[np.ndarray] = None

    def selector(self) -> np.ndarray:
        return np.eye(self.M.shape[0]) if self.D is None else self.D


@dataclass(frozen=True)
class StateSpace:
    """
    Réalisation d'état dX = AX dt + B dW, dY = CX dt + D dW.

    Attributs:
        A, A0, Atilde: Dynamique totale, hamiltonienne et induite par le champ
        B, C, D      : Matrices d'entrée, de sortie et sélecteur
        mho          : ℧ = BΩBᵀ
        ccr          : Structure CCR
        M, R         : Couplage et énergie d'origine
    """

    A: np.ndarray
    A0: np.ndarray
    Atilde: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    mho: HermitianPair
    ccr: CcrStructure
    M: np.ndarray
    R: np.ndarray

    def ccr_residual(self) -> float:
        """‖AΘ + ΘAᵀ + BJBᵀ‖ (nul si la réalisation conserve les CCR)."""
        theta = self.ccr.theta
        return float(np.linalg.norm(
            self.A @ theta + theta @ self.A.T + self.B @ self.ccr.j_field @ self.B.T
        ))


def validate_selector(D: np.ndarray, m: int, name: str = "D") -> None:
    """
    Vérifie que D (r×m) est une sélection de lignes d'une matrice de
    permutation : entrées 0/1, un seul 1 par ligne, au plus un par colonne,
    r pair et r ≤ m.

    Raises:
        DimensionError / ValidationError
    """
    if D.ndim != 2 or D.shape[1] != m:
        raise DimensionError(f"{name} doit avoir {m} colonnes, forme {D.shape}")
    r = D.shape[0]
    if r > m or r % 2:
        raise DimensionError(f"{name} : r = {r} doit être pair et ≤ m = {m}")
    if not np.all((D == 0.0) | (D == 1.0)):
        raise ValidationError(f"{name} doit être à entrées 0/1")
    if np.any(D.sum(axis=1) != 1.0) or np.any(D.sum(axis=0) > 1.0):
        raise ValidationError(
            f"{name} doit contenir exactement un 1 par ligne et au plus un par colonne"
        )


def validate_params(params: OqhoParams, ccr: CcrStructure, label: str = "") -> None:
    """
    Contrôle dimensions et symétrie de (R, M, D) contre la structure CCR.

    Raises:
        DimensionError : blocs incompatibles
        ValidationError: R asymétrique ou D non sélectif
    """
    tag = f"{label}." if label else ""
    n, m = ccr.n, ccr.m
    if params.R.shape != (n, n):
        raise DimensionError(f"{tag}R doit être {n}×{n}, forme {params.R.shape}")
    if params.M.shape != (m, n):
        raise DimensionError(f"{tag}M doit être {m}×{n}, forme {params.M.shape}")
    gap = symmetry_gap(params.R)
    tol = NUMERICS_SETTINGS["hermitian_tol"] * (1.0 + float(np.max(np.abs(params.R), initial=0.0)))
    if gap > tol:
        raise ValidationError(
            f"{tag}R n'est pas symétrique (‖R − Rᵀ‖_max = {gap:.3e})",
            {"block": f"{tag}R", "asymmetry": gap},
        )
    validate_selector(params.selector(), m, f"{tag}D")


def output_matrices(params: OqhoParams, ccr: CcrStructure) -> Dict[str, np.ndarray]:
    """
    Matrices de l'équation de sortie : C = 2DJM, D et J̃ = DJDᵀ.

    J̃ est la matrice d'Itô des sorties sélectionnées.
    """
    D = params.selector()
    return {
        "C": 2.0 * D @ ccr.j_field @ params.M,
        "D": D.copy(),
        "J_tilde": D @ ccr.j_field @ D.T,
    }


def realize(params: OqhoParams, ccr: CcrStructure) -> StateSpace:
    """
    Réalisation d'état d'un OQHO.

    Args:
        params: (R, M, D) validés contre `ccr`
        ccr   : Structure CCR

    Returns:
        StateSpace avec A = 2Θ(R + MᵀJM)

    Raises:
        DimensionError, ValidationError
    """
    R = as_matrix(params.R, "R")
    M = as_matrix(params.M, "M")
    params = replace(params, R=R, M=M)
    validate_params(params, ccr)

    theta, J = ccr.theta, ccr.j_field
    A0 = 2.0 * theta @ R
    B = 2.0 * theta @ M.T
    Atilde = B @ J @ M
    outputs = output_matrices(params, ccr)
    mho = HermitianPair(B @ B.T, B @ J @ B.T)

    logger.debug(
        "Réalisation | ν=%d | m=%d | ‖A₀‖=%.3e | ‖Ã‖=%.3e",
        ccr.nu, ccr.m, np.linalg.norm(A0), np.linalg.norm(Atilde),
    )
    return StateSpace(
        A=A0 + Atilde, A0=A0, Atilde=Atilde, B=B,
        C=outputs["C"], D=outputs["D"], mho=mho, ccr=ccr, M=M, R=R,
    )


# ═══════════════════════════════════════════════════════════════════════════════
# INTERCONNEXION DE DEUX OSCILLATEURS
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class InterconnectionSpec:
    """
    Interconnexion en rétroaction cohérente de deux OQHO.

    Attributs:
        ccr1, ccr2: Structures CCR des oscillateurs
        osc1, osc2: Paramètres (R_k, M_k, D_k)
        N1, N2    : N_k (r_{3−k}×n_k), couplage de k à la sortie de l'autre
        R12       : Couplage énergétique direct n₁×n₂
    """

    ccr1: CcrStructure
    ccr2: CcrStructure
    osc1: OqhoParams
    osc2: OqhoParams
    N1: np.ndarray
    N2: np.ndarray
    R12: np.ndarray

    @property
    def n1(self) -> int:
        return self.ccr1.n

    @property
    def n2(self) -> int:
        return self.ccr2.n

    def with_coupling(self, R12: np.ndarray) -> "InterconnectionSpec":
        return replace(self, R12=np.asarray(R12, dtype=float))


def validate_interconnection(spec: InterconnectionSpec) -> None:
    """Cohérence dimensionnelle de tous les blocs."""
    validate_params(spec.osc1, spec.ccr1, "osc1")
    validate_params(spec.osc2, spec.ccr2, "osc2")
    r1 = spec.osc1.selector().shape[0]
    r2 = spec.osc2.selector().shape[0]
    if spec.N1.shape != (r2, spec.n1):
        raise DimensionError(f"N1 doit être {r2}×{spec.n1}, forme {spec.N1.shape}")
    if spec.N2.shape != (r1, spec.n2):
        raise DimensionError(f"N2 doit être {r1}×{spec.n2}, forme {spec.N2.shape}")
    if spec.R12.shape != (spec.n1, spec.n2):
        raise DimensionError(
            f"R12 doit être {spec.n1}×{spec.n2}, forme {spec.R12.shape}"
        )


def field_mediated_energy(spec: InterconnectionSpec) -> np.ndarray:
    """
    Matrice d'énergie R* de l'interconnexion sans couplage direct :
    diagonale (R₁, R₂), blocs hors diagonale induits par les champs.
    """
    J1, J2 = spec.ccr1.j_field, spec.ccr2.j_field
    D1, D2 = spec.osc1.selector(), spec.osc2.selector()
    M1, M2 = spec.osc1.M, spec.osc2.M
    N1, N2 = spec.N1, spec.N2
    top = N1.T @ D2 @ J2 @ M2 - M1.T @ J1 @ D1.T @ N2
    bottom = N2.T @ D1 @ J1 @ M1 - M2.T @ J2 @ D2.T @ N1
    return np.block([[spec.osc1.R, top], [bottom, spec.osc2.R]])


def direct_energy(spec: InterconnectionSpec) -> np.ndarray:
    """Bloc [[0, R₁₂], [R₁₂ᵀ, 0]]."""
    Z1 = np.zeros((spec.n1, spec.n1))
    Z2 = np.zeros((spec.n2, spec.n2))
    return np.block([[Z1, spec.R12], [spec.R12.T, Z2]])


def composite_params(spec: InterconnectionSpec) -> Tuple[OqhoParams, CcrStructure]:
    """Paramètres (R, M, D) et structure CCR du système composite."""
    D1, D2 = spec.osc1.selector(), spec.osc2.selector()
    M = np.block([
        [spec.osc1.M, D1.T @ spec.N2],
        [D2.T @ spec.N1, spec.osc2.M],
    ])
    R = field_mediated_energy(spec) + direct_energy(spec)
    R = 0.5 * (R + R.T)
    ccr = CcrStructure(
        nu=spec.ccr1.nu + spec.ccr2.nu,
        theta=scipy.linalg.block_diag(spec.ccr1.theta, spec.ccr2.theta),
        m=spec.ccr1.m + spec.ccr2.m,
        j_field=scipy.linalg.block_diag(spec.ccr1.j_field, spec.ccr2.j_field),
    )
    D = scipy.linalg.block_diag(D1, D2)
    return OqhoParams(R=R, M=M, D=D), ccr


def block_realization(spec: InterconnectionSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    (A, B) de l'interconnexion par les formules par blocs :

      A_k = 2Θ_k(R_k + M_kᵀJ_kM_k + N_kᵀJ̃_{3−k}N_k)
      A = [[A₁, F₁ + E₁C₂], [F₂ + E₂C₁, A₂]]
      B = [[B₁, E₁D₂], [E₂D₁, B₂]]

    avec B_k = 2Θ_kM_kᵀ, C_k = 2D_kJ_kM_k, E_k = 2Θ_kN_kᵀ, F_k = 2Θ_kR_{k,3−k}.
    """
    th1, th2 = spec.ccr1.theta, spec.ccr2.theta
    out1 = output_matrices(spec.osc1, spec.ccr1)
    out2 = output_matrices(spec.osc2, spec.ccr2)
    M1, M2 = spec.osc1.M, spec.osc2.M
    N1, N2 = spec.N1, spec.N2

    A1 = 2.0 * th1 @ (spec.osc1.R + M1.T @ spec.ccr1.j_field @ M1 + N1.T @ out2["J_tilde"] @ N1)
    A2 = 2.0 * th2 @ (spec.osc2.R + M2.T @ spec.ccr2.j_field @ M2 + N2.T @ out1["J_tilde"] @ N2)
    B1, B2 = 2.0 * th1 @ M1.T, 2.0 * th2 @ M2.T
    E1, E2 = 2.0 * th1 @ N1.T, 2.0 * th2 @ N2.T
    F1, F2 = 2.0 * th1 @ spec.R12, 2.0 * th2 @ spec.R12.T

    A = np.block([[A1, F1 + E1 @ out2["C"]], [F2 + E2 @ out1["C"], A2]])
    B = np.block([[B1, E1 @ out2["D"]], [E2 @ out1["D"], B2]])
    return A, B


def compose(
    spec: InterconnectionSpec,
) -> Tuple[OqhoParams, CcrStructure, StateSpace]:
    """
    Construit le système composite de l'interconnexion.

    Les deux constructions (par blocs et par réalisation des matrices
    composites) sont comparées ; un écart au-delà de 1e-10·(1+‖·‖) lève
    NumericFailure.

    Returns:
        Tuple (params composites, CCR composite, réalisation)
    """
    validate_interconnection(spec)
    params, ccr = composite_params(spec)
    ss = realize(params, ccr)

    A_blocks, B_blocks = block_realization(spec)
    gap_a = float(np.linalg.norm(A_blocks - ss.A))
    gap_b = float(np.linalg.norm(B_blocks - ss.B))
    if gap_a > _COMPOSE_TOL * (1.0 + np.linalg.norm(ss.A)) or \
            gap_b > _COMPOSE_TOL * (1.0 + np.linalg.norm(ss.B)):
        raise NumericFailure(
            "Constructions par blocs et composite incohérentes",
            {"gap_A": gap_a, "gap_B": gap_b},
        )

    logger.info(
        "Interconnexion composée | n=%d (%d+%d) | m=%d | ‖R₁₂‖=%.3e | écart A=%.1e",
        ccr.n, spec.n1, spec.n2, ccr.m, np.linalg.norm(spec.R12), gap_a,
    )
    return params, ccr, ss
