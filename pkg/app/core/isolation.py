"""
═══════════════════════════════════════════════════════════════════════════════
MODULE: app/core/isolation.py
Fonction: Sous-système partiellement isolé (FB = 0) et fonctions de transfert
Version: 1.0.0
═══════════════════════════════════════════════════════════════════════════════

Si d = n − rang(M) > 0, pour tout s ≤ d il existe F (s×n, rang plein) avec
FΘMᵀ = 0, donc FB = 0 : les variables φ = FX ne sont pas directement
affectées par les champs. En complétant F par T, S = [F; T] donne

    φ̇ = a₁₁φ + a₁₂ψ          (EDO)
    dψ = (a₂₁φ + a₂₂ψ)dt + b dW   (EDSQ)

avec a = SAS⁻¹, S⁻¹ = [S₁ S₂], a₁₁ = GS₁, a₁₂ = GS₂, G = FA₀ = FA.

Les fonctions de transfert Φ, Ψ, Γ et χ sont évaluées point par point
(matrices complexes numpy) ; aucun objet symbolique n'est construit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Union

import numpy as np

from config.settings import ISOLATION_SETTINGS
from app.core.errors import (
    DimensionError,
    DomainError,
    InfeasibleIsolationError,
    NoIsolationError,
    PoleError,
    RankError,
)
from app.core.numerics import (
    as_matrix,
    kernel_basis,
    lstsq_min_norm,
    numerical_rank,
    row_complement,
)
from app.core.oqho_model import StateSpace

logger = logging.getLogger(__name__)

#: Point d'évaluation : complexe ou paire (re, im)
FrequencyPoint = Union[complex, float, Tuple[float, float]]


@dataclass(frozen=True)
class IsolationDecomposition:
    """
    Décomposition (Φ, Ψ) associée à F.

    Attributs:
        F, T           : Lignes de sélection et complément (orthonormé par défaut)
        S, S1, S2      : S = [F; T] et blocs colonnes de S⁻¹
        a11 … a22, b   : Blocs de SAS⁻¹ et de TB
        G              : FA₀
        fb_norm        : ‖FB‖_F (≈ 0 pour un F isolant)
        isolated       : ‖FB‖ ≤ fb_tol·(1 + ‖B‖)
    """

    F: np.ndarray
    T: np.ndarray
    S: np.ndarray
    S1: np.ndarray
    S2: np.ndarray
    a11: np.ndarray
    a12: np.ndarray
    a21: np.ndarray
    a22: np.ndarray
    b: np.ndarray
    G: np.ndarray
    fb_norm: float
    isolated: bool

    @property
    def s(self) -> int:
        return int(self.F.shape[0])

    @property
    def n(self) -> int:
        return int(self.F.shape[1])

    @property
    def a(self) -> np.ndarray:
        return np.block([[self.a11, self.a12], [self.a21, self.a22]])


@dataclass(frozen=True)
class TransferValues:
    """Valeurs Φ(u), Ψ₁(u), Ψ₂(u), Γ(u) et Γ(u)Ψ₂(u) en un point u."""

    u: complex
    Phi: np.ndarray
    Psi1: np.ndarray
    Psi2: np.ndarray
    Gamma: np.ndarray
    noise_map: np.ndarray


# ═══════════════════════════════════════════════════════════════════════════════
# CONSTRUCTION DE F
# ═══════════════════════════════════════════════════════════════════════════════

def isolation_rank(M: np.ndarray, n: int) -> int:
    """
    d = n − rang(M), nombre maximal de directions isolables.

    n > m (plus de variables que de canaux) suffit à garantir d > 0.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[1] != n:
        raise DimensionError(f"M doit avoir {n} colonnes, forme {M.shape}")
    return int(n - numerical_rank(M))


def isolation_basis(ss: StateSpace, s: int) -> IsolationDecomposition:
    """
    Construit F = 4K_sᵀΘ = (Θ⁻¹K_s)ᵀ à lignes normées, K_s étant les s
    premières colonnes d'une base orthonormée de ker M, puis la décomposition.

    Raises:
        NoIsolationError        : d = 0
        InfeasibleIsolationError: s > d
        DomainError             : s < 1
    """
    n = ss.ccr.n
    d = isolation_rank(ss.M, n)
    if d == 0:
        raise NoIsolationError(
            "rang(M) = n : aucune isolation partielle possible",
            {"n": n, "rank_M": n},
        )
    if int(s) != s or s < 1:
        raise DomainError(f"L'ordre d'isolation s doit être un entier ≥ 1, reçu {s}")
    if s > d:
        raise InfeasibleIsolationError(
            f"Ordre s = {s} > d = {d}",
            {"s": int(s), "d": d, "n": n},
        )

    K = kernel_basis(ss.M)[:, : int(s)]
    F = 4.0 * K.T @ ss.ccr.theta
    F = F / np.linalg.norm(F, axis=1, keepdims=True)

    logger.info("Isolation | n=%d | d=%d | s=%d", n, d, s)
    return decompose(ss, F)


def decompose(ss: StateSpace, F: np.ndarray,
              T: Optional[np.ndarray] = None) -> IsolationDecomposition:
    """
    Décomposition (Φ, Ψ) pour un F quelconque de rang plein ligne.

    Un F non isolant (FB ≠ 0) est accepté avec un avertissement : il sert
    de cas témoin pour l'analyse de décohérence.

    Args:
        T: Complément (n−s)×n ; défaut : base orthonormée de ker F

    Raises:
        DimensionError: F ou T de forme incompatible
        RankError     : S = [F; T] singulière
    """
    F = as_matrix(F, "F")
    s, n = F.shape
    if n != ss.ccr.n:
        raise DimensionError(f"F doit avoir {ss.ccr.n} colonnes, forme {F.shape}")

    if T is None:
        T = np.zeros((0, n)) if s == n and numerical_rank(F) == n else row_complement(F)
    else:
        T = as_matrix(T, "T") if s < n else np.zeros((0, n))
        if T.shape != (n - s, n):
            raise DimensionError(f"T doit être de forme {(n - s, n)}, reçu {T.shape}")
    S = np.vstack([F, T])
    if numerical_rank(S) < n:
        raise RankError(
            "S = [F; T] singulière : T ne complète pas F",
            {"rank_S": numerical_rank(S), "n": n},
        )
    S_inv = np.linalg.inv(S)
    S1, S2 = S_inv[:, :s], S_inv[:, s:]

    G = F @ ss.A0
    FA = F @ ss.A
    fb_norm = float(np.linalg.norm(F @ ss.B))
    isolated = fb_norm <= ISOLATION_SETTINGS["fb_tol"] * (1.0 + np.linalg.norm(ss.B))
    if not isolated:
        logger.warning("F non isolant | ‖FB‖=%.3e", fb_norm)

    dec = IsolationDecomposition(
        F=F, T=T, S=S, S1=S1, S2=S2,
        a11=FA @ S1, a12=FA @ S2,
        a21=T @ ss.A @ S1, a22=T @ ss.A @ S2,
        b=T @ ss.B, G=G,
        fb_norm=fb_norm, isolated=bool(isolated),
    )
    logger.debug(
        "Décomposition | s=%d | ‖FB‖=%.3e | cond(S)=%.3e | ‖FA − G‖=%.3e",
        s, fb_norm, np.linalg.cond(S), np.linalg.norm(FA - G),
    )
    return dec


# ═══════════════════════════════════════════════════════════════════════════════
# FONCTIONS DE TRANSFERT
# ═══════════════════════════════════════════════════════════════════════════════

def _as_complex(u: FrequencyPoint) -> complex:
    if isinstance(u, tuple):
        return complex(float(u[0]), float(u[1]))
    return complex(u)


def _resolve(L: np.ndarray, rhs: np.ndarray, label: str, u: complex) -> np.ndarray:
    """L⁻¹·rhs avec contrôle du conditionnement."""
    if L.shape[0] == 0:
        return np.zeros((0, rhs.shape[1]), dtype=complex)
    cond = float(np.linalg.cond(L))
    if not np.isfinite(cond) or cond > ISOLATION_SETTINGS["pole_cond_max"]:
        raise PoleError(
            f"Résolvante singulière ({label}) en u = {u}",
            {"block": label, "u": [u.real, u.imag], "condition_number": cond},
        )
    return np.linalg.solve(L, rhs)


def transfer_eval(dec: IsolationDecomposition, u: FrequencyPoint) -> TransferValues:
    """
    Évalue en u :
      Φ(u) = (uI_s − a₁₁)⁻¹a₁₂
      [Ψ₁(u) Ψ₂(u)] = (uI_{n−s} − a₂₂)⁻¹[a₂₁ b]
      Γ(u) = Φ(u)(I − Ψ₁(u)Φ(u))⁻¹
      noise_map = Γ(u)Ψ₂(u)  (= F(uI − A)⁻¹B lorsque FB = 0)

    Raises:
        PoleError: résolvante mal conditionnée en u
    """
    u = _as_complex(u)
    s, n = dec.s, dec.n
    k = n - s
    m = dec.b.shape[1]
    if k == 0:
        empty = np.zeros((s, 0), dtype=complex)
        return TransferValues(
            u=u, Phi=empty, Psi1=np.zeros((0, s), dtype=complex),
            Psi2=np.zeros((0, m), dtype=complex), Gamma=empty,
            noise_map=np.zeros((s, m), dtype=complex),
        )

    Phi = _resolve(u * np.eye(s) - dec.a11, dec.a12.astype(complex), "a11", u)
    Psi = _resolve(
        u * np.eye(k) - dec.a22,
        np.hstack([dec.a21, dec.b]).astype(complex), "a22", u,
    )
    Psi1, Psi2 = Psi[:, :s], Psi[:, s:]

    loop = np.eye(k) - Psi1 @ Phi
    # Γ = Φ·loop⁻¹ ⇔ Γᵀ = loop⁻ᵀΦᵀ
    Gamma = _resolve(loop.T, Phi.T, "boucle", u).T

    return TransferValues(
        u=u, Phi=Phi, Psi1=Psi1, Psi2=Psi2, Gamma=Gamma, noise_map=Gamma @ Psi2,
    )


def full_resolvent_map(ss: StateSpace, F: np.ndarray, u: FrequencyPoint) -> np.ndarray:
    """F(uI − A)⁻¹B calculé sur le système complet."""
    u = _as_complex(u)
    n = ss.A.shape[0]
    return F @ _resolve(u * np.eye(n) - ss.A, ss.B.astype(complex), "A", u)


def initial_response(dec: IsolationDecomposition, u: FrequencyPoint) -> Dict[str, np.ndarray]:
    """
    Réponse à la condition initiale ζ(0) = SX(0).

    Les blocs agissent chacun sur leur propre sous-système :
      χ₁(u) = [(uI_s − a₁₁)⁻¹  0]          (s×n)
      χ₂(u) = [0  (uI_{n−s} − a₂₂)⁻¹]      ((n−s)×n)
    de sorte que φ̂ = χ₁ζ(0) + Φψ̂ et ψ̂ = χ₂ζ(0) + Ψ₁φ̂ + Ψ₂Ŵ. En éliminant ψ̂,
    la carte φ̂ ← ζ(0) vaut (I + ΓΨ₁)χ₁ + Γχ₂, c'est-à-dire la première
    ligne de blocs de (uI_n − a)⁻¹.
    """
    u = _as_complex(u)
    n, s = dec.n, dec.s
    k = n - s
    chi1 = np.zeros((s, n), dtype=complex)
    chi2 = np.zeros((k, n), dtype=complex)
    chi1[:, :s] = _resolve(u * np.eye(s) - dec.a11, np.eye(s, dtype=complex), "a11", u)
    if k:
        chi2[:, s:] = _resolve(u * np.eye(k) - dec.a22, np.eye(k, dtype=complex), "a22", u)
    values = transfer_eval(dec, u)
    initial_map = chi1 + values.Gamma @ (values.Psi1 @ chi1 + chi2)
    return {"chi1": chi1, "chi2": chi2, "initial_map": initial_map}


def is_autonomous(dec: IsolationDecomposition) -> Tuple[bool, np.ndarray, float]:
    """
    Teste ker F ⊆ ker G en résolvant G = NF au sens des moindres carrés.

    Returns:
        (autonome, N, résidu ‖NF − G‖) ; si autonome, φ̇ = Nφ
    """
    Nt, _ = lstsq_min_norm(dec.F.T, dec.G.T)
    N = Nt.T
    residual = float(np.linalg.norm(N @ dec.F - dec.G))
    flag = residual <= ISOLATION_SETTINGS["autonomy_tol"] * (1.0 + np.linalg.norm(dec.G))
    logger.debug("Autonomie | résidu=%.3e | autonome=%s", residual, flag)
    return bool(flag), N, residual
