"""
═══════════════════════════════════════════════════════════════════════════════
MODULE: app/core/numerics.py
Fonction: Noyaux d'algèbre linéaire dense et d'intégration
Version: 1.0.0
═══════════════════════════════════════════════════════════════════════════════

Toutes les matrices réelles sont des np.ndarray float64 (RealMatrix).
Les matrices complexes hermitiennes (Ω = I + iJ, V(t), Υ(t)) sont portées
par HermitianPair (re symétrique, im antisymétrique) : le reste du code
reste en arithmétique réelle et « Re V(t) » est un simple accès d'attribut.

Noyaux :
  - expm            : e^{tA} (scaling-and-squaring Padé, scipy.linalg)
  - sqrtm_psd       : √P par décomposition spectrale, clamp des négatifs
  - kernel_basis    : base orthonormée de ker M (SVD)
  - row_complement  : T orthonormé complétant F en S = [F; T] inversible
  - lstsq_min_norm  : solution moindres carrés de norme minimale (SVD)
  - integrate_lyapunov : V̇ = AV + VAᵀ + ℧ par RK4 à pas fixe
  - gramian_quadrature : oracle ∫₀ᵗ e^{sA}BΩBᵀe^{sAᵀ}ds par quadrature adaptative
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy import integrate

from config.settings import NUMERICS_SETTINGS
from app.core.errors import (
    DimensionError,
    DomainError,
    GridError,
    NotPSDError,
    RankError,
    ValidationError,
)

logger = logging.getLogger(__name__)


# ═══════════════════════════════════════════════════════════════════════════════
# TYPES
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class HermitianPair:
    """
    Matrice hermitienne X = re + i·im stockée en deux parties réelles.

    Attributs:
        re: Partie réelle (symétrique)
        im: Partie imaginaire (antisymétrique)
    """

    re: np.ndarray
    im: np.ndarray

    def __post_init__(self) -> None:
        if self.re.shape != self.im.shape or self.re.ndim != 2 \
                or self.re.shape[0] != self.re.shape[1]:
            raise DimensionError(
                f"HermitianPair : formes incompatibles {self.re.shape} / {self.im.shape}"
            )

    @property
    def order(self) -> int:
        return int(self.re.shape[0])

    @classmethod
    def zeros(cls, n: int) -> "HermitianPair":
        return cls(np.zeros((n, n)), np.zeros((n, n)))

    @classmethod
    def from_complex(cls, X: np.ndarray) -> "HermitianPair":
        return cls(np.real(X).copy(), np.imag(X).copy())

    def to_complex(self) -> np.ndarray:
        return self.re + 1j * self.im

    def check(self, tol: Optional[float] = None) -> None:
        """Vérifie re = reᵀ et im = −imᵀ à `tol` près."""
        tol = NUMERICS_SETTINGS["hermitian_tol"] if tol is None else tol
        asym = float(np.max(np.abs(self.re - self.re.T), initial=0.0))
        sym = float(np.max(np.abs(self.im + self.im.T), initial=0.0))
        if asym > tol or sym > tol:
            raise ValidationError(
                "HermitianPair non hermitienne",
                {"re_asymmetry": asym, "im_symmetry": sym},
            )


# ═══════════════════════════════════════════════════════════════════════════════
# UTILITAIRES
# ═══════════════════════════════════════════════════════════════════════════════

def as_matrix(X, name: str = "matrice") -> np.ndarray:
    """Convertit en ndarray 2-D float64 fini."""
    arr = np.atleast_2d(np.asarray(X, dtype=float))
    if arr.ndim != 2:
        raise DimensionError(f"{name} doit être 2-D, reçu ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contient des valeurs non finies")
    return arr


def require_square(A: np.ndarray, name: str = "A") -> None:
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"{name} doit être carrée, forme {A.shape}")


def symmetrize(X: np.ndarray) -> np.ndarray:
    """Symétriseur 𝐒(X) = ½(X + Xᵀ)."""
    return 0.5 * (X + X.T)


def symmetry_gap(X: np.ndarray) -> float:
    """max |X − Xᵀ|."""
    return float(np.max(np.abs(X - X.T), initial=0.0))


def frobenius_inner(X: np.ndarray, Y: np.ndarray) -> float:
    """Produit de Frobenius ⟨X, Y⟩ = tr(XᵀY)."""
    return float(np.sum(X * Y))


# ═══════════════════════════════════════════════════════════════════════════════
# EXPONENTIELLE & RACINE CARRÉE
# ═══════════════════════════════════════════════════════════════════════════════

def expm(A: np.ndarray, t: float = 1.0) -> np.ndarray:
    """
    Calcule e^{tA}.

    Délègue à scipy.linalg.expm (scaling-and-squaring avec approximant de
    Padé d'ordre choisi selon la norme).

    Raises:
        DimensionError: si A n'est pas carrée
        DomainError   : si t n'est pas fini
    """
    A = np.asarray(A, dtype=float)
    require_square(A)
    if not math.isfinite(t):
        raise DomainError(f"t doit être fini, reçu {t}")
    if t == 0.0:
        return np.eye(A.shape[0])
    return scipy.linalg.expm(t * A)


def sqrtm_psd(P: np.ndarray, tol: Optional[float] = None) -> np.ndarray:
    """
    Racine carrée symétrique d'une matrice symétrique semi-définie positive.

    Les valeurs propres dans [−tol, 0) sont ramenées à 0.

    Raises:
        NotPSDError: si une valeur propre est < −tol
    """
    tol = NUMERICS_SETTINGS["psd_tol"] if tol is None else tol
    P = as_matrix(P, "P")
    require_square(P, "P")
    eigvals, eigvecs = np.linalg.eigh(symmetrize(P))
    lam_min = float(eigvals.min(initial=0.0))
    if lam_min < -tol:
        raise NotPSDError(
            f"Matrice non PSD : λ_min = {lam_min:.3e} < −{tol:.1e}",
            {"lambda_min": lam_min},
        )
    root = np.sqrt(np.clip(eigvals, 0.0, None))
    return symmetrize((eigvecs * root) @ eigvecs.T)


# ═══════════════════════════════════════════════════════════════════════════════
# NOYAU, COMPLÉMENT, MOINDRES CARRÉS
# ═══════════════════════════════════════════════════════════════════════════════

def numerical_rank(M: np.ndarray, tol: Optional[float] = None) -> int:
    """Rang décidé par σ > tol·σ_max·max(lignes, colonnes)."""
    tol = NUMERICS_SETTINGS["rank_tol"] if tol is None else tol
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0
    sv = np.linalg.svd(M, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    cutoff = tol * sv[0] * max(M.shape)
    return int(np.sum(sv > cutoff))


def kernel_basis(M: np.ndarray, tol: Optional[float] = None) -> np.ndarray:
    """
    Base orthonormée de ker M.

    Les colonnes sont les vecteurs singuliers à droite associés aux
    valeurs singulières nulles (au sens de `numerical_rank`), dans l'ordre
    de la SVD (valeurs singulières décroissantes puis zéros implicites).

    Returns:
        Matrice n×d, d = n − rang(M) (éventuellement n×0)
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    n = M.shape[1]
    rank = numerical_rank(M, tol)
    _, _, vh = np.linalg.svd(M, full_matrices=True)
    K = vh[rank:].T.copy()
    logger.debug("kernel_basis | n=%d | rang=%d | d=%d", n, rank, K.shape[1])
    return K.reshape(n, n - rank)


def row_complement(F: np.ndarray, tol: Optional[float] = None) -> np.ndarray:
    """
    Complète F (s×n, rang plein ligne) par T ((n−s)×n) à lignes orthonormées
    engendrant l'orthogonal de l'espace ligne de F.

    Raises:
        RankError: si rang(F) < s ou s ≥ n
    """
    F = as_matrix(F, "F")
    s, n = F.shape
    if s >= n:
        raise RankError(f"F doit avoir moins de lignes que de colonnes ({s}×{n})")
    rank = numerical_rank(F, tol)
    if rank < s:
        raise RankError(
            f"F de rang {rank} < {s} lignes",
            {"rank": rank, "rows": s},
        )
    return kernel_basis(F, tol).T.copy()


def lstsq_min_norm(
    L: np.ndarray,
    b: np.ndarray,
    tol: Optional[float] = None,
) -> Tuple[np.ndarray, float]:
    """
    Solution moindres carrés de norme minimale de L·x ≈ b.

    Coupure SVD : valeurs singulières ≤ tol·σ_max ignorées.

    Returns:
        Tuple (x, ‖L·x − b‖₂)
    """
    tol = NUMERICS_SETTINGS["rank_tol"] if tol is None else tol
    L = np.atleast_2d(np.asarray(L, dtype=float))
    b = np.asarray(b, dtype=float)
    if L.shape[0] != b.shape[0]:
        raise DimensionError(
            f"lstsq : L a {L.shape[0]} lignes, b en a {b.shape[0]}"
        )
    x, *_ = np.linalg.lstsq(L, b, rcond=tol)
    residual = float(np.linalg.norm(L @ x - b))
    return x, residual


# ═══════════════════════════════════════════════════════════════════════════════
# ÉQUATION DIFFÉRENTIELLE DE LYAPUNOV
# ═══════════════════════════════════════════════════════════════════════════════

def rk4_substep(A: np.ndarray) -> float:
    """Pas maximal h tel que ‖A‖₂·h ≤ rk4_safety."""
    norm_a = float(np.linalg.norm(A, 2)) if A.size else 0.0
    if norm_a == 0.0:
        return float(NUMERICS_SETTINGS["rk4_max_step"])
    return float(NUMERICS_SETTINGS["rk4_safety"]) / norm_a


def integrate_lyapunov(
    A: np.ndarray,
    mho: HermitianPair,
    t_grid: Sequence[float],
    initial: Optional[HermitianPair] = None,
) -> List[HermitianPair]:
    """
    Intègre V̇ = AV + VAᵀ + ℧ sur la grille `t_grid` (parties re/im séparées).

    RK4 classique à sous-pas fixe : chaque intervalle [t_i, t_{i+1}] est
    découpé en ⌈Δt/h⌉ sous-pas égaux avec ‖A‖·h ≤ rk4_safety, de sorte que
    le résultat est reproductible bit à bit.

    Args:
        A      : Matrice de dynamique n×n
        mho    : ℧ = BΩBᵀ
        t_grid : Instants croissants, t_grid[0] = 0
        initial: V(0) (défaut : 0)

    Returns:
        Liste des V(t_i)

    Raises:
        GridError     : grille vide, ne partant pas de 0 ou non croissante
        DimensionError: ordres incompatibles
    """
    A = np.asarray(A, dtype=float)
    require_square(A)
    n = A.shape[0]
    if mho.order != n:
        raise DimensionError(f"℧ d'ordre {mho.order}, A d'ordre {n}")

    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or grid[0] != 0.0:
        raise GridError("La grille doit être non vide et commencer à 0")
    if grid.size > 1 and np.any(np.diff(grid) <= 0.0):
        raise GridError("La grille doit être strictement croissante")

    forcing = np.stack([mho.re, mho.im])
    state = np.zeros((2, n, n)) if initial is None else \
        np.stack([initial.re, initial.im]).astype(float)
    At = A.T

    def rhs(V: np.ndarray) -> np.ndarray:
        return A @ V + V @ At + forcing

    h_max = rk4_substep(A)
    samples: List[HermitianPair] = [_pair_from_state(state)]
    total_steps = 0

    for dt in np.diff(grid):
        n_sub = max(1, int(math.ceil(dt / h_max)))
        h = dt / n_sub
        for _ in range(n_sub):
            k1 = rhs(state)
            k2 = rhs(state + 0.5 * h * k1)
            k3 = rhs(state + 0.5 * h * k2)
            k4 = rhs(state + h * k3)
            state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        total_steps += n_sub
        samples.append(_pair_from_state(state))

    logger.debug(
        "integrate_lyapunov | n=%d | points=%d | sous-pas=%d | h_max=%.3e",
        n, grid.size, total_steps, h_max,
    )
    return samples


def _pair_from_state(state: np.ndarray) -> HermitianPair:
    return HermitianPair(
        symmetrize(state[0]),
        0.5 * (state[1] - state[1].T),
    )


def gramian_quadrature(
    A: np.ndarray,
    B: np.ndarray,
    J_field: np.ndarray,
    t: float,
) -> HermitianPair:
    """
    Oracle indépendant : ∫₀ᵗ e^{sA}B(I + iJ)Bᵀe^{sAᵀ}ds.

    Quadrature adaptative vectorielle (scipy.integrate.quad_vec) ;
    partie réelle avec BBᵀ, partie imaginaire avec BJBᵀ.

    Raises:
        DomainError: si t < 0
    """
    if t < 0.0:
        raise DomainError(f"t doit être ≥ 0, reçu {t}")
    A = np.asarray(A, dtype=float)
    B = np.atleast_2d(np.asarray(B, dtype=float))
    require_square(A)
    n = A.shape[0]
    if t == 0.0:
        return HermitianPair.zeros(n)

    forcing = np.stack([B @ B.T, B @ J_field @ B.T])

    def integrand(s: float) -> np.ndarray:
        E = scipy.linalg.expm(s * A)
        return E @ forcing @ E.T

    value, err = integrate.quad_vec(
        integrand, 0.0, float(t),
        epsabs=NUMERICS_SETTINGS["quad_epsabs"],
        epsrel=NUMERICS_SETTINGS["quad_epsrel"],
    )
    logger.debug("gramian_quadrature | t=%.4g | err_estimée=%.3e", t, err)
    return _pair_from_state(value)
