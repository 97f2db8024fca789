"""
═══════════════════════════════════════════════════════════════════════════════
FICHIER: config/settings.py
Description: Configuration globale de qmemtime (tolérances, défauts, logging)
Version: 1.0.0
═══════════════════════════════════════════════════════════════════════════════
"""

import os
from pathlib import Path

from dotenv import load_dotenv

from app.core.errors import ValidationError

load_dotenv()  # Charge le .env (QMEMTIME_THREADS, QMEMTIME_LOG_LEVEL)

# ═══════════════════════════════════════════════════════════════════════════════
# CHEMINS PROJET
# ═══════════════════════════════════════════════════════════════════════════════

PROJECT_ROOT = Path(__file__).parent.parent

SCENARIOS_DIR = PROJECT_ROOT / "scenarios"

# ═══════════════════════════════════════════════════════════════════════════════
# CONFIGURATION APPLICATION
# ═══════════════════════════════════════════════════════════════════════════════

APP_SETTINGS = {
    "app_name": "qmemtime",
    "version": "1.0.0",
    "description": (
        "Temps de décohérence de mémoires quantiques à oscillateurs "
        "harmoniques ouverts partiellement isolés"
    ),
    "commands": [
        "realize", "isolate", "simulate", "decohere",
        "sweep", "optimize", "verify",
    ],
}

# ═══════════════════════════════════════════════════════════════════════════════
# CONFIGURATION NUMÉRIQUE
# ═══════════════════════════════════════════════════════════════════════════════

NUMERICS_SETTINGS = {
    # Rang numérique : σ ≤ tol·σ_max·max(lignes, colonnes)
    "rank_tol": 1e-10,
    # Valeurs propres négatives tolérées avant rejet (√P, Π ⪰ 0)
    "psd_tol": 1e-10,
    # Symétrie / antisymétrie des paires hermitiennes
    "hermitian_tol": 1e-12,
    # RK4 : pas h tel que ‖A‖·h ≤ rk4_safety ≤ 0.1
    "rk4_safety": 0.01,
    # Pas maximal quand A = 0
    "rk4_max_step": 0.05,
    # Quadrature adaptative de l'oracle grammien
    "quad_epsabs": 1e-12,
    "quad_epsrel": 1e-12,
}

# ═══════════════════════════════════════════════════════════════════════════════
# CONFIGURATION ISOLATION
# ═══════════════════════════════════════════════════════════════════════════════

ISOLATION_SETTINGS = {
    "default_order": 2,
    # Résidu maximal ‖FB‖ ≤ fb_tol·(1+‖B‖) pour qualifier F d'isolant
    "fb_tol": 1e-10,
    # Seuil de conditionnement pour signaler un pôle de la résolvante
    "pole_cond_max": 1e12,
    # Résidu lstsq G = NF pour le test ker F ⊆ ker G
    "autonomy_tol": 1e-8,
}

# ═══════════════════════════════════════════════════════════════════════════════
# CONFIGURATION TRAJECTOIRES & DÉCOHÉRENCE
# ═══════════════════════════════════════════════════════════════════════════════

DECOHERENCE_SETTINGS = {
    "grid_points": 2001,
    "default_epsilon": 1e-3,
    # t_max = horizon_factor·τ̂(ε) si l'asymptote existe, sinon horizon_factor/‖A‖
    "horizon_factor": 10.0,
    # t_max de repli quand A = 0
    "fallback_t_max": 10.0,
    # bisect_tol = bisect_rel_tol·t_max
    "bisect_rel_tol": 1e-9,
    "max_bisections": 200,
    # |Δ'| < tangency_tol au croisement → drapeau de quasi-tangence
    "tangency_tol": 1e-8,
    "eps_grid": [1e-2, 1e-3, 1e-4, 1e-5],
    # Δ ≤ trivial_scale_tol·… → cas trivial ‖F√P‖² ≈ 0
    "trivial_scale_tol": 1e-14,
}

# ═══════════════════════════════════════════════════════════════════════════════
# CONFIGURATION OPTIMISEUR
# ═══════════════════════════════════════════════════════════════════════════════

OPTIMIZER_SETTINGS = {
    # Coupure SVD relative du solveur moindres carrés
    "lstsq_tol": 1e-12,
    # residual ≤ residual_tol·(1 + ‖K‖_F)
    "residual_tol": 1e-8,
    # grad_norm ≤ grad_tol·(1 + ‖K‖_F)
    "grad_tol": 1e-6,
    # ε de référence pour le rapport τ̂ avant/après
    "reference_epsilon": 1e-3,
}

# ═══════════════════════════════════════════════════════════════════════════════
# CONFIGURATION EXPORT
# ═══════════════════════════════════════════════════════════════════════════════

EXPORT_SETTINGS = {
    "float_format": "%.17g",
    "json_indent": 2,
    "files": {
        "realize": "state_space.json",
        "isolate": "isolation.json",
        "simulate": "delta_trajectory.csv",
        "decohere_json": "decoherence_report.json",
        "decohere_csv": "decoherence_report.csv",
        "sweep": "sweep.csv",
        "optimize": "r12_opt.json",
        "optimize_report": "optimization_report.json",
        "verify": "verify_report.json",
    },
}

# ═══════════════════════════════════════════════════════════════════════════════
# CONFIGURATION PARALLÉLISME
# ═══════════════════════════════════════════════════════════════════════════════

PARALLEL_SETTINGS = {
    "threads": os.getenv("QMEMTIME_THREADS", "1"),
    "backend": "threading",
}


def parallel_jobs() -> int:
    """Nombre de threads joblib lu depuis QMEMTIME_THREADS (entier ≥ 1)."""
    raw = PARALLEL_SETTINGS["threads"]
    try:
        n_jobs = int(str(raw).strip())
    except ValueError:
        raise ValidationError(
            f"QMEMTIME_THREADS doit être un entier, reçu {raw!r}", {"QMEMTIME_THREADS": raw}
        ) from None
    if n_jobs < 1:
        raise ValidationError(
            f"QMEMTIME_THREADS doit être ≥ 1, reçu {n_jobs}", {"QMEMTIME_THREADS": raw}
        )
    return n_jobs

# ═══════════════════════════════════════════════════════════════════════════════
# CONFIGURATION LOGGING
# ═══════════════════════════════════════════════════════════════════════════════

LOGGING_SETTINGS = {
    "level": os.getenv("QMEMTIME_LOG_LEVEL", "INFO"),
    "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    "loggers": {
        "app.core.numerics": "WARNING",
        "app.core.decoherence": "INFO",
        "app.core.optimizer": "INFO",
    },
}

# ═══════════════════════════════════════════════════════════════════════════════
# VALIDATION CONFIGURATION
# ═══════════════════════════════════════════════════════════════════════════════

def validate_settings() -> None:
    """
    Valide la cohérence de la configuration au démarrage du CLI.

    Lève ValidationError (code 2) si une tolérance est hors domaine.
    """
    if not 0.0 < NUMERICS_SETTINGS["rk4_safety"] <= 0.1:
        raise ValidationError(
            "rk4_safety doit appartenir à ]0, 0.1] (‖A‖·h ≤ 0.1)",
            {"rk4_safety": NUMERICS_SETTINGS["rk4_safety"]},
        )

    if DECOHERENCE_SETTINGS["grid_points"] < 2:
        raise ValidationError(
            "grid_points doit être ≥ 2", {"grid_points": DECOHERENCE_SETTINGS["grid_points"]}
        )

    parallel_jobs()


__all__ = [
    "PROJECT_ROOT",
    "SCENARIOS_DIR",
    "APP_SETTINGS",
    "NUMERICS_SETTINGS",
    "ISOLATION_SETTINGS",
    "DECOHERENCE_SETTINGS",
    "OPTIMIZER_SETTINGS",
    "EXPORT_SETTINGS",
    "PARALLEL_SETTINGS",
    "parallel_jobs",
    "LOGGING_SETTINGS",
    "validate_settings",
]
