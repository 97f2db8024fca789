"""
═══════════════════════════════════════════════════════════════════════════════
FICHIER: config/constants.py
Description: Constantes structurelles (CCR, codes de sortie, schémas d'export)
Version: 1.0.0
═══════════════════════════════════════════════════════════════════════════════

Ce fichier centralise :
  - Le bloc symplectique élémentaire bJ
  - La version du schéma des scénarios
  - Les codes de sortie du CLI
  - Les en-têtes CSV des artefacts
  - Les émojis de statut des rapports de validation
"""

from typing import Dict, List

import numpy as np

# ═══════════════════════════════════════════════════════════════════════════════
# STRUCTURE CCR
# ═══════════════════════════════════════════════════════════════════════════════

#: Bloc bJ = [[0, 1], [-1, 0]] ; Θ = ½ I_ν ⊗ bJ et J = I_{m/2} ⊗ bJ
BJ: np.ndarray = np.array([[0.0, 1.0], [-1.0, 0.0]])

#: Ordre des variables : (q₁, p₁, q₂, p₂, …)
VARIABLE_ORDERING: str = "q1,p1,q2,p2,..."

# ═══════════════════════════════════════════════════════════════════════════════
# SCHÉMA SCÉNARIO
# ═══════════════════════════════════════════════════════════════════════════════

SCHEMA_VERSION: str = "1.0"

SCENARIO_MODES: List[str] = ["single", "interconnection"]

# ═══════════════════════════════════════════════════════════════════════════════
# CODES DE SORTIE CLI
# ═══════════════════════════════════════════════════════════════════════════════

EXIT_CODES: Dict[str, int] = {
    "ok": 0,
    "validation": 2,
    "numeric": 3,
    "infeasible_isolation": 4,
}

# ═══════════════════════════════════════════════════════════════════════════════
# COLONNES D'EXPORT CSV
# ═══════════════════════════════════════════════════════════════════════════════

TRAJECTORY_COLUMNS: List[str] = ["t", "delta", "state_term", "noise_term"]

SWEEP_COLUMNS: List[str] = [
    "epsilon", "tau", "tau_hat", "ratio", "fitted_slope",
]

DECOHERENCE_COLUMNS: List[str] = [
    "epsilon", "tau", "tau_hat", "ratio", "threshold",
    "t_lo", "t_hi", "reached_t_max", "near_tangent",
]

# ═══════════════════════════════════════════════════════════════════════════════
# ÉMOJIS STATUT (RAPPORTS)
# ═══════════════════════════════════════════════════════════════════════════════

STATUS_EMOJI: Dict[str, str] = {
    "ok": "✅",
    "warning": "⚠️",
    "error": "❌",
    "critical": "⛔",
    "info": "ℹ️",
}


__all__ = [
    "BJ",
    "VARIABLE_ORDERING",
    "SCHEMA_VERSION",
    "SCENARIO_MODES",
    "EXIT_CODES",
    "TRAJECTORY_COLUMNS",
    "SWEEP_COLUMNS",
    "DECOHERENCE_COLUMNS",
    "STATUS_EMOJI",
]
