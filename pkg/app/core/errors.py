"""
═══════════════════════════════════════════════════════════════════════════════
MODULE: app/core/errors.py
Fonction: Hiérarchie d'exceptions métier et codes de sortie associés
Version: 1.0.0
═══════════════════════════════════════════════════════════════════════════════

Chaque exception porte un `exit_code` consommé par le CLI :
  - 2 : validation (dimensions, domaines, données non physiques)
  - 3 : échec numérique (rang, PSD, pôle, optimalité)
  - 4 : isolation partielle infaisable
"""

from typing import Any, Dict, Optional

from config.constants import EXIT_CODES


class QmemError(Exception):
    """Racine des erreurs qmemtime."""

    exit_code: int = EXIT_CODES["numeric"]

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """Export JSON (stderr du CLI)."""
        return {
            "error": type(self).__name__,
            "exit_code": self.exit_code,
            "message": self.message,
            "details": self.details,
        }


# ═══════════════════════════════════════════════════════════════════════════════
# FAMILLE VALIDATION (exit 2)
# ═══════════════════════════════════════════════════════════════════════════════

class ValidationFailure(QmemError, ValueError):
    exit_code = EXIT_CODES["validation"]


class DimensionError(ValidationFailure):
    """Dimensions incompatibles."""


class ValidationError(ValidationFailure):
    """Donnée mal formée (R asymétrique, D non sélectif, …)."""


class DomainError(ValidationFailure):
    """Argument hors domaine (ν = 0, m impair, ε ≤ 0, t < 0)."""


class GridError(ValidationFailure):
    """Grille temporelle non croissante ou ne partant pas de 0."""


class TrivialCaseError(ValidationFailure):
    """‖F√P‖² ≈ 0 : τ(ε) = 0 trivialement."""


class UnphysicalStateError(ValidationFailure):
    """P + iΘ non semi-définie positive."""


class PreconditionError(ValidationFailure):
    """Précondition violée (ex. z ≤ Δ(t) pour la borne de Markov)."""


class ScenarioError(ValidationFailure):
    """Scénario invalide ; `report` liste toutes les alertes."""

    def __init__(self, message: str, report: Any = None):
        alerts = [] if report is None else [a.to_dict() for a in report.alerts]
        super().__init__(message, {"alerts": alerts})
        self.report = report


# ═══════════════════════════════════════════════════════════════════════════════
# FAMILLE NUMÉRIQUE (exit 3)
# ═══════════════════════════════════════════════════════════════════════════════

class NumericFailure(QmemError, ArithmeticError):
    exit_code = EXIT_CODES["numeric"]


class NotPSDError(NumericFailure):
    """Matrice non semi-définie positive au-delà de la tolérance."""


class RankError(NumericFailure):
    """Matrice de rang insuffisant."""


class PoleError(NumericFailure):
    """Résolvante singulière au point d'évaluation."""


class AsymptoteError(NumericFailure):
    """G√P = 0 : l'asymptote haute fidélité n'est pas applicable."""


class OptimalityViolationError(NumericFailure):
    """Résidu de la condition g(R₁₂) + K = 0 au-dessus de la tolérance."""


# ═══════════════════════════════════════════════════════════════════════════════
# FAMILLE ISOLATION (exit 4)
# ═══════════════════════════════════════════════════════════════════════════════

class IsolationFailure(QmemError, ValueError):
    exit_code = EXIT_CODES["infeasible_isolation"]


class InfeasibleIsolationError(IsolationFailure):
    """Ordre s > d = n − rang(M)."""


class NoIsolationError(IsolationFailure):
    """d = 0 : aucune isolation partielle possible."""
