"""
═══════════════════════════════════════════════════════════════════════════════
MODULE: app/core/validator.py
Fonction: Validation des scénarios (dimensions, symétries, domaines)
Version: 1.0.0
═══════════════════════════════════════════════════════════════════════════════
Ce module valide un scénario brut (dictionnaire JSON) AVANT tout calcul :
  - Version de schéma et mode ("single" / "interconnection")
  - Blocs d'oscillateurs : ν, R (n×n symétrique), M (m×n, m pair), D, N
  - Couplage direct R12, matrice P, ordre d'isolation, options d'analyse

Toutes les anomalies sont collectées (pas seulement la première) dans un
ValidationReport ; le chargeur lève ScenarioError si une alerte ERROR ou
CRITICAL est présente.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional
import logging

import numpy as np

from config.constants import SCENARIO_MODES, SCHEMA_VERSION, STATUS_EMOJI
from config.settings import NUMERICS_SETTINGS

logger = logging.getLogger(__name__)


# ═══════════════════════════════════════════════════════════════════════════════
# ÉNUMÉRATIONS & CLASSES DE DONNÉES
# ═══════════════════════════════════════════════════════════════════════════════

class Severity(Enum):
    """Niveau de gravité des alertes de validation."""
    INFO     = "info"      # Information — pas d'action requise
    WARNING  = "warning"   # Attention recommandée
    ERROR    = "error"     # Donnée invalide
    CRITICAL = "critical"  # Scénario illisible


@dataclass
class ValidationAlert:
    """
    Alerte unitaire de validation.

    Attributs:
        severity      : Niveau de gravité
        category      : Catégorie ("Dimensions", "Symétrie", "Domaine", …)
        message       : Description du problème, nom du bloc inclus
        recommendation: Action corrective proposée
        block         : Bloc concerné (ex: "osc1.R")
        value         : Mesure associée (ex: norme d'asymétrie)
    """

    severity:       Severity
    category:       str
    message:        str
    recommendation: str
    block:          Optional[str] = None
    value:          Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        """Export en dictionnaire (sérialisation JSON)."""
        return {
            "severity":       self.severity.value,
            "category":       self.category,
            "message":        self.message,
            "recommendation": self.recommendation,
            "block":          self.block,
            "value":          self.value,
            "emoji":          STATUS_EMOJI.get(self.severity.value, "ℹ️"),
        }


@dataclass
class ValidationReport:
    """
    Rapport de validation d'un scénario.

    Attributs:
        is_valid: Aucune alerte ERROR ni CRITICAL
        alerts  : Liste complète des alertes
    """

    is_valid: bool
    alerts:   List[ValidationAlert]

    def get_critical_alerts(self) -> List[ValidationAlert]:
        return [a for a in self.alerts if a.severity == Severity.CRITICAL]

    def get_errors(self) -> List[ValidationAlert]:
        return [a for a in self.alerts if a.severity == Severity.ERROR]

    def get_warnings(self) -> List[ValidationAlert]:
        return [a for a in self.alerts if a.severity == Severity.WARNING]

    @property
    def verdict_label(self) -> str:
        """"VALIDE" ou "INVALIDE"."""
        return "VALIDE" if self.is_valid else "INVALIDE"


# ═══════════════════════════════════════════════════════════════════════════════
# OUTILS
# ═══════════════════════════════════════════════════════════════════════════════

def _error(category: str, message: str, recommendation: str,
           block: Optional[str] = None, value: Optional[float] = None) -> ValidationAlert:
    return ValidationAlert(
        severity=Severity.ERROR, category=category, message=message,
        recommendation=recommendation, block=block, value=value,
    )


def _as_array(raw: Any, block: str, alerts: List[ValidationAlert]) -> Optional[np.ndarray]:
    """Convertit une liste imbriquée en matrice 2-D finie ou ajoute une alerte."""
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        alerts.append(_error(
            "Format", f"{block} n'est pas une matrice numérique rectangulaire",
            "Fournir une liste de lignes de même longueur", block,
        ))
        return None
    if arr.ndim != 2:
        alerts.append(_error(
            "Format", f"{block} doit être une matrice 2-D (ndim={arr.ndim})",
            "Fournir une liste de lignes, ex. [[1, 0], [0, 1]]", block,
        ))
        return None
    if not np.all(np.isfinite(arr)):
        alerts.append(_error(
            "Format", f"{block} contient des valeurs non finies",
            "Remplacer NaN/Inf par des valeurs finies", block,
        ))
        return None
    return arr


def _check_shape(arr: Optional[np.ndarray], shape: tuple, block: str,
                 alerts: List[ValidationAlert]) -> bool:
    if arr is None:
        return False
    if arr.shape != shape:
        alerts.append(_error(
            "Dimensions",
            f"{block} : dimensions {arr.shape[0]}×{arr.shape[1]} au lieu de {shape[0]}×{shape[1]}",
            "Respecter l'ordre des variables (q₁, p₁, q₂, p₂, …)", block,
        ))
        return False
    return True


def _check_symmetric(arr: np.ndarray, block: str, alerts: List[ValidationAlert]) -> None:
    gap = float(np.max(np.abs(arr - arr.T), initial=0.0))
    tol = NUMERICS_SETTINGS["hermitian_tol"] * (1.0 + float(np.max(np.abs(arr), initial=0.0)))
    if gap > tol:
        alerts.append(_error(
            "Symétrie",
            f"{block} n'est pas symétrique : ‖{block} − {block}ᵀ‖_max = {gap:.3e}",
            f"Remplacer {block} par ½({block} + {block}ᵀ)", block, gap,
        ))


# ═══════════════════════════════════════════════════════════════════════════════
# VALIDATEURS MODULAIRES
# ═══════════════════════════════════════════════════════════════════════════════

def validate_oscillator(raw: Dict[str, Any], label: str) -> List[ValidationAlert]:
    """
    Valide un bloc oscillateur (ν, R, M, D optionnel).

    Returns:
        Liste d'alertes
    """
    alerts: List[ValidationAlert] = []
    nu = raw.get("nu")
    if not isinstance(nu, int) or isinstance(nu, bool) or nu < 1:
        alerts.append(_error(
            "Domaine", f"{label}.nu = {nu!r} doit être un entier ≥ 1",
            "Indiquer le nombre de modes ν", f"{label}.nu",
        ))
        return alerts
    n = 2 * nu

    R = _as_array(raw.get("R"), f"{label}.R", alerts)
    if _check_shape(R, (n, n), f"{label}.R", alerts):
        _check_symmetric(R, f"{label}.R", alerts)

    M = _as_array(raw.get("M"), f"{label}.M", alerts)
    if M is None:
        return alerts
    m = M.shape[0]
    if M.shape[1] != n:
        alerts.append(_error(
            "Dimensions", f"{label}.M a {M.shape[1]} colonnes au lieu de n = {n}",
            "M doit être m×n", f"{label}.M",
        ))
    if m < 2 or m % 2:
        alerts.append(_error(
            "Domaine", f"{label}.M a m = {m} lignes, m doit être pair et ≥ 2",
            "Les canaux de champ vont par paires (q, p)", f"{label}.M",
        ))
        return alerts

    if raw.get("D") is not None:
        D = _as_array(raw["D"], f"{label}.D", alerts)
        if D is not None:
            alerts.extend(_validate_selector(D, m, f"{label}.D"))
    return alerts


def _validate_selector(D: np.ndarray, m: int, block: str) -> List[ValidationAlert]:
    alerts: List[ValidationAlert] = []
    r = D.shape[0]
    if D.shape[1] != m or r > m or r % 2:
        alerts.append(_error(
            "Dimensions", f"{block} : forme {D.shape}, attendu r×{m} avec r pair ≤ {m}",
            "Sélectionner des paires de sorties", block,
        ))
        return alerts
    binary = np.all((D == 0.0) | (D == 1.0))
    if not binary or np.any(D.sum(axis=1) != 1.0) or np.any(D.sum(axis=0) > 1.0):
        alerts.append(_error(
            "Sélecteur", f"{block} n'est pas une sélection de lignes d'une matrice de permutation",
            "Un seul 1 par ligne, au plus un par colonne, zéros ailleurs", block,
        ))
    return alerts


def _oscillator_dims(raw: Dict[str, Any]) -> Optional[Dict[str, int]]:
    """(n, m, r) d'un bloc déjà validé."""
    try:
        n = 2 * int(raw["nu"])
        m = len(raw["M"])
        r = len(raw["D"]) if raw.get("D") is not None else m
    except (KeyError, TypeError, ValueError):
        return None
    return {"n": n, "m": m, "r": r}


def validate_interconnection_blocks(
    oscillators: List[Dict[str, Any]],
    R12_raw: Any,
) -> List[ValidationAlert]:
    """Valide N₁ (r₂×n₁), N₂ (r₁×n₂) et R12 (n₁×n₂)."""
    alerts: List[ValidationAlert] = []
    dims = [_oscillator_dims(o) for o in oscillators]
    if any(d is None for d in dims):
        return alerts
    d1, d2 = dims
    for k, (own, other) in enumerate(((d1, d2), (d2, d1)), start=1):
        block = f"osc{k}.N"
        N = _as_array(oscillators[k - 1].get("N"), block, alerts)
        _check_shape(N, (other["r"], own["n"]), block, alerts)
    if R12_raw is not None:
        R12 = _as_array(R12_raw, "R12", alerts)
        _check_shape(R12, (d1["n"], d2["n"]), "R12", alerts)
    return alerts


def validate_initial_moments(P_raw: Any, n: int) -> List[ValidationAlert]:
    """P symétrique n×n ; la physicalité P + iΘ ⪰ 0 est contrôlée plus tard."""
    alerts: List[ValidationAlert] = []
    if P_raw is None:
        return alerts
    P = _as_array(P_raw, "P", alerts)
    if _check_shape(P, (n, n), "P", alerts):
        _check_symmetric(P, "P", alerts)
    return alerts


def validate_options(isolation: Dict[str, Any], analysis: Dict[str, Any],
                     n: int) -> List[ValidationAlert]:
    """Ordre d'isolation et options d'analyse."""
    alerts: List[ValidationAlert] = []
    s = isolation.get("s", None)
    if s is not None and (not isinstance(s, int) or isinstance(s, bool) or s < 1):
        alerts.append(_error(
            "Domaine", f"isolation.s = {s!r} doit être un entier ≥ 1",
            "Choisir 1 ≤ s ≤ n − rang(M)", "isolation.s",
        ))
    if isolation.get("F_override") is not None:
        F = _as_array(isolation["F_override"], "isolation.F_override", alerts)
        if F is not None and F.shape[1] != n:
            alerts.append(_error(
                "Dimensions", f"isolation.F_override a {F.shape[1]} colonnes au lieu de {n}",
                "F doit être s×n", "isolation.F_override",
            ))

    for key in ("epsilon", "t_max"):
        value = analysis.get(key)
        if value is not None and (not isinstance(value, (int, float)) or value <= 0):
            alerts.append(_error(
                "Domaine", f"analysis.{key} = {value!r} doit être > 0",
                "Fournir un réel strictement positif", f"analysis.{key}",
            ))
    grid_points = analysis.get("grid_points")
    if grid_points is not None and (not isinstance(grid_points, int) or grid_points < 2):
        alerts.append(_error(
            "Domaine", f"analysis.grid_points = {grid_points!r} doit être un entier ≥ 2",
            "Valeur par défaut : 2001", "analysis.grid_points",
        ))
    eps_grid = analysis.get("eps_grid")
    if eps_grid is not None:
        if not isinstance(eps_grid, list) or not eps_grid or \
                any(not isinstance(e, (int, float)) or e <= 0 for e in eps_grid):
            alerts.append(_error(
                "Domaine", "analysis.eps_grid doit être une liste non vide de réels > 0",
                "Exemple : [1e-2, 1e-3, 1e-4, 1e-5]", "analysis.eps_grid",
            ))
    return alerts


# ═══════════════════════════════════════════════════════════════════════════════
# POINT D'ENTRÉE
# ═══════════════════════════════════════════════════════════════════════════════

def validate_scenario(raw: Dict[str, Any]) -> ValidationReport:
    """
    Validation complète d'un scénario brut.

    Pipeline :
      1. Version de schéma et mode
      2. Blocs d'oscillateurs (1 en mode single, 2 en interconnexion)
      3. Couplages N_k et R12 (interconnexion)
      4. P, isolation, analyse

    Returns:
        ValidationReport listant toutes les alertes
    """
    alerts: List[ValidationAlert] = []

    if not isinstance(raw, dict):
        alerts.append(ValidationAlert(
            Severity.CRITICAL, "Format", "Le scénario doit être un objet JSON",
            "Encapsuler les champs dans { … }",
        ))
        return ValidationReport(is_valid=False, alerts=alerts)

    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        alerts.append(ValidationAlert(
            Severity.WARNING, "Schéma",
            f"schema_version = {version!r}, version supportée {SCHEMA_VERSION}",
            "Mettre à jour le fichier scénario", "schema_version",
        ))

    mode = raw.get("mode", "single")
    if mode not in SCENARIO_MODES:
        alerts.append(ValidationAlert(
            Severity.CRITICAL, "Schéma", f"mode = {mode!r} inconnu",
            f"Choisir parmi {SCENARIO_MODES}", "mode",
        ))
        return ValidationReport(is_valid=False, alerts=alerts)

    oscillators = raw.get("oscillators")
    expected = 1 if mode == "single" else 2
    if not isinstance(oscillators, list) or len(oscillators) != expected \
            or not all(isinstance(o, dict) for o in oscillators):
        alerts.append(ValidationAlert(
            Severity.CRITICAL, "Schéma",
            f"Le mode {mode} exige exactement {expected} bloc(s) d'oscillateur",
            "Renseigner la liste 'oscillators'", "oscillators",
        ))
        return ValidationReport(is_valid=False, alerts=alerts)

    for k, osc in enumerate(oscillators, start=1):
        alerts.extend(validate_oscillator(osc, f"osc{k}"))

    structural_ok = not any(a.severity in (Severity.ERROR, Severity.CRITICAL) for a in alerts)
    if mode == "interconnection" and structural_ok:
        alerts.extend(validate_interconnection_blocks(oscillators, raw.get("R12")))
    elif mode == "single" and raw.get("R12") is not None:
        alerts.append(ValidationAlert(
            Severity.WARNING, "Schéma", "R12 ignoré en mode single",
            "Supprimer R12 ou passer en mode interconnection", "R12",
        ))

    if structural_ok:
        n = sum(2 * int(o["nu"]) for o in oscillators)
        alerts.extend(validate_initial_moments(raw.get("P"), n))
        alerts.extend(validate_options(
            raw.get("isolation") or {}, raw.get("analysis") or {}, n,
        ))

    is_valid = not any(a.severity in (Severity.ERROR, Severity.CRITICAL) for a in alerts)
    logger.info(
        "Validation scénario | mode=%s | alertes=%d | verdict=%s",
        mode, len(alerts), "VALIDE" if is_valid else "INVALIDE",
    )
    return ValidationReport(is_valid=is_valid, alerts=alerts)
