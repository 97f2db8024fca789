"""
═══════════════════════════════════════════════════════════════════════════════
MODULE: app/models/loader.py
Version: 1.0.0
═══════════════════════════════════════════════════════════════════════════════
"""

import json
import logging
from pathlib import Path
from typing import Union

from app.core.errors import ScenarioError, ValidationError
from app.core.validator import validate_scenario
from app.models.scenario_config import Scenario, scenario_from_dict

logger = logging.getLogger(__name__)


def load_scenario(path: Union[str, Path]) -> Scenario:
    """
    Charge et valide un scénario JSON.

    Toutes les anomalies sont collectées avant de lever ScenarioError ;
    une erreur de syntaxe JSON est rapportée avec sa ligne et sa colonne.

    Raises:
        ValidationError: fichier absent ou JSON illisible
        ScenarioError  : scénario invalide (rapport complet joint)
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"Fichier scénario introuvable : {path}", {"path": str(path)})

    text = path.read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"JSON invalide ({path.name}, ligne {exc.lineno}, colonne {exc.colno}) : {exc.msg}",
            {"path": str(path), "line": exc.lineno, "column": exc.colno, "position": exc.pos},
        ) from exc

    report = validate_scenario(raw)
    for alert in report.get_warnings():
        logger.warning("Scénario %s | %s", path.name, alert.message)
    if not report.is_valid:
        failures = report.get_critical_alerts() + report.get_errors()
        logger.error("Scénario %s invalide | %d anomalie(s)", path.name, len(failures))
        raise ScenarioError(
            f"Scénario invalide ({len(failures)} anomalie(s)) : "
            + " ; ".join(a.message for a in failures),
            report,
        )

    scenario = scenario_from_dict(raw)
    logger.info(
        "Scénario chargé | %s | mode=%s | n=%d", path.name, scenario.mode, scenario.n,
    )
    return scenario
