"""
tests/conftest.py
═════════════════
Fixtures pytest partagées par toute la suite de tests.

Contient :
  - Interconnexion de référence tirée (graine 7, n = 8, s = 2)
  - Oscillateur fermé (R = I, M = 0)
  - F témoin non isolant (FB ≠ 0)
  - Scénarios bruts (dictionnaires) et fichiers JSON temporaires
"""

import json
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.core.isolation import isolation_basis  # noqa: E402
from app.core.moments import deviation_spec  # noqa: E402
from app.lab.scenario_factory import (  # noqa: E402
    closed_oscillator_scenario,
    control_selection,
    reference_scenario,
)
from app.models.scenario_config import build_system, scenario_to_dict  # noqa: E402


# ═══════════════════════════════════════════════════════════════════════════════
# INTERCONNEXION DE RÉFÉRENCE
# ═══════════════════════════════════════════════════════════════════════════════

@pytest.fixture(scope="session")
def ref_scenario():
    """Deux OQHO à ν = 2, m = r = 2, D = I₂, R₁₂ = 0, P = ½I₈, s = 2."""
    return reference_scenario(seed=7)


@pytest.fixture(scope="session")
def ref_system(ref_scenario):
    return build_system(ref_scenario)


@pytest.fixture(scope="session")
def ref_decomposition(ref_system):
    return isolation_basis(ref_system.ss, 2)


@pytest.fixture(scope="session")
def ref_deviation(ref_system, ref_decomposition, ref_scenario):
    return deviation_spec(
        ref_decomposition.F, ref_scenario.initial_moments(), ref_system.ccr.theta,
    )


@pytest.fixture(scope="session")
def control_F(ref_system):
    """F non isolant construit sur les colonnes de B."""
    return control_selection(ref_system.ss, 2)


# ═══════════════════════════════════════════════════════════════════════════════
# OSCILLATEUR FERMÉ
# ═══════════════════════════════════════════════════════════════════════════════

@pytest.fixture(scope="session")
def closed_scenario():
    return closed_oscillator_scenario(nu=1)


@pytest.fixture(scope="session")
def closed_system(closed_scenario):
    return build_system(closed_scenario)


# ═══════════════════════════════════════════════════════════════════════════════
# SCÉNARIOS BRUTS
# ═══════════════════════════════════════════════════════════════════════════════

@pytest.fixture
def single_raw():
    """Scénario minimal valide : ν = 1, R = I, M = 0."""
    return {
        "schema_version": "1.0",
        "mode": "single",
        "oscillators": [
            {"nu": 1, "R": [[1.0, 0.0], [0.0, 1.0]], "M": [[0.0, 0.0], [0.0, 0.0]]},
        ],
        "isolation": {"s": 1},
    }


@pytest.fixture
def reference_raw(ref_scenario):
    return scenario_to_dict(ref_scenario)


@pytest.fixture
def write_scenario(tmp_path):
    """Écrit un dictionnaire en JSON et renvoie le chemin."""
    def _write(raw, name="scenario.json"):
        path = tmp_path / name
        path.write_text(json.dumps(raw), encoding="utf-8")
        return path
    return _write


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
