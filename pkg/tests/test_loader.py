"""
tests/test_loader.py
════════════════════
Tests unitaires — load_scenario() (app/models/loader.py)
"""

import numpy as np
import pytest

from app.core.errors import ScenarioError, ValidationError
from app.core.isolation import isolation_rank
from app.models.loader import load_scenario
from app.models.scenario_config import build_system, scenario_to_dict
from config.settings import SCENARIOS_DIR


class TestLoadScenario:

    def test_oscillateur_minimal(self, single_raw, write_scenario):
        scenario = load_scenario(write_scenario(single_raw))
        assert scenario.mode == "single"
        assert scenario.n == 2
        assert np.array_equal(scenario.initial_moments(), 0.5 * np.eye(2))

    def test_reference_rang_isolation(self, reference_raw, write_scenario):
        scenario = load_scenario(write_scenario(reference_raw))
        system = build_system(scenario)
        assert isolation_rank(system.ss.M, scenario.n) == 4

    def test_aller_retour_dictionnaire(self, reference_raw, write_scenario):
        scenario = load_scenario(write_scenario(reference_raw))
        assert scenario_to_dict(scenario) == reference_raw

    def test_fichier_absent(self, tmp_path):
        with pytest.raises(ValidationError):
            load_scenario(tmp_path / "absent.json")

    def test_json_invalide_ligne_colonne(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{\n  "mode": "single",\n  "oscillators": [\n}', encoding="utf-8")
        with pytest.raises(ValidationError) as exc_info:
            load_scenario(path)
        assert exc_info.value.details["line"] == 4
        assert "ligne 4" in exc_info.value.message

    def test_scenario_invalide_rapport_complet(self, single_raw, write_scenario):
        single_raw["oscillators"][0]["R"] = [[1.0, 0.5], [0.0, 1.0]]
        single_raw["oscillators"][0]["D"] = [[1.0, 1.0], [0.0, 1.0]]
        with pytest.raises(ScenarioError) as exc_info:
            load_scenario(write_scenario(single_raw))
        error = exc_info.value
        assert error.exit_code == 2
        assert len(error.report.get_errors()) == 2
        assert "osc1.R" in error.message


class TestScenariosFournis:

    @pytest.mark.parametrize("name", ["closed_oscillator.json", "interconnection_example.json"])
    def test_chargement(self, name):
        scenario = load_scenario(SCENARIOS_DIR / name)
        system = build_system(scenario)
        assert isolation_rank(system.ss.M, scenario.n) >= scenario.isolation.s
