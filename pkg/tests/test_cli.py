"""
tests/test_cli.py
═════════════════
Tests d'intégration — commandes qmemtime (app/cli.py)

Couvre :
  - Artefacts de chaque commande (JSON, CSV) et leurs en-têtes
  - Aller-retour bit à bit de `realize`
  - Déterminisme des CSV
  - Codes de sortie et erreur JSON sur stderr
"""

import json

import numpy as np
import pandas as pd
import pytest

from app import cli
from app.cli import main
from app.core import decoherence
from app.models.scenario_config import scenario_to_dict


@pytest.fixture
def reference_file(reference_raw, write_scenario):
    return write_scenario(reference_raw, "reference.json")


@pytest.fixture
def closed_file(closed_scenario, write_scenario):
    return write_scenario(scenario_to_dict(closed_scenario), "closed.json")


def _run(command, scenario, out, *extra):
    return main([command, "--scenario", str(scenario), "--out", str(out), *extra])


def _error_payload(capsys):
    lines = [line for line in capsys.readouterr().err.splitlines() if line.startswith("{")]
    return json.loads(lines[-1])


class TestArtefacts:

    def test_realize_aller_retour(self, reference_file, ref_system, tmp_path):
        assert _run("realize", reference_file, tmp_path) == 0
        data = json.loads((tmp_path / "state_space.json").read_text(encoding="utf-8"))
        assert np.array_equal(np.array(data["A"]), ref_system.ss.A)
        assert np.array_equal(np.array(data["B"]), ref_system.ss.B)
        assert data["schema_version"] == "1.0"
        assert 0.0 <= data["ccr_residual"] <= 1e-10

    def test_isolate(self, reference_file, tmp_path):
        assert _run("isolate", reference_file, tmp_path) == 0
        data = json.loads((tmp_path / "isolation.json").read_text(encoding="utf-8"))
        assert data["d"] == 4 and data["s"] == 2
        assert data["isolated"] is True
        assert np.array(data["F"]).shape == (2, 8)

    def test_simulate_systeme_ferme(self, closed_file, tmp_path):
        assert _run("simulate", closed_file, tmp_path, "--grid", "101") == 0
        df = pd.read_csv(tmp_path / "delta_trajectory.csv")
        assert list(df.columns) == ["t", "delta", "state_term", "noise_term"]
        assert len(df) == 101
        assert df["delta"].iloc[0] == 0.0

    def test_decohere(self, closed_file, tmp_path):
        assert _run("decohere", closed_file, tmp_path, "--epsilon", "1e-4") == 0
        report = json.loads((tmp_path / "decoherence_report.json").read_text(encoding="utf-8"))
        assert report["tau_kind"] == "finite"
        assert report["epsilon"] == pytest.approx(1e-4)
        df = pd.read_csv(tmp_path / "decoherence_report.csv")
        assert df["tau"].iloc[0] == pytest.approx(report["tau"])

    def test_sweep_pente(self, reference_file, tmp_path):
        assert _run("sweep", reference_file, tmp_path) == 0
        df = pd.read_csv(tmp_path / "sweep.csv")
        assert list(df.columns) == ["epsilon", "tau", "tau_hat", "ratio", "fitted_slope"]
        assert df["fitted_slope"].iloc[0] == pytest.approx(0.5, abs=0.05)

    def test_optimize_ameliore_tau_hat(self, reference_file, tmp_path):
        assert _run("optimize", reference_file, tmp_path) == 0
        report = json.loads((tmp_path / "optimization_report.json").read_text(encoding="utf-8"))
        assert report["tau_hat_after"] >= report["tau_hat_before"]
        R12 = np.array(json.loads((tmp_path / "r12_opt.json").read_text(encoding="utf-8"))["R12"])
        assert R12.shape == (4, 4)

    def test_verify_systeme_ferme(self, closed_file, tmp_path):
        assert _run("verify", closed_file, tmp_path) == 0
        report = json.loads((tmp_path / "verify_report.json").read_text(encoding="utf-8"))
        assert report["all_passed"] is True

    def test_decohere_respecte_grid(self, closed_file, tmp_path, mocker):
        spy = mocker.spy(decoherence, "deviation_trajectory")
        assert _run("decohere", closed_file, tmp_path, "--grid", "11") == 0
        assert len(spy.call_args.args[2]) == 11

    def test_sweep_respecte_grid_points(self, closed_scenario, write_scenario, tmp_path, mocker):
        raw = scenario_to_dict(closed_scenario)
        raw["analysis"]["grid_points"] = 51
        raw["analysis"]["eps_grid"] = [1e-2, 1e-3]
        spy = mocker.spy(decoherence, "deviation_trajectory")
        assert _run("sweep", write_scenario(raw), tmp_path) == 0
        assert sorted(len(c.args[2]) for c in spy.call_args_list) == [51, 51]

    def test_optimize_epsilon_du_scenario(self, reference_raw, write_scenario, tmp_path, mocker):
        reference_raw["analysis"]["epsilon"] = 1e-4
        spy = mocker.spy(cli, "optimal_coupling")
        assert _run("optimize", write_scenario(reference_raw), tmp_path) == 0
        assert spy.call_args.kwargs["reference_epsilon"] == pytest.approx(1e-4)


class TestDeterminisme:

    def test_csv_identiques(self, closed_file, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        assert _run("simulate", closed_file, first, "--grid", "51") == 0
        assert _run("simulate", closed_file, second, "--grid", "51") == 0
        assert (first / "delta_trajectory.csv").read_bytes() == \
            (second / "delta_trajectory.csv").read_bytes()


class TestErreurs:

    def test_scenario_invalide_exit_2(self, single_raw, write_scenario, tmp_path, capsys):
        single_raw["oscillators"][0]["R"] = [[1.0, 0.5], [0.0, 1.0]]
        assert _run("realize", write_scenario(single_raw), tmp_path) == 2
        payload = _error_payload(capsys)
        assert payload["error"] == "ScenarioError"
        assert payload["details"]["alerts"][0]["block"] == "osc1.R"

    def test_isolation_infaisable_exit_4(self, reference_raw, write_scenario, tmp_path, capsys):
        reference_raw["isolation"]["s"] = 5
        assert _run("isolate", write_scenario(reference_raw), tmp_path) == 4
        assert _error_payload(capsys)["error"] == "InfeasibleIsolationError"

    def test_optimize_mode_single(self, closed_file, tmp_path):
        assert _run("optimize", closed_file, tmp_path) == 2

    def test_p_non_physique(self, single_raw, write_scenario, tmp_path):
        single_raw["P"] = [[0.1, 0.0], [0.0, 0.1]]
        path = write_scenario(single_raw)
        assert _run("simulate", path, tmp_path, "--grid", "11") == 2
        assert _run("simulate", path, tmp_path, "--grid", "11", "--allow-unphysical-P") == 0

    def test_exception_inattendue_exit_3(self, closed_file, tmp_path, mocker, capsys):
        mocker.patch("app.cli.build_system", side_effect=RuntimeError("panne"))
        assert _run("realize", closed_file, tmp_path) == 3
        payload = _error_payload(capsys)
        assert payload["error"] == "RuntimeError"
        assert payload["message"] == "panne"

    @pytest.mark.parametrize("threads", ["quatre", "0"])
    def test_threads_invalide_exit_2(self, closed_file, tmp_path, mocker, capsys, threads):
        mocker.patch.dict("config.settings.PARALLEL_SETTINGS", {"threads": threads})
        assert _run("realize", closed_file, tmp_path) == 2
        payload = _error_payload(capsys)
        assert payload["error"] == "ValidationError"
        assert payload["details"]["QMEMTIME_THREADS"] == threads
