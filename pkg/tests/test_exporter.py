"""
tests/test_exporter.py
══════════════════════
Tests unitaires — écriture des artefacts (app/core/exporter.py)
"""

import json
import math

import numpy as np
import pandas as pd

from app.core.decoherence import DecoherenceReport, SweepResult
from app.core.exporter import (
    decoherence_frame,
    sweep_frame,
    to_jsonable,
    write_csv,
    write_json,
)


def _report(tau):
    return DecoherenceReport(
        epsilon=1e-3, tau=tau, tau_hat=None, ratio=None, threshold=1e-3, ref_scale=1.0,
        t_lo=None, t_hi=None, t_max=1.0, reached_t_max=tau is None,
    )


class TestSerialisation:

    def test_types_numpy(self):
        data = to_jsonable({"a": np.eye(2), "b": np.float64(1.5), "c": (np.int64(3),), "d": math.inf})
        assert data == {"a": [[1.0, 0.0], [0.0, 1.0]], "b": 1.5, "c": [3], "d": None}

    def test_json_cles_triees(self, tmp_path):
        path = write_json({"z": 1, "a": np.array([0.1])}, tmp_path / "out" / "x.json")
        text = path.read_text(encoding="utf-8")
        assert text.index('"a"') < text.index('"z"')
        assert json.loads(text)["a"] == [0.1]

    def test_csv_dix_sept_chiffres(self, tmp_path):
        value = 0.1 + 0.2
        path = write_csv(pd.DataFrame({"x": [value]}), tmp_path / "x.csv")
        assert path.read_text(encoding="utf-8") == "x\n0.30000000000000004\n"


class TestTableaux:

    def test_tau_infini(self):
        df = decoherence_frame([_report(None)])
        assert math.isinf(df["tau"].iloc[0])
        assert bool(df["reached_t_max"].iloc[0]) is True
        assert math.isnan(df["tau_hat"].iloc[0])

    def test_balayage(self):
        df = sweep_frame(SweepResult(reports=[_report(0.1), _report(0.2)], fitted_slope=0.5))
        assert list(df.columns) == ["epsilon", "tau", "tau_hat", "ratio", "fitted_slope"]
        assert df["fitted_slope"].tolist() == [0.5, 0.5]
