"""
═══════════════════════════════════════════════════════════════════════════════
MODULE: app/core/exporter.py
Fonction: Écriture des artefacts (JSON lisibles, CSV à 17 chiffres)
Version: 1.0.0
═══════════════════════════════════════════════════════════════════════════════

Conventions :
  - JSON : matrices en listes de lignes, clés triées, indentation fixe
  - CSV  : en-tête fixe, flottants en "%.17g" (aller-retour exact)
  - τ infini : "inf" dans les CSV, null + tau_kind = "infinite" en JSON
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, Optional

import numpy as np
import pandas as pd

from config.constants import (
    DECOHERENCE_COLUMNS,
    SCHEMA_VERSION,
    SWEEP_COLUMNS,
    TRAJECTORY_COLUMNS,
    VARIABLE_ORDERING,
)
from config.settings import EXPORT_SETTINGS
from app.core.decoherence import DecoherenceReport, SweepResult
from app.core.isolation import IsolationDecomposition
from app.core.moments import DeviationTrajectory
from app.core.oqho_model import StateSpace
from app.core.optimizer import OptimizationResult

logger = logging.getLogger(__name__)


# ═══════════════════════════════════════════════════════════════════════════════
# SÉRIALISATION
# ═══════════════════════════════════════════════════════════════════════════════

def to_jsonable(obj: Any) -> Any:
    """Convertit récursivement ndarray, dataclasses et scalaires numpy."""
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return to_jsonable(obj.item())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def write_json(data: Dict[str, Any], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(
        to_jsonable(data), indent=EXPORT_SETTINGS["json_indent"],
        sort_keys=True, ensure_ascii=False, allow_nan=False,
    )
    path.write_text(text + "\n", encoding="utf-8")
    logger.info("Export JSON : %s", path)
    return path


def write_csv(df: pd.DataFrame, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=EXPORT_SETTINGS["float_format"], lineterminator="\n")
    logger.info("Export CSV : %s (%d lignes)", path, len(df))
    return path


def artifact_path(out_dir: Path, key: str) -> Path:
    return Path(out_dir) / EXPORT_SETTINGS["files"][key]


# ═══════════════════════════════════════════════════════════════════════════════
# CHARGES UTILES
# ═══════════════════════════════════════════════════════════════════════════════

def state_space_payload(ss: StateSpace) -> Dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "ordering": VARIABLE_ORDERING,
        "n": ss.ccr.n,
        "m": ss.ccr.m,
        "theta": ss.ccr.theta,
        "J": ss.ccr.j_field,
        "R": ss.R,
        "M": ss.M,
        "A": ss.A,
        "A0": ss.A0,
        "Atilde": ss.Atilde,
        "B": ss.B,
        "C": ss.C,
        "D": ss.D,
        "mho_re": ss.mho.re,
        "mho_im": ss.mho.im,
        "ccr_residual": ss.ccr_residual(),
    }


def isolation_payload(
    dec: IsolationDecomposition,
    d: int,
    autonomy: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    payload: Dict[str, Any] = {
        "s": dec.s,
        "d": d,
        "isolated": dec.isolated,
        "fb_norm": dec.fb_norm,
        "F": dec.F,
        "T": dec.T,
        "G": dec.G,
        "S": dec.S,
        "S1": dec.S1,
        "S2": dec.S2,
        "a11": dec.a11,
        "a12": dec.a12,
        "a21": dec.a21,
        "a22": dec.a22,
        "b": dec.b,
    }
    if autonomy is not None:
        payload["autonomy"] = autonomy
    return payload


def optimization_payload(result: OptimizationResult) -> Dict[str, Any]:
    return to_jsonable(result)


# ═══════════════════════════════════════════════════════════════════════════════
# TABLEAUX
# ═══════════════════════════════════════════════════════════════════════════════

def trajectory_frame(traj: DeviationTrajectory) -> pd.DataFrame:
    return pd.DataFrame({
        "t": traj.t_grid,
        "delta": traj.delta,
        "state_term": traj.state_term,
        "noise_term": traj.noise_term,
    }, columns=TRAJECTORY_COLUMNS)


def _report_row(report: DecoherenceReport) -> Dict[str, Any]:
    return {
        "epsilon": report.epsilon,
        "tau": math.inf if report.tau is None else report.tau,
        "tau_hat": math.nan if report.tau_hat is None else report.tau_hat,
        "ratio": math.nan if report.ratio is None else report.ratio,
        "threshold": report.threshold,
        "t_lo": math.nan if report.t_lo is None else report.t_lo,
        "t_hi": math.nan if report.t_hi is None else report.t_hi,
        "reached_t_max": report.reached_t_max,
        "near_tangent": report.near_tangent,
    }


def decoherence_frame(reports: Iterable[DecoherenceReport]) -> pd.DataFrame:
    return pd.DataFrame([_report_row(r) for r in reports], columns=DECOHERENCE_COLUMNS)


def sweep_frame(sweep: SweepResult) -> pd.DataFrame:
    rows = []
    for r in sweep.reports:
        row = _report_row(r)
        row["fitted_slope"] = math.nan if sweep.fitted_slope is None else sweep.fitted_slope
        rows.append(row)
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)
