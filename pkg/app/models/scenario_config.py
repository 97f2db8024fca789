"""
═══════════════════════════════════════════════════════════════════════════════
MODULE: app/models/scenario_config.py
Version: 1.0.0
═══════════════════════════════════════════════════════════════════════════════

Schéma des scénarios JSON (matrices en listes de lignes, variables ordonnées
q₁, p₁, q₂, p₂, …) :

    {
      "schema_version": "1.0",
      "mode": "single" | "interconnection",
      "seed": 7,
      "oscillators": [{"nu": 2, "R": [[…]], "M": [[…]], "D": [[…]], "N": [[…]]}, …],
      "R12": [[…]],
      "P": [[…]],
      "isolation": {"s": 2, "F_override": [[…]]},
      "analysis": {"t_max": null, "grid_points": 2001, "epsilon": 1e-3,
                   "eps_grid": [1e-2, 1e-3, 1e-4, 1e-5]}
    }
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from config.constants import SCHEMA_VERSION
from config.settings import DECOHERENCE_SETTINGS, ISOLATION_SETTINGS
from app.core.oqho_model import (
    CcrStructure,
    InterconnectionSpec,
    OqhoParams,
    StateSpace,
    compose,
    realize,
)


@dataclass(frozen=True)
class OscillatorBlock:
    nu: int
    R: np.ndarray
    M: np.ndarray
    D: Optional[np.ndarray] = None
    N: Optional[np.ndarray] = None

    @property
    def m(self) -> int:
        return int(self.M.shape[0])

    def ccr(self) -> CcrStructure:
        return CcrStructure.build(self.nu, self.m)

    def params(self) -> OqhoParams:
        return OqhoParams(R=self.R, M=self.M, D=self.D)


@dataclass(frozen=True)
class IsolationOptions:
    s: int = ISOLATION_SETTINGS["default_order"]
    F_override: Optional[np.ndarray] = None


@dataclass(frozen=True)
class AnalysisOptions:
    t_max: Optional[float] = None
    grid_points: int = DECOHERENCE_SETTINGS["grid_points"]
    epsilon: float = DECOHERENCE_SETTINGS["default_epsilon"]
    eps_grid: List[float] = field(default_factory=lambda: list(DECOHERENCE_SETTINGS["eps_grid"]))


@dataclass(frozen=True)
class Scenario:
    """Scénario validé, prêt pour la construction du système."""

    mode: str
    oscillators: List[OscillatorBlock]
    R12: Optional[np.ndarray] = None
    P: Optional[np.ndarray] = None
    isolation: IsolationOptions = field(default_factory=IsolationOptions)
    analysis: AnalysisOptions = field(default_factory=AnalysisOptions)
    seed: Optional[int] = None
    schema_version: str = SCHEMA_VERSION

    @property
    def n(self) -> int:
        return sum(2 * o.nu for o in self.oscillators)

    def initial_moments(self) -> np.ndarray:
        """P du scénario, ½I_n par défaut."""
        return 0.5 * np.eye(self.n) if self.P is None else self.P

    def interconnection(self) -> InterconnectionSpec:
        osc1, osc2 = self.oscillators
        R12 = np.zeros((2 * osc1.nu, 2 * osc2.nu)) if self.R12 is None else self.R12
        return InterconnectionSpec(
            ccr1=osc1.ccr(), ccr2=osc2.ccr(),
            osc1=osc1.params(), osc2=osc2.params(),
            N1=osc1.N, N2=osc2.N, R12=R12,
        )


@dataclass(frozen=True)
class ScenarioSystem:
    """Système construit : réalisation et, en interconnexion, sa spécification."""

    ss: StateSpace
    params: OqhoParams
    ccr: CcrStructure
    spec: Optional[InterconnectionSpec] = None


def build_system(scenario: Scenario) -> ScenarioSystem:
    """Réalisation du scénario (directe ou par composition)."""
    if scenario.mode == "single":
        osc = scenario.oscillators[0]
        ccr = osc.ccr()
        params = osc.params()
        return ScenarioSystem(ss=realize(params, ccr), params=params, ccr=ccr)
    spec = scenario.interconnection()
    params, ccr, ss = compose(spec)
    return ScenarioSystem(ss=ss, params=params, ccr=ccr, spec=spec)


# ═══════════════════════════════════════════════════════════════════════════════
# CONVERSIONS DICTIONNAIRE ↔ SCÉNARIO
# ═══════════════════════════════════════════════════════════════════════════════

def _matrix(raw: Any) -> Optional[np.ndarray]:
    return None if raw is None else np.asarray(raw, dtype=float)


def scenario_from_dict(raw: Dict[str, Any]) -> Scenario:
    """Construit un Scenario à partir d'un dictionnaire DÉJÀ validé."""
    oscillators = [
        OscillatorBlock(
            nu=int(o["nu"]), R=_matrix(o["R"]), M=_matrix(o["M"]),
            D=_matrix(o.get("D")), N=_matrix(o.get("N")),
        )
        for o in raw["oscillators"]
    ]
    iso = raw.get("isolation") or {}
    ana = raw.get("analysis") or {}
    defaults = AnalysisOptions()
    return Scenario(
        mode=raw.get("mode", "single"),
        oscillators=oscillators,
        R12=_matrix(raw.get("R12")),
        P=_matrix(raw.get("P")),
        isolation=IsolationOptions(
            s=int(iso.get("s", ISOLATION_SETTINGS["default_order"])),
            F_override=_matrix(iso.get("F_override")),
        ),
        analysis=AnalysisOptions(
            t_max=ana.get("t_max"),
            grid_points=int(ana.get("grid_points", defaults.grid_points)),
            epsilon=float(ana.get("epsilon", defaults.epsilon)),
            eps_grid=[float(e) for e in ana.get("eps_grid", defaults.eps_grid)],
        ),
        seed=raw.get("seed"),
        schema_version=str(raw.get("schema_version", SCHEMA_VERSION)),
    )


def _listify(X: Optional[np.ndarray]) -> Optional[List[List[float]]]:
    return None if X is None else np.asarray(X, dtype=float).tolist()


def scenario_to_dict(scenario: Scenario) -> Dict[str, Any]:
    """Sérialisation inverse de scenario_from_dict (matrices en listes)."""
    oscillators = []
    for o in scenario.oscillators:
        block: Dict[str, Any] = {"nu": o.nu, "R": _listify(o.R), "M": _listify(o.M)}
        if o.D is not None:
            block["D"] = _listify(o.D)
        if o.N is not None:
            block["N"] = _listify(o.N)
        oscillators.append(block)
    data: Dict[str, Any] = {
        "schema_version": scenario.schema_version,
        "mode": scenario.mode,
        "seed": scenario.seed,
        "oscillators": oscillators,
        "isolation": {"s": scenario.isolation.s},
        "analysis": {
            "t_max": scenario.analysis.t_max,
            "grid_points": scenario.analysis.grid_points,
            "epsilon": scenario.analysis.epsilon,
            "eps_grid": list(scenario.analysis.eps_grid),
        },
    }
    if scenario.R12 is not None:
        data["R12"] = _listify(scenario.R12)
    if scenario.P is not None:
        data["P"] = _listify(scenario.P)
    if scenario.isolation.F_override is not None:
        data["isolation"]["F_override"] = _listify(scenario.isolation.F_override)
    return data
