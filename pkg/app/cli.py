"""
═══════════════════════════════════════════════════════════════════════════════
MODULE: app/cli.py
Fonction: Interface en ligne de commande qmemtime
Version: 1.0.0
═══════════════════════════════════════════════════════════════════════════════

    qmemtime <realize|isolate|simulate|decohere|sweep|optimize|verify>
             --scenario <path> --out <dir>
             [--epsilon <e>] [--t-max <t>] [--grid <n>] [--allow-unphysical-P]

Codes de sortie : 0 ok, 2 validation, 3 échec numérique, 4 isolation infaisable.
Les erreurs sont écrites en JSON sur stderr, les journaux aussi.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from config.constants import EXIT_CODES, SCHEMA_VERSION
from config.settings import APP_SETTINGS, LOGGING_SETTINGS, validate_settings
from app.core import exporter
from app.core.decoherence import (
    approx_decoherence_time,
    decoherence_time,
    default_horizon,
    epsilon_sweep,
)
from app.core.errors import AsymptoteError, QmemError, ValidationError
from app.core.isolation import (
    IsolationDecomposition,
    decompose,
    is_autonomous,
    isolation_basis,
    isolation_rank,
)
from app.core.moments import DeviationSpec, deviation_spec, deviation_trajectory
from app.core.optimizer import coupling_problem, optimal_coupling
from app.lab.verification_engine import VerificationEngine
from app.models.loader import load_scenario
from app.models.scenario_config import Scenario, ScenarioSystem, build_system

logger = logging.getLogger("qmemtime")


# ═══════════════════════════════════════════════════════════════════════════════
# CONFIGURATION
# ═══════════════════════════════════════════════════════════════════════════════

def configure_logging() -> None:
    """Journalisation unique sur stderr, niveaux par module depuis LOGGING_SETTINGS."""
    logging.basicConfig(
        level=LOGGING_SETTINGS["level"],
        format=LOGGING_SETTINGS["format"],
        stream=sys.stderr,
    )
    for name, level in LOGGING_SETTINGS["loggers"].items():
        logging.getLogger(name).setLevel(level)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=APP_SETTINGS["app_name"], description=APP_SETTINGS["description"],
    )
    parser.add_argument("command", choices=APP_SETTINGS["commands"])
    parser.add_argument("--scenario", type=Path, required=True, help="Fichier scénario JSON")
    parser.add_argument("--out", type=Path, required=True, help="Répertoire des artefacts")
    parser.add_argument("--epsilon", type=float, default=None, help="Niveau relatif ε > 0")
    parser.add_argument("--t-max", dest="t_max", type=float, default=None, help="Horizon t_max")
    parser.add_argument("--grid", type=int, default=None, help="Nombre de points de grille")
    parser.add_argument(
        "--allow-unphysical-P", dest="allow_unphysical", action="store_true",
        help="Accepte P + iΘ indéfinie (avertissement seulement)",
    )
    return parser


# ═══════════════════════════════════════════════════════════════════════════════
# PRÉPARATION
# ═══════════════════════════════════════════════════════════════════════════════

def _selection(system: ScenarioSystem, scenario: Scenario) -> IsolationDecomposition:
    """Décomposition pour F_override s'il est fourni, sinon F isolant d'ordre s."""
    F_override = scenario.isolation.F_override
    if F_override is not None:
        return decompose(system.ss, F_override)
    return isolation_basis(system.ss, scenario.isolation.s)


def _deviation(system: ScenarioSystem, scenario: Scenario, dec: IsolationDecomposition,
               args: argparse.Namespace) -> DeviationSpec:
    return deviation_spec(
        dec.F, scenario.initial_moments(), system.ccr.theta, args.allow_unphysical,
    )


def _epsilon(scenario: Scenario, args: argparse.Namespace) -> float:
    return scenario.analysis.epsilon if args.epsilon is None else args.epsilon


def _t_max(scenario: Scenario, args: argparse.Namespace) -> Optional[float]:
    return scenario.analysis.t_max if args.t_max is None else args.t_max


def _grid_points(scenario: Scenario, args: argparse.Namespace) -> int:
    points = scenario.analysis.grid_points if args.grid is None else args.grid
    if points < 2:
        raise ValidationError(f"--grid doit être ≥ 2, reçu {points}", {"grid": points})
    return points


# ═══════════════════════════════════════════════════════════════════════════════
# COMMANDES
# ═══════════════════════════════════════════════════════════════════════════════

def cmd_realize(scenario: Scenario, args: argparse.Namespace) -> int:
    system = build_system(scenario)
    exporter.write_json(
        exporter.state_space_payload(system.ss), exporter.artifact_path(args.out, "realize"),
    )
    return EXIT_CODES["ok"]


def cmd_isolate(scenario: Scenario, args: argparse.Namespace) -> int:
    system = build_system(scenario)
    dec = _selection(system, scenario)
    flag, N, residual = is_autonomous(dec)
    autonomy = {"autonomous": flag, "residual": residual, "N": N if flag else None}
    payload = exporter.isolation_payload(dec, isolation_rank(system.ss.M, system.ccr.n), autonomy)
    payload["schema_version"] = SCHEMA_VERSION
    exporter.write_json(payload, exporter.artifact_path(args.out, "isolate"))
    return EXIT_CODES["ok"]


def cmd_simulate(scenario: Scenario, args: argparse.Namespace) -> int:
    system = build_system(scenario)
    dec = _selection(system, scenario)
    spec = _deviation(system, scenario, dec, args)

    t_max = _t_max(scenario, args)
    if t_max is None:
        try:
            tau_hat: Optional[float] = approx_decoherence_time(spec, dec.G, _epsilon(scenario, args))
        except AsymptoteError:
            tau_hat = None
        t_max = default_horizon(system.ss, tau_hat)
    points = _grid_points(scenario, args)
    traj = deviation_trajectory(system.ss, spec, np.linspace(0.0, t_max, points))
    exporter.write_csv(exporter.trajectory_frame(traj), exporter.artifact_path(args.out, "simulate"))
    return EXIT_CODES["ok"]


def cmd_decohere(scenario: Scenario, args: argparse.Namespace) -> int:
    system = build_system(scenario)
    dec = _selection(system, scenario)
    spec = _deviation(system, scenario, dec, args)
    report = decoherence_time(
        system.ss, spec, _epsilon(scenario, args),
        t_max=_t_max(scenario, args), grid_points=_grid_points(scenario, args),
    )

    payload = report.to_dict()
    payload["schema_version"] = SCHEMA_VERSION
    payload["isolated"] = dec.isolated
    exporter.write_json(payload, exporter.artifact_path(args.out, "decohere_json"))
    exporter.write_csv(
        exporter.decoherence_frame([report]), exporter.artifact_path(args.out, "decohere_csv"),
    )
    return EXIT_CODES["ok"]


def cmd_sweep(scenario: Scenario, args: argparse.Namespace) -> int:
    system = build_system(scenario)
    dec = _selection(system, scenario)
    spec = _deviation(system, scenario, dec, args)
    sweep = epsilon_sweep(
        system.ss, spec, scenario.analysis.eps_grid,
        t_max=_t_max(scenario, args), grid_points=_grid_points(scenario, args),
    )
    exporter.write_csv(exporter.sweep_frame(sweep), exporter.artifact_path(args.out, "sweep"))
    return EXIT_CODES["ok"]


def cmd_optimize(scenario: Scenario, args: argparse.Namespace) -> int:
    if scenario.mode != "interconnection":
        raise ValidationError(
            "optimize exige un scénario en mode interconnection", {"mode": scenario.mode},
        )
    system = build_system(scenario)
    dec = _selection(system, scenario)
    # Contrôle de physicalité de P avant l'optimisation
    _deviation(system, scenario, dec, args)
    problem = coupling_problem(system.spec, dec.F, scenario.initial_moments())
    result = optimal_coupling(problem, reference_epsilon=_epsilon(scenario, args))

    exporter.write_json(
        {"schema_version": SCHEMA_VERSION, "R12": result.R12_opt},
        exporter.artifact_path(args.out, "optimize"),
    )
    report = exporter.optimization_payload(result)
    report["schema_version"] = SCHEMA_VERSION
    exporter.write_json(report, exporter.artifact_path(args.out, "optimize_report"))
    return EXIT_CODES["ok"]


def cmd_verify(scenario: Scenario, args: argparse.Namespace) -> int:
    seed = 7 if scenario.seed is None else int(scenario.seed)
    engine = VerificationEngine(seed=seed, allow_unphysical=args.allow_unphysical)
    report = engine.run(scenario)
    payload = report.to_dict()
    payload["schema_version"] = SCHEMA_VERSION
    exporter.write_json(payload, exporter.artifact_path(args.out, "verify"))
    return EXIT_CODES["ok"] if report.all_passed else EXIT_CODES["numeric"]


COMMANDS: Dict[str, Callable[[Scenario, argparse.Namespace], int]] = {
    "realize": cmd_realize,
    "isolate": cmd_isolate,
    "simulate": cmd_simulate,
    "decohere": cmd_decohere,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "verify": cmd_verify,
}


# ═══════════════════════════════════════════════════════════════════════════════
# POINT D'ENTRÉE
# ═══════════════════════════════════════════════════════════════════════════════

def _emit_error(payload: Dict) -> None:
    sys.stderr.write(json.dumps(exporter.to_jsonable(payload), ensure_ascii=False, sort_keys=True) + "\n")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging()
    try:
        validate_settings()
        scenario = load_scenario(args.scenario)
        logger.info("Commande %s | scénario=%s | sortie=%s", args.command, args.scenario, args.out)
        return COMMANDS[args.command](scenario, args)
    except QmemError as exc:
        logger.error("%s : %s", type(exc).__name__, exc.message)
        _emit_error(exc.to_dict())
        return exc.exit_code
    except Exception as exc:  # noqa: BLE001
        logger.exception("Erreur inattendue")
        _emit_error({
            "error": type(exc).__name__,
            "exit_code": EXIT_CODES["numeric"],
            "message": str(exc),
            "details": {},
        })
        return EXIT_CODES["numeric"]
