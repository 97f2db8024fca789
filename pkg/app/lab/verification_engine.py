"""
═══════════════════════════════════════════════════════════════════════════════
MODULE: Moteur de vérification - Suite d'invariants
Fichier: app/lab/verification_engine.py
Version: 1.0.0
═══════════════════════════════════════════════════════════════════════════════

Fonctionnalités:
  - Cohérence des deux constructions de l'interconnexion (20 tirages)
  - Isolation partielle : ‖FB‖, rang F, FA = FA₀
  - Covariance : RK4 contre quadrature adaptative
  - Horizon court : pentes log-log 2 (isolé), 1 (témoin), 3 (covariance)
  - Asymptote haute fidélité : τ/τ̂ et pente √ε
  - Témoin non isolant : pente 1 en ε, τ isolé > τ témoin
  - Optimalité du couplage direct (g autoadjoint ⪯ 0, gradient, perturbations)
  - Identité fréquentielle F(uI − A)⁻¹B = Γ(u)Ψ₂(u)

Reproductibilité : toutes les grandeurs aléatoires dérivent de `seed`.
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from config.settings import DECOHERENCE_SETTINGS
from app.core.decoherence import decoherence_time, epsilon_sweep, fit_loglog_slope
from app.core.errors import AsymptoteError, PoleError, QmemError
from app.core.isolation import (
    full_resolvent_map,
    isolation_basis,
    isolation_rank,
    transfer_eval,
)
from app.core.moments import delta_at, deviation_spec, deviation_trajectory, short_horizon
from app.core.numerics import (
    frobenius_inner,
    gramian_quadrature,
    integrate_lyapunov,
    numerical_rank,
)
from app.core.oqho_model import block_realization, composite_params, realize
from app.core.optimizer import (
    apply_g,
    assemble_g,
    coupling_problem,
    objective_and_gradient,
    optimal_coupling,
    problem_k,
)
from app.lab.scenario_factory import control_selection, reference_interconnection
from app.models.scenario_config import Scenario, ScenarioSystem, build_system

logger = logging.getLogger(__name__)

#: Grille log du régime d'horizon court
_SHORT_T = np.logspace(-4, -2, 21)


# ═══════════════════════════════════════════════════════════════════════════════
# DATACLASSES RÉSULTATS
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass
class CheckResult:
    """Résultat d'un contrôle unitaire."""

    name: str
    passed: bool
    value: Optional[float] = None
    tolerance: Optional[float] = None
    detail: str = ""


@dataclass
class VerificationReport:
    """Rapport complet de vérification."""

    seed: int
    mode: str
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "mode": self.mode,
            "all_passed": self.all_passed,
            "n_checks": len(self.checks),
            "n_failed": len(self.failures),
            "checks": [asdict(c) for c in self.checks],
        }


def _check(name: str, value: float, tolerance: float, detail: str = "") -> CheckResult:
    """Contrôle « valeur ≤ tolérance »."""
    value = float(value)
    return CheckResult(name=name, passed=bool(value <= tolerance), value=value,
                       tolerance=float(tolerance), detail=detail)


def _within(name: str, value: Optional[float], low: float, high: float) -> CheckResult:
    """Contrôle « low ≤ valeur ≤ high »."""
    if value is None:
        return CheckResult(name=name, passed=False, detail="valeur indisponible")
    return CheckResult(name=name, passed=bool(low <= value <= high), value=float(value),
                       detail=f"intervalle [{low}, {high}]")


def _skipped(name: str, reason: str) -> CheckResult:
    return CheckResult(name=name, passed=True, detail=f"non applicable : {reason}")


# ═══════════════════════════════════════════════════════════════════════════════
# MOTEUR
# ═══════════════════════════════════════════════════════════════════════════════

class VerificationEngine:
    """
    Exécute la suite d'invariants sur un scénario et sur des tirages annexes.
    """

    def __init__(self, seed: int = 7, n_scenarios: int = 20,
                 allow_unphysical: bool = False):
        self.seed = seed
        self.n_scenarios = n_scenarios
        self.allow_unphysical = allow_unphysical
        logger.info("[VERIFY] Moteur initialisé (seed=%d)", seed)

    def run(self, scenario: Scenario) -> VerificationReport:
        rng = np.random.default_rng(self.seed)
        report = VerificationReport(seed=self.seed, mode=scenario.mode)

        report.checks.extend(self.check_realization_consistency(scenario))
        system = build_system(scenario)
        report.checks.extend(self.check_covariance(system))

        n, s = system.ccr.n, scenario.isolation.s
        d = isolation_rank(system.ss.M, n)
        if d == 0 or s > d:
            report.checks.append(_skipped("isolation", f"d = {d}, s = {s}"))
            return self._finish(report)

        dec = isolation_basis(system.ss, s)
        report.checks.extend(self.check_isolation(system, dec))
        report.checks.extend(self.check_frequency_identity(system, dec, rng))

        P = scenario.initial_moments()
        try:
            spec = deviation_spec(dec.F, P, system.ccr.theta, self.allow_unphysical)
        except QmemError as exc:
            report.checks.append(_skipped("décohérence", exc.message))
            return self._finish(report)

        report.checks.extend(self.check_short_horizon(system, spec))
        report.checks.extend(self.check_asymptote(system, spec))
        report.checks.extend(self.check_control_sweep(system, spec))

        if system.spec is not None:
            report.checks.extend(self.check_optimality(system, dec.F, P, rng))
        return self._finish(report)

    def _finish(self, report: VerificationReport) -> VerificationReport:
        logger.info(
            "[VERIFY] %d contrôles | %d échec(s)", len(report.checks), len(report.failures),
        )
        for failure in report.failures:
            logger.warning("[VERIFY] Échec : %s (%s)", failure.name, failure.detail)
        return report

    # ── Réalisation ──────────────────────────────────────────────────────────

    def check_realization_consistency(self, scenario: Scenario) -> List[CheckResult]:
        specs = [reference_interconnection(self.seed + k) for k in range(self.n_scenarios)]
        if scenario.mode == "interconnection":
            specs.append(scenario.interconnection())
        worst = 0.0
        for spec in specs:
            params, ccr = composite_params(spec)
            ss = realize(params, ccr)
            A_b, B_b = block_realization(spec)
            worst = max(
                worst,
                np.linalg.norm(A_b - ss.A) / (1.0 + np.linalg.norm(ss.A)),
                np.linalg.norm(B_b - ss.B) / (1.0 + np.linalg.norm(ss.B)),
            )
        return [_check("realization_consistency", worst, 1e-10, f"{len(specs)} interconnexions")]

    # ── Covariance ───────────────────────────────────────────────────────────

    def check_covariance(self, system: ScenarioSystem) -> List[CheckResult]:
        ss = system.ss
        times = [0.1, 1.0, 5.0]
        V_rk4 = integrate_lyapunov(ss.A, ss.mho, [0.0] + times)[1:]
        worst = 0.0
        for t, V in zip(times, V_rk4):
            Q = gramian_quadrature(ss.A, ss.B, ss.ccr.j_field, t)
            for approx, exact in ((V.re, Q.re), (V.im, Q.im)):
                scale = np.linalg.norm(exact)
                if scale > 0.0:
                    worst = max(worst, np.linalg.norm(approx - exact) / scale)
        return [_check("covariance_vs_quadrature", worst, 1e-8, "t ∈ {0.1, 1, 5}")]

    # ── Isolation ────────────────────────────────────────────────────────────

    def check_isolation(self, system: ScenarioSystem, dec) -> List[CheckResult]:
        ss = system.ss
        fb = np.linalg.norm(dec.F @ ss.B) / (1.0 + np.linalg.norm(ss.B))
        fa = np.linalg.norm(dec.F @ ss.A - dec.G) / (1.0 + np.linalg.norm(ss.A))
        rank_ok = numerical_rank(dec.F) == dec.s
        return [
            _check("isolation_fb", fb, 1e-10),
            _check("isolation_fa_equals_g", fa, 1e-10),
            CheckResult(name="isolation_rank", passed=rank_ok, value=float(numerical_rank(dec.F))),
        ]

    def check_frequency_identity(self, system: ScenarioSystem, dec,
                                 rng: np.random.Generator) -> List[CheckResult]:
        worst, evaluated, attempts = 0.0, 0, 0
        while evaluated < 10 and attempts < 100:
            attempts += 1
            u = complex(rng.uniform(0.1, 5.0), rng.uniform(-5.0, 5.0))
            try:
                values = transfer_eval(dec, u)
                full = full_resolvent_map(system.ss, dec.F, u)
            except PoleError:
                continue
            worst = max(worst, float(np.linalg.norm(full - values.noise_map)))
            evaluated += 1
        return [_check("frequency_identity", worst, 1e-8, f"{evaluated} points")]

    # ── Horizon court ────────────────────────────────────────────────────────

    def check_short_horizon(self, system: ScenarioSystem, spec) -> List[CheckResult]:
        ss = system.ss
        grid = np.concatenate([[0.0], _SHORT_T])
        traj = deviation_trajectory(ss, spec, grid)
        coeffs = short_horizon(ss, spec)
        checks: List[CheckResult] = []

        if coeffs.leading_coefficient > 0.0:
            checks.append(_within(
                "short_horizon_slope", fit_loglog_slope(_SHORT_T, traj.delta[1:]), 1.95, 2.05,
            ))
            lead = traj.delta[1] / _SHORT_T[0] ** 2
            checks.append(_check(
                "short_horizon_coefficient",
                abs(lead - coeffs.leading_coefficient) / coeffs.leading_coefficient, 0.02,
            ))
        else:
            checks.append(_skipped("short_horizon_slope", "G√P = 0"))

        target = coeffs.third_order_matrix
        if np.linalg.norm(target) > 0.0:
            norms = np.linalg.norm(traj.v_re_F[1:], axis=(1, 2))
            checks.append(_within(
                "third_order_slope", fit_loglog_slope(_SHORT_T, norms), 2.95, 3.05,
            ))
            ratio = traj.v_re_F[1] / _SHORT_T[0] ** 3
            checks.append(_check(
                "third_order_matrix",
                np.linalg.norm(ratio - target) / np.linalg.norm(target), 0.02,
            ))

        if np.linalg.norm(ss.B) > 0.0:
            control = deviation_spec(control_selection(ss, spec.F.shape[0]), spec.P,
                                     spec.theta, self.allow_unphysical)
            control_traj = deviation_trajectory(ss, control, grid)
            checks.append(_within(
                "control_slope", fit_loglog_slope(_SHORT_T, control_traj.delta[1:]), 0.95, 1.05,
            ))
        return checks

    # ── Asymptote ────────────────────────────────────────────────────────────

    def check_asymptote(self, system: ScenarioSystem, spec) -> List[CheckResult]:
        ss = system.ss
        try:
            sweep = epsilon_sweep(ss, spec, DECOHERENCE_SETTINGS["eps_grid"])
        except AsymptoteError as exc:
            return [_skipped("asymptote", exc.message)]
        finite = [r for r in sweep.reports if not r.is_infinite]
        if len(finite) < len(sweep.reports) or any(r.tau_hat is None for r in finite):
            return [_skipped("asymptote", "τ infini ou τ̂ indisponible")]

        smallest = decoherence_time(ss, spec, 1e-5)
        taus = [r.tau for r in sweep.reports]
        monotone = all(a <= b for a, b in zip(taus, taus[1:]))
        level = max(
            abs(delta_at(ss, spec, r.tau)[0] - r.threshold) / r.threshold for r in finite
        )
        return [
            _within("asymptote_ratio", smallest.ratio, 0.95, 1.05),
            _within("asymptote_slope", sweep.fitted_slope, 0.45, 0.55),
            CheckResult(name="tau_monotone_in_epsilon", passed=monotone),
            _check("level_identity", level, 1e-6),
        ]

    def check_control_sweep(self, system: ScenarioSystem, spec) -> List[CheckResult]:
        """Témoin FB ≠ 0 : τ ∝ ε (pente 1) et τ isolé > τ témoin à ε = 1e-5."""
        ss = system.ss
        if np.linalg.norm(ss.B) == 0.0:
            return [_skipped("control_sweep_slope", "B = 0")]
        try:
            control = deviation_spec(control_selection(ss, spec.F.shape[0]), spec.P,
                                     spec.theta, self.allow_unphysical)
        except QmemError as exc:
            return [_skipped("control_sweep_slope", exc.message)]

        sweep = epsilon_sweep(ss, control, DECOHERENCE_SETTINGS["eps_grid"])
        tau_isolated = decoherence_time(ss, spec, 1e-5).tau
        tau_control = decoherence_time(ss, control, 1e-5).tau
        outlasts = tau_isolated is None or (
            tau_control is not None and tau_isolated > tau_control
        )
        return [
            _within("control_sweep_slope", sweep.fitted_slope, 0.95, 1.05),
            CheckResult(name="isolated_outlasts_control", passed=bool(outlasts),
                        value=tau_isolated, detail=f"témoin {tau_control}"),
        ]

    # ── Optimalité ───────────────────────────────────────────────────────────

    def check_optimality(self, system: ScenarioSystem, F: np.ndarray, P: np.ndarray,
                         rng: np.random.Generator) -> List[CheckResult]:
        problem = coupling_problem(system.spec, F, P)
        blocks = problem.blocks
        L = assemble_g(blocks)
        shape = (blocks.n1, blocks.n2)

        symmetry = float(np.max(np.abs(L - L.T), initial=0.0))
        max_eig = float(np.linalg.eigvalsh(0.5 * (L + L.T)).max())
        pairing = 0.0
        for _ in range(50):
            N1, N2 = rng.normal(size=shape), rng.normal(size=shape)
            pairing = max(pairing, abs(
                frobenius_inner(apply_g(N1, blocks), N2) - frobenius_inner(N1, apply_g(N2, blocks))
            ))

        result = optimal_coupling(problem)
        K = problem_k(problem)
        residual = result.residual / (1.0 + np.linalg.norm(K))

        R12 = rng.normal(size=shape)
        _, grad = objective_and_gradient(R12, problem)
        h = 1e-6
        fd = np.zeros(shape)
        for idx in np.ndindex(*shape):
            E = np.zeros(shape)
            E[idx] = h
            fd[idx] = (objective_and_gradient(R12 + E, problem)[0]
                       - objective_and_gradient(R12 - E, problem)[0]) / (2.0 * h)
        grad_error = float(np.max(np.abs(fd - grad)))

        f_opt = result.f_value
        worse = 0
        for _ in range(100):
            delta = rng.normal(size=shape)
            delta *= 1e-3 / np.linalg.norm(delta)
            if objective_and_gradient(result.R12_opt + delta, problem)[0] < f_opt - 1e-14:
                worse += 1

        improvement = True
        if result.tau_hat_before is not None and result.tau_hat_after is not None:
            improvement = result.tau_hat_after >= result.tau_hat_before
        return [
            _check("g_symmetry", symmetry, 1e-12),
            _check("g_negative_semidefinite", max_eig, 1e-10),
            _check("g_self_adjoint_pairing", pairing, 1e-10, "50 paires"),
            _check("optimality_residual", residual, 1e-8),
            _check("gradient_finite_difference", grad_error, 1e-6),
            _check("local_perturbations", float(worse), 0.0, "100 perturbations ‖δ‖ = 1e-3"),
            CheckResult(name="tau_hat_improvement", passed=improvement,
                        value=result.tau_hat_after, detail=f"avant {result.tau_hat_before}"),
        ]
