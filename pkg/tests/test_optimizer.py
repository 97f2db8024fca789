"""
tests/test_optimizer.py
═══════════════════════
Tests unitaires — optimisation du couplage direct R₁₂ (app/core/optimizer.py)

Couvre :
  - Opérateur g : symétrie, semi-définie négative, autoadjonction de Frobenius
  - Identité de Kronecker sur les termes diagonaux
  - Gradient analytique contre différences finies
  - Résolution g(R₁₂) + K = 0 et amélioration de τ̂
"""

from dataclasses import replace

import numpy as np
import pytest

from app.core.errors import DimensionError, OptimalityViolationError
from app.core.numerics import frobenius_inner
from app.core.optimizer import (
    apply_g,
    assemble_g,
    compute_k,
    coupling_problem,
    full_energy,
    gp_norm,
    objective_and_gradient,
    optimal_coupling,
    problem_k,
)


@pytest.fixture(scope="module")
def problem(ref_system, ref_decomposition, ref_scenario):
    return coupling_problem(ref_system.spec, ref_decomposition.F, ref_scenario.initial_moments())


@pytest.fixture(scope="module")
def g_matrix(problem):
    return assemble_g(problem.blocks)


class TestOperatorG:

    def test_symetrique(self, g_matrix):
        assert g_matrix.shape == (16, 16)
        assert np.max(np.abs(g_matrix - g_matrix.T)) <= 1e-12

    def test_semi_definie_negative(self, g_matrix):
        assert np.linalg.eigvalsh(0.5 * (g_matrix + g_matrix.T)).max() <= 1e-10

    def test_autoadjoint(self, problem, rng):
        blocks = problem.blocks
        for _ in range(50):
            N1, N2 = rng.normal(size=(4, 4)), rng.normal(size=(4, 4))
            lhs = frobenius_inner(apply_g(N1, blocks), N2)
            rhs = frobenius_inner(N1, apply_g(N2, blocks))
            assert abs(lhs - rhs) <= 1e-10

    def test_vectorisation_colonnes(self, problem, g_matrix, rng):
        N = rng.normal(size=(4, 4))
        assert np.allclose(
            g_matrix @ N.ravel(order="F"), apply_g(N, problem.blocks).ravel(order="F"), atol=1e-12,
        )

    def test_identite_kronecker(self, problem):
        b = problem.blocks
        zero = np.zeros_like(b.Sigma12)
        diagonal = replace(b, Sigma12=zero, P12=zero)
        L = assemble_g(diagonal)
        expected = (
            np.kron(b.P22, b.Theta1 @ b.Sigma11 @ b.Theta1)
            + np.kron(b.Theta2 @ b.Sigma22 @ b.Theta2, b.P11)
        )
        assert np.allclose(L, expected, atol=1e-12)

    def test_forme_invalide(self, problem):
        with pytest.raises(DimensionError):
            apply_g(np.zeros((3, 4)), problem.blocks)

    def test_parallele_identique(self, problem, g_matrix):
        assert np.array_equal(assemble_g(problem.blocks, n_jobs=2), g_matrix)


class TestObjective:

    def test_gradient_differences_finies(self, problem, rng):
        R12 = rng.normal(size=(4, 4))
        _, grad = objective_and_gradient(R12, problem)
        h = 1e-6
        fd = np.zeros_like(R12)
        for idx in np.ndindex(*R12.shape):
            E = np.zeros_like(R12)
            E[idx] = h
            fd[idx] = (objective_and_gradient(R12 + E, problem)[0]
                       - objective_and_gradient(R12 - E, problem)[0]) / (2 * h)
        assert np.max(np.abs(fd - grad)) <= 1e-6

    def test_gp_norm_route_a0(self, problem, ref_system, ref_decomposition, ref_deviation):
        b = problem.blocks
        R = full_energy(b.Rstar, problem.R12_initial)
        via_a0 = np.linalg.norm(ref_decomposition.G @ ref_deviation.sqrtP)
        assert gp_norm(R, problem.F, b.Theta, problem.sqrtP) == pytest.approx(via_a0, rel=1e-10)

    def test_k_dimensions(self, problem):
        b = problem.blocks
        with pytest.raises(DimensionError):
            compute_k(b.Theta, b.Sigma, b.Rstar, b.P, 0)
        assert problem_k(problem).shape == (4, 4)


class TestOptimalCoupling:

    def test_residu_et_optimalite(self, problem, rng):
        result = optimal_coupling(problem)
        k_norm = np.linalg.norm(problem_k(problem))
        assert result.residual <= 1e-8 * (1.0 + k_norm)
        for _ in range(100):
            delta = rng.normal(size=(4, 4))
            delta *= 1e-3 / np.linalg.norm(delta)
            assert objective_and_gradient(result.R12_opt + delta, problem)[0] >= result.f_value - 1e-14

    def test_amelioration_tau_hat(self, problem):
        result = optimal_coupling(problem, reference_epsilon=1e-3)
        assert result.f_value <= result.f_initial
        if result.k_norm > 0.0:
            assert result.gp_after < result.gp_before
        assert result.tau_hat_after >= result.tau_hat_before
        assert result.nullity == 16 - result.g_matrix_rank

    def test_violation_detectee(self, problem, mocker):
        mocker.patch(
            "app.core.optimizer.lstsq_min_norm",
            return_value=(np.ones(16), 1.0),
        )
        with pytest.raises(OptimalityViolationError):
            optimal_coupling(problem)

    def test_energie_nulle_couplage_nul(self, problem):
        zero = np.zeros_like(problem.blocks.Rstar)
        trivial = replace(
            problem,
            blocks=replace(problem.blocks, Rstar=zero),
            R12_initial=np.zeros_like(problem.R12_initial),
        )
        f0, grad0 = objective_and_gradient(trivial.R12_initial, trivial)
        assert f0 == 0.0
        assert not grad0.any()
        result = optimal_coupling(trivial)
        assert np.allclose(result.R12_opt, 0.0, atol=1e-14)
        assert result.f_value == pytest.approx(0.0, abs=1e-28)
        assert result.tau_hat_after is None
