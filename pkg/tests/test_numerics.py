"""
tests/test_numerics.py
══════════════════════
Tests unitaires — noyaux numériques (app/core/numerics.py)

Couvre :
  - HermitianPair : formes, conversion complexe, contrôle hermitien
  - expm, sqrtm_psd : cas fermés et rejets
  - Rang numérique, base du noyau, complément ligne
  - lstsq de norme minimale
  - Lyapunov RK4 contre solutions exactes et contre la quadrature
"""

import numpy as np
import pytest

from app.core.errors import DimensionError, DomainError, GridError, NotPSDError, RankError, ValidationError
from app.core.numerics import (
    HermitianPair,
    expm,
    frobenius_inner,
    gramian_quadrature,
    integrate_lyapunov,
    kernel_basis,
    lstsq_min_norm,
    numerical_rank,
    row_complement,
    rk4_substep,
    sqrtm_psd,
    symmetrize,
)
from app.core.oqho_model import ito_j


# ═══════════════════════════════════════════════════════════════════════════════
# PAIRES HERMITIENNES
# ═══════════════════════════════════════════════════════════════════════════════

class TestHermitianPair:

    def test_formes_incompatibles_rejetees(self):
        with pytest.raises(DimensionError):
            HermitianPair(np.eye(2), np.zeros((3, 3)))

    def test_conversion_complexe(self):
        X = np.array([[2.0, 1.0 + 1j], [1.0 - 1j, 3.0]])
        pair = HermitianPair.from_complex(X)
        assert np.allclose(pair.to_complex(), X)
        pair.check()

    def test_check_detecte_asymetrie(self):
        with pytest.raises(ValidationError):
            HermitianPair(np.array([[0.0, 1.0], [0.0, 0.0]]), np.zeros((2, 2))).check()

    def test_zeros(self):
        pair = HermitianPair.zeros(4)
        assert pair.order == 4
        assert not pair.re.any() and not pair.im.any()


# ═══════════════════════════════════════════════════════════════════════════════
# EXPONENTIELLE & RACINE
# ═══════════════════════════════════════════════════════════════════════════════

class TestExpm:

    def test_t_nul_donne_identite(self):
        assert np.array_equal(expm(np.ones((3, 3)), 0.0), np.eye(3))

    def test_rotation(self):
        A = np.array([[0.0, 1.0], [-1.0, 0.0]])
        t = 0.7
        expected = np.array([[np.cos(t), np.sin(t)], [-np.sin(t), np.cos(t)]])
        assert np.allclose(expm(A, t), expected, atol=1e-14)

    def test_matrice_non_carree(self):
        with pytest.raises(DimensionError):
            expm(np.ones((2, 3)))

    def test_t_non_fini(self):
        with pytest.raises(DomainError):
            expm(np.eye(2), float("nan"))

    def test_semigroupe(self, rng):
        A = rng.normal(size=(4, 4))
        t, s = 0.3, 0.7
        assert np.allclose(expm(A, t + s), expm(A, t) @ expm(A, s), rtol=1e-10, atol=1e-12)


class TestSqrtmPsd:

    def test_carre_reconstruit(self, rng):
        G = rng.normal(size=(5, 5))
        P = G @ G.T
        root = sqrtm_psd(P)
        assert np.allclose(root @ root, P, atol=1e-10)
        assert np.allclose(root, root.T)

    def test_semi_definie_acceptee(self):
        root = sqrtm_psd(np.diag([4.0, 0.0]))
        assert np.allclose(root, np.diag([2.0, 0.0]))

    def test_negative_rejetee(self):
        with pytest.raises(NotPSDError):
            sqrtm_psd(np.diag([1.0, -1e-3]))


# ═══════════════════════════════════════════════════════════════════════════════
# RANG, NOYAU, COMPLÉMENT
# ═══════════════════════════════════════════════════════════════════════════════

class TestKernel:

    def test_rang_et_noyau(self, rng):
        M = rng.normal(size=(2, 6))
        assert numerical_rank(M) == 2
        K = kernel_basis(M)
        assert K.shape == (6, 4)
        assert np.allclose(M @ K, 0.0, atol=1e-12)
        assert np.allclose(K.T @ K, np.eye(4), atol=1e-12)

    def test_noyau_2x8_graine(self):
        M = np.random.default_rng(7).normal(size=(2, 8))
        K = kernel_basis(M)
        assert K.shape == (8, 6)
        assert np.allclose(K.T @ K, np.eye(6), atol=1e-12)
        assert np.allclose(M @ K, 0.0, atol=1e-12)

    def test_matrice_nulle(self):
        assert numerical_rank(np.zeros((2, 4))) == 0
        assert kernel_basis(np.zeros((2, 4))).shape == (4, 4)

    def test_rang_plein_noyau_vide(self):
        assert kernel_basis(np.eye(3)).shape == (3, 0)

    def test_complement_inversible(self, rng):
        F = rng.normal(size=(2, 5))
        T = row_complement(F)
        assert T.shape == (3, 5)
        assert np.allclose(F @ T.T, 0.0, atol=1e-12)
        assert np.linalg.matrix_rank(np.vstack([F, T])) == 5

    def test_complement_f_deficient(self):
        F = np.array([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]])
        with pytest.raises(RankError):
            row_complement(F)

    def test_complement_f_carre(self):
        with pytest.raises(RankError):
            row_complement(np.eye(3))


class TestLstsq:

    def test_norme_minimale(self):
        L = np.array([[1.0, 1.0]])
        x, residual = lstsq_min_norm(L, np.array([2.0]))
        assert np.allclose(x, [1.0, 1.0])
        assert residual < 1e-14

    def test_rang_deficient_6x6(self, rng):
        L = rng.normal(size=(6, 3)) @ rng.normal(size=(3, 6))
        b = rng.normal(size=6)
        x, _ = lstsq_min_norm(L, b)
        assert np.allclose(L.T @ (L @ x - b), 0.0, atol=1e-9)
        K = kernel_basis(L)
        assert K.shape == (6, 3)
        # Norme minimale : x orthogonal au noyau
        assert np.allclose(K.T @ x, 0.0, atol=1e-9)
        assert np.linalg.norm(x + 0.1 * K[:, 0]) > np.linalg.norm(x)

    def test_dimensions_incompatibles(self):
        with pytest.raises(DimensionError):
            lstsq_min_norm(np.eye(2), np.ones(3))


# ═══════════════════════════════════════════════════════════════════════════════
# LYAPUNOV
# ═══════════════════════════════════════════════════════════════════════════════

class TestLyapunov:

    def test_a_nul_croissance_lineaire(self):
        J = ito_j(2)
        mho = HermitianPair(np.eye(2), J)
        samples = integrate_lyapunov(np.zeros((2, 2)), mho, [0.0, 0.5, 2.0])
        assert np.allclose(samples[2].re, 2.0 * np.eye(2), atol=1e-13)
        assert np.allclose(samples[2].im, 2.0 * J, atol=1e-13)

    def test_a_scalaire_solution_exacte(self):
        a = 1.5
        A = -a * np.eye(2)
        mho = HermitianPair(np.eye(2), np.zeros((2, 2)))
        t = 3.0
        V = integrate_lyapunov(A, mho, [0.0, t])[-1]
        exact = (1.0 - np.exp(-2.0 * a * t)) / (2.0 * a)
        assert abs(V.re[0, 0] - exact) / exact < 1e-7

    def test_premier_echantillon_nul(self):
        samples = integrate_lyapunov(np.eye(2), HermitianPair(np.eye(2), np.zeros((2, 2))), [0.0, 1.0])
        assert not samples[0].re.any()

    def test_sous_pas_respecte_borne(self, rng):
        A = rng.normal(size=(4, 4))
        assert np.linalg.norm(A, 2) * rk4_substep(A) <= 0.1

    @pytest.mark.parametrize("grid", [[], [0.1, 0.2], [0.0, 1.0, 1.0]])
    def test_grilles_invalides(self, grid):
        with pytest.raises(GridError):
            integrate_lyapunov(np.eye(2), HermitianPair.zeros(2), grid)

    def test_accord_quadrature(self, ref_system):
        ss = ref_system.ss
        V = integrate_lyapunov(ss.A, ss.mho, [0.0, 1.0])[-1]
        Q = gramian_quadrature(ss.A, ss.B, ss.ccr.j_field, 1.0)
        assert np.linalg.norm(V.re - Q.re) / np.linalg.norm(Q.re) < 1e-8
        assert np.linalg.norm(V.im - Q.im) / np.linalg.norm(Q.im) < 1e-8

    def test_quadrature_t_negatif(self):
        with pytest.raises(DomainError):
            gramian_quadrature(np.eye(2), np.eye(2), ito_j(2), -1.0)

    def test_sorties_hermitiennes(self, ref_system):
        ss = ref_system.ss
        V = integrate_lyapunov(ss.A, ss.mho, [0.0, 0.3])[-1]
        V.check()


class TestUtilitaires:

    def test_symmetrize_et_frobenius(self):
        X = np.array([[1.0, 2.0], [0.0, 3.0]])
        S = symmetrize(X)
        assert np.allclose(S, S.T)
        assert frobenius_inner(X, np.eye(2)) == pytest.approx(4.0)
