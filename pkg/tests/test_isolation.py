"""
tests/test_isolation.py
═══════════════════════
Tests unitaires — isolation partielle et fonctions de transfert (app/core/isolation.py)
"""

import numpy as np
import pytest

from app.core.errors import (
    DimensionError,
    DomainError,
    InfeasibleIsolationError,
    NoIsolationError,
    PoleError,
    RankError,
)
from app.core.isolation import (
    decompose,
    full_resolvent_map,
    initial_response,
    is_autonomous,
    isolation_basis,
    isolation_rank,
    transfer_eval,
)
from app.core.oqho_model import CcrStructure, OqhoParams, realize
from app.lab.scenario_factory import random_selection


class TestIsolationBasis:

    def test_fb_nul(self, ref_system, ref_decomposition):
        ss = ref_system.ss
        assert np.linalg.norm(ref_decomposition.F @ ss.B) <= 1e-10 * (1.0 + np.linalg.norm(ss.B))
        assert ref_decomposition.isolated

    def test_rang_et_normalisation(self, ref_decomposition):
        F = ref_decomposition.F
        assert F.shape == (2, 8)
        assert np.linalg.matrix_rank(F) == 2
        assert np.allclose(np.linalg.norm(F, axis=1), 1.0)

    def test_fa_egal_g(self, ref_system, ref_decomposition):
        ss = ref_system.ss
        gap = np.linalg.norm(ref_decomposition.F @ ss.A - ref_decomposition.G)
        assert gap <= 1e-10 * (1.0 + np.linalg.norm(ss.A))

    def test_blocs_similitude(self, ref_system, ref_decomposition):
        dec = ref_decomposition
        assert np.allclose(dec.a, dec.S @ ref_system.ss.A @ np.linalg.inv(dec.S), atol=1e-10)
        assert np.allclose(dec.a12, dec.G @ dec.S2, atol=1e-10)

    def test_ordre_maximal(self, ref_system):
        dec = isolation_basis(ref_system.ss, 4)
        assert dec.s == 4
        assert dec.isolated

    def test_ordre_infaisable(self, ref_system):
        with pytest.raises(InfeasibleIsolationError) as exc_info:
            isolation_basis(ref_system.ss, 5)
        assert exc_info.value.details["d"] == 4
        assert exc_info.value.exit_code == 4

    def test_ordre_nul(self, ref_system):
        with pytest.raises(DomainError):
            isolation_basis(ref_system.ss, 0)

    def test_aucune_isolation(self):
        ccr = CcrStructure.build(1, 2)
        ss = realize(OqhoParams(R=np.eye(2), M=np.eye(2)), ccr)
        assert isolation_rank(ss.M, 2) == 0
        with pytest.raises(NoIsolationError):
            isolation_basis(ss, 1)

    def test_oscillateur_ferme_s_egal_n(self, closed_system):
        dec = isolation_basis(closed_system.ss, 2)
        assert dec.T.shape == (0, 2)
        values = transfer_eval(dec, 1.0 + 1.0j)
        assert values.noise_map.shape == (2, 2)
        assert not values.noise_map.any()


class TestDecompose:

    def test_f_temoin_non_isolant(self, ref_system, control_F):
        dec = decompose(ref_system.ss, control_F)
        assert not dec.isolated
        assert dec.fb_norm > 0.1

    def test_f_generique(self, ref_system):
        F = random_selection(8, 3, seed=11)
        dec = decompose(ref_system.ss, F)
        assert dec.s == 3 and not dec.isolated
        values = transfer_eval(dec, 1.5 + 0.5j)
        full = full_resolvent_map(ref_system.ss, dec.F, 1.5 + 0.5j)
        assert np.linalg.norm(full - values.noise_map) <= 1e-8


class TestTransfer:

    @pytest.mark.parametrize("u", [1.0 + 0.5j, 2.5 - 3.0j, (0.7, 4.0)])
    def test_identite_frequentielle(self, ref_system, ref_decomposition, u):
        values = transfer_eval(ref_decomposition, u)
        full = full_resolvent_map(ref_system.ss, ref_decomposition.F, u)
        assert np.linalg.norm(full - values.noise_map) <= 1e-8

    def test_pole_detecte(self, closed_system):
        dec = isolation_basis(closed_system.ss, 1)
        # Valeurs propres de A = 2Θ : ±i
        pole = complex(np.linalg.eigvals(closed_system.ss.A)[0])
        with pytest.raises(PoleError):
            full_resolvent_map(closed_system.ss, dec.F, pole)

    def test_reponse_initiale(self, ref_system, ref_decomposition):
        u = 1.5 + 0.5j
        dec = ref_decomposition
        response = initial_response(dec, u)
        # φ̂ = F(uI − A)⁻¹X(0) = ((I + ΓΨ₁)χ₁ + Γχ₂)·S·X(0)
        resolvent = np.linalg.inv(u * np.eye(8) - ref_system.ss.A)
        assert np.allclose(response["initial_map"] @ dec.S, dec.F @ resolvent, atol=1e-10)


class TestAutonomy:

    def test_oscillateur_ferme_autonome(self, closed_system):
        dec = isolation_basis(closed_system.ss, 2)
        flag, N, residual = is_autonomous(dec)
        assert flag
        assert np.allclose(N @ dec.F, dec.G, atol=1e-10)

    def test_reference_non_autonome(self, ref_decomposition):
        flag, _, residual = is_autonomous(ref_decomposition)
        assert not flag
        assert residual > 1e-6


def _mode_decouple():
    """Deux modes : le premier sans couplage aux champs ni au second (a₁₂ = 0)."""
    ccr = CcrStructure.build(2, 2)
    M = np.array([[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]])
    ss = realize(OqhoParams(R=np.eye(4), M=M), ccr)
    F = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]])
    return ss, decompose(ss, F)


class TestComplement:

    def test_carte_de_bruit_independante_de_t(self, ref_system, ref_decomposition, rng):
        dec = ref_decomposition
        other = decompose(ref_system.ss, dec.F, T=rng.normal(size=(6, 8)))
        assert not np.allclose(other.T, dec.T)
        for u in (1.0, 0.3 + 2.0j):
            full = full_resolvent_map(ref_system.ss, dec.F, u)
            assert np.linalg.norm(transfer_eval(dec, u).noise_map - full) <= 1e-8
            assert np.linalg.norm(transfer_eval(other, u).noise_map - full) <= 1e-8

    def test_complement_singulier(self, ref_system, ref_decomposition):
        F = ref_decomposition.F
        T = np.vstack([F, np.zeros((4, 8))])
        with pytest.raises(RankError):
            decompose(ref_system.ss, F, T=T)

    def test_complement_mauvaise_forme(self, ref_system, ref_decomposition):
        with pytest.raises(DimensionError):
            decompose(ref_system.ss, ref_decomposition.F, T=np.eye(8)[:5])


class TestTransferLimites:

    def test_a12_nul(self):
        ss, dec = _mode_decouple()
        assert dec.isolated
        assert np.allclose(dec.a12, 0.0, atol=1e-14)
        values = transfer_eval(dec, 1.0 + 1.0j)
        assert np.allclose(values.Phi, 0.0, atol=1e-14)
        assert np.allclose(values.Gamma, 0.0, atol=1e-14)
        assert np.allclose(values.noise_map, 0.0, atol=1e-14)
        assert np.linalg.norm(values.Psi2) > 0.0

    def test_decroissance_haute_frequence(self, ref_decomposition):
        low = transfer_eval(ref_decomposition, 1e2)
        high = transfer_eval(ref_decomposition, 1e3)
        phi_ratio = np.linalg.norm(low.Phi) / np.linalg.norm(high.Phi)
        assert 9.0 <= phi_ratio <= 11.0
        # FB = 0 : le premier terme en 1/u de la carte de bruit s'annule
        noise_ratio = np.linalg.norm(low.noise_map) / np.linalg.norm(high.noise_map)
        assert 80.0 <= noise_ratio <= 125.0

    def test_pole_de_a11(self, ref_decomposition):
        pole = complex(np.linalg.eigvals(ref_decomposition.a11)[0])
        with pytest.raises(PoleError) as exc_info:
            transfer_eval(ref_decomposition, pole)
        assert exc_info.value.details["block"] == "a11"
