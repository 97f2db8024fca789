"""
═══════════════════════════════════════════════════════════════════════════════
MODULE: Fabrique de scénarios - Interconnexions tirées aléatoirement
Fichier: app/lab/scenario_factory.py
Version: 1.0.0
═══════════════════════════════════════════════════════════════════════════════

Scénario de référence : deux OQHO à ν_k = 2 modes (n = 8), m_k = r_k = 2,
D_k = I₂, R₁₂ = 0, P = ½I₈, ordre d'isolation s = 2. Chaque tirage est
entièrement déterminé par sa graine (np.random.default_rng).
"""

import logging
from typing import Optional, Tuple

import numpy as np

from config.settings import ISOLATION_SETTINGS
from app.core.oqho_model import CcrStructure, InterconnectionSpec, OqhoParams, StateSpace
from app.models.scenario_config import (
    AnalysisOptions,
    IsolationOptions,
    OscillatorBlock,
    Scenario,
)

logger = logging.getLogger(__name__)

#: Amplitudes des perturbations aléatoires
ENERGY_SPREAD: float = 0.25
COUPLING_SCALE: float = 0.5
FEEDBACK_SCALE: float = 0.3


def random_energy(rng: np.random.Generator, n: int) -> np.ndarray:
    """R = I + spread·𝐒(G), G gaussienne."""
    G = rng.normal(size=(n, n))
    return np.eye(n) + ENERGY_SPREAD * 0.5 * (G + G.T)


def random_oscillator(rng: np.random.Generator, nu: int = 2, m: int = 2) -> OscillatorBlock:
    n = 2 * nu
    return OscillatorBlock(
        nu=nu,
        R=random_energy(rng, n),
        M=COUPLING_SCALE * rng.normal(size=(m, n)),
        D=np.eye(m),
    )


def reference_scenario(seed: int = 7, nu: int = 2, m: int = 2) -> Scenario:
    """Interconnexion de référence tirée avec la graine `seed`."""
    rng = np.random.default_rng(seed)
    osc1 = random_oscillator(rng, nu, m)
    osc2 = random_oscillator(rng, nu, m)
    n = 2 * nu
    osc1 = OscillatorBlock(nu=osc1.nu, R=osc1.R, M=osc1.M, D=osc1.D,
                           N=FEEDBACK_SCALE * rng.normal(size=(m, n)))
    osc2 = OscillatorBlock(nu=osc2.nu, R=osc2.R, M=osc2.M, D=osc2.D,
                           N=FEEDBACK_SCALE * rng.normal(size=(m, n)))
    logger.debug("Scénario de référence tiré | seed=%d | n=%d", seed, 2 * n)
    return Scenario(
        mode="interconnection",
        oscillators=[osc1, osc2],
        R12=np.zeros((n, n)),
        P=0.5 * np.eye(2 * n),
        isolation=IsolationOptions(s=ISOLATION_SETTINGS["default_order"]),
        analysis=AnalysisOptions(),
        seed=seed,
    )


def reference_interconnection(seed: int = 7) -> InterconnectionSpec:
    return reference_scenario(seed).interconnection()


def closed_oscillator_scenario(nu: int = 1) -> Scenario:
    """Oscillateur fermé : R = I, M = 0 (A = 2Θ, B = 0)."""
    n = 2 * nu
    return Scenario(
        mode="single",
        oscillators=[OscillatorBlock(nu=nu, R=np.eye(n), M=np.zeros((2, n)))],
        P=0.5 * np.eye(n),
        isolation=IsolationOptions(s=1),
        seed=None,
    )


def control_selection(ss: StateSpace, s: int = 2) -> np.ndarray:
    """
    F témoin non isolant : lignes normées des s premières colonnes de B,
    de sorte que ‖FB‖ soit du même ordre que ‖B‖².
    """
    F = ss.B[:, :s].T.copy()
    return F / np.linalg.norm(F, axis=1, keepdims=True)


def random_selection(n: int, s: int, seed: Optional[int] = None) -> np.ndarray:
    """F générique s×n à lignes normées."""
    rng = np.random.default_rng(seed)
    F = rng.normal(size=(s, n))
    return F / np.linalg.norm(F, axis=1, keepdims=True)


def single_oscillator(
    rng: np.random.Generator, nu: int = 2, m: int = 2,
) -> Tuple[OqhoParams, CcrStructure]:
    """(OqhoParams, CcrStructure) d'un oscillateur isolé tiré au hasard."""
    osc = random_oscillator(rng, nu, m)
    return OqhoParams(R=osc.R, M=osc.M, D=osc.D), CcrStructure.build(nu, m)
