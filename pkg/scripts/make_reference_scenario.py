"""
═══════════════════════════════════════════════════════════════════════════════
SCRIPT: Génération des scénarios de référence
Fichier: scripts/make_reference_scenario.py
═══════════════════════════════════════════════════════════════════════════════

    python scripts/make_reference_scenario.py --seed 7 --out scenarios/

Écrit l'interconnexion tirée (ν_k = 2, m_k = r_k = 2, R₁₂ = 0, P = ½I₈)
et l'oscillateur fermé.
"""

import argparse
import logging
import sys
from pathlib import Path

sys.path.append(str(Path(__file__).parent.parent))

from app.core.exporter import write_json  # noqa: E402
from app.lab.scenario_factory import closed_oscillator_scenario, reference_scenario  # noqa: E402
from app.models.scenario_config import scenario_to_dict  # noqa: E402

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


def main() -> None:
    parser = argparse.ArgumentParser(description="Scénarios de référence qmemtime")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out", type=Path, default=Path(__file__).parent.parent / "scenarios")
    args = parser.parse_args()

    reference = scenario_to_dict(reference_scenario(seed=args.seed))
    write_json(reference, args.out / f"reference_interconnection_seed{args.seed}.json")
    write_json(scenario_to_dict(closed_oscillator_scenario()), args.out / "closed_oscillator.json")
    logger.info("Scénarios écrits dans %s", args.out)


if __name__ == "__main__":
    main()
