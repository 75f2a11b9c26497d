"""Coherence of evaluation under interval substitutions, over the corpus.

For each definition M and random substitution psi (injective on bridge
variables), compares the normal forms of eval(M psi) and eval(eval(M) psi).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

from tests import criteria  # noqa: E402


@dataclass
class Config:
    samples: int = 100
    seed: int = 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=Config.samples, help="substitutions per definition")
    ap.add_argument("--seed", type=int, default=Config.seed)
    cfg = Config(**vars(ap.parse_args(argv)))
    try:
        print(criteria.coherence(cfg.samples, cfg.seed))
    except AssertionError as e:
        print(f"incoherent: {e}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
