"""Check every corpus file and print one line per file with the outcome."""

from __future__ import annotations

import argparse
import re
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from parcub.frontend.elaborate import Session
from parcub.opsem import DEFAULT_FUEL

ROOT = Path(__file__).resolve().parent.parent


@dataclass
class Config:
    corpus: Path = ROOT / "corpus"
    fuel: int = DEFAULT_FUEL


def check(path: Path, fuel: int):
    """(number of definitions, list of diagnostic codes) for one file."""
    results = Session(fuel).load(path.read_text())
    return len(results), [r.error.code.value for r in results if r.error]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--corpus", type=Path, default=Config.corpus)
    ap.add_argument("--fuel", type=int, default=Config.fuel)
    cfg = Config(**vars(ap.parse_args(argv)))

    ok = True
    files = sorted(cfg.corpus.glob("*.ptt")) + sorted((cfg.corpus / "negative").glob("*.ptt"))
    for path in files:
        start = time.perf_counter()
        n, codes = check(path, cfg.fuel)
        m = re.search(r"^-- expect: (\w+)", path.read_text(), re.M)
        want = [m.group(1)] if m else []
        good = codes == want
        ok &= good
        status = "ok" if good else "MISMATCH"
        got = ", ".join(codes) or "no errors"
        print(f"{status:8} {path.relative_to(cfg.corpus)}: {n} defs, {got} ({time.perf_counter() - start:.2f}s)")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
