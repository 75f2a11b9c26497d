"""Run the acceptance criteria outside pytest and print one line each."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from tests.test_acceptance import CRITERIA, RESULTS, run_criterion  # noqa: E402


def main() -> int:
    failed = 0
    for entry in CRITERIA:
        try:
            run_criterion(*entry)
        except Exception:  # noqa: BLE001
            failed += 1
        print(RESULTS[entry[0]])
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
