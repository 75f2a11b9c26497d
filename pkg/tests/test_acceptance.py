"""One test per acceptance criterion; a PASS/FAIL line for each is printed
in the terminal summary (see ``conftest.pytest_terminal_summary``)."""

import time

import pytest

from . import criteria

# (number, title, check, time limit in seconds)
CRITERIA = [
    (1, "operational semantics battery with exact reducts", criteria.opsem_battery, 1),
    (2, "Church booleans", criteria.church_bool, 5),
    (3, "loosen, tighten, loosentighten", criteria.loosen_tighten, 10),
    (4, "weak excluded middle refuted", criteria.wlem, 5),
    (5, "bridge function extensionality", criteria.bridge_funext, 5),
    (6, "coherence under interval substitution", criteria.coherence, 60),
    (7, "canonicity", criteria.canonicity, 10),
    (8, "negative corpus codes", criteria.negatives, 2),
    (9, "subject reduction and determinism", criteria.subject_reduction, 60),
    (10, "restriction and forall tables", lambda: f"{criteria.restriction_table()}; {criteria.forall_table()}", 1),
]

RESULTS: dict = {}


def run_criterion(number, title, check, limit):
    start = time.perf_counter()
    try:
        detail = check()
        elapsed = time.perf_counter() - start
        assert elapsed < limit, f"took {elapsed:.1f}s, limit {limit}s"
    except Exception as e:  # noqa: BLE001 - any failure is a FAIL line
        RESULTS[number] = f"criterion {number}: FAIL ({title}: {type(e).__name__}: {e})"
        raise
    RESULTS[number] = f"criterion {number}: PASS ({title}: {detail}; {elapsed:.1f}s of {limit}s)"
    return detail


@pytest.mark.parametrize("number,title,check,limit", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(number, title, check, limit):
    run_criterion(number, title, check, limit)
    print(RESULTS[number])


if __name__ == "__main__":
    for entry in CRITERIA:
        try:
            run_criterion(*entry)
        except Exception:
            pass
        print(RESULTS[entry[0]])
