from __future__ import annotations

import functools
import re
from pathlib import Path

import pytest

from parcub.frontend.elaborate import Session
from parcub.interval import BVar, Context, PVar

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
POSITIVE = sorted(CORPUS.glob("*.ptt"))
NEGATIVE = sorted((CORPUS / "negative").glob("*.ptt"))

_EXPECT = re.compile(r"^-- expect: (\w+)", re.M)


def expected_code(path: Path) -> str:
    return _EXPECT.search(path.read_text()).group(1)


@functools.lru_cache(maxsize=None)
def loaded(path: Path):
    """A session with every definition of ``path`` loaded, plus the per-definition results."""
    s = Session()
    results = s.load(path.read_text())
    return s, results


def session_for(name: str) -> Session:
    return loaded(CORPUS / f"{name}.ptt")[0]


def param_dims(d):
    """Dimension variables for a definition's parameters, and the context binding them."""
    dims, ctx = [], Context()
    for p, sort in d.params:
        if sort == "p":
            dims.append(PVar(p))
            ctx = ctx.with_path(p)
        else:
            dims.append(BVar(p))
            ctx = ctx.with_bridge(p)
    return tuple(dims), ctx


def corpus_defs():
    """(file stem, definition) for every checked corpus definition."""
    out = []
    for path in POSITIVE:
        s, _ = loaded(path)
        out.extend((path.stem, d) for d in s.defs.values())
    return out


@pytest.fixture
def sess():
    return Session()


@pytest.fixture
def term(sess):
    """Elaborate surface text; ``dims`` is a string like "i j x:b" of free dimensions."""
    def make(text, dims=""):
        pairs = []
        for item in dims.split():
            name, _, sort = item.partition(":")
            pairs.append((name, sort or "p"))
        return sess.term(text, pairs)
    return make


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(test_acceptance.RESULTS):
        terminalreporter.write_line(test_acceptance.RESULTS[n])
