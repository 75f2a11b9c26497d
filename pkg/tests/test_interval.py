import itertools

import pytest
from hypothesis import given, settings, strategies as st

from parcub.interval import (
    AffineViolation, B0, B1, BConst, BVar, BridgeDim, BridgeEq, Constr, Context, IntervalSubst,
    P0, P1, PVar, PathDim, PathEq, Status, TermVar, apart, compose_subst, constraint_status,
    forall_x, restrict, solve,
)
from parcub.syntax import App, BApp, GelI, Star, TT, Var

from . import oracles
from .criteria import all_constraints, contexts, forall_table, restriction_table


def test_restrict_examples():
    ctx = Context([BridgeDim("x")])
    assert restrict(ctx, BVar("x"))[0].entries == ()
    ctx = Context([BridgeDim("x"), TermVar("a", None), PathDim("y")])
    out, ren = restrict(ctx, BVar("x"))
    assert out.entries == (PathDim("y"),) and ren == (2,)
    assert restrict(ctx, B0)[0] == ctx


def test_restrict_hides_dropped_names():
    ctx = Context([TermVar("a", None), BridgeDim("x"), TermVar("b", None)])
    out, _ = restrict(ctx, BVar("x"))
    assert out.lookup("a") is not None
    assert out.lookup("b") is None and "b" in out.hidden


def test_restrict_at_judgmental_endpoint_is_identity():
    ctx = Context([BridgeDim("x"), TermVar("a", None), Constr(BridgeEq(BVar("x"), 1))])
    out, ren = restrict(ctx, BVar("x"))
    assert out.entries == ctx.entries


def test_restrict_unknown_variable():
    with pytest.raises(KeyError):
        restrict(Context([PathDim("i")]), BVar("x"))


def test_restriction_table_exhaustive():
    summary = restriction_table()
    assert summary.startswith(str(sum(1 for _ in contexts(3))))


def test_forall_examples():
    assert forall_x("x", PathEq(PVar("y"), P0)) == PathEq(PVar("y"), P0)
    assert forall_x("x", BridgeEq(BVar("x"), 1)) == BridgeEq(B0, 1)
    assert forall_x("x", BridgeEq(BVar("y"), 0)) == BridgeEq(BVar("y"), 0)
    assert forall_x(BVar("x"), BridgeEq(BVar("x"), 0)) == BridgeEq(B0, 1)


def test_forall_table_exhaustive():
    forall_table()


def test_apart():
    assert apart(BVar("y"), "x")
    assert not apart(BApp(Var("p"), BVar("x")), "x")
    assert not apart(GelI(BVar("x"), TT(), TT(), Star()), BVar("x"))
    assert apart(GelI(B0, TT(), TT(), Star()), "x")
    assert apart(BridgeEq(BVar("y"), 0), "x") and not apart(BridgeEq(BVar("x"), 0), "x")


def test_status_examples():
    assert constraint_status(Context(), PathEq(P0, P0)) is Status.TRUE
    assert constraint_status(Context(), PathEq(P0, P1)) is Status.FALSE
    ctx = Context([PathDim("x"), Constr(PathEq(PVar("x"), P0))])
    assert constraint_status(ctx, PathEq(PVar("x"), P0)) is Status.TRUE
    assert constraint_status(ctx, PathEq(P1, PVar("x"))) is Status.FALSE


def test_inconsistent_context_entails_everything():
    ctx = Context([PathDim("x"), Constr(PathEq(PVar("x"), P0)), Constr(PathEq(PVar("x"), P1))])
    assert not ctx.is_consistent()
    assert constraint_status(ctx, PathEq(P0, P1)) is Status.TRUE


def test_bridge_constraints_validated():
    with pytest.raises(TypeError):
        BridgeEq(BVar("x"), 2)
    with pytest.raises(TypeError):
        BridgeEq(PVar("i"), 0)
    with pytest.raises(TypeError):
        PathEq(BVar("x"), P0)


def test_status_matches_brute_force_on_pairs():
    cs = all_constraints()
    for h1, h2 in itertools.product(cs, repeat=2):
        for c in cs:
            assert constraint_status([h1, h2], c) is oracles.status([h1, h2], c), (h1, h2, c)


_constraint = st.sampled_from(all_constraints())


@given(st.lists(_constraint, max_size=4), st.lists(_constraint, max_size=2), _constraint)
@settings(max_examples=300)
def test_status_monotone(hyps, more, c):
    before = constraint_status(hyps, c)
    after = constraint_status(hyps + more, c)
    if before is Status.TRUE:
        assert after is Status.TRUE
    if before is Status.FALSE:
        assert after in (Status.FALSE, Status.TRUE)


@given(st.lists(_constraint, max_size=4), _constraint)
@settings(max_examples=300)
def test_status_matches_brute_force(hyps, c):
    assert constraint_status(hyps, c) is oracles.status(hyps, c)


def test_solve_prefers_earliest_variable():
    sigma = solve([PathEq(PVar("b"), PVar("a"))], {"a": 0, "b": 1})
    assert sigma == {"b": PVar("a")}
    assert solve([BridgeEq(BVar("x"), 0), BridgeEq(BVar("x"), 1)]) is None


# -- substitutions -------------------------------------------------------

def test_affine_violation_rejected():
    with pytest.raises(AffineViolation):
        IntervalSubst.of({"y": BVar("x"), "z": BVar("x")})


def test_compose_examples():
    psi = IntervalSubst.of({"z": BVar("y")})
    assert compose_subst(IntervalSubst.identity(), psi) == psi
    out = compose_subst(IntervalSubst.of({"x": B0}), psi)
    assert out.apply(BVar("z")) == BVar("y")
    assert out.apply(BVar("x")) == B0


_names_p = ["i", "j", "k"]
_names_b = ["x", "y", "w"]


@st.composite
def substs(draw):
    pairs = []
    for n in _names_p:
        if draw(st.booleans()):
            pairs.append((n, draw(st.sampled_from([P0, P1] + [PVar(m) for m in _names_p]))))
    targets = list(_names_b)
    draw(st.randoms()).shuffle(targets)
    for n, t in zip(_names_b, targets):
        if draw(st.booleans()):
            pairs.append((n, draw(st.sampled_from([B0, B1, BVar(t)]))))
    return IntervalSubst.of(pairs)


_probe_dims = [PVar(n) for n in _names_p] + [BVar(n) for n in _names_b] + [P0, B1]


@given(substs(), substs(), substs())
@settings(max_examples=200)
def test_compose_associative(a, b, c):
    try:
        left = compose_subst(compose_subst(a, b), c)
        right = compose_subst(a, compose_subst(b, c))
    except AffineViolation:
        return
    for d in _probe_dims:
        assert left.apply(d) == right.apply(d)


@given(substs(), substs())
@settings(max_examples=200)
def test_compose_is_sequential(a, b):
    try:
        ab = compose_subst(a, b)
    except AffineViolation:
        return
    for d in _probe_dims:
        assert ab.apply(d) == a.apply(b.apply(d))


@given(substs())
def test_compose_unital(a):
    ident = IntervalSubst.identity()
    for d in _probe_dims:
        assert compose_subst(ident, a).apply(d) == a.apply(d)
        assert compose_subst(a, ident).apply(d) == a.apply(d)
