"""Checks behind the acceptance criteria, shared by the detailed tests and
``test_acceptance``. Each function raises AssertionError on failure and
returns a short summary of what it covered."""

from __future__ import annotations

import itertools
import random

from parcub.interval import (
    B0, B1, BConst, BVar, BridgeDim, BridgeEq, Constr, Context, P0, P1, PVar, PathDim, PathEq,
    TermVar, forall_x, restrict,
)

from . import oracles

# -- contexts of three entries ------------------------------------------------

_DIMS = [PathDim("i"), PathDim("j"), BridgeDim("x"), BridgeDim("y")]
_TERMS = [TermVar("a", None), TermVar("b", None)]


def _constraints(bound):
    paths = [PVar(e.name) for e in bound if isinstance(e, PathDim)]
    bridges = [BVar(e.name) for e in bound if isinstance(e, BridgeDim)]
    out = []
    for p in paths:
        out += [PathEq(p, P0), PathEq(p, P1)]
    for p, q in itertools.combinations(paths, 2):
        out.append(PathEq(p, q))
    for b in bridges:
        out += [BridgeEq(b, 0), BridgeEq(b, 1)]
    return [Constr(c) for c in out]


def contexts(length=3):
    """Every well-formed context with exactly ``length`` entries over a small vocabulary."""
    def go(prefix):
        if len(prefix) == length:
            yield tuple(prefix)
            return
        names = {e.name for e in prefix if not isinstance(e, Constr)}
        for e in _DIMS + _TERMS:
            if e.name not in names:
                yield from go(prefix + [e])
        for c in _constraints(prefix):
            yield from go(prefix + [c])
    yield from go([])


def restriction_table():
    n_ctx = n_cases = 0
    for entries in contexts(3):
        n_ctx += 1
        ctx = Context(entries)
        for e in entries:
            if isinstance(e, BridgeDim):
                n_cases += 1
                got, renaming = restrict(ctx, BVar(e.name))
                want = oracles.restrict(entries, e.name)
                assert got.entries == want, (entries, e.name, got.entries, want)
                assert tuple(ctx.entries[k] for k in renaming) == got.entries
                assert list(renaming) == sorted(renaming)
        for bit in (0, 1):
            got, renaming = restrict(ctx, BConst(bit))
            assert got.entries == ctx.entries and renaming == tuple(range(len(entries)))
    return f"{n_ctx} contexts, {n_cases} restrictions"


_BRIDGE_DIMS = [B0, B1, BVar("x"), BVar("y")]
_PATH_DIMS = [P0, P1, PVar("i"), PVar("j")]


def all_constraints():
    out = [PathEq(a, b) for a in _PATH_DIMS for b in _PATH_DIMS]
    out += [BridgeEq(d, bit) for d in _BRIDGE_DIMS for bit in (0, 1)]
    return out


def forall_table():
    n = 0
    for c in all_constraints():
        got = forall_x("x", c)
        assert got == oracles.forall("x", c), c
        assert forall_x("x", got) == got
        # semantically: the result holds exactly when c holds at both values of x
        for i, j, y in itertools.product((0, 1), repeat=3):
            val = {"i": i, "j": j, "y": y}
            both = all(oracles._holds(c, {**val, "x": xv}) for xv in (0, 1))
            assert oracles._holds(got, {**val, "x": 0}) == both, (c, val)
        n += 1
    return f"{n} constraints"


# -- operational semantics battery ---------------------------------------------

G = "gel x tt tt (plam _. tt)"
G0 = "gel #0 tt tt (plam _. tt)"
G1 = "gel #1 tt tt (plam _. tt)"


def _gel_hcom_expected():
    def end(g, eps, target):
        return f"hcom bool 0 {target} ({g}) [#{eps} = 0 -> j. {g} | i = 0 -> j. {g}]"
    rel = f"(z. Path bool ({end(G0, 0, 'z')}) ({end(G1, 1, 'z')}))"
    wit = f"com {rel} 0 1 (ungel (x. {G})) [#0 = 1 -> j. ungel (x. {G}) | i = 0 -> j. ungel (x. {G})]"
    return f"gel x ({end(G0, 0, 1)}) ({end(G1, 1, 1)}) ({wit})"


# (rule, free dims, redex, exact reduct, path of the contracted subterm)
OPSEM_BATTERY = [
    ("bapp-beta", "y:b", "(blam x. gel x tt ff star) @@ y", "gel y tt ff star", ()),
    ("app-beta", "y:b", "((lam (a : bool). blam x. a) tt) @@ y", "(blam x. tt) @@ y", ("fn",)),
    ("hcom-bridge", "i", "hcom (Bridge (x. bool) tt ff) 0 1 (blam x. tt) [i = 0 -> j. blam x. tt]",
     "blam x. hcom bool 0 1 ((blam x. tt) @@ x) [i = 0 -> j. (blam x. tt) @@ x | x = 0 -> _. tt | x = 1 -> _. ff]",
     ()),
    ("coe-bridge", "", "coe (i. Bridge (x. bool) tt tt) 0 1 (blam x. tt)",
     "blam x. com (i. bool) 0 1 ((blam x. tt) @@ x) [x = 0 -> i. tt | x = 1 -> i. tt]", ()),
    ("extent-endpoint", "",
     "extent #0 tt (_. bool) (_. _. bool) (a0. if (_. bool) a0 ff tt) (a1. a1) (a0. a1. aa. aa)",
     "if (_. bool) tt ff tt", ()),
    ("extent-endpoint", "",
     "extent #1 tt (_. bool) (_. _. bool) (a0. if (_. bool) a0 ff tt) (a1. a1) (a0. a1. aa. aa)",
     "tt", ()),
    ("extent-var", "x:b",
     "extent x (gel x tt ff star) (_. bool) (_. _. bool) (a0. a0) (a1. a1) (a0. a1. aa. (lam _. aa) (a0, a1))",
     "((lam _. blam x. gel x tt ff star) (gel #0 tt ff star, gel #1 tt ff star)) @@ x", ()),
    ("Gel-endpoint", "", "Gel #0 bool unit (a. b. Path bool a a)", "bool", ()),
    ("Gel-endpoint", "", "Gel #1 bool unit (a. b. Path bool a a)", "unit", ()),
    ("gel-endpoint", "", "gel #0 tt ff star", "tt", ()),
    ("gel-endpoint", "", "gel #1 tt ff star", "ff", ()),
    ("ungel-beta", "", "ungel (x. gel x tt ff star)", "star", ()),
    ("app-beta", "", "ungel (x. (lam (w : unit). gel x tt ff w) star)", "ungel (x. gel x tt ff star)",
     ("body",)),
    ("hcom-gel", "i x:b",
     f"hcom (Gel x bool bool (a. b. Path bool a b)) 0 1 ({G}) [x = 0 -> j. {G} | i = 0 -> j. {G}]",
     _gel_hcom_expected(), ()),
    ("coe-gel", "x:b", f"coe (i. Gel x bool bool (a. b. Path bool a b)) 0 1 ({G})",
     f"gel x (coe (i. bool) 0 1 ({G0})) (coe (i. bool) 0 1 ({G1})) "
     f"(coe (i. Path bool (coe (i. bool) 0 i ({G0})) (coe (i. bool) 0 i ({G1}))) 0 1 (ungel (x. {G})))",
     ()),
    ("coe-sigma", "", "coe (i. Sig (a : bool) Path bool a a) 0 1 (tt, plam _. tt)",
     "(coe (i. bool) 0 1 (fst (tt, plam _. tt)), "
     "coe (i. Path bool (coe (i. bool) 0 i (fst (tt, plam _. tt))) (coe (i. bool) 0 i (fst (tt, plam _. tt)))) "
     "0 1 (snd (tt, plam _. tt)))", ()),
]


def _scope(dims):
    out = []
    for item in dims.split():
        name, _, sort = item.partition(":")
        out.append((name, sort or "p"))
    return out


def opsem_battery():
    from parcub.frontend.elaborate import Session
    from parcub.opsem import Machine, Steps

    s = Session()
    m = Machine()
    for rule, dims, redex, reduct, path in OPSEM_BATTERY:
        scope = _scope(dims)
        res = m.step(s.term(redex, scope))
        assert isinstance(res, Steps), (rule, redex, res)
        want = s.term(reduct, scope)
        assert (res.rule, res.path) == (rule, path), (redex, res.rule, res.path)
        assert res.term == want, f"{rule}: got {s.printer(res.term)}"
    return f"{len(OPSEM_BATTERY)} rules"


# -- corpus-level checks --------------------------------------------------------


def _corpus():
    from .conftest import CORPUS, loaded

    return CORPUS, loaded


def _session(stem):
    corpus, loaded = _corpus()
    s, results = loaded(corpus / f"{stem}.ptt")
    errors = [r.error.format(stem) for r in results if r.error is not None]
    assert not errors, errors
    return s


def _cli(*argv):
    import contextlib
    import io

    from parcub.frontend.cli import main

    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


def _open_pis(s, ctx, ty):
    """Introduce the Pi-bound variables of ``ty``; return the extended context and codomain."""
    from parcub.conversion import whnf
    from parcub.syntax import Pi, Var, fresh, instantiate

    while True:
        w = whnf(ctx, ty, s.defs)
        if not isinstance(w, Pi):
            return ctx, w
        v = fresh(w.name)
        ctx = ctx.with_term(v, w.dom)
        ty = instantiate(w.cod, [Var(v)])


def _trace_rules(s, name, dims):
    from parcub.opsem import Machine
    from parcub.syntax import Def

    lines = []
    value = Machine(s.defs, trace=lines.append).eval(Def(name, dims))
    return value, {line.split(" @ ")[0] for line in lines}


def church_bool():
    from parcub.syntax import PathT

    path = str(_corpus()[0] / "church_bool.ptt")
    assert _cli("check", path)[0] == 0
    for name, want in (("roundtrip_tt", "tt"), ("roundtrip_ff", "ff"), ("roundtrip_church_tt", "tt")):
        code, out, _ = _cli("normalize", path, "--def", name)
        assert (code, out.strip()) == (0, want), (name, code, out)
    s = _session("church_bool")
    for name in ("from_to", "to_from_at", "to_from"):
        _, cod = _open_pis(s, Context(), s.defs[name].type)
        assert isinstance(cod, PathT), name
    return "checks; both round trips normalize; both inverse paths typed"


def loosen_tighten():
    from parcub.syntax import BridgeT, PathT, TT

    s = _session("loosen_tighten_bool")
    shapes = {"loosen": BridgeT, "tighten": PathT, "loosentighten": PathT}
    for name, head in shapes.items():
        _, cod = _open_pis(s, Context(), s.defs[name].type)
        assert isinstance(cod, head), name
    fired = set()
    probes = [
        ("lt_tt_square", (P0, B0)), ("lt_tt_square", (P1, B1)),
        ("loosen_tt", (B0,)), ("loosen_tt", (B1,)),
        ("tighten_refl_tt", (P0,)), ("tighten_refl_tt", (P1,)),
        ("bfe_tt", (B0,)), ("bfe_tt", (B1,)),
        ("join_corner", (P0, P1)), ("join_corner", (P1, P0)),
    ]
    for name, dims in probes:
        value, rules = _trace_rules(s, name, dims)
        assert value == TT(), (name, dims, s.printer(value))
        fired |= rules
    _, open_rules = _trace_rules(s, "bfe_tt", (BVar("x"),))
    fired |= open_rules
    needed = {"coe-bridge", "ungel-beta", "if-tt", "extent-endpoint", "extent-var", "hcom-tube", "hcom-cap"}
    assert needed <= fired, needed - fired
    return f"{len(probes)} closed instances evaluate to tt, rules {', '.join(sorted(needed))}"


def wlem():
    from parcub.syntax import BridgeT, Def, Empty, Pi

    s = _session("lem_refutation")
    _, cod = _open_pis(s, Context(), s.defs["to_bridge"].type)
    assert isinstance(cod, BridgeT)
    assert s.defs["notWLEM"].type == Pi(Def("WLEM"), Empty())
    return "to_bridge and notWLEM : WLEM -> empty check"


def bridge_funext():
    from parcub.conversion import conv, whnf
    from parcub.syntax import PathT, PVar, fresh, instantiate

    s = _session("bridge_funext")
    for name in ("bfunext", "bfunapp", "bfunext_beta"):
        assert name in s.defs, name
    ctx, cod = _open_pis(s, Context(), s.defs["bfunext_beta"].type)
    assert isinstance(cod, PathT)
    i = fresh("i")
    line = instantiate(cod.line, [PVar(i)])
    assert not line.free_names() & {i}
    # the round trip is a judgmental equality, not merely a path
    assert conv(ctx, whnf(ctx, line, s.defs), cod.lhs, cod.rhs, s.defs)
    return "bfunext, bfunapp check; bfunapp (bfunext H) = H by conversion"


def _all_defs():
    from .conftest import corpus_defs, loaded, CORPUS

    for stem, d in corpus_defs():
        yield loaded(CORPUS / f"{stem}.ptt")[0], stem, d


def _random_subst(d, rng):
    """A random interval substitution for ``d``'s parameters, injective on bridge variables."""
    bridges = ["z0", "z1", "z2", "z3"]
    rng.shuffle(bridges)
    images, paths_used, bridges_used = [], [], []
    for _, sort in d.params:
        pick = rng.randrange(3)
        if sort == "p":
            if pick < 2:
                images.append((P0, P1)[pick])
            else:
                name = rng.choice(("k0", "k1"))
                paths_used.append(name)
                images.append(PVar(name))
        elif pick < 2:
            images.append((B0, B1)[pick])
        else:
            name = bridges.pop()
            bridges_used.append(name)
            images.append(BVar(name))
    ctx = Context()
    for name in dict.fromkeys(paths_used):
        ctx = ctx.with_path(name)
    for name in bridges_used:
        ctx = ctx.with_bridge(name)
    return tuple(images), ctx


def coherence(samples=100, seed=0):
    """Evaluating then substituting agrees with substituting then evaluating."""
    from parcub.conversion import normalize
    from parcub.opsem import Machine
    from parcub.syntax import Def, subst_dims

    from .conftest import param_dims

    rng = random.Random(seed)
    n_defs = n_checks = 0
    for s, stem, d in _all_defs():
        m = Machine(s.defs)
        dims, _ = param_dims(d)
        v = m.eval(Def(d.name, dims))
        # without dimension parameters every substitution acts trivially, which is still checked
        for _ in range(samples):
            images, ctx = _random_subst(d, rng)
            psi = {p: r for (p, _), r in zip(d.params, images)}
            lhs = normalize(ctx, m.eval(Def(d.name, images)), s.defs)
            rhs = normalize(ctx, m.eval(subst_dims(v, psi)), s.defs)
            assert lhs == rhs, (stem, d.name, images, s.printer(lhs), s.printer(rhs))
            n_checks += 1
        n_defs += 1
    return f"{n_defs} definitions, {n_checks} substitutions"


def _constant_dims(d):
    for bits in itertools.product((0, 1), repeat=len(d.params)):
        yield tuple((P0, P1)[b] if sort == "p" else (B0, B1)[b] for b, (_, sort) in zip(bits, d.params))


def canonicity():
    from parcub.conversion import whnf
    from parcub.opsem import Machine, is_fhcom
    from parcub.syntax import Bool, Def, FF, HCom, TT, Z2, ZIn

    counts = {"bool": 0, "z2": 0}
    for s, stem, d in _all_defs():
        if d.type is None:
            continue
        for dims in _constant_dims(d):
            ty = whnf(Context(), d.type_at(dims), s.defs)
            if not isinstance(ty, (Bool, Z2)):
                break
            v = Machine(s.defs).eval(Def(d.name, dims))
            if isinstance(ty, Bool):
                assert v in (TT(), FF()), (d.name, dims, s.printer(v))
                counts["bool"] += 1
            else:
                ok = isinstance(v, ZIn) or (is_fhcom(v) and not v.sys)
                assert ok, (d.name, dims, s.printer(v))
                counts["z2"] += 1
    return f"{counts['bool']} closed bool terms, {counts['z2']} closed z2 terms"


def negatives():
    from .conftest import NEGATIVE, expected_code

    seen = []
    for path in NEGATIVE:
        want = expected_code(path)
        code, out, _ = _cli("check", str(path))
        assert code == 1, (path.name, code)
        assert f": {want}: " in out, (path.name, want, out)
        seen.append(want)
    return ", ".join(sorted(seen))


def _walk(s, ctx, t, ty, depth, counts, limit=300):
    """Step ``t`` to a value, re-checking each reduct, then descend into the value."""
    from parcub.conversion import ConvMachine, whnf
    from parcub.opsem import Stuck, Steps, Value
    from parcub.syntax import (
        BLam, BridgeT, BVar as _BV, Lam, PLam, Pair, PathT, Pi, PVar as _PV, Sigma, Var,
        fresh, instantiate, strip_ann,
    )

    m = ConvMachine(ctx, s.defs)
    for _ in range(limit):
        res = m.step(t)
        assert res == m.step(t), "step is not deterministic"
        assert isinstance(res, (Steps, Value)), (s.printer(t), res)
        if isinstance(res, Value):
            break
        assert not m.isval(t)
        s.checker.check(ctx, res.term, ty)
        counts["steps"] += 1
        t = res.term
    if depth == 0:
        return
    w, t = whnf(ctx, ty, s.defs), strip_ann(t)
    if isinstance(t, Lam) and isinstance(w, Pi):
        v = fresh(t.name)
        _walk(s, ctx.with_term(v, w.dom), instantiate(t.body, [Var(v)]),
              instantiate(w.cod, [Var(v)]), depth - 1, counts)
    elif isinstance(t, PLam) and isinstance(w, PathT):
        v = fresh(t.name)
        _walk(s, ctx.with_path(v), instantiate(t.body, [_PV(v)]),
              instantiate(w.line, [_PV(v)]), depth - 1, counts)
    elif isinstance(t, BLam) and isinstance(w, BridgeT):
        v = fresh(t.name)
        _walk(s, ctx.with_bridge(v), instantiate(t.body, [_BV(v)]),
              instantiate(w.line, [_BV(v)]), depth - 1, counts)
    elif isinstance(t, Pair) and isinstance(w, Sigma):
        _walk(s, ctx, t.fst, w.dom, depth - 1, counts)
        _walk(s, ctx, t.snd, instantiate(w.cod, [t.fst]), depth - 1, counts)


def subject_reduction():
    from parcub.syntax import Def

    from .conftest import param_dims

    counts = {"steps": 0, "terms": 0}
    for s, stem, d in _all_defs():
        if d.type is None:
            continue
        dims, ctx = param_dims(d)
        instances = [(ctx, dims)] + [(Context(), c) for c in _constant_dims(d) if c]
        for c, ds in instances:
            _walk(s, c, Def(d.name, ds), d.type_at(ds), 12, counts)
            counts["terms"] += 1
    return f"{counts['terms']} terms, {counts['steps']} reducts re-checked, step deterministic"
