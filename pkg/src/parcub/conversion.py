"""Definitional equality: weak-head normalisation by the stepper, plus eta.

Open terms are handled by ``ConvMachine``, which knows the context and so can
compute the boundary of a neutral path or bridge, and reduce Kan operations
at neutral types when their boundary equations apply.
"""

from __future__ import annotations

from dataclasses import fields
from typing import Iterable, Optional

from .errors import DiagonalSubstitution, FuelExhausted
from .interval import (
    B0, B1, BConst, BVar, BridgeDim, BridgeEq, Context, P0, P1, PConst, PVar, PathDim,
    PathEq, Status, TermVar, apply_constraint, apply_dim, closed_status,
)
from .opsem import DEFAULT_FUEL, Machine, StuckError
from .syntax import (
    Abort, Add, Ann, App, BApp, BLam, Bool, BridgeT, Coe, Def, Empty, Extent, FF, Fst,
    Gel, GelI, HCom, If, Int, IntLit, Lam, PApp, PLam, Pair, PathT, Pi, Sigma, Snd, TT,
    Term, Tube, U, Unit, Ungel, V, Var, Vin, Vproj, Z2, Z2Elim, ZIn, ZMod, BOOL, INT, Z2T,
    EMPTY, _copy_with, children, close, fresh, instantiate, iso_type, strip_ann, subst,
)


def apply_valuation(ctx: Context, t: Term) -> Term:
    sigma = ctx.unifier()
    if not sigma:
        return t
    live = {k: v for k, v in sigma.items() if k in t.free_names()}
    return subst(t, live) if live else t


class ConvMachine(Machine):
    def __init__(self, ctx: Context, defs: Optional[dict] = None, fuel: int = DEFAULT_FUEL):
        super().__init__(defs, fuel)
        self.ctx = ctx

    def capture_ok(self, m: Term, x: str) -> bool:
        pos_x = self.ctx.position(x)
        for v in m.free_term_vars():
            p = self.ctx.position(v)
            if p is None or (pos_x is not None and p > pos_x):
                return False
        return True

    def on_neutral_papp(self, t: PApp):
        if isinstance(t.dim, PConst):
            ty = synth(self.ctx, t.fn, self.defs)
            if ty is not None:
                ty = whnf(self.ctx, ty, self.defs)
                if isinstance(ty, PathT):
                    return (ty.rhs if t.dim.bit else ty.lhs), "papp-boundary", ()
        return None

    def on_neutral_bapp(self, t: BApp):
        if isinstance(t.dim, BConst):
            ty = synth(self.ctx, t.fn, self.defs)
            if ty is not None:
                ty = whnf(self.ctx, ty, self.defs)
                if isinstance(ty, BridgeT):
                    return (ty.rhs if t.dim.bit else ty.lhs), "bapp-boundary", ()
        return None

    def on_neutral_kan(self, t: Term, ty: Term):
        if t.r == t.s:
            return (t.tm if isinstance(t, Coe) else t.cap), "kan-cap", ()
        if isinstance(t, HCom):
            for tb in t.sys:
                if closed_status(tb.cond) is Status.TRUE:
                    return instantiate(tb.body, [t.s]), "hcom-tube", ()
        return None

    # open terms: a neutral is a head normal form, not an error
    def on_var(self, t: Term):
        return None

    def on_neutral(self, t: Term, what: str):
        return None

    def on_neutral_extent(self, t: Extent):
        return None


def whnf(ctx: Context, t: Term, defs: Optional[dict] = None, fuel: int = DEFAULT_FUEL) -> Term:
    """Weak head normal form under the context's constraint valuation."""
    t = apply_valuation(ctx, t)
    m = ConvMachine(ctx, defs, fuel)
    return m_whnf(m, t, fuel)


def m_whnf(m: Machine, t: Term, fuel: int = DEFAULT_FUEL) -> Term:
    for _ in range(fuel):
        try:
            res = m._step(t)
        except (StuckError, DiagonalSubstitution):
            return t
        if res is None:
            return t
        t = res[0]
    raise FuelExhausted(fuel)


# ---------------------------------------------------------------------------
# trusted synthesis for neutral terms


def synth(ctx: Context, t: Term, defs: Optional[dict] = None) -> Optional[Term]:
    """Type of an already-checked term when it can be read off its head; else None."""
    defs = defs or {}
    if isinstance(t, Var):
        e = ctx.lookup(t.name)
        return e.type if isinstance(e, TermVar) else None
    if isinstance(t, Def):
        d = defs.get(t.name)
        if d is None or d.type is None:
            return None
        try:
            return d.type_at(t.dims)
        except DiagonalSubstitution:
            return None
    if isinstance(t, Ann):
        return t.ty
    if isinstance(t, App):
        f = _whnf_type(ctx, synth(ctx, t.fn, defs), defs)
        return instantiate(f.cod, [t.arg]) if isinstance(f, Pi) else None
    if isinstance(t, Fst):
        p = _whnf_type(ctx, synth(ctx, t.pair, defs), defs)
        return p.dom if isinstance(p, Sigma) else None
    if isinstance(t, Snd):
        p = _whnf_type(ctx, synth(ctx, t.pair, defs), defs)
        return instantiate(p.cod, [Fst(t.pair)]) if isinstance(p, Sigma) else None
    if isinstance(t, PApp):
        p = _whnf_type(ctx, synth(ctx, t.fn, defs), defs)
        return instantiate(p.line, [t.dim]) if isinstance(p, PathT) else None
    if isinstance(t, BApp):
        p = _whnf_type(ctx, synth(ctx, t.fn, defs), defs)
        return instantiate(p.line, [t.dim]) if isinstance(p, BridgeT) else None
    if isinstance(t, Ungel):
        x = fresh(t.name)
        q = instantiate(t.body, [BVar(x)])
        g = _whnf_type(ctx.with_bridge(x), synth(ctx.with_bridge(x), q, defs), defs)
        if isinstance(g, Gel) and g.dim == BVar(x):
            return instantiate(g.rel, [subst(q, {x: B0}), subst(q, {x: B1})])
        return None
    if isinstance(t, Coe):
        return instantiate(t.line, [t.s])
    if isinstance(t, HCom):
        return t.ty
    if isinstance(t, If):
        return instantiate(t.motive, [t.scrut])
    if isinstance(t, Z2Elim):
        return instantiate(t.motive, [t.scrut])
    if isinstance(t, Abort):
        return t.ty
    if isinstance(t, Extent):
        return instantiate(t.fam, [t.dim, t.scrut])
    if isinstance(t, Vproj):
        if isinstance(t.dim, PConst) and t.dim.bit:
            return synth(ctx, t.tm, defs)
        v = _whnf_type(ctx, synth(ctx, t.tm, defs), defs)
        return v.b if isinstance(v, V) else None
    if isinstance(t, Add):
        return INT
    if isinstance(t, (IntLit,)):
        return INT
    if isinstance(t, (TT, FF)):
        return BOOL
    if isinstance(t, (ZIn, ZMod)):
        return Z2T
    return None


def _whnf_type(ctx, ty, defs):
    return None if ty is None else whnf(ctx, ty, defs)


# ---------------------------------------------------------------------------
# conversion


_BINDERS = {
    (Pi, "cod"): "t", (Sigma, "cod"): "t", (Lam, "body"): "t",
    (PathT, "line"): "p", (PLam, "body"): "p", (Coe, "line"): "p",
    (BridgeT, "line"): "b", (BLam, "body"): "b", (Ungel, "body"): "b",
    (Gel, "rel"): "tt", (Extent, "ty"): "b", (Extent, "fam"): "bt", (Extent, "n0"): "t",
    (Extent, "n1"): "t", (Extent, "nb"): "ttt", (If, "motive"): "t",
    (Z2Elim, "motive"): "t", (Z2Elim, "qin"): "t", (Z2Elim, "qmod"): "tp",
}

_DATA_FIELDS = {}


def _data_fields(cls):
    if cls not in _DATA_FIELDS:
        spec = {f for f, _, _ in cls._spec}
        _DATA_FIELDS[cls] = tuple(
            f.name for f in fields(cls)
            if f.compare and f.init and f.name not in spec and f.name != "span")
    return _DATA_FIELDS[cls]


def _mk(sort, name):
    return Var(name) if sort == "t" else PVar(name) if sort == "p" else BVar(name)


class Converter:
    """One conversion session: definitions and fuel shared across calls."""

    def __init__(self, defs: Optional[dict] = None, fuel: int = DEFAULT_FUEL):
        self.defs = defs if defs is not None else {}
        self.fuel = fuel

    def whnf(self, ctx: Context, t: Term) -> Term:
        return whnf(ctx, t, self.defs, self.fuel)

    def synth(self, ctx: Context, t: Term) -> Optional[Term]:
        return synth(ctx, t, self.defs)

    # -- entry points ------------------------------------------------------

    def conv_under(self, ctx: Context, cs: Iterable, ty: Optional[Term], m: Term, n: Term) -> bool:
        ctx2 = ctx.with_constraints(cs)
        if not ctx2.is_consistent():
            return True
        return self.conv(ctx2, ty, m, n)

    def conv_type(self, ctx: Context, a: Term, b: Term) -> bool:
        return self.conv(ctx, None, a, b)

    def conv(self, ctx: Context, ty: Optional[Term], m: Term, n: Term) -> bool:
        if m == n:
            return True
        if not ctx.is_consistent():
            return True
        if ty is not None:
            ty = strip_ann(self.whnf(ctx, ty))
            if isinstance(ty, Pi):
                a = fresh(ty.name if ty.name != "_" else "a")
                c2 = ctx.with_term(a, ty.dom)
                return self.conv(c2, instantiate(ty.cod, [Var(a)]), App(m, Var(a)), App(n, Var(a)))
            if isinstance(ty, Sigma):
                if not self.conv(ctx, ty.dom, Fst(m), Fst(n)):
                    return False
                return self.conv(ctx, instantiate(ty.cod, [Fst(m)]), Snd(m), Snd(n))
            if isinstance(ty, PathT):
                x = fresh(ty.name if ty.name != "_" else "i")
                c2 = ctx.with_path(x)
                return self.conv(c2, instantiate(ty.line, [PVar(x)]), PApp(m, PVar(x)), PApp(n, PVar(x)))
            if isinstance(ty, BridgeT):
                x = fresh(ty.name if ty.name != "_" else "x")
                c2 = ctx.with_bridge(x)
                return self.conv(c2, instantiate(ty.line, [BVar(x)]), BApp(m, BVar(x)), BApp(n, BVar(x)))
            if isinstance(ty, Unit):
                return True
            if isinstance(ty, Gel) and isinstance(ty.dim, BVar):
                res = self._conv_gel(ctx, ty, m, n)
                if res is not None:
                    return res
        wm = strip_ann(self.whnf(ctx, m))
        wn = strip_ann(self.whnf(ctx, n))
        return self._conv_whnf(ctx, ty, wm, wn)

    # -- Gel eta -----------------------------------------------------------

    def _gel_parts(self, ctx, x, t):
        if isinstance(t, GelI) and t.dim == BVar(x):
            return t.m0, t.m1, t.wit
        m = ConvMachine(ctx, self.defs, self.fuel)
        if m.capture_ok(t, x):
            return subst(t, {x: B0}), subst(t, {x: B1}), Ungel(close(t, [x]), x.split("#")[0])
        return None

    def _conv_gel(self, ctx, ty: Gel, m, n):
        wm = strip_ann(self.whnf(ctx, m))
        wn = strip_ann(self.whnf(ctx, n))
        if not (isinstance(wm, GelI) or isinstance(wn, GelI)):
            return None
        x = ty.dim.name
        pm, pn = self._gel_parts(ctx, x, wm), self._gel_parts(ctx, x, wn)
        if pm is None or pn is None:
            return None
        # the components live apart from x, so comparing them in ctx is sound
        if not self.conv(ctx, ty.a0, pm[0], pn[0]):
            return False
        if not self.conv(ctx, ty.a1, pm[1], pn[1]):
            return False
        return self.conv(ctx, instantiate(ty.rel, [pm[0], pm[1]]), pm[2], pn[2])

    # -- structural comparison of head normal forms ------------------------

    def _conv_whnf(self, ctx, ty, a: Term, b: Term) -> bool:
        if a == b:
            return True
        if type(a) is not type(b):
            return self._eta_untyped(ctx, a, b) or self._eta_untyped(ctx, b, a)
        cls = type(a)
        sigma = ctx.unifier() or {}
        for f in _data_fields(cls):
            if getattr(a, f) != getattr(b, f):
                return False
        for f, kind, nb in cls._spec:
            va, vb = getattr(a, f), getattr(b, f)
            if kind in "pb":
                if apply_dim(sigma, va) != apply_dim(sigma, vb):
                    return False
            elif kind == "d":
                if len(va) != len(vb) or any(apply_dim(sigma, x) != apply_dim(sigma, y) for x, y in zip(va, vb)):
                    return False
            elif kind == "o":
                if va is None or vb is None:
                    continue
                if not self.conv(ctx, None, va, vb):
                    return False
            elif kind == "t":
                c2, ca, cb, cty = self._open_child(ctx, ty, a, f, va, vb)
                if not self.conv(c2, cty, ca, cb):
                    return False
            else:
                if not self._conv_sys(ctx, a, va, vb):
                    return False
        return True

    def _conv_sys(self, ctx, a: HCom, sa, sb) -> bool:
        if len(sa) != len(sb):
            return False
        for ta, tb in zip(sa, sb):
            sigma = ctx.unifier() or {}
            if apply_constraint(sigma, ta.cond) != apply_constraint(sigma, tb.cond):
                return False
            y = fresh(ta.name)
            c2 = ctx.with_constraints([ta.cond]).with_path(y)
            if not c2.is_consistent():
                continue
            if not self.conv(c2, a.ty, instantiate(ta.body, [PVar(y)]), instantiate(tb.body, [PVar(y)])):
                return False
        return True

    def _eta_untyped(self, ctx, a: Term, b: Term) -> bool:
        if isinstance(a, Lam):
            v = fresh(a.name)
            c2 = ctx.with_term(v, a.dom)
            return self.conv(c2, None, instantiate(a.body, [Var(v)]), App(b, Var(v)))
        if isinstance(a, PLam):
            v = fresh(a.name)
            return self.conv(ctx.with_path(v), None, instantiate(a.body, [PVar(v)]), PApp(b, PVar(v)))
        if isinstance(a, BLam):
            v = fresh(a.name)
            return self.conv(ctx.with_bridge(v), None, instantiate(a.body, [BVar(v)]), BApp(b, BVar(v)))
        if isinstance(a, Pair):
            return self.conv(ctx, None, a.fst, Fst(b)) and self.conv(ctx, None, a.snd, Snd(b))
        return False

    def _open_child(self, ctx, ty, a, f, va, vb):
        """Open the binders of child ``f`` of ``a`` (and its partner); return its type if known."""
        sorts = _BINDERS.get((type(a), f), "")
        names = [fresh("v") for _ in sorts]
        vals = [_mk(s, n) for s, n in zip(sorts, names)]
        c2 = ctx
        if sorts:
            for s, n, tyn in zip(sorts, names, self._binder_types(ctx, ty, a, f, vals)):
                if s == "t":
                    c2 = c2.with_term(n, tyn)
                elif s == "p":
                    c2 = c2.with_path(n)
                else:
                    c2 = c2.with_bridge(n)
            va, vb = instantiate(va, vals), instantiate(vb, vals)
        return c2, va, vb, self._child_type(ctx, ty, a, f, vals)

    def _binder_types(self, ctx, ty, a, f, vals):
        cls = type(a)
        if cls in (Pi, Sigma):
            return [a.dom]
        if cls is Lam:
            if a.dom is not None:
                return [a.dom]
            return [ty.dom] if isinstance(ty, Pi) else [None]
        if cls is Gel:
            return [a.a0, a.a1]
        if cls is Extent:
            a_at = lambda d: instantiate(a.ty, [d])
            if f == "fam":
                return [None, a_at(vals[0])]
            if f == "n0":
                return [a_at(B0)]
            if f == "n1":
                return [a_at(B1)]
            if f == "nb":
                return [a_at(B0), a_at(B1), BridgeT(a.ty, vals[0], vals[1], a.names[0])]
            return [None]
        if cls is If:
            return [BOOL]
        if cls is Z2Elim:
            if f == "motive":
                return [Z2T]
            return [INT, None]
        return [None] * len(_BINDERS.get((cls, f), ""))

    def _child_type(self, ctx, ty, a, f, vals):
        cls = type(a)
        if cls is App and f == "arg":
            fty = self.synth(ctx, a.fn)
            if fty is not None:
                fty = strip_ann(self.whnf(ctx, fty))
                if isinstance(fty, Pi):
                    return fty.dom
            return None
        if cls is If:
            if f == "scrut":
                return BOOL
            if f == "tcase":
                return instantiate(a.motive, [TT()])
            if f == "fcase":
                return instantiate(a.motive, [FF()])
            return None
        if cls is Z2Elim:
            if f == "scrut":
                return Z2T
            if f == "qin":
                return instantiate(a.motive, [ZIn(vals[0])])
            if f == "qmod":
                return instantiate(a.motive, [ZMod(vals[0], vals[1])])
            return None
        if cls is HCom and f == "cap":
            return a.ty
        if cls is Coe and f == "tm":
            return instantiate(a.line, [a.r])
        if cls is Extent:
            if f == "scrut":
                return instantiate(a.ty, [a.dim])
            if f == "n0":
                return instantiate(a.fam, [B0, vals[0]])
            if f == "n1":
                return instantiate(a.fam, [B1, vals[0]])
            if f == "nb":
                return BridgeT(_extent_nb_line(a, vals), vals[0], vals[1], a.names[1])
            return None
        if cls in (ZIn, ZMod, Add):
            return INT
        if cls is Abort and f == "tm":
            return EMPTY
        if cls is Vproj and f == "iso":
            return None
        if cls is Pair and isinstance(ty, Sigma):
            return ty.dom if f == "fst" else instantiate(ty.cod, [a.fst])
        return None


def _extent_nb_line(a: Extent, vals):
    x = fresh("x")
    body = instantiate(a.fam, [BVar(x), BApp(vals[2], BVar(x))])
    return close(body, [x])


# convenience wrappers

def conv(ctx: Context, ty: Optional[Term], m: Term, n: Term, defs: Optional[dict] = None) -> bool:
    return Converter(defs).conv(ctx, ty, m, n)


def conv_under(ctx: Context, cs, ty, m, n, defs: Optional[dict] = None) -> bool:
    return Converter(defs).conv_under(ctx, cs, ty, m, n)


# ---------------------------------------------------------------------------
# normal forms


def normalize(ctx: Context, t: Term, defs: Optional[dict] = None, fuel: int = DEFAULT_FUEL) -> Term:
    """Iterate weak head normalisation under binders; annotations are dropped."""
    return _Normalizer(Converter(defs, fuel)).run(ctx, t)


class _Normalizer:
    def __init__(self, conv: Converter):
        self.conv = conv

    def run(self, ctx: Context, t: Term) -> Term:
        w = strip_ann(self.conv.whnf(ctx, t))
        sigma = ctx.unifier() or {}
        changes = {}
        for f, kind, nb in type(w)._spec:
            v = getattr(w, f)
            if kind == "o":
                changes[f] = None
            elif kind in "pb":
                changes[f] = apply_dim(sigma, v)
            elif kind == "d":
                changes[f] = tuple(apply_dim(sigma, d) for d in v)
            elif kind == "t":
                changes[f] = self._child(ctx, w, f, v)
            else:
                changes[f] = tuple(self._tube(ctx, tb) for tb in v)
        return _copy_with(w, changes) if changes else w

    def _child(self, ctx, w, f, v):
        sorts = _BINDERS.get((type(w), f), "")
        if not sorts:
            return self.run(ctx, v)
        c2, opened, _, _ = self.conv._open_child(ctx, None, w, f, v, v)
        names = list(c2.entries[len(ctx.entries):])
        return close(self.run(c2, opened), [e.name for e in names])

    def _tube(self, ctx, tb: Tube) -> Tube:
        sigma = ctx.unifier() or {}
        cond = apply_constraint(sigma, tb.cond)
        y = fresh(tb.name)
        c2 = ctx.with_constraints([cond]).with_path(y)
        if not c2.is_consistent():
            return Tube(cond, tb.body, tb.name)
        body = self.run(c2, instantiate(tb.body, [PVar(y)]))
        return Tube(cond, close(body, [y]), tb.name)
