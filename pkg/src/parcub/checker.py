"""Elaborating bidirectional type checker.

``check`` and ``infer`` return an elaborated copy of their input in which
every lambda carries its domain and the introduction forms ``pair``, ``gel``
and ``Vin`` are annotated with their type. Elaborated terms are therefore
inferable, which keeps reducts checkable after evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .conversion import Converter, apply_valuation
from .errors import Code, Diagnostic, DiagonalSubstitution
from .interval import (
    B0, B1, BConst, BIdx, BVar, BridgeDim, BridgeEq, Context, P0, P1, PConst, PIdx, PVar,
    PathDim, PathEq, TermVar, restrict,
)
from .opsem import DEFAULT_FUEL, Definition
from .syntax import (
    BASE_TYPES, INT, UNIV, Z2T, BOOL, EMPTY, UNIT, Abort, Add, Ann, App, BApp, BLam, Bool,
    BridgeT, Coe, Def, Empty, Extent, FF, Fst, Gel, GelI, HCom, Idx, If, Int, IntLit, Lam,
    PApp, PLam, Pair, PathT, Pi, Sigma, Snd, Star, TT, Term, Tube, U, Unit, Ungel, V, Var,
    Vin, Vproj, Z2, Z2Elim, ZIn, ZMod, close, fresh, instantiate, iso_type, strip_ann, subst,
)


def _err(code: Code, msg: str) -> Diagnostic:
    return Diagnostic(code, msg)


class Checker:
    def __init__(self, defs: Optional[dict] = None, fuel: int = DEFAULT_FUEL, printer=None):
        self.defs = defs if defs is not None else {}
        self.conv = Converter(self.defs, fuel)
        self.show = printer or (lambda t: type(t).__name__)

    # -- helpers -----------------------------------------------------------

    def whnf(self, ctx: Context, t: Term) -> Term:
        return strip_ann(self.conv.whnf(ctx, t))

    def _expect_conv(self, ctx, ty, a, b, code: Code, what: str):
        if not self.conv.conv(ctx, ty, a, b):
            raise _err(code, f"{what}: {self.show(a)} is not equal to {self.show(b)}")

    def _expect_type_eq(self, ctx, inferred, expected, what="type mismatch"):
        if not self.conv.conv_type(ctx, inferred, expected):
            raise _err(Code.TypeMismatch,
                       f"{what}: expected {self.show(expected)}, got {self.show(inferred)}")

    def check_dim(self, ctx: Context, r, sort: str):
        if isinstance(r, (PConst, BConst)):
            ok = isinstance(r, PConst) if sort == "p" else isinstance(r, BConst)
            if not ok:
                raise _err(Code.TypeMismatch, f"expected a {_sort_name(sort)} endpoint")
            return
        if isinstance(r, (PIdx, BIdx)):
            raise _err(Code.UnboundVariable, "unexpected bound dimension index")
        name = r.name
        e = ctx.lookup(name)
        if e is None:
            if name in ctx.hidden:
                raise _err(Code.NotApart, f"{_show_name(name)} is not available here: the context was restricted to what is apart from a bridge dimension")
            raise _err(Code.UnboundVariable, f"unbound dimension {_show_name(name)}")
        want = PathDim if sort == "p" else BridgeDim
        if not isinstance(e, want) or (sort == "p") != isinstance(r, PVar):
            raise _err(Code.TypeMismatch, f"{_show_name(name)} is not a {_sort_name(sort)} dimension")

    def check_constraint(self, ctx: Context, c):
        if isinstance(c, PathEq):
            self.check_dim(ctx, c.lhs, "p")
            self.check_dim(ctx, c.rhs, "p")
        else:
            self.check_dim(ctx, c.lhs, "b")

    def _restrict(self, ctx: Context, r) -> Context:
        if isinstance(r, BConst):
            return ctx
        self.check_dim(ctx, r, "b")
        return restrict(ctx, r)[0]

    # -- definitions -------------------------------------------------------

    def check_definition(self, name: str, params, ty: Optional[Term], body: Term) -> Definition:
        if name in self.defs:
            raise _err(Code.DuplicateDefinition, f"{name} is already defined")
        ctx = Context()
        seen = set()
        for p, sort in params:
            if p in seen:
                raise _err(Code.DuplicateDefinition, f"dimension parameter {p} bound twice")
            seen.add(p)
            ctx = ctx.with_path(p) if sort == "p" else ctx.with_bridge(p)
        if ty is None:
            # an untyped definition is either inferable or a (possibly large) type
            try:
                body2, ty2 = self.infer(ctx, body)
            except Diagnostic as first:
                try:
                    body2, ty2 = self.check_type(ctx, body), None
                except Diagnostic:
                    raise first from None
            d = Definition(name, tuple(params), ty2, body2)
        else:
            ty2 = self.check_type(ctx, ty)
            body2 = self.check(ctx, body, ty2)
            d = Definition(name, tuple(params), ty2, body2)
        self.defs[name] = d
        return d

    # -- types -------------------------------------------------------------

    def check_type(self, ctx: Context, t: Term) -> Term:
        try:
            return self._check_type(ctx, t)
        except Diagnostic as e:
            raise e.with_span(t.span)

    def _check_type(self, ctx, t):
        if isinstance(t, U) or isinstance(t, BASE_TYPES):
            return t
        if isinstance(t, (Pi, Sigma)):
            dom = self.check_type(ctx, t.dom)
            x = fresh(t.name)
            cod = self.check_type(ctx.with_term(x, dom), instantiate(t.cod, [Var(x)]))
            return type(t)(dom, close(cod, [x]), t.name, span=t.span)
        if isinstance(t, (PathT, BridgeT)):
            x = fresh(t.name)
            is_path = isinstance(t, PathT)
            c2 = ctx.with_path(x) if is_path else ctx.with_bridge(x)
            mk = PVar if is_path else BVar
            line = self.check_type(c2, instantiate(t.line, [mk(x)]))
            lb = close(line, [x])
            e0, e1 = (P0, P1) if is_path else (B0, B1)
            lhs = self.check(ctx, t.lhs, instantiate(lb, [e0]))
            rhs = self.check(ctx, t.rhs, instantiate(lb, [e1]))
            return type(t)(lb, lhs, rhs, t.name, span=t.span)
        if isinstance(t, Gel):
            c = self._restrict(ctx, t.dim)
            a0 = self.check_type(c, t.a0)
            a1 = self.check_type(c, t.a1)
            x0, x1 = fresh(t.names[0]), fresh(t.names[1])
            rel = self.check_type(c.with_term(x0, a0).with_term(x1, a1),
                                  instantiate(t.rel, [Var(x0), Var(x1)]))
            return Gel(t.dim, a0, a1, close(rel, [x0, x1]), t.names, span=t.span)
        if isinstance(t, V):
            self.check_dim(ctx, t.dim, "p")
            c0 = ctx.with_constraints([PathEq(t.dim, P0)])
            a = self._under(c0, lambda: self.check_type(c0, t.a), t.a)
            b = self.check_type(ctx, t.b)
            iso = self._under(c0, lambda: self.check(c0, t.iso, iso_type(a, b)), t.iso)
            return V(t.dim, a, b, iso, span=t.span)
        if isinstance(t, Def):
            d = self._lookup_def(t)
            self._check_def_dims(ctx, d, t)
            if d.type is None or isinstance(strip_ann(d.type), U):
                return t
        tm = self.check(ctx, t, UNIV)
        return tm

    def _under(self, ctx, fn, default):
        """Run ``fn`` unless ``ctx`` has inconsistent constraints."""
        if not ctx.is_consistent():
            return default
        return fn()

    # -- checking ----------------------------------------------------------

    def check(self, ctx: Context, t: Term, ty: Term) -> Term:
        try:
            return self._check(ctx, t, ty)
        except DiagonalSubstitution as e:
            raise e.with_span(t.span)
        except Diagnostic as e:
            raise e.with_span(t.span)

    def _check(self, ctx, t, ty):
        if not ctx.is_consistent():
            return t
        w = self.whnf(ctx, ty)
        if isinstance(t, Lam):
            if not isinstance(w, Pi):
                raise _err(Code.TypeMismatch, f"a function was given where {self.show(ty)} was expected")
            if t.dom is not None:
                dom = self.check_type(ctx, t.dom)
                self._expect_type_eq(ctx, w.dom, dom, "lambda domain")
            x = fresh(t.name)
            body = self.check(ctx.with_term(x, w.dom), instantiate(t.body, [Var(x)]),
                              instantiate(w.cod, [Var(x)]))
            return Lam(close(body, [x]), t.name, w.dom, span=t.span)
        if isinstance(t, Pair):
            if not isinstance(w, Sigma):
                raise _err(Code.TypeMismatch, f"a pair was given where {self.show(ty)} was expected")
            a = self.check(ctx, t.fst, w.dom)
            b = self.check(ctx, t.snd, instantiate(w.cod, [a]))
            return Ann(Pair(a, b, span=t.span), w, span=t.span)
        if isinstance(t, PLam):
            if not isinstance(w, PathT):
                raise _err(Code.TypeMismatch, f"a path abstraction was given where {self.show(ty)} was expected")
            x = fresh(t.name)
            body = self.check(ctx.with_path(x), instantiate(t.body, [PVar(x)]),
                              instantiate(w.line, [PVar(x)]))
            b = close(body, [x])
            self._boundary(ctx, instantiate(w.line, [P0]), instantiate(b, [P0]), w.lhs, "path", 0)
            self._boundary(ctx, instantiate(w.line, [P1]), instantiate(b, [P1]), w.rhs, "path", 1)
            return PLam(b, t.name, span=t.span)
        if isinstance(t, BLam):
            if not isinstance(w, BridgeT):
                raise _err(Code.TypeMismatch, f"a bridge abstraction was given where {self.show(ty)} was expected")
            x = fresh(t.name)
            body = self.check(ctx.with_bridge(x), instantiate(t.body, [BVar(x)]),
                              instantiate(w.line, [BVar(x)]))
            b = close(body, [x])
            self._boundary(ctx, instantiate(w.line, [B0]), instantiate(b, [B0]), w.lhs, "bridge", 0)
            self._boundary(ctx, instantiate(w.line, [B1]), instantiate(b, [B1]), w.rhs, "bridge", 1)
            return BLam(b, t.name, span=t.span)
        if isinstance(t, GelI):
            return self._check_gel(ctx, t, ty, w)
        if isinstance(t, Vin):
            return self._check_vin(ctx, t, ty, w)
        if isinstance(t, U):
            raise _err(Code.TypeMismatch, "U is not an element of any type")
        tm, inferred = self.infer(ctx, t)
        self._expect_type_eq(ctx, inferred, ty)
        return tm

    def _boundary(self, ctx, ty, got, want, kind, eps):
        if not self.conv.conv(ctx, ty, got, want):
            raise _err(Code.BoundaryMismatch,
                       f"{kind} endpoint {eps} is {self.show(got)}, but the type demands {self.show(want)}")

    def _check_gel(self, ctx, t: GelI, ty, w):
        raw = strip_ann(ty)
        if isinstance(t.dim, BConst):
            if isinstance(raw, Gel) and raw.dim == t.dim:
                g = raw
            else:
                tm, inferred = self._infer_gel(ctx, t)
                self._expect_type_eq(ctx, inferred, ty)
                return tm
        else:
            if not (isinstance(w, Gel) and w.dim == t.dim):
                raise _err(Code.TypeMismatch, f"gel at {t.dim} was given where {self.show(ty)} was expected")
            g = w
        c = self._restrict(ctx, t.dim)
        m0 = self.check(c, t.m0, g.a0)
        m1 = self.check(c, t.m1, g.a1)
        wit = self.check(c, t.wit, instantiate(g.rel, [m0, m1]))
        return Ann(GelI(t.dim, m0, m1, wit, span=t.span), ty, span=t.span)

    def _check_vin(self, ctx, t: Vin, ty, w):
        self.check_dim(ctx, t.dim, "p")
        raw = strip_ann(ty)
        if isinstance(t.dim, PVar):
            if not (isinstance(w, V) and w.dim == t.dim):
                raise _err(Code.TypeMismatch, f"Vin was given where {self.show(ty)} was expected")
            v = w
        elif isinstance(raw, V) and raw.dim == t.dim:
            v = raw
        else:
            raise _err(Code.CannotInfer, "Vin at an endpoint needs a V type annotation")
        c0 = ctx.with_constraints([PathEq(t.dim, P0)])
        m = self._under(c0, lambda: self.check(c0, t.m, v.a), t.m)
        n = self.check(ctx, t.n, v.b)
        if c0.is_consistent():
            lhs = App(Fst(v.iso), m)
            if not self.conv.conv(c0, v.b, lhs, n):
                raise _err(Code.BoundaryMismatch, "Vin: the isomorphism does not send M to N at 0")
        return Ann(Vin(t.dim, m, n, span=t.span), ty, span=t.span)

    # -- inference ---------------------------------------------------------

    def infer(self, ctx: Context, t: Term):
        try:
            return self._infer(ctx, t)
        except Diagnostic as e:
            raise e.with_span(t.span)

    def _lookup_def(self, t: Def) -> Definition:
        d = self.defs.get(t.name)
        if d is None:
            raise _err(Code.UnboundVariable, f"unknown definition {t.name}")
        return d

    def _check_def_dims(self, ctx, d: Definition, t: Def):
        if len(t.dims) != len(d.params):
            raise _err(Code.TypeMismatch,
                       f"{t.name} expects {len(d.params)} dimension arguments, got {len(t.dims)}")
        seen = set()
        for (p, sort), r in zip(d.params, t.dims):
            self.check_dim(ctx, r, sort)
            if isinstance(r, BVar):
                if r.name in seen:
                    raise DiagonalSubstitution(f"bridge variable {_show_name(r.name)} passed twice to {t.name}")
                seen.add(r.name)

    def _infer(self, ctx, t):
        if isinstance(t, Var):
            e = ctx.lookup(t.name)
            if e is None:
                if t.name in ctx.hidden:
                    raise _err(Code.NotApart,
                               f"{_show_name(t.name)} is not available here: the context was restricted to what is apart from a bridge dimension")
                raise _err(Code.UnboundVariable, f"unbound variable {_show_name(t.name)}")
            if not isinstance(e, TermVar):
                raise _err(Code.TypeMismatch, f"{_show_name(t.name)} is a dimension, not a term")
            return t, e.type
        if isinstance(t, Def):
            d = self._lookup_def(t)
            self._check_def_dims(ctx, d, t)
            if d.type is None:
                raise _err(Code.TypeMismatch, f"{t.name} is a large type, not an element of one")
            return t, d.type_at(t.dims)
        if isinstance(t, Ann):
            ty = self.check_type(ctx, t.ty)
            return Ann(self.check(ctx, t.tm, ty), ty, span=t.span), ty
        if isinstance(t, U):
            raise _err(Code.TypeMismatch, "U is not an element of any type")
        if isinstance(t, BASE_TYPES):
            return t, UNIV
        if isinstance(t, (Pi, Sigma)):
            dom = self.check(ctx, t.dom, UNIV)
            x = fresh(t.name)
            cod = self.check(ctx.with_term(x, dom), instantiate(t.cod, [Var(x)]), UNIV)
            return type(t)(dom, close(cod, [x]), t.name, span=t.span), UNIV
        if isinstance(t, (PathT, BridgeT)):
            x = fresh(t.name)
            is_path = isinstance(t, PathT)
            c2 = ctx.with_path(x) if is_path else ctx.with_bridge(x)
            line = self.check(c2, instantiate(t.line, [(PVar if is_path else BVar)(x)]), UNIV)
            lb = close(line, [x])
            e0, e1 = (P0, P1) if is_path else (B0, B1)
            lhs = self.check(ctx, t.lhs, instantiate(lb, [e0]))
            rhs = self.check(ctx, t.rhs, instantiate(lb, [e1]))
            return type(t)(lb, lhs, rhs, t.name, span=t.span), UNIV
        if isinstance(t, Gel):
            c = self._restrict(ctx, t.dim)
            a0 = self.check(c, t.a0, UNIV)
            a1 = self.check(c, t.a1, UNIV)
            x0, x1 = fresh(t.names[0]), fresh(t.names[1])
            rel = self.check(c.with_term(x0, a0).with_term(x1, a1),
                             instantiate(t.rel, [Var(x0), Var(x1)]), UNIV)
            return Gel(t.dim, a0, a1, close(rel, [x0, x1]), t.names, span=t.span), UNIV
        if isinstance(t, V):
            self.check_dim(ctx, t.dim, "p")
            c0 = ctx.with_constraints([PathEq(t.dim, P0)])
            a = self._under(c0, lambda: self.check(c0, t.a, UNIV), t.a)
            b = self.check(ctx, t.b, UNIV)
            iso = self._under(c0, lambda: self.check(c0, t.iso, iso_type(a, b)), t.iso)
            return V(t.dim, a, b, iso, span=t.span), UNIV
        if isinstance(t, Lam):
            if t.dom is None:
                raise _err(Code.CannotInfer, "cannot infer the type of an unannotated lambda")
            dom = self.check_type(ctx, t.dom)
            x = fresh(t.name)
            body, cod = self.infer(ctx.with_term(x, dom), instantiate(t.body, [Var(x)]))
            return Lam(close(body, [x]), t.name, dom, span=t.span), Pi(dom, close(cod, [x]), t.name)
        if isinstance(t, App):
            f, fty = self.infer(ctx, t.fn)
            w = self.whnf(ctx, fty)
            if not isinstance(w, Pi):
                raise _err(Code.TypeMismatch, f"{self.show(t.fn)} is applied but has type {self.show(fty)}")
            a = self.check(ctx, t.arg, w.dom)
            return App(f, a, span=t.span), instantiate(w.cod, [a])
        if isinstance(t, Pair):
            a, aty = self.infer(ctx, t.fst)
            b, bty = self.infer(ctx, t.snd)
            ty = Sigma(aty, bty, "_")
            return Ann(Pair(a, b, span=t.span), ty, span=t.span), ty
        if isinstance(t, (Fst, Snd)):
            p, pty = self.infer(ctx, t.pair)
            w = self.whnf(ctx, pty)
            if not isinstance(w, Sigma):
                raise _err(Code.TypeMismatch, f"projection from {self.show(t.pair)} of type {self.show(pty)}")
            if isinstance(t, Fst):
                return Fst(p, span=t.span), w.dom
            return Snd(p, span=t.span), instantiate(w.cod, [Fst(p)])
        if isinstance(t, (PLam, BLam)):
            is_path = isinstance(t, PLam)
            x = fresh(t.name)
            c2 = ctx.with_path(x) if is_path else ctx.with_bridge(x)
            mk = PVar if is_path else BVar
            body, ty = self.infer(c2, instantiate(t.body, [mk(x)]))
            b, line = close(body, [x]), close(ty, [x])
            e0, e1 = (P0, P1) if is_path else (B0, B1)
            out = (PathT if is_path else BridgeT)(line, instantiate(b, [e0]), instantiate(b, [e1]), t.name)
            return type(t)(b, t.name, span=t.span), out
        if isinstance(t, PApp):
            self.check_dim(ctx, t.dim, "p")
            p, pty = self.infer(ctx, t.fn)
            w = self.whnf(ctx, pty)
            if not isinstance(w, PathT):
                raise _err(Code.TypeMismatch, f"{self.show(t.fn)} is applied to a dimension but has type {self.show(pty)}")
            return PApp(p, t.dim, span=t.span), instantiate(w.line, [t.dim])
        if isinstance(t, BApp):
            c = self._restrict(ctx, t.dim)
            p, pty = self.infer(c, t.fn)
            w = self.whnf(c, pty)
            if not isinstance(w, BridgeT):
                raise _err(Code.TypeMismatch, f"{self.show(t.fn)} is applied to a bridge dimension but has type {self.show(pty)}")
            return BApp(p, t.dim, span=t.span), instantiate(w.line, [t.dim])
        if isinstance(t, GelI):
            return self._infer_gel(ctx, t)
        if isinstance(t, Ungel):
            x = fresh(t.name)
            c2 = ctx.with_bridge(x)
            q, qty = self.infer(c2, instantiate(t.body, [BVar(x)]))
            w = self.whnf(c2, qty)
            if not (isinstance(w, Gel) and w.dim == BVar(x)):
                raise _err(Code.TypeMismatch, f"ungel expects a Gel type at its own variable, got {self.show(qty)}")
            q0, q1 = subst(q, {x: B0}), subst(q, {x: B1})
            return Ungel(close(q, [x]), t.name, span=t.span), instantiate(w.rel, [q0, q1])
        if isinstance(t, Extent):
            return self._infer_extent(ctx, t)
        if isinstance(t, Coe):
            return self._infer_coe(ctx, t)
        if isinstance(t, HCom):
            return self._infer_hcom(ctx, t)
        if isinstance(t, Vin):
            raise _err(Code.CannotInfer, "cannot infer the type of Vin; annotate it")
        if isinstance(t, Vproj):
            return self._infer_vproj(ctx, t)
        if isinstance(t, (TT, FF)):
            return t, BOOL
        if isinstance(t, If):
            x = fresh(t.name)
            motive = self.check_type(ctx.with_term(x, BOOL), instantiate(t.motive, [Var(x)]))
            mb = close(motive, [x])
            scrut = self.check(ctx, t.scrut, BOOL)
            tc = self.check(ctx, t.tcase, instantiate(mb, [TT()]))
            fc = self.check(ctx, t.fcase, instantiate(mb, [FF()]))
            return If(mb, scrut, tc, fc, t.name, span=t.span), instantiate(mb, [scrut])
        if isinstance(t, IntLit):
            return t, INT
        if isinstance(t, Add):
            return Add(self.check(ctx, t.lhs, INT), self.check(ctx, t.rhs, INT), span=t.span), INT
        if isinstance(t, ZIn):
            return ZIn(self.check(ctx, t.n, INT), span=t.span), Z2T
        if isinstance(t, ZMod):
            self.check_dim(ctx, t.dim, "p")
            return ZMod(self.check(ctx, t.n, INT), t.dim, span=t.span), Z2T
        if isinstance(t, Z2Elim):
            return self._infer_z2elim(ctx, t)
        if isinstance(t, Star):
            return t, UNIT
        if isinstance(t, Abort):
            ty = self.check_type(ctx, t.ty)
            return Abort(ty, self.check(ctx, t.tm, EMPTY), span=t.span), ty
        if isinstance(t, Idx):
            raise _err(Code.UnboundVariable, "unexpected bound index")
        raise _err(Code.CannotInfer, f"cannot infer a type for {self.show(t)}")

    def _infer_gel(self, ctx, t: GelI):
        c = self._restrict(ctx, t.dim)
        m0, a0 = self.infer(c, t.m0)
        m1, a1 = self.infer(c, t.m1)
        wit, rty = self.infer(c, t.wit)
        g = Gel(t.dim, a0, a1, rty, ("_", "_"))
        return Ann(GelI(t.dim, m0, m1, wit, span=t.span), g, span=t.span), g

    def _infer_extent(self, ctx, t: Extent):
        r = t.dim
        c = self._restrict(ctx, r)
        hx, hxb, hab, ha0, ha1, hc0, hc1, hcc = t.names
        # premise 1: the type line
        x = fresh(hx)
        a_ty = close(self.check_type(c.with_bridge(x), instantiate(t.ty, [BVar(x)])), [x])
        # premise 2: the family
        xb, ab = fresh(hxb), fresh(hab)
        c_fam = c.with_bridge(xb).with_term(ab, instantiate(a_ty, [BVar(xb)]))
        fam = close(self.check_type(c_fam, instantiate(t.fam, [BVar(xb), Var(ab)])), [xb, ab])
        # premise 3: the principal argument
        m = self.check(ctx, t.scrut, instantiate(a_ty, [r]))
        # premises 4 and 5: endpoint clauses
        a0 = fresh(ha0)
        n0 = close(self.check(c.with_term(a0, instantiate(a_ty, [B0])), instantiate(t.n0, [Var(a0)]),
                              instantiate(fam, [B0, Var(a0)])), [a0])
        a1 = fresh(ha1)
        n1 = close(self.check(c.with_term(a1, instantiate(a_ty, [B1])), instantiate(t.n1, [Var(a1)]),
                              instantiate(fam, [B1, Var(a1)])), [a1])
        # premise 6: the bridge clause, against a bridge between the endpoint clauses
        c0, c1, cc = fresh(hc0), fresh(hc1), fresh(hcc)
        V0, V1, VC = Var(c0), Var(c1), Var(cc)
        c_nb = (c.with_term(c0, instantiate(a_ty, [B0]))
                .with_term(c1, instantiate(a_ty, [B1]))
                .with_term(cc, BridgeT(a_ty, V0, V1, hx)))
        y = fresh("x")
        line = close(instantiate(fam, [BVar(y), BApp(VC, BVar(y))]), [y])
        want = BridgeT(line, instantiate(n0, [V0]), instantiate(n1, [V1]), hx)
        nb_open = instantiate(t.nb, [V0, V1, VC])
        nb = self._check_extent_bridge(c_nb, nb_open, want)
        nb = close(nb, [c0, c1, cc])
        out = Extent(r, m, a_ty, fam, n0, n1, nb, t.names, span=t.span)
        return out, instantiate(fam, [r, m])

    def _check_extent_bridge(self, ctx, nb: Term, want: BridgeT) -> Term:
        """Premise 7: the bridge clause agrees with the endpoint clauses."""
        raw = strip_ann(nb)
        if isinstance(raw, BLam):
            x = fresh(raw.name)
            body = self.check(ctx.with_bridge(x), instantiate(raw.body, [BVar(x)]),
                              instantiate(want.line, [BVar(x)]))
            b = close(body, [x])
            for eps, end in ((B0, want.lhs), (B1, want.rhs)):
                if not self.conv.conv(ctx, instantiate(want.line, [eps]), instantiate(b, [eps]), end):
                    raise _err(Code.TubeMismatch,
                               f"extent bridge clause at endpoint {eps.bit} disagrees with the endpoint clause")
            return BLam(b, raw.name, span=nb.span)
        tm, ty = self.infer(ctx, nb)
        w = self.whnf(ctx, ty)
        if not isinstance(w, BridgeT):
            raise _err(Code.TypeMismatch, f"extent bridge clause has type {self.show(ty)}, not a bridge type")
        x = fresh("x")
        if not self.conv.conv_type(ctx.with_bridge(x), instantiate(w.line, [BVar(x)]),
                                   instantiate(want.line, [BVar(x)])):
            raise _err(Code.TypeMismatch, "extent bridge clause lies over the wrong type line")
        for eps, got, end in ((0, w.lhs, want.lhs), (1, w.rhs, want.rhs)):
            line_at = instantiate(want.line, [B1 if eps else B0])
            if not self.conv.conv(ctx, line_at, got, end):
                raise _err(Code.TubeMismatch,
                           f"extent bridge clause at endpoint {eps} disagrees with the endpoint clause")
        return tm

    def _kan_type_ok(self, ctx, w, what):
        if isinstance(w, U):
            raise _err(Code.UnsupportedKan, f"{what} at the universe is not supported")
        if isinstance(w, V) and isinstance(w.dim, PVar):
            raise _err(Code.UnsupportedKan, f"{what} across a V type with a variable index is not supported")

    def _infer_coe(self, ctx, t: Coe):
        self.check_dim(ctx, t.r, "p")
        self.check_dim(ctx, t.s, "p")
        y = fresh(t.name)
        cy = ctx.with_path(y)
        line = self.check_type(cy, instantiate(t.line, [PVar(y)]))
        w = self.whnf(cy, line)
        self._kan_type_ok(cy, w, "coe")
        lb = close(line, [y])
        m = self.check(ctx, t.tm, instantiate(lb, [t.r]))
        return Coe(lb, t.r, t.s, m, t.name, span=t.span), instantiate(lb, [t.s])

    def _infer_hcom(self, ctx, t: HCom):
        self.check_dim(ctx, t.r, "p")
        self.check_dim(ctx, t.s, "p")
        ty = self.check_type(ctx, t.ty)
        self._kan_type_ok(ctx, self.whnf(ctx, ty), "hcom")
        cap = self.check(ctx, t.cap, ty)
        tubes = self.check_system(ctx, ty, t.sys, cap, t.r)
        return HCom(ty, t.r, t.s, cap, tubes, span=t.span), ty

    def check_system(self, ctx: Context, ty: Term, sys, cap: Term, r) -> tuple:
        tubes = []
        for tb in sys:
            self.check_constraint(ctx, tb.cond)
            y = fresh(tb.name)
            c2 = ctx.with_constraints([tb.cond]).with_path(y)
            body = self.check(c2, instantiate(tb.body, [PVar(y)]), ty) if c2.is_consistent() \
                else instantiate(tb.body, [PVar(y)])
            tubes.append(Tube(tb.cond, close(body, [y]), tb.name))
        for i, tb in enumerate(tubes):
            if not self.conv.conv_under(ctx, [tb.cond], ty, cap, instantiate(tb.body, [r])):
                raise _err(Code.BoundaryMismatch,
                           f"tube {i} does not agree with the cap at the source dimension")
        for i in range(len(tubes)):
            for j in range(i + 1, len(tubes)):
                y = fresh("y")
                a, b = tubes[i], tubes[j]
                if not self.conv.conv_under(ctx.with_path(y), [a.cond, b.cond], ty,
                                            instantiate(a.body, [PVar(y)]), instantiate(b.body, [PVar(y)])):
                    raise _err(Code.TubeMismatch, f"tubes {i} and {j} disagree where their constraints overlap")
        return tuple(tubes)

    def _infer_vproj(self, ctx, t: Vproj):
        self.check_dim(ctx, t.dim, "p")
        p, pty = self.infer(ctx, t.tm)
        if isinstance(t.dim, PConst):
            if t.dim.bit:
                iso = t.iso  # irrelevant at 1: the V type is B there
                return Vproj(t.dim, p, iso, span=t.span), pty
            iso, ity = self.infer(ctx, t.iso)
            w = self.whnf(ctx, ity)
            f = self.whnf(ctx, w.dom) if isinstance(w, Sigma) else None
            if not isinstance(f, Pi):
                raise _err(Code.TypeMismatch, "Vproj at 0 expects an isomorphism")
            self._expect_type_eq(ctx, pty, f.dom, "Vproj argument")
            b = instantiate(f.cod, [p])
            self.check(ctx, iso, iso_type(f.dom, b))
            return Vproj(t.dim, p, iso, span=t.span), b
        w = self.whnf(ctx, pty)
        if not (isinstance(w, V) and w.dim == t.dim):
            raise _err(Code.TypeMismatch, f"Vproj expects an element of a V type at {t.dim}")
        c0 = ctx.with_constraints([PathEq(t.dim, P0)])
        iso = self._under(c0, lambda: self.check(c0, t.iso, iso_type(w.a, w.b)), t.iso)
        if c0.is_consistent() and not self.conv.conv(c0, iso_type(w.a, w.b), iso, w.iso):
            raise _err(Code.TypeMismatch, "Vproj isomorphism differs from the one in the V type")
        return Vproj(t.dim, p, iso, span=t.span), w.b

    def _infer_z2elim(self, ctx, t: Z2Elim):
        ha, hn, hn2, hx = t.names
        a = fresh(ha)
        motive = close(self.check_type(ctx.with_term(a, Z2T), instantiate(t.motive, [Var(a)])), [a])
        scrut = self.check(ctx, t.scrut, Z2T)
        n = fresh(hn)
        cn = ctx.with_term(n, INT)
        qin = close(self.check(cn, instantiate(t.qin, [Var(n)]), instantiate(motive, [ZIn(Var(n))])), [n])
        n2, x = fresh(hn2), fresh(hx)
        cm = ctx.with_term(n2, INT).with_path(x)
        qmod = close(self.check(cm, instantiate(t.qmod, [Var(n2), PVar(x)]),
                                instantiate(motive, [ZMod(Var(n2), PVar(x))])), [n2, x])
        # coherence of the path clause with the point clause on its boundary
        for eps, target in ((P0, Var(n)), (P1, Add(Var(n), IntLit(2)))):
            got = instantiate(qmod, [Var(n), eps])
            want = instantiate(qin, [target])
            if not self.conv.conv(cn, instantiate(motive, [ZIn(target)]), got, want):
                raise _err(Code.BoundaryMismatch,
                           f"zmod clause at {eps.bit} does not agree with the zin clause")
        return Z2Elim(motive, scrut, qin, qmod, t.names, span=t.span), instantiate(motive, [scrut])


def _sort_name(sort):
    return "path" if sort == "p" else "bridge"


def _show_name(name: str) -> str:
    return name.split("#", 1)[0]
