"""Deterministic small-step evaluation.

``Machine.step`` reduces the leftmost-outermost redex, forcing principal
arguments (and the type of a Kan operation) before anything else. Type lines
of ``coe`` and bridge bodies of ``ungel`` are stepped under a fresh variable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .errors import Code, Diagnostic, DiagonalSubstitution, FuelExhausted
from .interval import (
    B0, B1, BConst, BVar, BridgeEq, P0, P1, PConst, PVar, PathEq, Status,
    apply_constraint, closed_status, forall_x,
)
from .syntax import (
    BASE_TYPES, Abort, Add, Ann, App, BApp, BLam, Bool, BridgeT, Coe, Def, Empty,
    Extent, FF, Fst, Gel, GelI, HCom, Idx, If, Int, IntLit, Lam, PApp, PLam, Pair,
    PathT, Pi, Sigma, Snd, Star, TT, Term, Tube, U, Unit, Ungel, V, Var, Vin, Vproj,
    Z2, Z2Elim, ZIn, ZMod, _copy_with, close, fresh, instantiate, strip_ann, subst, subst_dims,
)

DEFAULT_FUEL = 10 ** 6


# ---------------------------------------------------------------------------
# definitions


@dataclass(frozen=True)
class Definition:
    """A checked top-level definition.

    ``params`` are leading dimension parameters as (name, sort) pairs, sort
    being ``"p"`` or ``"b"``. ``type`` and ``body`` mention them as free
    variables. A type alias has ``type`` None.
    """

    name: str
    params: tuple
    type: Optional[Term]
    body: Term

    def unfold(self, dims) -> Term:
        return self.instantiate(self.body, dims)

    def type_at(self, dims) -> Optional[Term]:
        return None if self.type is None else self.instantiate(self.type, dims)

    def instantiate(self, t: Term, dims) -> Term:
        if len(dims) != len(self.params):
            raise Diagnostic(Code.TypeMismatch,
                             f"{self.name} expects {len(self.params)} dimension arguments, got {len(dims)}")
        seen = set()
        for (p, sort), d in zip(self.params, dims):
            if sort == "b" and isinstance(d, BVar):
                if d.name in seen:
                    raise DiagonalSubstitution(
                        f"bridge variable {d.name} passed twice to {self.name}")
                seen.add(d.name)
        if not self.params:
            return t
        return subst_dims(t, {p: d for (p, _), d in zip(self.params, dims)})


# ---------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class Value:
    term: Term


@dataclass(frozen=True)
class Steps:
    term: Term
    rule: str
    path: tuple = ()


@dataclass(frozen=True)
class Stuck:
    reason: str
    term: Optional[Term] = None


class StuckError(Exception):
    def __init__(self, reason: str, term: Optional[Term] = None):
        super().__init__(reason)
        self.reason = reason
        self.term = term


# ---------------------------------------------------------------------------
# derived Kan operations


def com(line: Term, r, s, m: Term, sys=()) -> HCom:
    """Heterogeneous composition, expanded into hcom over coe (no evaluation)."""
    tubes = []
    for tb in sys:
        z = fresh("z")
        body = Coe(line, PVar(z), s, instantiate(tb.body, [PVar(z)]))
        tubes.append(Tube(tb.cond, close(body, [z]), tb.name))
    return HCom(instantiate(line, [s]), r, s, Coe(line, r, s, m), tuple(tubes))


def _tube_body_map(tb: Tube, fn: Callable[[Term], Term]) -> Tube:
    """Apply ``fn`` to a tube body (opened at a fresh variable)."""
    y = fresh(tb.name)
    return Tube(tb.cond, close(fn(instantiate(tb.body, [PVar(y)])), [y]), tb.name)


def _subst_tube(tb: Tube, env: dict) -> Tube:
    return Tube(apply_constraint(env, tb.cond), subst(tb.body, env), tb.name)


def _is_base_type(t: Term) -> bool:
    return isinstance(t, BASE_TYPES)


def is_fhcom(t: Term) -> bool:
    """An hcom at a base type that is already a value."""
    return isinstance(t, HCom) and _is_base_type(t.ty) and t.r != t.s and all(
        closed_status(tb.cond) is Status.UNDETERMINED for tb in t.sys)


_INTRO_KEEP_ANN = (Lam, Pair, PLam, BLam, GelI, Vin)


# ---------------------------------------------------------------------------
# the machine


class Machine:
    """Evaluator over term-variable-closed terms.

    Subclasses may override the ``on_*`` hooks to give meaning to neutral
    terms (used by conversion checking for open terms).
    """

    def __init__(self, defs: Optional[dict] = None, fuel: int = DEFAULT_FUEL,
                 trace: Optional[Callable[[str], None]] = None):
        self.defs = defs if defs is not None else {}
        self.fuel = fuel
        self.trace = trace

    # -- public API --------------------------------------------------------

    def step(self, t: Term):
        try:
            res = self._step(t)
        except StuckError as e:
            return Stuck(e.reason, e.term)
        except DiagonalSubstitution as e:
            return Stuck(e.message, t)
        if res is None:
            return Value(t)
        new, rule, path = res
        return Steps(new, rule, path)

    def isval(self, t: Term) -> bool:
        return isinstance(self.step(t), Value)

    def eval(self, t: Term, fuel: Optional[int] = None) -> Term:
        budget = self.fuel if fuel is None else fuel
        n = 0
        while True:
            res = self.step(t)
            if isinstance(res, Value):
                return t
            if isinstance(res, Stuck):
                raise Diagnostic(Code.Stuck, f"evaluation stuck: {res.reason}")
            n += 1
            if n > budget:
                raise FuelExhausted(budget)
            if self.trace is not None:
                self.trace(f"{res.rule} @ {'.'.join(res.path) or '<root>'}")
            t = res.term

    def steps(self, t: Term, limit: Optional[int] = None):
        """Yield successive reducts of ``t`` (not including ``t``)."""
        budget = self.fuel if limit is None else limit
        for _ in range(budget):
            res = self.step(t)
            if not isinstance(res, Steps):
                return
            t = res.term
            yield res

    # -- hooks -------------------------------------------------------------

    def capture_ok(self, m: Term, x: str) -> bool:
        """May the bridge variable ``x`` be captured in ``m``?"""
        return not m.free_term_vars()

    def on_var(self, t: Term):
        raise StuckError(f"free variable {getattr(t, 'name', t)!r}", t)

    def on_neutral_papp(self, t: PApp):
        raise StuckError("path application of a non-abstraction", t)

    def on_neutral_bapp(self, t: BApp):
        raise StuckError("bridge application of a non-abstraction", t)

    def on_neutral_kan(self, t: Term, ty: Term):
        raise StuckError(f"Kan operation at non-canonical type {type(ty).__name__}", t)

    def on_neutral_extent(self, t: Extent):
        raise StuckError("extent principal argument is not apart from its index", t)

    def on_neutral(self, t: Term, what: str):
        raise StuckError(what, t)

    # -- stepping ----------------------------------------------------------

    def _sub(self, t: Term, field: str):
        """Step a principal subterm; returns the reduct triple or None if a value."""
        res = self._step(getattr(t, field))
        if res is None:
            return None
        new, rule, path = res
        return _copy_with(t, {field: new}), rule, (field,) + path

    def _sub_under(self, t: Term, field: str, mk):
        """Step a one-binder subterm under a fresh variable built with ``mk``."""
        body = getattr(t, field)
        x = fresh("v")
        opened = instantiate(body, [mk(x)])
        res = self._step(opened)
        if res is None:
            return None, opened, x
        new, rule, path = res
        return (_copy_with(t, {field: close(new, [x])}), rule, (field,) + path), opened, x

    def _step(self, t: Term):
        method = _DISPATCH.get(type(t))
        if method is None:
            return None
        return method(self, t)

    # values
    def _value(self, t):
        return None

    def _var(self, t):
        return self.on_var(t)

    def _def(self, t: Def):
        d = self.defs.get(t.name)
        if d is None:
            raise StuckError(f"unknown definition {t.name}", t)
        return d.unfold(t.dims), "delta", ()

    def _ann(self, t: Ann):
        res = self._sub(t, "tm")
        if res is not None:
            return res
        inner = t.tm
        if isinstance(inner, _INTRO_KEEP_ANN):
            return None
        return inner, "ann-erase", ()

    def _app(self, t: App):
        res = self._sub(t, "fn")
        if res is not None:
            return res
        f = strip_ann(t.fn)
        if isinstance(f, Lam):
            return instantiate(f.body, [t.arg]), "app-beta", ()
        return self.on_neutral(t, "application of a non-function")

    def _fst(self, t: Fst):
        res = self._sub(t, "pair")
        if res is not None:
            return res
        p = strip_ann(t.pair)
        if isinstance(p, Pair):
            return p.fst, "fst-beta", ()
        return self.on_neutral(t, "projection from a non-pair")

    def _snd(self, t: Snd):
        res = self._sub(t, "pair")
        if res is not None:
            return res
        p = strip_ann(t.pair)
        if isinstance(p, Pair):
            return p.snd, "snd-beta", ()
        return self.on_neutral(t, "projection from a non-pair")

    def _papp(self, t: PApp):
        res = self._sub(t, "fn")
        if res is not None:
            return res
        p = strip_ann(t.fn)
        if isinstance(p, PLam):
            return instantiate(p.body, [t.dim]), "papp-beta", ()
        return self.on_neutral_papp(t)

    def _bapp(self, t: BApp):
        res = self._sub(t, "fn")
        if res is not None:
            return res
        p = strip_ann(t.fn)
        if isinstance(p, BLam):
            if isinstance(t.dim, BVar) and t.dim.name in p.body.free_names():
                raise StuckError(f"diagonal bridge application at {t.dim.name}", t)
            return instantiate(p.body, [t.dim]), "bapp-beta", ()
        return self.on_neutral_bapp(t)

    def _gel(self, t: Gel):
        if isinstance(t.dim, BConst):
            return (t.a1 if t.dim.bit else t.a0), "Gel-endpoint", ()
        return None

    def _geli(self, t: GelI):
        if isinstance(t.dim, BConst):
            return (t.m1 if t.dim.bit else t.m0), "gel-endpoint", ()
        return None

    def _ungel(self, t: Ungel):
        res, opened, x = self._sub_under(t, "body", BVar)
        if res is not None:
            return res
        q = strip_ann(opened)
        if isinstance(q, GelI) and q.dim == BVar(x):
            return q.wit, "ungel-beta", ()
        return self.on_neutral(t, "ungel of a non-gel")

    def _extent(self, t: Extent):
        r = t.dim
        if isinstance(r, BConst):
            branch = t.n1 if r.bit else t.n0
            return instantiate(branch, [t.scrut]), "extent-endpoint", ()
        if isinstance(r, BVar):
            m = t.scrut
            if not self.capture_ok(m, r.name):
                return self.on_neutral_extent(t)
            m0 = subst(m, {r.name: B0})
            m1 = subst(m, {r.name: B1})
            line = BLam(close(m, [r.name]), r.name.split("#")[0])
            return BApp(instantiate(t.nb, [m0, m1, line]), r), "extent-var", ()
        raise StuckError("extent at a bound index", t)

    def _v(self, t: V):
        if isinstance(t.dim, PConst):
            return (t.b if t.dim.bit else t.a), "V-endpoint", ()
        return None

    def _vin(self, t: Vin):
        if isinstance(t.dim, PConst):
            return (t.n if t.dim.bit else t.m), "Vin-endpoint", ()
        return None

    def _vproj(self, t: Vproj):
        if isinstance(t.dim, PConst):
            if t.dim.bit:
                return t.tm, "Vproj-1", ()
            return App(Fst(t.iso), t.tm), "Vproj-0", ()
        res = self._sub(t, "tm")
        if res is not None:
            return res
        v = strip_ann(t.tm)
        if isinstance(v, Vin) and v.dim == t.dim:
            return v.n, "Vproj-beta", ()
        return self.on_neutral(t, "Vproj of a non-Vin")

    def _zmod(self, t: ZMod):
        if isinstance(t.dim, PConst):
            if t.dim.bit:
                return ZIn(Add(t.n, IntLit(2))), "zmod-1", ()
            return ZIn(t.n), "zmod-0", ()
        return None

    def _add(self, t: Add):
        for f in ("lhs", "rhs"):
            res = self._sub(t, f)
            if res is not None:
                return res
            v = strip_ann(getattr(t, f))
            if is_fhcom(v):
                def rebuild(x, f=f):
                    return Add(x, t.rhs) if f == "lhs" else Add(t.lhs, x)
                sys = tuple(Tube(tb.cond, rebuild(tb.body), tb.name) for tb in v.sys)
                return HCom(v.ty, v.r, v.s, rebuild(v.cap), sys), "add-fhcom", ()
        lhs, rhs = strip_ann(t.lhs), strip_ann(t.rhs)
        if isinstance(lhs, IntLit) and isinstance(rhs, IntLit):
            return IntLit(lhs.value + rhs.value), "add", ()
        return self.on_neutral(t, "addition of non-literals")

    def _commute(self, motive: Term, h: HCom, elim: Callable[[Term], Term]):
        """Push an eliminator with ``motive`` (one binder) through an fhcom value."""
        z = fresh("z")
        line = close(instantiate(motive, [HCom(h.ty, h.r, PVar(z), h.cap, h.sys)]), [z])
        sys = tuple(Tube(tb.cond, elim(tb.body), tb.name) for tb in h.sys)
        return com(line, h.r, h.s, elim(h.cap), sys)

    def _if(self, t: If):
        res = self._sub(t, "scrut")
        if res is not None:
            return res
        v = strip_ann(t.scrut)
        if isinstance(v, TT):
            return t.tcase, "if-tt", ()
        if isinstance(v, FF):
            return t.fcase, "if-ff", ()
        if is_fhcom(v):
            return self._commute(t.motive, v, lambda x: If(t.motive, x, t.tcase, t.fcase, t.name)), "if-fhcom", ()
        return self.on_neutral(t, "if on a non-boolean")

    def _z2elim(self, t: Z2Elim):
        res = self._sub(t, "scrut")
        if res is not None:
            return res
        v = strip_ann(t.scrut)
        if isinstance(v, ZIn):
            return instantiate(t.qin, [v.n]), "z2elim-zin", ()
        if isinstance(v, ZMod):
            return instantiate(t.qmod, [v.n, v.dim]), "z2elim-zmod", ()
        if is_fhcom(v):
            def elim(x):
                return Z2Elim(t.motive, x, t.qin, t.qmod, t.names)
            return self._commute(t.motive, v, elim), "z2elim-fhcom", ()
        return self.on_neutral(t, "z2elim on a non-constructor")

    def _abort(self, t: Abort):
        res = self._sub(t, "tm")
        if res is not None:
            return res
        v = strip_ann(t.tm)
        if is_fhcom(v):
            sys = tuple(Tube(tb.cond, Abort(t.ty, tb.body), tb.name) for tb in v.sys)
            return com(t.ty, v.r, v.s, Abort(t.ty, v.cap), sys), "abort-fhcom", ()
        return self.on_neutral(t, "abort of a non-canonical element")

    # -- Kan operations ----------------------------------------------------

    def _coe(self, t: Coe):
        res, ty, y = self._sub_under(t, "line", PVar)
        if res is not None:
            return res
        ty = strip_ann(ty)
        r, s, m = t.r, t.s, t.tm
        Y = PVar(y)
        if isinstance(ty, (Bool, Int, Z2, Unit, Empty, U)):
            return m, "coe-const", ()
        if isinstance(ty, Pi):
            dom_line = close(ty.dom, [y])
            a = fresh(ty.name)
            back = Coe(dom_line, s, r, Var(a))
            along = Coe(dom_line, s, Y, Var(a))
            cod_line = close(instantiate(ty.cod, [along]), [y])
            body = Coe(cod_line, r, s, App(m, back))
            return Lam(close(body, [a]), ty.name, instantiate(dom_line, [s])), "coe-pi", ()
        if isinstance(ty, Sigma):
            dom_line = close(ty.dom, [y])
            first = Coe(dom_line, r, s, Fst(m))
            along = Coe(dom_line, r, Y, Fst(m))
            cod_line = close(instantiate(ty.cod, [along]), [y])
            return Pair(first, Coe(cod_line, r, s, Snd(m))), "coe-sigma", ()
        if isinstance(ty, PathT):
            x = fresh(ty.name)
            line = close(instantiate(ty.line, [PVar(x)]), [y])
            sys = (Tube(PathEq(PVar(x), P0), close(ty.lhs, [y])),
                   Tube(PathEq(PVar(x), P1), close(ty.rhs, [y])))
            body = com(line, r, s, PApp(m, PVar(x)), sys)
            return PLam(close(body, [x]), ty.name), "coe-path", ()
        if isinstance(ty, BridgeT):
            x = fresh(ty.name)
            line = close(instantiate(ty.line, [BVar(x)]), [y])
            sys = (Tube(BridgeEq(BVar(x), 0), close(ty.lhs, [y])),
                   Tube(BridgeEq(BVar(x), 1), close(ty.rhs, [y])))
            body = com(line, r, s, BApp(m, BVar(x)), sys)
            return BLam(close(body, [x]), ty.name), "coe-bridge", ()
        if isinstance(ty, Gel) and isinstance(ty.dim, BVar):
            x = ty.dim.name
            if not self.capture_ok(m, x):
                return self.on_neutral_kan(t, ty)

            def endpoint(eps, target):
                a_line = close(ty.a1 if eps else ty.a0, [y])
                return Coe(a_line, r, target, subst(m, {x: BConst(eps)}))

            rel = close(instantiate(ty.rel, [endpoint(0, Y), endpoint(1, Y)]), [y])
            wit = Coe(rel, r, s, Ungel(close(m, [x]), x.split("#")[0]))
            return GelI(ty.dim, endpoint(0, s), endpoint(1, s), wit), "coe-gel", ()
        return self.on_neutral_kan(t, ty)

    def _hcom(self, t: HCom):
        res = self._sub(t, "ty")
        if res is not None:
            return res
        ty = strip_ann(t.ty)
        r, s, m, sys = t.r, t.s, t.cap, t.sys
        if _is_base_type(ty):
            if r == s:
                return m, "hcom-cap", ()
            for i, tb in enumerate(sys):
                if closed_status(tb.cond) is Status.TRUE:
                    return instantiate(tb.body, [s]), "hcom-tube", ()
            live = tuple(tb for tb in sys if closed_status(tb.cond) is not Status.FALSE)
            if len(live) != len(sys):
                return HCom(t.ty, r, s, m, live), "hcom-prune", ()
            return None
        if isinstance(ty, Pi):
            a = fresh(ty.name)
            av = Var(a)
            body = HCom(instantiate(ty.cod, [av]), r, s, App(m, av),
                        tuple(Tube(tb.cond, App(tb.body, av), tb.name) for tb in sys))
            return Lam(close(body, [a]), ty.name, ty.dom), "hcom-pi", ()
        if isinstance(ty, Sigma):
            fst_sys = tuple(Tube(tb.cond, Fst(tb.body), tb.name) for tb in sys)

            def first(target):
                return HCom(ty.dom, r, target, Fst(m), fst_sys)

            z = fresh("z")
            line = close(instantiate(ty.cod, [first(PVar(z))]), [z])
            snd = com(line, r, s, Snd(m), tuple(Tube(tb.cond, Snd(tb.body), tb.name) for tb in sys))
            return Pair(first(s), snd), "hcom-sigma", ()
        if isinstance(ty, PathT):
            x = fresh(ty.name)
            X = PVar(x)
            tubes = tuple(Tube(tb.cond, PApp(tb.body, X), tb.name) for tb in sys)
            tubes += (Tube(PathEq(X, P0), ty.lhs, "_"), Tube(PathEq(X, P1), ty.rhs, "_"))
            body = HCom(instantiate(ty.line, [X]), r, s, PApp(m, X), tubes)
            return PLam(close(body, [x]), ty.name), "hcom-path", ()
        if isinstance(ty, BridgeT):
            x = fresh(ty.name)
            X = BVar(x)
            tubes = tuple(Tube(tb.cond, BApp(tb.body, X), tb.name) for tb in sys)
            tubes += (Tube(BridgeEq(X, 0), ty.lhs, "_"), Tube(BridgeEq(X, 1), ty.rhs, "_"))
            body = HCom(instantiate(ty.line, [X]), r, s, BApp(m, X), tubes)
            return BLam(close(body, [x]), ty.name), "hcom-bridge", ()
        if isinstance(ty, Gel) and isinstance(ty.dim, BVar):
            x = ty.dim.name
            if not (self.capture_ok(m, x) and all(self.capture_ok(tb.body, x) for tb in sys)):
                return self.on_neutral_kan(t, ty)

            def endpoint(eps, target):
                env = {x: BConst(eps)}
                return HCom(ty.a1 if eps else ty.a0, r, target, subst(m, env),
                            tuple(_subst_tube(tb, env) for tb in sys))

            z = fresh("z")
            rel = close(instantiate(ty.rel, [endpoint(0, PVar(z)), endpoint(1, PVar(z))]), [z])
            hint = x.split("#")[0]
            wsys = tuple(
                _tube_body_map(Tube(forall_x(x, tb.cond), tb.body, tb.name),
                               lambda b: Ungel(close(b, [x]), hint))
                for tb in sys)
            wit = com(rel, r, s, Ungel(close(m, [x]), hint), wsys)
            return GelI(ty.dim, endpoint(0, s), endpoint(1, s), wit), "hcom-gel", ()
        return self.on_neutral_kan(t, ty)


_DISPATCH = {
    Var: Machine._var, Idx: Machine._var, Def: Machine._def, Ann: Machine._ann,
    App: Machine._app, Fst: Machine._fst, Snd: Machine._snd,
    PApp: Machine._papp, BApp: Machine._bapp,
    Gel: Machine._gel, GelI: Machine._geli, Ungel: Machine._ungel, Extent: Machine._extent,
    Coe: Machine._coe, HCom: Machine._hcom,
    V: Machine._v, Vin: Machine._vin, Vproj: Machine._vproj,
    If: Machine._if, Add: Machine._add, ZMod: Machine._zmod, Z2Elim: Machine._z2elim,
    Abort: Machine._abort,
}


def evaluate(t: Term, defs: Optional[dict] = None, fuel: int = DEFAULT_FUEL) -> Term:
    return Machine(defs, fuel).eval(t)


def isval(t: Term, defs: Optional[dict] = None) -> bool:
    return Machine(defs).isval(t)


def step(t: Term, defs: Optional[dict] = None):
    return Machine(defs).step(t)
