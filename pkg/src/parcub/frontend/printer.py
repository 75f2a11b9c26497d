"""Pretty printer from core terms back to surface syntax.

Bound variables are shown under their hint, renamed only when the plain
hint would capture a free occurrence, clash with a definition, or be a
keyword. Output re-parses to an alpha-equivalent term.
"""

from __future__ import annotations

from ..interval import (
    BConst, BIdx, BVar, BridgeEq, PConst, PIdx, PVar, PathEq,
)
from ..syntax import (
    Abort, Add, Ann, App, BApp, BLam, Bool, BridgeT, Coe, Def, Empty, Extent, FF, Fst, Gel,
    GelI, HCom, Idx, If, Int, IntLit, Lam, PApp, PLam, Pair, PathT, Pi, Sigma, Snd, Star, TT,
    Term, U, Unit, Ungel, V, Var, Vin, Vproj, Z2, Z2Elim, ZIn, ZMod, base_name, fresh,
    instantiate,
)
from .lexer import KEYWORDS

# precedence levels: 0 binder forms and arrows, 1 products, 2 sums,
# 3 applications and keyword forms, 4 atoms
TERM, PROD, SUM, APP, ATOM = range(5)

_CONSTS = {U: "U", Bool: "bool", TT: "tt", FF: "ff", Int: "int", Z2: "z2",
           Unit: "unit", Star: "star", Empty: "empty"}


class Printer:
    def __init__(self, defs=()):
        self.defs = set(defs)

    def __call__(self, t: Term) -> str:
        return self.show(t)

    def show(self, t: Term) -> str:
        return self._pr(t, {}, TERM)

    # -- names -------------------------------------------------------------

    def _display(self, env, name):
        return env.get(name) or base_name(name)

    def _open(self, body, env, hints, mks):
        """Open binders for printing: returns (opened body, new env, display names)."""
        uniq = [fresh(h) for h in hints]
        opened = instantiate(body, [mk(u) for mk, u in zip(mks, uniq)])
        fv = opened.free_names()
        avoid = {self._display(env, n) for n in fv if n not in uniq}
        avoid |= self.defs | KEYWORDS
        env2 = dict(env)
        shown = []
        for h, u in zip(hints, uniq):
            if u not in fv:
                env2[u] = "_"
                shown.append("_")
                continue
            name = self._pick(h, avoid)
            avoid.add(name)
            env2[u] = name
            shown.append(name)
        return opened, env2, shown

    @staticmethod
    def _pick(hint, avoid):
        base = base_name(hint)
        if not base or base == "_":
            base = "x"
        if base not in avoid:
            return base
        i = 1
        while f"{base}{i}" in avoid:
            i += 1
        return f"{base}{i}"

    def _binder(self, body, env, hints, mks) -> str:
        opened, env2, shown = self._open(body, env, hints, mks)
        head = "".join(f"{n}. " for n in shown)
        return f"({head}{self._pr(opened, env2, TERM)})"

    def _line(self, line, env, hint, mk) -> str:
        """A type line, printed without a binder when it is constant."""
        if line.loose_bound() == 0:
            return self._pr(line, env, ATOM)
        return self._binder(line, env, [hint], [mk])

    # -- dims --------------------------------------------------------------

    def dim(self, d, env) -> str:
        if isinstance(d, PConst):
            return str(d.bit)
        if isinstance(d, BConst):
            return f"#{d.bit}"
        if isinstance(d, (PVar, BVar)):
            return self._display(env, d.name)
        if isinstance(d, (PIdx, BIdx)):
            return f"?{d.index}"
        raise TypeError(f"not a dimension: {d!r}")

    def constraint(self, c, env) -> str:
        if isinstance(c, PathEq):
            return f"{self.dim(c.lhs, env)} = {self.dim(c.rhs, env)}"
        assert isinstance(c, BridgeEq)
        return f"{self.dim(c.lhs, env)} = {c.bit}"

    # -- terms -------------------------------------------------------------

    def _pr(self, t, env, prec) -> str:
        s, level = self._raw(t, env)
        return f"({s})" if level < prec else s

    def _a(self, t, env) -> str:
        return self._pr(t, env, ATOM)

    def _raw(self, t, env):
        cls = type(t)
        if cls in _CONSTS:
            return _CONSTS[cls], ATOM
        if cls is Var:
            return self._display(env, t.name), ATOM
        if cls is Idx:
            return f"?{t.index}", ATOM
        if cls is IntLit:
            if t.value < 0:
                raise ValueError("negative integer literals have no surface syntax")
            return str(t.value), ATOM
        if cls is Def:
            if not t.dims:
                return t.name, ATOM
            return " ".join([t.name] + [self.dim(d, env) for d in t.dims]), APP
        if cls is Ann:
            return f"({self._pr(t.tm, env, TERM)} : {self._pr(t.ty, env, TERM)})", ATOM
        if cls is Pair:
            return f"({self._pr(t.fst, env, TERM)}, {self._pr(t.snd, env, TERM)})", ATOM
        if cls is Lam:
            opened, env2, (x,) = self._open(t.body, env, [t.name], [Var])
            if t.dom is None:
                return f"lam {x}. {self._pr(opened, env2, TERM)}", TERM
            return f"lam ({x} : {self._pr(t.dom, env, TERM)}). {self._pr(opened, env2, TERM)}", TERM
        if cls is PLam or cls is BLam:
            mk = PVar if cls is PLam else BVar
            kw = "plam" if cls is PLam else "blam"
            opened, env2, (x,) = self._open(t.body, env, [t.name], [mk])
            return f"{kw} {x}. {self._pr(opened, env2, TERM)}", TERM
        if cls is Pi or cls is Sigma:
            if t.cod.loose_bound() == 0:
                if cls is Pi:
                    return f"{self._pr(t.dom, env, PROD)} -> {self._pr(t.cod, env, TERM)}", TERM
                return f"{self._pr(t.dom, env, SUM)} * {self._pr(t.cod, env, PROD)}", PROD
            opened, env2, (x,) = self._open(t.cod, env, [t.name], [Var])
            kw = "Pi" if cls is Pi else "Sig"
            return f"{kw} ({x} : {self._pr(t.dom, env, TERM)}) {self._pr(opened, env2, TERM)}", TERM
        if cls is Add:
            return f"{self._pr(t.lhs, env, SUM)} + {self._pr(t.rhs, env, APP)}", SUM
        if cls is App:
            return f"{self._pr(t.fn, env, APP)} {self._a(t.arg, env)}", APP
        if cls is PApp:
            return f"{self._pr(t.fn, env, APP)} @ {self.dim(t.dim, env)}", APP
        if cls is BApp:
            return f"{self._pr(t.fn, env, APP)} @@ {self.dim(t.dim, env)}", APP
        return self._keyword(t, env), APP

    def _keyword(self, t, env) -> str:
        a, d = (lambda u: self._a(u, env)), (lambda r: self.dim(r, env))
        cls = type(t)
        if cls is Fst:
            return f"fst {a(t.pair)}"
        if cls is Snd:
            return f"snd {a(t.pair)}"
        if cls is PathT:
            return f"Path {self._line(t.line, env, t.name, PVar)} {a(t.lhs)} {a(t.rhs)}"
        if cls is BridgeT:
            return f"Bridge {self._line(t.line, env, t.name, BVar)} {a(t.lhs)} {a(t.rhs)}"
        if cls is Gel:
            rel = self._binder(t.rel, env, list(t.names), [Var, Var])
            return f"Gel {d(t.dim)} {a(t.a0)} {a(t.a1)} {rel}"
        if cls is GelI:
            return f"gel {d(t.dim)} {a(t.m0)} {a(t.m1)} {a(t.wit)}"
        if cls is Ungel:
            return f"ungel {self._binder(t.body, env, [t.name], [BVar])}"
        if cls is Extent:
            n = t.names
            parts = [
                self._binder(t.ty, env, [n[0]], [BVar]),
                self._binder(t.fam, env, [n[1], n[2]], [BVar, Var]),
                self._binder(t.n0, env, [n[3]], [Var]),
                self._binder(t.n1, env, [n[4]], [Var]),
                self._binder(t.nb, env, [n[5], n[6], n[7]], [Var, Var, Var]),
            ]
            return f"extent {d(t.dim)} {a(t.scrut)} " + " ".join(parts)
        if cls is Coe:
            line = self._binder(t.line, env, [t.name], [PVar])
            return f"coe {line} {d(t.r)} {d(t.s)} {a(t.tm)}"
        if cls is HCom:
            tubes = []
            for tb in t.sys:
                opened, env2, (y,) = self._open(tb.body, env, [tb.name], [PVar])
                tubes.append(f"{self.constraint(tb.cond, env)} -> {y}. {self._pr(opened, env2, TERM)}")
            return f"hcom {a(t.ty)} {d(t.r)} {d(t.s)} {a(t.cap)} [{' | '.join(tubes)}]"
        if cls is V:
            return f"V {d(t.dim)} {a(t.a)} {a(t.b)} {a(t.iso)}"
        if cls is Vin:
            return f"Vin {d(t.dim)} {a(t.m)} {a(t.n)}"
        if cls is Vproj:
            return f"Vproj {d(t.dim)} {a(t.tm)} {a(t.iso)}"
        if cls is If:
            mot = self._binder(t.motive, env, [t.name], [Var])
            return f"if {mot} {a(t.scrut)} {a(t.tcase)} {a(t.fcase)}"
        if cls is Z2Elim:
            n = t.names
            mot = self._binder(t.motive, env, [n[0]], [Var])
            qin = self._binder(t.qin, env, [n[1]], [Var])
            qmod = self._binder(t.qmod, env, [n[2], n[3]], [Var, PVar])
            return f"z2elim {mot} {a(t.scrut)} {qin} {qmod}"
        if cls is ZIn:
            return f"zin {a(t.n)}"
        if cls is ZMod:
            return f"zmod {a(t.n)} {d(t.dim)}"
        if cls is Abort:
            return f"abort {a(t.ty)} {a(t.tm)}"
        raise TypeError(f"cannot print {cls.__name__}")


def show(t: Term, defs=()) -> str:
    return Printer(defs).show(t)
