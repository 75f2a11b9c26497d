"""Name resolution from surface trees to core terms, and the checking session."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .. import syntax as C
from ..checker import Checker
from ..errors import Code, Diagnostic
from ..interval import B0, B1, BVar, BridgeEq, P0, P1, PVar, PathEq
from ..opsem import DEFAULT_FUEL, Definition, com
from ..syntax import close, fresh
from . import parser as P
from .printer import Printer

_CONSTS = {"U": C.U, "bool": C.Bool, "tt": C.TT, "ff": C.FF, "int": C.Int, "z2": C.Z2,
           "unit": C.Unit, "star": C.Star, "empty": C.Empty}

_SORT_WORD = {"p": "path dimension", "b": "bridge dimension", "t": "term variable"}


def _at(node, span):
    if span is not None:
        object.__setattr__(node, "span", span)
    return node


def _err(code, msg, span=None):
    return Diagnostic(code, msg, span)


@dataclass(frozen=True)
class Local:
    unique: str
    sort: str  # "t", "p" or "b"


class Elaborator:
    """Resolves names against local scope, then against known definitions.

    ``defs`` maps a definition name to the tuple of its dimension parameter
    sorts; leading arguments of a reference are consumed as dimensions.
    """

    def __init__(self, defs: Optional[dict] = None):
        self.defs = defs if defs is not None else {}

    # -- dims and constraints ---------------------------------------------

    def dim(self, s: P.S, scope: dict, sort: str):
        if isinstance(s, P.SNum):
            if s.value not in (0, 1):
                raise _err(Code.TypeMismatch, f"{s.value} is not a dimension", s.span)
            return (P0, P1)[s.value] if sort == "p" else (B0, B1)[s.value]
        if isinstance(s, P.SBConst):
            if sort == "p":
                raise _err(Code.TypeMismatch, "a bridge endpoint was given where a path dimension was expected", s.span)
            return (B0, B1)[s.bit]
        if isinstance(s, P.SName):
            loc = scope.get(s.name)
            if loc is None:
                raise _err(Code.UnboundVariable, f"unbound dimension {s.name}", s.span)
            if loc.sort != sort:
                raise _err(Code.TypeMismatch,
                           f"{s.name} is a {_SORT_WORD[loc.sort]}, expected a {_SORT_WORD[sort]}", s.span)
            return PVar(loc.unique) if sort == "p" else BVar(loc.unique)
        raise _err(Code.TypeMismatch, "expected a dimension", s.span)

    def _dim_sort(self, s, scope):
        if isinstance(s, P.SBConst):
            return "b"
        if isinstance(s, P.SName):
            loc = scope.get(s.name)
            if loc is not None and loc.sort in "pb":
                return loc.sort
        return None

    def constraint(self, lhs: P.S, rhs: P.S, scope: dict):
        sorts = {self._dim_sort(lhs, scope), self._dim_sort(rhs, scope)} - {None}
        if sorts == {"p", "b"}:
            raise _err(Code.TypeMismatch, "a constraint cannot relate a path and a bridge dimension", lhs.span)
        if "b" not in sorts:
            return PathEq(self.dim(lhs, scope, "p"), self.dim(rhs, scope, "p"))
        if self._is_const(rhs):
            return BridgeEq(self.dim(lhs, scope, "b"), self._bit(rhs))
        if self._is_const(lhs):
            return BridgeEq(self.dim(rhs, scope, "b"), self._bit(lhs))
        raise _err(Code.TypeMismatch, "bridge constraints compare a bridge variable with an endpoint", lhs.span)

    @staticmethod
    def _is_const(s):
        return isinstance(s, P.SBConst) or (isinstance(s, P.SNum) and s.value in (0, 1))

    @staticmethod
    def _bit(s):
        return s.bit if isinstance(s, P.SBConst) else s.value

    # -- binders -----------------------------------------------------------

    def bind(self, scope, names, sorts):
        scope = dict(scope)
        uniq = []
        for n, s in zip(names, sorts):
            u = fresh(n)
            scope[n] = Local(u, s)
            uniq.append(u)
        return scope, uniq

    def binder(self, s: P.S, scope: dict, sorts: str):
        """Elaborate a binder atom; a plain term is accepted as a constant family."""
        if not isinstance(s, P.SBinder):
            return self.term(s, scope), ("_",) * len(sorts)
        if len(s.names) != len(sorts):
            raise _err(Code.ParseError, f"expected a binder over {len(sorts)} variable(s), found {len(s.names)}", s.span)
        inner, uniq = self.bind(scope, s.names, sorts)
        return close(self.term(s.body, inner), uniq), tuple(s.names)

    # -- terms -------------------------------------------------------------

    def term(self, s: P.S, scope: dict) -> C.Term:
        return _at(self._term(s, scope), s.span)

    def _term(self, s, scope):
        if isinstance(s, P.SName):
            return self._name(s, scope, [])
        if isinstance(s, P.SNum):
            return C.IntLit(s.value)
        if isinstance(s, P.SBConst):
            raise _err(Code.TypeMismatch, "a bridge endpoint is not a term", s.span)
        if isinstance(s, P.SConst):
            return _CONSTS[s.kw]()
        if isinstance(s, P.SBinder):
            raise _err(Code.ParseError, "a binder is only allowed as an argument of a keyword form", s.span)
        if isinstance(s, P.SApp):
            spine = []
            head = s
            while isinstance(head, P.SApp):
                spine.append(head.arg)
                head = head.fn
            spine.reverse()
            if isinstance(head, P.SName):
                return self._name(head, scope, spine)
            out = self.term(head, scope)
            for arg in spine:
                out = C.App(out, self.term(arg, scope))
            return out
        if isinstance(s, P.SDimApp):
            fn = self.term(s.fn, scope)
            if s.bridge:
                return C.BApp(fn, self.dim(s.dim, scope, "b"))
            return C.PApp(fn, self.dim(s.dim, scope, "p"))
        if isinstance(s, P.SLam):
            return self._lam(s, scope)
        if isinstance(s, P.SPi):
            return self._pi(s.kind, s.tele, s.body, scope)
        if isinstance(s, P.SArrow):
            return C.Pi(self.term(s.dom, scope), self.term(s.cod, scope), "_")
        if isinstance(s, P.SProd):
            return C.Sigma(self.term(s.left, scope), self.term(s.right, scope), "_")
        if isinstance(s, P.SAdd):
            return C.Add(self.term(s.left, scope), self.term(s.right, scope))
        if isinstance(s, P.SAnn):
            return C.Ann(self.term(s.tm, scope), self.term(s.ty, scope))
        if isinstance(s, P.SPair):
            return C.Pair(self.term(s.fst, scope), self.term(s.snd, scope))
        if isinstance(s, P.SKw):
            return self._keyword(s, scope)
        raise _err(Code.ParseError, f"unexpected {type(s).__name__}", s.span)

    def _name(self, s: P.SName, scope, spine):
        loc = scope.get(s.name)
        if loc is not None:
            if loc.sort != "t":
                raise _err(Code.TypeMismatch, f"{s.name} is a {_SORT_WORD[loc.sort]}, not a term", s.span)
            out = _at(C.Var(loc.unique), s.span)
            args = spine
        elif s.name in self.defs:
            sorts = self.defs[s.name]
            if len(spine) < len(sorts):
                raise _err(Code.TypeMismatch,
                           f"{s.name} expects {len(sorts)} dimension arguments, got {len(spine)}", s.span)
            dims = tuple(self.dim(a, scope, k) for a, k in zip(spine, sorts))
            out = _at(C.Def(s.name, dims), s.span)
            args = spine[len(sorts):]
        else:
            raise _err(Code.UnboundVariable, f"unbound variable {s.name}", s.span)
        for a in args:
            out = _at(C.App(out, self.term(a, scope)), a.span)
        return out

    def _lam(self, s: P.SLam, scope):
        (name, ty), rest = s.binders[0], s.binders[1:]
        body = P.SLam(s.kind, rest, s.body, span=s.span) if rest else s.body
        sort = {"lam": "t", "plam": "p", "blam": "b"}[s.kind]
        dom = self.term(ty, scope) if ty is not None else None
        inner, (u,) = self.bind(scope, [name], sort)
        b = close(self.term(body, inner), [u])
        if sort == "t":
            return C.Lam(b, name, dom)
        return (C.PLam if sort == "p" else C.BLam)(b, name)

    def _pi(self, kind, tele, body, scope):
        (name, ty), rest = tele[0], tele[1:]
        dom = self.term(ty, scope)
        inner, (u,) = self.bind(scope, [name], "t")
        if rest:
            cod = _at(self._pi(kind, rest, body, inner), body.span)
        else:
            cod = self.term(body, inner)
        return (C.Pi if kind == "Pi" else C.Sigma)(dom, close(cod, [u]), name)

    def _keyword(self, s: P.SKw, scope):
        kw, args = s.kw, s.args
        t = lambda a: self.term(a, scope)
        d = lambda a, sort: self.dim(a, scope, sort)
        bind = lambda a, sorts: self.binder(a, scope, sorts)
        if kw in ("Path", "Bridge"):
            sort = "p" if kw == "Path" else "b"
            line, (x,) = bind(args[0], sort)
            return (C.PathT if kw == "Path" else C.BridgeT)(line, t(args[1]), t(args[2]), x)
        if kw == "Gel":
            rel, names = bind(args[3], "tt")
            return C.Gel(d(args[0], "b"), t(args[1]), t(args[2]), rel, names)
        if kw == "gel":
            return C.GelI(d(args[0], "b"), t(args[1]), t(args[2]), t(args[3]))
        if kw == "ungel":
            if not isinstance(args[0], P.SBinder):
                raise _err(Code.ParseError, "ungel expects a bridge binder (x. Q)", args[0].span)
            body, (x,) = bind(args[0], "b")
            return C.Ungel(body, x)
        if kw == "extent":
            ty, n1 = bind(args[2], "b")
            fam, n2 = bind(args[3], "bt")
            c0, n3 = bind(args[4], "t")
            c1, n4 = bind(args[5], "t")
            cb, n5 = bind(args[6], "ttt")
            return C.Extent(d(args[0], "b"), t(args[1]), ty, fam, c0, c1, cb, n1 + n2 + n3 + n4 + n5)
        if kw == "coe":
            line, (x,) = bind(args[0], "p")
            return C.Coe(line, d(args[1], "p"), d(args[2], "p"), t(args[3]), x)
        if kw == "hcom":
            return C.HCom(t(args[0]), d(args[1], "p"), d(args[2], "p"), t(args[3]),
                          self._system(args[4], scope))
        if kw == "com":
            line, _ = bind(args[0], "p")
            return com(line, d(args[1], "p"), d(args[2], "p"), t(args[3]), self._system(args[4], scope))
        if kw == "V":
            return C.V(d(args[0], "p"), t(args[1]), t(args[2]), t(args[3]))
        if kw == "Vin":
            return C.Vin(d(args[0], "p"), t(args[1]), t(args[2]))
        if kw == "Vproj":
            return C.Vproj(d(args[0], "p"), t(args[1]), t(args[2]))
        if kw == "if":
            mot, (a,) = bind(args[0], "t")
            return C.If(mot, t(args[1]), t(args[2]), t(args[3]), a)
        if kw == "z2elim":
            mot, n1 = bind(args[0], "t")
            qin, n2 = bind(args[2], "t")
            qmod, n3 = bind(args[3], "tp")
            return C.Z2Elim(mot, t(args[1]), qin, qmod, n1 + n2 + n3)
        if kw == "zin":
            return C.ZIn(t(args[0]))
        if kw == "zmod":
            return C.ZMod(t(args[0]), d(args[1], "p"))
        if kw == "abort":
            return C.Abort(t(args[0]), t(args[1]))
        if kw == "fst":
            return C.Fst(t(args[0]))
        if kw == "snd":
            return C.Snd(t(args[0]))
        raise _err(Code.ParseError, f"unknown keyword {kw}", s.span)

    def _system(self, sys: P.SSystem, scope):
        tubes = []
        for tb in sys.tubes:
            cond = self.constraint(tb.lhs, tb.rhs, scope)
            inner, (u,) = self.bind(scope, [tb.name], "p")
            tubes.append(C.Tube(cond, close(self.term(tb.body, inner), [u]), tb.name))
        return tuple(tubes)

    # -- declarations ------------------------------------------------------

    def decl(self, d: P.Decl):
        """Core pieces of a declaration: (name, dim params, type or None, body)."""
        scope: dict = {}
        dims, terms = [], []
        for p in d.params:
            if p.sort in "pb":
                if terms:
                    raise _err(Code.ParseError, "dimension parameters must precede term parameters", p.span)
                for n in p.names:
                    u = fresh(n)
                    scope[n] = Local(u, p.sort)
                    dims.append((u, p.sort))
            else:
                for n in p.names:
                    terms.append((n, p.type, p.span))
        if terms and d.type is None:
            raise _err(Code.CannotInfer, f"{d.name} has term parameters and needs a declared type", d.span)
        doms, uniq, inner = [], [], scope
        for n, ty, _ in terms:
            doms.append(self.term(ty, inner))
            inner, (u,) = self.bind(inner, [n], "t")
            uniq.append(u)
        ty = self.term(d.type, inner) if d.type is not None else None
        body = self.term(d.body, inner)
        for (n, _, span), dom, u in reversed(list(zip(terms, doms, uniq))):
            ty = _at(C.Pi(dom, close(ty, [u]), n), span)
            body = _at(C.Lam(close(body, [u]), n, dom), span)
        return d.name, tuple(dims), ty, body


@dataclass
class Result:
    name: str
    definition: Optional[Definition] = None
    error: Optional[Diagnostic] = None


@dataclass
class Session:
    """Checks declarations in order; a failed declaration is simply not added."""

    fuel: int = DEFAULT_FUEL
    checker: Checker = field(init=False)
    scope: dict = field(init=False, default_factory=dict)

    def __post_init__(self):
        self.printer = Printer()
        self.checker = Checker({}, self.fuel, printer=self.printer)
        self.elab = Elaborator(self.scope)

    @property
    def defs(self) -> dict:
        return self.checker.defs

    def add(self, d: P.Decl) -> Definition:
        try:
            if d.name in self.scope:
                raise _err(Code.DuplicateDefinition, f"{d.name} is already defined")
            name, params, ty, body = self.elab.decl(d)
            out = self.checker.check_definition(name, params, ty, body)
        except Diagnostic as e:
            raise e.with_span(d.span)
        self.scope[name] = tuple(sort for _, sort in params)
        self.printer.defs.add(name)
        return out

    def load(self, text: str) -> list[Result]:
        results = []
        for d in P.parse_file(text):
            try:
                results.append(Result(d.name, self.add(d)))
            except Diagnostic as e:
                results.append(Result(d.name, error=e))
        return results

    def term(self, text: str, dims=()) -> C.Term:
        """Elaborate a standalone term with the given free dimensions (name, sort)."""
        scope = {n: Local(n, s) for n, s in dims}
        return self.elab.term(P.parse_term(text), scope)
