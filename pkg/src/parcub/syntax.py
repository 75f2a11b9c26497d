"""Core terms in locally nameless form.

Every binder, whatever its sort, shifts the single index space by one.
Bound occurrences are ``Idx`` (terms), ``PIdx`` (path dims) and ``BIdx``
(bridge dims); free occurrences are ``Var``, ``PVar`` and ``BVar``. For a node
binding several variables at once, the last-bound variable has index 0.

Binder names are hints only: they never take part in equality, so ``==`` on
terms is alpha-equivalence. Spans are ignored by equality as well.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional, Sequence

from .errors import DiagonalSubstitution, Span
from .interval import (
    B0, B1, BConst, BIdx, BVar, BridgeDim, BridgeEq, Constr, Context, P0, P1,
    PConst, PIdx, PVar, PathDim, PathEq, TermVar, Constraint,
)


def _hint(default="_"):
    return field(default=default, compare=False)


@dataclass(frozen=True, slots=True, eq=False)
class Term:
    span: Optional[Span] = field(default=None, kw_only=True, compare=False, repr=False)
    _fv: Any = field(default=None, init=False, compare=False, repr=False)
    _tv: Any = field(default=None, init=False, compare=False, repr=False)
    _lb: Any = field(default=None, init=False, compare=False, repr=False)

    # (field, kind, number of binders); kinds: t term, o optional term,
    # p path dim, b bridge dim, d tuple of dims, s system
    _spec = ()

    def free_names(self) -> frozenset:
        if self._fv is None:
            _fill_caches(self)
        return self._fv

    def free_term_vars(self) -> frozenset:
        if self._tv is None:
            _fill_caches(self)
        return self._tv

    def loose_bound(self) -> int:
        """One more than the largest loose index (0 when locally closed)."""
        if self._lb is None:
            _fill_caches(self)
        return self._lb

    def subst_dims(self, mapping: dict) -> "Term":
        return subst_dims(self, mapping)


def node(*spec):
    def wrap(cls):
        cls = dataclass(frozen=True, slots=True)(cls)
        cls._spec = spec
        return cls
    return wrap


# ---------------------------------------------------------------------------
# term formers


@node()
class Var(Term):
    name: str


@node()
class Idx(Term):
    index: int


@node(("dims", "d", 0))
class Def(Term):
    name: str
    dims: tuple = ()


@node(("tm", "t", 0), ("ty", "t", 0))
class Ann(Term):
    tm: Term
    ty: Term


@node()
class U(Term):
    pass


@node(("dom", "t", 0), ("cod", "t", 1))
class Pi(Term):
    dom: Term
    cod: Term
    name: str = _hint()


@node(("body", "t", 1), ("dom", "o", 0))
class Lam(Term):
    body: Term
    name: str = _hint("a")
    dom: Optional[Term] = None


@node(("fn", "t", 0), ("arg", "t", 0))
class App(Term):
    fn: Term
    arg: Term


@node(("dom", "t", 0), ("cod", "t", 1))
class Sigma(Term):
    dom: Term
    cod: Term
    name: str = _hint()


@node(("fst", "t", 0), ("snd", "t", 0))
class Pair(Term):
    fst: Term
    snd: Term


@node(("pair", "t", 0))
class Fst(Term):
    pair: Term


@node(("pair", "t", 0))
class Snd(Term):
    pair: Term


@node(("line", "t", 1), ("lhs", "t", 0), ("rhs", "t", 0))
class PathT(Term):
    line: Term
    lhs: Term
    rhs: Term
    name: str = _hint()


@node(("body", "t", 1))
class PLam(Term):
    body: Term
    name: str = _hint("i")


@node(("fn", "t", 0), ("dim", "p", 0))
class PApp(Term):
    fn: Term
    dim: Any


@node(("line", "t", 1), ("lhs", "t", 0), ("rhs", "t", 0))
class BridgeT(Term):
    line: Term
    lhs: Term
    rhs: Term
    name: str = _hint()


@node(("body", "t", 1))
class BLam(Term):
    body: Term
    name: str = _hint("x")


@node(("fn", "t", 0), ("dim", "b", 0))
class BApp(Term):
    fn: Term
    dim: Any


@node(("dim", "b", 0), ("a0", "t", 0), ("a1", "t", 0), ("rel", "t", 2))
class Gel(Term):
    dim: Any
    a0: Term
    a1: Term
    rel: Term
    names: tuple = _hint(("a0", "a1"))


@node(("dim", "b", 0), ("m0", "t", 0), ("m1", "t", 0), ("wit", "t", 0))
class GelI(Term):
    dim: Any
    m0: Term
    m1: Term
    wit: Term


@node(("body", "t", 1))
class Ungel(Term):
    body: Term
    name: str = _hint("x")


@node(("dim", "b", 0), ("scrut", "t", 0), ("ty", "t", 1), ("fam", "t", 2),
      ("n0", "t", 1), ("n1", "t", 1), ("nb", "t", 3))
class Extent(Term):
    dim: Any
    scrut: Term
    ty: Term
    fam: Term
    n0: Term
    n1: Term
    nb: Term
    # hints: ty's x, fam's x and a, n0's a0, n1's a1, nb's a0 a1 aa
    names: tuple = _hint(("x", "x", "a", "a0", "a1", "a0", "a1", "aa"))


@node(("line", "t", 1), ("r", "p", 0), ("s", "p", 0), ("tm", "t", 0))
class Coe(Term):
    line: Term
    r: Any
    s: Any
    tm: Term
    name: str = _hint()


@dataclass(frozen=True, slots=True)
class Tube:
    cond: Constraint
    body: Term  # binds one path dimension
    name: str = _hint("y")


@node(("ty", "t", 0), ("r", "p", 0), ("s", "p", 0), ("cap", "t", 0), ("sys", "s", 0))
class HCom(Term):
    ty: Term
    r: Any
    s: Any
    cap: Term
    sys: tuple = ()


@node(("dim", "p", 0), ("a", "t", 0), ("b", "t", 0), ("iso", "t", 0))
class V(Term):
    dim: Any
    a: Term
    b: Term
    iso: Term


@node(("dim", "p", 0), ("m", "t", 0), ("n", "t", 0))
class Vin(Term):
    dim: Any
    m: Term
    n: Term


@node(("dim", "p", 0), ("tm", "t", 0), ("iso", "t", 0))
class Vproj(Term):
    dim: Any
    tm: Term
    iso: Term


@node()
class Bool(Term):
    pass


@node()
class TT(Term):
    pass


@node()
class FF(Term):
    pass


@node(("motive", "t", 1), ("scrut", "t", 0), ("tcase", "t", 0), ("fcase", "t", 0))
class If(Term):
    motive: Term
    scrut: Term
    tcase: Term
    fcase: Term
    name: str = _hint()


@node()
class Int(Term):
    pass


@node()
class IntLit(Term):
    value: int


@node(("lhs", "t", 0), ("rhs", "t", 0))
class Add(Term):
    lhs: Term
    rhs: Term


@node()
class Z2(Term):
    pass


@node(("n", "t", 0))
class ZIn(Term):
    n: Term


@node(("n", "t", 0), ("dim", "p", 0))
class ZMod(Term):
    n: Term
    dim: Any


@node(("motive", "t", 1), ("scrut", "t", 0), ("qin", "t", 1), ("qmod", "t", 2))
class Z2Elim(Term):
    motive: Term
    scrut: Term
    qin: Term
    qmod: Term
    names: tuple = _hint(("a", "n", "n", "x"))


@node()
class Unit(Term):
    pass


@node()
class Star(Term):
    pass


@node()
class Empty(Term):
    pass


@node(("ty", "t", 0), ("tm", "t", 0))
class Abort(Term):
    ty: Term
    tm: Term


UNIV, BOOL, TRUE, FALSE, INT, Z2T, UNIT, STAR, EMPTY = U(), Bool(), TT(), FF(), Int(), Z2(), Unit(), Star(), Empty()
BASE_TYPES = (Bool, Int, Z2, Unit, Empty)


# ---------------------------------------------------------------------------
# generic traversal


def _map_dim_constraint(c, fd, k):
    if isinstance(c, PathEq):
        l, r = fd(c.lhs, k), fd(c.rhs, k)
        if l is c.lhs and r is c.rhs:
            return c
        return PathEq(l, r)
    l = fd(c.lhs, k)
    return c if l is c.lhs else BridgeEq(l, c.bit)


def map_children(t: Term, k: int, ft: Callable, fd: Callable) -> Term:
    """Rebuild ``t`` with ``ft(child, depth)`` on subterms and ``fd(dim, depth)`` on dims."""
    changes = None
    for f, kind, nb in t._spec:
        v = getattr(t, f)
        if kind == "t":
            nv = ft(v, k + nb)
        elif kind == "o":
            nv = None if v is None else ft(v, k + nb)
        elif kind in "pb":
            nv = fd(v, k)
        elif kind == "d":
            new = tuple(fd(d, k) for d in v)
            nv = v if all(a is b for a, b in zip(new, v)) else new
        else:  # system
            new = []
            same = True
            for tube in v:
                c = _map_dim_constraint(tube.cond, fd, k)
                b = ft(tube.body, k + 1)
                if c is tube.cond and b is tube.body:
                    new.append(tube)
                else:
                    same = False
                    new.append(Tube(c, b, tube.name))
            nv = v if same else tuple(new)
        if nv is not v:
            if changes is None:
                changes = {}
            changes[f] = nv
    if changes is None:
        return t
    return _copy_with(t, changes)


def _copy_with(t: Term, changes: dict) -> Term:
    cls = type(t)
    new = object.__new__(cls)
    for f in cls.__dataclass_fields__:
        object.__setattr__(new, f, changes[f] if f in changes else getattr(t, f))
    object.__setattr__(new, "_fv", None)
    object.__setattr__(new, "_tv", None)
    object.__setattr__(new, "_lb", None)
    return new


def children(t: Term):
    """Yield (field, kind, nbinders, value) for every child slot of ``t``."""
    for f, kind, nb in t._spec:
        yield f, kind, nb, getattr(t, f)


def _dim_name(d):
    return d.name if isinstance(d, (PVar, BVar)) else None


def _fill_caches(t: Term):
    if isinstance(t, Var):
        fv, tv, lb = frozenset((t.name,)), frozenset((t.name,)), 0
    elif isinstance(t, Idx):
        fv, tv, lb = frozenset(), frozenset(), t.index + 1
    else:
        names, tvars, lb = set(), set(), 0

        def dim(d, depth):
            nonlocal lb
            if isinstance(d, (PVar, BVar)):
                names.add(d.name)
            elif isinstance(d, (PIdx, BIdx)):
                lb = max(lb, d.index + 1 - depth)

        for f, kind, nb, v in children(t):
            if kind == "t" or (kind == "o" and v is not None):
                names.update(v.free_names())
                tvars.update(v.free_term_vars())
                lb = max(lb, v.loose_bound() - nb)
            elif kind in "pb":
                dim(v, 0)
            elif kind == "d":
                for d in v:
                    dim(d, 0)
            elif kind == "s":
                for tube in v:
                    for d in (tube.cond.lhs, tube.cond.rhs) if isinstance(tube.cond, PathEq) else (tube.cond.lhs,):
                        dim(d, 0)
                    names.update(tube.body.free_names())
                    tvars.update(tube.body.free_term_vars())
                    lb = max(lb, tube.body.loose_bound() - 1)
        fv, tv = frozenset(names), frozenset(tvars)
    object.__setattr__(t, "_fv", fv)
    object.__setattr__(t, "_tv", tv)
    object.__setattr__(t, "_lb", lb)


# ---------------------------------------------------------------------------
# opening and closing binders


def instantiate(body: Term, vals: Sequence, k: int = 0) -> Term:
    """Replace the ``len(vals)`` outermost loose indices of ``body``.

    ``vals`` lists replacements from the outermost binder to the innermost,
    i.e. ``vals[-1]`` replaces index ``k``. Replacements must be locally
    closed terms or interval terms, matching the sort of the binder.
    """
    n = len(vals)
    if n == 0:
        return body

    def dim(d, depth):
        if isinstance(d, (PIdx, BIdx)) and depth <= d.index < depth + n:
            v = vals[n - 1 - (d.index - depth)]
            if isinstance(v, Term):
                raise TypeError(f"dimension binder instantiated with a term {v!r}")
            return v
        return d

    def go(t, depth):
        if t.loose_bound() <= depth:
            return t
        if isinstance(t, Idx):
            if depth <= t.index < depth + n:
                v = vals[n - 1 - (t.index - depth)]
                if not isinstance(v, Term):
                    raise TypeError(f"term binder instantiated with a dimension {v!r}")
                return v
            return t
        return map_children(t, depth, go, dim)

    return go(body, k)


def close(t: Term, names: Sequence[str], k: int = 0) -> Term:
    """Bind the free names ``names`` (outermost first) as loose indices."""
    n = len(names)
    if n == 0:
        return t
    pos = {nm: i for i, nm in enumerate(names)}

    def dim(d, depth):
        if isinstance(d, PVar) and d.name in pos:
            return PIdx(depth + n - 1 - pos[d.name])
        if isinstance(d, BVar) and d.name in pos:
            return BIdx(depth + n - 1 - pos[d.name])
        return d

    def go(u, depth):
        if pos.keys().isdisjoint(u.free_names()):
            return u
        if isinstance(u, Var):
            return Idx(depth + n - 1 - pos[u.name], span=u.span)
        return map_children(u, depth, go, dim)

    return go(t, k)


# ---------------------------------------------------------------------------
# substitution


def subst(t: Term, env: dict) -> Term:
    """Simultaneously replace free names by locally closed terms or interval terms.

    Term variables map to terms, dimension variables to interval terms. No
    apartness check is made here; see ``subst_bridge``.
    """
    if not env:
        return t
    keys = env.keys()

    def dim(d, depth):
        if isinstance(d, (PVar, BVar)):
            return env.get(d.name, d)
        return d

    def go(u, depth):
        if keys.isdisjoint(u.free_names()):
            return u
        if isinstance(u, Var):
            v = env.get(u.name, u)
            if not isinstance(v, Term):
                raise TypeError(f"term variable {u.name} substituted by a dimension")
            return v
        return map_children(u, depth, go, dim)

    return go(t, 0)


def subst_term(m: Term, n: Term, a: str) -> Term:
    return subst(m, {a: n})


def subst_path(m: Term, r, x: str) -> Term:
    return subst(m, {x: r})


def subst_bridge(m: Term, r, x: str) -> Term:
    """Fresh substitution of the bridge term ``r`` for ``x`` in ``m``."""
    if isinstance(r, BVar) and r.name != x and r.name in m.free_names():
        raise DiagonalSubstitution(
            f"substituting bridge variable {r.name} for {x} would identify two bridge variables")
    return subst(m, {x: r})


def subst_dims(m: Term, mapping: dict) -> Term:
    """Simultaneous interval substitution with the affine check on bridge variables."""
    fv = m.free_names()
    live = {x: r for x, r in mapping.items() if x in fv}
    seen = {}
    for x, r in live.items():
        if isinstance(r, BVar) and r.name != x:
            if r.name in fv and r.name not in live:
                raise DiagonalSubstitution(
                    f"substituting bridge variable {r.name} for {x} would identify two bridge variables")
            if r.name in seen:
                raise DiagonalSubstitution(
                    f"bridge variables {seen[r.name]} and {x} both sent to {r.name}")
            seen[r.name] = x
        elif isinstance(r, BVar):
            seen[r.name] = x
    return subst(m, live)


@dataclass(frozen=True)
class Binder:
    """A term with one loose index 0, paired with its name hint."""

    body: Term
    name: str = "x"

    def instantiate(self, v) -> Term:
        return instantiate(self.body, [v])


def abstract_bridge(m: Term, x: str) -> Binder:
    return Binder(close(m, [x]), x)


def alpha_eq(m: Term, n: Term) -> bool:
    return m == n


# ---------------------------------------------------------------------------
# fresh names

_counter = itertools.count()


def fresh(hint: str = "v") -> str:
    base = hint.split("#", 1)[0] or "v"
    if base == "_":
        base = "v"
    return f"{base}#{next(_counter)}"


def base_name(name: str) -> str:
    return name.split("#", 1)[0]


# ---------------------------------------------------------------------------
# binder-friendly constructors (bodies given with free names)


def lam(x: str, body: Term, dom: Optional[Term] = None) -> Lam:
    return Lam(close(body, [x]), base_name(x), dom)


def pi(x: str, dom: Term, cod: Term) -> Pi:
    return Pi(dom, close(cod, [x]), base_name(x))


def arrow(dom: Term, cod: Term) -> Pi:
    return Pi(dom, cod, "_")


def sigma(x: str, dom: Term, cod: Term) -> Sigma:
    return Sigma(dom, close(cod, [x]), base_name(x))


def prod(a: Term, b: Term) -> Sigma:
    return Sigma(a, b, "_")


def plam(x: str, body: Term) -> PLam:
    return PLam(close(body, [x]), base_name(x))


def blam(x: str, body: Term) -> BLam:
    return BLam(close(body, [x]), base_name(x))


def path_t(x: str, line: Term, lhs: Term, rhs: Term) -> PathT:
    return PathT(close(line, [x]), lhs, rhs, base_name(x))


def const_path(a: Term, lhs: Term, rhs: Term) -> PathT:
    return PathT(a, lhs, rhs, "_")


def bridge_t(x: str, line: Term, lhs: Term, rhs: Term) -> BridgeT:
    return BridgeT(close(line, [x]), lhs, rhs, base_name(x))


def const_bridge(a: Term, lhs: Term, rhs: Term) -> BridgeT:
    return BridgeT(a, lhs, rhs, "_")


def gel(r, a0: Term, a1: Term, x0: str, x1: str, rel: Term) -> Gel:
    return Gel(r, a0, a1, close(rel, [x0, x1]), (base_name(x0), base_name(x1)))


def ungel(x: str, body: Term) -> Ungel:
    return Ungel(close(body, [x]), base_name(x))


def coe(x: str, line: Term, r, s, m: Term) -> Coe:
    return Coe(close(line, [x]), r, s, m, base_name(x))


def tube(cond: Constraint, y: str, body: Term) -> Tube:
    return Tube(cond, close(body, [y]), base_name(y))


def if_(a: str, motive: Term, scrut: Term, t: Term, f: Term) -> If:
    return If(close(motive, [a]), scrut, t, f, base_name(a))


def extent(r, m: Term, x: str, a_ty: Term, xb: str, ab: str, b_ty: Term,
           a0: str, n0: Term, a1: str, n1: Term, c0: str, c1: str, cc: str, nb: Term) -> Extent:
    return Extent(r, m, close(a_ty, [x]), close(b_ty, [xb, ab]), close(n0, [a0]), close(n1, [a1]),
                  close(nb, [c0, c1, cc]),
                  tuple(base_name(n) for n in (x, xb, ab, a0, a1, c0, c1, cc)))


def z2elim(a: str, motive: Term, scrut: Term, n: str, qin: Term, n2: str, x: str, qmod: Term) -> Z2Elim:
    return Z2Elim(close(motive, [a]), scrut, close(qin, [n]), close(qmod, [n2, x]),
                  tuple(base_name(v) for v in (a, n, n2, x)))


def open_binder(body: Term, hint: str, mk=Var) -> tuple[str, Term]:
    """Open a one-variable binder at a fresh name; ``mk`` builds the occurrence."""
    x = fresh(hint)
    return x, instantiate(body, [mk(x)])


def iso_type(a: Term, b: Term) -> Term:
    """Bi-invertible maps from ``a`` to ``b`` (used for V types)."""
    f, g, x, y = fresh("f"), fresh("g"), fresh("a"), fresh("b")
    fv, gv = Var(f), Var(g)
    left = sigma(g, arrow(b, a), pi(x, a, const_path(a, App(gv, App(fv, Var(x))), Var(x))))
    right = sigma(g, arrow(b, a), pi(y, b, const_path(b, App(fv, App(gv, Var(y))), Var(y))))
    return sigma(f, arrow(a, b), prod(left, right))


def strip_ann(t: Term) -> Term:
    while isinstance(t, Ann):
        t = t.tm
    return t


def iter_subterms(t: Term):
    """Pre-order iteration over subterms (binder bodies included, unopened)."""
    stack = [t]
    while stack:
        u = stack.pop()
        yield u
        for f, kind, nb, v in children(u):
            if kind == "t" or (kind == "o" and v is not None):
                stack.append(v)
            elif kind == "s":
                stack.extend(tb.body for tb in v)
