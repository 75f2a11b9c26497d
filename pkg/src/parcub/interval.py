"""Dimension algebra for the path interval (structural) and the bridge interval (affine).

Interval terms are either endpoints, free variables (by name) or bound indices.
Bound indices only occur inside terms of the core syntax; every operation in
this module assumes locally closed input unless stated otherwise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Optional, Union


# ---------------------------------------------------------------------------
# interval terms


@dataclass(frozen=True, slots=True)
class PConst:
    bit: int

    def __repr__(self):
        return f"P{self.bit}"


@dataclass(frozen=True, slots=True)
class PVar:
    name: str

    def __repr__(self):
        return f"PVar({self.name})"


@dataclass(frozen=True, slots=True)
class PIdx:
    index: int


@dataclass(frozen=True, slots=True)
class BConst:
    bit: int

    def __repr__(self):
        return f"B{self.bit}"


@dataclass(frozen=True, slots=True)
class BVar:
    name: str

    def __repr__(self):
        return f"BVar({self.name})"


@dataclass(frozen=True, slots=True)
class BIdx:
    index: int


P0, P1 = PConst(0), PConst(1)
B0, B1 = BConst(0), BConst(1)

PathTerm = Union[PConst, PVar, PIdx]
BridgeTerm = Union[BConst, BVar, BIdx]
DimTerm = Union[PathTerm, BridgeTerm]

PATH_TYPES = (PConst, PVar, PIdx)
BRIDGE_TYPES = (BConst, BVar, BIdx)
CONST_TYPES = (PConst, BConst)
VAR_TYPES = (PVar, BVar)


def is_path(r) -> bool:
    return isinstance(r, PATH_TYPES)


def is_bridge(r) -> bool:
    return isinstance(r, BRIDGE_TYPES)


def pconst(bit: int) -> PConst:
    return P1 if bit else P0


def bconst(bit: int) -> BConst:
    return B1 if bit else B0


# ---------------------------------------------------------------------------
# constraints


@dataclass(frozen=True, slots=True)
class PathEq:
    lhs: PathTerm
    rhs: PathTerm

    def __post_init__(self):
        if not (is_path(self.lhs) and is_path(self.rhs)):
            raise TypeError(f"PathEq needs path terms, got {self.lhs!r}, {self.rhs!r}")


@dataclass(frozen=True, slots=True)
class BridgeEq:
    lhs: BridgeTerm
    bit: int

    def __post_init__(self):
        if not is_bridge(self.lhs):
            raise TypeError(f"BridgeEq needs a bridge term, got {self.lhs!r}")
        if self.bit not in (0, 1):
            raise TypeError("BridgeEq compares against an endpoint 0 or 1")


Constraint = Union[PathEq, BridgeEq]

FALSE_CONSTRAINT = PathEq(P0, P1)


def constraint_dims(c: Constraint) -> tuple:
    if isinstance(c, PathEq):
        return (c.lhs, c.rhs)
    return (c.lhs,)


def constraint_names(c: Constraint) -> set:
    return {d.name for d in constraint_dims(c) if isinstance(d, VAR_TYPES)}


def forall_x(x: str | BVar, c: Constraint) -> Constraint:
    """The constraint that holds for every value of the bridge variable x."""
    name = x.name if isinstance(x, BVar) else x
    if isinstance(c, BridgeEq) and isinstance(c.lhs, BVar) and c.lhs.name == name:
        return BridgeEq(B0, 1)
    return c


# ---------------------------------------------------------------------------
# contexts


@dataclass(frozen=True, slots=True)
class TermVar:
    name: str
    type: Any


@dataclass(frozen=True, slots=True)
class PathDim:
    name: str


@dataclass(frozen=True, slots=True)
class BridgeDim:
    name: str


@dataclass(frozen=True, slots=True)
class Constr:
    constraint: Constraint


Entry = Union[TermVar, PathDim, BridgeDim, Constr]


class Status(enum.Enum):
    TRUE = "True"
    FALSE = "False"
    UNDETERMINED = "Undetermined"


class Context:
    """An ordered telescope of term variables, dimensions and constraints.

    ``hidden`` records names that were removed by restriction; looking one of
    them up is an apartness failure rather than an unbound name.
    """

    __slots__ = ("entries", "_pos", "hidden", "_unifier")

    def __init__(self, entries: Iterable[Entry] = (), hidden: frozenset = frozenset()):
        self.entries = tuple(entries)
        self._pos = {}
        for i, e in enumerate(self.entries):
            if not isinstance(e, Constr):
                self._pos[e.name] = i
        self.hidden = hidden
        self._unifier = None

    def __len__(self):
        return len(self.entries)

    def __iter__(self) -> Iterator[Entry]:
        return iter(self.entries)

    def __repr__(self):
        return f"Context({list(self.entries)!r})"

    def __eq__(self, other):
        return isinstance(other, Context) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def extend(self, *entries: Entry) -> "Context":
        return Context(self.entries + tuple(entries), self.hidden)

    def with_term(self, name: str, ty) -> "Context":
        return self.extend(TermVar(name, ty))

    def with_path(self, name: str) -> "Context":
        return self.extend(PathDim(name))

    def with_bridge(self, name: str) -> "Context":
        return self.extend(BridgeDim(name))

    def with_constraints(self, cs: Iterable[Constraint]) -> "Context":
        return self.extend(*(Constr(c) for c in cs))

    def position(self, name: str) -> Optional[int]:
        return self._pos.get(name)

    def lookup(self, name: str) -> Optional[Entry]:
        i = self._pos.get(name)
        return None if i is None else self.entries[i]

    def constraints(self) -> list:
        return [e.constraint for e in self.entries if isinstance(e, Constr)]

    def dims(self) -> list:
        return [e for e in self.entries if isinstance(e, (PathDim, BridgeDim))]

    def map_types(self, fn) -> "Context":
        out = []
        for e in self.entries:
            if isinstance(e, TermVar) and e.type is not None:
                out.append(TermVar(e.name, fn(e.type)))
            else:
                out.append(e)
        return Context(out, self.hidden)

    def unifier(self):
        """Most general solution of the context's constraints (cached).

        Returns None when the constraints are inconsistent, else a dict from
        variable names to the dimension term they are identified with.
        """
        if self._unifier is None:
            self._unifier = (solve(self.constraints(), self._order()),)
        return self._unifier[0]

    def _order(self) -> dict:
        return {e.name: i for i, e in enumerate(self.entries) if isinstance(e, (PathDim, BridgeDim))}

    def is_consistent(self) -> bool:
        return self.unifier() is not None


# ---------------------------------------------------------------------------
# restriction


def restrict(ctx: Context, r: BridgeTerm) -> tuple[Context, tuple[int, ...]]:
    """The part of ``ctx`` apart from ``r``, with the embedding of positions back into ``ctx``."""
    if isinstance(r, BConst):
        return ctx, tuple(range(len(ctx)))
    if not isinstance(r, BVar):
        raise TypeError(f"restriction expects a bridge term, got {r!r}")
    k = ctx.position(r.name)
    if k is None or not isinstance(ctx.entries[k], BridgeDim):
        raise KeyError(f"bridge variable {r.name} is not bound in the context")
    sigma = ctx.unifier()
    if sigma is None or isinstance(sigma.get(r.name), BConst):
        # r is judgmentally an endpoint, which is apart from everything
        return ctx, tuple(range(len(ctx)))
    kept = list(range(k))
    dropped = {r.name}
    for i in range(k + 1, len(ctx.entries)):
        e = ctx.entries[i]
        if isinstance(e, TermVar):
            dropped.add(e.name)
        elif isinstance(e, Constr) and r.name in constraint_names(e.constraint):
            continue
        else:
            kept.append(i)
    out = Context([ctx.entries[i] for i in kept], ctx.hidden | frozenset(dropped))
    return out, tuple(kept)


def apart(t, x: str | BVar) -> bool:
    """True iff the bridge variable x does not occur free in t (a dimension or a term)."""
    name = x.name if isinstance(x, BVar) else x
    if isinstance(t, (BConst, PConst, PVar, PIdx, BIdx)):
        return True
    if isinstance(t, BVar):
        return t.name != name
    if isinstance(t, (PathEq, BridgeEq)):
        return name not in constraint_names(t)
    return name not in t.free_names()


# ---------------------------------------------------------------------------
# constraint solving


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, a):
        self.parent.setdefault(a, a)
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def _key(d) -> tuple:
    if isinstance(d, PConst):
        return ("c", d.bit)
    if isinstance(d, PVar):
        return ("p", d.name)
    raise TypeError(f"unexpected path term {d!r}")


def solve(constraints: Iterable[Constraint], order: Optional[dict] = None):
    """Compute the most general unifier of a conjunction of constraints.

    Path variables in one class are mapped to the class's constant if it has
    one, otherwise to its earliest-declared variable (per ``order``). Bridge
    variables are mapped to constants. Returns None if the constraints are
    inconsistent.
    """
    order = order or {}
    uf = _UnionFind()
    bridge: dict = {}
    for c in constraints:
        if isinstance(c, PathEq):
            uf.union(_key(c.lhs), _key(c.rhs))
        else:
            lhs = c.lhs
            if isinstance(lhs, BConst):
                if lhs.bit != c.bit:
                    return None
            elif isinstance(lhs, BVar):
                prev = bridge.get(lhs.name)
                if prev is not None and prev != c.bit:
                    return None
                bridge[lhs.name] = c.bit
            else:
                raise TypeError("cannot solve constraints over bound indices")
    if uf.find(("c", 0)) == uf.find(("c", 1)):
        return None
    classes: dict = {}
    for k in list(uf.parent):
        classes.setdefault(uf.find(k), []).append(k)
    sigma: dict = {}
    for members in classes.values():
        consts = [m for m in members if m[0] == "c"]
        vars_ = [m[1] for m in members if m[0] == "p"]
        if consts:
            target = pconst(consts[0][1])
        else:
            rep = min(vars_, key=lambda n: (order.get(n, len(order) + 1), n))
            target = PVar(rep)
        for v in vars_:
            if target != PVar(v):
                sigma[v] = target
    for name, bit in bridge.items():
        sigma[name] = bconst(bit)
    return sigma


def apply_dim(sigma: dict, d):
    if isinstance(d, (PVar, BVar)):
        return sigma.get(d.name, d)
    return d


def apply_constraint(sigma: dict, c: Constraint) -> Constraint:
    if isinstance(c, PathEq):
        return PathEq(apply_dim(sigma, c.lhs), apply_dim(sigma, c.rhs))
    return BridgeEq(apply_dim(sigma, c.lhs), c.bit)


def constraint_status(ctx: Context | Iterable[Constraint], c: Constraint) -> Status:
    """Decide c from the equivalence closure of the context's constraints."""
    if isinstance(ctx, Context):
        sigma = ctx.unifier()
    else:
        sigma = solve(list(ctx))
    if sigma is None:
        return Status.TRUE
    c = apply_constraint(sigma, c)
    if isinstance(c, PathEq):
        if c.lhs == c.rhs:
            return Status.TRUE
        if isinstance(c.lhs, PConst) and isinstance(c.rhs, PConst):
            return Status.FALSE
        return Status.UNDETERMINED
    if isinstance(c.lhs, BConst):
        return Status.TRUE if c.lhs.bit == c.bit else Status.FALSE
    return Status.UNDETERMINED


def closed_status(c: Constraint) -> Status:
    """Status of a constraint in a context without constraint hypotheses."""
    return constraint_status((), c)


# ---------------------------------------------------------------------------
# interval contexts and substitutions


@dataclass(frozen=True)
class IntervalCtx:
    entries: tuple  # of PathDim | BridgeDim

    @staticmethod
    def of(*entries) -> "IntervalCtx":
        return IntervalCtx(tuple(entries))

    def names(self) -> list:
        return [e.name for e in self.entries]

    def path_names(self) -> list:
        return [e.name for e in self.entries if isinstance(e, PathDim)]

    def bridge_names(self) -> list:
        return [e.name for e in self.entries if isinstance(e, BridgeDim)]

    def as_context(self) -> Context:
        return Context(self.entries)


class AffineViolation(ValueError):
    """A substitution would identify two bridge variables."""


@dataclass(frozen=True)
class IntervalSubst:
    """Simultaneous substitution of interval terms for variables.

    Variables outside the domain are left alone. Distinct bridge variables are
    never sent to the same bridge variable.
    """

    mapping: tuple = field(default=())  # ((name, DimTerm), ...)

    def __post_init__(self):
        seen = {}
        for name, t in self.mapping:
            if isinstance(t, BVar):
                if t.name in seen and seen[t.name] != name:
                    raise AffineViolation(
                        f"bridge variables {seen[t.name]} and {name} both sent to {t.name}")
                seen[t.name] = name
            if not isinstance(t, (PConst, PVar, BConst, BVar)):
                raise TypeError(f"substitution image must be an interval term, got {t!r}")
        names = [n for n, _ in self.mapping]
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable in substitution")

    @staticmethod
    def of(pairs: dict | Iterable) -> "IntervalSubst":
        items = pairs.items() if isinstance(pairs, dict) else pairs
        return IntervalSubst(tuple(items))

    @staticmethod
    def identity() -> "IntervalSubst":
        return IntervalSubst(())

    def as_dict(self) -> dict:
        return dict(self.mapping)

    def domain(self) -> list:
        return [n for n, _ in self.mapping]

    def apply_dim(self, d):
        return apply_dim(self.as_dict(), d)

    def apply_constraint(self, c: Constraint) -> Constraint:
        return apply_constraint(self.as_dict(), c)

    def apply(self, t):
        """Act on a dimension, a constraint, or a term of the core syntax."""
        if isinstance(t, (PConst, PVar, PIdx, BConst, BVar, BIdx)):
            return self.apply_dim(t)
        if isinstance(t, (PathEq, BridgeEq)):
            return self.apply_constraint(t)
        return t.subst_dims(self.as_dict())

    def __repr__(self):
        inner = ", ".join(f"{t!r}/{n}" for n, t in self.mapping)
        return f"<{inner}>"


def compose_subst(outer: IntervalSubst, inner: IntervalSubst) -> IntervalSubst:
    """The substitution acting as ``inner`` followed by ``outer``."""
    o = outer.as_dict()
    out = {}
    for name, t in inner.mapping:
        out[name] = apply_dim(o, t)
    for name, t in outer.mapping:
        if name not in out:
            out[name] = t
    # drop identity entries so that unit laws hold on the nose
    pairs = [(n, t) for n, t in out.items() if not (isinstance(t, (PVar, BVar)) and t.name == n)]
    return IntervalSubst(tuple(pairs))
