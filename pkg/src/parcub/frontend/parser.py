"""Recursive-descent parser producing a name-carrying surface tree."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..errors import Code, Diagnostic, Span
from .lexer import Token, tokenize


# ---------------------------------------------------------------------------
# surface syntax


@dataclass
class S:
    span: Optional[Span] = field(default=None, kw_only=True, compare=False)


@dataclass
class SName(S):
    name: str


@dataclass
class SNum(S):
    value: int


@dataclass
class SBConst(S):
    """An explicit bridge endpoint ``#0`` / ``#1``."""
    bit: int


@dataclass
class SConst(S):
    """A nullary keyword: U, bool, tt, ff, int, z2, unit, star, empty."""
    kw: str


@dataclass
class SBinder(S):
    """A binder atom ``(x. y. body)``."""
    names: list
    body: S


@dataclass
class SApp(S):
    fn: S
    arg: S


@dataclass
class SDimApp(S):
    fn: S
    dim: S
    bridge: bool


@dataclass
class SLam(S):
    kind: str  # lam / plam / blam
    binders: list  # of (name, type or None)
    body: S


@dataclass
class SPi(S):
    kind: str  # Pi / Sig
    tele: list  # of (name, type)
    body: S


@dataclass
class SArrow(S):
    dom: S
    cod: S


@dataclass
class SProd(S):
    left: S
    right: S


@dataclass
class SAdd(S):
    left: S
    right: S


@dataclass
class SAnn(S):
    tm: S
    ty: S


@dataclass
class SPair(S):
    fst: S
    snd: S


@dataclass
class STube(S):
    lhs: S
    rhs: S
    name: str
    body: S


@dataclass
class SSystem(S):
    tubes: list


@dataclass
class SKw(S):
    kw: str
    args: list


@dataclass
class Param:
    names: list
    sort: str  # "p", "b" or "t"
    type: Optional[S]
    span: Optional[Span] = None


@dataclass
class Decl:
    name: str
    params: list
    type: Optional[S]
    body: S
    span: Span


NULLARY = {"U", "bool", "tt", "ff", "int", "z2", "unit", "star", "empty"}

# keyword -> shapes of its arguments: d dim, a atom, s system
ARITY = {
    "Path": "aaa", "Bridge": "aaa", "Gel": "daaa", "gel": "daaa", "ungel": "a",
    "extent": "daaaaaa", "coe": "adda", "hcom": "addas", "com": "addas",
    "V": "daaa", "Vin": "daa", "Vproj": "daa", "if": "aaaa", "z2elim": "aaaa",
    "zin": "a", "zmod": "ad", "abort": "aa", "fst": "a", "snd": "a",
}


class Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, kind, text=None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def at_sym(self, text) -> bool:
        return self.at("sym", text)

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def fail(self, expected) -> Diagnostic:
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        exp = ", ".join(sorted(expected))
        return Diagnostic(Code.ParseError, f"expected one of {{{exp}}}, found {found}", t.span)

    def expect_sym(self, text) -> Token:
        if not self.at_sym(text):
            raise self.fail({repr(text)})
        return self.advance()

    def expect_name(self) -> Token:
        if not self.at("ident"):
            raise self.fail({"identifier"})
        return self.advance()

    def expect_eof(self):
        if not self.at("eof"):
            raise self.fail({"end of input"})

    # -- declarations ------------------------------------------------------

    def file(self) -> list[Decl]:
        decls = []
        while not self.at("eof"):
            decls.append(self.decl())
        return decls

    def decl(self) -> Decl:
        if not self.at("kw", "def"):
            raise self.fail({"def"})
        start = self.advance().span
        name = self.expect_name().text
        params = []
        while self.at_sym("("):
            params.append(self.param())
        ty = None
        if self.at_sym(":"):
            self.advance()
            ty = self.term()
        self.expect_sym("=")
        body = self.term()
        return Decl(name, params, ty, body, start)

    def param(self) -> Param:
        start = self.expect_sym("(").span
        names = [self.binder_name()]
        while self.at("ident"):
            names.append(self.binder_name())
        self.expect_sym(":")
        if self.at("ident", "I") and self.peek().kind == "sym" and self.peek().text == ")":
            self.advance()
            sort, ty = "p", None
        elif self.at_sym("#I"):
            self.advance()
            sort, ty = "b", None
        else:
            sort, ty = "t", self.term()
        self.expect_sym(")")
        return Param(names, sort, ty, start)

    def binder_name(self) -> str:
        if not self.at("ident"):
            raise self.fail({"identifier"})
        return self.advance().text

    # -- terms -------------------------------------------------------------

    def term(self) -> S:
        t = self.tok
        if t.kind == "kw" and t.text in ("lam", "plam", "blam"):
            return self.lam()
        if t.kind == "kw" and t.text in ("Pi", "Sig"):
            return self.pi()
        return self.arrow()

    def lam(self) -> S:
        kw = self.advance()
        binders = []
        if kw.text == "lam" and self.at_sym("("):
            while self.at_sym("("):
                self.advance()
                names = [self.binder_name()]
                while self.at("ident"):
                    names.append(self.binder_name())
                self.expect_sym(":")
                ty = self.term()
                self.expect_sym(")")
                binders.extend((n, ty) for n in names)
        else:
            binders.append((self.binder_name(), None))
            while self.at("ident"):
                binders.append((self.binder_name(), None))
        self.expect_sym(".")
        body = self.term()
        return SLam(kw.text, binders, body, span=kw.span)

    def pi(self) -> S:
        kw = self.advance()
        tele = []
        if not self.at_sym("("):
            raise self.fail({"'('"})
        while self.at_sym("(") and self.peek().kind == "ident" and self._is_tele_entry():
            self.advance()
            names = [self.binder_name()]
            while self.at("ident"):
                names.append(self.binder_name())
            self.expect_sym(":")
            ty = self.term()
            self.expect_sym(")")
            tele.extend((n, ty) for n in names)
        if not tele:
            raise self.fail({"telescope entry"})
        body = self.term()
        return SPi(kw.text, tele, body, span=kw.span)

    def _is_tele_entry(self) -> bool:
        j = self.i + 1
        while self.toks[j].kind == "ident":
            j += 1
        return j > self.i + 1 and self.toks[j].kind == "sym" and self.toks[j].text == ":"

    def arrow(self) -> S:
        left = self.prod()
        if self.at_sym("->"):
            tok = self.advance()
            right = self.term()
            return SArrow(left, right, span=tok.span)
        return left

    def prod(self) -> S:
        left = self.sum()
        if self.at_sym("*"):
            tok = self.advance()
            right = self.prod() if not self._at_binder_kw() else self.term()
            return SProd(left, right, span=tok.span)
        return left

    def _at_binder_kw(self) -> bool:
        return self.tok.kind == "kw" and self.tok.text in ("lam", "plam", "blam", "Pi", "Sig")

    def sum(self) -> S:
        left = self.app()
        while self.at_sym("+"):
            tok = self.advance()
            right = self.app()
            left = SAdd(left, right, span=tok.span)
        return left

    def app(self) -> S:
        head = self.head()
        while True:
            if self.at_sym("@") or self.at_sym("@@"):
                tok = self.advance()
                head = SDimApp(head, self.dim(), tok.text == "@@", span=tok.span)
            elif self._starts_atom():
                arg = self.atom()
                head = SApp(head, arg, span=arg.span)
            else:
                return head

    def head(self) -> S:
        t = self.tok
        if t.kind == "kw" and t.text in ARITY:
            self.advance()
            args = []
            for shape in ARITY[t.text]:
                if shape == "d":
                    args.append(self.dim())
                elif shape == "s":
                    args.append(self.system())
                else:
                    args.append(self.atom())
            return SKw(t.text, args, span=t.span)
        if not self._starts_atom():
            raise self.fail({"term"})
        return self.atom()

    def _starts_atom(self) -> bool:
        t = self.tok
        if t.kind in ("ident", "num"):
            return True
        if t.kind == "kw" and t.text in NULLARY:
            return True
        return t.kind == "sym" and t.text in ("(", "#0", "#1")

    def dim(self) -> S:
        t = self.tok
        if t.kind == "ident":
            self.advance()
            return SName(t.text, span=t.span)
        if t.kind == "num" and t.text in ("0", "1"):
            self.advance()
            return SNum(int(t.text), span=t.span)
        if t.kind == "sym" and t.text in ("#0", "#1"):
            self.advance()
            return SBConst(int(t.text[1]), span=t.span)
        raise self.fail({"dimension"})

    def atom(self) -> S:
        t = self.tok
        if t.kind == "ident":
            self.advance()
            return SName(t.text, span=t.span)
        if t.kind == "num":
            self.advance()
            return SNum(int(t.text), span=t.span)
        if t.kind == "kw" and t.text in NULLARY:
            self.advance()
            return SConst(t.text, span=t.span)
        if t.kind == "sym" and t.text in ("#0", "#1"):
            self.advance()
            return SBConst(int(t.text[1]), span=t.span)
        if self.at_sym("("):
            start = self.advance().span
            if self.at("ident") and self.peek().kind == "sym" and self.peek().text == ".":
                names = []
                while self.at("ident") and self.peek().kind == "sym" and self.peek().text == ".":
                    names.append(self.advance().text)
                    self.advance()
                body = self.term()
                self.expect_sym(")")
                return SBinder(names, body, span=start)
            inner = self.term()
            if self.at_sym(":"):
                self.advance()
                ty = self.term()
                self.expect_sym(")")
                return SAnn(inner, ty, span=start)
            if self.at_sym(","):
                self.advance()
                snd = self.term()
                self.expect_sym(")")
                return SPair(inner, snd, span=start)
            if not self.at_sym(")"):
                raise self.fail({"')'", "':'", "','"})
            self.advance()
            return inner
        raise self.fail({"term"})

    def system(self) -> SSystem:
        start = self.expect_sym("[").span
        tubes = []
        if not self.at_sym("]"):
            tubes.append(self.tube())
            while self.at_sym("|"):
                self.advance()
                tubes.append(self.tube())
        self.expect_sym("]")
        return SSystem(tubes, span=start)

    def tube(self) -> STube:
        lhs = self.dim()
        self.expect_sym("=")
        rhs = self.dim()
        self.expect_sym("->")
        name = self.binder_name()
        self.expect_sym(".")
        body = self.term()
        return STube(lhs, rhs, name, body, span=lhs.span)


def parse_file(text: str) -> list[Decl]:
    p = Parser(tokenize(text))
    return p.file()


def parse_term(text: str) -> S:
    p = Parser(tokenize(text))
    t = p.term()
    p.expect_eof()
    return t
