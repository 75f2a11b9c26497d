from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import Code, Diagnostic, Span

KEYWORDS = frozenset(
    "U Path Bridge Gel gel ungel extent coe hcom com V Vin Vproj bool tt ff if int z2 zin "
    "zmod z2elim unit star empty abort lam plam blam fst snd Sig Pi def".split())


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "kw", "num", "sym", "eof"
    text: str
    span: Span

    def __repr__(self):
        return f"{self.kind}:{self.text}"


_SYMS = ("->", "@@", "#I", "#0", "#1", "(", ")", "[", "]", ".", ",", ":", "=", "|", "*", "+", "@")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_NUM = re.compile(r"[0-9]+")


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if c in " \t\r":
            i, col = i + 1, col + 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        span = Span(line, col)
        if text.startswith("@@@", i):
            raise Diagnostic(Code.LexError, "unexpected '@@@'", span)
        m = _IDENT.match(text, i)
        if m:
            word = m.group()
            toks.append(Token("kw" if word in KEYWORDS else "ident", word, span))
        else:
            m = _NUM.match(text, i)
            if m:
                toks.append(Token("num", m.group(), span))
            else:
                sym = next((s for s in _SYMS if text.startswith(s, i)), None)
                if sym is None:
                    raise Diagnostic(Code.LexError, f"unexpected character {c!r}", span)
                toks.append(Token("sym", sym, span))
                i += len(sym)
                col += len(sym)
                continue
        i += len(m.group())
        col += len(m.group())
    toks.append(Token("eof", "", Span(line, col)))
    return toks
