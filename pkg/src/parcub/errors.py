"""Diagnostics shared by every stage of the pipeline."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional


class Code(str, enum.Enum):
    NotApart = "NotApart"
    DiagonalSubstitution = "DiagonalSubstitution"
    TubeMismatch = "TubeMismatch"
    BoundaryMismatch = "BoundaryMismatch"
    UnsupportedKan = "UnsupportedKan"
    TypeMismatch = "TypeMismatch"
    UnboundVariable = "UnboundVariable"
    NotAType = "NotAType"
    CannotInfer = "CannotInfer"
    DuplicateDefinition = "DuplicateDefinition"
    LexError = "LexError"
    ParseError = "ParseError"
    FuelExhausted = "FuelExhausted"
    Stuck = "Stuck"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self):
        return f"{self.line}:{self.col}"


class Diagnostic(Exception):
    def __init__(self, code: Code, message: str, span: Optional[Span] = None):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.span = span

    def with_span(self, span: Optional[Span]) -> "Diagnostic":
        if self.span is None and span is not None:
            self.span = span
        return self

    def format(self, filename: str = "<input>") -> str:
        line, col = (self.span.line, self.span.col) if self.span else (1, 1)
        msg = " ".join(self.message.split())
        return f"{filename}:{line}:{col}: {self.code}: {msg}"


class DiagonalSubstitution(Diagnostic):
    """A bridge substitution would identify two bridge variables."""

    def __init__(self, message: str, span: Optional[Span] = None):
        super().__init__(Code.DiagonalSubstitution, message, span)


class FuelExhausted(Diagnostic):
    def __init__(self, fuel: int):
        super().__init__(Code.FuelExhausted, f"evaluation did not finish within {fuel} steps")
        self.fuel = fuel
