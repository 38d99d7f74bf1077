"""Error types shared by every stage of the pipeline.

All user-facing failures derive from :class:`SeniError` and render as
``file:line:col: severity: message``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional


@dataclass(frozen=True)
class Span:
    """Source region of a token or AST node (offsets are 0-based, end exclusive)."""

    start: int
    end: int
    line: int
    col: int
    file: Optional[str] = None

    def merge(self, other: "Span") -> "Span":
        if other.start < self.start:
            return other.merge(self)
        return Span(self.start, max(self.end, other.end), self.line, self.col, self.file)


class SeniError(Exception):
    kind = "error"

    def __init__(self, message: str, span: Optional[Span] = None):
        super().__init__(message)
        self.message = message
        self.span = span

    def render(self, file: Optional[str] = None) -> str:
        span = self.span
        fname = (span.file if span and span.file else None) or file or "<input>"
        if span is None:
            return f"{fname}: error: {self.message}"
        return f"{fname}:{span.line}:{span.col}: error: {self.message}"

    @property
    def location(self) -> Optional[tuple[int, int]]:
        return (self.span.line, self.span.col) if self.span else None

    def __str__(self) -> str:
        return self.render()


class LexError(SeniError):
    kind = "LexError"


class ParseError(SeniError):
    kind = "ParseError"

    def __init__(self, message: str, span: Optional[Span] = None, expected: Iterable[str] = ()):
        super().__init__(message, span)
        self.expected = frozenset(expected)


# -- semantic analysis ------------------------------------------------------

class SemaError(SeniError):
    kind = "SemaError"


class MissingImport(SemaError):
    kind = "MissingImport"


class CyclicImport(SemaError):
    kind = "CyclicImport"

    def __init__(self, cycle: list[str], span: Optional[Span] = None):
        super().__init__("cyclic import: " + " -> ".join(cycle), span)
        self.cycle = cycle


class IncompatibleRedeclaration(SemaError):
    kind = "IncompatibleRedeclaration"


class SeniTypeError(SemaError):
    kind = "TypeError"

    def __init__(self, message: str, span: Optional[Span] = None, expected=None, found=None):
        super().__init__(message, span)
        self.expected = expected
        self.found = found


class UnresolvedName(SemaError):
    kind = "UnresolvedName"


class NonPureMutation(SemaError):
    kind = "NonPureMutation"


class DuplicateDeclaration(SemaError):
    kind = "DuplicateDeclaration"


class Diagnostics(SeniError):
    """A batch of semantic errors, kept in source order."""

    kind = "Diagnostics"

    def __init__(self, errors: list[SeniError]):
        def key(e: SeniError):
            s = e.span
            return (s.file or "", s.line, s.col) if s else ("", 0, 0)

        self.errors = sorted(errors, key=key)
        super().__init__("; ".join(e.message for e in self.errors),
                         self.errors[0].span if self.errors else None)

    def render(self, file: Optional[str] = None) -> str:
        return "\n".join(e.render(file) for e in self.errors)


# -- elaboration / evaluation -----------------------------------------------

class ElaborationError(SeniError):
    kind = "ElaborationError"


class NoMainSpec(ElaborationError):
    kind = "NoMainSpec"


class UnboundedRecursion(ElaborationError):
    kind = "UnboundedRecursion"


class EvalFault(SeniError):
    """Runtime fault while evaluating an expression (division by zero, bad index...)."""

    kind = "EvalFault"

    def __init__(self, message: str, span: Optional[Span] = None, action: Optional[str] = None):
        super().__init__(message, span)
        self.action = action
        self.trace = None  # filled by the explorer with the path that reached the fault


class DivisionByZero(EvalFault):
    kind = "DivisionByZero"


class NegativeCount(EvalFault):
    kind = "NegativeCount"


# -- verification ------------------------------------------------------------

class UnresolvedProp(SeniError):
    kind = "UnresolvedProp"


class AmbiguousMapping(SeniError):
    kind = "AmbiguousMapping"


class UnmappedAction(SeniError):
    kind = "UnmappedAction"


class TruncatedInput(SeniError):
    kind = "TruncatedInput"
