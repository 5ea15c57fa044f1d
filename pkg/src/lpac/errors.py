"""Exception hierarchy for parsing and checking."""

from __future__ import annotations

from dataclasses import dataclass

from .polyalg import UnmappedVariable

__all__ = [
    "Span",
    "ParseError",
    "ProofSyntaxError",
    "DuplicateKeywordError",
    "UnterminatedBlockError",
    "CheckError",
    "IndexInUse",
    "MissingOperand",
    "ConclusionMismatch",
    "UnknownVariable",
    "VariableNotFresh",
    "NotBooleanValued",
    "OutputNotAConclusion",
    "PatternIdInUse",
    "PatternBodyError",
    "UnknownPattern",
    "FreshVarNotFresh",
    "PhiNotInjectiveOnExt",
    "PhiExtImageNotFresh",
    "PhiImageNotInScope",
    "PhiNotBooleanValued",
    "InputArityMismatch",
    "InputMismatch",
    "OutputArityMismatch",
    "OutputIndexInUse",
    "OutputMismatch",
    "ReplayMismatch",
    "UnmappedVariable",
    "UnmappedPatternVariable",
    "IllegalPatternStep",
    "IllFormedFragment",
]


@dataclass(frozen=True)
class Span:
    """1-based source location of a step."""

    line: int
    col: int
    end_line: int | None = None
    end_col: int | None = None
    source: str | None = None

    def __str__(self) -> str:
        where = f"line {self.line}, col {self.col}"
        return f"{self.source}: {where}" if self.source else where


class ParseError(Exception):
    """Base class for syntax-level failures; always carries a location."""

    def __init__(self, message: str, span: Span | None = None):
        self.span = span
        self.message = message
        super().__init__(f"{span}: {message}" if span else message)


class ProofSyntaxError(ParseError):
    pass


class DuplicateKeywordError(ParseError):
    pass


class UnterminatedBlockError(ParseError):
    pass


class CheckError(Exception):
    """A side condition of a proof rule failed."""

    def __init__(self, message: str):
        self.message = message
        super().__init__(message)

    @property
    def code(self) -> str:
        return type(self).__name__


class IndexInUse(CheckError):
    pass


class MissingOperand(CheckError):
    pass


class ConclusionMismatch(CheckError):
    pass


class UnknownVariable(CheckError):
    pass


class VariableNotFresh(CheckError):
    pass


class NotBooleanValued(CheckError):
    pass


class OutputNotAConclusion(CheckError):
    pass


class PatternIdInUse(CheckError):
    pass


class PatternBodyError(CheckError):
    """Wraps a failure inside a pattern body with the inner step's location."""

    def __init__(self, inner: CheckError, index: str, span: Span | None):
        self.inner = inner
        self.index = index
        self.span = span
        where = f" (line {span.line})" if span else ""
        super().__init__(f"pattern body step {index}{where}: {inner.code}: {inner.message}")


class UnknownPattern(CheckError):
    pass


class FreshVarNotFresh(CheckError):
    pass


class PhiNotInjectiveOnExt(CheckError):
    pass


class PhiExtImageNotFresh(CheckError):
    pass


class PhiImageNotInScope(CheckError):
    pass


class PhiNotBooleanValued(CheckError):
    pass


class InputArityMismatch(CheckError):
    pass


class InputMismatch(CheckError):
    pass


class OutputArityMismatch(CheckError):
    pass


class OutputIndexInUse(CheckError):
    pass


class OutputMismatch(CheckError):
    pass


class ReplayMismatch(CheckError):
    """Debug replay of a pattern body disagreed with the claimed outputs."""


class IllFormedFragment(Exception):
    pass


class UnmappedPatternVariable(CheckError):
    pass


class IllegalPatternStep(CheckError):
    pass
