"""Compiler diagnostics.  Every error carries the source position it refers to."""

from __future__ import annotations

from dataclasses import dataclass


class CompileError(Exception):
    """Base class; ``line``/``col`` are 1-based, or ``None`` when not tied to a place."""

    code = "compile-error"

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(str(self))

    def __str__(self) -> str:
        if self.line is None:
            return f"{self.code}: {self.message}"
        return f"{self.line}:{self.col}: {self.code}: {self.message}"


class LexError(CompileError):
    code = "lex-error"


class ParseError(CompileError):
    code = "parse-error"


class ArityMismatch(CompileError):
    code = "arity-mismatch"


class UnknownPredicate(CompileError):
    code = "unknown-predicate"


class DuplicateDefinition(CompileError):
    code = "duplicate-definition"


class ClassMismatch(CompileError):
    """A formula is used where its class (event, state, dynamic) is not allowed."""

    code = "class-mismatch"


class UnguardedNegation(CompileError):
    """A negation or comparison whose variables no positive conjunct binds."""

    code = "unguarded-negation"


class UnsafeHeadVariable(CompileError):
    code = "unsafe-head-variable"


class VariableMismatch(CompileError):
    """Operands that must range over the same bindings do not."""

    code = "variable-mismatch"


class CyclicDefinition(CompileError):
    code = "cyclic-definition"

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("definitions depend on themselves: " + " -> ".join(self.cycle))


@dataclass(frozen=True)
class CompileWarning:
    """Non-fatal diagnostic."""

    code: str
    message: str
    line: int | None = None
    col: int | None = None

    def __str__(self) -> str:
        where = "" if self.line is None else f"{self.line}:{self.col}: "
        return f"{where}warning: {self.code}: {self.message}"
