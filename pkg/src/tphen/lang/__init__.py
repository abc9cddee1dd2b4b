"""Definition language: lexer, parser, type checker and evaluation levels."""

from .ast import (
    Atom,
    BinOp,
    Comparison,
    Const,
    Declaration,
    Definition,
    FormulaClass,
    Not,
    Program,
    Relation,
    StartEnd,
    Var,
)
from .errors import (
    ArityMismatch,
    ClassMismatch,
    CompileError,
    CompileWarning,
    CyclicDefinition,
    DuplicateDefinition,
    LexError,
    ParseError,
    UnguardedNegation,
    UnknownPredicate,
    UnsafeHeadVariable,
    VariableMismatch,
)
from .lexer import Token, tokenize
from .parser import parse_formula, parse_program
from .printer import pretty
from .typecheck import (
    CompiledProgram,
    DependencyGraph,
    PredicateRef,
    Scope,
    analyse,
    build_levels,
    compile_program,
    typecheck,
)

__all__ = [
    "Atom", "BinOp", "Comparison", "Const", "Declaration", "Definition", "FormulaClass",
    "Not", "Program", "Relation", "StartEnd", "Var",
    "ArityMismatch", "ClassMismatch", "CompileError", "CompileWarning", "CyclicDefinition",
    "DuplicateDefinition", "LexError", "ParseError", "UnguardedNegation", "UnknownPredicate",
    "UnsafeHeadVariable", "VariableMismatch",
    "Token", "tokenize", "parse_formula", "parse_program", "pretty",
    "CompiledProgram", "DependencyGraph", "PredicateRef", "Scope", "analyse",
    "build_levels", "compile_program", "typecheck",
]
