"""Syntax tree for definition programs.

Nodes are frozen dataclasses.  Source positions and the formula class filled in by
the type checker are excluded from equality, so two parses of equivalent text
compare equal.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Union


class FormulaClass(enum.Enum):
    INSTANT = "Φ·"  # events
    STATE = "Φ⁻"  # disjoint maximal intervals
    DYNAMIC = "Φ⁼"  # possibly overlapping intervals

    def __str__(self) -> str:
        return self.value


KIND_CLASS = {
    "event": FormulaClass.INSTANT,
    "state": FormulaClass.STATE,
    "dynamic": FormulaClass.DYNAMIC,
}

Pos = tuple  # (line, col)


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = field(default=None, compare=False, repr=False)

    @property
    def anonymous(self) -> bool:
        return self.name.startswith("_")


@dataclass(frozen=True)
class Const:
    value: Union[str, int, float]
    pos: Pos = field(default=None, compare=False, repr=False)


Term = Union[Var, Const]


@dataclass(frozen=True)
class Atom:
    name: str
    args: tuple
    pos: Pos = field(default=None, compare=False, repr=False)
    cls: FormulaClass = field(default=None, compare=False, repr=False)

    @property
    def arity(self) -> int:
        return len(self.args)


@dataclass(frozen=True)
class Comparison:
    op: str  # one of < <= > >= = !=
    left: Term
    right: Term
    pos: Pos = field(default=None, compare=False, repr=False)
    cls: FormulaClass = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Not:
    child: "Formula"
    pos: Pos = field(default=None, compare=False, repr=False)
    cls: FormulaClass = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class StartEnd:
    op: str  # "start" | "end"
    child: "Formula"
    pos: Pos = field(default=None, compare=False, repr=False)
    cls: FormulaClass = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BinOp:
    """Boolean connectives and state operators.

    ``op`` is one of ``and``, ``or``, ``range``, ``union``, ``intersection``,
    ``complement``.
    """

    op: str
    left: "Formula"
    right: "Formula"
    pos: Pos = field(default=None, compare=False, repr=False)
    cls: FormulaClass = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Relation:
    relation: str
    left: "Formula"
    right: "Formula"
    pos: Pos = field(default=None, compare=False, repr=False)
    cls: FormulaClass = field(default=None, compare=False, repr=False)


Formula = Union[Atom, Comparison, Not, StartEnd, BinOp, Relation]


@dataclass(frozen=True)
class Declaration:
    kind: str  # event | state | dynamic
    name: str
    arity: int
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Definition:
    kind: str  # event | state | dynamic
    head: Atom
    body: Formula
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Program:
    declarations: tuple = ()
    definitions: tuple = ()

    def definition(self, name: str) -> Definition:
        for d in self.definitions:
            if d.head.name == name:
                return d
        raise KeyError(name)


def children(node) -> tuple:
    if isinstance(node, (Not, StartEnd)):
        return (node.child,)
    if isinstance(node, (BinOp, Relation)):
        return (node.left, node.right)
    return ()


def walk(node):
    """Pre-order traversal of a formula."""
    yield node
    for c in children(node):
        yield from walk(c)


def term_vars(terms) -> list:
    return [t.name for t in terms if isinstance(t, Var)]


def formula_vars(node) -> set:
    """Names of all variables occurring in *node*."""
    out = set()
    for n in walk(node):
        if isinstance(n, Atom):
            out.update(term_vars(n.args))
        elif isinstance(n, Comparison):
            out.update(term_vars((n.left, n.right)))
    return out
