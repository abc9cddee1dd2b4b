"""Pretty-printer producing text that parses back to an equal tree."""

from __future__ import annotations

import re

from .ast import Atom, BinOp, Comparison, Const, Declaration, Definition, Not, Program, Relation, StartEnd, Var
from .lexer import KEYWORDS, RELATION_WORDS
from .parser import ANON_PREFIX

_PREC = {"relation": 1, "union": 2, "intersection": 3, "complement": 4, "range": 5, "or": 6, "and": 7}
_UNARY = 8

_UNICODE = {"and": "∧", "or": "∨", "range": "↣", "union": "⊔", "intersection": "⊓", "complement": "∖"}
_ASCII = {"and": "&", "or": "|", "range": "~>", "union": "union", "intersection": "intersection", "complement": "complement"}

_BARE = re.compile(r"[a-z][A-Za-z0-9_]*\Z")


def _prec(node) -> int:
    if isinstance(node, Relation):
        return _PREC["relation"]
    if isinstance(node, BinOp):
        return _PREC[node.op]
    return _UNARY


def term(t) -> str:
    if isinstance(t, Var):
        return "_" if t.name.startswith(ANON_PREFIX) else t.name
    v = t.value
    if isinstance(v, str):
        if _BARE.match(v) and v not in KEYWORDS and v not in RELATION_WORDS:
            return v
        return "'" + v.replace("\\", "\\\\").replace("'", "\\'") + "'"
    return repr(v)


def _atom(a: Atom) -> str:
    if not a.args:
        return a.name
    return f"{a.name}({', '.join(term(t) for t in a.args)})"


def formula(node, ascii: bool = False) -> str:
    syms = _ASCII if ascii else _UNICODE
    if isinstance(node, Atom):
        return _atom(node)
    if isinstance(node, Comparison):
        return f"{term(node.left)} {node.op} {term(node.right)}"
    if isinstance(node, Not):
        inner = formula(node.child, ascii)
        if _prec(node.child) < _UNARY or isinstance(node.child, Comparison):
            inner = f"({inner})"
        return ("~" if ascii else "¬") + inner
    if isinstance(node, StartEnd):
        return f"{node.op}({formula(node.child, ascii)})"
    p = _prec(node)
    left = formula(node.left, ascii)
    right = formula(node.right, ascii)
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    sym = node.relation if isinstance(node, Relation) else syms[node.op]
    return f"{left} {sym} {right}"


def statement(item, ascii: bool = False) -> str:
    if isinstance(item, Declaration):
        return f"input {item.kind} {item.name}/{item.arity}."
    if isinstance(item, Definition):
        return f"{item.kind} {_atom(item.head)}:\n    {formula(item.body, ascii)}."
    raise TypeError(type(item).__name__)


def pretty(program: Program, ascii: bool = False) -> str:
    parts = [statement(d, ascii) for d in program.declarations]
    if parts and program.definitions:
        parts.append("")
    parts.extend(statement(d, ascii) + "\n" for d in program.definitions)
    return "\n".join(parts).rstrip("\n") + "\n" if parts else ""
