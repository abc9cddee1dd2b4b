"""Recursive-descent parser.

Binding strength, tightest first: ``¬``/``start``/``end``, ``∧``, ``∨``, ``↣``,
``∖``, ``⊓``, ``⊔``, then the temporal relations.  Every binary level is
left-associative and parentheses override.
"""

from __future__ import annotations

from .ast import (
    Atom,
    BinOp,
    Comparison,
    Const,
    Declaration,
    Definition,
    Not,
    Program,
    Relation,
    StartEnd,
    Var,
    walk,
)
from .errors import ArityMismatch, ParseError
from .lexer import Token, tokenize

COMPARISON_TOKENS = {"LT": "<", "LE": "<=", "GT": ">", "GE": ">=", "EQ": "=", "NE": "!="}

# loosest to tightest; each entry is (token type, ast op)
BINARY_LEVELS = [
    ("RELATION", None),
    ("UNION", "union"),
    ("INTER", "intersection"),
    ("COMPL", "complement"),
    ("RANGE", "range"),
    ("OR", "or"),
    ("AND", "and"),
]

_DESCRIBE = {
    "LPAREN": "'('",
    "RPAREN": "')'",
    "COMMA": "','",
    "COLON": "':'",
    "DOT": "'.'",
    "SLASH": "'/'",
    "NUM": "number",
    "IDENT": "name",
    "VAR": "variable",
    "EOF": "end of input",
}

ANON_PREFIX = "_#"


def _describe(tok_type: str) -> str:
    return _DESCRIBE.get(tok_type, tok_type)


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.k = 0
        self._anon = 0

    # -- helpers ------------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.k]

    def peek(self, offset: int = 1) -> Token:
        return self.toks[min(self.k + offset, len(self.toks) - 1)]

    def take(self) -> Token:
        t = self.tok
        self.k += 1
        return t

    def expect(self, *types: str) -> Token:
        if self.tok.type not in types:
            wanted = " or ".join(_describe(t) for t in types)
            got = _describe(self.tok.type)
            if self.tok.value is not None:
                got = f"{got} {self.tok.value!r}"
            raise ParseError(f"expected {wanted}, found {got}", self.tok.line, self.tok.col)
        return self.take()

    @staticmethod
    def _pos(t: Token):
        return (t.line, t.col)

    # -- statements ---------------------------------------------------------

    def program(self) -> Program:
        decls, defs = [], []
        while self.tok.type != "EOF":
            if self.tok.type == "KW_INPUT":
                decls.append(self.declaration())
            elif self.tok.type in ("KW_EVENT", "KW_STATE", "KW_DYNAMIC"):
                defs.append(self.definition())
            else:
                raise ParseError(
                    "expected a declaration ('input ...') or a definition "
                    "('event', 'state' or 'dynamic')",
                    self.tok.line,
                    self.tok.col,
                )
        return Program(tuple(decls), tuple(defs))

    def declaration(self) -> Declaration:
        first = self.take()
        kind = self.expect("KW_EVENT", "KW_STATE", "KW_DYNAMIC").type[3:].lower()
        name = self.expect("IDENT")
        self.expect("SLASH")
        arity = self.expect("NUM")
        if not isinstance(arity.value, int) or arity.value < 0:
            raise ParseError("arity must be a non-negative integer", arity.line, arity.col)
        self.expect("DOT")
        return Declaration(kind, name.value, arity.value, self._pos(first))

    def definition(self) -> Definition:
        first = self.take()
        kind = first.type[3:].lower()
        self._anon = 0
        head = self.atom(self.expect("IDENT"))
        for t in head.args:
            if not isinstance(t, Var) or t.name.startswith(ANON_PREFIX):
                line, col = t.pos
                raise ParseError("head arguments must be named variables", line, col)
        self.expect("COLON")
        body = self.formula()
        self.expect("DOT")
        return Definition(kind, head, body, self._pos(first))

    # -- formulae -----------------------------------------------------------

    def formula(self, level: int = 0):
        if level == len(BINARY_LEVELS):
            return self.unary()
        tok_type, op = BINARY_LEVELS[level]
        left = self.formula(level + 1)
        while self.tok.type == tok_type:
            t = self.take()
            right = self.formula(level + 1)
            if op is None:
                left = Relation(t.value, left, right, self._pos(t))
            else:
                left = BinOp(op, left, right, self._pos(t))
        return left

    def unary(self):
        t = self.tok
        if t.type == "NOT":
            self.take()
            return Not(self.unary(), self._pos(t))
        if t.type in ("KW_START", "KW_END"):
            self.take()
            self.expect("LPAREN")
            inner = self.formula()
            self.expect("RPAREN")
            return StartEnd(t.type[3:].lower(), inner, self._pos(t))
        return self.primary()

    def primary(self):
        t = self.tok
        if t.type == "LPAREN":
            self.take()
            inner = self.formula()
            self.expect("RPAREN")
            return inner
        if t.type == "IDENT" and self.peek().type not in COMPARISON_TOKENS:
            return self.atom(self.take())
        if t.type in ("IDENT", "VAR", "NUM", "STRING"):
            left = self.term()
            if self.tok.type not in COMPARISON_TOKENS:
                raise ParseError(
                    "expected a comparison operator after term", self.tok.line, self.tok.col
                )
            op = COMPARISON_TOKENS[self.take().type]
            right = self.term()
            return Comparison(op, left, right, self._pos(t))
        raise ParseError(
            f"expected a formula, found {_describe(t.type)}", t.line, t.col
        )

    def atom(self, name_tok: Token) -> Atom:
        args = []
        if self.tok.type == "LPAREN":
            self.take()
            if self.tok.type != "RPAREN":
                args.append(self.term())
                while self.tok.type == "COMMA":
                    self.take()
                    args.append(self.term())
            self.expect("RPAREN")
        return Atom(name_tok.value, tuple(args), self._pos(name_tok))

    def term(self):
        t = self.expect("VAR", "IDENT", "NUM", "STRING")
        if t.type == "VAR":
            if t.value == "_":
                self._anon += 1
                return Var(f"{ANON_PREFIX}{self._anon}", self._pos(t))
            return Var(t.value, self._pos(t))
        return Const(t.value, self._pos(t))


def _check_arities(program: Program) -> None:
    seen: dict[str, int] = {}

    def note(name, arity, pos):
        if name in seen and seen[name] != arity:
            line, col = pos if pos else (None, None)
            raise ArityMismatch(
                f"{name} used with {arity} argument(s), elsewhere with {seen[name]}", line, col
            )
        seen.setdefault(name, arity)

    for d in program.declarations:
        note(d.name, d.arity, d.pos)
    for d in program.definitions:
        note(d.head.name, d.head.arity, d.head.pos)
    for d in program.definitions:
        for node in walk(d.body):
            if isinstance(node, Atom):
                note(node.name, node.arity, node.pos)


def parse_program(source) -> Program:
    """Parse a token list (or raw text) into a :class:`Program`."""
    tokens = tokenize(source) if isinstance(source, str) else list(source)
    program = _Parser(tokens).program()
    _check_arities(program)
    return program


def parse_formula(text: str):
    """Parse a lone formula; handy in tests and the REPL."""
    p = _Parser(tokenize(text))
    f = p.formula()
    p.expect("EOF")
    return f
