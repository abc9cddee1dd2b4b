"""Tokenizer for definition files.

Both the mathematical symbols and their ASCII spellings are accepted; a token
records the canonical type only, so ``&`` and ``∧`` are indistinguishable
after lexing.
"""

from __future__ import annotations

from typing import NamedTuple

from .errors import LexError


class Token(NamedTuple):
    type: str
    value: object
    line: int
    col: int

    def __repr__(self) -> str:
        if self.value is None:
            return self.type
        return f"{self.type} {self.value}"


KEYWORDS = {
    "event": "KW_EVENT",
    "state": "KW_STATE",
    "dynamic": "KW_DYNAMIC",
    "input": "KW_INPUT",
    "start": "KW_START",
    "end": "KW_END",
    "union": "UNION",
    "intersection": "INTER",
    "complement": "COMPL",
}

RELATION_WORDS = ("before", "meets", "overlaps", "finishes", "starts", "equals", "contains")

# longest spelling first so that "~>" wins over "~" and "<=" over "<"
SYMBOLS = [
    ("~>", "RANGE"),
    ("<=", "LE"),
    (">=", "GE"),
    ("!=", "NE"),
    ("↣", "RANGE"),
    ("¬", "NOT"),
    ("~", "NOT"),
    ("∧", "AND"),
    ("&", "AND"),
    ("∨", "OR"),
    ("|", "OR"),
    ("⊔", "UNION"),
    ("⊓", "INTER"),
    ("∖", "COMPL"),
    ("\\", "COMPL"),
    ("≤", "LE"),
    ("≥", "GE"),
    ("≠", "NE"),
    ("<", "LT"),
    (">", "GT"),
    ("=", "EQ"),
    ("(", "LPAREN"),
    (")", "RPAREN"),
    (",", "COMMA"),
    (":", "COLON"),
    ("/", "SLASH"),
    (".", "DOT"),
]


def _ident_char(c: str) -> bool:
    return c.isalnum() or c == "_"


def tokenize(text: str) -> list[Token]:
    """Split *text* into tokens, ending with an ``EOF`` token."""
    out: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def advance(k: int) -> None:
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = text[i]
        if c in " \t\r\n":
            advance(1)
            continue
        if c == "%":
            while i < n and text[i] != "\n":
                advance(1)
            continue
        start_line, start_col = line, col

        if c.isdigit() or (c == "-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            is_float = j + 1 < n and text[j] == "." and text[j + 1].isdigit()
            if is_float:
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    while k < n and text[k].isdigit():
                        k += 1
                    j, is_float = k, True
            lexeme = text[i:j]
            value = float(lexeme) if is_float else int(lexeme)
            advance(j - i)
            out.append(Token("NUM", value, start_line, start_col))
            continue

        if c.isalpha() or c == "_":
            j = i
            while j < n and _ident_char(text[j]):
                j += 1
            word = text[i:j]
            advance(j - i)
            if word in KEYWORDS:
                out.append(Token(KEYWORDS[word], None, start_line, start_col))
            elif word in RELATION_WORDS:
                out.append(Token("RELATION", word, start_line, start_col))
            elif word[0].isupper() or word[0] == "_":
                out.append(Token("VAR", word, start_line, start_col))
            else:
                out.append(Token("IDENT", word, start_line, start_col))
            continue

        if c in "'\"":
            j = i + 1
            buf = []
            while j < n and text[j] != c:
                if text[j] == "\n":
                    raise LexError("unterminated string", start_line, start_col)
                if text[j] == "\\" and j + 1 < n:
                    j += 1
                buf.append(text[j])
                j += 1
            if j >= n:
                raise LexError("unterminated string", start_line, start_col)
            advance(j + 1 - i)
            out.append(Token("STRING", "".join(buf), start_line, start_col))
            continue

        for sym, kind in SYMBOLS:
            if text.startswith(sym, i):
                advance(len(sym))
                out.append(Token(kind, None, start_line, start_col))
                break
        else:
            raise LexError(f"illegal character {c!r}", start_line, start_col)

    out.append(Token("EOF", None, line, col))
    return out
