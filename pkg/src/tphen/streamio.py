"""Line formats for input streams and detection output.

Input, one item per line::

    E|name|t|c1,c2,...        instantaneous event
    S|name|ts,te|c1,...       input state (te may be ``inf``)
    D|name|ts,te|c1,...       input dynamic phenomenon

Blank lines and lines starting with ``#`` are ignored.  Output::

    name(c1,...)|instant|t
    name(c1,...)|interval|ts,te[|revised|retracted]

Constants that look like numbers are read as numbers, everything else as a
string.  Strings may not contain ``|``, ``,``, parentheses or surrounding
whitespace, since the format has no quoting.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, TextIO

from .engine import DetectionRecord
from .temporal.types import INF

KIND_CODE = {"E": "event", "S": "state", "D": "dynamic"}
CODE_KIND = {v: k for k, v in KIND_CODE.items()}

_INT = re.compile(r"-?\d+\Z")
_FLOAT = re.compile(r"-?(\d+\.\d*|\.\d+|\d+)([eE][-+]?\d+)?\Z")
_NAME = re.compile(r"[a-z][A-Za-z0-9_]*\Z")
_FORBIDDEN = set("|,()\n\r")


class StreamFormatError(ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        super().__init__(f"line {lineno}: {message}" if lineno is not None else message)
        self.lineno = lineno


@dataclass(frozen=True)
class StreamLine:
    kind: str
    pred: str
    args: tuple
    extent: object  # int, or (int, int | inf)
    lineno: int | None = field(default=None, compare=False)

    @property
    def span(self) -> tuple:
        return (self.extent, self.extent) if self.kind == "event" else self.extent

    def as_tuple(self) -> tuple:
        return (self.kind, self.pred, self.args, self.extent)


def parse_constant(text: str):
    if _INT.match(text):
        return int(text)
    if _FLOAT.match(text):
        return float(text)
    return text


def format_constant(value) -> str:
    if isinstance(value, bool):
        raise ValueError("booleans are not stream constants")
    if isinstance(value, (int, float)):
        return repr(value)
    s = str(value)
    if not s or s != s.strip() or _FORBIDDEN & set(s):
        raise ValueError(f"constant {s!r} cannot be written unquoted")
    return s


def _time(text: str, lineno, allow_inf=False):
    if allow_inf and text == "inf":
        return INF
    if not text.isdigit():
        raise StreamFormatError(f"bad time point {text!r}", lineno)
    return int(text)


def _args(text: str) -> tuple:
    if text == "":
        return ()
    return tuple(parse_constant(c.strip()) for c in text.split(","))


def parse_line(text: str, lineno: int | None = None) -> StreamLine | None:
    """Parse one input line, or return ``None`` for blanks and comments."""
    text = text.strip()
    if not text or text.startswith("#"):
        return None
    fields = text.split("|")
    if len(fields) not in (3, 4):
        raise StreamFormatError(f"expected 3 or 4 '|'-separated fields, got {len(fields)}", lineno)
    code, pred, when = fields[0].strip(), fields[1].strip(), fields[2].strip()
    kind = KIND_CODE.get(code)
    if kind is None:
        raise StreamFormatError(f"unknown item kind {code!r} (use E, S or D)", lineno)
    if not _NAME.match(pred):
        raise StreamFormatError(f"bad predicate name {pred!r}", lineno)
    if kind == "event":
        extent = _time(when, lineno)
    else:
        parts = when.split(",")
        if len(parts) != 2:
            raise StreamFormatError(f"expected ts,te for a {kind}, got {when!r}", lineno)
        ts, te = _time(parts[0].strip(), lineno), _time(parts[1].strip(), lineno, allow_inf=True)
        if te <= ts:
            raise StreamFormatError(f"interval end {te} must exceed its start {ts}", lineno)
        extent = (ts, te)
    args = _args(fields[3].strip()) if len(fields) == 4 else ()
    if any(a == "" for a in args):
        raise StreamFormatError("empty constant", lineno)
    return StreamLine(kind, pred, args, extent, lineno)


def format_line(item: StreamLine) -> str:
    if item.kind == "event":
        when = str(item.extent)
    else:
        ts, te = item.extent
        when = f"{ts},{'inf' if te == INF else te}"
    return f"{CODE_KIND[item.kind]}|{item.pred}|{when}|{','.join(map(format_constant, item.args))}"


def read_stream(lines: Iterable[str], skip_bad: bool = False, on_error=None) -> Iterator[StreamLine]:
    """Parse an input stream lazily.

    With *skip_bad* malformed lines are reported through *on_error* and
    dropped; otherwise the first one raises :class:`StreamFormatError`.
    """
    for lineno, raw in enumerate(lines, 1):
        try:
            item = parse_line(raw, lineno)
        except StreamFormatError as exc:
            if not skip_bad:
                raise
            if on_error is not None:
                on_error(exc)
            continue
        if item is not None:
            yield item


# -- detections ---------------------------------------------------------------


def format_record(r: DetectionRecord) -> str:
    head = f"{r.pred}({','.join(map(format_constant, r.args))})"
    if r.kind == "instant":
        body = f"{head}|instant|{r.extent}"
    else:
        ts, te = r.extent
        body = f"{head}|interval|{ts},{'inf' if te == INF else te}"
    return body if r.status == "new" else f"{body}|{r.status}"


_RECORD = re.compile(r"(?P<pred>[a-z][A-Za-z0-9_]*)\((?P<args>[^()]*)\)\|(?P<kind>instant|interval)\|(?P<when>[^|]+)(\|(?P<status>revised|retracted))?\Z")


def parse_record(text: str, query_time: int | None = None) -> DetectionRecord:
    m = _RECORD.match(text.strip())
    if m is None:
        raise StreamFormatError(f"not a detection record: {text!r}")
    kind = m["kind"]
    if kind == "instant":
        extent = _time(m["when"], None)
    else:
        parts = m["when"].split(",")
        if len(parts) != 2:
            raise StreamFormatError(f"bad interval {m['when']!r}")
        extent = (_time(parts[0], None), _time(parts[1], None, allow_inf=True))
    return DetectionRecord(m["pred"], _args(m["args"]), kind, extent, query_time, m["status"] or "new")


TIMELINE_HEADER = "query_time\tstatus\tpredicate\targs\tstart\tend"


def write_timeline(out: TextIO, records: Iterable[DetectionRecord]) -> None:
    """Tab-separated table of detections, one row per record."""
    out.write(TIMELINE_HEADER + "\n")
    for r in records:
        ts, te = (r.extent, r.extent) if r.kind == "instant" else r.extent
        args = ",".join(map(format_constant, r.args))
        out.write(f"{r.query_time}\t{r.status}\t{r.pred}\t{args}\t{ts}\t{'inf' if te == INF else te}\n")
