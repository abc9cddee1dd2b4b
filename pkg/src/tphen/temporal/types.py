"""Value types shared by the temporal algebra.

Time is discrete: instants are non-negative ``int``.  An interval is a plain
``(start, end)`` tuple where ``end`` is either an ``int`` greater than
``start`` or :data:`INF` for intervals that are open to the right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Union

INF = math.inf

Instant = int
Interval = tuple  # (start: int, end: int | INF)
End = Union[int, float]


class IllegalOperandKind(TypeError):
    """An instant set was given where a relation only accepts intervals."""


class InstantSet(tuple):
    """Strictly ascending instants."""

    __slots__ = ()

    def __new__(cls, instants: Iterable[int] = ()):
        return super().__new__(cls, sorted(set(instants)))

    kind = "instant"

    def __repr__(self):
        return f"InstantSet({list(self)!r})"


class IntervalSet(tuple):
    """Intervals ordered by start, then end.

    Sets produced by the state operators are disjoint and non-touching;
    dynamic phenomena may hold on overlapping intervals, so no disjointness is
    enforced here.  :attr:`disjoint` reports which kind this is.
    """

    __slots__ = ()

    def __new__(cls, intervals: Iterable[Interval] = ()):
        items = sorted(set((s, e) for s, e in intervals))
        for s, e in items:
            check_interval(s, e)
        return super().__new__(cls, items)

    kind = "interval"

    @property
    def disjoint(self) -> bool:
        return is_disjoint(self)

    def __repr__(self):
        return f"IntervalSet({[fmt_interval(i) for i in self]!r})"


class RangeTriple(NamedTuple):
    """Truth of the opening and closing formulae of a maximal range at ``t``."""

    t: int
    phi: bool
    psi: bool


@dataclass(frozen=True, order=True)
class IncompleteInterval:
    """A candidate ``[start, ?]`` whose end is unknown but at least ``min_end``.

    ``min_end`` encodes the end domain ``[min_end, INF)``; an open domain
    ``(t, INF)`` is stored as ``min_end = t + 1`` since time is discrete.
    ``members`` holds indices of the operand entities the candidate depends on
    and does not take part in equality.
    """

    start: int
    min_end: int
    members: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.min_end <= self.start:
            raise ValueError(f"end domain must lie after start: {self}")

    def __str__(self):
        return f"[{self.start},t?] D=[{self.min_end},inf)"


def check_interval(start, end) -> None:
    if start < 0:
        raise ValueError(f"negative instant {start}")
    if end != INF and not end > start:
        raise ValueError(f"interval [{start},{end}] is empty or a single point")


def is_disjoint(intervals) -> bool:
    """True when *intervals* are sorted, pairwise disjoint and non-touching."""
    prev_end = -1
    for s, e in intervals:
        if s <= prev_end:
            return False
        prev_end = e
    return True


def fmt_end(end) -> str:
    return "inf" if end == INF else str(int(end))


def fmt_interval(interval) -> str:
    return f"[{interval[0]},{fmt_end(interval[1])}]"
