"""Instant and interval operators, and the temporal relations.

Relations work on *entity lists*: ``(start, end)`` tuples where an instant
``t`` is written ``(t, t)``, paired with a kind (``"instant"`` or
``"interval"``).  The pair-level functions here report which operand entities
produced each result so that callers can track what a detection depends on.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from collections import defaultdict

from . import kernels
from .types import (
    INF,
    IllegalOperandKind,
    IncompleteInterval,
    InstantSet,
    IntervalSet,
)

RELATIONS = ("before", "meets", "overlaps", "finishes", "starts", "equals", "contains")

# (left may be an instant, right may be an instant)
_INSTANT_OK = {
    "before": (True, True),
    "meets": (False, False),
    "overlaps": (False, False),
    "equals": (False, False),
    "finishes": (True, False),
    "starts": (True, False),
    "contains": (False, True),
}


# -- events -----------------------------------------------------------------


def instant_and(a, b) -> InstantSet:
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        if a[i] == b[j]:
            out.append(a[i])
            i += 1
            j += 1
        elif a[i] < b[j]:
            i += 1
        else:
            j += 1
    return InstantSet(out)


def instant_or(a, b) -> InstantSet:
    return InstantSet(list(a) + list(b))


def instant_not(a, window_instants) -> InstantSet:
    """Instants of the evaluation domain at which *a* is not true."""
    drop = set(a)
    return InstantSet(t for t in window_instants if t not in drop)


def start_instants(s) -> InstantSet:
    return InstantSet(iv[0] for iv in s)


def end_instants(s) -> InstantSet:
    return InstantSet(iv[1] for iv in s if iv[1] != INF)


# -- states -----------------------------------------------------------------


def maximal_range(st) -> IntervalSet:
    """Disjoint maximal intervals opened by ``phi`` and closed by ``psi and not phi``."""
    return IntervalSet(kernels.maximal_range(list(st)))


def range_triples(phi, psi):
    """Merge two instant sets into chronologically sorted ``(t, phi, psi)`` triples."""
    p, q = set(phi), set(psi)
    return [(t, t in p, t in q) for t in sorted(p | q)]


def coalesce_union(a, b) -> IntervalSet:
    return IntervalSet(kernels.coalesce(list(a) + list(b)))


def coalesce(intervals) -> IntervalSet:
    return IntervalSet(kernels.coalesce(list(intervals)))


def intersection(a, b) -> IntervalSet:
    return IntervalSet(kernels.intersection(sorted(a), sorted(b)))


def complement(a, b) -> IntervalSet:
    return IntervalSet(kernels.complement(sorted(a), sorted(b)))


# -- relations --------------------------------------------------------------


def entities(s):
    """Entity list and kind for an :class:`InstantSet` or :class:`IntervalSet`."""
    if isinstance(s, InstantSet):
        return [(t, t) for t in s], "instant"
    if isinstance(s, IntervalSet):
        return list(s), "interval"
    raise TypeError(f"expected InstantSet or IntervalSet, got {type(s).__name__}")


def check_kinds(relation, a_kind, b_kind):
    if relation not in _INSTANT_OK:
        raise ValueError(f"unknown relation {relation!r}")
    left_ok, right_ok = _INSTANT_OK[relation]
    if a_kind == "instant" and not left_ok:
        raise IllegalOperandKind(f"{relation} does not accept instants on the left")
    if b_kind == "instant" and not right_ok:
        raise IllegalOperandKind(f"{relation} does not accept instants on the right")


def before_pairs(a, b):
    """Contiguous ``(i, j)`` pairs for *before* over arbitrary entity lists.

    Left entity ``i`` ending at ``x`` pairs with right entity ``j`` starting at
    ``y`` iff ``x < y``, no right entity starts strictly inside ``(x, y)`` and
    no left entity ends strictly inside ``(x, y)``.
    """
    if not a or not b:
        return []
    by_end = defaultdict(list)
    for i, (_, e) in enumerate(a):
        if e != INF:
            by_end[e].append(i)
    by_start = defaultdict(list)
    for j, (s, _) in enumerate(b):
        by_start[s].append(j)
    ends = sorted(by_end)
    starts = sorted(by_start)
    pairs = []
    for x in ends:
        k = bisect_right(starts, x)
        if k == len(starts):
            break
        y = starts[k]
        # the latest left end below y must be x itself
        if ends[bisect_left(ends, y) - 1] != x:
            continue
        for i in by_end[x]:
            for j in by_start[y]:
                pairs.append((i, j))
    return pairs


def relation_pairs(relation, a, a_kind, b, b_kind):
    """All ``(i, j, result_interval)`` for *relation* between entity lists."""
    if relation == "before":
        return [(i, j, (a[i][0], b[j][1])) for i, j in before_pairs(a, b)]
    out = []
    if relation == "meets":
        idx = defaultdict(list)
        for j, (s, _) in enumerate(b):
            idx[s].append(j)
        for i, (s, e) in enumerate(a):
            if e != INF:
                for j in idx.get(e, ()):
                    out.append((i, j, (s, b[j][1])))
    elif relation == "equals":
        idx = defaultdict(list)
        for j, iv in enumerate(b):
            if iv[1] != INF:
                idx[iv].append(j)
        for i, iv in enumerate(a):
            for j in idx.get(iv, ()):
                out.append((i, j, iv))
    elif relation == "starts":
        idx = defaultdict(list)
        for j, (s, _) in enumerate(b):
            idx[s].append(j)
        for i, (s, e) in enumerate(a):
            for j in idx.get(s, ()):
                te = b[j][1]
                if a_kind == "instant" or (e != INF and e < te):
                    out.append((i, j, b[j]))
    elif relation == "finishes":
        idx = defaultdict(list)
        for j, (_, e) in enumerate(b):
            if e != INF:
                idx[e].append(j)
        for i, (s, e) in enumerate(a):
            if e == INF:
                continue
            for j in idx.get(e, ()):
                if a_kind == "instant" or b[j][0] < s:
                    out.append((i, j, b[j]))
    elif relation in ("overlaps", "contains"):
        order = sorted(range(len(b)), key=lambda j: b[j][0])
        starts = [b[j][0] for j in order]
        for i, (ts, te) in enumerate(a):
            if relation == "overlaps":
                if te == INF:
                    continue
                lo, hi = bisect_right(starts, ts), bisect_left(starts, te)
                for k in range(lo, hi):
                    j = order[k]
                    if b[j][1] > te:
                        out.append((i, j, (ts, b[j][1])))
            else:
                lo, hi = bisect_right(starts, ts), bisect_left(starts, te)
                for k in range(lo, hi):
                    j = order[k]
                    if b[j][1] < te:
                        out.append((i, j, (ts, te)))
    else:
        raise ValueError(f"unknown relation {relation!r}")
    return out


def relation_incompletes(relation, a, a_kind, b, b_kind, t_q):
    """Candidates whose truth cannot be decided yet at query time *t_q*.

    ``members`` of each candidate are ``("a", i)`` / ``("b", j)`` references.
    """
    out = []
    if relation == "before":
        finite = [e for _, e in a if e != INF]
        if finite:
            t = max(finite)
            if not any(s > t for s, _ in b):
                for i, (s, e) in enumerate(a):
                    if e == t:
                        out.append(IncompleteInterval(s, t + 2, (("a", i),)))
    if t_q is None:
        return out
    if a_kind == "interval" and relation in ("before", "meets", "overlaps", "finishes"):
        for i, (s, e) in enumerate(a):
            if e == INF:
                out.append(IncompleteInterval(s, t_q + 2, (("a", i),)))
    elif relation == "contains":
        for i, (s, e) in enumerate(a):
            if e == INF and not any(bs > s for bs, _ in b):
                out.append(IncompleteInterval(s, t_q + 1, (("a", i),)))
    elif relation in ("equals", "starts") and a_kind == "interval":
        open_b = defaultdict(list)
        for j, (s, e) in enumerate(b):
            if e == INF:
                open_b[s].append(j)
        for i, (s, e) in enumerate(a):
            if e == INF:
                for j in open_b.get(s, ()):
                    out.append(IncompleteInterval(s, t_q + 1, (("a", i), ("b", j))))
    return out


def feasible_partners(relation, side, start, min_end, others, same=()):
    """Whether an undecided operand ``[start, t?]`` with ``t? >= min_end`` can
    still satisfy *relation*, and which current entities of the other operand
    could take part.

    *side* is ``"a"`` when the undecided operand is on the left.  *others* is
    the other operand's entity list; undecided entities there should be passed
    as open intervals.  *same* lists the undecided operand's own siblings and
    is only consulted for ``before``, where they may block contiguity.
    Returns ``(feasible, partner_indices)``.  Relations that a future arrival
    could still satisfy are feasible even without partners.
    """
    idx = range(len(others))

    def _open_or_reaches(e, bound, strict):
        return e == INF or (e > bound if strict else e >= bound)

    if side == "a":
        if relation in ("before", "meets"):
            return True, []
        if relation == "overlaps":
            return True, [k for k in idx if others[k][0] > start and _open_or_reaches(others[k][1], min_end, True)]
        if relation == "contains":
            return True, [k for k in idx if others[k][0] > start]
        if relation == "finishes":
            p = [k for k in idx if others[k][0] < start and _open_or_reaches(others[k][1], min_end, False)]
        elif relation == "starts":
            p = [k for k in idx if others[k][0] == start and _open_or_reaches(others[k][1], min_end, True)]
        elif relation == "equals":
            p = [k for k in idx if others[k][0] == start and _open_or_reaches(others[k][1], min_end, False)]
        else:
            raise ValueError(f"unknown relation {relation!r}")
        return bool(p), p

    if relation == "before":
        ends = [e for _, e in others if e != INF and e < start]
        if not ends:
            return False, []
        t = max(ends)
        if any(t < s < start for s, _ in same):
            return False, []
        p = [k for k in idx if others[k][1] == t]
        return True, p
    if relation == "finishes":
        return True, [k for k in idx if others[k][0] > start and others[k][1] == INF]
    if relation == "meets":
        p = [k for k in idx if others[k][1] == start]
    elif relation == "overlaps":
        p = [k for k in idx if others[k][0] < start < others[k][1]]
    elif relation == "starts":
        p = [k for k in idx if others[k][0] == start]
    elif relation == "equals":
        p = [k for k in idx if others[k][0] == start and _open_or_reaches(others[k][1], min_end, False)]
    elif relation == "contains":
        p = [k for k in idx if others[k][0] < start and _open_or_reaches(others[k][1], min_end, True)]
    else:
        raise ValueError(f"unknown relation {relation!r}")
    return bool(p), p


def feasible(relation, side, start, min_end, others, same=()):
    return feasible_partners(relation, side, start, min_end, others, same)[0]


def rel_before(a, b, t_q=None):
    """Intervals where ``a before b`` holds, plus undecided candidates.

    Disjoint interval operands use the linear two-pointer scan; anything else
    (instants, overlapping dynamic intervals) goes through the general
    contiguity check.
    """
    ea, ka = entities(a)
    eb, kb = entities(b)
    if ka == kb == "interval" and a.disjoint and b.disjoint:
        left, right, _ = kernels.before_disjoint(ea, eb)
        result = IntervalSet((ea[i][0], eb[y][1]) for i, y in zip(left, right))
    else:
        result = IntervalSet(iv for _, _, iv in relation_pairs("before", ea, ka, eb, kb))
    return result, sorted(relation_incompletes("before", ea, ka, eb, kb, t_q))


def rel_allen(relation, a, b, t_q=None):
    """Intervals where ``a <relation> b`` holds, plus undecided candidates."""
    ea, ka = entities(a)
    eb, kb = entities(b)
    check_kinds(relation, ka, kb)
    if relation == "before":
        return rel_before(a, b, t_q)
    result = IntervalSet(iv for _, _, iv in relation_pairs(relation, ea, ka, eb, kb))
    return result, sorted(relation_incompletes(relation, ea, ka, eb, kb, t_q))
