"""Pure-Python sweep kernels.

These are the reference implementations; ``_ckernels`` provides compiled
equivalents with the same signatures.  Inputs are lists of ``(start, end)``
tuples (``end`` may be ``math.inf``) already in ``(start, end)`` order.
"""

from array import array
from math import inf as INF


def maximal_range(triples):
    out = []
    started = None
    for t, phi, psi in triples:
        if phi and started is None:
            started = t
        if psi and not phi and started is not None:
            out.append((started, t))
            started = None
    if started is not None:
        out.append((started, INF))
    return out


def coalesce(intervals):
    """Counter-based temporal union of any number of intervals."""
    points = {}
    for s, e in intervals:
        c = points.get(s)
        if c is None:
            points[s] = [1, 0]
        else:
            c[0] += 1
        if e != INF:
            c = points.get(e)
            if c is None:
                points[e] = [0, 1]
            else:
                c[1] += 1
    out = []
    starting = ending = 0
    ts = None
    for t in sorted(points):
        s, e = points[t]
        if s:
            if starting == 0:
                ts = t
            starting += s
        if e:
            ending += e
        if starting == ending and starting > 0:
            out.append((ts, t))
            starting = ending = 0
    if starting > ending:
        out.append((ts, INF))
    return out


def intersection(a, b):
    out = []
    i = j = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        sa, ea = a[i]
        sb, eb = b[j]
        s = sa if sa > sb else sb
        e = ea if ea < eb else eb
        if s < e:
            out.append((s, e))
        if ea < eb:
            i += 1
        elif eb < ea:
            j += 1
        else:
            i += 1
            j += 1
    return out


def complement(a, b):
    out = []
    j = 0
    nb = len(b)
    for s, e in a:
        while j < nb and b[j][1] <= s:
            j += 1
        cur = s
        k = j
        while k < nb and b[k][0] < e:
            bs, be = b[k]
            if bs > cur:
                out.append((cur, bs))
            if be > cur:
                cur = be
            if cur == INF:
                break
            k += 1
        if cur < e:
            out.append((cur, e))
    return out


def before_disjoint(phi, psi):
    """Two-pointer scan over disjoint interval sets.

    Returns ``(left, right, first_unmatched)``: matched index pairs as two
    parallel ``array('q')`` columns, and the index of the first left interval
    left without a right partner (``None`` if all matched).
    """
    left, right = array("q"), array("q")
    i = y = 0
    n, m = len(phi), len(psi)
    while i < n:
        end = phi[i][1]
        while y < m:
            if end < psi[y][0]:
                break
            y += 1
        if y < m:
            start_y = psi[y][0]
            while i + 1 < n:
                if phi[i + 1][1] < start_y:
                    i += 1
                else:
                    break
            left.append(i)
            right.append(y)
            i += 1
        else:
            return left, right, i
    return left, right, None
