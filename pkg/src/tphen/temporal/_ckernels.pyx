# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled sweep kernels; behaviour matches ``_pykernels`` exactly.

Endpoints are compared as C doubles (exact for instants below 2**53) and the
original Python endpoint objects are written to the output.
"""

from libc.math cimport INFINITY
from cpython cimport array
from libc.stdlib cimport free, malloc

import array as _array
from math import inf as INF

cdef array.array _INDEX = _array.array("q")


cdef double* _ends(list ivs, int which) except NULL:
    cdef Py_ssize_t n = len(ivs), k
    cdef double* out = <double*> malloc((n + 1) * sizeof(double))
    if out == NULL:
        raise MemoryError()
    for k in range(n):
        out[k] = <double> ivs[k][which]
    return out


def maximal_range(list triples):
    cdef list out = []
    cdef object started = None
    cdef bint phi, psi
    for tr in triples:
        phi = tr[1]
        psi = tr[2]
        if phi and started is None:
            started = tr[0]
        if psi and not phi and started is not None:
            out.append((started, tr[0]))
            started = None
    if started is not None:
        out.append((started, INF))
    return out


def coalesce(list intervals):
    cdef Py_ssize_t n = len(intervals), k, m = 0
    cdef list pts = []
    for k in range(n):
        s, e = intervals[k]
        pts.append((s, 0))
        if e != INF:
            pts.append((e, 1))
    pts.sort()
    cdef list out = []
    cdef long starting = 0, ending = 0
    cdef Py_ssize_t npts = len(pts)
    cdef object ts = None, t
    k = 0
    while k < npts:
        t = pts[k][0]
        while k < npts and pts[k][0] == t:
            if pts[k][1] == 0:
                if starting == 0:
                    ts = t
                starting += 1
            else:
                ending += 1
            k += 1
        if starting == ending and starting > 0:
            out.append((ts, t))
            starting = 0
            ending = 0
    if starting > ending:
        out.append((ts, INF))
    return out


def intersection(list a, list b):
    cdef Py_ssize_t na = len(a), nb = len(b), i = 0, j = 0
    cdef list out = []
    if na == 0 or nb == 0:
        return out
    cdef double* as_ = _ends(a, 0)
    cdef double* ae = _ends(a, 1)
    cdef double* bs = _ends(b, 0)
    cdef double* be = _ends(b, 1)
    try:
        while i < na and j < nb:
            if as_[i] > bs[j]:
                s = a[i][0]
                ds = as_[i]
            else:
                s = b[j][0]
                ds = bs[j]
            if ae[i] < be[j]:
                e = a[i][1]
                de = ae[i]
            else:
                e = b[j][1]
                de = be[j]
            if ds < de:
                out.append((s, e))
            if ae[i] < be[j]:
                i += 1
            elif be[j] < ae[i]:
                j += 1
            else:
                i += 1
                j += 1
    finally:
        free(as_)
        free(ae)
        free(bs)
        free(be)
    return out


def complement(list a, list b):
    cdef Py_ssize_t na = len(a), nb = len(b), i, j = 0, k
    cdef list out = []
    if na == 0:
        return out
    if nb == 0:
        return list(a)
    cdef double* bs = _ends(b, 0)
    cdef double* be = _ends(b, 1)
    cdef double s, e, cur
    try:
        for i in range(na):
            s = a[i][0]
            e = a[i][1]
            while j < nb and be[j] <= s:
                j += 1
            cur = s
            cur_obj = a[i][0]
            k = j
            while k < nb and bs[k] < e:
                if bs[k] > cur:
                    out.append((cur_obj, b[k][0]))
                if be[k] > cur:
                    cur = be[k]
                    cur_obj = b[k][1]
                if cur == INFINITY:
                    break
                k += 1
            if cur < e:
                out.append((cur_obj, a[i][1]))
    finally:
        free(bs)
        free(be)
    return out


def before_disjoint(list phi, list psi):
    cdef Py_ssize_t n = len(phi), m = len(psi), i = 0, y = 0, k = 0
    cdef array.array left = array.clone(_INDEX, min(n, m), zero=False)
    cdef array.array right = array.clone(_INDEX, min(n, m), zero=False)
    cdef long long* lp = left.data.as_longlongs
    cdef long long* rp = right.data.as_longlongs
    cdef object unmatched = None
    if n == 0 or m == 0:
        array.resize(left, 0)
        array.resize(right, 0)
        return left, right, (None if n == 0 else 0)
    cdef double* pe = _ends(phi, 1)
    cdef double* qs = _ends(psi, 0)
    try:
        while i < n:
            while y < m:
                if pe[i] < qs[y]:
                    break
                y += 1
            if y < m:
                while i + 1 < n:
                    if pe[i + 1] < qs[y]:
                        i += 1
                    else:
                        break
                lp[k] = i
                rp[k] = y
                k += 1
                i += 1
            else:
                unmatched = i
                break
    finally:
        free(pe)
        free(qs)
    array.resize(left, k)
    array.resize(right, k)
    return left, right, unmatched
