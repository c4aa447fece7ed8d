# cython: boundscheck=False, wraparound=False, language_level=3
"""Compiled twin of ``_pure``: sparse echelon over Z/p**E.

Same data layout and semantics as the fallback (see _pure's module
docstring for the Howell/annihilator-tail invariants); the win is the
row combination step, which here is a single C merge over the two
sorted index arrays instead of a stack of numpy dispatches.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

_I64 = np.int64
_EMPTY = np.empty(0, dtype=_I64)


def canon_sparse(idx, val, mod):
    """Sort, merge duplicate indices, reduce mod ``mod``, drop zeros."""
    idx = np.asarray(idx, dtype=_I64)
    val = np.asarray(val, dtype=_I64) % mod
    cdef Py_ssize_t n = idx.shape[0]
    if n == 0:
        return _EMPTY, _EMPTY
    order = np.argsort(idx, kind="stable")
    idx = np.ascontiguousarray(idx[order])
    val = np.ascontiguousarray(val[order])
    out_i = np.empty(n, dtype=_I64)
    out_v = np.empty(n, dtype=_I64)
    cdef cnp.int64_t[::1] ii = idx, vv = val, oi = out_i, ov = out_v
    cdef long long m = mod, acc
    cdef Py_ssize_t p = 0, k = 0, q
    while p < n:
        acc = vv[p]
        q = p + 1
        while q < n and ii[q] == ii[p]:
            acc += vv[q]
            q += 1
        acc = acc % m
        if acc != 0:
            oi[k] = ii[p]
            ov[k] = acc
            k += 1
        p = q
    return out_i[:k], out_v[:k]


cdef _axpy(cnp.int64_t[::1] ri, cnp.int64_t[::1] rv,
           cnp.int64_t[::1] si, cnp.int64_t[::1] sv,
           long long q, long long mod):
    # r - q*s over Z/mod, both sparse with strictly increasing indices
    cdef Py_ssize_t n1 = ri.shape[0], n2 = si.shape[0]
    cdef long long w = (-q) % mod
    if w < 0:
        w += mod
    if n2 == 0 or w == 0:
        return np.asarray(ri), np.asarray(rv)
    out_i = np.empty(n1 + n2, dtype=_I64)
    out_v = np.empty(n1 + n2, dtype=_I64)
    cdef cnp.int64_t[::1] oi = out_i, ov = out_v
    cdef Py_ssize_t i = 0, j = 0, k = 0
    cdef long long v
    while i < n1 and j < n2:
        if ri[i] < si[j]:
            oi[k] = ri[i]
            ov[k] = rv[i]
            i += 1
            k += 1
        elif ri[i] > si[j]:
            v = (w * sv[j]) % mod
            if v != 0:
                oi[k] = si[j]
                ov[k] = v
                k += 1
            j += 1
        else:
            v = (rv[i] + w * sv[j]) % mod
            if v != 0:
                oi[k] = ri[i]
                ov[k] = v
                k += 1
            i += 1
            j += 1
    while i < n1:
        oi[k] = ri[i]
        ov[k] = rv[i]
        i += 1
        k += 1
    while j < n2:
        v = (w * sv[j]) % mod
        if v != 0:
            oi[k] = si[j]
            ov[k] = v
            k += 1
        j += 1
    return out_i[:k], out_v[:k]


cdef inline long long _ipow(long long b, long long e):
    cdef long long out = 1
    while e > 0:
        out *= b
        e -= 1
    return out


cdef inline (long long, long long) _val_unit(long long a, long long p):
    cdef long long v = 0
    while a % p == 0:
        a //= p
        v += 1
    return v, a


cdef class Echelon:
    """Row echelon over Z/p**E; see the fallback's module docstring."""

    cdef public long long p, E, mod
    cdef public bint track
    cdef public list rows, pivot_v, kernel
    cdef public dict pivot_of

    def __init__(self, p, E, track=False):
        if E <= 0:
            raise ValueError("E must be positive")
        self.p = p
        self.E = E
        self.mod = _ipow(self.p, self.E)
        self.track = bool(track)
        self.rows = []
        self.pivot_of = {}
        self.pivot_v = []
        self.kernel = []

    def insert(self, idx, val, tidx=None, tval=None):
        """Insert one row (and its tails); arrays must be canonical."""
        if tidx is None:
            tidx, tval = _EMPTY, _EMPTY
        cdef long long a, v, unit, q, t
        cdef Py_ssize_t c, r
        jobs = [(idx, val, tidx, tval)]
        while jobs:
            idx, val, tidx, tval = jobs.pop()
            while True:
                if len(idx) == 0:
                    if self.track and len(tidx):
                        self.kernel.append((tidx, tval))
                    break
                c = idx[0]
                a = val[0]
                v, unit = _val_unit(a, self.p)
                rr = self.pivot_of.get(c)
                if rr is not None and v >= <long long> self.pivot_v[rr]:
                    r = rr
                    q = a // _ipow(self.p, <long long> self.pivot_v[r])
                    ridx, rval, rtidx, rtval = self.rows[r]
                    idx, val = _axpy(idx, val, ridx, rval, q, self.mod)
                    if self.track:
                        tidx, tval = _axpy(tidx, tval, rtidx, rtval, q,
                                           self.mod)
                    continue
                if unit != 1:
                    wq = pow(unit, -1, self.mod)
                    val = (val * wq) % self.mod
                    if self.track:
                        tval = (tval * wq) % self.mod
                if rr is None:
                    self.rows.append((idx, val, tidx, tval))
                    self.pivot_of[c] = len(self.rows) - 1
                    self.pivot_v.append(v)
                else:
                    r = rr
                    old = self.rows[r]
                    self.rows[r] = (idx, val, tidx, tval)
                    self.pivot_v[r] = v
                    jobs.append(old)
                if v:
                    t = _ipow(self.p, self.E - v)
                    sv = (val * t) % self.mod
                    keep = sv != 0
                    if self.track:
                        stv = (tval * t) % self.mod
                        tkeep = stv != 0
                        jobs.append((idx[keep], sv[keep], tidx[tkeep],
                                     stv[tkeep]))
                    elif keep.any():
                        jobs.append((idx[keep], sv[keep], _EMPTY, _EMPTY))
                break

    def reduce(self, idx, val):
        """Non-destructive greedy reduction; see the fallback."""
        cdef long long a, v, _u, q, pv
        cdef Py_ssize_t c, r
        tidx, tval = _EMPTY, _EMPTY
        while len(idx):
            c = idx[0]
            rr = self.pivot_of.get(c)
            if rr is None:
                return idx, val, tidx, tval, True
            r = rr
            pv = self.pivot_v[r]
            a = val[0]
            v, _u = _val_unit(a, self.p)
            if v < pv:
                return idx, val, tidx, tval, True
            q = a // _ipow(self.p, pv)
            ridx, rval, rtidx, rtval = self.rows[r]
            idx, val = _axpy(idx, val, ridx, rval, q, self.mod)
            if self.track:
                tidx, tval = _axpy(tidx, tval, rtidx, rtval, -q, self.mod)
        return idx, val, tidx, tval, False

    def solve(self, idx, val):
        """Express the row over the original insertions, or None."""
        ridx, _rv, tidx, tval, stuck = self.reduce(idx, val)
        if stuck or len(ridx):
            return None
        return tidx, tval

    def contains(self, idx, val):
        ridx, _rv, _ti, _tv, stuck = self.reduce(idx, val)
        return not stuck and len(ridx) == 0

    def span_exponent(self):
        """log_p of the order of the row span."""
        cdef long long out = 0
        for v in self.pivot_v:
            out += self.E - <long long> v
        return out

    def pivots(self):
        """Sorted list of (column, valuation)."""
        return sorted((c, self.pivot_v[r])
                      for c, r in self.pivot_of.items())
