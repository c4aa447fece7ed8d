"""Exact sparse row echelon over Z/p**E with transform tracking.

This is the hot kernel of the whole package: every kernel, image,
membership and quotient computation upstairs reduces to inserting sparse
rows into one of these echelons.  A compiled twin lives in ``_core.pyx``;
this module is the reference implementation and the import-time fallback.

Rows live in (Z/p**E)**ncols, stored as a pair of int64 arrays (indices
strictly increasing, values nonzero mod p**E).  Two design points carry
the correctness of everything built on top:

* pivots are normalised to exact powers p**v (unit part divided out),
  and whenever a pivot of valuation v > 0 appears, the annihilator tail
  p**(E-v) * row is inserted as well.  The resulting family is a
  Howell-style basis: any element of the row span reduces to zero by the
  greedy single pass, so membership tests and solves never backtrack.

* with ``track=True`` each row carries its expression in terms of the
  originally inserted rows (also sparse), and rows that reduce to zero
  push their transforms onto ``kernel``.  Those transforms generate the
  full relation module {t : sum_i t_i * row_i = 0} over Z/p**E -- the
  standard stacked-echelon argument, which needs the annihilator tails.
"""

import numpy as np

_I64 = np.int64
_EMPTY = np.empty(0, dtype=_I64)


def canon_sparse(idx, val, mod):
    """Sort, merge duplicate indices, reduce mod ``mod``, drop zeros."""
    idx = np.asarray(idx, dtype=_I64)
    val = np.asarray(val, dtype=_I64) % mod
    if len(idx) == 0:
        return _EMPTY, _EMPTY
    order = np.argsort(idx, kind="stable")
    idx = idx[order]
    val = val[order]
    uniq, start = np.unique(idx, return_index=True)
    sums = np.add.reduceat(val, start) % mod
    keep = sums != 0
    return uniq[keep], sums[keep]


def _axpy(ri, rv, si, sv, q, mod):
    # r - q*s over Z/mod, both sparse with strictly increasing indices.
    n1, n2 = len(ri), len(si)
    w = (-q) % mod
    if n2 == 0 or w == 0:
        return ri, rv
    if n1 == 0:
        sv2 = (w * sv) % mod
        keep = sv2 != 0
        return si[keep], sv2[keep]
    width = int(ri[-1] if ri[-1] > si[-1] else si[-1]) + 1
    if 3 * (n1 + n2) >= width:
        # dense scatter: echelon rows fill in fast, and once they do the
        # merge path wastes its time in searchsorted
        out = np.zeros(width, dtype=_I64)
        out[ri] = rv
        out[si] = (out[si] + w * sv) % mod
        idx = np.flatnonzero(out)
        return idx, out[idx]
    # linear merge of the two sorted runs; an index occurs at most twice
    # in the merged stream, so duplicate collapse is one shifted compare
    m = n1 + n2
    idx = np.empty(m, dtype=_I64)
    val = np.empty(m, dtype=_I64)
    p1 = np.arange(n1, dtype=_I64) + np.searchsorted(si, ri, side="left")
    p2 = np.arange(n2, dtype=_I64) + np.searchsorted(ri, si, side="right")
    idx[p1] = ri
    idx[p2] = si
    val[p1] = rv
    val[p2] = (w * sv) % mod
    dup = np.flatnonzero(idx[1:] == idx[:-1])
    if len(dup):
        val[dup] = (val[dup] + val[dup + 1]) % mod
    keep = val != 0
    if len(dup):
        keep[dup + 1] = False
    return idx[keep], val[keep]


def _val_unit(a, p):
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    return v, a


class Echelon:
    """Row echelon over Z/p**E; see module docstring."""

    __slots__ = ("p", "E", "mod", "track", "rows", "pivot_of", "pivot_v",
                 "kernel")

    def __init__(self, p, E, track=False):
        if E <= 0:
            raise ValueError("E must be positive")
        self.p = int(p)
        self.E = int(E)
        self.mod = self.p ** self.E
        self.track = bool(track)
        self.rows = []        # (idx, val, tidx, tval)
        self.pivot_of = {}    # column -> row number
        self.pivot_v = []     # valuation of each row's pivot
        self.kernel = []      # sparse transforms of rows that died

    def insert(self, idx, val, tidx=None, tval=None):
        """Insert one row (and its tails); arrays must be canonical."""
        if tidx is None:
            tidx, tval = _EMPTY, _EMPTY
        jobs = [(idx, val, tidx, tval)]
        while jobs:
            idx, val, tidx, tval = jobs.pop()
            while True:
                if len(idx) == 0:
                    if self.track and len(tidx):
                        self.kernel.append((tidx, tval))
                    break
                c = int(idx[0])
                a = int(val[0])
                v, unit = _val_unit(a, self.p)
                r = self.pivot_of.get(c)
                if r is not None and v >= self.pivot_v[r]:
                    q = a // (self.p ** self.pivot_v[r])
                    ridx, rval, rtidx, rtval = self.rows[r]
                    idx, val = _axpy(idx, val, ridx, rval, q, self.mod)
                    if self.track:
                        tidx, tval = _axpy(tidx, tval, rtidx, rtval, q,
                                           self.mod)
                    continue
                # new pivot at column c (fresh, or displacing a deeper one)
                if unit != 1:
                    w = pow(unit, -1, self.mod)
                    val = (val * w) % self.mod
                    if self.track:
                        tval = (tval * w) % self.mod
                if r is None:
                    self.rows.append((idx, val, tidx, tval))
                    self.pivot_of[c] = len(self.rows) - 1
                    self.pivot_v.append(v)
                else:
                    old = self.rows[r]
                    self.rows[r] = (idx, val, tidx, tval)
                    self.pivot_v[r] = v
                    jobs.append(old)
                if v:
                    t = self.p ** (self.E - v)
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
        """Non-destructive greedy reduction.

        Returns (ridx, rval, tidx, tval, stuck) with
        input = residue + transform . original_rows; ``stuck`` is True if
        a leading entry could not be cleared (residue nonzero and no
        further progress possible -- i.e. not in the span).
        """
        tidx, tval = _EMPTY, _EMPTY
        while len(idx):
            c = int(idx[0])
            r = self.pivot_of.get(c)
            if r is None:
                return idx, val, tidx, tval, True
            pv = self.pivot_v[r]
            a = int(val[0])
            v, _ = _val_unit(a, self.p)
            if v < pv:
                return idx, val, tidx, tval, True
            q = a // (self.p ** pv)
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
        return sum(self.E - v for v in self.pivot_v)

    def pivots(self):
        """Sorted list of (column, valuation)."""
        return sorted((c, self.pivot_v[r]) for c, r in self.pivot_of.items())
