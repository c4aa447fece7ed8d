"""Group cohomology via the normalised bar complex.

Cochains of degree n assign a module element to every n-tuple of
non-identity group elements (the normalised complex: anything touching
the identity is zero).  The single differential formula

    (d phi)(g_1..g_{n+1}) = phi(g_2..g_{n+1})
        + sum_i (-1)^i phi(.., g_i g_{i+1}, ..)
        + (-1)^{n+1} phi(g_1..g_n) . g_{n+1}

is used in two independent implementations: a dense vectorised one on
Cochain values (used for evaluation and verification) and a sparse
row-per-basis assembly feeding the echelon kernel (used to compute
kernels, images, and quotient structures one prime at a time).  The two
are cross-checked in the test suite.

Degree 0 needs no special case: the formula collapses to
(d a)(g) = a - a.g, whose kernel is the invariants.
"""

import math

import numpy as np

from . import linalg
from .errors import DegreeTooLarge, NotACocycle, SearchBudgetExceeded, \
    ValidationError
from .kernels import Echelon, canon_sparse

_I64 = np.int64

DEGREE_LIMIT = 3          # highest degree whose cohomology we report
_CELL_BUDGET = 20_000_000


def tuple_count(G, n):
    return (G.n - 1) ** n


class Cochain:
    """Degree-n normalised cochain; values indexed by tuples of
    non-identity elements, first component most significant."""

    __slots__ = ("module", "degree", "values")

    def __init__(self, module, degree, values):
        self.module = module
        self.degree = int(degree)
        m = module.group.n - 1
        shape = (m ** self.degree, module.rank)
        values = np.asarray(values, dtype=_I64).reshape(shape)
        self.values = module.reduce(values)

    @classmethod
    def zero(cls, module, degree):
        m = module.group.n - 1
        return cls(module, degree,
                   np.zeros((m ** degree, module.rank), dtype=_I64))

    def copy(self):
        return Cochain(self.module, self.degree, self.values.copy())

    def __add__(self, other):
        self._check(other)
        return Cochain(self.module, self.degree,
                       self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return Cochain(self.module, self.degree,
                       self.values - other.values)

    def __neg__(self):
        return Cochain(self.module, self.degree, -self.values)

    def scale(self, k):
        return Cochain(self.module, self.degree, int(k) * self.values)

    def _check(self, other):
        if (other.module is not self.module
                and other.module.fingerprint() != self.module.fingerprint()):
            raise ValidationError("cochains over different modules")
        if other.degree != self.degree:
            raise ValidationError("cochains of different degrees")

    def is_zero(self):
        return not self.values.any()

    def tuple_index(self, gs):
        m = self.module.group.n - 1
        t = 0
        for g in gs:
            t = t * m + (int(g) - 1)
        return t

    def value(self, gs):
        """Value on a tuple of group elements (identity kills it)."""
        if len(gs) != self.degree:
            raise ValidationError("tuple length must match the degree")
        if any(int(g) == 0 for g in gs):
            return self.module.zero()
        return self.values[self.tuple_index(gs)].copy()

    def d(self):
        """The differential, densely vectorised."""
        M = self.module
        G = M.group
        m = G.n - 1
        n = self.degree
        r = M.rank
        N = m ** (n + 1)
        out = np.zeros((N, r), dtype=_I64)
        if N == 0 or r == 0:
            return Cochain(M, n + 1, out)
        idx = np.arange(N, dtype=_I64)
        out += self.values[idx % (m ** n)]                 # phi(g_2..)
        digits = np.empty((N, n + 1), dtype=_I64)
        rem = idx.copy()
        for pos in range(n, -1, -1):
            digits[:, pos] = rem % m + 1
            rem //= m
        for i in range(1, n + 1):
            a = digits[:, i - 1]
            b = digits[:, i]
            merged = G.mul[a, b].astype(_I64)
            hiP = m ** (n - i)
            hi = idx // (m * m * hiP)
            lo = idx % hiP
            ok = merged != 0
            sub = (hi * m + (merged - 1)) * hiP + lo
            contrib = np.zeros((N, r), dtype=_I64)
            contrib[ok] = self.values[sub[ok]]
            out += ((-1) ** i) * contrib
        pref = self.values[idx // m]
        acted = np.einsum("tj,tjk->tk", pref, M.act[digits[:, n]])
        out += ((-1) ** (n + 1)) * acted
        return Cochain(M, n + 1, out)

    def is_cocycle(self):
        return self.d().is_zero()

    def __eq__(self, other):
        return (isinstance(other, Cochain) and self.degree == other.degree
                and (self.values == other.values).all())

    def __repr__(self):
        return (f"<{self.degree}-cochain on {self.module!r}, "
                f"{int(np.count_nonzero(self.values))} nonzero entries>")


def cochain_from_function(module, degree, fn):
    """Build a cochain by evaluating fn(tuple-of-elements) -> row."""
    G = module.group
    m = G.n - 1
    vals = np.zeros((m ** degree, module.rank), dtype=_I64)
    digits = np.zeros(degree, dtype=_I64)
    for t in range(m ** degree):
        rem = t
        for pos in range(degree - 1, -1, -1):
            digits[pos] = rem % m + 1
            rem //= m
        vals[t] = np.asarray(fn(tuple(int(g) for g in digits)),
                             dtype=_I64)
    return Cochain(module, degree, vals)


def _diff_coo(module, n):
    """Sparse rows of d_n : C^n -> C^{n+1} as COO (row, col, val).

    Row index = tuple_index * rank + coord; values are reduced mod the
    order of the column coordinate.
    """
    G = module.group
    m = G.n - 1
    r = module.rank
    Nd = m ** n
    ordarr = np.array(module.orders, dtype=_I64)
    jj = np.arange(r, dtype=_I64)
    R, C, V = [], [], []

    def emit_diag(trow, tcol, coeff):
        rows = (trow[:, None] * r + jj).ravel()
        cols = (tcol[:, None] * r + jj).ravel()
        R.append(rows)
        C.append(cols)
        V.append(np.repeat(coeff, r))

    t = np.arange(Nd, dtype=_I64)
    g = np.arange(1, m + 1, dtype=_I64)
    tt = np.repeat(t, m)
    gg = np.tile(g, Nd)
    emit_diag(tt, (gg - 1) * Nd + tt, np.ones(Nd * m, dtype=_I64))
    for i in range(1, n + 1):
        hiP = m ** (n - i)
        hi = t // (m * hiP)
        di = (t // hiP) % m + 1
        lo = t % hiP
        tt = np.repeat(t, m)
        aa = np.tile(g, Nd)
        dii = np.repeat(di, m)
        bb = G.mul[G.inv[aa], dii].astype(_I64)
        keep = bb != 0
        hii = np.repeat(hi, m)[keep]
        loo = np.repeat(lo, m)[keep]
        sig = ((hii * m + (aa[keep] - 1)) * m + (bb[keep] - 1)) * hiP + loo
        emit_diag(tt[keep], sig,
                  np.full(int(keep.sum()), (-1) ** i, dtype=_I64))
    tt = np.repeat(t, m)
    gg = np.tile(g, Nd)
    sig = tt * m + (gg - 1)
    sgn = (-1) ** (n + 1)
    acts = module.act[gg]
    P = len(tt)
    rows = np.broadcast_to((tt[:, None, None] * r + jj[None, :, None]),
                           (P, r, r)).ravel()
    cols = np.broadcast_to((sig[:, None, None] * r + jj[None, None, :]),
                           (P, r, r)).ravel()
    R.append(rows)
    C.append(cols)
    V.append((sgn * acts).ravel())
    rows = np.concatenate(R)
    cols = np.concatenate(C)
    vals = np.concatenate(V)
    if r:
        vals = vals % ordarr[cols % r]
    keep = vals != 0
    return rows[keep], cols[keep], vals[keep]


class _SortedCOO:
    """COO sorted by row with per-row slicing."""

    def __init__(self, rows, cols, vals, n_rows):
        order = np.lexsort((cols, rows))
        self.rows = rows[order]
        self.cols = cols[order]
        self.vals = vals[order]
        self.starts = np.searchsorted(self.rows, np.arange(n_rows + 1))
        self.n_rows = n_rows

    def row(self, b):
        s, e = self.starts[b], self.starts[b + 1]
        return self.cols[s:e], self.vals[s:e]


def diff_matrix(module, n):
    """Dense integer matrix of d_n (rows C^n basis, cols C^{n+1})."""
    G = module.group
    m = G.n - 1
    r = module.rank
    nr, nc = (m ** n) * r, (m ** (n + 1)) * r
    if nr * nc > _CELL_BUDGET:
        raise SearchBudgetExceeded(
            f"dense differential of {nr} x {nc} entries refused")
    out = np.zeros((nr, nc), dtype=_I64)
    rows, cols, vals = _diff_coo(module, n)
    np.add.at(out, (rows, cols), vals)
    if r:
        out %= np.array(module.orders, dtype=_I64)[
            np.arange(nc, dtype=_I64) % r]
    return out


def bar_complex(module, max_degree):
    """Differential matrices [d_0, ..., d_{max_degree}] (dense).

    Consecutive products vanish modulo the coordinate orders; the
    matrices act on row vectors of cochain values.
    """
    return [diff_matrix(module, n) for n in range(max_degree + 1)]


# ----------------------------------------------------------------------

class _PrimePiece:
    """Per-prime state of one cohomology group (see cohomology())."""

    __slots__ = ("p", "E", "mod", "apos", "aexps", "scale", "echB",
                 "full", "kp", "V", "w", "gens_embedded")


class CohomologyClass:
    """A class in a fixed CohomologyGroup, as coordinates over its
    invariant-factor basis."""

    __slots__ = ("hgroup", "coords")

    def __init__(self, hgroup, coords):
        coords = tuple(int(c) % int(d)
                       for c, d in zip(coords, hgroup.invariants))
        if len(coords) != len(hgroup.invariants):
            raise ValidationError("coordinate length mismatch")
        self.hgroup = hgroup
        self.coords = coords

    def rep(self):
        return self.hgroup.rep(self.coords)

    def is_zero(self):
        return all(c == 0 for c in self.coords)

    def __eq__(self, other):
        return (isinstance(other, CohomologyClass)
                and self.hgroup is other.hgroup
                and self.coords == other.coords)

    def __hash__(self):
        return hash((id(self.hgroup), self.coords))

    def __add__(self, other):
        if other.hgroup is not self.hgroup:
            raise ValidationError("classes in different groups")
        return CohomologyClass(
            self.hgroup, tuple(a + b for a, b
                               in zip(self.coords, other.coords)))

    def __neg__(self):
        return CohomologyClass(self.hgroup,
                               tuple(-c for c in self.coords))

    def __repr__(self):
        return f"<class {self.coords} in {self.hgroup!r}>"


class CohomologyGroup:
    """H^n(G, M): invariant factors, representative cocycles, and a
    projection sending any cocycle to its class coordinates."""

    def __init__(self, group, module, degree, invariants, order, reps,
                 pieces, cm_cache):
        self.group = group
        self.module = module
        self.degree = degree
        self.invariants = invariants
        self.order = order
        self.reps = reps
        self._pieces = pieces
        self._cm = cm_cache

    @property
    def zero_class(self):
        return tuple(0 for _ in self.invariants)

    def is_zero_class(self, coords):
        return all(int(c) == 0 for c in coords)

    def rep(self, coords):
        if len(coords) != len(self.invariants):
            raise ValidationError("coordinate tuple has the wrong length")
        out = Cochain.zero(self.module, self.degree)
        for c, rp in zip(coords, self.reps):
            out = out + rp.scale(int(c))
        return out

    def class_of(self, coch, check=True):
        """Class coordinates of a cocycle (NotACocycle otherwise)."""
        if coch.degree != self.degree:
            raise ValidationError("cochain degree mismatch")
        if coch.module.fingerprint() != self.module.fingerprint():
            raise ValidationError("cochain module mismatch")
        r = self.module.rank
        out = _coords_from_pieces(self._pieces, self.invariants,
                                  coch.values.ravel(), r)
        if check:
            z = (coch - self.rep(out)).values.ravel()
            if not _flat_in_B(self._pieces, z, r):
                raise ArithmeticError(
                    "class coordinates failed verification")
        return out

    def cls(self, coords):
        return CohomologyClass(self, coords)

    def classify(self, coch, check=True):
        return CohomologyClass(self, self.class_of(coch, check=check))

    def all_classes(self):
        invs = self.invariants
        if not invs:
            yield ()
            return
        idx = [0] * len(invs)
        while True:
            yield tuple(idx)
            j = len(invs) - 1
            while j >= 0:
                idx[j] += 1
                if idx[j] < invs[j]:
                    break
                idx[j] = 0
                j -= 1
            if j < 0:
                return

    def __repr__(self):
        inv = " x ".join(f"Z/{d}" for d in self.invariants) or "0"
        return f"<H^{self.degree} = {inv}>"


def _embed_cochain(flat, r, pc):
    """Embed a flat cochain value vector into the prime piece's space."""
    if r == 0:
        return np.empty(0, _I64), np.empty(0, _I64)
    n_tup = len(flat) // r
    block = flat.reshape(n_tup, r)[:, pc.apos]
    vals = (block * pc.scale[None, :]) % pc.mod
    sidx = np.flatnonzero(vals.ravel()).astype(_I64)
    return sidx, vals.ravel()[sidx]


def _coords_from_pieces(pieces, invariants, flat, r):
    """Coordinates of a flat cocycle vector over the invariant factors."""
    slots = len(invariants)
    out = [0] * slots
    for pc in pieces:
        sidx, sval = _embed_cochain(flat, r, pc)
        sol = pc.full.solve(sidx, sval)
        if sol is None:
            raise NotACocycle("cochain is not a cocycle for this group")
        t = np.zeros(pc.kp, dtype=_I64)
        t[sol[0]] = sol[1]
        c = (t @ pc.V) % pc.mod if pc.kp else np.empty(0, _I64)
        nzpos = [j for j in range(pc.kp) if pc.w[j] > 0]
        nzpos.sort(key=lambda j: -pc.w[j])
        for rank_, j in enumerate(nzpos):
            slot = slots - 1 - rank_
            pw = pc.p ** pc.w[j]
            cj = int(c[j]) % pw
            if cj:
                d = int(invariants[slot])
                m = d // pw
                eps = (m * pow(m, -1, pw)) % d if m > 1 else 1
                out[slot] = (out[slot] + cj * eps) % d
    return tuple(out)


def _flat_in_B(pieces, flat, r):
    """Whether a flat vector lies in the coboundary span (all primes)."""
    for pc in pieces:
        sidx, sval = _embed_cochain(flat, r, pc)
        if not pc.echB.contains(sidx, sval):
            return False
    return True


def _flat_structure(ordarr, Ntup, dn, dprev):
    """Kernel-mod-image structure of a flat coordinate space.

    The space has Ntup tuple slots of rank len(ordarr), coordinate j of
    each slot taken mod ordarr[j]; dn holds sparse rows of the outgoing
    differential (one per flat coordinate), dprev of the incoming one
    (or None).  Returns (invariants, order, rep value arrays, pieces).
    This is the engine shared by the bar complex and the
    compact-support cone; see cohomology() for the calling side.
    """
    r = len(ordarr)
    pieces = []
    order = 1
    per_prime_struct = []
    for p, apos, aexps in linalg.p_parts(ordarr):
        pc = _PrimePiece()
        pc.p, pc.apos, pc.aexps = p, apos, aexps
        pc.E = int(aexps.max())
        pc.mod = p ** pc.E
        pc.scale = p ** (pc.E - aexps)
        rp = len(apos)
        posmap = np.full(r, -1, dtype=_I64)
        posmap[apos] = np.arange(rp)

        def prow(cc, vv):
            """Project a COO row slice to the prime's column space."""
            j = cc % r
            keep = posmap[j] >= 0
            cc2 = (cc[keep] // r) * rp + posmap[j[keep]]
            vv2 = (vv[keep] * pc.scale[posmap[j[keep]]]) % pc.mod
            return canon_sparse(cc2, vv2, pc.mod)

        # cocycles: kernel transforms of d_n over the p-basis
        ech = Echelon(p, pc.E, track=True)
        for t in range(Ntup):
            for pos in range(rp):
                b = t * r + int(apos[pos])
                ech.insert(*prow(*dn.row(b)),
                           tidx=np.array([t * rp + pos], dtype=_I64),
                           tval=np.array([1], dtype=_I64))
        # coboundaries
        pc.echB = Echelon(p, pc.E)
        if dprev is not None:
            for b in range(dprev.n_rows):
                j = b % r
                if posmap[j] >= 0:
                    pc.echB.insert(*prow(*dprev.row(b)))
        b_exp = pc.echB.span_exponent()
        # kernel transforms -> embedded elements of the slot space
        sel = Echelon(p, pc.E)
        for tidx, tval in ech.kernel:
            exps_of = aexps[tidx % rp]
            vv = (tval % (p ** exps_of)) * (p ** (pc.E - exps_of)) % pc.mod
            nz = vv != 0
            ri, rv, _t, _tv, _s = pc.echB.reduce(tidx[nz], vv[nz])
            sel.insert(ri, rv)
        zsel = [(ri.copy(), rv.copy()) for ri, rv, _t, _tv in sel.rows]
        pc.full = Echelon(p, pc.E, track=True)
        if dprev is not None:
            for b in range(dprev.n_rows):
                j = b % r
                if posmap[j] >= 0:
                    pc.full.insert(*prow(*dprev.row(b)))
        for a, (ri, rv) in enumerate(zsel):
            pc.full.insert(ri, rv, np.array([a], dtype=_I64),
                           np.array([1], dtype=_I64))
        h_exp = pc.full.span_exponent() - b_exp
        order *= p ** h_exp
        pc.kp = len(zsel)
        if pc.kp:
            Rm = np.zeros((max(len(pc.full.kernel), 1), pc.kp), dtype=_I64)
            for i, (ti, tv) in enumerate(pc.full.kernel):
                Rm[i, ti] = tv
            pc.w, pc.V, Vinv = linalg.snf_mod(Rm, p, pc.E)
        else:
            pc.w, pc.V, Vinv = [], np.zeros((0, 0), _I64), \
                np.zeros((0, 0), _I64)
        if sum(pc.w) != h_exp:
            raise ArithmeticError("cohomology structure order mismatch")
        cm = linalg.crt_mult(ordarr, p, apos, aexps)
        gens_p = []
        for j in range(pc.kp):
            acc = np.zeros((Ntup, rp), dtype=_I64)
            for a, (ri, rv) in enumerate(zsel):
                c = int(Vinv[j, a]) % pc.mod
                if c:
                    dense = np.zeros(Ntup * rp, dtype=_I64)
                    dense[ri] = rv
                    acc = (acc + c * (dense.reshape(Ntup, rp)
                                      // pc.scale[None, :])) \
                        % (p ** aexps)[None, :]
            full_vals = np.zeros((Ntup, r), dtype=_I64)
            full_vals[:, apos] = (acc * cm[None, :]) % ordarr[apos][None, :]
            gens_p.append(full_vals)
        per_prime_struct.append((p, pc.w, gens_p))
        pieces.append(pc)

    # CRT merge into invariant factors (descending slots, then reversed)
    per = []
    slots = 0
    for p, w, gens_p in per_prime_struct:
        nz = [(w[j], gens_p[j]) for j in range(len(w)) if w[j] > 0]
        nz.sort(key=lambda t: -t[0])
        per.append((p, nz))
        slots = max(slots, len(nz))
    invs, reps = [], []
    for j in range(slots):
        d = 1
        vals = np.zeros((Ntup, r), dtype=_I64)
        for p, nz in per:
            if j < len(nz):
                d *= p ** nz[j][0]
                vals = (vals + nz[j][1]) % ordarr[None, :]
        invs.append(d)
        reps.append(vals)
    invs.reverse()
    reps.reverse()
    if order != math.prod(int(d) for d in invs):
        raise ArithmeticError("invariant factors do not match the order")
    return tuple(invs), order, reps, pieces


_COH_CACHE = {}


def clear_cache():
    _COH_CACHE.clear()


def cohomology(G, M, n, use_cache=True):
    """H^n(G, M) with full structure; degrees 0..3."""
    if M.group is not G and M.group.fingerprint() != G.fingerprint():
        raise ValidationError("module is not over the given group")
    if n < 0:
        raise ValidationError("negative degree")
    if n > DEGREE_LIMIT:
        raise DegreeTooLarge(
            f"degree {n} beyond the supported limit {DEGREE_LIMIT}")
    key = (G.fingerprint(), M.fingerprint(), n)
    if use_cache and key in _COH_CACHE:
        return _COH_CACHE[key]
    m = G.n - 1
    r = M.rank
    if (m ** (n + 1)) * max(r, 1) > _CELL_BUDGET:
        raise SearchBudgetExceeded("cochain space exceeds the cell budget")
    ordarr = np.array(M.orders, dtype=_I64)

    if r == 0:
        H = CohomologyGroup(G, M, n, (), 1, [], [], None)
        if use_cache:
            _COH_CACHE[key] = H
        return H

    Nd = m ** n
    dn = _SortedCOO(*_diff_coo(M, n), Nd * r)
    dprev = _SortedCOO(*_diff_coo(M, n - 1),
                       (m ** (n - 1)) * r) if n >= 1 else None
    invs, order, rep_arrays, pieces = _flat_structure(ordarr, Nd, dn, dprev)
    reps = [Cochain(M, n, v) for v in rep_arrays]
    H = CohomologyGroup(G, M, n, invs, order, reps, pieces, None)
    for rp_ in reps:
        if not rp_.is_cocycle():
            raise ArithmeticError("representative is not a cocycle")
    if use_cache:
        _COH_CACHE[key] = H
    return H


def solve_coboundary(M, c):
    """b with db = c (one prime at a time), or None if c is not exact."""
    n = c.degree
    if n < 1:
        raise ValidationError("degree must be at least 1")
    G = M.group
    m = G.n - 1
    r = M.rank
    if r == 0:
        return Cochain.zero(M, n - 1)
    Np = m ** (n - 1)
    ordarr = np.array(M.orders, dtype=_I64)
    dprev = _SortedCOO(*_diff_coo(M, n - 1), Np * r)
    flat = c.values.ravel()
    out = np.zeros((Np, r), dtype=_I64)
    for p, apos, aexps in linalg.p_parts(ordarr):
        E = int(aexps.max())
        mod = p ** E
        scale = p ** (E - aexps)
        rp = len(apos)
        posmap = np.full(r, -1, dtype=_I64)
        posmap[apos] = np.arange(rp)
        ech = Echelon(p, E, track=True)
        for b in range(Np * r):
            j = b % r
            if posmap[j] < 0:
                continue
            cc, vv = dprev.row(b)
            jj = cc % r
            keep = posmap[jj] >= 0
            cc2 = (cc[keep] // r) * rp + posmap[jj[keep]]
            vv2 = (vv[keep] * scale[posmap[jj[keep]]]) % mod
            tpos = (b // r) * rp + int(posmap[j])
            ech.insert(*canon_sparse(cc2, vv2, mod),
                       tidx=np.array([tpos], dtype=_I64),
                       tval=np.array([1], dtype=_I64))
        blockv = flat.reshape(m ** n, r)[:, apos]
        ev = (blockv * scale[None, :]) % mod
        sidx = np.flatnonzero(ev.ravel()).astype(_I64)
        sol = ech.solve(sidx, ev.ravel()[sidx])
        if sol is None:
            return None
        cm = linalg.crt_mult(ordarr, p, apos, aexps)
        t = np.zeros(Np * rp, dtype=_I64)
        t[sol[0]] = sol[1]
        t = t.reshape(Np, rp) % (p ** aexps)[None, :]
        out[:, apos] = (out[:, apos] + t * cm[None, :]) % ordarr[apos]
    b = Cochain(M, n - 1, out)
    if not (b.d() - c).is_zero():
        raise ArithmeticError("coboundary solve verification failed")
    return b


def is_coboundary(M, c):
    return solve_coboundary(M, c) is not None


def pullback_cochain(f, c, module=None):
    """f^* c for a group hom f: pull a cochain back along f.

    The module is pulled back too (action through f); pass ``module`` to
    reuse an existing pulled-back module instance.
    """
    from .modules import pullback_module
    if f.dst.fingerprint() != c.module.group.fingerprint():
        raise ValidationError("hom target does not match the cochain group")
    Mp = pullback_module(c.module, f) if module is None else module
    Gp = f.src
    mp = Gp.n - 1
    n = c.degree
    mG = c.module.group.n - 1
    N = mp ** n
    vals = np.zeros((N, c.module.rank), dtype=_I64)
    if N and c.module.rank:
        idx = np.arange(N, dtype=_I64)
        mapped_idx = np.zeros(N, dtype=_I64)
        ok = np.ones(N, dtype=bool)
        img = f.image.astype(_I64)
        for pos in range(n):          # most significant digit first
            digit = idx // (mp ** (n - 1 - pos)) % mp + 1
            fg = img[digit]
            ok &= fg != 0
            mapped_idx = mapped_idx * mG + np.maximum(fg - 1, 0)
        vals[ok] = c.values[mapped_idx[ok]]
    return Cochain(Mp, n, vals)


def pullback_class(psi, cls):
    """psi^* on cohomology classes: the class of c o (psi x psi) in the
    cohomology of psi's source with the pulled-back module."""
    from .modules import pullback_module
    H_src = cls.hgroup
    Mp = pullback_module(H_src.module, psi)
    Hp = cohomology(psi.src, Mp, H_src.degree)
    cc = pullback_cochain(psi, H_src.rep(cls.coords), module=Mp)
    return Hp.classify(cc)
