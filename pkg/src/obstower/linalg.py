"""Exact linear algebra over finite abelian groups and over Z.

An element of A = Z/d_1 x ... x Z/d_r is an integer row vector of
length r, reduced mod the coordinate orders.  All finite computations
are done one prime at a time: the p-primary part of A embeds into
(Z/p**E)**m by scaling coordinate k with p**(E - e_k), after which the
echelon kernel does the work, and CRT idempotents put the answers back
together.  The uniform exponent E is the max over *both* sides of a
map, which is what makes kernels of maps like Z/9 -> Z/3 come out
right (the annihilator tails in the echelon supply the p**e relations).

The integer (Z) routines at the bottom are small dense classics --
Hermite and Smith forms with a deterministic pivot rule (smallest
nonzero absolute value, ties row-major) -- used for simplicial homology
and lattice work, where matrices stay small.
"""

import numpy as np

from .kernels import Echelon

_I64 = np.int64


def _factor(n):
    n = int(n)
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def p_parts(orders):
    """[(p, idx, exps)] for each prime dividing some coordinate order.

    ``idx`` holds the ambient coordinates with p-support, ``exps`` the
    exponent of p in their orders.  Sorted by p.
    """
    orders = np.asarray(orders, dtype=_I64)
    supp = {}
    for i, d in enumerate(orders):
        for p, e in _factor(int(d)).items():
            supp.setdefault(p, []).append((i, e))
    out = []
    for p in sorted(supp):
        idx = np.array([i for i, _ in supp[p]], dtype=_I64)
        exps = np.array([e for _, e in supp[p]], dtype=_I64)
        out.append((p, idx, exps))
    return out


def crt_mult(orders, p, idx, exps):
    """Multipliers c_i = 1 mod p**e_i, = 0 mod cofactor, one per coord.

    Scaling the p-part value of coordinate i by c_i lands it in the
    p-primary component of the ambient module.
    """
    orders = np.asarray(orders, dtype=_I64)
    out = np.zeros(len(idx), dtype=_I64)
    for j, (i, e) in enumerate(zip(idx, exps)):
        pe = int(p) ** int(e)
        m = int(orders[i]) // pe
        out[j] = (m * pow(m, -1, pe)) % int(orders[i]) if m > 1 else 1
    return out


def _embed_row(row, idx, scale, mod):
    vals = (np.asarray(row, dtype=_I64)[idx] * scale) % mod
    keep = vals != 0
    return np.flatnonzero(keep).astype(_I64), vals[keep]


def _unembed(sidx, sval, scale, k):
    out = np.zeros(k, dtype=_I64)
    out[sidx] = sval // scale[sidx]
    return out


class KernelImage:
    """Kernel generators and kernel/image orders of a module hom."""

    __slots__ = ("kernel", "kernel_order", "image_order")

    def __init__(self, kernel, kernel_order, image_order):
        self.kernel = kernel
        self.kernel_order = kernel_order
        self.image_order = image_order


def kernel_image(M, dom_orders, cod_orders):
    """Kernel and image of x -> x.M between finite abelian groups.

    M is (len(dom) x len(cod)); rows must be well defined, i.e.
    d_i * M[i] = 0 in the codomain (checked).  The certificate
    |ker| * |im| = |dom| is verified per prime.
    """
    M = np.asarray(M, dtype=_I64)
    dom_orders = np.asarray(dom_orders, dtype=_I64)
    cod_orders = np.asarray(cod_orders, dtype=_I64)
    if M.shape != (len(dom_orders), len(cod_orders)):
        raise ValueError("matrix shape does not match the given orders")
    if len(cod_orders) and len(dom_orders):
        if ((M * dom_orders[:, None]) % cod_orders[None, :]).any():
            raise ValueError("matrix is not well defined modulo the orders")

    gens = []
    ker_order = 1
    im_order = 1
    dom_total = int(np.prod(dom_orders, dtype=object)) if len(dom_orders) else 1
    cod_sup = {p: (i, e) for p, i, e in p_parts(cod_orders)}
    for p, didx, dexps in p_parts(dom_orders):
        cidx, cexps = cod_sup.get(p, (np.empty(0, _I64), np.empty(0, _I64)))
        E = int(max(dexps.max(initial=0), cexps.max(initial=0)))
        mod = p ** E
        cscale = p ** (E - cexps)
        ech = Echelon(p, E, track=True)
        for a, i in enumerate(didx):
            ech.insert(*_embed_row(M[i], cidx, cscale, mod),
                       tidx=np.array([a], dtype=_I64),
                       tval=np.array([1], dtype=_I64))
        im_order *= p ** ech.span_exponent()
        # re-echelon the collected transforms inside the domain p-part
        Ed = int(dexps.max())
        dscale = p ** (Ed - dexps)
        kech = Echelon(p, Ed)
        for tidx, tval in ech.kernel:
            row = np.zeros(len(didx), dtype=_I64)
            row[tidx] = tval % (p ** dexps[tidx])
            kech.insert(*_embed_row(row, np.arange(len(didx)), dscale,
                                    p ** Ed))
        ker_order *= p ** kech.span_exponent()
        if ech.span_exponent() + kech.span_exponent() != int(dexps.sum()):
            raise ArithmeticError("kernel/image certificate failed")
        cm = crt_mult(dom_orders, p, didx, dexps)
        for sidx, sval, _ti, _tv in kech.rows:
            part = _unembed(sidx, sval, dscale, len(didx))
            full = np.zeros(len(dom_orders), dtype=_I64)
            full[didx] = (part * cm) % dom_orders[didx]
            gens.append(full)
    kernel = (np.array(gens, dtype=_I64) if gens
              else np.zeros((0, len(dom_orders)), dtype=_I64))
    if ker_order * im_order != dom_total:
        raise ArithmeticError("kernel/image certificate failed")
    return KernelImage(kernel, ker_order, im_order)


def hom_solve(M, dom_orders, cod_orders, y):
    """One x with x.M = y, or None."""
    M = np.asarray(M, dtype=_I64)
    dom_orders = np.asarray(dom_orders, dtype=_I64)
    cod_orders = np.asarray(cod_orders, dtype=_I64)
    y = np.asarray(y, dtype=_I64) % np.maximum(cod_orders, 1)
    x = np.zeros(len(dom_orders), dtype=_I64)
    dom_sup = {p: (i, e) for p, i, e in p_parts(dom_orders)}
    for p, cidx, cexps in p_parts(cod_orders):
        didx, dexps = dom_sup.get(p, (np.empty(0, _I64), np.empty(0, _I64)))
        E = int(max(dexps.max(initial=0), cexps.max(initial=0)))
        mod = p ** E
        cscale = p ** (E - cexps)
        ech = Echelon(p, E, track=True)
        for a, i in enumerate(didx):
            ech.insert(*_embed_row(M[i], cidx, cscale, mod),
                       tidx=np.array([a], dtype=_I64),
                       tval=np.array([1], dtype=_I64))
        sol = ech.solve(*_embed_row(y, cidx, cscale, mod))
        if sol is None:
            return None
        if len(didx) == 0:
            continue
        cm = crt_mult(dom_orders, p, didx, dexps)
        part = np.zeros(len(didx), dtype=_I64)
        part[sol[0]] = sol[1]
        x[didx] = (x[didx] + part * cm) % dom_orders[didx]
    if len(cod_orders) and (((x @ M) - y) % cod_orders).any():
        raise ArithmeticError("solve verification failed")
    return x


def span_order(rows, orders):
    rows = np.asarray(rows, dtype=_I64).reshape(-1, len(orders))
    total = 1
    for p, idx, exps in p_parts(orders):
        E = int(exps.max())
        mod = p ** E
        scale = p ** (E - exps)
        ech = Echelon(p, E)
        for r in rows:
            ech.insert(*_embed_row(r, idx, scale, mod))
        total *= p ** ech.span_exponent()
    return total


def snf_mod(A, p, E):
    """Smith form over Z/p**E with column transform tracking.

    Returns (w, V, Vinv): w[j] is the exponent of the j-th diagonal
    entry, i.e. the quotient slot (Z/p**E)/(p**w[j]) = Z/p**w[j] once
    the rows of A are the relations among k generators; slots without a
    relation keep w = E.  newgens = Vinv . oldgens.  Row operations are
    untracked.  Pivot rule: minimal p-valuation, ties row-major.
    """
    p, E = int(p), int(E)
    mod = p ** E
    A = np.asarray(A, dtype=_I64).copy() % mod
    r, k = A.shape
    V = np.eye(k, dtype=_I64)
    Vinv = np.eye(k, dtype=_I64)
    w = [E] * k
    for t in range(min(r, k)):
        blk = A[t:, t:]
        nz = blk != 0
        if not nz.any():
            break
        val = np.full(blk.shape, E, dtype=_I64)
        rem = blk.copy()
        for v in range(E):
            undecided = nz & (val == E)
            hit = undecided & (rem % p != 0)
            val[hit] = v
            rem[undecided & ~hit] //= p
        cand = np.argwhere(nz & (val == val[nz].min()))
        bi, bj = int(cand[0][0]), int(cand[0][1])
        pi, pj = t + bi, t + bj
        if pi != t:
            A[[t, pi]] = A[[pi, t]]
        if pj != t:
            A[:, [t, pj]] = A[:, [pj, t]]
            V[:, [t, pj]] = V[:, [pj, t]]
            Vinv[[t, pj]] = Vinv[[pj, t]]
        v = int(val[bi, bj])
        w[t] = v
        pv = p ** v
        unit = int(A[t, t]) // pv
        A[t] = (A[t] * pow(unit, -1, mod)) % mod
        for i in range(t + 1, r):
            if A[i, t]:
                q = int(A[i, t]) // pv
                A[i] = (A[i] - q * A[t]) % mod
        for j in range(t + 1, k):
            if A[t, j]:
                q = int(A[t, j]) // pv
                A[:, j] = (A[:, j] - q * A[:, t]) % mod
                V[:, j] = (V[:, j] - q * V[:, t]) % mod
                Vinv[t] = (Vinv[t] + q * Vinv[j]) % mod
    return w, V, Vinv


class Quotient:
    """(span(B) + span(Z)) / span(B) inside an ambient finite module.

    Two passes per prime: a cheap untracked pass selects a small set of
    residues generating the quotient, then a tracked pass collects
    their relation module, and a modular Smith form turns that into
    invariant factors (ascending divisibility), canonical generators,
    and a coords() map.  ``order`` is always available; the structure
    is built on first use.
    """

    def __init__(self, orders, b_rows, z_rows):
        self.orders = np.asarray(orders, dtype=_I64)
        b_rows = np.asarray(b_rows, dtype=_I64).reshape(-1, len(self.orders))
        z_rows = np.asarray(z_rows, dtype=_I64).reshape(-1, len(self.orders))
        self.order = 1
        self._primes = []
        for p, idx, exps in p_parts(self.orders):
            E = int(exps.max())
            mod = p ** E
            scale = p ** (E - exps)
            echB = Echelon(p, E)
            for row in b_rows:
                echB.insert(*_embed_row(row, idx, scale, mod))
            b_exp = echB.span_exponent()
            sel = Echelon(p, E)
            for row in z_rows:
                ri, rv, _t, _tv, _stuck = echB.reduce(
                    *_embed_row(row, idx, scale, mod))
                sel.insert(ri, rv)
            zsel = [(ri.copy(), rv.copy()) for ri, rv, _t, _tv in sel.rows]
            full = Echelon(p, E, track=True)
            for row in b_rows:
                full.insert(*_embed_row(row, idx, scale, mod))
            for a, (ri, rv) in enumerate(zsel):
                full.insert(ri, rv, np.array([a], dtype=_I64),
                            np.array([1], dtype=_I64))
            h_exp = full.span_exponent() - b_exp
            self.order *= p ** h_exp
            kp = len(zsel)
            if kp:
                R = np.zeros((max(len(full.kernel), 1), kp), dtype=_I64)
                for n, (ti, tv) in enumerate(full.kernel):
                    R[n, ti] = tv
                w, V, Vinv = snf_mod(R, p, E)
            else:
                w, V, Vinv = [], np.zeros((0, 0), _I64), np.zeros((0, 0), _I64)
            cm = crt_mult(self.orders, p, idx, exps)
            gens_p = []
            for j in range(kp):
                acc = np.zeros(len(idx), dtype=_I64)
                for a, (ri, rv) in enumerate(zsel):
                    c = int(Vinv[j, a]) % mod
                    if c:
                        acc = (acc + c * _unembed(ri, rv, scale, len(idx))
                               ) % (p ** exps)
                g = np.zeros(len(self.orders), dtype=_I64)
                g[idx] = (acc * cm) % self.orders[idx]
                gens_p.append(g)
            if sum(w) != h_exp:
                raise ArithmeticError("quotient structure order mismatch")
            self._primes.append((p, idx, exps, echB, full, kp, V, w, gens_p))
        self._structure = None

    def _build(self):
        if self._structure is None:
            per = []
            slots = 0
            for p, _i, _e, _b, _f, kp, _V, w, gens_p in self._primes:
                nz = [(w[j], gens_p[j]) for j in range(kp) if w[j] > 0]
                nz.sort(key=lambda t: -t[0])
                per.append((p, nz))
                slots = max(slots, len(nz))
            invs, gens = [], []
            for j in range(slots):
                d = 1
                g = np.zeros(len(self.orders), dtype=_I64)
                for p, nz in per:
                    if j < len(nz):
                        d *= p ** nz[j][0]
                        g = (g + nz[j][1]) % np.maximum(self.orders, 1)
                invs.append(d)
                gens.append(g)
            invs.reverse()
            gens.reverse()
            self._structure = (
                tuple(invs),
                np.array(gens, dtype=_I64).reshape(len(gens),
                                                   len(self.orders)))
        return self._structure

    @property
    def invariants(self):
        return self._build()[0]

    @property
    def gens(self):
        return self._build()[1]

    def coords(self, y, check=True):
        """Coordinates of [y] on the canonical generators, or None."""
        y = np.asarray(y, dtype=_I64)
        invs, _g = self._build()
        slots = len(invs)
        out = [0] * slots
        for p, idx, exps, _echB, full, kp, V, w, _gp in self._primes:
            E = int(exps.max())
            mod = p ** E
            scale = p ** (E - exps)
            sol = full.solve(*_embed_row(y, idx, scale, mod))
            if sol is None:
                return None
            t = np.zeros(kp, dtype=_I64)
            t[sol[0]] = sol[1]
            c = (t @ V) % mod if kp else np.empty(0, _I64)
            nzpos = [j for j in range(kp) if w[j] > 0]
            nzpos.sort(key=lambda j: -w[j])
            for rank, j in enumerate(nzpos):
                slot = slots - 1 - rank
                pw = p ** w[j]
                cj = int(c[j]) % pw
                if cj:
                    d = int(invs[slot])
                    m = d // pw
                    eps = (m * pow(m, -1, pw)) % d if m > 1 else 1
                    out[slot] = (out[slot] + cj * eps) % d
        out = tuple(out)
        if check:
            z = (y - self.rep(out)) % np.maximum(self.orders, 1)
            for p, idx, exps, echB, _f, _k, _V, _w, _gp in self._primes:
                E = int(exps.max())
                if not echB.contains(*_embed_row(z, idx, p ** (E - exps),
                                                 p ** E)):
                    raise ArithmeticError("class coordinates failed to "
                                          "reproduce the input modulo B")
        return out

    def rep(self, coords):
        invs, gens = self._build()
        y = np.zeros(len(self.orders), dtype=_I64)
        for c, g in zip(coords, gens):
            y = (y + int(c) * g) % np.maximum(self.orders, 1)
        return y

    def all_coords(self):
        """Every class, lexicographically (caller bounds the size)."""
        invs, _ = self._build()
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


# ----------------------------------------------------------------------
# dense integer forms (python ints; matrices here stay small)

def _as_pylist(M):
    return [[int(x) for x in row] for row in M]


def row_hermite_int(M):
    """(H, U) with U.M = H, U unimodular, H in row Hermite normal form.

    Pivot choice: smallest nonzero absolute value, ties row-major, so
    the output is deterministic.  Zero rows of H sit at the bottom; the
    matching rows of U are a basis of the left kernel lattice.
    """
    H = _as_pylist(M)
    r = len(H)
    n = len(H[0]) if r else 0
    U = [[1 if i == j else 0 for j in range(r)] for i in range(r)]
    cur = 0
    for c in range(n):
        while True:
            live = [i for i in range(cur, r) if H[i][c] != 0]
            if not live:
                break
            i0 = min(live, key=lambda i: (abs(H[i][c]), i))
            if i0 != cur:
                H[cur], H[i0] = H[i0], H[cur]
                U[cur], U[i0] = U[i0], U[cur]
            if len(live) == 1:
                break
            piv = H[cur][c]
            for i in range(cur + 1, r):
                if H[i][c]:
                    q = H[i][c] // piv
                    H[i] = [a - q * b for a, b in zip(H[i], H[cur])]
                    U[i] = [a - q * b for a, b in zip(U[i], U[cur])]
        if cur < r and c < n and H[cur][c] != 0:
            if H[cur][c] < 0:
                H[cur] = [-a for a in H[cur]]
                U[cur] = [-a for a in U[cur]]
            piv = H[cur][c]
            for i in range(cur):
                q = H[i][c] // piv
                if q:
                    H[i] = [a - q * b for a, b in zip(H[i], H[cur])]
                    U[i] = [a - q * b for a, b in zip(U[i], U[cur])]
            cur += 1
    return H, U


def int_kernel_basis(M):
    """Basis of {x : x.M = 0} as rows (lattice basis over Z)."""
    M = _as_pylist(M)
    if not M:
        return []
    H, U = row_hermite_int(M)
    return [U[i] for i in range(len(H)) if not any(H[i])]


def int_solve(M, y):
    """x with x.M = y over Z, or None."""
    M = _as_pylist(M)
    y = [int(v) for v in y]
    if not M:
        return [] if not any(y) else None
    H, U = row_hermite_int(M)
    r = len(M)
    x = [0] * r
    for i in range(r):
        piv = next((c for c, a in enumerate(H[i]) if a), None)
        if piv is None:
            break
        if y[piv] % H[i][piv] != 0:
            return None
        q = y[piv] // H[i][piv]
        if q:
            y = [a - q * b for a, b in zip(y, H[i])]
            x = [a + q * b for a, b in zip(x, U[i])]
    return x if not any(y) else None


def snf_int(M):
    """(diag, V, Vinv) over Z with pivot = min |entry|, ties row-major.

    U.M.V = D for an untracked unimodular U; diag holds the nonzero
    diagonal entries (positive, each dividing the next).
    """
    A = _as_pylist(M)
    r = len(A)
    k = len(A[0]) if r else 0
    V = [[1 if i == j else 0 for j in range(k)] for i in range(k)]
    Vinv = [[1 if i == j else 0 for j in range(k)] for i in range(k)]
    diag = []
    t = 0
    while t < min(r, k):
        cand = [(abs(A[i][j]), i, j) for i in range(t, r)
                for j in range(t, k) if A[i][j]]
        if not cand:
            break
        _a, pi, pj = min(cand)
        if pi != t:
            A[t], A[pi] = A[pi], A[t]
        if pj != t:
            for row in A:
                row[t], row[pj] = row[pj], row[t]
            for row in V:
                row[t], row[pj] = row[pj], row[t]
            Vinv[t], Vinv[pj] = Vinv[pj], Vinv[t]
        dirty = False
        for i in range(t + 1, r):
            if A[i][t]:
                q = A[i][t] // A[t][t]
                A[i] = [a - q * b for a, b in zip(A[i], A[t])]
                if A[i][t]:
                    dirty = True
        for j in range(t + 1, k):
            if A[t][j]:
                q = A[t][j] // A[t][t]
                if q:
                    for row in A:
                        row[j] -= q * row[t]
                    for row in V:
                        row[j] -= q * row[t]
                    Vinv[t] = [a + q * b for a, b in zip(Vinv[t], Vinv[j])]
                if A[t][j]:
                    dirty = True
        if dirty:
            continue
        d = A[t][t]
        bad = next(((i, j) for i in range(t + 1, r) for j in range(t + 1, k)
                    if A[i][j] % d != 0), None)
        if bad is not None:
            _i, j = bad
            for row in A:
                row[t] += row[j]
            for row in V:
                row[t] += row[j]
            Vinv[j] = [a - b for a, b in zip(Vinv[j], Vinv[t])]
            continue
        if d < 0:
            A[t] = [-a for a in A[t]]
            d = -d
        diag.append(d)
        t += 1
    return diag, V, Vinv


class IntQuotient:
    """span(K)/span(R) for a lattice basis K and relation rows R.

    Invariant data: free rank plus torsion factors (ascending), a
    canonical generator per non-unit slot, and coords() sending a
    lattice element to its slot values.
    """

    def __init__(self, K, R_amb):
        self.K = _as_pylist(K) if len(K) else []
        k = len(self.K)
        R = []
        for row in R_amb:
            x = (int_solve(self.K, row) if k
                 else ([] if not any(row) else None))
            if x is None:
                raise ValueError("relation row outside the lattice span")
            R.append(x)
        if not R and k:
            R = [[0] * k]
        diag, V, Vinv = snf_int(R) if k else ([], [], [])
        self.V = V
        self.diag = list(diag) + [0] * (k - len(diag))
        self.free_rank = sum(1 for d in self.diag if d == 0)
        self.torsion = tuple(d for d in self.diag if d > 1)
        self.gens = []
        for j in range(k):
            if self.diag[j] == 1:
                continue
            g = [0] * (len(self.K[0]) if self.K else 0)
            for a in range(k):
                c = Vinv[j][a]
                if c:
                    g = [x + c * y for x, y in zip(g, self.K[a])]
            self.gens.append((self.diag[j], g))

    def coords(self, z):
        """Slot values of [z] (per non-unit diagonal slot), or None."""
        k = len(self.K)
        x = int_solve(self.K, z) if k else ([] if not any(z) else None)
        if x is None:
            return None
        c = [sum(x[a] * self.V[a][j] for a in range(k)) for j in range(k)]
        out = []
        for j in range(k):
            if self.diag[j] == 1:
                continue
            out.append(c[j] % self.diag[j] if self.diag[j] else c[j])
        return tuple(out)

    def is_trivial(self):
        return self.free_rank == 0 and not self.torsion
