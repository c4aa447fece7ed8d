"""Truncated simplicial machinery: simplicial sets and groups, nerves,
the codiagonal (right adjoint to the total-Dec functor), W-bar, Moore
normalization, and integral homology -- all exact and finite.

Levels are plain index sets, operators are integer arrays, and every
constructed object gets its simplicial identities checked
exhaustively.  Homotopy or homology in degree k is only reported when
k + 1 <= N ("safe degree"): the top truncation level still receives
boundaries from cells we do not have.
"""

import itertools

import numpy as np

from . import linalg
from .errors import (NotAbelian, SearchBudgetExceeded,
                     TruncationInsufficient, ValidationError)
from .groups import FiniteGroup, GroupHom, Subgroup, normal_closure, \
    quotient_group
from .catalog import abelian
from .modules import abelian_decomposition

_I = np.int64

CELL_BUDGET = 300_000


def _arr(x):
    return np.ascontiguousarray(np.asarray(x, dtype=_I))


def _ident(k):
    return np.arange(k, dtype=_I)


# ----------------------------------------------------------------------
# simplicial sets

class TruncatedSimplicialSet:
    """Levels 0..N of finite sets with face/degeneracy arrays.

    ``face[n][i]`` maps level n to n-1 (1 <= n <= N, 0 <= i <= n);
    ``degen[n][i]`` maps level n to n+1 (0 <= n < N).  ``cells`` may
    carry a decoded representation per level (tuples) for objects that
    were built out of structured data.
    """

    def __init__(self, sizes, face, degen, cells=None, name=None,
                 validate=True):
        self.sizes = [int(s) for s in sizes]
        if not self.sizes or min(self.sizes) < 1:
            raise ValidationError("levels must be nonempty")
        N = self.N
        self.face = [[_arr(a) for a in (face[n] if n >= 1 else [])]
                     for n in range(N + 1)]
        self.degen = [[_arr(a) for a in (degen[n] if n < N else [])]
                      for n in range(N + 1)]
        for n in range(1, N + 1):
            if len(self.face[n]) != n + 1:
                raise ValidationError(f"level {n} needs {n + 1} faces")
            for a in self.face[n]:
                if a.shape != (self.sizes[n],) or a.min() < 0 \
                        or a.max() >= self.sizes[n - 1]:
                    raise ValidationError("face map out of range")
        for n in range(N):
            if len(self.degen[n]) != n + 1:
                raise ValidationError(
                    f"level {n} needs {n + 1} degeneracies")
            for a in self.degen[n]:
                if a.shape != (self.sizes[n],) or a.min() < 0 \
                        or a.max() >= self.sizes[n + 1]:
                    raise ValidationError("degeneracy map out of range")
        self.cells = cells
        self.name = name
        self._lookup = None
        if validate:
            self.validate()

    @property
    def N(self):
        return len(self.sizes) - 1

    def lookup(self, n):
        if self.cells is None:
            raise ValidationError("no decoded cells stored")
        if self._lookup is None:
            self._lookup = [
                {c: i for i, c in enumerate(lvl)} for lvl in self.cells]
        return self._lookup[n]

    def validate(self):
        N = self.N
        for n in range(2, N + 1):
            for j in range(n + 1):
                for i in range(j):
                    lhs = self.face[n - 1][i][self.face[n][j]]
                    rhs = self.face[n - 1][j - 1][self.face[n][i]]
                    if not (lhs == rhs).all():
                        raise ValidationError(
                            f"d{i} d{j} identity fails at level {n}")
        for n in range(N - 1):
            for j in range(n + 1):
                for i in range(j + 1):
                    lhs = self.degen[n + 1][i][self.degen[n][j]]
                    rhs = self.degen[n + 1][j + 1][self.degen[n][i]]
                    if not (lhs == rhs).all():
                        raise ValidationError(
                            f"s{i} s{j} identity fails at level {n}")
        for n in range(N):
            ident = _ident(self.sizes[n])
            for j in range(n + 1):
                for i in range(n + 2):
                    got = self.face[n + 1][i][self.degen[n][j]]
                    if i < j:
                        want = self.degen[n - 1][j - 1][self.face[n][i]]
                    elif i in (j, j + 1):
                        want = ident
                    else:
                        want = self.degen[n - 1][j][self.face[n][i - 1]]
                    if not (got == want).all():
                        raise ValidationError(
                            f"d{i} s{j} identity fails at level {n}")
        return True

    def as_dict(self):
        return {
            "levels": list(self.sizes),
            "face": [[list(map(int, a)) for a in lvl]
                     for lvl in self.face],
            "degen": [[list(map(int, a)) for a in lvl]
                      for lvl in self.degen],
        }

    def __repr__(self):
        tag = self.name or "simplicial set"
        return f"<{tag} levels {self.sizes}>"


def constant_sset(k, N, name=None):
    sizes = [k] * (N + 1)
    face = [[_ident(k) for _ in range(n + 1)] for n in range(N + 1)]
    degen = [[_ident(k) for _ in range(n + 1)] for n in range(N + 1)]
    return TruncatedSimplicialSet(sizes, face, degen, name=name,
                                  validate=False)


def check_simplicial_map(maps, X, Y, strict=True):
    """Does the level family ``maps`` commute with faces/degeneracies?"""
    maps = [_arr(m) for m in maps]
    N = min(X.N, Y.N, len(maps) - 1)
    for n in range(N + 1):
        if maps[n].shape != (X.sizes[n],) or \
                (maps[n].max() >= Y.sizes[n] if X.sizes[n] else False):
            raise ValidationError("level map has the wrong shape")
    ok = True
    for n in range(1, N + 1):
        for i in range(n + 1):
            if not (maps[n - 1][X.face[n][i]]
                    == Y.face[n][i][maps[n]]).all():
                ok = False
    for n in range(N):
        for i in range(n + 1):
            if not (maps[n + 1][X.degen[n][i]]
                    == Y.degen[n][i][maps[n]]).all():
                ok = False
    if strict and not ok:
        raise ValidationError("maps do not commute with the operators")
    return ok


# ----------------------------------------------------------------------
# simplicial groups

class TruncatedSimplicialGroup:
    """Levels 0..N of FiniteGroups; operators are GroupHoms."""

    def __init__(self, groups, face, degen, name=None, validate=True):
        self.groups = list(groups)
        N = self.N
        self.face = [list(face[n]) if n >= 1 else [] for n in
                     range(N + 1)]
        self.degen = [list(degen[n]) if n < N else [] for n in
                      range(N + 1)]
        for n in range(1, N + 1):
            for h in self.face[n]:
                if h.src is not self.groups[n] or \
                        h.dst is not self.groups[n - 1]:
                    raise ValidationError("face hom wiring is wrong")
        for n in range(N):
            for h in self.degen[n]:
                if h.src is not self.groups[n] or \
                        h.dst is not self.groups[n + 1]:
                    raise ValidationError(
                        "degeneracy hom wiring is wrong")
        self.name = name
        self._sset = None
        if validate:
            self.sset().validate()

    @property
    def N(self):
        return len(self.groups) - 1

    def sset(self):
        if self._sset is None:
            self._sset = TruncatedSimplicialSet(
                [g.n for g in self.groups],
                [[h.image for h in lvl] for lvl in self.face],
                [[h.image for h in lvl] for lvl in self.degen],
                name=self.name, validate=False)
        return self._sset

    def is_abelian(self):
        return all(g.is_abelian() for g in self.groups)

    def __repr__(self):
        tag = self.name or "simplicial group"
        return f"<{tag} orders {[g.n for g in self.groups]}>"


def constant_simplicial_group(G, N, name=None):
    ident = GroupHom.identity(G)
    return TruncatedSimplicialGroup(
        [G] * (N + 1),
        [[ident] * (n + 1) for n in range(N + 1)],
        [[ident] * (n + 1) for n in range(N + 1)],
        name=name or (G.name and f"const {G.name}"), validate=False)


def simplicial_hom(G, H, homs, validate=True):
    """A levelwise family of GroupHoms as a simplicial map G -> H."""
    homs = list(homs)
    if len(homs) != G.N + 1 or len(homs) != H.N + 1:
        raise ValidationError("one hom per level")
    for n, h in enumerate(homs):
        if h.src is not G.groups[n] or h.dst is not H.groups[n]:
            raise ValidationError(f"hom at level {n} is miswired")
    if validate:
        check_simplicial_map([h.image for h in homs], G.sset(),
                             H.sset())
    return homs


# ----------------------------------------------------------------------
# bisimplicial sets

class TruncatedBisimplicialSet:
    """Grid of finite sets with commuting horizontal/vertical operators.

    ``triangle=True`` keeps only the cells with p + q <= N -- enough
    for the codiagonal up to level N while sidestepping the large
    far-corner cells of nerves of groupoids.
    """

    def __init__(self, N, sizes, hface, vface, hdegen, vdegen,
                 triangle=False, cells=None, validate=True):
        self.N = int(N)
        self.triangle = bool(triangle)
        self.sizes = {k: int(v) for k, v in sizes.items()}
        for pq in self.grid():
            if pq not in self.sizes or self.sizes[pq] < 1:
                raise ValidationError(f"missing or empty cell set {pq}")
        self.hface = {k: [_arr(a) for a in v] for k, v in hface.items()}
        self.vface = {k: [_arr(a) for a in v] for k, v in vface.items()}
        self.hdegen = {k: [_arr(a) for a in v]
                       for k, v in hdegen.items()}
        self.vdegen = {k: [_arr(a) for a in v]
                       for k, v in vdegen.items()}
        self.cells = cells
        self._lookup = None
        if validate:
            self.validate()

    def grid(self):
        for p in range(self.N + 1):
            qtop = self.N - p if self.triangle else self.N
            for q in range(qtop + 1):
                yield (p, q)

    def in_grid(self, p, q):
        if p < 0 or q < 0:
            return False
        if self.triangle:
            return p + q <= self.N
        return p <= self.N and q <= self.N

    def lookup(self, p, q):
        if self.cells is None:
            raise ValidationError("no decoded cells stored")
        if self._lookup is None:
            self._lookup = {}
        key = (p, q)
        if key not in self._lookup:
            lvl = self.cells.get(key)
            self._lookup[key] = (
                None if lvl is None
                else {c: i for i, c in enumerate(lvl)})
        return self._lookup[key]

    def _check_family(self, fam, key, count, dst):
        got = fam.get(key, [])
        if len(got) != count:
            raise ValidationError(f"operator family {key} has "
                                  f"{len(got)} maps, wants {count}")
        for a in got:
            if a.shape != (self.sizes[key],) or a.min() < 0 or \
                    a.max() >= self.sizes[dst]:
                raise ValidationError(f"operator at {key} out of range")

    def validate(self):
        # shapes
        for (p, q) in self.grid():
            if p >= 1:
                self._check_family(self.hface, (p, q), p + 1,
                                   (p - 1, q))
            if q >= 1:
                self._check_family(self.vface, (p, q), q + 1,
                                   (p, q - 1))
            if self.in_grid(p + 1, q):
                self._check_family(self.hdegen, (p, q), p + 1,
                                   (p + 1, q))
            if self.in_grid(p, q + 1):
                self._check_family(self.vdegen, (p, q), q + 1,
                                   (p, q + 1))
        # each row/column is simplicial, and the directions commute
        for (p, q) in self.grid():
            self._row_identities(p, q)
            self._mixed_identities(p, q)
        return True

    def _row_identities(self, p, q):
        hf, hd, vf, vd = self.hface, self.hdegen, self.vface, \
            self.vdegen
        if p >= 2:
            for j in range(p + 1):
                for i in range(j):
                    lhs = hf[(p - 1, q)][i][hf[(p, q)][j]]
                    rhs = hf[(p - 1, q)][j - 1][hf[(p, q)][i]]
                    if not (lhs == rhs).all():
                        raise ValidationError(
                            f"horizontal dd fails at {(p, q)}")
        if q >= 2:
            for j in range(q + 1):
                for i in range(j):
                    lhs = vf[(p, q - 1)][i][vf[(p, q)][j]]
                    rhs = vf[(p, q - 1)][j - 1][vf[(p, q)][i]]
                    if not (lhs == rhs).all():
                        raise ValidationError(
                            f"vertical dd fails at {(p, q)}")
        if self.in_grid(p + 2, q):
            for j in range(p + 1):
                for i in range(j + 1):
                    lhs = hd[(p + 1, q)][i][hd[(p, q)][j]]
                    rhs = hd[(p + 1, q)][j + 1][hd[(p, q)][i]]
                    if not (lhs == rhs).all():
                        raise ValidationError(
                            f"horizontal ss fails at {(p, q)}")
        if self.in_grid(p, q + 2):
            for j in range(q + 1):
                for i in range(j + 1):
                    lhs = vd[(p, q + 1)][i][vd[(p, q)][j]]
                    rhs = vd[(p, q + 1)][j + 1][vd[(p, q)][i]]
                    if not (lhs == rhs).all():
                        raise ValidationError(
                            f"vertical ss fails at {(p, q)}")
        if self.in_grid(p + 1, q):
            ident = _ident(self.sizes[(p, q)])
            for j in range(p + 1):
                for i in range(p + 2):
                    got = hf[(p + 1, q)][i][hd[(p, q)][j]]
                    if i < j:
                        want = hd[(p - 1, q)][j - 1][hf[(p, q)][i]]
                    elif i in (j, j + 1):
                        want = ident
                    else:
                        want = hd[(p - 1, q)][j][hf[(p, q)][i - 1]]
                    if not (got == want).all():
                        raise ValidationError(
                            f"horizontal ds fails at {(p, q)}")
        if self.in_grid(p, q + 1):
            ident = _ident(self.sizes[(p, q)])
            for j in range(q + 1):
                for i in range(q + 2):
                    got = vf[(p, q + 1)][i][vd[(p, q)][j]]
                    if i < j:
                        want = vd[(p, q - 1)][j - 1][vf[(p, q)][i]]
                    elif i in (j, j + 1):
                        want = ident
                    else:
                        want = vd[(p, q - 1)][j][vf[(p, q)][i - 1]]
                    if not (got == want).all():
                        raise ValidationError(
                            f"vertical ds fails at {(p, q)}")

    def _mixed_identities(self, p, q):
        hf, hd, vf, vd = self.hface, self.hdegen, self.vface, \
            self.vdegen
        if p >= 1 and q >= 1:
            for a in range(p + 1):
                for b in range(q + 1):
                    lhs = hf[(p, q - 1)][a][vf[(p, q)][b]]
                    rhs = vf[(p - 1, q)][b][hf[(p, q)][a]]
                    if not (lhs == rhs).all():
                        raise ValidationError(
                            f"hv face commutation fails at {(p, q)}")
        if self.in_grid(p + 1, q + 1):
            for a in range(p + 1):
                for b in range(q + 1):
                    lhs = hd[(p, q + 1)][a][vd[(p, q)][b]]
                    rhs = vd[(p + 1, q)][b][hd[(p, q)][a]]
                    if not (lhs == rhs).all():
                        raise ValidationError(
                            f"hv degeneracy commutation fails "
                            f"at {(p, q)}")
        if p >= 1 and self.in_grid(p, q + 1):
            for a in range(p + 1):
                for b in range(q + 1):
                    lhs = hf[(p, q + 1)][a][vd[(p, q)][b]]
                    rhs = vd[(p - 1, q)][b][hf[(p, q)][a]]
                    if not (lhs == rhs).all():
                        raise ValidationError(
                            f"face/degeneracy commutation fails "
                            f"at {(p, q)}")
        if q >= 1 and self.in_grid(p + 1, q):
            for a in range(p + 1):
                for b in range(q + 1):
                    lhs = vf[(p + 1, q)][b][hd[(p, q)][a]]
                    rhs = hd[(p, q - 1)][a][vf[(p, q)][b]]
                    if not (lhs == rhs).all():
                        raise ValidationError(
                            f"degeneracy/face commutation fails "
                            f"at {(p, q)}")

    def as_dict(self):
        out = {"N": self.N, "triangle": self.triangle, "levels": {}}
        for (p, q) in self.grid():
            out["levels"][f"{p},{q}"] = self.sizes[(p, q)]
        return out

    def __repr__(self):
        kind = "triangle" if self.triangle else "grid"
        return f"<bisimplicial set, {kind} N={self.N}>"


def constant_bisimplicial(k, N, name=None):
    ident = _ident(k)
    sizes, hf, vf, hd, vd = {}, {}, {}, {}, {}
    for p in range(N + 1):
        for q in range(N + 1):
            sizes[(p, q)] = k
            hf[(p, q)] = [ident] * (p + 1) if p >= 1 else []
            vf[(p, q)] = [ident] * (q + 1) if q >= 1 else []
            hd[(p, q)] = [ident] * (p + 1) if p < N else []
            vd[(p, q)] = [ident] * (q + 1) if q < N else []
    return TruncatedBisimplicialSet(N, sizes, hf, vf, hd, vd,
                                    validate=False)


# ----------------------------------------------------------------------
# the nerve

def _digits(codes, m, k):
    """Little-endian base-m digits, shape (k, len(codes))."""
    out = np.empty((k, len(codes)), dtype=_I)
    rem = codes.copy()
    for j in range(k):
        out[j] = rem % m
        rem //= m
    return out


def _encode(digit_rows, m):
    out = np.zeros_like(digit_rows[0]) if digit_rows else None
    for row in reversed(digit_rows):
        out = out * m + row
    return out


def nerve(G, triangle=False, budget=CELL_BUDGET):
    """B of a truncated simplicial group: (BG)_{p,q} = (G_q)^p.

    Horizontal is the nerve direction (faces multiply adjacent
    entries), vertical applies G's own operators componentwise.  Cell
    p-tuples (g_1, ..., g_p) are coded little-endian: component j is
    digit j of the code in base |G_q|.
    """
    N = G.N
    orders = [g.n for g in G.groups]
    sizes, hf, vf, hd, vd = {}, {}, {}, {}, {}
    grid = [(p, q) for p in range(N + 1)
            for q in range((N - p if triangle else N) + 1)]
    gridset = set(grid)
    for (p, q) in grid:
        m = orders[q]
        size = m ** p
        if size > budget:
            raise SearchBudgetExceeded(
                f"nerve cell ({p},{q}) would hold {size} simplices")
        sizes[(p, q)] = size
        codes = np.arange(size, dtype=_I)
        mul = G.groups[q].mul
        fam = []
        if p >= 1:
            for a in range(p + 1):
                if a == 0:
                    fam.append(codes // m)
                elif a == p:
                    fam.append(codes % m ** (p - 1))
                else:
                    d = _digits(codes, m, p)
                    rows = [d[j] for j in range(a - 1)]
                    rows.append(_arr(mul[d[a - 1], d[a]]))
                    rows.extend(d[j] for j in range(a + 1, p))
                    fam.append(_encode(rows, m))
        hf[(p, q)] = fam
        if (p + 1, q) in gridset:
            hd[(p, q)] = [(codes % m ** a) + (codes // m ** a)
                          * m ** (a + 1) for a in range(p + 1)]
        else:
            hd[(p, q)] = []
        fam = []
        if q >= 1:
            for b in range(q + 1):
                img = G.face[q][b].image
                mprev = orders[q - 1]
                if p:
                    d = _digits(codes, m, p)
                    fam.append(_encode(
                        [_arr(img[d[j]]) for j in range(p)], mprev))
                else:
                    fam.append(np.zeros(1, dtype=_I))
        vf[(p, q)] = fam
        fam = []
        if (p, q + 1) in gridset:
            for b in range(q + 1):
                img = G.degen[q][b].image
                mnext = orders[q + 1]
                if p:
                    d = _digits(codes, m, p)
                    fam.append(_encode(
                        [_arr(img[d[j]]) for j in range(p)], mnext))
                else:
                    fam.append(np.zeros(1, dtype=_I))
        vd[(p, q)] = fam
    return TruncatedBisimplicialSet(N, sizes, hf, vf, hd, vd,
                                    triangle=triangle)


# ----------------------------------------------------------------------
# codiagonal and diagonal

def codiagonal(X, up_to=None, budget=CELL_BUDGET):
    """Right adjoint to total-Dec, levelwise:

        nabla_p = {(x_0,...,x_p): x_i in X_{i,p-i},
                   dv_0 x_i = dh_{i+1} x_{i+1}}

    with the mixed face/degeneracy operations (vertical on the slots
    before the index, horizontal on the slots after)."""
    if up_to is None:
        up_to = X.N
    if up_to > X.N:
        raise TruncationInsufficient(
            f"codiagonal level {up_to} needs bisimplicial truncation "
            f">= {up_to}, have {X.N}")
    levels = []
    for p in range(up_to + 1):
        parts = [(c,) for c in range(X.sizes[(0, p)])]
        for i in range(1, p + 1):
            key_arr = X.vface[(i - 1, p - i + 1)][0]
            match_arr = X.hface[(i, p - i)][i]
            fibers = {}
            for c, v in enumerate(match_arr):
                fibers.setdefault(int(v), []).append(c)
            new = []
            for t in parts:
                for c in fibers.get(int(key_arr[t[-1]]), ()):
                    new.append(t + (c,))
                if len(new) > budget:
                    raise SearchBudgetExceeded(
                        f"codiagonal level {p} exceeds {budget} cells")
            parts = new
        levels.append(parts)
    lookups = [{c: i for i, c in enumerate(lvl)} for lvl in levels]
    sizes = [len(lvl) for lvl in levels]

    def face_cell(p, xs, i):
        ys = []
        for j in range(i):
            ys.append(int(X.vface[(j, p - j)][i - j][xs[j]]))
        for j in range(i, p):
            ys.append(int(X.hface[(j + 1, p - 1 - j)][i][xs[j + 1]]))
        return tuple(ys)

    def degen_cell(p, xs, i):
        ys = []
        for j in range(i + 1):
            ys.append(int(X.vdegen[(j, p - j)][i - j][xs[j]]))
        for j in range(i + 1, p + 2):
            ys.append(int(X.hdegen[(j - 1, p + 1 - j)][i][xs[j - 1]]))
        return tuple(ys)

    face = [[] for _ in range(up_to + 1)]
    degen = [[] for _ in range(up_to + 1)]
    for p in range(1, up_to + 1):
        for i in range(p + 1):
            col = np.empty(sizes[p], dtype=_I)
            for idx, xs in enumerate(levels[p]):
                col[idx] = lookups[p - 1][face_cell(p, xs, i)]
            face[p].append(col)
    for p in range(up_to):
        for i in range(p + 1):
            col = np.empty(sizes[p], dtype=_I)
            for idx, xs in enumerate(levels[p]):
                col[idx] = lookups[p + 1][degen_cell(p, xs, i)]
            degen[p].append(col)
    return TruncatedSimplicialSet(sizes, face, degen, cells=levels)


def diag(X):
    """The diagonal simplicial set n |-> X_{n,n} (full grid only)."""
    if X.triangle:
        raise TruncationInsufficient(
            "the diagonal needs the full bisimplicial grid")
    N = X.N
    sizes = [X.sizes[(n, n)] for n in range(N + 1)]
    face = [[X.hface[(n, n - 1)][i][X.vface[(n, n)][i]]
             for i in range(n + 1)] if n else [] for n in range(N + 1)]
    degen = [[X.hdegen[(n, n + 1)][i][X.vdegen[(n, n)][i]]
              for i in range(n + 1)] if n < N else []
             for n in range(N + 1)]
    return TruncatedSimplicialSet(sizes, face, degen, validate=False)


def diag_to_codiag(X, up_to=None):
    """(diag X, nabla X, natural map) -- the canonical comparison.

    The slot-i component of the map is dh_{i+1} ... dh_n (dv_0)^i
    applied to the diagonal cell.
    """
    if up_to is None:
        up_to = X.N
    D = diag(X)
    Nb = codiagonal(X, up_to=up_to)
    maps = []
    for n in range(up_to + 1):
        comps = []
        for i in range(n + 1):
            cur = _ident(X.sizes[(n, n)])
            for k in range(i):
                cur = X.vface[(n, n - k)][0][cur]
            for t in range(n, i, -1):
                cur = X.hface[(t, n - i)][t][cur]
            comps.append(cur)
        lk = Nb.lookup(n)
        col = np.empty(X.sizes[(n, n)], dtype=_I)
        for c in range(X.sizes[(n, n)]):
            col[c] = lk[tuple(int(comps[i][c]) for i in range(n + 1))]
        maps.append(col)
    check_simplicial_map(maps, D, Nb)
    return D, Nb, maps


def wbar(G, up_to=None, budget=CELL_BUDGET):
    """W-bar of a truncated simplicial group: codiagonal of its nerve."""
    if up_to is None:
        up_to = G.N
    return codiagonal(nerve(G, triangle=True, budget=budget),
                      up_to=up_to, budget=budget)


def wbar_map(homs, WX, WY):
    """Functoriality of W-bar on a levelwise hom family.

    ``WX``/``WY`` must be wbar outputs (cells = slot tuples); slot i at
    level n is a code over (X_{n-i})^i, mapped digitwise."""
    out = []
    for n in range(min(WX.N, WY.N) + 1):
        lk = WY.lookup(n)
        col = np.empty(WX.sizes[n], dtype=_I)
        for idx, xs in enumerate(WX.cells[n]):
            ys = []
            for i, code in enumerate(xs):
                h = homs[n - i]
                m, md = h.src.n, h.dst.n
                c, out_c = int(code), 0
                for j in reversed(range(i)):
                    out_c = out_c * md + int(h.image[(c // m ** j) % m])
                ys.append(out_c)
            col[idx] = lk[tuple(ys)]
        out.append(col)
    return out


# ----------------------------------------------------------------------
# W-bar as a simplicial group (abelian input)

def wbar_group(A, up_to=None, budget=CELL_BUDGET):
    """W-bar of a levelwise-abelian simplicial group, as a group again.

    Slotwise multiplication: each slot is a nerve tuple over an
    abelian level, multiplied componentwise.  The matching conditions
    are homomorphic, so the cells form a subgroup of the slot product
    and W-bar lands back in simplicial groups.
    """
    if not A.is_abelian():
        raise NotAbelian("W-bar is a simplicial group only for "
                         "levelwise-abelian input")
    W = wbar(A, up_to=up_to, budget=budget)
    N = W.N
    groups = []
    relabels = []
    for n in range(N + 1):
        cells = W.cells[n]
        size = len(cells)
        # digit schedule: slot i contributes i digits over A_{n-i}
        tabs = []
        for i in range(n + 1):
            for _ in range(i):
                tabs.append(A.groups[n - i].mul)
        dig = np.empty((size, len(tabs)), dtype=_I)
        for idx, xs in enumerate(cells):
            col = 0
            for i, code in enumerate(xs):
                m = A.groups[n - i].n
                c = int(code)
                for _ in range(i):
                    dig[idx, col] = c % m
                    c //= m
                    col += 1
        lk = W.lookup(n)
        table = np.empty((size, size), dtype=_I)
        for x in range(size):
            prod = [tabs[d][dig[x, d]][dig[:, d]]
                    for d in range(len(tabs))]
            for y in range(size):
                ys, col = [], 0
                for i in range(n + 1):
                    m = A.groups[n - i].n
                    code = 0
                    for j in reversed(range(i)):
                        code = code * m + int(prod[col + j][y])
                    col += i
                    ys.append(code)
                table[x, y] = lk[tuple(ys)]
        Fn = FiniteGroup(table)
        groups.append(Fn)
        relabels.append(Fn.relabel)
    face = [[] for _ in range(N + 1)]
    degen = [[] for _ in range(N + 1)]
    for n in range(1, N + 1):
        inv_src = np.empty(groups[n].n, dtype=_I)
        inv_src[relabels[n]] = np.arange(groups[n].n)
        for i in range(n + 1):
            img = relabels[n - 1][W.face[n][i][inv_src]]
            face[n].append(GroupHom(groups[n], groups[n - 1], img))
    for n in range(N):
        inv_src = np.empty(groups[n].n, dtype=_I)
        inv_src[relabels[n]] = np.arange(groups[n].n)
        for i in range(n + 1):
            img = relabels[n + 1][W.degen[n][i][inv_src]]
            degen[n].append(GroupHom(groups[n], groups[n + 1], img))
    return TruncatedSimplicialGroup(groups, face, degen,
                                    name="wbar", validate=False)


# ----------------------------------------------------------------------
# Dold-Kan in a single chain degree

def _surjections(n, k):
    """Monotone surjections [n] ->> [k] as value tuples, lex order."""
    if k > n or k < 0:
        return []
    out = []
    for ascents in itertools.combinations(range(1, n + 1), k):
        vals, v = [], 0
        for t in range(n + 1):
            if t in ascents:
                v += 1
            vals.append(v)
        out.append(tuple(vals))
    return sorted(out)


def dold_kan(A, degree, N, name=None):
    """The simplicial abelian group with Moore complex A in one degree.

    Level n is one copy of A per monotone surjection [n] ->> [degree];
    a simplex operator alpha sends the eta-component into the
    (eta o alpha)-component when that composite is surjective, summing
    collisions.
    """
    if isinstance(A, FiniteGroup):
        orders = list(abelian_decomposition(A)[0])
    else:
        orders = [int(d) for d in A if int(d) > 1]
    k = int(degree)
    if k < 0 or k > N:
        raise TruncationInsufficient(
            "chain degree must sit inside the truncation")
    surj = [_surjections(n, k) for n in range(N + 1)]
    r = len(orders)
    ordarr = np.array(orders, dtype=_I) if r else np.empty(0, _I)

    groups, enc_tabs = [], []
    for n in range(N + 1):
        reps = len(surj[n])
        Gn = abelian(orders * reps) if reps else abelian([])
        groups.append(Gn)
        # big-endian digit coding used by `abelian`, then relabelled
        rad = orders * reps
        size = Gn.n
        dig = np.empty((len(rad), size), dtype=_I)
        ext = np.arange(size, dtype=_I)
        rem = ext.copy()
        for t in reversed(range(len(rad))):
            dig[t] = rem % rad[t]
            rem //= rad[t]
        canon = Gn.relabel[ext]  # external big-endian code -> canonical
        inv = np.empty(size, dtype=_I)
        inv[canon] = ext
        enc_tabs.append((dig, canon, inv))

    def induced(n_src, n_dst, compose):
        """Hom level n_src -> n_dst; ``compose(eta)`` gives the value
        tuple of eta o alpha (length n_dst + 1)."""
        src, dst = groups[n_src], groups[n_dst]
        dig, canon_s, inv_s = enc_tabs[n_src]
        _d2, canon_d, _i2 = enc_tabs[n_dst]
        tgt_index = {e: i for i, e in enumerate(surj[n_dst])}
        contrib = [[] for _ in range(len(surj[n_dst]))]
        for ei, eta in enumerate(surj[n_src]):
            tup = compose(eta)
            ti = tgt_index.get(tup)
            if ti is not None:
                contrib[ti].append(ei)
        size = src.n
        ext_src = inv_s[np.arange(size)]       # canonical -> external
        digits = dig[:, ext_src] if dig.size else dig
        out_ext = np.zeros(size, dtype=_I)
        for ti in range(len(surj[n_dst])):
            for c in range(r):
                tot = np.zeros(size, dtype=_I)
                for ei in contrib[ti]:
                    tot += digits[ei * r + c]
                tot %= ordarr[c]
                out_ext = out_ext * orders[c] + tot
        img = canon_d[out_ext] if dst.n > 1 else np.zeros(size, _I)
        return GroupHom(src, dst, img)

    face = [[] for _ in range(N + 1)]
    degen = [[] for _ in range(N + 1)]
    for n in range(1, N + 1):
        for i in range(n + 1):
            face[n].append(induced(
                n, n - 1, lambda eta, i=i: eta[:i] + eta[i + 1:]))
    for n in range(N):
        for i in range(n + 1):
            degen[n].append(induced(
                n, n + 1,
                lambda eta, i=i: eta[:i + 1] + eta[i:]))
    return TruncatedSimplicialGroup(
        face=face, degen=degen, groups=groups,
        name=name or f"dold-kan deg {k}")


# ----------------------------------------------------------------------
# Moore complex and homotopy

def _moore_members(G, n):
    """Elements of the level-n Moore subgroup (kernels of d_i, i>0)."""
    mem = np.arange(G.groups[n].n)
    for i in range(1, n + 1):
        mem = mem[G.face[n][i].image[mem] == 0]
    return mem


def moore_homotopy(G, up_to=None):
    """Homotopy of a levelwise-abelian simplicial group.

    Returns invariant-factor tuples for pi_0 .. pi_m, m = min(up_to,
    N-1): degree k needs the level-(k+1) Moore boundary, so the top
    truncation level is never reported.
    """
    for lvl in G.groups:
        if not lvl.is_abelian():
            raise NotAbelian(
                "Moore homotopy above degree 0 needs abelian levels; "
                "use pi0_group for the coequalizer")
    N = G.N
    hi = N - 1 if up_to is None else min(up_to, N - 1)
    out = []
    for k in range(hi + 1):
        mem = _moore_members(G, k)
        if k >= 1:
            ker = mem[G.face[k][0].image[mem] == 0]
        else:
            ker = mem
        im = np.unique(G.face[k + 1][0].image[_moore_members(G, k + 1)])
        K = Subgroup(G.groups[k], ker)
        Kg, emb = K.as_group()
        pos = {int(emb.image[i]): i for i in range(Kg.n)}
        I = Subgroup(Kg, [pos[int(m)] for m in im])
        Q, _proj = quotient_group(Kg, I)
        out.append(abelian_decomposition(Q)[0])
    return out


def pi0_group(G):
    """(pi_0, projection) of any truncated simplicial group: the
    coequalizer of d_0, d_1 -- G_0 over the normal closure of
    d_0(ker d_1)."""
    ker1 = np.flatnonzero(G.face[1][1].image == 0)
    seeds = [int(x) for x in G.face[1][0].image[ker1]]
    ncl = normal_closure(G.groups[0], seeds)
    return quotient_group(G.groups[0], ncl)


def pi0_sset(X):
    """(component count, label array) of a truncated simplicial set."""
    lab = list(range(X.sizes[0]))

    def find(x):
        while lab[x] != x:
            lab[x] = lab[lab[x]]
            x = lab[x]
        return x

    if X.N >= 1:
        for e in range(X.sizes[1]):
            a = find(int(X.face[1][0][e]))
            b = find(int(X.face[1][1][e]))
            if a != b:
                lab[max(a, b)] = min(a, b)
    roots = sorted({find(x) for x in range(X.sizes[0])})
    pos = {root: i for i, root in enumerate(roots)}
    return len(roots), np.array([pos[find(x)] for x in
                                 range(X.sizes[0])], dtype=_I)


# ----------------------------------------------------------------------
# integral homology (normalized chains, Smith form)

def _nondegenerate(X, n):
    mask = np.ones(X.sizes[n], dtype=bool)
    if n >= 1:
        for s in X.degen[n - 1]:
            mask[s] = False
    return mask


def homology(X, up_to=None):
    """H_*(X; Z) from the normalized chain complex.

    Returns [(free rank, torsion divisors)] for degrees 0..m with
    m = min(up_to, N-1)."""
    N = X.N
    hi = N - 1 if up_to is None else min(up_to, N - 1)
    if hi < 0:
        return []
    masks = [_nondegenerate(X, n) for n in range(N + 1)]
    pos = []
    for n in range(N + 1):
        p = np.full(X.sizes[n], -1, dtype=_I)
        p[masks[n]] = np.arange(int(masks[n].sum()))
        pos.append(p)
    counts = [int(m.sum()) for m in masks]

    def boundary(n):
        rows = []
        src = np.flatnonzero(masks[n])
        for c in src:
            row = [0] * counts[n - 1]
            sign = 1
            for i in range(n + 1):
                t = int(X.face[n][i][c])
                if masks[n - 1][t]:
                    row[int(pos[n - 1][t])] += sign
                sign = -sign
            rows.append(row)
        return rows

    ranks = [0] * (N + 2)
    divisors = [()] * (N + 2)
    for n in range(1, N + 1):
        B = boundary(n)
        if not B or not counts[n - 1]:
            continue
        d, _v, _vi = linalg.snf_int(B)
        ranks[n] = len(d)
        divisors[n] = tuple(int(x) for x in d)
    out = []
    for k in range(hi + 1):
        free = counts[k] - ranks[k] - ranks[k + 1]
        tors = tuple(d for d in divisors[k + 1] if d > 1)
        out.append((free, tors))
    return out


def _cone_acyclic(maps, X, Y, hi):
    """Is the mapping cone of the induced chain map exact in degrees
    <= hi?  (Normalized chains on both sides.)"""
    N = min(X.N, Y.N)
    mX = [_nondegenerate(X, n) for n in range(N + 1)]
    mY = [_nondegenerate(Y, n) for n in range(N + 1)]
    pX = [np.full(X.sizes[n], -1, dtype=_I) for n in range(N + 1)]
    pY = [np.full(Y.sizes[n], -1, dtype=_I) for n in range(N + 1)]
    for n in range(N + 1):
        pX[n][mX[n]] = np.arange(int(mX[n].sum()))
        pY[n][mY[n]] = np.arange(int(mY[n].sum()))
    cX = [int(m.sum()) for m in mX]
    cY = [int(m.sum()) for m in mY]

    def cone_diff(k):
        # cone C_k = X_{k-1} (+) Y_k; differential sends (a, b) to
        # (-d a, f(a) + d b); returns (snf divisors, dim C_k)
        nc = (cX[k - 1] if k >= 1 else 0) + cY[k]
        if k == 0:
            return (), nc
        width = (cX[k - 2] if k >= 2 else 0) + cY[k - 1]
        base = cX[k - 2] if k >= 2 else 0
        rows = []
        for c in np.flatnonzero(mX[k - 1]):
            row = [0] * width
            sign = -1
            if k - 1 >= 1:
                for i in range(k):
                    t = int(X.face[k - 1][i][c])
                    if mX[k - 2][t]:
                        row[int(pX[k - 2][t])] += sign
                    sign = -sign
            fimg = int(maps[k - 1][c])
            if mY[k - 1][fimg]:
                row[base + int(pY[k - 1][fimg])] += 1
            rows.append(row)
        for c in np.flatnonzero(mY[k]):
            row = [0] * width
            sign = 1
            for i in range(k + 1):
                t = int(Y.face[k][i][c])
                if mY[k - 1][t]:
                    row[base + int(pY[k - 1][t])] += sign
                sign = -sign
            rows.append(row)
        if not rows or not width:
            return (), nc
        d, _v, _vi = linalg.snf_int(rows)
        return tuple(int(x) for x in d), nc

    info = [cone_diff(k) for k in range(min(hi + 2, N + 1))]
    for k in range(min(hi + 1, len(info) - 1)):
        dk, nk = info[k]
        dk1 = info[k + 1][0]
        if nk - len(dk) - len(dk1) != 0:
            return False
        if any(d > 1 for d in dk1):
            return False
    return True


class DiagCodiagReport:
    """Homology comparison between diag X and nabla X."""

    __slots__ = ("degrees", "diag_h", "codiag_h", "equal",
                 "cone_acyclic")

    def __init__(self, degrees, diag_h, codiag_h, equal, cone_acyclic):
        self.degrees = degrees
        self.diag_h = diag_h
        self.codiag_h = codiag_h
        self.equal = equal
        self.cone_acyclic = cone_acyclic

    def as_dict(self):
        fmt = lambda hs: [{"free": f, "torsion": list(t)}
                          for f, t in hs]
        return {"degrees": self.degrees, "diag": fmt(self.diag_h),
                "codiag": fmt(self.codiag_h), "equal": self.equal,
                "cone_acyclic": self.cone_acyclic}

    def __repr__(self):
        return (f"<diag/codiag comparison, degrees {self.degrees}, "
                f"equal={self.equal}>")


def diag_vs_codiag(X, up_to=None):
    """Compare H_*(diag X) with H_*(nabla X) in all safe degrees, and
    check the canonical comparison map is a homology isomorphism (its
    mapping cone is exact)."""
    if X.triangle:
        raise TruncationInsufficient(
            "the diagonal needs the full bisimplicial grid")
    D, Nb, maps = diag_to_codiag(X)
    hi = X.N - 1 if up_to is None else min(up_to, X.N - 1)
    dh = homology(D, up_to=hi)
    ch = homology(Nb, up_to=hi)
    cone = _cone_acyclic(maps, D, Nb, hi)
    return DiagCodiagReport(list(range(hi + 1)), dh, ch,
                            dh == ch, cone)


# ----------------------------------------------------------------------
# edge-path group order (Todd-Coxeter)

def _coset_enumeration(ngens, relators, max_cosets):
    nsym = 2 * ngens
    tab = [[-1] * nsym]
    parent = [0]
    pending = []

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def set_entry(a, s, b):
        a, b = find(a), find(b)
        cur = tab[a][s]
        if cur != -1:
            cur = find(cur)
            if cur != b:
                pending.append((cur, b))
            return
        tab[a][s] = b
        back = tab[b][s ^ 1]
        if back == -1:
            tab[b][s ^ 1] = a
        else:
            back = find(back)
            if back != a:
                pending.append((back, a))

    def merge():
        while pending:
            x, y = pending.pop()
            x, y = find(x), find(y)
            if x == y:
                continue
            if y < x:
                x, y = y, x
            parent[y] = x
            for s in range(nsym):
                d = tab[y][s]
                if d != -1:
                    set_entry(x, s, find(d))

    while True:
        progress = False
        for c in range(len(tab)):
            if find(c) != c:
                continue
            for w in relators:
                cur = find(c)
                for s in w[:-1]:
                    nxt = tab[cur][s]
                    if nxt == -1:
                        if len(tab) >= max_cosets:
                            raise SearchBudgetExceeded(
                                "coset enumeration exceeded "
                                f"{max_cosets} cosets")
                        nxt = len(tab)
                        tab.append([-1] * nsym)
                        parent.append(nxt)
                        tab[cur][s] = nxt
                        tab[nxt][s ^ 1] = cur
                        progress = True
                    cur = find(nxt)
                set_entry(cur, w[-1], find(c))
                merge()
        live = [c for c in range(len(tab)) if find(c) == c]
        holes = [(c, s) for c in live for s in range(nsym)
                 if tab[c][s] == -1]
        if holes and not progress:
            c, s = holes[0]
            if len(tab) >= max_cosets:
                raise SearchBudgetExceeded(
                    f"coset enumeration exceeded {max_cosets} cosets")
            new = len(tab)
            tab.append([-1] * nsym)
            parent.append(new)
            tab[c][s] = new
            tab[new][s ^ 1] = c
            progress = True
        if not progress and not holes:
            break
    return len([c for c in range(len(tab)) if find(c) == c])


def edge_group_order(X, max_cosets=20000):
    """Order of the edge-path group of a one-vertex truncated
    simplicial set (generators: 1-cells; relations: d2.d0 = d1 per
    2-cell, degenerate edge trivial).  pi_1 only needs the 2-skeleton,
    so truncation N >= 2 suffices."""
    if X.sizes[0] != 1:
        raise ValidationError(
            "edge-path presentation needs a single vertex")
    if X.N < 2:
        raise TruncationInsufficient("pi_1 needs levels up to 2")
    ngens = X.sizes[1]
    relators = [(2 * int(X.degen[0][0][0]) + 1,)]
    for c in range(X.sizes[2]):
        d0 = int(X.face[2][0][c])
        d1 = int(X.face[2][1][c])
        d2 = int(X.face[2][2][c])
        relators.append((2 * d2, 2 * d0, 2 * d1 + 1))
    return _coset_enumeration(ngens, relators, max_cosets)


# ----------------------------------------------------------------------
# random objects for the property suites

def _simplex_levels(k, N):
    """Cells of the standard k-simplex up to level N (monotone
    tuples)."""
    return [sorted(itertools.combinations_with_replacement(
        range(k + 1), n + 1)) for n in range(N + 1)]


def random_bisimplicial(rng, N=3, kmax=2, n_gens=2):
    """A bisimplicial subset of Delta^a (x) Delta^b generated by a few
    random cells and closed under all four operator families."""
    a = int(rng.integers(1, kmax + 1))
    b = int(rng.integers(1, kmax + 1))
    la = _simplex_levels(a, N)
    lb = _simplex_levels(b, N)
    chosen = {(p, q): set() for p in range(N + 1)
              for q in range(N + 1)}
    gens = []
    for _ in range(n_gens):
        p = int(rng.integers(0, N + 1))
        q = int(rng.integers(0, N + 1))
        u = la[p][int(rng.integers(0, len(la[p])))]
        v = lb[q][int(rng.integers(0, len(lb[q])))]
        gens.append((p, q, u, v))
    stack = list(gens)
    while stack:
        p, q, u, v = stack.pop()
        if (u, v) in chosen[(p, q)]:
            continue
        chosen[(p, q)].add((u, v))
        for i in range(p + 1):
            if p >= 1:
                stack.append((p - 1, q, u[:i] + u[i + 1:], v))
            if p + 1 <= N:
                stack.append((p + 1, q, u[:i + 1] + u[i:], v))
        for i in range(q + 1):
            if q >= 1:
                stack.append((p, q - 1, u, v[:i] + v[i + 1:]))
            if q + 1 <= N:
                stack.append((p, q + 1, u, v[:i + 1] + v[i:]))
    cells, index = {}, {}
    for key, vals in chosen.items():
        ordered = sorted(vals)
        cells[key] = ordered
        index[key] = {c: i for i, c in enumerate(ordered)}
    sizes = {k: len(v) for k, v in cells.items()}
    hf, vf, hd, vd = {}, {}, {}, {}
    for (p, q) in cells:
        n_cells = sizes[(p, q)]
        hf[(p, q)] = [
            _arr([index[(p - 1, q)][(u[:i] + u[i + 1:], v)]
                  for (u, v) in cells[(p, q)]])
            for i in range(p + 1)] if p >= 1 else []
        vf[(p, q)] = [
            _arr([index[(p, q - 1)][(u, v[:i] + v[i + 1:])]
                  for (u, v) in cells[(p, q)]])
            for i in range(q + 1)] if q >= 1 else []
        hd[(p, q)] = [
            _arr([index[(p + 1, q)][(u[:i + 1] + u[i:], v)]
                  for (u, v) in cells[(p, q)]])
            for i in range(p + 1)] if p < N else []
        vd[(p, q)] = [
            _arr([index[(p, q + 1)][(u, v[:i + 1] + v[i:])]
                  for (u, v) in cells[(p, q)]])
            for i in range(q + 1)] if q < N else []
    return TruncatedBisimplicialSet(N, sizes, hf, vf, hd, vd)


def random_abelian_tsg(rng, N=3, order_cap=512):
    """A random levelwise-abelian simplicial group truncated at N.

    Mix of constants, single-degree Dold-Kan pieces and W-bar of the
    latter; the product of level orders below N stays <= order_cap so
    another W-bar can be taken on top.
    """
    from .catalog import abelian

    def levelprod(SG):
        p = 1
        for q in range(N):
            p *= SG.groups[q].n
        return p

    for _ in range(64):
        r = int(rng.integers(1, 3))
        orders = [int(rng.choice([2, 2, 2, 3, 4]))
                  for _ in range(r)]
        style = int(rng.integers(0, 3))
        if style == 0:
            cand = constant_simplicial_group(abelian(orders), N)
        elif style == 1:
            cand = dold_kan(orders, int(rng.integers(1, N)), N)
        else:
            inner = dold_kan(orders, int(rng.integers(1, N)), N)
            if levelprod(inner) > order_cap:
                continue
            cand = wbar_group(inner, up_to=N)
        if levelprod(cand) <= order_cap:
            return cand
    return dold_kan([2], 1, N)
