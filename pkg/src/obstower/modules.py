"""Finite right modules over a finite group.

A module is a carrier Z/d_1 x ... x Z/d_r together with one integer
matrix per group element; the action is on row vectors, a.g = a @ act[g]
mod the coordinate orders, so act[gh] = act[g] @ act[h].  Validation
checks the matrices are well defined modulo the orders and multiplicative
on all Cayley edges (which extends to everything by word induction).
"""

import numpy as np

from . import linalg
from .errors import NotAbelianKernel, ValidationError
from .groups import FiniteGroup, GroupHom, min_generating_sequence, \
    quotient_group

_I64 = np.int64


class GModule:
    def __init__(self, group, orders, act, validate=True):
        self.group = group
        self.orders = tuple(int(d) for d in orders if int(d) > 1)
        r = len(self.orders)
        self.rank = r
        ordarr = np.array(self.orders, dtype=_I64) if r else \
            np.empty(0, dtype=_I64)
        act = np.asarray(act, dtype=_I64)
        if act.shape != (group.n, r, r):
            raise ValidationError("action array has the wrong shape")
        if r:
            act = act % ordarr[None, None, :]
        self.act = np.ascontiguousarray(act)
        self.act.setflags(write=False)
        if validate and r:
            if (self.act[0] != np.eye(r, dtype=_I64)).any():
                raise ValidationError("identity must act as the identity")
            dj = ordarr[None, :, None]
            if ((self.act * dj) % ordarr[None, None, :]).any():
                raise ValidationError(
                    "action matrices are not well defined mod the orders")
            for g in group.generators:
                lhs = (self.act @ self.act[g]) % ordarr
                if (lhs != self.act[group.mul[:, g]]).any():
                    raise ValidationError("action is not multiplicative")
        self._fp = None

    # -- carrier -------------------------------------------------------
    @property
    def size(self):
        out = 1
        for d in self.orders:
            out *= d
        return out

    def zero(self):
        return np.zeros(self.rank, dtype=_I64)

    def reduce(self, v):
        v = np.asarray(v, dtype=_I64)
        if self.rank == 0:
            return v
        return v % np.array(self.orders, dtype=_I64)

    def neg(self, v):
        return self.reduce(-np.asarray(v, dtype=_I64))

    def apply(self, v, g):
        """v . g for one or many row vectors (last axis = coordinates)."""
        if self.rank == 0:
            return np.asarray(v, dtype=_I64)
        return self.reduce(np.asarray(v, dtype=_I64) @ self.act[g])

    def element_at(self, i):
        """Row-major tuple enumeration (last coordinate fastest)."""
        v = np.zeros(self.rank, dtype=_I64)
        for j in range(self.rank - 1, -1, -1):
            v[j] = i % self.orders[j]
            i //= self.orders[j]
        return v

    def index_of(self, v):
        i = 0
        for j in range(self.rank):
            i = i * self.orders[j] + int(v[j]) % self.orders[j]
        return i

    def all_elements(self):
        out = np.zeros((self.size, self.rank), dtype=_I64)
        for i in range(self.size):
            out[i] = self.element_at(i)
        return out

    def is_trivial_action(self):
        eye = np.eye(self.rank, dtype=_I64)
        ordarr = np.array(self.orders, dtype=_I64)
        return all(((self.act[g] - eye) % ordarr == 0).all()
                   for g in range(self.group.n)) if self.rank else True

    def fingerprint(self):
        if self._fp is None:
            import hashlib
            h = hashlib.sha256(self.group.fingerprint().encode())
            h.update(str(self.orders).encode())
            h.update(self.act.tobytes())
            self._fp = h.hexdigest()[:16]
        return self._fp

    def __repr__(self):
        car = " x ".join(f"Z/{d}" for d in self.orders) or "0"
        return f"<module {car} over {self.group!r}>"


def trivial_module(G, orders):
    r = len([d for d in orders if int(d) > 1])
    act = np.broadcast_to(np.eye(r, dtype=_I64), (G.n, r, r)).copy()
    return GModule(G, orders, act, validate=False)


def module_from_gen_action(G, orders, gen_mats):
    """Extend an action given on G.generators along the BFS tree.

    ``gen_mats`` is a sequence aligned with G.generators.
    """
    orders = [int(d) for d in orders if int(d) > 1]
    r = len(orders)
    act = np.zeros((G.n, r, r), dtype=_I64)
    act[0] = np.eye(r, dtype=_I64)
    ordarr = np.array(orders, dtype=_I64) if r else np.empty(0, _I64)
    mats = [np.asarray(m, dtype=_I64) % ordarr for m in gen_mats]
    if len(mats) != len(G.generators):
        raise ValidationError("one matrix per generator, in order")
    seen = np.zeros(G.n, dtype=bool)
    seen[0] = True
    queue = [0]
    qi = 0
    while qi < len(queue):
        x = queue[qi]
        qi += 1
        for gi, g in enumerate(G.generators):
            y = int(G.mul[x, g])
            if not seen[y]:
                seen[y] = True
                act[y] = (act[x] @ mats[gi]) % ordarr if r else act[y]
                queue.append(y)
    return GModule(G, orders, act, validate=True)


def pullback_module(M, f):
    """Restriction of M along a hom f: H -> M.group."""
    if f.dst is not M.group and \
            f.dst.fingerprint() != M.group.fingerprint():
        raise ValidationError("hom target must be the acting group")
    return GModule(f.src, M.orders, M.act[f.image], validate=False)


def abelian_decomposition(G):
    """(orders, to_coords, from_index) for an abelian FiniteGroup.

    ``orders`` are the invariant factors (ascending divisibility),
    ``to_coords`` maps element index -> coordinate row, and
    ``from_index[coords-as-index]`` inverts it.  The relation lattice of
    a minimal generating sequence is assembled from the BFS words
    (Schreier-style) and put in Smith form.
    """
    if not G.is_abelian():
        raise NotAbelianKernel("group is not abelian")
    if G.n == 1:
        return (), np.zeros((1, 0), dtype=_I64), {(): 0}
    gens = min_generating_sequence(G)
    k = len(gens)
    # abelianised word vectors per element, via a BFS over `gens`
    vec = np.full((G.n, k), -1, dtype=_I64)
    vec[0] = 0
    queue = [0]
    qi = 0
    while qi < len(queue):
        x = queue[qi]
        qi += 1
        for gi, g in enumerate(gens):
            y = int(G.mul[x, g])
            if vec[y][0] < 0:
                vec[y] = vec[x]
                vec[y, gi] += 1
                queue.append(y)
    rels = []
    for x in range(G.n):
        for gi, g in enumerate(gens):
            y = int(G.mul[x, g])
            row = vec[x] - vec[y]
            row[gi] += 1
            if row.any():
                rels.append([int(v) for v in row])
    if not rels:
        rels = [[0] * k]
    diag, V, Vinv = linalg.snf_int(rels)
    diag = list(diag) + [0] * (k - len(diag))
    if any(d == 0 for d in diag):
        raise ArithmeticError("finite abelian group with free relations")
    orders = tuple(d for d in diag if d > 1)
    slots = [j for j, d in enumerate(diag) if d > 1]
    to_coords = np.zeros((G.n, len(slots)), dtype=_I64)
    for x in range(G.n):
        c = [sum(int(vec[x, a]) * V[a][j] for a in range(k))
             for j in range(k)]
        to_coords[x] = [c[j] % diag[j] for j in slots]
    from_index = {}
    for x in range(G.n):
        key = tuple(int(v) for v in to_coords[x])
        if key in from_index:
            raise ArithmeticError("abelian decomposition is not injective")
        from_index[key] = x
    return orders, to_coords, from_index


def conjugation_module(Pi, H, K, through):
    """H/K as a module over ``through``'s target, action by conjugation.

    H, K are subgroups of Pi with K normal in H and H/K abelian; the
    conjugation action of Pi must descend along the surjection
    ``through`` (checked on its kernel).  Returns (module, project)
    where project maps an element of H to its coordinate row.
    """
    Hg, emb = H.as_group()
    kpos = [int(i) for i in range(Hg.n) if int(emb.image[i]) in K]
    Ksub = Hg.subgroup(kpos)
    if not Ksub.is_normal():
        raise ValidationError("K is not normal in H")
    Q, proj = quotient_group(Hg, Ksub)
    if not Q.is_abelian():
        raise NotAbelianKernel("H/K is not abelian")
    orders, to_coords, from_index = abelian_decomposition(Q)
    r = len(orders)

    pos_in_H = {int(emb.image[i]): i for i in range(Hg.n)}

    def coset_coords(h):
        """Coordinates of the class of h in H/K (h given in Pi)."""
        return to_coords[int(proj.image[pos_in_H[int(h)]])]

    # representative in Pi of each Q element
    rep = np.zeros(Q.n, dtype=np.int32)
    for i in range(Hg.n):
        q = int(proj.image[i])
        if rep[q] == 0 and q != int(proj.image[0]):
            rep[q] = int(emb.image[i])
    # conjugation must be trivial on ker(through)
    T = through.dst
    kers = [x for x in range(Pi.n) if int(through.image[x]) == 0]
    basis_elems = []
    for j in range(r):
        c = tuple(1 if a == j else 0 for a in range(r))
        basis_elems.append(int(rep[from_index[c]]))
    for x in kers:
        ix = int(Pi.inv[x])
        for j, h in enumerate(basis_elems):
            c = int(Pi.mul[Pi.mul[ix, h], x])
            want = tuple(1 if a == j else 0 for a in range(r))
            if tuple(int(v) for v in coset_coords(c)) != want:
                raise ValidationError(
                    "conjugation action does not descend along the "
                    "given quotient")
    # one preimage per element of the target
    pre = np.full(T.n, -1, dtype=np.int32)
    for x in range(Pi.n):
        t = int(through.image[x])
        if pre[t] < 0:
            pre[t] = x
    if (pre < 0).any():
        raise ValidationError("action quotient map is not surjective")
    act = np.zeros((T.n, r, r), dtype=_I64)
    for t in range(T.n):
        x = int(pre[t])
        ix = int(Pi.inv[x])
        for j, h in enumerate(basis_elems):
            act[t, j] = coset_coords(int(Pi.mul[Pi.mul[ix, h], x]))
    module = GModule(T, orders, act, validate=True)

    def project(h):
        return np.array(coset_coords(h), dtype=_I64)

    return module, project
