"""Finite groups as explicit multiplication tables.

Elements are integers 0..n-1 with 0 the identity.  Construction always
relabels into the canonical order: breadth-first from the identity over
the listed generators, expanding by generators in listing order and
assigning indices at first discovery.  (This realises the shortest-word
order with lexicographic tie-breaking, and it is what makes every
derived object -- quotients, products, hom enumerations -- byte-for-byte
reproducible.)

Groups up to order 512 are supported; the full associativity check is
O(n^3) and is run by default, while internal constructions whose tables
are associative by design skip it above order 128.
"""

import numpy as np

from .errors import (MixedTargets, NotNormal, SearchBudgetExceeded,
                     ValidationError)

_I32 = np.int32

GROUP_ORDER_LIMIT = 512


class FiniteGroup:
    """Immutable multiplication table with a canonical element order."""

    def __init__(self, table, generators=None, validate=True, name=None):
        table = np.ascontiguousarray(np.asarray(table, dtype=_I32))
        n = table.shape[0]
        if table.shape != (n, n):
            raise ValidationError("multiplication table must be square")
        if n == 0:
            raise ValidationError("empty table")
        if n > GROUP_ORDER_LIMIT:
            raise ValidationError(
                f"group order {n} exceeds the supported limit "
                f"{GROUP_ORDER_LIMIT}")
        if table.min() < 0 or table.max() >= n:
            raise ValidationError("table entries out of range")
        ident = None
        rng = np.arange(n, dtype=_I32)
        for e in range(n):
            if (table[e] == rng).all() and (table[:, e] == rng).all():
                ident = e
                break
        if ident is None:
            raise ValidationError("table has no two-sided identity")
        # inverses must exist (each row a permutation hitting the identity)
        if not all((np.sort(table[i]) == rng).all() for i in range(n)):
            raise ValidationError("table rows are not permutations")
        if validate:
            for a in range(n):
                if not (table[table[a]] == table[a][table]).all():
                    raise ValidationError(
                        f"associativity fails at element {a}")
        if generators is None:
            generators = [i for i in range(n) if i != ident]
        generators = [int(g) for g in generators]
        if any(g < 0 or g >= n for g in generators):
            raise ValidationError("generator index out of range")
        generators = [g for g in generators if g != ident]
        if not generators and n > 1:
            raise ValidationError("generators do not generate")

        # breadth-first canonical relabelling
        order = [ident]
        pos = {ident: 0}
        words = [()]
        q = 0
        while q < len(order):
            x = order[q]
            q += 1
            for gi, g in enumerate(generators):
                y = int(table[x, g])
                if y not in pos:
                    pos[y] = len(order)
                    order.append(y)
                    words.append(words[q - 1] + (gi,))
        if len(order) != n:
            raise ValidationError("generators do not generate")
        perm = np.empty(n, dtype=_I32)
        for new, old in enumerate(order):
            perm[old] = new
        old_of = np.array(order, dtype=_I32)
        self.mul = np.ascontiguousarray(
            perm[table[np.ix_(old_of, old_of)]])
        self.mul.setflags(write=False)
        self.inv = np.empty(n, dtype=_I32)
        for i in range(n):
            self.inv[i] = int(np.flatnonzero(self.mul[i] == 0)[0])
        self.inv.setflags(write=False)
        self.generators = tuple(int(perm[g]) for g in generators)
        self.words = tuple(words)
        self.relabel = perm          # old index -> canonical index
        self.name = name
        self._abelian = None
        self._fp = None

    @property
    def n(self):
        return self.mul.shape[0]

    def __len__(self):
        return self.mul.shape[0]

    def __repr__(self):
        tag = self.name or "group"
        return f"<{tag} of order {self.n}>"

    def fingerprint(self):
        if self._fp is None:
            import hashlib
            h = hashlib.sha256(self.mul.tobytes())
            h.update(bytes(str(self.generators), "ascii"))
            self._fp = h.hexdigest()[:16]
        return self._fp

    def is_abelian(self):
        if self._abelian is None:
            self._abelian = bool((self.mul == self.mul.T).all())
        return self._abelian

    def element_order(self, i):
        k, x = 1, int(i)
        while x != 0:
            x = int(self.mul[x, i])
            k += 1
        return k

    def conj(self, x, g):
        """g^-1 x g."""
        return int(self.mul[self.mul[self.inv[g], x], g])

    def closure(self, seed):
        """Members of the subgroup generated by ``seed`` (sorted array)."""
        members = {0}
        members.update(int(s) for s in seed)
        frontier = list(members)
        while frontier:
            m = np.fromiter(members, dtype=_I32, count=len(members))
            prod = np.unique(self.mul[np.ix_(m, m)])
            new = [int(x) for x in prod if int(x) not in members]
            members.update(new)
            frontier = new
        return np.array(sorted(members), dtype=_I32)

    def subgroup(self, members):
        return Subgroup(self, members)

    def trivial_subgroup(self):
        return Subgroup(self, [0])

    def full_subgroup(self):
        return Subgroup(self, range(self.n))

    def center(self):
        ctr = [i for i in range(self.n)
               if (self.mul[i] == self.mul[:, i]).all()]
        return Subgroup(self, ctr)


class Subgroup:
    """A subgroup given by its (sorted) member indices."""

    def __init__(self, parent, members):
        self.parent = parent
        members = sorted({int(m) for m in members})
        self.members = np.array(members, dtype=_I32)
        self._set = frozenset(members)
        if 0 not in self._set:
            raise ValidationError("subgroup must contain the identity")
        mm = self.parent.mul[np.ix_(self.members, self.members)]
        if not all(int(x) in self._set for x in np.unique(mm)):
            raise ValidationError("subset is not closed under products")

    def __contains__(self, x):
        return int(x) in self._set

    def __len__(self):
        return len(self.members)

    @property
    def order(self):
        return len(self.members)

    def index(self):
        return self.parent.n // len(self.members)

    def is_normal(self):
        G = self.parent
        for g in G.generators:
            for m in self.members:
                if G.conj(int(m), g) not in self._set:
                    return False
        return True

    def is_abelian(self):
        sub = self.parent.mul[np.ix_(self.members, self.members)]
        return bool((sub == sub.T).all())

    def as_group(self):
        """(group on the members, embedding hom into the parent)."""
        posmap = {int(m): i for i, m in enumerate(self.members)}
        tab = np.array([[posmap[int(self.parent.mul[a, b])]
                         for b in self.members] for a in self.members],
                       dtype=_I32)
        S = FiniteGroup(tab, validate=len(self.members) <= 128)
        # S's canonical index i corresponds to parent element:
        old_of_new = np.empty(len(self.members), dtype=_I32)
        old_of_new[S.relabel] = np.arange(len(self.members))
        image = self.members[old_of_new]
        return S, GroupHom(S, self.parent, image)


def normal_closure(G, seed):
    """Smallest normal subgroup of G containing ``seed``."""
    members = {0}
    pending = [int(s) for s in seed]
    while pending:
        x = pending.pop()
        if x in members:
            continue
        orbit = {G.conj(x, g) for g in range(G.n)}
        for y in orbit:
            if y not in members:
                members.add(y)
        closed = G.closure(list(members))
        for y in closed:
            if int(y) not in members:
                members.add(int(y))
                pending.append(int(y))
    return Subgroup(G, members)


def commutator_subgroup(G, H, K):
    """[H, K] as a subgroup of G (H, K subgroups of G)."""
    comms = set()
    for h in H.members:
        hh = int(h)
        ih = int(G.inv[hh])
        for k in K.members:
            kk = int(k)
            c = G.mul[G.mul[ih, G.inv[kk]], G.mul[hh, kk]]
            comms.add(int(c))
    return Subgroup(G, G.closure(comms))


def lower_central_series(G, N, length):
    """[N]_1 .. [N]_length with [N]_{k+1} = [N, [N]_k].

    Emits SeriesStabilized (a warning) if the series stops strictly
    descending before ``length`` terms; the stable tail is repeated.
    """
    import warnings

    from .errors import SeriesStabilized
    terms = [N]
    warned = False
    for _ in range(length - 1):
        nxt = commutator_subgroup(G, N, terms[-1])
        if not warned and len(nxt) == len(terms[-1]) and len(nxt) > 1:
            warnings.warn("lower central series stabilised early",
                          SeriesStabilized)
            warned = True
        terms.append(nxt)
    return terms


class GroupHom:
    """A homomorphism stored as its full image array."""

    def __init__(self, src, dst, image, validate=True):
        self.src = src
        self.dst = dst
        self.image = np.ascontiguousarray(np.asarray(image, dtype=_I32))
        if self.image.shape != (src.n,):
            raise ValidationError("hom image has the wrong length")
        if validate:
            if int(self.image[0]) != 0:
                raise ValidationError("hom does not preserve the identity")
            if self.image.min() < 0 or self.image.max() >= dst.n:
                raise ValidationError("hom image out of range")
            lhs = dst.mul[self.image[:, None], self.image[None, :]]
            if not (lhs == self.image[src.mul]).all():
                raise ValidationError("map is not a homomorphism")
        self.image.setflags(write=False)

    def __call__(self, x):
        return int(self.image[x])

    def then(self, other):
        """other o self (apply self first)."""
        if other.src is not self.dst and other.src.n != self.dst.n:
            raise ValidationError("composition mismatch")
        return GroupHom(self.src, other.dst, other.image[self.image],
                        validate=False)

    @classmethod
    def identity(cls, G):
        return cls(G, G, np.arange(G.n, dtype=_I32), validate=False)

    def kernel(self):
        return Subgroup(self.src, np.flatnonzero(self.image == 0))

    def image_subgroup(self):
        return Subgroup(self.dst, np.unique(self.image))

    def is_surjective(self):
        return len(np.unique(self.image)) == self.dst.n

    def is_injective(self):
        return len(np.unique(self.image)) == self.src.n

    def is_isomorphism(self):
        return self.src.n == self.dst.n and self.is_injective()

    def gen_images(self):
        return tuple(int(self.image[g]) for g in self.src.generators)

    def __eq__(self, other):
        return (isinstance(other, GroupHom) and self.src is other.src
                and self.dst is other.dst
                and (self.image == other.image).all())

    def __hash__(self):
        return hash((id(self.src), id(self.dst), self.image.tobytes()))

    def __repr__(self):
        return (f"<hom {self.src!r} -> {self.dst!r} "
                f"gens {self.gen_images()}>")


def quotient_group(G, N):
    """(G/N, projection); cosets are ordered by their minimal element."""
    if not N.is_normal():
        raise NotNormal("subgroup is not normal; quotient undefined")
    n = G.n
    coset_of = np.full(n, -1, dtype=_I32)
    reps = []
    for x in range(n):
        if coset_of[x] < 0:
            members = G.mul[x, N.members]
            coset_of[members] = len(reps)
            reps.append(x)
    m = len(reps)
    reps = np.array(reps, dtype=_I32)
    tab = coset_of[G.mul[np.ix_(reps, reps)]]
    gens = []
    for g in G.generators:
        c = int(coset_of[g])
        if c != 0 and c not in gens:
            gens.append(c)
    Q = FiniteGroup(tab, generators=gens or None, validate=m <= 128)
    proj = GroupHom(G, Q, Q.relabel[coset_of], validate=False)
    return Q, proj


def min_generating_sequence(G):
    """Greedy generating sequence over the canonical element order."""
    gens = []
    have = {0}
    for x in range(1, G.n):
        if x not in have:
            gens.append(x)
            have = {int(v) for v in G.closure(gens)}
            if len(have) == G.n:
                break
    return gens


def enumerate_homs(G, H, budget=10 ** 7):
    """Every homomorphism G -> H, sorted by generator-image tuples.

    Candidates are assignments of images to a minimal generating
    sequence of G; each batch is expanded along the BFS tree and
    checked on all Cayley edges at once.  Raises SearchBudgetExceeded
    when |H|**k passes the budget.
    """
    gens = min_generating_sequence(G)
    k = len(gens)
    total = H.n ** k
    if budget is not None and total > budget:
        raise SearchBudgetExceeded(
            f"{H.n}**{k} = {total} candidate assignments exceed the "
            f"budget {budget}")
    if k == 0:
        return [GroupHom(G, H, np.zeros(G.n, dtype=_I32), validate=False)]

    # BFS tree of G over `gens`
    parent = np.full(G.n, -1, dtype=_I32)
    via = np.full(G.n, -1, dtype=_I32)
    tree_order = [0]
    seen = {0}
    qi = 0
    while qi < len(tree_order):
        x = tree_order[qi]
        qi += 1
        for gi, g in enumerate(gens):
            y = int(G.mul[x, g])
            if y not in seen:
                seen.add(y)
                parent[y] = x
                via[y] = gi
                tree_order.append(y)

    out = []
    batch = 4096
    for start in range(0, total, batch):
        idxs = np.arange(start, min(start + batch, total), dtype=np.int64)
        B = len(idxs)
        assign = np.empty((k, B), dtype=_I32)
        rem = idxs.copy()
        for j in range(k - 1, -1, -1):
            assign[j] = rem % H.n
            rem //= H.n
        phi = np.zeros((G.n, B), dtype=_I32)
        for y in tree_order[1:]:
            phi[y] = H.mul[phi[parent[y]], assign[via[y]]]
        ok = np.ones(B, dtype=bool)
        for gi, g in enumerate(gens):
            lhs = phi[G.mul[:, g]]            # phi(x g)
            rhs = H.mul[phi, assign[gi]]      # phi(x) phi(g)
            ok &= (lhs == rhs).all(axis=0)
        for col in np.flatnonzero(ok):
            out.append(GroupHom(G, H, phi[:, col].copy(), validate=False))
    out.sort(key=lambda f: f.gen_images())
    return out


def homs_mod_conjugacy(homs, by=None):
    """Orbits of homs under post-conjugation by ``by`` (a Subgroup of
    the common target; default the full target).

    Returns a list of orbits, each a list of homs with the canonical
    representative (least generator-image tuple) first; orbits sorted
    by representative.
    """
    if not homs:
        return []
    T = homs[0].dst
    for f in homs:
        if f.dst is not T:
            raise MixedTargets("homs have different targets")
    members = by.members if by is not None else np.arange(T.n, dtype=_I32)
    if by is not None and by.parent is not T:
        raise MixedTargets("conjugating subgroup lives in another group")
    index = {f.image.tobytes(): f for f in homs}
    seen = set()
    orbits = []
    for f in sorted(homs, key=lambda f: f.gen_images()):
        key = f.image.tobytes()
        if key in seen:
            continue
        orbit = {}
        for c in members:
            img = T.mul[T.mul[T.inv[c], f.image], c]
            b = img.tobytes()
            if b not in index:
                raise ValidationError(
                    "conjugate of a listed hom is missing from the input")
            orbit[b] = index[b]
        for b in orbit:
            seen.add(b)
        orbits.append(sorted(orbit.values(), key=lambda f: f.gen_images()))
    orbits.sort(key=lambda o: o[0].gen_images())
    return orbits


def _order_multiset(G):
    return tuple(sorted(G.element_order(i) for i in range(G.n)))


def find_isomorphism(G, H, node_budget=10 ** 6):
    """An isomorphism G -> H, or None.  Backtracking over a minimal
    generating sequence with element-order filtering."""
    if G.n != H.n:
        return None
    if _order_multiset(G) != _order_multiset(H):
        return None
    gens = min_generating_sequence(G)
    orders = [G.element_order(g) for g in gens]
    cand = [[h for h in range(H.n) if H.element_order(h) == o]
            for o in orders]
    prefix_size = [len(G.closure(gens[:i + 1])) for i in range(len(gens))]
    nodes = 0

    def extend(i, chosen):
        nonlocal nodes
        if i == len(gens):
            return None
        for h in cand[i]:
            nodes += 1
            if nodes > node_budget:
                raise SearchBudgetExceeded("isomorphism search budget hit")
            chosen.append(h)
            ok = len(H.closure(chosen)) == prefix_size[i]
            if ok and i == len(gens) - 1:
                f = _hom_from_gen_images(G, gens, chosen, H)
                if f is not None and f.is_isomorphism():
                    return f
                ok = False
            if ok:
                res = extend(i + 1, chosen)
                if res is not None:
                    return res
            chosen.pop()
        return None

    if not gens:
        return GroupHom(G, H, np.zeros(1, dtype=_I32), validate=False)
    return extend(0, [])


def _hom_from_gen_images(G, gens, images, H):
    """Build the hom sending gens -> images, or None if inconsistent."""
    parent = np.full(G.n, -1, dtype=_I32)
    via = np.full(G.n, -1, dtype=_I32)
    order = [0]
    seen = {0}
    qi = 0
    while qi < len(order):
        x = order[qi]
        qi += 1
        for gi, g in enumerate(gens):
            y = int(G.mul[x, g])
            if y not in seen:
                seen.add(y)
                parent[y] = x
                via[y] = gi
                order.append(y)
    if len(order) != G.n:
        return None
    phi = np.zeros(G.n, dtype=_I32)
    for y in order[1:]:
        phi[y] = H.mul[phi[parent[y]], images[via[y]]]
    for g, im in zip(gens, images):
        if not (H.mul[phi, im] == phi[G.mul[:, g]]).all():
            return None
    return GroupHom(G, H, phi, validate=False)


def hom_from_gen_images(G, H, images):
    """The hom G -> H sending G.generators to ``images`` (in order).

    Raises ValidationError if no such homomorphism exists.
    """
    images = [int(x) for x in images]
    if len(images) != len(G.generators):
        raise ValidationError(
            f"expected {len(G.generators)} generator images, "
            f"got {len(images)}")
    if G.n == 1:
        return GroupHom(G, H, np.zeros(1, dtype=_I32), validate=False)
    f = _hom_from_gen_images(G, list(G.generators), images, H)
    if f is None:
        raise ValidationError(
            "generator images do not extend to a homomorphism")
    return f


def is_isomorphic(G, H):
    return find_isomorphism(G, H) is not None
