"""Extensions 1 -> A -> E -> G -> 1 with abelian kernel.

The bridge between H^2 and honest group tables.  A 2-cocycle c gives the
crossed product on pairs (g, a) with

    (g, a)(h, b) = (gh, a.h + b + c(g, h)),

and conversely any surjection with abelian kernel plus an identification
of the kernel with a module yields a factor set

    c(g, h) = embed^{-1}( s(gh)^{-1} s(g) s(h) )

for any set section s with s(e) = e.  Homomorphic sections of a split
extension form a torsor under 1-cocycles via sigma.z (g) = sigma(g)
embed(z(g)); conjugating a section by a kernel element shifts its
derivation by a principal cocycle, so conjugacy classes of splittings
sit under H^1 exactly.

Conventions (right action throughout): conjugation of the kernel by a
section matches the module action, s(g)^{-1} embed(a) s(g) =
embed(a.g), and this is validated, not assumed, on every datum.
"""

import itertools
from collections import deque

import numpy as np

from .cohomology import Cochain, cohomology, solve_coboundary
from .errors import NotACocycle, NotAbelianKernel, SearchBudgetExceeded, \
    ValidationError
from .groups import FiniteGroup, GroupHom, Subgroup, min_generating_sequence

_I64 = np.int64


def _strides(orders):
    s = np.ones(len(orders), dtype=_I64)
    for j in range(len(orders) - 2, -1, -1):
        s[j] = s[j + 1] * orders[j + 1]
    return s


def crossed_table(G, M, c):
    """Multiplication table of the crossed product on pair indices
    g * |A| + a_index.  c is a normalised 2-cochain (not necessarily a
    cocycle; the caller decides whether the result must be a group)."""
    n = G.n
    s = M.size
    r = M.rank
    avecs = M.all_elements()
    ordarr = np.array(M.orders, dtype=_I64)
    st = _strides(ordarr) if r else np.empty(0, dtype=_I64)
    cm = np.zeros((n, n, r), dtype=_I64)
    if r and n > 1:
        m = n - 1
        cm[1:, 1:] = c.values.reshape(m, m, r)
    table = np.empty((n * s, n * s), dtype=_I64)
    for g in range(n):
        for h in range(n):
            if r:
                ah = avecs @ M.act[h]
                tot = (ah[:, None, :] + avecs[None, :, :]
                       + cm[g, h][None, None, :]) % ordarr
                ia = tot @ st
            else:
                ia = np.zeros((s, s), dtype=_I64)
            table[g * s:(g + 1) * s, h * s:(h + 1) * s] = \
                int(G.mul[g, h]) * s + ia
    return table


class ExtensionDatum:
    """One concrete extension: total group, projection, kernel
    identification, and a set section (s(e) = e always)."""

    def __init__(self, total, base, module, proj, sect, embed,
                 validate=True):
        self.total = total
        self.base = base
        self.module = module
        self.proj = proj
        self.sect = np.asarray(sect, dtype=_I64)
        self.embed = np.asarray(embed, dtype=_I64)
        self._inv_embed = None
        if validate:
            self._validate()

    @property
    def inv_embed(self):
        if self._inv_embed is None:
            inv = np.full(self.total.n, -1, dtype=_I64)
            inv[self.embed] = np.arange(len(self.embed), dtype=_I64)
            self._inv_embed = inv
        return self._inv_embed

    @property
    def kernel(self):
        return Subgroup(self.total, [int(x) for x in self.embed])

    def _validate(self):
        E, G, M = self.total, self.base, self.module
        if self.proj.src is not E or self.proj.dst is not G:
            raise ValidationError("projection endpoints do not match")
        if not self.proj.is_surjective():
            raise ValidationError("projection is not onto the base")
        ker = self.proj.kernel()
        if len(ker.members) != M.size:
            raise ValidationError("kernel size does not match the module")
        if not ker.is_abelian():
            raise NotAbelianKernel("extension kernel is not abelian")
        if sorted(int(x) for x in self.embed) != list(ker.members):
            raise ValidationError("embed image is not the kernel")
        if len(set(int(x) for x in self.embed)) != M.size:
            raise ValidationError("embed is not injective")
        if int(self.embed[0]) != 0:
            raise ValidationError("embed must send zero to the identity")
        # embed is additive: enough to check basis + anything
        avecs = M.all_elements()
        ordarr = np.array(M.orders, dtype=_I64)
        st = _strides(ordarr) if M.rank else np.empty(0, dtype=_I64)
        for j in range(M.rank):
            ej = np.zeros(M.rank, dtype=_I64)
            ej[j] = 1
            sums = (avecs + ej) % ordarr
            lhs = self.embed[sums @ st]
            rhs = E.mul[self.embed[int(st[j])], self.embed]
            if not (lhs == rhs).all():
                raise ValidationError("embed is not a homomorphism")
        if len(self.sect) != G.n or int(self.sect[0]) != 0:
            raise ValidationError("section must have s(e) = e")
        if not (self.proj.image[self.sect]
                == np.arange(G.n, dtype=_I64)).all():
            raise ValidationError("section does not split the projection "
                                  "setwise")
        # conjugation by the section must realise the module action
        for g in G.generators:
            sg = int(self.sect[g])
            for j in range(M.rank):
                x = self.embed[int(st[j])]
                lhs = E.mul[E.inv[sg], E.mul[x, sg]]
                aj = M.act[g][j] % ordarr
                if int(lhs) != int(self.embed[int(aj @ st)]):
                    raise ValidationError(
                        "conjugation through the section disagrees with "
                        "the module action")

    def factor_set(self):
        """The 2-cocycle of this datum's section."""
        E, G, M = self.total, self.base, self.module
        S = self.sect
        prod = E.mul[S[:, None], S[None, :]]
        elt = E.mul[E.inv[S[G.mul]], prod]
        ia = self.inv_embed[elt]
        if (ia < 0).any():
            raise ArithmeticError("factor set left the kernel")
        vals = M.all_elements()[ia]
        m = G.n - 1
        c = Cochain(M, 2, vals[1:, 1:].reshape(m * m, M.rank))
        if not c.is_cocycle():
            raise ArithmeticError("factor set is not a cocycle")
        return c

    def class_coords(self, H2=None):
        if H2 is None:
            H2 = cohomology(self.base, self.module, 2)
        return H2, H2.class_of(self.factor_set())

    def __repr__(self):
        return (f"<extension of order {self.total.n}: "
                f"|A|={self.module.size}, |G|={self.base.n}>")


def extension_from_cocycle(G, M, c, name=None):
    """Build the crossed-product extension of a 2-cocycle."""
    if c.degree != 2:
        raise ValidationError("need a 2-cochain")
    if c.module.fingerprint() != M.fingerprint():
        raise ValidationError("cochain module mismatch")
    if not c.is_cocycle():
        raise NotACocycle("factor set fails the cocycle identity")
    s = M.size
    table = crossed_table(G, M, c)
    ordarr = np.array(M.orders, dtype=_I64)
    st = _strides(ordarr) if M.rank else np.empty(0, dtype=_I64)
    gens = [int(st[j]) for j in range(M.rank)]
    gens += [int(g) * s for g in G.generators]
    # associativity is the cocycle identity, checked above; revalidate
    # the table only while it is cheap
    E = FiniteGroup(table, generators=gens, validate=(G.n * s <= 128),
                    name=name)
    rel = E.relabel
    img = np.empty(G.n * s, dtype=_I64)
    img[rel] = np.arange(G.n * s, dtype=_I64) // s
    proj = GroupHom(E, G, img, validate=True)
    sect = rel[np.arange(G.n, dtype=_I64) * s]
    embed = rel[np.arange(s, dtype=_I64)]
    return ExtensionDatum(E, G, M, proj, sect, embed, validate=True)


def semidirect_product(G, M, name=None):
    return extension_from_cocycle(G, M, Cochain.zero(M, 2), name=name)


def split_extension(G, M, name=None):
    return semidirect_product(G, M, name=name)


def extension_datum(proj, M, embed, sect=None):
    """Wrap an arbitrary surjection with identified abelian kernel.

    When no section is given, the minimal element of each fiber is used
    (the identity is index 0, so s(e) = e comes for free).
    """
    E, G = proj.src, proj.dst
    if sect is None:
        sect = np.full(G.n, -1, dtype=_I64)
        for x in range(E.n):
            g = int(proj.image[x])
            if sect[g] < 0:
                sect[g] = x
    return ExtensionDatum(E, G, M, proj, np.asarray(sect),
                          np.asarray(embed), validate=True)


def extension_class(E, H2=None):
    """The H^2 class of an ExtensionDatum."""
    if H2 is None:
        H2 = cohomology(E.base, E.module, 2)
    return H2.classify(E.factor_set())


def are_equivalent(d1, d2, H2=None):
    """Same cohomology class over the same base and module."""
    if d1.base.fingerprint() != d2.base.fingerprint():
        raise ValidationError("different base groups")
    if d1.module.fingerprint() != d2.module.fingerprint():
        raise ValidationError("different modules")
    if H2 is None:
        H2 = cohomology(d1.base, d1.module, 2)
    return (H2.class_of(d1.factor_set())
            == H2.class_of(d2.factor_set()))


def equivalence_map(d1, d2):
    """Explicit equivalence E1 -> E2 (identity on A and on the base),
    or None when the classes differ.

    With sections s_i and factor sets c_i, any beta solving
    d beta = c1 - c2 gives theta(s1(g) emb(a)) = s2(g) emb(a + beta(g)),
    and that theta is a group isomorphism commuting with both legs.
    """
    if d1.base.fingerprint() != d2.base.fingerprint():
        raise ValidationError("different base groups")
    if d1.module.fingerprint() != d2.module.fingerprint():
        raise ValidationError("different modules")
    M = d1.module
    beta = solve_coboundary(M, d1.factor_set() - d2.factor_set())
    if beta is None:
        return None
    E1, E2, G = d1.total, d2.total, d1.base
    ordarr = np.array(M.orders, dtype=_I64)
    st = _strides(ordarr) if M.rank else np.empty(0, dtype=_I64)
    bfull = np.zeros((G.n, M.rank), dtype=_I64)
    if G.n > 1:
        bfull[1:] = beta.values
    img = np.empty(E1.n, dtype=_I64)
    avecs = M.all_elements()
    for x in range(E1.n):
        g = int(d1.proj.image[x])
        a_elt = E1.mul[E1.inv[int(d1.sect[g])], x]
        ia = int(d1.inv_embed[a_elt])
        shifted = (avecs[ia] + bfull[g]) % ordarr
        ia2 = int(shifted @ st) if M.rank else 0
        img[x] = E2.mul[int(d2.sect[g]), int(d2.embed[ia2])]
    theta = GroupHom(E1, E2, img, validate=True)
    if not theta.is_isomorphism():
        raise ArithmeticError("equivalence map is not an isomorphism")
    if not (theta.image[d1.embed] == d2.embed).all():
        raise ArithmeticError("equivalence map moves the kernel")
    if not (d2.proj.image[theta.image] == d1.proj.image).all():
        raise ArithmeticError("equivalence map breaks the projection")
    return theta


# -- splittings and the cocycle torsor ---------------------------------

def covering_homs(proj, psi, budget=1_000_000):
    """All homomorphisms phi with proj o phi = psi, by fiber search
    over a minimal generating sequence of psi's source."""
    E = proj.src
    G = psi.src
    if psi.dst is not proj.dst \
            and psi.dst.fingerprint() != proj.dst.fingerprint():
        raise ValidationError("psi must land in the projection base")
    gens = min_generating_sequence(G)
    fibers = [np.flatnonzero(proj.image == int(psi.image[g]))
              for g in gens]
    total = 1
    for f in fibers:
        total *= len(f)
    if total > budget:
        raise SearchBudgetExceeded(
            f"{total} candidate lifts exceed the budget {budget}")
    n = G.n
    parent = np.zeros(n, dtype=_I64)
    via = np.zeros(n, dtype=_I64)
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    order = [0]
    dq = deque([0])
    while dq:
        x = dq.popleft()
        for gi, g in enumerate(gens):
            y = int(G.mul[x, g])
            if not seen[y]:
                seen[y] = True
                parent[y] = x
                via[y] = gi
                order.append(y)
                dq.append(y)
    if not seen.all():
        raise ArithmeticError("generating sequence failed to generate")
    out = []
    allx = np.arange(n, dtype=_I64)
    for choice in itertools.product(*fibers):
        phi = np.zeros(n, dtype=_I64)
        for y in order[1:]:
            phi[y] = E.mul[phi[parent[y]], int(choice[via[y]])]
        ok = True
        for gi, g in enumerate(gens):
            if not (phi[G.mul[allx, g]]
                    == E.mul[phi, int(choice[gi])]).all():
                ok = False
                break
        if ok and (proj.image[phi] == psi.image).all():
            out.append(phi)
    out.sort(key=lambda a: a.tolist())
    return out


def homomorphic_sections(datum, budget=1_000_000):
    """All homomorphic sections of the projection, sorted; [] when the
    extension does not split."""
    ident = GroupHom.identity(datum.base)
    return covering_homs(datum.proj, ident, budget=budget)


def torsor_action(lift, z, datum):
    """Twist a lift by a 1-cocycle: g |-> lift(g) embed(z(g)).

    ``lift`` covers some psi through datum.proj; z is a cocycle for the
    module pulled back along that psi.  The twisted map covers the same
    psi and is again a homomorphism.
    """
    E, M = datum.total, datum.module
    if lift.dst is not E and lift.dst.fingerprint() != E.fingerprint():
        raise ValidationError("lift does not land in the extension total")
    if z.degree != 1:
        raise ValidationError("need a 1-cochain")
    if z.module.group.fingerprint() != lift.src.fingerprint():
        raise ValidationError("cocycle group must be the lift source")
    if tuple(z.module.orders) != tuple(M.orders):
        raise ValidationError("cocycle values live in the wrong module")
    psi_img = datum.proj.image[lift.image]
    if not np.array_equal(z.module.act, M.act[psi_img]):
        raise ValidationError(
            "cocycle action is not the pullback along the covered hom")
    if not z.is_cocycle():
        raise NotACocycle("torsor action needs a 1-cocycle")
    G = lift.src
    ordarr = np.array(M.orders, dtype=_I64)
    st = _strides(ordarr) if M.rank else np.empty(0, dtype=_I64)
    full = np.zeros((G.n, M.rank), dtype=_I64)
    if G.n > 1:
        full[1:] = z.values
    ia = full @ st if M.rank else np.zeros(G.n, dtype=_I64)
    img = E.mul[lift.image, datum.embed[ia]]
    return GroupHom(G, E, img, validate=True)


def section_derivation(datum, sigma):
    """1-cochain d with sigma(g) = sect(g) embed(d(g))."""
    E, M = datum.total, datum.module
    diff = E.mul[E.inv[datum.sect], np.asarray(sigma, dtype=_I64)]
    ia = datum.inv_embed[diff]
    if (ia < 0).any():
        raise ValidationError("sigma is not a section of the projection")
    vals = M.all_elements()[ia]
    return Cochain(M, 1, vals[1:])


def act_on_section(datum, sigma, z):
    """Torsor action sigma . z (g) = sigma(g) embed(z(g))."""
    E, M = datum.total, datum.module
    if z.degree != 1 or z.module.fingerprint() != M.fingerprint():
        raise ValidationError("need a 1-cochain over the same module")
    ordarr = np.array(M.orders, dtype=_I64)
    st = _strides(ordarr) if M.rank else np.empty(0, dtype=_I64)
    full = np.zeros((datum.base.n, M.rank), dtype=_I64)
    if datum.base.n > 1:
        full[1:] = z.values
    ia = full @ st if M.rank else np.zeros(datum.base.n, dtype=_I64)
    return E.mul[np.asarray(sigma, dtype=_I64), datum.embed[ia]]


def conjugate_section(datum, sigma, avec):
    """Conjugate a section by a kernel element."""
    M = datum.module
    E = datum.total
    i = int(datum.embed[M.index_of(np.asarray(avec, dtype=_I64))])
    return E.mul[E.inv[i], E.mul[np.asarray(sigma, dtype=_I64), i]]
