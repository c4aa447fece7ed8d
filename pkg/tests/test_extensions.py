"""Extensions, equivalence, sections, and the cocycle torsor.

Frozen facts used below:
  * central extensions of V4 by Z/2: |H^2(V4,F2)| = 8, realizing
    1 x (Z/2)^3, 3 x (Z/2 x Z/4), 3 x D4, 1 x Q8;
  * S3 -> Z/2 (kernel Z/3, sign action) has exactly 3 homomorphic
    sections, the transpositions, all conjugate under the kernel;
  * the split extension V4 x Z/2 -> V4 has 4 = |Hom(V4,Z/2)| sections;
  * Z/4 -> Z/2 does not split.
"""

import itertools
from collections import Counter

import numpy as np
import pytest

from obstower.catalog import (abelian, cyclic, dihedral, klein_four,
                              quaternion8, symmetric)
from obstower.cohomology import Cochain, cohomology
from obstower.errors import ValidationError
from obstower.extensions import (act_on_section, are_equivalent,
                                 conjugate_section, covering_homs,
                                 equivalence_map, extension_class,
                                 extension_datum, extension_from_cocycle,
                                 homomorphic_sections, section_derivation,
                                 semidirect_product, split_extension,
                                 torsor_action)
from obstower.groups import GroupHom, is_isomorphic
from obstower.modules import (module_from_gen_action, pullback_module,
                              trivial_module)


def all_cocycles(M, deg=1):
    """Brute list of degree-``deg`` cocycles (tiny modules only)."""
    shape = ((M.group.n - 1) ** deg, M.rank)
    cells = shape[0] * shape[1]
    ranges = [range(int(M.orders[j % M.rank])) for j in range(cells)]
    out = []
    for flat in itertools.product(*ranges):
        c = Cochain(M, deg, np.array(flat, dtype=np.int64).reshape(shape))
        if c.is_cocycle():
            out.append(c)
    return out


def test_census_of_v4_by_z2():
    V4 = klein_four()
    M = trivial_module(V4, [2])
    H2 = cohomology(V4, M, 2)
    assert H2.invariants == (2, 2, 2)
    models = [("Q8", quaternion8()), ("D4", dihedral(4)),
              ("Z2xZ4", abelian([2, 4])), ("Z2^3", abelian([2, 2, 2]))]
    tally = Counter()
    for coords in H2.all_classes():
        E = extension_from_cocycle(V4, M, H2.rep(coords))
        assert E.total.n == 8
        hits = [nm for nm, T in models if is_isomorphic(E.total, T)]
        assert len(hits) == 1, coords
        tally[hits[0]] += 1
        # the class coordinates round-trip through the factor set
        assert E.class_coords(H2)[1] == coords
    assert tally == Counter({"D4": 3, "Z2xZ4": 3, "Q8": 1, "Z2^3": 1})


def test_extension_count_equals_h2_for_all_small_pairs():
    # every abelian A of order <= 4 under every Pi' of order <= 4,
    # trivial action: classes built from reps stay distinct
    bases = [cyclic(2), cyclic(3), cyclic(4), klein_four()]
    fibers = [[2], [3], [4], [2, 2]]
    for G in bases:
        for orders in fibers:
            M = trivial_module(G, orders)
            H2 = cohomology(G, M, 2)
            seen = set()
            for coords in H2.all_classes():
                d = extension_from_cocycle(G, M, H2.rep(coords))
                seen.add(extension_class(d, H2).coords)
            assert len(seen) == H2.order


def test_split_extension_has_zero_class():
    G = klein_four()
    M = trivial_module(G, [4])
    d = split_extension(G, M)
    H2 = cohomology(G, M, 2)
    assert extension_class(d, H2).is_zero()
    assert is_isomorphic(d.total, abelian([2, 2, 4]))
    d2 = semidirect_product(G, M)
    assert are_equivalent(d, d2, H2)


def test_equivalence_map_same_class():
    Z4 = cyclic(4)
    M = trivial_module(Z4, [2])
    H2 = cohomology(Z4, M, 2)
    c = H2.rep((1,))
    # shift by a visibly nonzero coboundary
    b = Cochain(M, 1, np.array([[1], [0], [1]], dtype=np.int64))
    d1 = extension_from_cocycle(Z4, M, c)
    d2 = extension_from_cocycle(Z4, M, c + b.d())
    assert are_equivalent(d1, d2)
    theta = equivalence_map(d1, d2)
    assert theta is not None
    assert theta.is_isomorphism()
    # identity on the kernel, commutes with the projections
    assert (theta.image[d1.embed] == d2.embed).all()
    assert (d2.proj.image[theta.image] == d1.proj.image).all()


def test_equivalence_map_distinct_classes():
    Z4 = cyclic(4)
    M = trivial_module(Z4, [2])
    H2 = cohomology(Z4, M, 2)
    d0 = extension_from_cocycle(Z4, M, H2.rep((0,)))
    d1 = extension_from_cocycle(Z4, M, H2.rep((1,)))
    assert not are_equivalent(d0, d1, H2)
    assert equivalence_map(d0, d1) is None
    # inequivalent here even means non-isomorphic totals
    assert not is_isomorphic(d0.total, d1.total)


def test_equivalence_rejects_mismatched_bases():
    M2 = trivial_module(cyclic(2), [2])
    M3 = trivial_module(cyclic(3), [2])
    d1 = split_extension(cyclic(2), M2)
    d2 = split_extension(cyclic(3), M3)
    with pytest.raises(ValidationError):
        are_equivalent(d1, d2)


def test_nonsplit_extension_has_no_sections():
    Z2 = cyclic(2)
    M = trivial_module(Z2, [2])
    H2 = cohomology(Z2, M, 2)
    d = extension_from_cocycle(Z2, M, H2.rep((1,)))
    assert is_isomorphic(d.total, cyclic(4))
    assert homomorphic_sections(d) == []


def test_section_count_is_z1_split_v4():
    V4 = klein_four()
    M = trivial_module(V4, [2])
    d = split_extension(V4, M)
    secs = homomorphic_sections(d)
    z1 = all_cocycles(M, 1)
    assert len(secs) == len(z1) == 4
    H0 = cohomology(V4, M, 0)
    H1 = cohomology(V4, M, 1)
    assert len(z1) == H1.order * M.size // H0.order


def test_s3_sign_extension_sections():
    S3 = symmetric(3)
    Z2 = cyclic(2)
    # sign: S3 -> Z/2 by parity of the permutation order trick: find
    # the surjection among all homs
    sgn = None
    from obstower.groups import enumerate_homs
    for h in enumerate_homs(S3, Z2):
        if h.is_surjective():
            sgn = h
    assert sgn is not None
    ker = sgn.kernel()
    A, _ = ker.as_group()
    assert A.n == 3
    # conjugation action of Z/2 on the kernel Z/3 is inversion
    act = module_from_gen_action(Z2, [3], [np.array([[2]])])
    # build the datum directly over the surjection
    members = sorted(int(x) for x in ker.members)
    embed = np.array(members, dtype=np.int64)
    d = extension_datum(sgn, act, embed)
    secs = homomorphic_sections(d)
    assert len(secs) == 3
    # each section hits the identity and a transposition
    for s in secs:
        assert int(s[0]) == 0
        assert S3.element_order(int(s[1])) == 2
    # the three sections form one orbit under kernel conjugation
    base = secs[0]
    conj = set()
    for a in range(3):
        conj.add(tuple(int(v) for v in
                       conjugate_section(d, base, np.array([a]))))
    assert conj == {tuple(int(v) for v in s) for s in secs}


def test_torsor_action_free_transitive():
    V4 = klein_four()
    M = trivial_module(V4, [2])
    d = split_extension(V4, M)
    secs = homomorphic_sections(d)
    z1 = all_cocycles(M, 1)
    base = secs[0]
    orbit = set()
    for z in z1:
        moved = act_on_section(d, base, z)
        orbit.add(tuple(int(v) for v in moved))
    # free and transitive: |orbit| = |Z^1| and it covers every section
    assert len(orbit) == len(z1)
    assert orbit == {tuple(int(v) for v in s) for s in secs}
    # composition law sigma.(z1+z2) == (sigma.z1).z2
    za, zb = z1[1], z1[2]
    lhs = act_on_section(d, base, za + zb)
    rhs = act_on_section(d, act_on_section(d, base, za), zb)
    assert (lhs == rhs).all()


def test_section_derivation_roundtrip():
    V4 = klein_four()
    M = trivial_module(V4, [2])
    d = split_extension(V4, M)
    for s in homomorphic_sections(d):
        z = section_derivation(d, s)
        assert z.is_cocycle()
        again = act_on_section(d, d.sect, z)
        assert (again == s).all()


def test_torsor_action_on_homs():
    # twist a lift as a GroupHom and land on another lift of the same psi
    V4 = klein_four()
    M = trivial_module(V4, [2])
    d = split_extension(V4, M)
    secs = homomorphic_sections(d)
    lift = GroupHom(V4, d.total, secs[0])
    psi = lift.then(d.proj)
    pulled = pullback_module(M, psi)
    z = all_cocycles(pulled, 1)[1]
    moved = torsor_action(lift, z, d)
    assert moved.then(d.proj).image.tolist() == psi.image.tolist()
    assert tuple(int(v) for v in moved.image) in {
        tuple(int(v) for v in s) for s in secs}


def test_covering_homs_through_quotient():
    # psi: Z/2 -> Z/2 identity through Z/4 -> Z/2 cannot lift
    Z4, Z2 = cyclic(4), cyclic(2)
    proj = GroupHom(Z4, Z2, np.array([0, 1, 0, 1]))
    assert covering_homs(proj, GroupHom.identity(Z2)) == []
    # but it lifts twice through the split V4 -> Z/2
    V4 = klein_four()
    proj2 = GroupHom(V4, Z2, np.array([0, 1, 0, 1]))
    lifts = covering_homs(proj2, GroupHom.identity(Z2))
    assert len(lifts) == 2
    for phi in lifts:
        assert (proj2.image[phi] == np.array([0, 1])).all()


def test_datum_wraps_existing_projection():
    # Q8 -> Q8/Z = V4 with the central Z/2 as kernel
    Q8 = quaternion8()
    from obstower.groups import quotient_group
    Z = Q8.center()
    Q, proj = quotient_group(Q8, Z)
    members = sorted(int(x) for x in Z.members)
    M = trivial_module(Q, [2])
    d = extension_datum(proj, M, np.array(members, dtype=np.int64))
    H2 = cohomology(Q, M, 2)
    cls = extension_class(d, H2)
    assert not cls.is_zero()
    # a second datum with a different section gives the same class
    sect = d.sect.copy()
    # replace the representative over a nonidentity element by the
    # other fiber point
    g = 1
    fiber = np.flatnonzero(proj.image == g)
    alt = [x for x in fiber if x != int(sect[g])][0]
    sect2 = sect.copy()
    sect2[g] = alt
    d2 = extension_datum(proj, M, np.array(members, dtype=np.int64),
                         sect=sect2)
    assert extension_class(d2, H2) == cls
