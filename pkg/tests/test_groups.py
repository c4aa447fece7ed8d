import numpy as np
import pytest

from obstower.catalog import (abelian, cyclic, dihedral, klein_four,
                              quaternion8, symmetric)
from obstower.errors import NotNormal, ValidationError
from obstower.groups import (FiniteGroup, GroupHom, Subgroup,
                             commutator_subgroup, enumerate_homs,
                             find_isomorphism, hom_from_gen_images,
                             homs_mod_conjugacy, is_isomorphic,
                             lower_central_series,
                             min_generating_sequence, normal_closure,
                             quotient_group)


def test_identity_is_index_zero_everywhere():
    for G in (cyclic(5), dihedral(4), symmetric(4), quaternion8()):
        assert (G.mul[0] == np.arange(G.n)).all()
        assert (G.mul[:, 0] == np.arange(G.n)).all()
        assert G.inv[0] == 0


def test_associativity_validation_catches_garbage():
    bad = np.array([[0, 1], [1, 1]])
    with pytest.raises(ValidationError):
        FiniteGroup(bad)


def test_canonical_relabelling_joins_presentations():
    # shuffle the element names but keep the same generator images:
    # BFS relabelling must reproduce the identical canonical table
    rng = np.random.default_rng(2)
    G = dihedral(3)
    perm = np.concatenate([[0], 1 + rng.permutation(G.n - 1)])
    inv_perm = np.empty(G.n, dtype=np.int64)
    inv_perm[perm] = np.arange(G.n)
    shuffled = inv_perm[G.mul[perm[:, None], perm[None, :]]]
    H = FiniteGroup(shuffled,
                    generators=[inv_perm[g] for g in G.generators])
    assert (H.mul == G.mul).all()
    assert H.generators == G.generators
    assert H.fingerprint() == G.fingerprint()
    # without the generator hint the labelling may differ, but the
    # group does not
    assert is_isomorphic(FiniteGroup(shuffled), G)


def test_element_orders_quaternion():
    Q8 = quaternion8()
    orders = sorted(Q8.element_order(i) for i in range(8))
    assert orders == [1, 2, 4, 4, 4, 4, 4, 4]
    assert not Q8.is_abelian()
    assert sorted(Q8.center().members) == [0, Q8.inv[1]] or \
        len(Q8.center()) == 2


def test_conj_convention():
    S3 = symmetric(3)
    for x in range(6):
        for g in range(6):
            lhs = S3.conj(x, g)
            rhs = S3.mul[S3.mul[S3.inv[g], x], g]
            assert lhs == rhs


def test_subgroup_closure_and_normality():
    S3 = symmetric(3)
    a3 = next(i for i in range(6) if S3.element_order(i) == 3)
    A3 = S3.subgroup(sorted(S3.closure([a3])))
    assert len(A3) == 3 and A3.is_normal() and A3.is_abelian()
    t = next(i for i in range(6) if S3.element_order(i) == 2)
    T = S3.subgroup(sorted(S3.closure([t])))
    assert len(T) == 2 and not T.is_normal()


def test_subgroup_as_group_embeds():
    Q8 = quaternion8()
    Z = Q8.center()
    S, embed = Z.as_group()
    assert S.n == 2
    for a in range(S.n):
        for b in range(S.n):
            assert embed(S.mul[a, b]) == Q8.mul[embed(a), embed(b)]


def test_quotient_group_sizes_and_projection():
    Q8 = quaternion8()
    Q, proj = quotient_group(Q8, Q8.center())
    assert Q.n == 4 and Q.is_abelian()
    assert proj.src is Q8 and proj.dst is Q
    # V4, not Z/4: every image has order <= 2
    assert all(Q.element_order(i) <= 2 for i in range(4))
    with pytest.raises(NotNormal):
        S3 = symmetric(3)
        t = next(i for i in range(6) if S3.element_order(i) == 2)
        quotient_group(S3, S3.subgroup(sorted(S3.closure([t]))))


def test_normal_closure_and_commutators():
    S3 = symmetric(3)
    t = next(i for i in range(6) if S3.element_order(i) == 2)
    N = normal_closure(S3, [t])
    assert len(N) == 6          # transpositions generate S3
    D = commutator_subgroup(S3, S3.full_subgroup(), S3.full_subgroup())
    assert len(D) == 3


def test_lower_central_series_quaternion():
    Q8 = quaternion8()
    series = lower_central_series(Q8, Q8.full_subgroup(), 3)
    assert [len(s) for s in series] == [8, 2, 1]


def test_hom_constructor_is_a_proof():
    Z4, Z2 = cyclic(4), cyclic(2)
    GroupHom(Z4, Z2, np.array([0, 1, 0, 1]))       # fine
    with pytest.raises(ValidationError):
        GroupHom(Z4, Z2, np.array([0, 1, 1, 0]))   # not multiplicative


def test_hom_kernel_then_identity():
    Z4, Z2 = cyclic(4), cyclic(2)
    f = GroupHom(Z4, Z2, np.array([0, 1, 0, 1]))
    assert sorted(f.kernel().members) == [0, 2]
    assert f.is_surjective() and not f.is_injective()
    g = f.then(GroupHom.identity(Z2))
    assert g == f


def test_hom_from_gen_images():
    Z4 = cyclic(4)
    V4 = klein_four()
    f = hom_from_gen_images(Z4, V4, [1])
    assert list(f.image) == [0, 1, 0, 1]
    with pytest.raises(ValidationError):
        hom_from_gen_images(Z4, V4, [1, 2])       # wrong arity
    S3 = symmetric(3)
    with pytest.raises(ValidationError):
        # no hom sends an order-3 generator to an order-2 image and
        # an order-2 one to an order-3 one
        hom_from_gen_images(S3, S3, [S3.generators[1],
                                     S3.generators[0]])


def test_enumerate_homs_counts():
    Z2, Z3, Z4 = cyclic(2), cyclic(3), cyclic(4)
    S3, V4 = symmetric(3), klein_four()
    assert len(enumerate_homs(Z4, Z2)) == 2
    assert len(enumerate_homs(Z2, Z4)) == 2
    assert len(enumerate_homs(S3, Z2)) == 2
    assert len(enumerate_homs(V4, Z2)) == 4
    assert len(enumerate_homs(Z3, S3)) == 3
    assert len(enumerate_homs(Z3, Z4)) == 1


def test_homs_mod_conjugacy_orbit_count():
    Z3, S3 = cyclic(3), symmetric(3)
    orbits = homs_mod_conjugacy(enumerate_homs(Z3, S3))
    assert len(orbits) == 2
    assert sorted(len(o) for o in orbits) == [1, 2]


def test_min_generating_sequence():
    assert len(min_generating_sequence(klein_four())) == 2
    assert len(min_generating_sequence(cyclic(12))) == 1
    assert len(min_generating_sequence(quaternion8())) == 2


def test_find_isomorphism_yes_and_no():
    assert is_isomorphic(dihedral(2), klein_four())
    assert is_isomorphic(abelian([2, 2]), klein_four())
    assert not is_isomorphic(quaternion8(), dihedral(4))
    f = find_isomorphism(abelian([2, 3]), cyclic(6))
    assert f is not None and f.is_isomorphism()


def test_abelian_catalog_is_canonical():
    A = abelian([4, 2])
    B = abelian([2, 4])
    assert is_isomorphic(A, B)
    assert A.n == 8 and A.is_abelian()
    assert not is_isomorphic(A, abelian([2, 2, 2]))


def test_group_order_limit():
    with pytest.raises(ValidationError):
        cyclic(513)


try:
    from hypothesis import given, settings
    from hypothesis import strategies as st

    @given(st.sampled_from([2, 3, 4, 5, 6, 8, 12]),
           st.integers(0, 10 ** 6))
    @settings(max_examples=25, deadline=None)
    def test_cyclic_inverse_property(n, salt):
        G = cyclic(n)
        x = salt % n
        assert G.mul[x, G.inv[x]] == 0
        assert G.element_order(x) == n // np.gcd(x, n)
except ImportError:      # pragma: no cover - hypothesis is optional
    pass
