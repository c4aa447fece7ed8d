import numpy as np
import pytest

from obstower.catalog import cyclic, klein_four, quaternion8, symmetric
from obstower.errors import NotAbelianKernel, ValidationError
from obstower.groups import GroupHom, quotient_group
from obstower.modules import (GModule, abelian_decomposition,
                              conjugation_module, module_from_gen_action,
                              pullback_module, trivial_module)


def test_trivial_module_basics():
    G = cyclic(3)
    M = trivial_module(G, [2, 4])
    assert M.rank == 2 and M.size == 8
    assert M.is_trivial_action()
    v = M.reduce(np.array([3, 7]))
    assert list(v) == [1, 3]
    assert list(M.apply(v, 2)) == [1, 3]
    assert list(M.neg(v)) == [1, 1]


def test_element_indexing_roundtrip():
    M = trivial_module(cyclic(2), [2, 3])
    seen = set()
    for i in range(M.size):
        v = M.element_at(i)
        assert M.index_of(v) == i
        seen.add(tuple(v))
    assert len(seen) == 6


def test_module_from_gen_action_sign_action():
    # Z/2 acting on Z/3 by negation
    Z2 = cyclic(2)
    M = module_from_gen_action(Z2, [3], [[[2]]])
    v = np.array([1])
    assert list(M.apply(v, 1)) == [2]
    assert list(M.apply(M.apply(v, 1), 1)) == [1]
    assert not M.is_trivial_action()


def test_module_action_is_a_right_action():
    # through every group element, not just generators
    S3 = symmetric(3)
    # permutation action of S3 on Z/2^2 won't be closed for rank 2;
    # use the sign action on Z/4 instead
    sign = [[[3]] if S3.element_order(g) == 2 else [[1]]
            for g in S3.generators]
    M = module_from_gen_action(S3, [4], sign)
    for g in range(6):
        for h in range(6):
            v = np.array([1])
            lhs = M.apply(M.apply(v, g), h)
            rhs = M.apply(v, S3.mul[g, h])
            assert (lhs == rhs).all()


def test_gen_action_must_respect_orders():
    Z2 = cyclic(2)
    with pytest.raises(ValidationError):
        # matrix of infinite order mod 4: g^2 acts by 2 != identity
        module_from_gen_action(Z2, [4], [[[2]]])


def test_pullback_module():
    Z2, Z4 = cyclic(2), cyclic(4)
    f = GroupHom(Z4, Z2, np.array([0, 1, 0, 1]))
    M = module_from_gen_action(Z2, [3], [[[2]]])
    P = pullback_module(M, f)
    assert P.group is Z4
    v = np.array([1])
    assert list(P.apply(v, 1)) == [2]
    assert list(P.apply(v, 2)) == [1]


def test_abelian_decomposition_invariant_factors():
    for G, want in ((cyclic(12), (12,)),
                    (klein_four(), (2, 2)),
                    (quaternion8().center().as_group()[0], (2,))):
        orders, to_coords, from_index = abelian_decomposition(G)
        assert tuple(orders) == want
    with pytest.raises(NotAbelianKernel):
        abelian_decomposition(symmetric(3))


def test_abelian_decomposition_coordinates_multiply():
    from obstower.catalog import abelian
    G = abelian([2, 4])
    orders, to_coords, from_index = abelian_decomposition(G)
    assert tuple(orders) == (2, 4)
    mod = np.array(orders)
    for a in range(G.n):
        for b in range(G.n):
            lhs = to_coords[G.mul[a, b]]
            rhs = (to_coords[a] + to_coords[b]) % mod
            assert (lhs == rhs).all()


def test_conjugation_module_quaternion_center_step():
    # Pi = Q8, H = [Q8,Q8] = center, K = 1: conjugation on H descends
    # to the quotient Q8/H = V4 acting trivially (H is central)
    Q8 = quaternion8()
    H = Q8.center()
    K = Q8.trivial_subgroup()
    V4, proj = quotient_group(Q8, H)
    M, project = conjugation_module(Q8, H, K, proj)
    assert M.group.fingerprint() == V4.fingerprint()
    assert tuple(M.orders) == (2,)
    assert M.is_trivial_action()
    # project sends the nontrivial central element to the nonzero row
    nz = [h for h in H.members if h != 0]
    assert list(project(nz[0])) == [1]


def test_conjugation_module_rejects_nonabelian_layer():
    S3 = symmetric(3)
    triv = S3.trivial_subgroup()
    Q, proj = quotient_group(S3, S3.full_subgroup())
    with pytest.raises(NotAbelianKernel):
        conjugation_module(S3, S3.full_subgroup(), triv, proj)


def test_gmodule_fingerprint_distinguishes_action():
    Z2 = cyclic(2)
    M1 = trivial_module(Z2, [3])
    M2 = module_from_gen_action(Z2, [3], [[[2]]])
    assert M1.fingerprint() != M2.fingerprint()
    assert M1.fingerprint() == trivial_module(Z2, [3]).fingerprint()


def test_rank_zero_module():
    G = cyclic(2)
    M = trivial_module(G, [])
    assert M.rank == 0 and M.size == 1
    assert list(M.zero()) == []
