"""Classical cohomology values, frozen.

Oracle notes: H^n(Z/m, Z/m) with trivial action is Z/m in every
degree; H^n(Z/4, Z/2) is Z/2 in every degree; H^*(V4, F2) is the
polynomial algebra F2[x,y] so dim H^n = n+1; the mod-2 cohomology of
Q8 has Poincare series (1+2t+2t^2+t^3)/(1-t^4)-type periodicity with
orders 2,4,4,2 in degrees 0..3; a sign action of Z/2 on Z/3 kills
everything (order coprime).
"""

import numpy as np
import pytest

from obstower.catalog import abelian, cyclic, klein_four, quaternion8
from obstower.cohomology import (Cochain, bar_complex, clear_cache,
                                 cochain_from_function, cohomology,
                                 is_coboundary, pullback_class,
                                 solve_coboundary)
from obstower.errors import DegreeTooLarge
from obstower.groups import GroupHom
from obstower.modules import module_from_gen_action, trivial_module


def test_cyclic_group_trivial_coefficients():
    Z2 = cyclic(2)
    M = trivial_module(Z2, [2])
    for n in range(4):
        assert cohomology(Z2, M, n).invariants == (2,), n
    Z6 = cyclic(6)
    M6 = trivial_module(Z6, [6])
    assert cohomology(Z6, M6, 1).invariants == (6,)
    assert cohomology(Z6, M6, 2).invariants == (6,)


def test_z4_mod2_tower_of_degrees():
    Z4 = cyclic(4)
    M = trivial_module(Z4, [2])
    assert [cohomology(Z4, M, n).order for n in range(4)] == [2, 2, 2, 2]
    M4 = trivial_module(Z4, [4])
    assert cohomology(Z4, M4, 3).invariants == (4,)


def test_klein_four_polynomial_growth():
    V4 = klein_four()
    F2 = trivial_module(V4, [2])
    dims = []
    for n in range(4):
        H = cohomology(V4, F2, n)
        assert all(d == 2 for d in H.invariants)
        dims.append(len(H.invariants) if H.order > 1 else 0)
    assert dims == [1, 2, 3, 4]


def test_quaternion_periodicity():
    Q8 = quaternion8()
    F2 = trivial_module(Q8, [2])
    assert [cohomology(Q8, F2, n).order for n in range(4)] == [2, 4, 4, 2]


def test_coprime_twisted_action_vanishes():
    Z2 = cyclic(2)
    M = module_from_gen_action(Z2, [3], [[[2]]])
    for n in range(4):
        assert cohomology(Z2, M, n).order == 1, n


def test_mixed_module_over_klein_four():
    V4 = klein_four()
    M = trivial_module(V4, [2, 4])
    assert cohomology(V4, M, 1).invariants == (2, 2, 2, 2)
    assert cohomology(V4, M, 2).invariants == (2,) * 6


def test_degree_limit():
    Z2 = cyclic(2)
    with pytest.raises(DegreeTooLarge):
        cohomology(Z2, trivial_module(Z2, [2]), 4)


def test_d_squared_is_zero():
    rng = np.random.default_rng(9)
    Z4 = cyclic(4)
    M = module_from_gen_action(Z4, [3], [[[2]]])
    for deg in (0, 1, 2):
        size = (Z4.n - 1) ** deg
        c = Cochain(M, deg, rng.integers(0, 3, size=(size, M.rank)))
        assert c.d().d().is_zero()


def test_cocycle_condition_on_h2_reps():
    V4 = klein_four()
    M = trivial_module(V4, [2])
    H2 = cohomology(V4, M, 2)
    for coords in H2.all_classes():
        c = H2.rep(coords)
        assert c.is_cocycle()
        assert H2.classify(c).coords == tuple(coords)


def test_coboundary_solving_roundtrip():
    rng = np.random.default_rng(31)
    Z4 = cyclic(4)
    M = trivial_module(Z4, [4])
    for _ in range(10):
        b = Cochain(M, 1, rng.integers(0, 4, size=(3, 1)))
        db = b.d()
        assert is_coboundary(M, db)
        b2 = solve_coboundary(M, db)
        assert (b2.d() - db).is_zero()
    # a nonzero class is not a coboundary
    H2 = cohomology(Z4, M, 2)
    gen = H2.rep((1,))
    assert not is_coboundary(M, gen)


def test_class_arithmetic():
    Z4 = cyclic(4)
    M = trivial_module(Z4, [4])
    H2 = cohomology(Z4, M, 2)
    a = H2.cls((1,))
    assert (a + a).coords == (2,)
    assert (-a).coords == (3,)
    z = a + (-a)
    assert z.is_zero()


def test_pullback_class_restriction():
    # restrict the generator of H^2(Z/4, Z/2) along Z/2 -> Z/4.
    # Extension picture: the generator is [0 -> Z/2 -> Z/8 -> Z/4 -> 0];
    # the preimage of {0,2} in Z/8 is {0,2,4,6} = Z/4, still nonsplit
    # over Z/2, so the restriction stays nonzero.
    Z2, Z4 = cyclic(2), cyclic(4)
    M = trivial_module(Z4, [2])
    H2 = cohomology(Z4, M, 2)
    incl = GroupHom(Z2, Z4, np.array([0, 2]))
    res = pullback_class(incl, H2.cls((1,)))
    assert not res.is_zero()
    # the degree-1 generator Z/4 ->> Z/2 DOES die: 2 |-> 0
    H1 = cohomology(Z4, M, 1)
    res1 = pullback_class(incl, H1.cls((1,)))
    assert res1.is_zero()
    # along the identity nothing changes
    same = pullback_class(GroupHom.identity(Z4), H2.cls((1,)))
    assert same.coords == (1,)


def test_bar_complex_shapes():
    Z2 = cyclic(2)
    M = trivial_module(Z2, [2])
    diffs = bar_complex(M, 3)
    # one nontrivial element: C^n has 1 generator for every degree
    assert len(diffs) == 4


def test_cache_identity_and_clear():
    Z2 = cyclic(2)
    M = trivial_module(Z2, [2])
    a = cohomology(Z2, M, 2)
    b = cohomology(Z2, M, 2)
    assert a is b
    clear_cache()
    c = cohomology(Z2, M, 2)
    assert c is not a and c.invariants == a.invariants


def test_cochain_from_function_matches_manual():
    Z2 = cyclic(2)
    M = trivial_module(Z2, [2])
    c = cochain_from_function(M, 2, lambda gs: [1] if gs == (1, 1)
                              else [0])
    assert c.value((1, 1)) == [1] or list(c.value((1, 1))) == [1]
    assert c.is_cocycle()       # the factor set of Z/4 over Z/2
    H2 = cohomology(Z2, M, 2)
    assert H2.classify(c).coords == (1,)
