import numpy as np
import pytest

from obstower.linalg import (KernelImage, hom_solve, int_kernel_basis,
                             int_solve, kernel_image, p_parts,
                             row_hermite_int, snf_int, span_order)


def test_p_parts_splits_orders():
    parts = p_parts([12, 2])
    # 12 = 4 * 3, plus the extra 2: one block per prime
    assert [p for p, _, _ in parts] == [2, 3]
    p2 = parts[0]
    assert list(p2[1]) == [0, 1] and list(p2[2]) == [2, 1]
    p3 = parts[1]
    assert list(p3[1]) == [0] and list(p3[2]) == [1]


def test_row_hermite_unimodular_certificate():
    rng = np.random.default_rng(11)
    for _ in range(25):
        M = rng.integers(-6, 7, size=(rng.integers(1, 5),
                                      rng.integers(1, 5)))
        H, U = row_hermite_int(M)
        assert (np.array(U) @ np.array(M) == np.array(H)).all()
        det = round(np.linalg.det(np.array(U, dtype=float)))
        assert det in (1, -1)


def test_int_kernel_basis_annihilates():
    M = [[2, 0, 4], [0, 3, 6], [2, 3, 10]]
    for row in int_kernel_basis(M):
        assert not any(np.array(row) @ np.array(M))
    # the rows above are dependent: kernel is rank 1
    assert len(int_kernel_basis(M)) == 1


def test_int_solve_roundtrip_and_failure():
    M = [[2, 1], [0, 3]]
    x = int_solve(M, [2, 4])
    assert x is not None and list(np.array(x) @ np.array(M)) == [2, 4]
    assert int_solve([[2]], [1]) is None


def test_snf_int_divisibility_and_classics():
    diag, V, Vinv = snf_int([[2, 0], [0, 3]])
    assert diag == [1, 6]
    diag, _, _ = snf_int([[4, 0], [0, 6]])
    assert diag == [2, 12]
    rng = np.random.default_rng(5)
    for _ in range(20):
        M = rng.integers(-5, 6, size=(rng.integers(1, 5),
                                      rng.integers(1, 5)))
        diag, V, Vinv = snf_int(M)
        for a, b in zip(diag, diag[1:]):
            assert a > 0 and b % a == 0
        VV = np.array(V) @ np.array(Vinv)
        assert (VV == np.eye(len(VV), dtype=int)).all()


def test_snf_rank_matches_float_rank():
    rng = np.random.default_rng(17)
    for _ in range(20):
        M = rng.integers(-4, 5, size=(4, 3))
        diag, _, _ = snf_int(M)
        assert len(diag) == np.linalg.matrix_rank(np.array(M, float))


def test_kernel_image_counts():
    # x -> 2x on Z/4: kernel {0,2}, image {0,2}
    ki = kernel_image([[2]], [4], [4])
    assert isinstance(ki, KernelImage)
    assert ki.kernel_order == 2 and ki.image_order == 2
    # projection Z/2 x Z/4 -> Z/4
    ki = kernel_image([[0], [1]], [2, 4], [4])
    assert ki.kernel_order == 2 and ki.image_order == 4
    # kernel generators really are in the kernel
    M = np.array([[0], [1]])
    for row in ki.kernel:
        assert (np.array(row) @ M % 4 == 0).all()


def test_kernel_image_order_product():
    # |ker| * |im| = |dom| for any hom
    rng = np.random.default_rng(3)
    for _ in range(30):
        dom = [int(rng.choice([2, 3, 4, 6]))
               for _ in range(rng.integers(1, 3))]
        cod = [int(rng.choice([2, 3, 4, 6]))
               for _ in range(rng.integers(1, 3))]
        M = rng.integers(0, 12, size=(len(dom), len(cod)))
        # force well-definedness: scale row i so dom[i] * row = 0
        for i, d in enumerate(dom):
            for j, c in enumerate(cod):
                g = c // np.gcd(d, c)
                M[i, j] = (M[i, j] // g) * g if g else M[i, j]
        ki = kernel_image(M, dom, cod)
        total = 1
        for d in dom:
            total *= d
        assert ki.kernel_order * ki.image_order == total


def test_hom_solve_agrees_with_membership():
    dom, cod = [4, 2], [8]
    M = np.array([[2], [4]])
    hits = set()
    for a in range(4):
        for b in range(2):
            hits.add(int((2 * a + 4 * b) % 8))
    for y in range(8):
        x = hom_solve(M, dom, cod, [y])
        if y in hits:
            assert x is not None
            assert (np.array(x) @ M % 8 == [y]).all()
        else:
            assert x is None


def test_span_order():
    assert span_order([[2]], [8]) == 4
    assert span_order([[1, 0], [0, 1]], [2, 3]) == 6
    assert span_order([], [5]) == 1


def test_kernel_image_rejects_ill_defined_rows():
    with pytest.raises(ValueError):
        kernel_image([[1]], [2], [4])   # 2 * 1 != 0 mod 4
