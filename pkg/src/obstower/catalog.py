"""Named groups used throughout the tests and the command line."""

import itertools

import numpy as np

from .errors import ValidationError
from .groups import FiniteGroup

_I32 = np.int32


def cyclic(n, name=None):
    if n < 1:
        raise ValidationError("cyclic group needs n >= 1")
    a = np.arange(n, dtype=_I32)
    tab = (a[:, None] + a[None, :]) % n
    return FiniteGroup(tab, generators=[1] if n > 1 else None,
                       validate=False, name=name or f"Z/{n}")


def abelian(orders, name=None):
    """Direct product of cyclic groups of the given orders."""
    orders = [int(d) for d in orders if int(d) > 1]
    if not orders:
        return cyclic(1, name=name or "1")
    n = int(np.prod(orders))
    radix = np.array(orders, dtype=_I32)
    idx = np.arange(n)
    digits = []
    rem = idx.copy()
    for d in radix[::-1]:
        digits.append(rem % d)
        rem //= d
    digits = np.stack(digits[::-1])            # (k, n), row-major tuples
    summed = (digits[:, :, None] + digits[:, None, :]) % radix[:, None, None]
    tab = np.zeros((n, n), dtype=_I32)
    for d, row in zip(radix, summed):
        tab = tab * d + row
    gens = []
    place = 1
    for d in orders[::-1]:
        gens.append(place)
        place *= d
    gens.reverse()
    label = name or ("Z/" + " x Z/".join(str(d) for d in orders))
    return FiniteGroup(tab, generators=gens, validate=False, name=label)


def klein_four():
    return abelian([2, 2], name="V4")


def dihedral(n, name=None):
    """Dihedral group of order 2n (symmetries of the n-gon)."""
    if n < 1:
        raise ValidationError("dihedral group needs n >= 1")
    m = 2 * n

    def mul(x, y):
        i, e = x % n, x // n
        j, f = y % n, y // n
        # (r^i s^e)(r^j s^f) = r^(i + j or i - j) s^(e+f)
        i2 = (i + j) % n if e == 0 else (i - j) % n
        return i2 + n * ((e + f) % 2)

    tab = np.array([[mul(x, y) for y in range(m)] for x in range(m)],
                   dtype=_I32)
    return FiniteGroup(tab, generators=[1, n], validate=False,
                       name=name or f"D{n}")


def symmetric(n, name=None):
    """Symmetric group on n letters, n <= 5 (order table stays small)."""
    if not 1 <= n <= 5:
        raise ValidationError("symmetric(n) supports 1 <= n <= 5")
    perms = sorted(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}

    def compose(p, q):
        # apply p first, then q
        return tuple(q[p[i]] for i in range(n))

    tab = np.array([[index[compose(p, q)] for q in perms] for p in perms],
                   dtype=_I32)
    gens = []
    if n >= 2:
        t = tuple([1, 0] + list(range(2, n)))
        gens.append(index[t])
    if n >= 3:
        c = tuple(list(range(1, n)) + [0])
        gens.append(index[c])
    return FiniteGroup(tab, generators=gens or None, validate=False,
                       name=name or f"S{n}")


def quaternion8(name=None):
    """The quaternion group {+-1, +-i, +-j, +-k}."""
    # elements 0..7 = 1, -1, i, -i, j, -j, k, -k
    names = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
    sign = [1, -1, 1, -1, 1, -1, 1, -1]
    axis = [0, 0, 1, 1, 2, 2, 3, 3]          # 0 = scalar, 1=i, 2=j, 3=k

    def mul(x, y):
        sx, ax = sign[x], axis[x]
        sy, ay = sign[y], axis[y]
        if ax == 0:
            s, a = sx * sy, ay
        elif ay == 0:
            s, a = sx * sy, ax
        elif ax == ay:
            s, a = -sx * sy, 0
        else:
            others = {1, 2, 3} - {ax, ay}
            a = others.pop()
            cyclic_order = (ay - ax) % 3 == 1   # i->j->k->i
            s = sx * sy * (1 if cyclic_order else -1)
        return (a * 2) + (0 if s > 0 else 1) if a else (0 if s > 0 else 1)

    tab = np.array([[mul(x, y) for y in range(8)] for x in range(8)],
                   dtype=_I32)
    del names
    return FiniteGroup(tab, generators=[2, 4], validate=True,
                       name=name or "Q8")


NAMED = {
    "cyclic": cyclic,
    "abelian": abelian,
    "dihedral": dihedral,
    "symmetric": symmetric,
    "quaternion8": quaternion8,
    "klein_four": klein_four,
}


def by_name(kind, *args):
    if kind not in NAMED:
        raise ValidationError(f"unknown group kind {kind!r}")
    return NAMED[kind](*args)
