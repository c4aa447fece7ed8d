"""Graded free-Lie bookkeeping: Hall bases, Witt ranks, weighted
CoLie pieces, and the level-1 modular-form weight calculus.

Everything here is generating-function arithmetic over integer weight
gradings -- the only remnant of Frobenius weights is the grading
itself, and the "H^0 of strictly positive weights vanishes" argument
becomes the checkable flag ``min weight > 0``.
"""

import itertools

from .errors import ValidationError
from .linalg import _factor

# ----------------------------------------------------------------------
# number-theoretic helpers (tiny, no sympy: import time matters for the
# CLI budget)


def _divisors(n):
    out = [1]
    for p, e in _factor(n).items():
        out = [d * p ** k for d in out for k in range(e + 1)]
    return sorted(out)


def _mobius(n):
    mu = 1
    for _p, e in _factor(n).items():
        if e > 1:
            return 0
        mu = -mu
    return mu


def witt_rank(d, n):
    """dim Lie_n(free Lie algebra on d generators):
    (1/n) sum_{e|n} mu(e) d^(n/e)."""
    d, n = int(d), int(n)
    if d < 0 or n < 1:
        raise ValidationError("need d >= 0 and n >= 1")
    tot = sum(_mobius(e) * d ** (n // e) for e in _divisors(n))
    if tot % n:
        raise ArithmeticError("Witt sum is not divisible by the degree")
    return tot // n


# ----------------------------------------------------------------------
# graded spaces

class GradedSpace:
    """Finitely supported weight -> dimension table, with optional
    per-weight labels."""

    __slots__ = ("entries", "labels")

    def __init__(self, entries=None, labels=None):
        ent = {}
        for w, dim in dict(entries or {}).items():
            w, dim = int(w), int(dim)
            if dim < 0:
                raise ValidationError("dimensions must be >= 0")
            if dim:
                ent[w] = ent.get(w, 0) + dim
        self.entries = ent
        self.labels = {int(w): str(s) for w, s in dict(labels or {}).items()
                       if int(w) in ent}

    def dim(self):
        return sum(self.entries.values())

    def is_zero(self):
        return not self.entries

    def min_weight(self):
        return min(self.entries) if self.entries else None

    def items(self):
        return sorted(self.entries.items())

    def shifted(self, by):
        return GradedSpace({w + by: d for w, d in self.entries.items()},
                           {w + by: s for w, s in self.labels.items()})

    def scaled(self, k):
        if k < 0:
            raise ValidationError("dimension multiplier must be >= 0")
        return GradedSpace({w: d * k for w, d in self.entries.items()},
                           self.labels)

    def __add__(self, other):
        ent = dict(self.entries)
        for w, d in other.entries.items():
            ent[w] = ent.get(w, 0) + d
        return GradedSpace(ent)

    def __eq__(self, other):
        if isinstance(other, GradedSpace):
            return self.entries == other.entries
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self.items()))

    def as_dict(self):
        out = {"entries": {str(w): d for w, d in self.items()},
               "dim": self.dim()}
        if self.labels:
            out["labels"] = {str(w): self.labels[w]
                             for w in sorted(self.labels)}
        return out

    def __repr__(self):
        body = ", ".join(f"{w}: {d}" for w, d in self.items()) or "0"
        return f"<graded space {{{body}}} dim {self.dim()}>"


def _as_poly(V):
    if isinstance(V, GradedSpace):
        return dict(V.entries)
    return {int(w): int(d) for w, d in dict(V).items() if int(d)}


# ----------------------------------------------------------------------
# Hall bases

class HallBasisElement:
    """One Hall tree: generators are leaves, composites are brackets
    [u, v] with u later than v in the Hall order and, when u = [a, b],
    b no later than v."""

    __slots__ = ("left", "right", "gen", "index", "degree", "weight")

    def __init__(self, gen=None, left=None, right=None, index=0,
                 weight=0):
        self.gen = gen
        self.left = left
        self.right = right
        self.index = index
        if gen is not None:
            self.degree = 1
            self.weight = weight
        else:
            self.degree = left.degree + right.degree
            self.weight = left.weight + right.weight

    def tree(self):
        """Nested tuples of generator indices."""
        if self.gen is not None:
            return self.gen
        return (self.left.tree(), self.right.tree())

    def leaves(self):
        if self.gen is not None:
            return [self.gen]
        return self.left.leaves() + self.right.leaves()

    def bracket_string(self):
        if self.gen is not None:
            return f"x{self.gen + 1}"
        return (f"[{self.left.bracket_string()}, "
                f"{self.right.bracket_string()}]")

    def __repr__(self):
        return f"<hall {self.bracket_string()} wt {self.weight}>"


def hall_basis(generator_weights, n):
    """The degree-n slice of a Hall set on weighted generators.

    The order is by creation (degree first, input order within degree
    1); only the counts are contractual -- they match witt_rank for any
    Hall convention -- but the elements themselves are exposed since
    staring at bracket trees is how one debugs weight bookkeeping.
    """
    weights = [int(w) for w in generator_weights]
    n = int(n)
    if n < 1:
        raise ValidationError("degree must be >= 1")
    counter = itertools.count()
    by_deg = {1: [HallBasisElement(gen=i, index=next(counter), weight=w)
                  for i, w in enumerate(weights)]}
    for deg in range(2, n + 1):
        made = []
        for du in range(1, deg):
            dv = deg - du
            for u in by_deg.get(du, ()):
                for v in by_deg.get(dv, ()):
                    if u.index <= v.index:
                        continue
                    if u.gen is None and u.right.index > v.index:
                        continue
                    made.append((u, v))
        made.sort(key=lambda p: (p[0].index, p[1].index))
        by_deg[deg] = [HallBasisElement(left=u, right=v,
                                        index=next(counter))
                       for u, v in made]
    return by_deg.get(n, [])


# ----------------------------------------------------------------------
# weighted CoLie pieces

def _poly_mul(a, b):
    out = {}
    for wa, ca in a.items():
        for wb, cb in b.items():
            w = wa + wb
            out[w] = out.get(w, 0) + ca * cb
    return {w: c for w, c in out.items() if c}


def _poly_pow(a, k):
    out = {0: 1}
    base = dict(a)
    while k:
        if k & 1:
            out = _poly_mul(out, base)
        k >>= 1
        if k:
            base = _poly_mul(base, base)
    return out


def colie_weights(V, s):
    """Weight multiset of Lie_s on the graded space V (equivalently the
    dual weights of CoLie_s), by the multigraded Witt formula

        l_s(q) = (1/s) sum_{e|s} mu(e) f(q^e)^(s/e),

    f the weight generating function of V."""
    s = int(s)
    if s < 1:
        raise ValidationError("degree must be >= 1")
    f = _as_poly(V)
    acc = {}
    for e in _divisors(s):
        mu = _mobius(e)
        if mu == 0:
            continue
        fe = {w * e: c for w, c in f.items()}
        for w, c in _poly_pow(fe, s // e).items():
            acc[w] = acc.get(w, 0) + mu * c
    out = {}
    for w, c in acc.items():
        if c % s:
            raise ArithmeticError(
                "multigraded Witt sum is not divisible by the degree")
        if c // s < 0:
            raise ArithmeticError("negative graded rank")
        if c // s:
            out[w] = c // s
    return GradedSpace(out)


def magnus_graded(ab_dims, s):
    """Graded pieces of the lower central series of a free(-abelianised)
    group: [K]_s/[K]_{s+1} has the dimensions of Lie_s(K^ab).  Alias of
    colie_weights; an integer argument means rank with trivial
    grading."""
    if isinstance(ab_dims, int):
        ab_dims = GradedSpace({0: ab_dims})
    return colie_weights(ab_dims, s)


def witt_product_check(V, tmax=8):
    """Formal-series identity prod_{s,w} (1 - t^s q^w)^(-rank) =
    1/(1 - t f(q)), compared through degree t^tmax."""
    f = _as_poly(V)
    tmax = int(tmax)
    # right side: sum_j (t f)^j
    rhs = {}
    fj = {0: 1}
    for j in range(tmax + 1):
        for w, c in fj.items():
            rhs[(j, w)] = rhs.get((j, w), 0) + c
        fj = _poly_mul(fj, f)
    # left side: expand each factor as sum_k C(rank+k-1, k) (t^s q^w)^k
    lhs = {(0, 0): 1}
    for s in range(1, tmax + 1):
        for w, rank in colie_weights(f, s).items():
            factor = {}
            coeff = 1
            for k in range(0, tmax // s + 1):
                factor[(s * k, w * k)] = coeff
                coeff = coeff * (rank + k) // (k + 1)
            new = {}
            for (t1, w1), c1 in lhs.items():
                for (t2, w2), c2 in factor.items():
                    if t1 + t2 > tmax:
                        continue
                    key = (t1 + t2, w1 + w2)
                    new[key] = new.get(key, 0) + c1 * c2
            lhs = {k: c for k, c in new.items() if c}
    rhs = {k: c for k, c in rhs.items() if c and k[0] <= tmax}
    return lhs == rhs


# ----------------------------------------------------------------------
# level-1 modular weight calculus

def dim_M(k):
    """dim M_k(SL2(Z)) = #{(a, b) >= 0 : 4a + 6b = k}."""
    k = int(k)
    if k < 0 or k % 2:
        return 0
    return sum(1 for b in range(k // 6 + 1) if (k - 6 * b) % 4 == 0)


def dim_S(k):
    k = int(k)
    if k < 4 or k % 2:
        return 0
    return max(dim_M(k) - 1, 0)


def dim_E(k):
    return dim_M(k) - dim_S(k)


def modular_h1(m):
    """Weights of H^1(SL2(Z), V_m)(-m): (m+1) with dimension
    2 dim S_{m+2} (holomorphic + antiholomorphic cusp), (2m+2) with
    dimension dim E_{m+2}.  Zero for odd m (-I acts by -1) and m = 0."""
    m = int(m)
    if m <= 0 or m % 2:
        return GradedSpace()
    k = m + 2
    ent = {}
    lab = {}
    s = dim_S(k)
    e = dim_E(k)
    if s:
        ent[m + 1] = 2 * s
        lab[m + 1] = "cusp"
    if e:
        ent[2 * m + 2] = e
        lab[2 * m + 2] = "Eisenstein"
    return GradedSpace(ent, lab)


class LsReport:
    """L_s of the truncated modular generator space, with the
    truncation stamp and the E1-diagonal-vanishing flag."""

    __slots__ = ("space", "e1_diag_zero", "m_max", "s", "lam_weight",
                 "generators")

    def __init__(self, space, e1_diag_zero, m_max, s, lam_weight,
                 generators):
        self.space = space
        self.e1_diag_zero = e1_diag_zero
        self.m_max = m_max
        self.s = s
        self.lam_weight = lam_weight
        self.generators = generators

    def __iter__(self):
        return iter((self.space, self.e1_diag_zero))

    def as_dict(self):
        return {
            "m_max": self.m_max,
            "s": self.s,
            "lambda_weight": self.lam_weight,
            "generators": self.generators.as_dict(),
            "weights": self.space.as_dict(),
            "e1_diag_zero": self.e1_diag_zero,
        }

    def __repr__(self):
        return (f"<L_{self.s} (m <= {self.m_max}): {self.space!r}, "
                f"flag {self.e1_diag_zero}>")


def ls_weight_report(m_max, s, lam_weight=-1):
    """L_s = CoLie_s(sum_{m <= m_max} H^1(SL2(Z), V_m)(-m) (x) S^m(L)).

    S^m of the rank-2 space L is (m+1)-dimensional and pure of weight
    m*lam_weight; the flag is True exactly when every weight of L_s is
    strictly positive (the checkable form of E^1_{s,s+1} = 0).
    """
    m_max, s = int(m_max), int(s)
    if s < 1:
        raise ValidationError("degree must be >= 1")
    gen = GradedSpace()
    for m in range(2, m_max + 1, 2):
        h = modular_h1(m)
        if h.is_zero():
            continue
        gen = gen + h.scaled(m + 1).shifted(m * lam_weight)
    space = colie_weights(gen, s)
    flag = space.is_zero() or space.min_weight() > 0
    return LsReport(space, flag, m_max, s, lam_weight, gen)
