"""Toy local-global systems and compact-support cohomology.

A system is a finite "global" group together with finitely many
places, each carrying its own group, a decomposition homomorphism into
the global group, and a normal inertia subgroup.  Everything actual
arithmetic would add (Frobenius structure, duality, infinite restricted
products) is out of scope: with finitely many places the restricted
product collapses to a plain direct sum, a place outside the declared
ramified set contributing the cohomology of its inertia quotient.

Compact supports are the cohomology of the mapping cone of the
localization cochain map, graded so the long exact sequence reads

    ... -> H^n_c -> H^n(global) -> H^n(adelic) -> H^{n+1}_c -> ...

Concretely Cone^n = C^n(global) (+) C^{n-1}(adelic) with differential
D(x, a) = (dx, loc(x) - da).  The connecting map takes an adelic
(n-1)-cocycle a to the class of the pair (0, -a); that sign makes the
difference pairs produced by reciprocity_tower land on the connecting
map exactly rather than up to inversion.

Unramified convention: a place left out of the ramified set
contributes through its inertia quotient, which needs (i) trivial
inertia action on the module and (ii) the decomposition hom to kill
inertia -- (ii) is what lets a global cochain restrict to the quotient
at all.  Either failure raises RamificationMismatch; declaring the
place ramified is always allowed and sidesteps the convention.
"""

import numpy as np

from . import linalg
from .cohomology import (Cochain, CohomologyClass, cohomology,
                         pullback_cochain, _diff_coo, _SortedCOO,
                         _flat_structure, _coords_from_pieces, _flat_in_B,
                         _CELL_BUDGET, DEGREE_LIMIT)
from .errors import (IncompatibleLocalData, MixedTargets, NotACocycle,
                     NotNormal, RamificationMismatch, SearchBudgetExceeded,
                     TargetMismatch, ValidationError)
from .groups import GroupHom, quotient_group
from .kernels import Echelon, canon_sparse
from .modules import pullback_module
from .tower import lift_classes, obstruction

_I64 = np.int64


class Place:
    """One place: a group, its map into the global group, inertia."""

    __slots__ = ("label", "group", "decomposition", "inertia")

    def __init__(self, label, decomposition, inertia=None):
        self.label = str(label)
        self.decomposition = decomposition
        self.group = decomposition.src
        if inertia is None:
            inertia = self.group.trivial_subgroup()
        if inertia.parent is not self.group:
            raise ValidationError("inertia must live in the place's group")
        if not inertia.is_normal():
            raise NotNormal(f"inertia at '{self.label}' is not normal")
        self.inertia = inertia

    def inertia_in_kernel(self):
        return not self.decomposition.image[self.inertia.members].any()

    def __repr__(self):
        return (f"<place '{self.label}': |G_v|={self.group.n}, "
                f"|I_v|={len(self.inertia)}>")


class _LocalBlock:
    # resolved place data for one module: the cohomological local group
    # (inertia quotient at unramified places), its hom to the global
    # group, and the restricted module
    __slots__ = ("label", "group", "eta", "module", "m", "ramified")


class LocalGlobalSystem:
    """A finite global group with finitely many labelled places."""

    def __init__(self, global_group, places, name=None):
        self.global_group = global_group
        self.places = list(places)
        self.name = name
        seen = set()
        for pl in self.places:
            if pl.label in seen:
                raise ValidationError(f"duplicate place label '{pl.label}'")
            seen.add(pl.label)
            dec = pl.decomposition
            if dec.dst is not global_group and \
                    dec.dst.fingerprint() != global_group.fingerprint():
                raise MixedTargets(
                    f"place '{pl.label}' maps into a different global group")
        self._labels = [pl.label for pl in self.places]
        self._quot = {}
        self._blocks = {}
        self._cones = {}

    @property
    def labels(self):
        return list(self._labels)

    def place(self, label):
        for pl in self.places:
            if pl.label == label:
                return pl
        raise KeyError(label)

    def _check_module(self, M):
        if M.group is not self.global_group and \
                M.group.fingerprint() != self.global_group.fingerprint():
            raise ValidationError("module is not over the global group")

    def ramified_places(self, M):
        """Labels whose inertia acts nontrivially on M (through the
        decomposition hom): the minimal admissible ramified set."""
        self._check_module(M)
        out = []
        for pl in self.places:
            if M.rank == 0:
                continue
            acts = M.act[pl.decomposition.image[pl.inertia.members]]
            if (acts != M.act[0][None, :, :]).any():
                out.append(pl.label)
        return out

    def _declared(self, M, ramified):
        need = set(self.ramified_places(M))
        if ramified is None:
            declared = need
        else:
            declared = set(str(x) for x in ramified)
            unknown = declared - set(self._labels)
            if unknown:
                raise ValidationError(
                    f"unknown place labels {sorted(unknown)}")
            missing = need - declared
            if missing:
                raise RamificationMismatch(
                    "inertia acts nontrivially at undeclared place(s): "
                    + ", ".join(sorted(missing)))
        return tuple(lb for lb in self._labels if lb in declared)

    def _quotient(self, pl):
        if pl.label not in self._quot:
            Q, proj = quotient_group(pl.group, pl.inertia)
            img = np.zeros(Q.n, dtype=np.int32)
            img[proj.image] = pl.decomposition.image
            eta = GroupHom(Q, self.global_group, img)
            self._quot[pl.label] = (Q, eta)
        return self._quot[pl.label]

    def local_data(self, M, ramified=None):
        """Per-place (group, hom, module) triples with the unramified
        quotient convention applied; see the module docstring."""
        self._check_module(M)
        declared = self._declared(M, ramified)
        key = (M.fingerprint(), declared)
        if key in self._blocks:
            return self._blocks[key]
        blocks = []
        for pl in self.places:
            bl = _LocalBlock()
            bl.label = pl.label
            bl.ramified = pl.label in declared
            if bl.ramified:
                bl.group, bl.eta = pl.group, pl.decomposition
            else:
                if not pl.inertia_in_kernel():
                    raise RamificationMismatch(
                        f"place '{pl.label}': inertia does not vanish in "
                        "the global group, so the localization cannot "
                        "descend to the inertia quotient; declare the "
                        "place ramified instead")
                bl.group, bl.eta = self._quotient(pl)
            bl.module = pullback_module(M, bl.eta)
            bl.m = bl.group.n - 1
            blocks.append(bl)
        self._blocks[key] = blocks
        return blocks

    def cone(self, M, ramified=None):
        declared = self._declared(M, ramified)
        key = (M.fingerprint(), declared)
        if key not in self._cones:
            self._cones[key] = _Cone(self, M, self.local_data(M, declared))
        return self._cones[key]

    def __repr__(self):
        nm = f" '{self.name}'" if self.name else ""
        return (f"<system{nm}: |global|={self.global_group.n}, places "
                f"{self._labels}>")


def _merge_invariants(parts):
    """Invariant factors of a direct sum given per-summand factors."""
    buckets = {}
    for invs in parts:
        for d in invs:
            for p, e in linalg._factor(int(d)).items():
                buckets.setdefault(p, []).append(e)
    for es in buckets.values():
        es.sort(reverse=True)
    slots = max((len(v) for v in buckets.values()), default=0)
    out = []
    for j in range(slots):
        d = 1
        for p, es in buckets.items():
            if j < len(es):
                d *= p ** es[j]
        out.append(d)
    out.reverse()
    return tuple(out)


class AdelicCohomology:
    """Direct sum of the local cohomologies of one system, one degree,
    with the localization map on representatives."""

    def __init__(self, system, module, degree, blocks, groups):
        self.system = system
        self.module = module
        self.degree = degree
        self._blocks = blocks
        self._groups = groups
        self.per_place = {bl.label: H for bl, H in zip(blocks, groups)}
        self.total_invariants = _merge_invariants(
            [H.invariants for H in groups])
        order = 1
        for H in groups:
            order *= H.order
        self.order = order

    def component(self, label):
        return self.per_place[label]

    def localize(self, x):
        """Restrict a global n-cochain place by place."""
        if x.degree != self.degree:
            raise ValidationError("cochain degree mismatch")
        if x.module.fingerprint() != self.module.fingerprint():
            raise ValidationError("cochain module mismatch")
        return {bl.label: pullback_cochain(bl.eta, x, module=bl.module)
                for bl in self._blocks}

    def localize_class(self, x):
        """Per-place classes of a global class (or cocycle)."""
        if isinstance(x, CohomologyClass):
            x = x.rep()
        parts = self.localize(x)
        return {bl.label: H.classify(parts[bl.label])
                for bl, H in zip(self._blocks, self._groups)}

    def rep(self, coords_by_label):
        """Cocycle representatives from per-place coordinate tuples."""
        out = {}
        for bl, H in zip(self._blocks, self._groups):
            co = coords_by_label.get(bl.label)
            out[bl.label] = H.rep(co) if co is not None \
                else Cochain.zero(bl.module, self.degree)
        return out

    def __repr__(self):
        inv = " x ".join(f"Z/{d}" for d in self.total_invariants) or "0"
        return f"<adelic H^{self.degree} = {inv}>"


def adelic_cohomology(sys, M, n, ramified=None):
    """Per-place cohomology and its direct sum; unramified places
    contribute through their inertia quotients."""
    if n < 0 or n > DEGREE_LIMIT:
        raise ValidationError(f"degree must lie in 0..{DEGREE_LIMIT}")
    blocks = sys.local_data(M, ramified)
    groups = [cohomology(bl.group, bl.module, n) for bl in blocks]
    return AdelicCohomology(sys, M, n, blocks, groups)


# ----------------------------------------------------------------------
# the cone

class _Cone:
    """Cochain-level mapping cone of the localization map.

    Cone^n = C^n(global) (+) (+)_v C^{n-1}(L_v), flat coordinates laid
    out global block first, then the places in system order, each block
    tiled by the module rank exactly like a bar cochain.
    """

    def __init__(self, system, M, blocks):
        self.sys = system
        self.M = M
        self.blocks = blocks
        self.ordarr = np.array(M.orders, dtype=_I64)
        self.r = M.rank
        self.mg = system.global_group.n - 1
        self._coo = {}
        self._struct = {}

    def slot_layout(self, n):
        glob_cnt = self.mg ** n
        offs = []
        pos = glob_cnt
        for bl in self.blocks:
            cnt = (bl.m ** (n - 1)) if n >= 1 else 0
            offs.append((bl, pos, cnt))
            pos += cnt
        return pos, offs

    def dcoo(self, n):
        """COO rows of D_n over the degree-n flat coordinates."""
        if n in self._coo:
            return self._coo[n]
        r = self.r
        _, offs_n = self.slot_layout(n)
        Tn1, offs_n1 = self.slot_layout(n + 1)
        if Tn1 * max(r, 1) > _CELL_BUDGET:
            raise SearchBudgetExceeded(
                "cone cochain space exceeds the cell budget")
        R, C, V = [], [], []
        rows, cols, vals = _diff_coo(self.M, n)
        R.append(rows)
        C.append(cols)
        V.append(vals)
        jj = np.arange(r, dtype=_I64)
        for (bl, off_n, cnt_n), (_bl, off_n1, _c) in zip(offs_n, offs_n1):
            # localization: the value of loc(x) at a local tuple is the
            # value of x at the image tuple (zero if any digit dies)
            mv = bl.m
            Nloc = mv ** n
            if Nloc and r:
                idx = np.arange(Nloc, dtype=_I64)
                mapped = np.zeros(Nloc, dtype=_I64)
                ok = np.ones(Nloc, dtype=bool)
                img = bl.eta.image.astype(_I64)
                for pos in range(n):
                    digit = idx // (mv ** (n - 1 - pos)) % mv + 1
                    fg = img[digit]
                    ok &= fg != 0
                    mapped = mapped * self.mg + np.maximum(fg - 1, 0)
                loc_s = idx[ok]
                loc_t = mapped[ok]
                R.append((loc_t[:, None] * r + jj).ravel())
                C.append(((off_n1 + loc_s)[:, None] * r + jj).ravel())
                V.append(np.ones(len(loc_s) * r, dtype=_I64))
            # minus the local differential on the degree-(n-1) part
            if n >= 1 and cnt_n and r:
                lr, lc, lv = _diff_coo(bl.module, n - 1)
                R.append(lr + off_n * r)
                C.append(lc + off_n1 * r)
                V.append((-lv) % self.ordarr[lc % r])
        out = (np.concatenate(R), np.concatenate(C), np.concatenate(V))
        self._coo[n] = out
        return out

    def structure(self, n):
        if n in self._struct:
            return self._struct[n]
        r = self.r
        Tn, _ = self.slot_layout(n)
        if r == 0:
            grp = CompactSupportGroup(self, n, (), 1, [], [])
        else:
            dn = _SortedCOO(*self.dcoo(n), Tn * r)
            dprev = None
            if n >= 1:
                Tp, _ = self.slot_layout(n - 1)
                dprev = _SortedCOO(*self.dcoo(n - 1), Tp * r)
            invs, order, reps, pieces = _flat_structure(
                self.ordarr, Tn, dn, dprev)
            grp = CompactSupportGroup(self, n, invs, order, reps, pieces)
            for k in range(len(invs)):
                x, parts = grp.rep_pair(tuple(
                    1 if i == k else 0 for i in range(len(invs))))
                grp._validate_pair(x, parts)   # reps must be cocones
        self._struct[n] = grp
        return grp

    def tiled_orders(self, n):
        Tn, _ = self.slot_layout(n)
        return self.ordarr[np.arange(Tn * self.r, dtype=_I64) % self.r] \
            if self.r else np.empty(0, dtype=_I64)


class CompactSupportClass:
    """An element of some H^n_c, as coordinates over its invariant
    factors; carries a representative (global, adelic) pair."""

    __slots__ = ("hgroup", "coords")

    def __init__(self, hgroup, coords):
        coords = tuple(int(c) % int(d)
                       for c, d in zip(coords, hgroup.invariants))
        if len(coords) != len(hgroup.invariants):
            raise ValidationError("coordinate length mismatch")
        self.hgroup = hgroup
        self.coords = coords

    @property
    def degree(self):
        return self.hgroup.degree

    def pair(self):
        return self.hgroup.rep_pair(self.coords)

    def is_zero(self):
        return all(c == 0 for c in self.coords)

    def __eq__(self, other):
        return (isinstance(other, CompactSupportClass)
                and self.hgroup is other.hgroup
                and self.coords == other.coords)

    def __hash__(self):
        return hash((id(self.hgroup), self.coords))

    def __add__(self, other):
        if other.hgroup is not self.hgroup:
            raise ValidationError("classes in different groups")
        return CompactSupportClass(
            self.hgroup,
            tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return CompactSupportClass(self.hgroup,
                                   tuple(-c for c in self.coords))

    def __repr__(self):
        return f"<H_c class {self.coords} deg {self.degree}>"


class CompactSupportGroup:
    """H^n_c of a system: cone cohomology, representatives split into
    a global n-cochain and per-place (n-1)-cochains."""

    def __init__(self, cone, degree, invariants, order, rep_arrays,
                 pieces):
        self.system = cone.sys
        self.module = cone.M
        self.degree = degree
        self.invariants = invariants
        self.order = order
        self._cone = cone
        self._reps = rep_arrays
        self._pieces = pieces

    @property
    def zero_class(self):
        return tuple(0 for _ in self.invariants)

    def basis(self):
        k = len(self.invariants)
        return [CompactSupportClass(
            self, tuple(1 if i == j else 0 for i in range(k)))
            for j in range(k)]

    def cls(self, coords):
        return CompactSupportClass(self, coords)

    def all_classes(self):
        invs = self.invariants
        if not invs:
            yield ()
            return
        idx = [0] * len(invs)
        while True:
            yield tuple(idx)
            j = len(invs) - 1
            while j >= 0:
                idx[j] += 1
                if idx[j] < invs[j]:
                    break
                idx[j] = 0
                j -= 1
            if j < 0:
                return

    def _rep_flat(self, coords):
        cone = self._cone
        Tn, _ = cone.slot_layout(self.degree)
        out = np.zeros(Tn * cone.r, dtype=_I64)
        for c, arr in zip(coords, self._reps):
            out += int(c) * arr.ravel()
        if cone.r:
            out %= cone.tiled_orders(self.degree)
        return out

    def rep_pair(self, coords):
        """(global cochain, {label: local cochain}) representing the
        class with the given coordinates."""
        if len(coords) != len(self.invariants):
            raise ValidationError("coordinate tuple has the wrong length")
        cone = self._cone
        n = self.degree
        r = cone.r
        full = self._rep_flat(coords)
        mgn = cone.mg ** n
        x = Cochain(cone.M, n, full[:mgn * r])
        parts = {}
        for bl, off, cnt in cone.slot_layout(n)[1]:
            if n >= 1:
                parts[bl.label] = Cochain(
                    bl.module, n - 1, full[off * r:(off + cnt) * r])
        return x, parts

    def _validate_pair(self, x, parts):
        cone = self._cone
        n = self.degree
        if x.degree != n:
            raise ValidationError("global part has the wrong degree")
        if x.module.fingerprint() != cone.M.fingerprint():
            raise ValidationError("global part has the wrong module")
        layout = cone.slot_layout(n)[1]
        known = {bl.label for bl, _o, _c in layout}
        unknown = set(parts) - known
        if unknown:
            raise ValidationError(
                f"unknown place labels {sorted(unknown)}")
        full = {}
        for bl, _off, _cnt in layout:
            a = parts.get(bl.label)
            if a is None and n >= 1:
                a = Cochain.zero(bl.module, n - 1)
            elif a is not None:
                if n < 1:
                    raise ValidationError(
                        "a degree-0 pair has no adelic part")
                if a.degree != n - 1 or \
                        a.module.fingerprint() != bl.module.fingerprint():
                    raise ValidationError(
                        f"local part at '{bl.label}' has the wrong "
                        "module or degree")
            full[bl.label] = a
        if not x.d().is_zero():
            raise NotACocycle("global part of the pair is not closed")
        for bl, _off, _cnt in layout:
            locx = pullback_cochain(bl.eta, x, module=bl.module)
            if n >= 1:
                if not (locx - full[bl.label].d()).is_zero():
                    raise NotACocycle(
                        f"pair fails the cocone condition at "
                        f"'{bl.label}'")
            elif not locx.is_zero():
                raise NotACocycle(
                    f"pair fails the cocone condition at '{bl.label}'")
        return full

    def class_of_pair(self, x, parts=None, check=True):
        """Coordinates of a cocone pair; NotACocycle if it is not one."""
        parts = self._validate_pair(x, dict(parts or {}))
        cone = self._cone
        r = cone.r
        if r == 0:
            return ()
        flat = self._flatten(x, parts)
        coords = _coords_from_pieces(self._pieces, self.invariants,
                                     flat, r)
        if check:
            z = (flat - self._rep_flat(coords)) \
                % cone.tiled_orders(self.degree)
            if not _flat_in_B(self._pieces, z, r):
                raise ArithmeticError(
                    "class coordinates failed verification")
        return coords

    def classify_pair(self, x, parts=None, check=True):
        return CompactSupportClass(
            self, self.class_of_pair(x, parts, check=check))

    def _flatten(self, x, parts):
        cone = self._cone
        n = self.degree
        r = cone.r
        Tn, layout = cone.slot_layout(n)
        flat = np.zeros(Tn * r, dtype=_I64)
        flat[:(cone.mg ** n) * r] = x.values.ravel()
        for bl, off, cnt in layout:
            a = parts.get(bl.label)
            if a is not None and cnt:
                flat[off * r:(off + cnt) * r] = a.values.ravel()
        return flat

    def connecting(self, parts):
        """Boundary H^{n-1}(adelic) -> H^n_c on cocycle reps: the
        class of (0, -a)."""
        n = self.degree
        if n < 1:
            raise ValidationError("no connecting map into degree 0")
        neg = {lb: -a for lb, a in parts.items() if a is not None}
        return self.classify_pair(Cochain.zero(self._cone.M, n), neg)

    def __repr__(self):
        inv = " x ".join(f"Z/{d}" for d in self.invariants) or "0"
        return f"<H^{self.degree}_c = {inv}>"


def compact_support(sys, M, n, ramified=None):
    """(H^n_c group, its basis of classes) for the system's cone."""
    if n < 0 or n > DEGREE_LIMIT:
        raise ValidationError(f"degree must lie in 0..{DEGREE_LIMIT}")
    grp = sys.cone(M, ramified).structure(n)
    return grp, grp.basis()


# ----------------------------------------------------------------------
# the long exact sequence

class ExactnessReport:
    """Orders, images and exactness flags at every node of the
    compact-support long exact sequence up to a given degree."""

    def __init__(self, up_to, ramified, nodes, per_place):
        self.up_to = up_to
        self.ramified = ramified
        self.nodes = nodes
        self.per_place = per_place

    @property
    def exact(self):
        return all(nd["exact"] for nd in self.nodes)

    def failures(self):
        return [nd["name"] for nd in self.nodes if not nd["exact"]]

    def as_dict(self):
        return {
            "up_to": self.up_to,
            "ramified": list(self.ramified),
            "exact": self.exact,
            "nodes": [dict(nd) for nd in self.nodes],
            "per_place": {k: {str(n): list(v) for n, v in d.items()}
                          for k, d in self.per_place.items()},
        }

    def __repr__(self):
        flag = "exact" if self.exact else \
            f"NOT exact at {self.failures()}"
        return f"<LES report up to degree {self.up_to}: {flag}>"


def _prime_proj(ordarr):
    out = []
    r = len(ordarr)
    for p, apos, aexps in linalg.p_parts(ordarr):
        E = int(aexps.max())
        rp = len(apos)
        posmap = np.full(r, -1, dtype=_I64)
        posmap[apos] = np.arange(rp)
        out.append({"p": p, "E": E, "mod": p ** E, "apos": apos,
                    "scale": p ** (E - aexps), "posmap": posmap,
                    "rp": rp})
    return out


def _embed_flat(flat, r, pe):
    block = flat.reshape(-1, r)[:, pe["apos"]]
    vals = (block * pe["scale"][None, :]) % pe["mod"]
    sidx = np.flatnonzero(vals.ravel()).astype(_I64)
    return sidx, vals.ravel()[sidx]


def _proj_coo_row(cc, vv, r, pe):
    j = cc % r
    keep = pe["posmap"][j] >= 0
    cc2 = (cc[keep] // r) * pe["rp"] + pe["posmap"][j[keep]]
    vv2 = (vv[keep] * pe["scale"][pe["posmap"][j[keep]]]) % pe["mod"]
    return canon_sparse(cc2, vv2, pe["mod"])


class _TopSpan:
    """Untracked coboundary span of the cone one degree past the last
    fully computed group; supports membership and image-size queries."""

    def __init__(self, cone, n_top):
        self.cone = cone
        self.r = cone.r
        self.pes = _prime_proj(cone.ordarr)
        self.echs = []
        self.base_exp = []
        if self.r == 0:
            return
        Tn, _ = cone.slot_layout(n_top - 1)
        dn = _SortedCOO(*cone.dcoo(n_top - 1), Tn * self.r)
        for pe in self.pes:
            ech = Echelon(pe["p"], pe["E"])
            for b in range(dn.n_rows):
                if pe["posmap"][b % self.r] >= 0:
                    ech.insert(*_proj_coo_row(*dn.row(b), self.r, pe))
            self.echs.append(ech)
            self.base_exp.append(ech.span_exponent())

    def contains(self, flat):
        for pe, ech in zip(self.pes, self.echs):
            sidx, sval = _embed_flat(flat, self.r, pe)
            if not ech.contains(sidx, sval):
                return False
        return True

    def extend_and_measure(self, flats):
        """|(B + span(flats)) / B| -- call once, after contains()."""
        if self.r == 0:
            return 1
        for flat in flats:
            for pe, ech in zip(self.pes, self.echs):
                ech.insert(*_embed_flat(flat, self.r, pe))
        out = 1
        for pe, ech, b0 in zip(self.pes, self.echs, self.base_exp):
            out *= pe["p"] ** (ech.span_exponent() - b0)
        return out


def les_check(sys, M, up_to=DEGREE_LIMIT, ramified=None):
    """Assemble the compact-support LES and verify im = ker at every
    node of degree <= up_to.  Failures are report entries, not errors."""
    if up_to < 0 or up_to > DEGREE_LIMIT:
        raise ValidationError(f"up_to must lie in 0..{DEGREE_LIMIT}")
    G = sys.global_group
    cone = sys.cone(M, ramified)
    declared = sys._declared(M, ramified)
    Hg = [cohomology(G, M, n) for n in range(up_to + 1)]
    Ad = [adelic_cohomology(sys, M, n, declared) for n in range(up_to + 1)]
    Hc = [cone.structure(n) for n in range(up_to + 1)]
    blocks = sys.local_data(M, declared)

    # generator images, class level
    alpha = []     # H^n_c gens -> coords in H^n
    beta = []      # H^n gens -> concatenated adelic coords
    delta = []     # adelic slot gens -> coords in H^{n+1}_c (n < up_to)
    concat_invs = []
    for n in range(up_to + 1):
        a_im = []
        for k in range(len(Hc[n].invariants)):
            x, _parts = Hc[n].rep_pair(
                tuple(1 if i == k else 0
                      for i in range(len(Hc[n].invariants))))
            a_im.append(Hg[n].class_of(x))
        alpha.append(a_im)
        invs_cat = []
        for bl in blocks:
            invs_cat.extend(Ad[n].per_place[bl.label].invariants)
        concat_invs.append(tuple(invs_cat))
        b_im = []
        for k in range(len(Hg[n].invariants)):
            loc = Ad[n].localize_class(Hg[n].reps[k])
            row = []
            for bl in blocks:
                row.extend(loc[bl.label].coords)
            b_im.append(tuple(row))
        beta.append(b_im)
        if n < up_to:
            d_im = []
            for bl in blocks:
                Hv = Ad[n].per_place[bl.label]
                for k in range(len(Hv.invariants)):
                    a = Hv.reps[k]
                    d_im.append(Hc[n + 1].connecting({bl.label: a}).coords)
            delta.append(d_im)

    top = _TopSpan(cone, up_to + 1)
    # boundary images of the top adelic generators, via the span
    top_gen_flats = []
    n = up_to
    for bl in blocks:
        Hv = Ad[n].per_place[bl.label]
        for k in range(len(Hv.invariants)):
            a = Hv.reps[k]
            Tn1, layout = cone.slot_layout(n + 1)
            flat = np.zeros(Tn1 * cone.r, dtype=_I64)
            for bl2, off, cnt in layout:
                if bl2.label == bl.label and cnt:
                    flat[off * cone.r:(off + cnt) * cone.r] = \
                        (-a.values).ravel() % np.tile(cone.ordarr, cnt)
            top_gen_flats.append(flat)
    # composite-zero at the top adelic node: boundary of every
    # localized global generator must already be a coboundary
    top_comp_zero = True
    for k in range(len(Hg[n].invariants)):
        parts = Ad[n].localize(Hg[n].reps[k])
        Tn1, layout = cone.slot_layout(n + 1)
        flat = np.zeros(Tn1 * cone.r, dtype=_I64) if cone.r else \
            np.empty(0, dtype=_I64)
        for bl, off, cnt in layout:
            a = parts[bl.label]
            if cnt:
                flat[off * cone.r:(off + cnt) * cone.r] = \
                    (-a.values).ravel() % np.tile(cone.ordarr, cnt)
        if cone.r and not top.contains(flat):
            top_comp_zero = False
    im_delta_top = top.extend_and_measure(top_gen_flats)

    def span(rows, invs):
        rows = [list(v) for v in rows]
        if not invs:
            return 1
        if not rows:
            return 1
        return linalg.span_order(np.array(rows, dtype=_I64),
                                 np.array(invs, dtype=_I64))

    im_alpha = [span(alpha[n], Hg[n].invariants)
                for n in range(up_to + 1)]
    im_beta = [span(beta[n], concat_invs[n]) for n in range(up_to + 1)]
    im_delta = [span(delta[n], Hc[n + 1].invariants)
                for n in range(up_to)] + [im_delta_top]

    nodes = []
    for n in range(up_to + 1):
        # H^n_c: in = boundary from degree n-1 (or nothing), out = alpha
        im_in = 1 if n == 0 else im_delta[n - 1]
        comp = True
        if n > 0:
            for co in delta[n - 1]:
                x, _p = Hc[n].rep_pair(co)
                if not all(c == 0 for c in Hg[n].class_of(x)):
                    comp = False
        nodes.append({
            "name": f"H^{n}_c",
            "invariants": list(Hc[n].invariants),
            "order": Hc[n].order,
            "im_in": im_in, "im_out": im_alpha[n],
            "composite_zero": comp,
            "exact": comp and im_in * im_alpha[n] == Hc[n].order,
        })
        # H^n: in = alpha, out = beta
        comp = all(all(c == 0 for c in co2)
                   for co in alpha[n]
                   for co2 in [_cat_localize(Ad[n], Hg[n], co, blocks)])
        nodes.append({
            "name": f"H^{n}",
            "invariants": list(Hg[n].invariants),
            "order": Hg[n].order,
            "im_in": im_alpha[n], "im_out": im_beta[n],
            "composite_zero": comp,
            "exact": comp and im_alpha[n] * im_beta[n] == Hg[n].order,
        })
        # H^n_a: in = beta, out = boundary
        if n < up_to:
            comp = True
            for co in beta[n]:
                parts = {}
                pos = 0
                for bl in blocks:
                    Hv = Ad[n].per_place[bl.label]
                    w = len(Hv.invariants)
                    parts[bl.label] = Hv.rep(co[pos:pos + w])
                    pos += w
                if not Hc[n + 1].connecting(parts).is_zero():
                    comp = False
        else:
            comp = top_comp_zero
        nodes.append({
            "name": f"H^{n}_a",
            "invariants": list(Ad[n].total_invariants),
            "order": Ad[n].order,
            "im_in": im_beta[n], "im_out": im_delta[n],
            "composite_zero": comp,
            "exact": comp and im_beta[n] * im_delta[n] == Ad[n].order,
        })

    per_place = {bl.label: {n: list(Ad[n].per_place[bl.label].invariants)
                            for n in range(up_to + 1)}
                 for bl in blocks}
    return ExactnessReport(up_to, declared, nodes, per_place)


def _cat_localize(ad, Hg, coords, blocks):
    loc = ad.localize_class(Hg.rep(coords))
    row = []
    for bl in blocks:
        row.extend(loc[bl.label].coords)
    return tuple(row)


# ----------------------------------------------------------------------
# reciprocity

def reciprocity_obstruction(sys, A, local_classes, ramified=None):
    """Boundary of an adelic degree-1 class in H^2_c.

    ``local_classes``: per-place classes in H^1(L_v, A_v), as a dict
    label -> (CohomologyClass | coordinate tuple); missing labels mean
    zero.  The result vanishes exactly when the input is the
    localization of a global class (the LES checks that).
    """
    ad = adelic_cohomology(sys, A, 1, ramified)
    H2c = sys.cone(A, ramified).structure(2)
    if isinstance(local_classes, (list, tuple)):
        if len(local_classes) != len(sys.places):
            raise ValidationError(
                "per-place class list does not match the places")
        local_classes = dict(zip(sys.labels, local_classes))
    unknown = set(local_classes) - set(sys.labels)
    if unknown:
        raise ValidationError(f"unknown place labels {sorted(unknown)}")
    parts = {}
    for label, H in ad.per_place.items():
        val = local_classes.get(label)
        if val is None:
            coords = H.zero_class
        elif isinstance(val, CohomologyClass):
            if val.hgroup is not H and (
                    val.hgroup.degree != 1
                    or val.hgroup.group.fingerprint()
                    != H.group.fingerprint()
                    or val.hgroup.module.fingerprint()
                    != H.module.fingerprint()):
                raise ValidationError(
                    f"class at '{label}' lives in the wrong group")
            coords = val.coords
        else:
            coords = tuple(int(c) for c in val)
        parts[label] = H.rep(coords)
    return H2c.connecting(parts)


class ReciprocityLevel:
    """One level of a reciprocity tower run."""

    __slots__ = ("level", "global_obstruction", "local_obstructions",
                 "difference", "chosen")

    def __init__(self, level, global_obstruction, local_obstructions,
                 difference, chosen):
        self.level = level
        self.global_obstruction = global_obstruction
        self.local_obstructions = local_obstructions
        self.difference = difference
        self.chosen = chosen

    def blocked(self):
        return self.chosen is None

    def as_dict(self):
        return {
            "level": self.level,
            "global_obstruction":
                list(self.global_obstruction.coords),
            "global_h2": list(
                self.global_obstruction.hgroup.invariants),
            "local_obstructions": {
                k: list(v) for k, v in self.local_obstructions.items()},
            "difference": list(self.difference.coords),
            "h2_c": list(self.difference.hgroup.invariants),
            "blocked": self.blocked(),
            "chosen": None if self.chosen is None else
                [int(x) for x in self.chosen.image],
        }


class ReciprocityReport:
    __slots__ = ("start_level", "entries", "completed", "blocked_level",
                 "final")

    def __init__(self, start_level, entries, completed, blocked_level,
                 final):
        self.start_level = start_level
        self.entries = entries
        self.completed = completed
        self.blocked_level = blocked_level
        self.final = final

    def as_dict(self):
        return {
            "start_level": self.start_level,
            "completed": self.completed,
            "blocked_level": self.blocked_level,
            "levels": [e.as_dict() for e in self.entries],
            "final": None if self.final is None else
                [int(x) for x in self.final.image],
        }


def reciprocity_tower(sys, tower, psi0, local_lifts, start_level=0,
                      ramified=None):
    """Run a lifting tower globally while tracking, level by level, the
    compact-support class measuring the local-global discrepancy.

    ``local_lifts``: dict label -> sequence of local lifts (one per
    level, covering the restriction of the chosen global hom at the
    previous level); entries may be None (or the sequence short), in
    which case a canonical local lift is chosen -- if none exists the
    input has no adelic continuation and IncompatibleLocalData is
    raised.  The difference pair at a level is (c, b) with c the global
    obstruction cochain and b_v = emb^{-1}(lift_v(x)^{-1}
    sect(psi(eta_v(x)))); its H^2_c class restricts to the global
    obstruction class and, for split steps, equals the connecting map
    on the derivation the local lifts define.
    """
    G = sys.global_group
    if psi0.src is not G and psi0.src.fingerprint() != G.fingerprint():
        raise ValidationError("psi0 must start from the global group")
    G0 = tower.group_at(start_level)
    if psi0.dst is not G0 and psi0.dst.fingerprint() != G0.fingerprint():
        raise TargetMismatch(
            f"psi0 must land in the level-{start_level} group")
    unknown = set(local_lifts) - set(sys.labels)
    if unknown:
        raise ValidationError(f"unknown place labels {sorted(unknown)}")
    fams = {lb: list(local_lifts.get(lb, [])) for lb in sys.labels}

    psi = psi0
    entries = []
    blocked = None
    for k in range(tower.depth - start_level):
        step = tower.steps[start_level + k]
        level = start_level + k + 1
        c, cls = obstruction(psi, step)
        Mp = c.module
        blocks = sys.local_data(Mp, ramified)
        H2c = sys.cone(Mp, ramified).structure(2)
        E = step.extension
        T = E.total
        bparts = {}
        locobs = {}
        for bl in blocks:
            locx = pullback_cochain(bl.eta, c, module=bl.module)
            lcls = cohomology(bl.group, bl.module, 2).classify(locx)
            locobs[bl.label] = lcls.coords
        bad = sorted(lb for lb, co in locobs.items() if any(co))
        if bad:
            exc = IncompatibleLocalData(
                f"local obstruction nonzero at place(s) "
                f"{', '.join(bad)} (level {level}): the input has no "
                "adelic continuation")
            exc.report = ReciprocityReport(start_level, entries, False,
                                           level, None)
            raise exc
        for bl in blocks:
            fam = fams[bl.label]
            lam = fam[k] if k < len(fam) else None
            restr = bl.eta.then(psi)
            if lam is None:
                choices = lift_classes(restr, step)
                if not choices:
                    raise ArithmeticError(
                        "no local lift despite a zero local "
                        "obstruction class")
                lam = choices[0]
            else:
                if lam.src is not bl.group and \
                        lam.src.fingerprint() != bl.group.fingerprint():
                    raise IncompatibleLocalData(
                        f"local lift at '{bl.label}' (level {level}) "
                        "has the wrong source group")
                if lam.dst is not T and \
                        lam.dst.fingerprint() != T.fingerprint():
                    raise IncompatibleLocalData(
                        f"local lift at '{bl.label}' (level {level}) "
                        "does not land in the step's total group")
                if not (E.proj.image[lam.image]
                        == restr.image).all():
                    raise IncompatibleLocalData(
                        f"local lift at '{bl.label}' does not cover "
                        f"the global hom at level {level - 1}")
            atil = E.sect[psi.image[bl.eta.image]]
            elt = T.mul[T.inv[lam.image], atil]
            ia = E.inv_embed[elt]
            if (ia < 0).any():
                raise ArithmeticError(
                    "local difference left the kernel despite covering")
            bv = E.module.all_elements()[ia]
            bco = Cochain(bl.module, 1, bv[1:])
            locx = pullback_cochain(bl.eta, c, module=bl.module)
            if not (bco.d() - locx).is_zero():
                raise ArithmeticError(
                    "local difference cochain failed its defining "
                    "identity")
            bparts[bl.label] = bco
        diff = H2c.classify_pair(c, bparts)
        gl = lift_classes(psi, step) if cls.is_zero() else []
        entry = ReciprocityLevel(level, cls, locobs, diff,
                                 gl[0] if gl else None)
        entries.append(entry)
        if not gl:
            blocked = level
            break
        psi = gl[0]
    completed = blocked is None
    return ReciprocityReport(start_level, entries, completed, blocked,
                             psi if completed else None)
