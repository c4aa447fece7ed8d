"""Obstruction towers of abelian extensions.

A tower is a chain ... -> Pi_2 -> Pi_1 -> Pi_0 of surjections with
abelian kernels A_n on which conjugation descends to a fixed quotient.
Given psi: G -> Pi_{n-1}, the composite alpha = s o psi with a set
section s fails to be multiplicative by the kernel-valued 2-cocycle

    c(g, h) = embed^{-1}( alpha(gh)^{-1} alpha(g) alpha(h) ),

whose class in H^2(G, psi^*A_n) is the one and only obstruction to a
homomorphic lift; the lifts, when they exist, are b |-> alpha . embed(b)
over solutions of db = -c, and their classes modulo kernel conjugation
form a torsor under H^1(G, psi^*A_n).

The towers produced here come from the lower central series [N]_1 = N,
[N]_{k+1} = [N, [N]_k] of a normal subgroup: kernels [N]_k/[N]_{k+1}
are then acted on through Pi/N, which is what makes a single base group
carry every level's coefficients (and the E_1 page meaningful).
"""

import numpy as np

from .cohomology import (DEGREE_LIMIT, Cochain, cohomology,
                         solve_coboundary)
from .errors import TargetMismatch, ValidationError
from .extensions import covering_homs, extension_datum, _strides
from .groups import GroupHom, quotient_group, lower_central_series
from .modules import conjugation_module, pullback_module

_I64 = np.int64

TREE_WIDTH = 64


class TowerStep:
    """One level: an abelian extension plus the quotient through which
    its conjugation action factors.  ``module`` is the kernel as a
    module over action_quotient's target; the extension's own module is
    its pullback to the extension base (validated)."""

    def __init__(self, extension, action_quotient, module, validate=True):
        self.extension = extension
        self.action_quotient = action_quotient
        self.module = module
        if validate:
            if action_quotient.src is not extension.base:
                raise ValidationError(
                    "action quotient must start at the extension base")
            if module.group is not action_quotient.dst:
                raise ValidationError(
                    "kernel module must live over the action quotient "
                    "target")
            pb = pullback_module(module, action_quotient)
            if tuple(pb.orders) != tuple(extension.module.orders) \
                    or not np.array_equal(pb.act, extension.module.act):
                raise ValidationError(
                    "extension module is not the pullback of the kernel "
                    "module along the action quotient")

    @property
    def total(self):
        return self.extension.total

    @property
    def base(self):
        return self.extension.base

    def __repr__(self):
        return (f"<tower step {self.total.n} -> {self.base.n}, "
                f"|A|={self.module.size}>")


class Tower:
    """Base group plus a chain of TowerSteps (step k maps the level-k
    group onto the level-(k-1) group)."""

    def __init__(self, base, steps, name=None):
        self.base = base
        self.steps = list(steps)
        self.name = name
        prev = base
        for k, st in enumerate(self.steps):
            if st.extension.base is not prev:
                raise ValidationError(
                    f"step {k + 1} does not extend the previous level")
            prev = st.extension.total

    @property
    def depth(self):
        return len(self.steps)

    def group_at(self, level):
        if level == 0:
            return self.base
        return self.steps[level - 1].extension.total

    def __repr__(self):
        sizes = [self.group_at(k).n for k in range(self.depth + 1)]
        return f"<tower {' <- '.join(str(s) for s in sizes)}>"


def tower_from_lcs(Pi, N, depth, name=None):
    """Tower of Pi/[N]_{k+1} from the lower central series of N."""
    from .errors import NotNormal
    if not N.is_normal():
        raise NotNormal("N must be normal in the ambient group")
    series = lower_central_series(Pi, N, depth + 1)
    quots = [quotient_group(Pi, series[k]) for k in range(depth + 1)]
    base = quots[0][0]
    steps = []
    for k in range(1, depth + 1):
        Qk, pk = quots[k]
        Qprev, pprev = quots[k - 1]
        img = np.empty(Qk.n, dtype=np.int64)
        img[pk.image] = pprev.image
        proj = GroupHom(Qk, Qprev, img, validate=True)
        aq_img = np.empty(Qprev.n, dtype=np.int64)
        aq_img[pprev.image] = quots[0][1].image
        aq = GroupHom(Qprev, base, aq_img, validate=True)
        M0, project = conjugation_module(Pi, series[k - 1], series[k],
                                         quots[0][1])
        ordarr = np.array(M0.orders, dtype=_I64)
        st = _strides(ordarr) if M0.rank else np.empty(0, dtype=_I64)
        embed = np.full(M0.size, -1, dtype=_I64)
        for h in series[k - 1].members:
            ia = int(project(int(h)) @ st) if M0.rank else 0
            e = int(pk.image[int(h)])
            if embed[ia] >= 0 and embed[ia] != e:
                raise ArithmeticError("kernel embedding is inconsistent")
            embed[ia] = e
        if (embed < 0).any():
            raise ArithmeticError("kernel embedding is not onto")
        Mbase = pullback_module(M0, aq)
        datum = extension_datum(proj, Mbase, embed)
        steps.append(TowerStep(datum, aq, M0, validate=True))
    return Tower(base, steps, name=name)


def obstruction(psi, step):
    """(cocycle, class) obstructing a homomorphic lift of psi."""
    E = step.extension
    if psi.dst is not E.base \
            and psi.dst.fingerprint() != E.base.fingerprint():
        raise TargetMismatch("psi must land in the step base")
    G = psi.src
    T = E.total
    lam = E.sect[psi.image]
    prod = T.mul[lam[:, None], lam[None, :]]
    elt = T.mul[T.inv[lam[G.mul]], prod]
    ia = E.inv_embed[elt]
    if (ia < 0).any():
        raise ArithmeticError("section defect left the kernel")
    Mp = pullback_module(E.module, psi)
    vals = E.module.all_elements()[ia]
    m = G.n - 1
    c = Cochain(Mp, 2, vals[1:, 1:].reshape(m * m, Mp.rank))
    if not c.is_cocycle():
        raise ArithmeticError("obstruction cochain is not a cocycle")
    H2 = cohomology(G, Mp, 2)
    return c, H2.classify(c)


def _conj_min(T, img, kernel_elems):
    """Lexicographically least kernel-conjugate of a lift image."""
    best = tuple(int(x) for x in img)
    for e in kernel_elems:
        cand = T.mul[T.inv[int(e)], T.mul[img, int(e)]]
        tt = tuple(int(x) for x in cand)
        if tt < best:
            best = tt
    return best


def lift_classes(psi, step):
    """Canonical representatives of lifts of psi modulo kernel
    conjugacy; empty exactly when the obstruction class is nonzero."""
    c, cls = obstruction(psi, step)
    if not cls.is_zero():
        return []
    Mp = c.module
    G = psi.src
    b0 = solve_coboundary(Mp, -c)
    if b0 is None:
        raise ArithmeticError("zero class but no coboundary solution")
    H1 = cohomology(G, Mp, 1)
    E = step.extension
    T = E.total
    lam = E.sect[psi.image]
    ordarr = np.array(Mp.orders, dtype=_I64)
    st = _strides(ordarr) if Mp.rank else np.empty(0, dtype=_I64)
    reps = []
    for h1coords in H1.all_classes():
        bb = b0 + H1.rep(h1coords)
        bfull = np.zeros((G.n, Mp.rank), dtype=_I64)
        if G.n > 1:
            bfull[1:] = bb.values
        ia = bfull @ st if Mp.rank else np.zeros(G.n, dtype=_I64)
        img = T.mul[lam, E.embed[ia]]
        if not (E.proj.image[img] == psi.image).all():
            raise ArithmeticError("lift does not cover psi")
        reps.append(_conj_min(T, img, E.embed))
    if len(set(reps)) != len(reps):
        raise ArithmeticError("distinct H^1 classes produced conjugate "
                              "lifts")
    reps.sort()
    return [GroupHom(G, T, np.array(t, dtype=np.int64), validate=True)
            for t in reps]


def brute_force_lifts(psi, step, budget=1_000_000):
    """Oracle: every homomorphism covering psi, by exhaustive search."""
    E = step.extension
    if psi.dst is not E.base \
            and psi.dst.fingerprint() != E.base.fingerprint():
        raise TargetMismatch("psi must land in the step base")
    lifts = covering_homs(E.proj, psi, budget=budget)
    return [GroupHom(psi.src, E.total, arr, validate=True)
            for arr in lifts]


class LevelReport:
    """What happened at one tower level."""

    def __init__(self, level, h2_invariants, obstruction_coords,
                 h1_invariants, lift_class_count, chosen):
        self.level = level
        self.h2_invariants = h2_invariants
        self.obstruction_coords = obstruction_coords
        self.h1_invariants = h1_invariants
        self.lift_class_count = lift_class_count
        self.chosen = chosen

    def obstructed(self):
        return any(c != 0 for c in self.obstruction_coords)

    def as_dict(self):
        return {
            "level": self.level,
            "h2_invariants": list(self.h2_invariants),
            "obstruction": list(self.obstruction_coords),
            "h1_invariants": list(self.h1_invariants),
            "lift_classes": self.lift_class_count,
            "chosen_lift": (list(self.chosen)
                            if self.chosen is not None else None),
        }


class LiftReport:
    """run_tower outcome: per-level reports plus the final lift."""

    def __init__(self, start_level, entries, completed, blocked_level,
                 final, tree=None):
        self.start_level = start_level
        self.entries = entries
        self.completed = completed
        self.blocked_level = blocked_level
        self.final = final
        self.tree = tree

    def as_dict(self):
        out = {
            "start_level": self.start_level,
            "levels": [e.as_dict() for e in self.entries],
            "completed": self.completed,
            "blocked_level": self.blocked_level,
            "final_lift": (list(int(x) for x in self.final.image)
                           if self.final is not None else None),
        }
        if self.tree is not None:
            out["tree"] = self.tree
        return out


def _level_report(psi, step, level):
    c, cls = obstruction(psi, step)
    H1 = cohomology(psi.src, c.module, 1)
    classes = lift_classes(psi, step) if cls.is_zero() else []
    if cls.is_zero() == (len(classes) == 0):
        raise ArithmeticError(
            "lift-class count contradicts the obstruction class")
    rep = LevelReport(level, cls.hgroup.invariants, cls.coords,
                      H1.invariants, len(classes),
                      tuple(int(x) for x in classes[0].image)
                      if classes else None)
    return rep, classes


def run_tower(psi0, tower, start_level=0, explore="canonical",
              width=TREE_WIDTH):
    """Lift psi0 up the tower, level by level.

    ``explore='canonical'`` follows the least lift class at each level;
    ``explore='tree'`` additionally records the full branch tree (each
    node capped at ``width`` children) while the reported path stays the
    canonical one.
    """
    G0 = tower.group_at(start_level)
    if psi0.dst is not G0 and psi0.dst.fingerprint() != G0.fingerprint():
        raise TargetMismatch(
            f"psi0 must land in the level-{start_level} group")
    if explore not in ("canonical", "tree"):
        raise ValidationError("explore must be 'canonical' or 'tree'")

    entries = []
    psi = psi0
    blocked = None
    for lvl in range(start_level, tower.depth):
        rep, classes = _level_report(psi, tower.steps[lvl], lvl + 1)
        entries.append(rep)
        if not classes:
            blocked = lvl + 1
            break
        psi = classes[0]

    tree = None
    if explore == "tree":
        def node(p, lvl):
            if lvl >= tower.depth:
                return {"level": lvl, "leaf": True,
                        "image": [int(x) for x in p.image]}
            rep, classes = _level_report(p, tower.steps[lvl], lvl + 1)
            truncated = len(classes) > width
            return {
                "level": lvl + 1,
                "obstruction": list(rep.obstruction_coords),
                "lift_classes": rep.lift_class_count,
                "truncated": truncated,
                "children": [node(ch, lvl + 1)
                             for ch in classes[:width]],
            }
        tree = node(psi0, start_level)

    completed = blocked is None
    return LiftReport(start_level, entries, completed, blocked,
                      psi if completed else None, tree=tree)


class E1Page:
    """First page of the tower's exact couple: entry (s, t) is
    H^{1+s-t}(G, A_s) on the window, with out-of-range degrees
    flagged rather than dropped."""

    def __init__(self, G, window, entries, forced_zero, uncomputed):
        self.G = G
        self.window = window
        self.entries = entries
        self.forced_zero = forced_zero
        self.uncomputed = uncomputed

    def entry(self, s, t):
        return self.entries.get((s, t))

    def as_dict(self):
        s_max, t_max = self.window
        out = {"window": [s_max, t_max], "entries": {}}
        for (s, t), H in sorted(self.entries.items()):
            out["entries"][f"{s},{t}"] = {
                "degree": 1 + s - t,
                "invariants": list(H.invariants),
            }
        for (s, t) in sorted(self.forced_zero):
            out["entries"][f"{s},{t}"] = {"degree": 1 + s - t,
                                          "forced_zero": True}
        for (s, t) in sorted(self.uncomputed):
            out["entries"][f"{s},{t}"] = {"degree": 1 + s - t,
                                          "uncomputed": True}
        return out

    def table_text(self):
        s_max, t_max = self.window
        cells = {}
        for (s, t), H in self.entries.items():
            cells[(s, t)] = " x ".join(f"Z/{d}" for d in H.invariants) \
                or "0"
        for st_ in self.forced_zero:
            cells[st_] = "0*"
        for st_ in self.uncomputed:
            cells[st_] = "?"
        col_w = {s: max([len(f"s={s}")]
                        + [len(cells.get((s, t), "")) for t in
                           range(t_max + 1)])
                 for s in range(1, s_max + 1)}
        lines = []
        head = ["t\\s".rjust(4)] + [f"s={s}".rjust(col_w[s])
                                    for s in range(1, s_max + 1)]
        lines.append("  ".join(head))
        for t in range(t_max, -1, -1):
            row = [str(t).rjust(4)]
            for s in range(1, s_max + 1):
                row.append(cells.get((s, t), ".").rjust(col_w[s]))
            lines.append("  ".join(row))
        return "\n".join(lines)


def e1_page(tower, G, window, psi0=None):
    """H^{1+s-t}(G, A_s) for 1 <= s <= s_max, s-1 <= t <= t_max.

    G must be identified with a subquotient of the tower base: pass
    psi0: G -> Pi_0, or rely on the two unambiguous defaults (G is the
    base itself, or the base is trivial).
    """
    s_max, t_max = window
    if s_max < 1 or t_max < 0:
        raise ValidationError("window must have s_max >= 1, t_max >= 0")
    if psi0 is None:
        if G.fingerprint() == tower.base.fingerprint():
            psi0 = GroupHom.identity(tower.base)
        elif tower.base.n == 1:
            psi0 = GroupHom(G, tower.base,
                            np.zeros(G.n, dtype=np.int64), validate=True)
        else:
            raise ValidationError(
                "pass psi0 to identify G with the tower base")
    elif psi0.src.fingerprint() != G.fingerprint() \
            or psi0.dst.fingerprint() != tower.base.fingerprint():
        raise ValidationError("psi0 must map G to the tower base")
    entries = {}
    forced_zero = set()
    uncomputed = set()
    for s in range(1, min(s_max, tower.depth) + 1):
        MG = pullback_module(tower.steps[s - 1].module, psi0)
        for t in range(max(s - 1, 0), t_max + 1):
            deg = 1 + s - t
            if deg < 0:
                forced_zero.add((s, t))
            elif deg > DEGREE_LIMIT:
                uncomputed.add((s, t))
            else:
                entries[(s, t)] = cohomology(G, MG, deg)
    return E1Page(G, (s_max, t_max), entries, forced_zero, uncomputed)
