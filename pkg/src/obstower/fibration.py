"""Fibration models for levelwise-surjective maps of truncated
simplicial groups with abelian kernel.

Given q: G ->> H with kernel A (levelwise abelian), the morphism
object T_n = G_n x A_n of the action groupoid [T =| G] has source
(g, a) |-> g, target (g, a) |-> g iota(a), and composition
c((g, a), (g iota(a), a')) = (g, a a').  Applying W-bar levelwise
gives a groupoid [WT =| WG] internal to simplicial sets; the nerve of
that, followed by the codiagonal, is the total object Y'.  The same
recipe over H -- with the conjugation action of H on A, and source =
target = projection -- produces the base object T' modelling
W-bar[H x WA], and Y' -> T' is the comparison fibration.  The key
exactness contract: pulling Y' back along the zero section
WH -> T' gives exactly WG, elementwise.
"""

import numpy as np

from .errors import (NotAbelianKernel, SearchBudgetExceeded,
                     TruncationInsufficient, ValidationError)
from .groups import FiniteGroup, GroupHom, normal_closure, quotient_group
from .simplicial import (CELL_BUDGET, TruncatedBisimplicialSet,
                         TruncatedSimplicialGroup, _arr, _I,
                         check_simplicial_map, codiagonal,
                         constant_simplicial_group, edge_group_order,
                         pi0_group, pi0_sset, wbar, wbar_map)

__all__ = ["FibrationReport", "fibration_data", "constant_fibration",
           "truncate_simplicial_group"]


def truncate_simplicial_group(G, N):
    if N > G.N:
        raise TruncationInsufficient(
            f"cannot truncate at {N}: input stops at {G.N}")
    if N == G.N:
        return G
    return TruncatedSimplicialGroup(
        G.groups[:N + 1],
        [G.face[n] for n in range(N + 1)],
        [G.degen[n] if n < N else [] for n in range(N + 1)],
        name=G.name, validate=False)


def _action_levels(G, H, q):
    """Per level: the groupoid morphism groups over G and over H.

    Returns (T groups, s/t/e/r homs, TH groups, sH/eH homs, decode
    data) -- decode data maps canonical T codes back to (group part,
    kernel position) for the composition tables.
    """
    N = G.N
    out = {"T": [], "s": [], "t": [], "e": [], "r": [],
           "TH": [], "sH": [], "eH": [],
           "decT": [], "decTH": [], "mem": [], "pos": []}
    for n in range(N + 1):
        Gn, Hn, qn = G.groups[n], H.groups[n], q[n]
        A = qn.kernel()
        if not A.is_abelian():
            raise NotAbelianKernel(
                f"kernel at level {n} is nonabelian")
        mem = A.members
        nA = len(mem)
        pos = np.full(Gn.n, -1, dtype=_I)
        pos[mem] = np.arange(nA)
        codes = np.arange(Gn.n * nA, dtype=_I)
        g_my, a_my = codes // nA, codes % nA
        mul, inv = Gn.mul, Gn.inv

        # T = G x A:  (g,a)(g',a') = (g g', a^{g'} a')
        G1 = g_my[:, None]
        A1 = a_my[:, None]
        G2 = g_my[None, :]
        A2 = a_my[None, :]
        conjd = mul[mul[inv[G2], mem[A1]], G2]
        prod = mul[conjd, mem[A2]]
        if (pos[prod] < 0).any():
            raise ValidationError("kernel is not closed under the "
                                  "twisted product")
        T = FiniteGroup(mul[G1, G2] * nA + pos[prod])
        old = np.empty(T.n, dtype=_I)
        old[T.relabel] = np.arange(T.n)
        g_of, a_of = old // nA, old % nA
        enc = T.relabel.reshape(Gn.n, nA)
        s_hom = GroupHom(T, Gn, g_of)
        t_hom = GroupHom(T, Gn, mul[g_of, mem[a_of]])
        e_hom = GroupHom(Gn, T, enc[:, pos[0]])

        # TH = H x A via lifts:  (h,a)(h',a') = (h h', a^{lift h'} a')
        lift = np.full(Hn.n, -1, dtype=_I)
        for g in range(Gn.n - 1, -1, -1):
            lift[qn.image[g]] = g
        H1 = np.arange(Hn.n * nA, dtype=_I) // nA
        Ah1 = np.arange(Hn.n * nA, dtype=_I) % nA
        HH1, AA1 = H1[:, None], Ah1[:, None]
        HH2, AA2 = H1[None, :], Ah1[None, :]
        gl = lift[HH2]
        conjd = mul[mul[inv[gl], mem[AA1]], gl]
        prod = mul[conjd, mem[AA2]]
        TH = FiniteGroup(Hn.mul[HH1, HH2] * nA + pos[prod])
        oldH = np.empty(TH.n, dtype=_I)
        oldH[TH.relabel] = np.arange(TH.n)
        h_of, aH_of = oldH // nA, oldH % nA
        encH = TH.relabel.reshape(Hn.n, nA)
        sH_hom = GroupHom(TH, Hn, h_of)
        eH_hom = GroupHom(Hn, TH, encH[:, pos[0]])
        # (g,a) -> (q g, a): validity doubles as the proof that the
        # H-action by lifts is well defined on the abelian kernel
        r_hom = GroupHom(T, TH, encH[qn.image[g_of], pos[mem[a_of]]])

        out["T"].append(T)
        out["s"].append(s_hom)
        out["t"].append(t_hom)
        out["e"].append(e_hom)
        out["r"].append(r_hom)
        out["TH"].append(TH)
        out["sH"].append(sH_hom)
        out["eH"].append(eH_hom)
        out["decT"].append((g_of, a_of, enc))
        out["decTH"].append((h_of, aH_of, encH))
        out["mem"].append(mem)
        out["pos"].append(pos)
    return out


def _build_morphism_tsg(levels, decs, mem, pos, op_groups, ker_groups,
                        name):
    """levels: morphism FiniteGroups; decs: (g_of, a_of, enc) per
    level.  Operators act componentwise: ``op_groups`` supplies the
    action on the group part, ``ker_groups`` (the ambient simplicial
    group holding the kernels) the action on kernel members.
    """
    N = len(levels) - 1
    face = [[] for _ in range(N + 1)]
    degen = [[] for _ in range(N + 1)]

    def induced(n, tn, img, kimg):
        g_of, a_of, _ = decs[n]
        _, _, enc_t = decs[tn]
        gpart = img[g_of]
        apart = pos[tn][kimg[mem[n][a_of]]]
        if (apart < 0).any():
            raise ValidationError(
                "operator does not preserve the kernel")
        return GroupHom(levels[n], levels[tn], enc_t[gpart, apart])

    for n in range(1, N + 1):
        for i in range(n + 1):
            face[n].append(induced(n, n - 1,
                                   op_groups.face[n][i].image,
                                   ker_groups.face[n][i].image))
    for n in range(N):
        for i in range(n + 1):
            degen[n].append(induced(n, n + 1,
                                    op_groups.degen[n][i].image,
                                    ker_groups.degen[n][i].image))
    return TruncatedSimplicialGroup(levels, face, degen, name=name)


def _comp_fn(WMor, tgroups, decs, pos, mem, gmuls):
    """Chain composition on W-bar cells of the morphism groups:
    c((g,a),(g',a')) = (g, a a'), applied digitwise through the slot
    coding of W-bar cells.  ``gmuls`` multiplies kernel members in
    their ambient group."""
    ccd = []
    for n in range(len(tgroups)):
        g_of, a_of, enc = decs[n]
        prod = gmuls[n][mem[n][a_of[:, None]], mem[n][a_of[None, :]]]
        ccd.append(enc[g_of[:, None], pos[n][prod]])
    memo = {}

    def comp(q, m1, m2):
        key = (q, m1, m2)
        got = memo.get(key)
        if got is not None:
            return got
        xs, ys = WMor.cells[q][m1], WMor.cells[q][m2]
        zs = []
        for i in range(len(xs)):
            mrad = tgroups[q - i].n
            tab = ccd[q - i]
            cu, cv = int(xs[i]), int(ys[i])
            out = 0
            for jdig in reversed(range(i)):
                du = (cu // mrad ** jdig) % mrad
                dv = (cv // mrad ** jdig) % mrad
                out = out * mrad + int(tab[du, dv])
            zs.append(out)
        r = WMor.lookup(q)[tuple(zs)]
        memo[key] = r
        return r

    return comp


# ----------------------------------------------------------------------

class FibrationReport:
    """Everything `fibration_data` computed, with the verdicts."""

    __slots__ = (
        "N", "yprime", "target", "wg", "wh", "w", "f", "z", "j", "wq",
        "pullback_ok", "pullback_sizes", "pi0_yprime", "pi0_wbar_h",
        "pi1_yprime", "pi1_wbar_h", "pi0_h_order", "w_edge_onto",
        "pi1_iso", "central", "kernel_orders")

    def __init__(self, **kw):
        for k in self.__slots__:
            setattr(self, k, kw[k])

    @property
    def ok(self):
        return bool(self.pullback_ok and self.pi0_yprime
                    == self.pi0_wbar_h == 1 and self.pi1_iso)

    def as_dict(self):
        return {
            "N": self.N,
            "yprime_levels": list(self.yprime.sizes),
            "target_levels": list(self.target.sizes),
            "wbar_g_levels": list(self.wg.sizes),
            "wbar_h_levels": list(self.wh.sizes),
            "kernel_orders": list(self.kernel_orders),
            "central": self.central,
            "pullback_ok": self.pullback_ok,
            "pullback_sizes": [list(t) for t in self.pullback_sizes],
            "pi0": [self.pi0_yprime, self.pi0_wbar_h],
            "pi1_yprime": self.pi1_yprime,
            "pi1_wbar_h": self.pi1_wbar_h,
            "pi0_h_order": self.pi0_h_order,
            "w_edge_onto": self.w_edge_onto,
            "pi1_iso": self.pi1_iso,
            "ok": self.ok,
        }

    def __repr__(self):
        verdict = "ok" if self.ok else "FAILED"
        return (f"<fibration data N={self.N}, pullback="
                f"{self.pullback_ok}, pi1 iso={self.pi1_iso}: "
                f"{verdict}>")


def _groupoid_nerve(WOb, WMor, s_arrs, t_arrs, e_arrs, comp, N,
                    budget=CELL_BUDGET):
    """Triangle-truncated nerve of a groupoid internal to simplicial
    sets: (p, q)-cells are composable p-chains of level-q morphisms
    (objects at p = 0)."""
    sizes, cells = {}, {}
    for q in range(N + 1):
        sizes[(0, q)] = WOb.sizes[q]
        cells[(0, q)] = list(range(WOb.sizes[q]))
        by_src = {}
        for m in range(WMor.sizes[q]):
            by_src.setdefault(int(s_arrs[q][m]), []).append(m)
        chains = [(m,) for m in range(WMor.sizes[q])]
        for p in range(1, N - q + 1):
            if len(chains) > budget:
                raise SearchBudgetExceeded(
                    f"groupoid nerve cell ({p},{q}) exceeds {budget}")
            cells[(p, q)] = chains
            sizes[(p, q)] = len(chains)
            if p < N - q:
                new = []
                for t in chains:
                    for m2 in by_src.get(int(t_arrs[q][t[-1]]), ()):
                        new.append(t + (m2,))
                chains = new
    index = {k: {c: i for i, c in enumerate(v)}
             for k, v in cells.items() if k[0] >= 1}
    hf, vf, hd, vd = {}, {}, {}, {}
    for (p, q) in sizes:
        lvl = cells[(p, q)]
        n_cells = sizes[(p, q)]
        if p == 0:
            hf[(p, q)] = []
        elif p == 1:
            hf[(p, q)] = [
                _arr([int(t_arrs[q][c[0]]) for c in lvl]),
                _arr([int(s_arrs[q][c[0]]) for c in lvl])]
        else:
            fam = []
            for a in range(p + 1):
                col = np.empty(n_cells, dtype=_I)
                for idx, ch in enumerate(lvl):
                    if a == 0:
                        key = ch[1:]
                    elif a == p:
                        key = ch[:-1]
                    else:
                        key = (ch[:a - 1]
                               + (comp(q, ch[a - 1], ch[a]),)
                               + ch[a + 1:])
                    col[idx] = index[(p - 1, q)][key]
                fam.append(col)
            hf[(p, q)] = fam
        if p + q + 1 <= N:
            fam = []
            for a in range(p + 1):
                col = np.empty(n_cells, dtype=_I)
                for idx, ch in enumerate(lvl):
                    if p == 0:
                        key = (int(e_arrs[q][ch]),)
                    else:
                        if a == 0:
                            v = int(s_arrs[q][ch[0]])
                        else:
                            v = int(t_arrs[q][ch[a - 1]])
                        key = ch[:a] + (int(e_arrs[q][v]),) + ch[a:]
                    col[idx] = index[(p + 1, q)][key]
                fam.append(col)
            hd[(p, q)] = fam
        else:
            hd[(p, q)] = []
        if q >= 1:
            fam = []
            for b in range(q + 1):
                if p == 0:
                    fam.append(WOb.face[q][b].copy())
                else:
                    arr = WMor.face[q][b]
                    col = np.empty(n_cells, dtype=_I)
                    for idx, ch in enumerate(lvl):
                        key = tuple(int(arr[m]) for m in ch)
                        col[idx] = index[(p, q - 1)][key]
                    fam.append(col)
            vf[(p, q)] = fam
        else:
            vf[(p, q)] = []
        if p + q + 1 <= N:
            fam = []
            for b in range(q + 1):
                if p == 0:
                    fam.append(WOb.degen[q][b].copy())
                else:
                    arr = WMor.degen[q][b]
                    col = np.empty(n_cells, dtype=_I)
                    for idx, ch in enumerate(lvl):
                        key = tuple(int(arr[m]) for m in ch)
                        col[idx] = index[(p, q + 1)][key]
                    fam.append(col)
            vd[(p, q)] = fam
        else:
            vd[(p, q)] = []
    return TruncatedBisimplicialSet(N, sizes, hf, vf, hd, vd,
                                    triangle=True, cells=cells)


def _d0_power(W, n, i):
    cur = np.arange(W.sizes[n], dtype=_I)
    for k in range(i):
        cur = W.face[n - k][0][cur]
    return cur


def fibration_data(G, H, q, N=3, budget=CELL_BUDGET,
                   max_cosets=20000, validate=True):
    """Build Y' -> T' for q: G ->> H and verify the exactness
    contract.

    ``q`` is a levelwise GroupHom family.  Returns a FibrationReport
    with the total object, the comparison maps w (to W-bar H) and f
    (to the base), and the pullback/homotopy verdicts.  Raises
    NotAbelianKernel for nonabelian kernels and
    TruncationInsufficient when the inputs stop below N.
    """
    if G.N < N or H.N < N or len(q) < N + 1:
        raise TruncationInsufficient(
            f"fibration data at N={N} needs levels 0..{N}")
    G = truncate_simplicial_group(G, N)
    H = truncate_simplicial_group(H, N)
    q = list(q[:N + 1])
    for n, h in enumerate(q):
        if h.src is not G.groups[n] and h.src.fingerprint() != \
                G.groups[n].fingerprint():
            raise ValidationError(f"q at level {n} is miswired")
        if not h.is_surjective():
            raise ValidationError(f"q at level {n} is not onto")
    check_simplicial_map([h.image for h in q], G.sset(), H.sset())

    data = _action_levels(G, H, q)
    kernel_orders = [len(m) for m in data["mem"]]
    central = True
    for n in range(N + 1):
        Gn, mem = G.groups[n], data["mem"][n]
        if not (Gn.mul[np.ix_(range(Gn.n), mem)]
                == Gn.mul[np.ix_(mem, range(Gn.n))].T).all():
            central = False
    T_tsg = _build_morphism_tsg(data["T"], data["decT"], data["mem"],
                                data["pos"], G, G, "action morphisms")
    TH_tsg = _build_morphism_tsg(data["TH"], data["decTH"],
                                 data["mem"], data["pos"], H, G,
                                 "base morphisms")

    WG = wbar(G, budget=budget)
    WH = wbar(H, budget=budget)
    WT = wbar(T_tsg, budget=budget)
    WTH = wbar(TH_tsg, budget=budget)

    Ws = wbar_map(data["s"], WT, WG)
    Wt = wbar_map(data["t"], WT, WG)
    We = wbar_map(data["e"], WG, WT)
    Wr = wbar_map(data["r"], WT, WTH)
    WsH = wbar_map(data["sH"], WTH, WH)
    WeH = wbar_map(data["eH"], WH, WTH)
    Wq = wbar_map(q, WG, WH)
    if validate:
        for arrs, X, Y in ((Ws, WT, WG), (Wt, WT, WG), (We, WG, WT),
                           (Wr, WT, WTH), (WsH, WTH, WH),
                           (WeH, WH, WTH), (Wq, WG, WH)):
            check_simplicial_map(arrs, X, Y)

    gmuls = [Gn.mul for Gn in G.groups]
    compT = _comp_fn(WT, data["T"], data["decT"], data["pos"],
                     data["mem"], gmuls)
    compTH = _comp_fn(WTH, data["TH"], data["decTH"], data["pos"],
                      data["mem"], gmuls)

    BG = _groupoid_nerve(WG, WT, Ws, Wt, We, compT, N, budget)
    BH = _groupoid_nerve(WH, WTH, WsH, WsH, WeH, compTH, N, budget)
    if validate:
        BG.validate()
        BH.validate()
    yprime = codiagonal(BG, budget=budget)
    target = codiagonal(BH, budget=budget)

    # w: project to the slot-0 object (a W-bar G cell), then apply Wq
    w = [Wq[n][_arr([c[0] for c in yprime.cells[n]])]
         for n in range(N + 1)]

    # f: slotwise morphism images under Wr (objects under Wq)
    f = []
    for n in range(N + 1):
        lk = target.lookup(n)
        col = np.empty(yprime.sizes[n], dtype=_I)
        for idx, xs in enumerate(yprime.cells[n]):
            zs = [int(Wq[n][xs[0]])]
            for i in range(1, n + 1):
                ch = BG.cells[(i, n - i)][xs[i]]
                img = tuple(int(Wr[n - i][m]) for m in ch)
                zs.append(BH.lookup(i, n - i)[img])
            col[idx] = lk[tuple(zs)]
        f.append(col)

    # zero section z: WH -> T', identity chains over the d0-orbit
    z = []
    for n in range(N + 1):
        lk = target.lookup(n)
        col = np.empty(WH.sizes[n], dtype=_I)
        obj = [_d0_power(WH, n, i) for i in range(n + 1)]
        for x in range(WH.sizes[n]):
            zs = [int(obj[0][x])]
            for i in range(1, n + 1):
                o = int(obj[i][x])
                ch = (int(WeH[n - i][o]),) * i
                zs.append(BH.lookup(i, n - i)[ch])
            col[x] = lk[tuple(zs)]
        z.append(col)

    # j: WG -> Y', same shape with We
    j = []
    for n in range(N + 1):
        lk = yprime.lookup(n)
        col = np.empty(WG.sizes[n], dtype=_I)
        obj = [_d0_power(WG, n, i) for i in range(n + 1)]
        for u in range(WG.sizes[n]):
            zs = [int(obj[0][u])]
            for i in range(1, n + 1):
                o = int(obj[i][u])
                ch = (int(We[n - i][o]),) * i
                zs.append(BG.lookup(i, n - i)[ch])
            col[u] = lk[tuple(zs)]
        j.append(col)

    if validate:
        check_simplicial_map(w, yprime, WH)
        check_simplicial_map(f, yprime, target)
        check_simplicial_map(z, WH, target)
        check_simplicial_map(j, WG, yprime)

    # the exact pullback contract: {(y, x): f y = z x} is the image
    # of u |-> (j u, Wq u), bijectively, at every level
    pullback_ok = True
    pullback_sizes = []
    for n in range(N + 1):
        zpos = {}
        for x in range(WH.sizes[n]):
            zpos.setdefault(int(z[n][x]), []).append(x)
        P = set()
        for y in range(yprime.sizes[n]):
            for x in zpos.get(int(f[n][y]), ()):
                P.add((y, x))
        img = {(int(j[n][u]), int(Wq[n][u]))
               for u in range(WG.sizes[n])}
        if len(img) != WG.sizes[n] or P != img:
            pullback_ok = False
        pullback_sizes.append((len(P), WG.sizes[n]))

    pi0_y = pi0_sset(yprime)[0]
    pi0_wh = pi0_sset(WH)[0]
    pi1_y = edge_group_order(yprime, max_cosets=max_cosets)
    pi1_wh = edge_group_order(WH, max_cosets=max_cosets)
    pi0_h = pi0_group(H)[0].n
    onto = len(set(int(v) for v in w[1])) == WH.sizes[1]
    pi1_iso = bool(pi1_y == pi1_wh == pi0_h and onto
                   and pi0_y == pi0_wh == 1)

    return FibrationReport(
        N=N, yprime=yprime, target=target, wg=WG, wh=WH, w=w, f=f,
        z=z, j=j, wq=Wq, pullback_ok=pullback_ok,
        pullback_sizes=pullback_sizes, pi0_yprime=pi0_y,
        pi0_wbar_h=pi0_wh, pi1_yprime=pi1_y, pi1_wbar_h=pi1_wh,
        pi0_h_order=pi0_h, w_edge_onto=onto, pi1_iso=pi1_iso,
        central=central, kernel_orders=kernel_orders)


def constant_fibration(G, H, qhom, N=3, **kw):
    """fibration_data for a constant extension 1 -> A -> G -> H -> 1."""
    CG = constant_simplicial_group(G, N)
    CH = constant_simplicial_group(H, N)
    return fibration_data(CG, CH, [qhom] * (N + 1), N=N, **kw)


def random_fibration_input(rng, kernel_max=4):
    """A random surjection q: G ->> H with abelian kernel, as (G, H, q).

    Draws G from a small pool and the kernel from the normal abelian
    subgroups of G generated by one or two closure seeds.
    """
    from .catalog import abelian, cyclic, dihedral, quaternion8, symmetric
    pool = (
        lambda: cyclic(int(rng.choice([2, 3, 4, 6, 8]))),
        lambda: abelian([2, 2]),
        lambda: abelian([2, 4]),
        lambda: abelian([2, 2, 2]),
        lambda: abelian([3, 3]),
        lambda: dihedral(3),
        lambda: dihedral(4),
        lambda: quaternion8(),
        lambda: symmetric(3),
    )
    for _ in range(64):
        G = pool[int(rng.integers(0, len(pool)))]()
        seeds = [int(rng.integers(1, G.n))]
        if rng.integers(0, 2):
            seeds.append(int(rng.integers(1, G.n)))
        A = normal_closure(G, seeds)
        if not (1 < len(A) < G.n) or len(A) > kernel_max:
            continue
        if not A.is_abelian():
            continue
        H, q = quotient_group(G, A)
        return G, H, q
    G = abelian([2, 2])
    A = G.subgroup([0, 1])
    H, q = quotient_group(G, A)
    return G, H, q
