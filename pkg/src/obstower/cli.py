"""Command line: problem specs in, deterministic reports out.

A problem spec is a small JSON object whose fields are documented in
docs/schemas.md.  Reports echo the canonicalized input, embed its
sha256, and keep wall-clock data in one ``timing`` subobject so that
everything outside it is byte-identical across runs.  ``report_sha256``
is the sha256 of the canonical rendering of the report with ``timing``
and the hash field itself absent.

Exit codes: 0 success (including mathematically "negative" outcomes
like a blocked tower), 2 validation error, 3 budget exhaustion.
``selftest`` uses 1 for check failures.
"""

import argparse
import hashlib
import json
import os
import sys
import time

from . import __version__
from .errors import (DegreeTooLarge, IncompatibleLocalData, ObstowerError,
                     SearchBudgetExceeded, TruncationInsufficient)

SCHEMA_VERSION = 1

# Documented budget defaults; OBSTOWER_BUDGET_PROFILE selects a row,
# --budget-* flags override single entries.  "order" is additionally
# capped by the library-wide group-order limit.
PROFILES = {
    "default": {"order": 512, "homs": 10_000_000, "degree": 3,
                "trunc": 6, "cells": 300_000},
    "small": {"order": 64, "homs": 200_000, "degree": 2,
              "trunc": 4, "cells": 40_000},
}

_BUDGET_EXC = (SearchBudgetExceeded, DegreeTooLarge, TruncationInsufficient)


class SpecError(Exception):
    """The problem spec itself is malformed or does not resolve."""


class BudgetExhausted(Exception):
    pass


def _cjson(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _sha256(text):
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _plain(obj):
    """Recursively coerce report data to JSON-native types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (str, bool)) or obj is None:
        return obj
    if isinstance(obj, float):
        return float(obj)
    if isinstance(obj, int):
        return int(obj)
    if hasattr(obj, "item"):    # numpy scalar
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__} into a report")


def _check_keys(spec, allowed, where):
    extra = set(spec) - set(allowed) - {"schema_version", "kind"}
    if extra:
        raise SpecError(f"unknown key(s) in {where}: {sorted(extra)}")


def _need(spec, key, where):
    if key not in spec:
        raise SpecError(f"'{key}' is required in {where}")
    return spec[key]


# ---------------------------------------------------------------------------
# reference resolution

def _group(ref, budgets):
    from . import catalog
    from .groups import FiniteGroup
    if not isinstance(ref, dict):
        raise SpecError("a group reference must be an object")
    if "table" in ref:
        _check_keys(ref, ("table", "generators"), "group reference")
        G = FiniteGroup(ref["table"], generators=ref.get("generators"))
    elif "name" in ref:
        _check_keys(ref, ("name", "args"), "group reference")
        args = ref.get("args", [])
        if not isinstance(args, list):
            raise SpecError("group 'args' must be a list")
        G = catalog.by_name(ref["name"], *args)
    else:
        raise SpecError("a group reference needs 'name' or 'table'")
    if G.n > budgets["order"]:
        raise BudgetExhausted(
            f"group order {G.n} exceeds the order budget {budgets['order']}")
    return G


def _subgroup(G, ref, default_full=True):
    if ref is None:
        return G.full_subgroup() if default_full else G.trivial_subgroup()
    if ref == "full":
        return G.full_subgroup()
    if isinstance(ref, dict) and "members" in ref:
        _check_keys(ref, ("members",), "subgroup reference")
        return G.subgroup([int(x) for x in ref["members"]])
    if isinstance(ref, dict) and "generators" in ref:
        _check_keys(ref, ("generators",), "subgroup reference")
        gens = [int(x) for x in ref["generators"]]
        return G.subgroup(sorted(G.closure(gens)))
    raise SpecError("a subgroup reference needs 'members' or 'generators'")


def _hom(src, dst, ref, where="hom reference"):
    from .groups import GroupHom, hom_from_gen_images
    if isinstance(ref, dict) and "gen_images" in ref:
        return hom_from_gen_images(src, dst, ref["gen_images"])
    if isinstance(ref, dict) and "image" in ref:
        import numpy as np
        return GroupHom(src, dst, np.asarray(ref["image"], dtype=np.int64))
    raise SpecError(f"{where} needs 'gen_images' or 'image'")


def _module(G, ref):
    from .modules import module_from_gen_action, trivial_module
    if not isinstance(ref, dict):
        raise SpecError("a module reference must be an object")
    if "trivial" in ref:
        _check_keys(ref, ("trivial",), "module reference")
        return trivial_module(G, [int(d) for d in ref["trivial"]])
    if "orders" in ref:
        _check_keys(ref, ("orders", "gen_mats"), "module reference")
        return module_from_gen_action(
            G, ref["orders"], _need(ref, "gen_mats", "module reference"))
    raise SpecError("a module reference needs 'trivial' or 'orders'")


# ---------------------------------------------------------------------------
# subcommand bodies: each takes (spec, budgets) and returns
# (results dict, list of text lines)

def _tower_pieces(spec, budgets):
    from .groups import GroupHom
    from .tower import tower_from_lcs
    Pi = _group(_need(spec, "pi", "tower spec"), budgets)
    N = _subgroup(Pi, spec.get("n"))
    depth = int(spec.get("depth", 3))
    if depth < 1:
        raise SpecError("depth must be >= 1")
    start = int(spec.get("start_level", 0))
    tower = tower_from_lcs(Pi, N, depth)
    if not 0 <= start <= tower.depth:
        raise SpecError(f"start_level {start} outside tower 0..{tower.depth}")
    psiref = spec.get("psi0", "identity")
    G0 = tower.group_at(start)
    if psiref == "identity":
        psi0 = GroupHom.identity(G0)
    elif isinstance(psiref, dict):
        _check_keys(psiref, ("group", "gen_images", "image"), "psi0")
        G = _group(_need(psiref, "group", "psi0"), budgets)
        psi0 = _hom(G, G0, psiref, "psi0")
    else:
        raise SpecError("psi0 must be \"identity\" or an object")
    return tower, psi0, start


def cmd_tower(spec, budgets):
    from .tower import e1_page, run_tower
    _check_keys(spec, ("pi", "n", "depth", "start_level", "psi0",
                       "explore", "e1_window"), "tower spec")
    tower, psi0, start = _tower_pieces(spec, budgets)
    explore = spec.get("explore", "canonical")
    if explore not in ("canonical", "tree"):
        raise SpecError("explore must be 'canonical' or 'tree'")
    rep = run_tower(psi0, tower, start_level=start, explore=explore)
    results = {
        "level_orders": [tower.group_at(k).n
                         for k in range(tower.depth + 1)],
        "lift": rep.as_dict(),
    }
    lines = [f"tower levels (orders): "
             + " ".join(str(n) for n in results["level_orders"])]
    for e in rep.entries:
        obs = ",".join(str(c) for c in e.obstruction_coords) or "-"
        lines.append(
            f"level {e.level}: H2={list(e.h2_invariants)} "
            f"obstruction=[{obs}] lift_classes={e.lift_class_count}")
    if rep.completed:
        lines.append("lift: completed")
    else:
        lines.append(f"lift: blocked at level {rep.blocked_level}")
    if "e1_window" in spec:
        w = spec["e1_window"]
        if (not isinstance(w, list) or len(w) != 2):
            raise SpecError("e1_window must be [s_max, t_max]")
        page = e1_page(tower, psi0.src, (int(w[0]), int(w[1])),
                       psi0=psi0 if start == 0 else None)
        results["e1"] = page.as_dict()
        lines.append("")
        lines.append(page.table_text())
    return results, lines


def cmd_reciprocity(spec, budgets):
    from .groups import GroupHom
    from .localglobal import (LocalGlobalSystem, Place, adelic_cohomology,
                              compact_support, les_check,
                              reciprocity_obstruction, reciprocity_tower)
    _check_keys(spec, ("global", "places", "module", "up_to", "ramified",
                       "local_classes", "tower"), "reciprocity spec")
    Gg = _group(_need(spec, "global", "reciprocity spec"), budgets)
    places = []
    for pref in _need(spec, "places", "reciprocity spec"):
        _check_keys(pref, ("label", "group", "decomposition", "inertia"),
                    "place")
        label = str(_need(pref, "label", "place"))
        if "group" in pref:
            Gv = _group(pref["group"], budgets)
            dec = _hom(Gv, Gg, _need(pref, "decomposition", f"place {label}"),
                       f"decomposition at {label}")
        else:
            Gv, dec = Gg, GroupHom.identity(Gg)
        inertia = None
        if "inertia" in pref:
            inertia = _subgroup(Gv, pref["inertia"], default_full=False)
        places.append(Place(label, dec, inertia))
    sysm = LocalGlobalSystem(Gg, places)
    M = _module(Gg, _need(spec, "module", "reciprocity spec"))
    up_to = int(spec.get("up_to", 2))
    if up_to > budgets["degree"]:
        raise BudgetExhausted(
            f"degree {up_to} exceeds the degree budget {budgets['degree']}")
    ram = spec.get("ramified")
    if ram is not None:
        ram = [str(x) for x in ram]

    results = {
        "labels": sysm.labels,
        "minimal_ramified": sysm.ramified_places(M),
        "degrees": {},
    }
    lines = [f"places: {' '.join(sysm.labels)}"]
    for n in range(up_to + 1):
        ad = adelic_cohomology(sysm, M, n, ram)
        hc, _ = compact_support(sysm, M, n, ram)
        results["degrees"][str(n)] = {
            "adelic": list(ad.total_invariants),
            "adelic_per_place": {lb: list(H.invariants)
                                 for lb, H in ad.per_place.items()},
            "compact_support": list(hc.invariants),
        }
        lines.append(f"degree {n}: adelic={list(ad.total_invariants)} "
                     f"H_c={list(hc.invariants)}")
    les = les_check(sysm, M, up_to=up_to, ramified=ram)
    results["les"] = les.as_dict()
    lines.append("LES exact" if les.exact
                 else f"LES NOT exact at {les.failures()}")

    if "local_classes" in spec:
        lc = spec["local_classes"]
        if isinstance(lc, dict):
            lc = {str(k): tuple(int(c) for c in v) for k, v in lc.items()}
        else:
            lc = [tuple(int(c) for c in v) for v in lc]
        obs = reciprocity_obstruction(sysm, M, lc, ram)
        results["obstruction"] = {
            "coords": list(obs.coords),
            "h2_c": list(obs.hgroup.invariants),
            "zero": obs.is_zero(),
        }
        lines.append(f"reciprocity obstruction: {list(obs.coords)} "
                     f"in H2_c={list(obs.hgroup.invariants)}"
                     + (" (vanishes)" if obs.is_zero() else ""))

    if "tower" in spec:
        tw = dict(spec["tower"])
        _check_keys(tw, ("pi", "n", "depth", "start_level", "psi0"),
                    "reciprocity tower spec")
        tower, psi0, start = _tower_pieces(tw, budgets)
        if psi0.src.fingerprint() != Gg.fingerprint():
            raise SpecError(
                "tower psi0 must start from the global group")
        try:
            trep = reciprocity_tower(sysm, tower, psi0, {},
                                     start_level=start, ramified=ram)
            results["tower"] = trep.as_dict()
            results["tower"]["incompatible"] = False
            lines.append("tower: completed" if trep.completed else
                         f"tower: blocked at level {trep.blocked_level}")
        except IncompatibleLocalData as e:
            partial = e.report.as_dict() if e.report is not None else None
            results["tower"] = {"incompatible": True,
                                "message": str(e), "partial": partial}
            lines.append(f"tower: no adelic continuation ({e})")
    return results, lines


def cmd_cohomology(spec, budgets):
    from .cohomology import cohomology
    _check_keys(spec, ("group", "module", "degrees", "up_to"),
                "cohomology spec")
    G = _group(_need(spec, "group", "cohomology spec"), budgets)
    M = _module(G, _need(spec, "module", "cohomology spec"))
    if "degrees" in spec:
        degrees = [int(n) for n in spec["degrees"]]
    else:
        degrees = list(range(int(spec.get("up_to", 2)) + 1))
    for n in degrees:
        if n < 0:
            raise SpecError("degrees must be >= 0")
        if n > budgets["degree"]:
            raise BudgetExhausted(
                f"degree {n} exceeds the degree budget {budgets['degree']}")
    results = {"group_order": G.n, "module_orders": list(M.orders),
               "degrees": {}}
    lines = [f"|G| = {G.n}, module orders {list(M.orders)}"]
    for n in degrees:
        H = cohomology(G, M, n)
        results["degrees"][str(n)] = {"invariants": list(H.invariants),
                                      "order": H.order}
        lines.append(f"H^{n}: invariants={list(H.invariants)} "
                     f"order={H.order}")
    return results, lines


def cmd_lie(spec, budgets):
    from .liegraded import (GradedSpace, hall_basis, ls_weight_report,
                            modular_h1, witt_product_check, witt_rank)
    _check_keys(spec, ("mode", "m_max", "s", "lambda_weight",
                       "d_max", "n_max", "genfunc_order"), "lie spec")
    mode = _need(spec, "mode", "lie spec")
    if mode == "ls":
        m_max = int(_need(spec, "m_max", "lie spec"))
        s = int(_need(spec, "s", "lie spec"))
        lam = int(spec.get("lambda_weight", -1))
        rep = ls_weight_report(m_max, s, lam_weight=lam)
        results = rep.as_dict()
        lines = [f"L_{s} weights (m_max={m_max}, lambda weight {lam}):"]
        for w, d in sorted(rep.space.items()):
            lines.append(f"  weight {w:>4}: dim {d}")
        lines.append(f"E1 diagonal vanishes: {rep.e1_diag_zero}")
        return results, lines
    if mode == "witt":
        d_max = int(spec.get("d_max", 4))
        n_max = int(spec.get("n_max", 8))
        tmax = int(spec.get("genfunc_order", 8))
        if d_max < 1 or n_max < 1:
            raise SpecError("d_max and n_max must be >= 1")
        table, agree = {}, True
        lines = ["d  n  witt  hall"]
        for d in range(1, d_max + 1):
            for n in range(1, n_max + 1):
                w = witt_rank(d, n)
                h = len(hall_basis([1] * d, n))
                table[f"{d},{n}"] = {"witt": w, "hall": h}
                agree = agree and (w == h)
                lines.append(f"{d}  {n}  {w:>4}  {h:>4}")
        gen_ok = all(
            witt_product_check(GradedSpace({1: d}), tmax=tmax)
            for d in range(1, d_max + 1))
        results = {"table": table, "hall_matches_witt": agree,
                   "genfunc_order": tmax, "genfunc_ok": gen_ok}
        lines.append(f"hall == witt everywhere: {agree}; "
                     f"product identity to t^{tmax}: {gen_ok}")
        return results, lines
    if mode == "modular":
        m_max = int(spec.get("m_max", 12))
        results = {"h1": {}}
        lines = ["m   H^1(SL2(Z), V_m)(-m) weights"]
        for m in range(0, m_max + 1, 2):
            sp = modular_h1(m)
            results["h1"][str(m)] = sp.as_dict()
            lines.append(f"{m:<3} {dict(sp.items())}")
        return results, lines
    raise SpecError(f"unknown lie mode {mode!r}")


def cmd_simplicial(spec, budgets):
    _check_keys(spec, ("suite", "count", "seed", "n", "kmax", "group",
                       "up_to"), "simplicial-check spec")
    suite = _need(spec, "suite", "simplicial-check spec")
    N = int(spec.get("n", 3))
    if N > budgets["trunc"]:
        raise BudgetExhausted(
            f"truncation {N} exceeds the budget {budgets['trunc']}")

    if suite == "wbar":
        from .simplicial import edge_group_order, homology, wbar
        G = _group(_need(spec, "group", "wbar suite"), budgets)
        up_to = int(spec.get("up_to", N))
        if up_to > budgets["trunc"]:
            raise BudgetExhausted(
                f"truncation {up_to} exceeds the budget {budgets['trunc']}")
        from .simplicial import constant_simplicial_group
        W = wbar(constant_simplicial_group(G, up_to), up_to=up_to,
                 budget=budgets["cells"])
        hom = homology(W)
        results = {
            "sizes": list(W.sizes),
            "homology": [{"free": f, "torsion": list(t)} for f, t in hom],
            "edge_group_order": edge_group_order(W),
        }
        lines = [f"Wbar sizes: {results['sizes']}",
                 "homology: " + "; ".join(
                     f"H_{k}=Z^{f}+{list(t)}"
                     for k, (f, t) in enumerate(hom)),
                 f"edge-path group order: {results['edge_group_order']}"]
        return results, lines

    import numpy as np
    count = int(spec.get("count", 10))
    seed = int(spec.get("seed", 0))
    if count < 1:
        raise SpecError("count must be >= 1")
    rng = np.random.default_rng(seed)
    cases, passes = [], 0

    if suite == "diag-codiag":
        from .simplicial import diag_vs_codiag, random_bisimplicial
        kmax = int(spec.get("kmax", 2))
        for i in range(count):
            X = random_bisimplicial(rng, N=N, kmax=kmax)
            rep = diag_vs_codiag(X)
            ok = rep.equal and rep.cone_acyclic
            passes += ok
            cases.append({"sizes": {f"{p},{q}": X.sizes[(p, q)]
                                    for p, q in sorted(X.grid())},
                          "equal": rep.equal,
                          "cone_acyclic": rep.cone_acyclic})
    elif suite == "moore":
        from .simplicial import moore_homotopy, random_abelian_tsg, wbar_group
        for i in range(count):
            A = random_abelian_tsg(rng, N=N)
            W = wbar_group(A, up_to=N, budget=budgets["cells"])
            pa = moore_homotopy(A, up_to=N - 2)
            pw = moore_homotopy(W, up_to=N - 1)
            ok = pw[0] == () and all(pw[i + 1] == pa[i]
                                     for i in range(N - 1))
            passes += ok
            cases.append({"orders": [g.n for g in A.groups],
                          "pi_A": [list(t) for t in pa],
                          "pi_WA": [list(t) for t in pw],
                          "shifted": ok})
    elif suite == "pullback":
        from .fibration import constant_fibration, random_fibration_input
        for i in range(count):
            G, H, q = random_fibration_input(rng)
            rep = constant_fibration(G, H, q, N=N,
                                     budget=budgets["cells"])
            ok = rep.ok
            passes += ok
            cases.append({"source_order": G.n, "base_order": H.n,
                          "kernel": rep.kernel_orders[0],
                          "pullback": rep.pullback_ok,
                          "pi1_iso": rep.pi1_iso, "ok": ok})
    else:
        raise SpecError(f"unknown suite {suite!r}")

    results = {"suite": suite, "count": count, "seed": seed,
               "passes": passes, "all_ok": passes == count,
               "cases": cases}
    lines = [f"suite {suite}: {passes}/{count} pass"]
    return results, lines


HANDLERS = {
    "tower": cmd_tower,
    "reciprocity": cmd_reciprocity,
    "cohomology": cmd_cohomology,
    "lie": cmd_lie,
    "simplicial-check": cmd_simplicial,
}


# ---------------------------------------------------------------------------
# selftest: a handful of frozen values, independent of any spec file

def cmd_selftest(out=None):
    checks = []

    def check(name, fn):
        checks.append((name, fn))

    def _cohom():
        from .catalog import cyclic, klein_four, quaternion8
        from .cohomology import cohomology
        from .modules import trivial_module
        Z4 = cyclic(4)
        assert cohomology(Z4, trivial_module(Z4, [2]), 2).invariants == (2,)
        V4 = klein_four()
        F2 = trivial_module(V4, [2])
        assert [cohomology(V4, F2, n).order for n in range(4)] == \
            [2, 4, 8, 16]
        Q8 = quaternion8()
        F2q = trivial_module(Q8, [2])
        assert [cohomology(Q8, F2q, n).order for n in range(4)] == \
            [2, 4, 4, 2]
    check("cohomology of small groups", _cohom)

    def _tower():
        from .catalog import quaternion8
        from .groups import GroupHom
        from .tower import run_tower, tower_from_lcs
        Q8 = quaternion8()
        tw = tower_from_lcs(Q8, Q8.full_subgroup(), 2)
        rep = run_tower(GroupHom.identity(tw.group_at(1)), tw,
                        start_level=1)
        assert not rep.completed and rep.blocked_level == 2
        assert any(rep.entries[-1].obstruction_coords)
    check("quaternion tower obstruction", _tower)

    def _lie():
        from .liegraded import hall_basis, ls_weight_report, witt_rank
        assert witt_rank(2, 5) == 6 and witt_rank(2, 6) == 9
        assert witt_rank(3, 2) == 3
        assert len(hall_basis([1, 1], 5)) == 6
        rep = ls_weight_report(10, 1)
        assert dict(rep.space.items()) == \
            {1: 22, 4: 3, 6: 5, 8: 7, 10: 9, 12: 11}
        assert rep.e1_diag_zero
    check("free-Lie ranks and modular weights", _lie)

    def _wbar():
        from .catalog import cyclic
        from .simplicial import (constant_simplicial_group, homology,
                                 wbar)
        W = wbar(constant_simplicial_group(cyclic(2), 4))
        assert homology(W) == [(1, ()), (0, (2,)), (0, ()), (0, (2,))]
    check("classifying space of Z/2", _wbar)

    def _lg():
        from .catalog import cyclic
        from .groups import GroupHom
        from .localglobal import (LocalGlobalSystem, Place,
                                  compact_support,
                                  reciprocity_obstruction)
        from .modules import trivial_module
        Z2 = cyclic(2)
        sysd = LocalGlobalSystem(
            Z2, [Place("p", GroupHom.identity(Z2)),
                 Place("q", GroupHom.identity(Z2))])
        M = trivial_module(Z2, [2])
        assert compact_support(sysd, M, 2)[0].invariants == (2,)
        obs = reciprocity_obstruction(sysd, M, ((1,), (0,)))
        assert not obs.is_zero()
    check("two-place reciprocity obstruction", _lg)

    def _backend():
        from .kernels import BACKEND, available_backends
        assert BACKEND in available_backends()
    check("kernel backend", _backend)

    failures = 0
    lines = []
    for name, fn in checks:
        try:
            fn()
            lines.append(f"ok   {name}")
        except Exception as e:        # noqa: BLE001 - report and move on
            failures += 1
            lines.append(f"FAIL {name}: {type(e).__name__}: {e}")
    lines.append(f"{len(checks) - failures}/{len(checks)} checks pass")
    for ln in lines:
        print(ln)
    if out:
        rep = {"schema_version": SCHEMA_VERSION, "kind": "selftest",
               "tool": _tool_stamp(),
               "results": {"lines": lines,
                           "passes": len(checks) - failures,
                           "total": len(checks)}}
        rep["report_sha256"] = _sha256(_cjson(rep))
        _write_out(out, rep)
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# report plumbing

def _tool_stamp():
    from .kernels import BACKEND
    return {"name": "obstower", "version": __version__,
            "backend": BACKEND}


def _write_out(path, rep):
    payload = json.dumps(rep, indent=2, sort_keys=True) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(payload)


def _budgets(args):
    profile = os.environ.get("OBSTOWER_BUDGET_PROFILE", "default")
    if profile not in PROFILES:
        raise SpecError(
            f"unknown budget profile {profile!r} "
            f"(have: {', '.join(sorted(PROFILES))})")
    b = dict(PROFILES[profile])
    for key in b:
        val = getattr(args, f"budget_{key}", None)
        if val is not None:
            if val < 1:
                raise SpecError(f"--budget-{key} must be positive")
            b[key] = val
    return b


def _load_spec(path, kind):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            spec = json.load(fh)
    except OSError as e:
        raise SpecError(f"cannot read spec: {e}")
    except json.JSONDecodeError as e:
        raise SpecError(f"spec is not valid JSON: {e}")
    if not isinstance(spec, dict):
        raise SpecError("spec must be a JSON object")
    sv = spec.get("schema_version", SCHEMA_VERSION)
    if sv != SCHEMA_VERSION:
        raise SpecError(f"unsupported schema_version {sv!r}")
    if spec.get("kind", kind) != kind:
        raise SpecError(
            f"spec kind {spec.get('kind')!r} does not match "
            f"subcommand {kind!r}")
    return spec


def build_parser():
    p = argparse.ArgumentParser(
        prog="obstower",
        description="Obstruction towers, local-global cones and "
                    "simplicial checks for finite group homomorphisms.")
    p.add_argument("--version", action="version",
                   version=f"obstower {__version__}")
    sub = p.add_subparsers(dest="cmd")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="problem spec (JSON file)")
    common.add_argument("--out", help="write the JSON report here")
    common.add_argument("--format", choices=("json", "text"),
                        default="json", help="stdout format")
    common.add_argument("--jobs", type=int, default=1,
                        help="worker cap (results never depend on it)")
    for key, hint in (("order", "largest allowed group order"),
                      ("homs", "hom-search node cap"),
                      ("degree", "largest cohomological degree"),
                      ("trunc", "largest simplicial truncation"),
                      ("cells", "cell cap for simplicial builds")):
        common.add_argument(f"--budget-{key}", type=int, default=None,
                            dest=f"budget_{key}", help=hint)

    for kind in ("tower", "reciprocity", "cohomology", "simplicial-check"):
        sp = sub.add_parser(kind, parents=[common],
                            help=f"run a {kind} problem spec")
        sp.set_defaults(kind=kind, needs_spec=True)

    lie = sub.add_parser("lie", parents=[common],
                         help="free-Lie ranks and modular weight tables")
    lie.set_defaults(kind="lie", needs_spec=False)
    lie.add_argument("--ls", action="store_true",
                     help="graded CoLie weight table")
    lie.add_argument("--witt", action="store_true",
                     help="hall-vs-witt rank table")
    lie.add_argument("--modular", action="store_true",
                     help="modular H^1 weight dimensions")
    lie.add_argument("--mmax", type=int, default=None)
    lie.add_argument("--s", type=int, default=None)
    lie.add_argument("--lam-weight", type=int, default=None)
    lie.add_argument("--dmax", type=int, default=None)
    lie.add_argument("--nmax", type=int, default=None)

    st = sub.add_parser("selftest", help="run the built-in checks")
    st.add_argument("--out", help="write the JSON report here")
    st.set_defaults(kind="selftest", needs_spec=False)
    return p


def _lie_spec_from_flags(args):
    spec = {"kind": "lie"}
    picked = [m for m, on in (("ls", args.ls), ("witt", args.witt),
                              ("modular", args.modular)) if on]
    if len(picked) != 1:
        raise SpecError("pick exactly one of --ls / --witt / --modular")
    spec["mode"] = picked[0]
    if args.mmax is not None:
        spec["m_max"] = args.mmax
    if args.s is not None:
        spec["s"] = args.s
    if args.lam_weight is not None:
        spec["lambda_weight"] = args.lam_weight
    if args.dmax is not None:
        spec["d_max"] = args.dmax
    if args.nmax is not None:
        spec["n_max"] = args.nmax
    return spec


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.cmd is None:
        build_parser().print_help()
        return 2
    if args.kind == "selftest":
        return cmd_selftest(out=args.out)

    try:
        budgets = _budgets(args)
        if args.kind == "lie" and not args.spec:
            spec = _lie_spec_from_flags(args)
        else:
            if not args.spec:
                raise SpecError("--spec is required")
            spec = _load_spec(args.spec, args.kind)
    except SpecError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    echo = _plain(spec)
    echo.setdefault("kind", args.kind)
    rep = {
        "schema_version": SCHEMA_VERSION,
        "kind": args.kind,
        "tool": _tool_stamp(),
        "input": echo,
        "input_sha256": _sha256(_cjson(echo)),
    }
    t0 = time.time()
    code = 0
    lines = []
    try:
        results, lines = HANDLERS[args.kind](spec, budgets)
        rep["ok"] = True
        rep["results"] = _plain(results)
    except (BudgetExhausted,) + _BUDGET_EXC as e:
        rep["ok"] = False
        rep["error"] = {"type": type(e).__name__, "message": str(e)}
        code = 3
    except (SpecError, ObstowerError, ValueError, KeyError) as e:
        rep["ok"] = False
        rep["error"] = {"type": type(e).__name__, "message": str(e)}
        code = 2
    rep["report_sha256"] = _sha256(_cjson(rep))
    rep["timing"] = {"total_s": round(time.time() - t0, 6),
                     "jobs": args.jobs}

    if args.out:
        _write_out(args.out, rep)
    if args.format == "text":
        for ln in lines:
            print(ln)
        if not rep["ok"]:
            print(f"error: {rep['error']['type']}: "
                  f"{rep['error']['message']}")
    elif not args.out:
        print(json.dumps(rep, indent=2, sort_keys=True))
    return code


if __name__ == "__main__":
    sys.exit(main())
