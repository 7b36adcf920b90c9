"""Acceptance criteria, one test each, run at their stated tolerances.

Every test times itself against its runtime budget and prints a PASS/FAIL
line (also collected into the terminal summary by conftest).
"""
import itertools
import random
import time
from math import comb

import numpy as np
from gmpy2 import mpq

from esconvex.constructions import (
    DISTRIBUTIONS,
    es2_lower_construction,
    karolyi_valtr,
    mc_any,
    random_pointset,
    supported_clusters,
    verify_mc_recurrence,
)
from esconvex.cupcap import (
    cupcap_threshold,
    extremal_cupcap_set,
    find_cap_or_cup,
    is_chain,
    largest_cap,
    largest_cup,
)
from esconvex.geometry import (
    ABOVE,
    convex_hull,
    hulls_disjoint,
    is_convex_position,
    is_general_position,
    segment_relation,
    verify_separation,
)
from esconvex.pipeline import PipelineParams, StageFailure, find_convex_subset_3d, replay
from esconvex.posets import FinitePoset, dilworth, verify_dilworth
from esconvex.positive_fraction import (
    connected_subgraph_bound,
    count_connected_subgraphs,
    count_realizable_facet_sets,
    disjoint_separation_independent_set,
    region_nonempty,
    verify_disjoint_sets_convex,
)
from esconvex.separation import check_ham_sandwich, ham_sandwich_oriented, is_two_separated, size_ledger_bound, two_separate


def _bfs_connected(G, S):
    S = set(S)
    seen, stack = {min(S)}, [min(S)]
    while stack:
        v = stack.pop()
        for w in G[v]:
            if w in S and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen == S


# --------------------------------------------------------------------------
# 1


def _random_gp_planar(rng, n):
    while True:
        xs = rng.choice(2**24, n, replace=False)
        ys = rng.integers(0, 2**24, n)
        pts = [(mpq(int(x)), mpq(int(y))) for x, y in zip(xs, ys)]
        if n < 3 or is_general_position(pts)[0]:
            return pts


def test_criterion_01_cups_vs_caps(report):
    t0 = time.time()
    bad = []
    for a, b in itertools.product(range(2, 8), repeat=2):
        E = extremal_cupcap_set(a, b)
        cap, _ = largest_cap(E)
        cup, _ = largest_cup(E)
        if len(E) != comb(a + b - 4, a - 2) or cap >= a or cup >= b:
            bad.append(("extremal", a, b))
        f = cupcap_threshold(a, b)
        assert f == len(E) + 1
        rng = np.random.default_rng([a, b])
        for trial in range(1000):
            pts = _random_gp_planar(rng, f)
            w = find_cap_or_cup(pts, a, b)
            if w is None or not is_chain(pts, w.indices, w.kind):
                bad.append(("random", a, b, trial))
    elapsed = time.time() - t0
    ok = not bad and elapsed < 120
    report(1, ok, f"36 pairs, 36000 random sets, {elapsed:.1f}s, failures {bad[:3]}")
    assert ok


# --------------------------------------------------------------------------
# 2


def test_criterion_02_es2_lower_bound(report):
    t0 = time.time()
    got = {n: mc_any(es2_lower_construction(n))[0] for n in range(3, 7)}
    sizes = {n: len(es2_lower_construction(n)) for n in range(3, 7)}
    elapsed = time.time() - t0
    ok = all(got[n] == n - 1 and sizes[n] == 2 ** (n - 2) for n in got) and elapsed < 60
    report(2, ok, f"mc {got}, sizes {sizes}, {elapsed:.1f}s")
    assert ok


# --------------------------------------------------------------------------
# 3


def test_criterion_03_karolyi_valtr(report):
    t0 = time.time()
    cfg = karolyi_valtr(3, 5)
    sizes = [len(cfg.history[i]) for i in range(6)]
    ok_rec = all(verify_mc_recurrence(cfg, i) for i in range(1, 6))
    elapsed = time.time() - t0
    ok = ok_rec and sizes == [2**i for i in range(6)] and elapsed < 300
    report(3, ok, f"sizes {sizes}, mc {[cfg.mc[i] for i in range(6)]}, {elapsed:.1f}s")
    assert ok


# --------------------------------------------------------------------------
# 4


def _random_poset(rng, n, p):
    below = [set() for _ in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < p:
            below[j].add(i)
    for j in range(n):
        for i in list(below[j]):
            below[j] |= below[i]
    perm = list(range(n))
    rng.shuffle(perm)
    inv = {v: k for k, v in enumerate(perm)}
    return FinitePoset(n, tuple({perm[i] for i in below[inv[j]]} for j in range(n)))


def _brute_width(p):
    for r in range(p.n, 0, -1):
        for S in itertools.combinations(range(p.n), r):
            if p.is_antichain(S):
                return r, S
    return 0, ()


def test_criterion_04_dilworth(report):
    t0 = time.time()
    rng = random.Random(4)
    bad = []
    for trial in range(200):
        p = _random_poset(rng, rng.randint(1, 12), rng.random())
        res = dilworth(p)
        width, anti = _brute_width(p)
        chains_ok = sorted(x for c in res.chains for x in c) == list(range(p.n)) and all(
            p.is_chain(c) for c in res.chains
        )
        if not (verify_dilworth(p, res) and chains_ok and p.is_antichain(anti)):
            bad.append(trial)
        elif len(res.antichain) != width or len(res.chains) != width:
            bad.append(trial)
    elapsed = time.time() - t0
    ok = not bad and elapsed < 60
    report(4, ok, f"200 posets, {elapsed:.1f}s, failures {bad[:5]}")
    assert ok


# --------------------------------------------------------------------------
# 5


def _four_sets(rng):
    seen, out = set(), []
    for _ in range(4):
        c = [rng.randint(-50, 50) for _ in range(3)]
        g, size = [], rng.randint(1, 20)
        while len(g) < size:
            p = tuple(mpq(c[k] + rng.randint(-30, 30)) for k in range(3))
            if p not in seen:
                seen.add(p)
                g.append(p)
        out.append(g)
    return out


def _majorities(plane, sets):
    for i, S in enumerate(sets):
        vals = [sum(a * b for a, b in zip(plane.normal, p)) - plane.offset for p in S]
        on = sum(v >= 0 for v in vals) if i < 2 else sum(v <= 0 for v in vals)
        if 2 * on < len(S):
            return False
    return True


def test_criterion_05_ham_sandwich(report):
    t0 = time.time()
    rng = random.Random(5)
    bad = []
    for trial in range(100):
        sets = _four_sets(rng)
        plane = ham_sandwich_oriented(*sets)
        if not (check_ham_sandwich(plane, sets) and _majorities(plane, sets)):
            bad.append(trial)
    elapsed = time.time() - t0
    ok = not bad and elapsed < 120
    report(5, ok, f"100 instances, {elapsed:.1f}s, failures {bad[:5]}")
    assert ok


# --------------------------------------------------------------------------
# 6


def test_criterion_06_two_separation(report):
    t0 = time.time()
    notes, ok = [], True
    for k in (4, 5):
        for seed in range(3):
            X = random_pointset(3, 64 * k, "cube", seed=100 * k + seed)
            sets = [list(X.points[64 * i : 64 * (i + 1)]) for i in range(k)]
            out = two_separate(sets)
            sep, _ = is_two_separated(out.sets)
            bound = size_ledger_bound(64, k)
            sizes = [len(m) for m in out.members]
            ok &= sep and all(s >= bound for s in sizes)
            notes.append(f"k={k} sizes {sizes}")
    elapsed = time.time() - t0
    ok &= elapsed < 300
    report(6, ok, f"{'; '.join(notes)}; {elapsed:.1f}s")
    assert ok


# --------------------------------------------------------------------------
# 7


def test_criterion_07_realizable_facet_sets(report):
    t0 = time.time()
    named = {
        "tetrahedron": [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)],
        "octahedron": [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)],
    }
    polys = {name: convex_hull([tuple(mpq(c) for c in p) for p in pts]) for name, pts in named.items()}
    seed = 0
    while len(polys) < 22:
        X = random_pointset(3, 8, "sphere", seed=seed)
        seed += 1
        P = convex_hull(X)
        if len(P.vertices) == 8:
            polys[f"random-{seed - 1}"] = P
    ok, tetra = True, None
    for name, P in polys.items():
        G = P.facet_graph()
        counts = []
        for t in range(1, 5):
            fc = count_realizable_facet_sets(P, t)
            ok &= fc.count == len(fc.sets) <= comb(3 * t, t) * P.f2
            ok &= all(_bfs_connected(G, S) for S in fc.sets)
            counts.append(fc.count)
        if name == "tetrahedron":
            tetra = counts
    ok &= tetra == [4, 6, 4, 0]
    elapsed = time.time() - t0
    ok &= elapsed < 180
    report(7, ok, f"{len(polys)} polytopes, tetrahedron {tetra}, {elapsed:.1f}s")
    assert ok


# --------------------------------------------------------------------------
# 8


def _bounded_degree_graph(rng, n):
    G = {v: set() for v in range(n)}
    for _ in range(3 * n):
        a, b = rng.sample(range(n), 2)
        if len(G[a]) < 3 and len(G[b]) < 3:
            G[a].add(b)
            G[b].add(a)
    return G


def test_criterion_08_connected_subgraphs(report):
    t0 = time.time()
    rng = random.Random(8)
    ok, worst = True, 0.0
    for trial in range(50):
        n = rng.randint(2, 12)
        G = _bounded_degree_graph(rng, n)
        for t in range(1, min(n, 5) + 1):
            brute = sum(1 for S in itertools.combinations(range(n), t) if _bfs_connected(G, S))
            got = count_connected_subgraphs(G, t)
            bound = mpq(comb(3 * t, t) * n, 2 * t + 1)
            ok &= got == brute and got <= bound and bound == connected_subgraph_bound(t, n)
            worst = max(worst, float(got / bound))
    elapsed = time.time() - t0
    ok &= elapsed < 60
    report(8, ok, f"50 graphs, max count/bound {worst:.3f}, {elapsed:.1f}s")
    assert ok


# --------------------------------------------------------------------------
# 9


def _max_independent(G):
    V = sorted(G)
    for r in range(len(V), 0, -1):
        for S in itertools.combinations(V, r):
            if all(b not in G[a] for a, b in itertools.combinations(S, 2)):
                return r
    return 0


def test_criterion_09_independent_separation(report):
    t0 = time.time()
    rng = random.Random(9)
    ok, ratios, capped = True, [], 0
    for trial in range(50):
        n = rng.randint(5, 14)
        X = list(random_pointset(3, n, "sphere", seed=900 + trial).points)
        assert is_convex_position(X)[0]
        res = disjoint_separation_independent_set(X)
        hull = convex_hull(X)
        G = {hull.vertex_index[v]: {hull.vertex_index[w] for w in nb} for v, nb in hull.vertex_graph().items()}
        Y = res.Y
        ok &= all(b not in G[a] for a, b in itertools.combinations(Y, 2))
        ok &= all(not (res.separation_sets[a] & res.separation_sets[b]) for a, b in itertools.combinations(Y, 2))
        ok &= 6 * len(Y) >= n
        # conv(X - Y) needs 4 points to have facets, so |Y| <= n - 4
        best = min(_max_independent(G), n - 4)
        if 4 * best >= n:
            ok &= 4 * len(Y) >= n
        capped += best < _max_independent(G)
        P = convex_hull([p for i, p in enumerate(X) if i not in set(Y)])
        xs = []
        for y in Y:
            found, x = region_nonempty(P, res.separation_sets[y])
            ok &= found
            xs.append(x)
        ok &= verify_disjoint_sets_convex(P, xs)
        ratios.append(len(Y) / n)
    elapsed = time.time() - t0
    ok &= elapsed < 180
    report(9, ok, f"50 sets, min |Y|/|X| {min(ratios):.3f}, {capped} capped at n-4, {elapsed:.1f}s")
    assert ok


# --------------------------------------------------------------------------
# 10


def test_criterion_10_pipeline(report):
    t0 = time.time()
    bad, kinds = [], {}
    for trial in range(50):
        rng = random.Random(f"pipeline-{trial}")
        n = rng.randint(100, 1000)
        dist = DISTRIBUTIONS[trial % 3]
        mode = ("best-effort", "strict")[(trial // 3) % 2]
        X = random_pointset(3, n, dist, seed=trial)
        try:
            K, trace = find_convex_subset_3d(X, PipelineParams(mode=mode))
        except StageFailure as exc:
            kinds["strict failure"] = kinds.get("strict failure", 0) + 1
            if exc.trace is None or not replay(exc.trace, X)[0]:
                bad.append((trial, "failure trace"))
            continue
        kinds[trace.result_kind] = kinds.get(trace.result_kind, 0) + 1
        if not is_convex_position([X.points[i] for i in K])[0] or not replay(trace, X)[0]:
            bad.append((trial, trace.result_kind))
    X = supported_clusters()
    K, trace = find_convex_subset_3d(X, PipelineParams(5, 4, 3, 4, 4, "strict"))
    engineered_ok = (
        trace.result_kind == "assembled"
        and len(K) >= 8
        and is_convex_position([X.points[i] for i in K])[0]
        and replay(trace, X) == (True, [])
    )
    elapsed = time.time() - t0
    ok = not bad and engineered_ok and elapsed < 900
    report(10, ok, f"outcomes {kinds}, engineered |K|={len(K)}, {elapsed:.1f}s, failures {bad[:3]}")
    assert ok


# --------------------------------------------------------------------------
# 11


def _configuration(rng):
    # frame projections near the corners of a convex quadrilateral, in cyclic
    # order 1, 2, 3, 4 so that x1x3 and x2x4 cross in projection
    corners = [(0, -100), (100, 0), (0, 100), (-100, 0)]
    lift = [rng.randint(0, 60), rng.randint(-60, 0)]
    groups = []
    for j, (cx, cy) in enumerate(corners):
        g = set()
        size = rng.randint(1, 6)
        while len(g) < size:
            x = mpq(cx + rng.randint(-15, 15), 1) + mpq(rng.randint(0, 999), 1000)
            y = mpq(cy + rng.randint(-15, 15), 1) + mpq(rng.randint(0, 999), 1000)
            z = mpq(lift[j % 2] + rng.randint(-40, 40)) + mpq(rng.randint(0, 999), 997)
            g.add((x, y, z))
        groups.append(sorted(g))
    return groups


def _uniform_above(groups):
    X1, X2, X3, X4 = groups
    return all(
        segment_relation((a, c), (b, d)) == ABOVE for a in X1 for c in X3 for b in X2 for d in X4
    )


def test_criterion_11_uniform_above_disjoint(report):
    t0 = time.time()
    rng = random.Random(11)
    accepted, rejected, bad = 0, 0, []
    while accepted < 100:
        groups = _configuration(rng)
        if not _uniform_above(groups):
            rejected += 1
            continue
        A, B = groups[0] + groups[2], groups[1] + groups[3]
        sep = hulls_disjoint(A, B)
        if not (sep and verify_separation(sep, A, B)):
            bad.append(accepted)
        accepted += 1
    elapsed = time.time() - t0
    ok = not bad and elapsed < 120
    report(11, ok, f"100 accepted, {rejected} rejected, {elapsed:.1f}s, failures {bad[:3]}")
    assert ok
