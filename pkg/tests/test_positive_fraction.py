import itertools
import random
from math import comb

import numpy as np
import pytest
from scipy.optimize import linprog

from esconvex.constructions import random_pointset
from esconvex.errors import PreconditionViolated
from esconvex.geometry import convex_hull
from esconvex.positive_fraction import (
    count_connected_subgraphs,
    count_realizable_facet_sets,
    degeneracy_coloring,
    disjoint_separation_independent_set,
    facet_planes,
    region_nonempty,
    separating_facets,
    verify_disjoint_sets_convex,
)

TETRA = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
OCTA = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]


def _connected_bfs(G, S):
    S = set(S)
    seen = {min(S)}
    stack = [min(S)]
    while stack:
        v = stack.pop()
        for w in G[v]:
            if w in S and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen == S


def _random_cubic_ish(rng, n):
    G = {v: set() for v in range(n)}
    for trial in range(3 * n):
        a, b = rng.sample(range(n), 2)
        if len(G[a]) < 3 and len(G[b]) < 3:
            G[a].add(b)
            G[b].add(a)
    return G


def test_tetrahedron_counts():
    P = convex_hull(TETRA)
    assert [count_realizable_facet_sets(P, t).count for t in (1, 2, 3, 4)] == [4, 6, 4, 0]


def test_octahedron_counts():
    P = convex_hull(OCTA)
    got = [count_realizable_facet_sets(P, t).count for t in (1, 2, 3, 4)]
    assert got == [8, 12, 24, 14]
    G = P.facet_graph()
    assert [count_connected_subgraphs(G, t) for t in (1, 2, 3, 4)] == [8, 12, 24, 38]


def test_region_nonempty_against_float_lp():
    P = convex_hull(random_pointset(3, 7, "sphere", seed=3))
    planes = facet_planes(P)
    A = np.array([[float(c) for c in pl.normal] for pl in planes])
    b = np.array([float(pl.offset) for pl in planes])
    for t in (1, 2, 3):
        for S in itertools.combinations(range(len(planes)), t):
            sign = np.array([-1.0 if f in S else 1.0 for f in range(len(planes))])
            # maximize s: sign * (A x - b) + s <= 0, s <= 1
            A_ub = np.hstack([sign[:, None] * A, np.ones((len(planes), 1))])
            res = linprog([0, 0, 0, -1], A_ub=np.vstack([A_ub, [0, 0, 0, 1]]), b_ub=np.concatenate([sign * b, [1]]),
                          bounds=[(None, None)] * 4, method="highs")
            float_ok = res.status == 0 and -res.fun > 1e-9
            ok, x = region_nonempty(P, S)
            assert ok == float_ok
            if ok:
                assert separating_facets(P, x).facets == frozenset(S)


def test_connected_subgraph_counts_against_bruteforce():
    rng = random.Random(1)
    for trial in range(30):
        n = rng.randint(3, 10)
        G = _random_cubic_ish(rng, n)
        for t in range(1, min(n, 5) + 1):
            want = sum(1 for S in itertools.combinations(range(n), t) if _connected_bfs(G, S))
            assert count_connected_subgraphs(G, t) == want
            assert want <= comb(3 * t, t) * n / (2 * t + 1)


def test_degree_guard():
    G = {0: {1, 2, 3, 4}, 1: {0}, 2: {0}, 3: {0}, 4: {0}}
    with pytest.raises(PreconditionViolated):
        count_connected_subgraphs(G, 2)


def test_degeneracy_coloring_is_proper():
    for seed in range(10):
        P = convex_hull(random_pointset(3, 14, "sphere", seed=seed))
        G = P.vertex_graph()
        col = degeneracy_coloring(G)
        assert all(col[v] != col[w] for v in G for w in G[v])
        assert max(col.values()) < 6


def test_independent_separation_round_trip():
    for seed in range(8):
        X = random_pointset(3, 9 + seed % 5, "sphere", seed=seed)
        pts = list(X.points)
        res = disjoint_separation_independent_set(pts)
        hull = convex_hull(pts)
        G = {hull.vertex_index[v]: {hull.vertex_index[w] for w in nb} for v, nb in hull.vertex_graph().items()}
        assert all(b not in G[a] for a, b in itertools.combinations(res.Y, 2))
        assert 6 * len(res.Y) >= len(pts)
        for a, b in itertools.combinations(res.Y, 2):
            assert not (res.separation_sets[a] & res.separation_sets[b])
        rest = [p for i, p in enumerate(pts) if i not in set(res.Y)]
        P = convex_hull(rest)
        xs = [region_nonempty(P, res.separation_sets[y])[1] for y in res.Y]
        assert verify_disjoint_sets_convex(P, xs)


def test_independent_set_requires_convex_position():
    with pytest.raises(PreconditionViolated):
        disjoint_separation_independent_set(TETRA + [(1, 1, 1), (1, 1, 2), ("1/10", "1/10", "1/10")])
