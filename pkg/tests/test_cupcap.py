import itertools
import random
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from esconvex.cupcap import (
    CAP,
    CUP,
    count_in_regions,
    cupcap_threshold,
    extremal_cupcap_set,
    find_cap_or_cup,
    is_chain,
    largest_cap,
    largest_cup,
    max_convex_subset_2d,
    por_valtr_support,
    support_regions,
)
from esconvex.errors import DegenerateInput, NoPolygonOfRequestedSize
from esconvex.geometry import is_convex_position, is_general_position


def _gp_set(rng, n, r=60):
    while True:
        xs = rng.sample(range(-r, r), n)
        pts = [(x, rng.randint(-r, r)) for x in xs]
        if n < 3 or is_general_position(pts)[0]:
            return pts


def _brute_chain(pts, kind):
    order = sorted(range(len(pts)), key=lambda i: pts[i][0])
    for r in range(len(pts), 0, -1):
        for c in itertools.combinations(order, r):
            if is_chain(pts, c, kind):
                return r
    return 0


def _brute_mc(pts):
    for r in range(len(pts), 2, -1):
        for c in itertools.combinations(range(len(pts)), r):
            if is_convex_position([pts[i] for i in c])[0]:
                return r
    return min(len(pts), 2)


def test_threshold_values():
    assert cupcap_threshold(4, 4) == 7
    assert cupcap_threshold(2, 9) == 2
    assert cupcap_threshold(5, 5) == 21
    with pytest.raises(ValueError):
        cupcap_threshold(1, 3)


def test_largest_chains_against_bruteforce():
    rng = random.Random(1)
    for trial in range(150):
        pts = _gp_set(rng, rng.randint(1, 9))
        for kind, fn in ((CUP, largest_cup), (CAP, largest_cap)):
            size, wit = fn(pts)
            assert size == _brute_chain(pts, kind)
            assert len(wit) == size and is_chain(pts, wit.indices, kind)


def test_find_cap_or_cup_against_tables():
    rng = random.Random(2)
    for trial in range(200):
        pts = _gp_set(rng, rng.randint(2, 14))
        a, b = rng.randint(2, 6), rng.randint(2, 6)
        w = find_cap_or_cup(pts, a, b)
        want = largest_cap(pts)[0] >= a or largest_cup(pts)[0] >= b
        assert (w is not None) == want
        if w is not None:
            assert len(w) == (a if w.kind == CAP else b)
            assert is_chain(pts, w.indices, w.kind)


def test_extremal_sets_small_bruteforce():
    for a in range(2, 6):
        for b in range(2, 10 - a):
            S = extremal_cupcap_set(a, b)
            pts = list(S.points)
            assert len(pts) == comb(a + b - 4, a - 2)
            if len(pts) >= 3:
                assert is_general_position(pts)[0]
            assert _brute_chain(pts, CAP) < a
            assert _brute_chain(pts, CUP) < b


def test_max_convex_subset_against_bruteforce():
    rng = random.Random(3)
    for trial in range(60):
        pts = _gp_set(rng, rng.randint(3, 9))
        size, wit = max_convex_subset_2d(pts)
        assert size == _brute_mc(pts)
        assert len(wit) == size and is_convex_position([pts[i] for i in wit])[0]


def test_max_convex_subset_shears_vertical_pairs():
    pts = [(0, 0), (0, 5), (3, 1), (3, 7), (6, 2)]
    size, wit = max_convex_subset_2d(pts)
    assert size == _brute_mc(pts)
    with pytest.raises(DegenerateInput):
        max_convex_subset_2d([(0, 0), (0, 0), (1, 2)])


def test_support_regions_match_insertion():
    # q lies in region i exactly when inserting q between v_i and v_{i+1}
    # keeps the polygon convex
    rng = random.Random(4)
    checked = 0
    for trial in range(40):
        pts = _gp_set(rng, 16, r=40)
        k = rng.choice([3, 4])
        for kind, fn in ((CUP, largest_cup), (CAP, largest_cap)):
            size, wit = fn(pts)
            if size < k + 1:
                continue
            poly = wit.indices[: k + 1]
            regions = support_regions(pts, poly)
            members = count_in_regions(pts, regions)
            assert len(regions) == k
            for q in range(len(pts)):
                if q in poly:
                    continue
                for i in range(k):
                    ring = [pts[v] for v in poly[: i + 1]] + [pts[q]] + [pts[v] for v in poly[i + 1 :]]
                    beyond = is_convex_position(ring)[0]
                    assert (q in members[i]) == (beyond and _beyond_edge(pts, poly, i, q))
                    checked += 1
    assert checked > 0


def _beyond_edge(pts, poly, i, q):
    a, b = pts[poly[i]], pts[poly[i + 1]]
    other = next(pts[v] for j, v in enumerate(poly) if j not in (i, i + 1))
    side = lambda p: (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
    return side(pts[q]) * side(other) < 0


def test_support_exhaustive_is_optimal():
    rng = random.Random(5)
    for trial in range(4):
        pts = _gp_set(rng, 18, r=50)
        k = 3
        sup = por_valtr_support(pts, k, max_candidates=10**6)
        best = 0
        for kind, fn in ((CUP, largest_cup), (CAP, largest_cap)):
            for c in itertools.combinations(sorted(range(len(pts)), key=lambda i: pts[i][0]), k + 1):
                if is_chain(pts, c, kind):
                    counts = [len(m) for m in count_in_regions(pts, support_regions(pts, c))]
                    best = max(best, min(counts))
        assert min(sup.counts) == best
        assert is_chain(pts, sup.polygon, sup.kind)
        assert sup.members == count_in_regions(pts, sup.regions)


def test_support_rejects_tiny_sets():
    with pytest.raises(NoPolygonOfRequestedSize):
        por_valtr_support([(0, 0), (1, 5), (2, 1)], 3)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(2, 6), st.integers(0, 10**6))
def test_threshold_forces_chain(a, b, seed):
    rng = random.Random(seed)
    pts = _gp_set(rng, cupcap_threshold(a, b), r=400)
    assert find_cap_or_cup(pts, a, b) is not None
