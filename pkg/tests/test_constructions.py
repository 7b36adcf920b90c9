import itertools

import pytest

from esconvex.constructions import (
    DISTRIBUTIONS,
    es2_lower_construction,
    karolyi_valtr,
    mc_3d,
    mc_any,
    mc_bruteforce,
    nonconvex_quintuples,
    random_pointset,
    supported_clusters,
    verify_mc_recurrence,
)
from esconvex.cupcap import max_convex_subset_2d
from esconvex.errors import GuardExceeded
from esconvex.geometry import is_convex_position, is_general_position, orientation


def _inside_tetra(q, tet):
    base = orientation(*tet)
    for i in range(4):
        t = list(tet)
        t[i] = q
        if orientation(*t) != base:
            return False
    return True


def test_nonconvex_quintuples_match_definition():
    for seed in range(6):
        X = random_pointset(3, 9, "cube", seed=seed)
        pts = list(X.points)
        got = set(nonconvex_quintuples(pts))
        want = set()
        for five in itertools.combinations(range(len(pts)), 5):
            for q in five:
                if _inside_tetra(pts[q], [pts[i] for i in five if i != q]):
                    want.add(five)
        assert got == want


def test_mc_3d_against_bruteforce():
    for seed in range(6):
        X = random_pointset(3, 10, "cube", seed=seed)
        size, wit = mc_3d(X)
        assert size == mc_bruteforce(X)
        assert is_convex_position([X.points[i] for i in wit])[0]


def test_mc_guard():
    with pytest.raises(GuardExceeded):
        mc_3d(random_pointset(3, 70, "cube", seed=0))


def test_random_point_set_is_seeded_and_generic():
    for dist in DISTRIBUTIONS:
        for dim in (2, 3):
            A = random_pointset(dim, 30, dist, seed=4)
            B = random_pointset(dim, 30, dist, seed=4)
            assert A.points == B.points
            assert is_general_position(A)[0]
            if dist == "sphere":
                assert all(sum(c * c for c in p) == 1 for p in A.points)


def test_es2_small():
    for n in (3, 4, 5):
        X = es2_lower_construction(n)
        assert len(X) == 2 ** (n - 2)
        assert max_convex_subset_2d(X)[0] == n - 1


def test_karolyi_valtr_early_stages():
    cfg = karolyi_valtr(3, 3, seed=1)
    assert [len(h) for h in cfg.history] == [1, 2, 4, 8]
    assert verify_mc_recurrence(cfg)
    assert is_general_position(cfg.points)[0]
    assert cfg.mc[3] == mc_any(cfg.points)[0]


def test_karolyi_valtr_planar():
    cfg = karolyi_valtr(2, 4, seed=0)
    assert len(cfg.points) == 16
    assert verify_mc_recurrence(cfg)


def test_supported_clusters_layout():
    X = supported_clusters()
    assert X.dim == 3 and len(X) == 6 + 5 * 8
    assert is_general_position(X)[0]
    assert supported_clusters().points == X.points
