"""Discrete ham-sandwich cuts, 2-separation of point-set collections, and
separating-plane lifting for 2-separated collections in convex position."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from gmpy2 import mpq

from . import lp
from .errors import (
    EmptySetProduced,
    PreconditionViolated,
    SearchExhausted,
    SeparationFailed,
)
from .exact import ONE, ZERO, dot, integer_matrix
from .geometry import OrientedPlane, as_points, hulls_disjoint


# --------------------------------------------------------------------------
# ham-sandwich


def majority_counts(plane: OrientedPlane, sets) -> list:
    """(closed H+ count, closed H- count, size) for every set."""
    out = []
    for S in sets:
        sides = [plane.side(p) for p in as_points(S)]
        out.append((sum(s >= 0 for s in sides), sum(s <= 0 for s in sides), len(sides)))
    return out


def check_ham_sandwich(plane: OrientedPlane, sets, r: int = 2) -> bool:
    counts = majority_counts(plane, sets)
    return all(2 * (c[0] if i < r else c[1]) >= c[2] for i, c in enumerate(counts))


def _fib_sphere(n):
    i = np.arange(n) + 0.5
    phi = np.arccos(1 - 2 * i / n)
    theta = np.pi * (1 + 5**0.5) * i
    return np.stack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)], axis=1)


def _numeric_cut(F, labels):
    """Float direction and offset roughly bisecting sets 0, 1 and 2."""
    dirs = _fib_sphere(3000)
    proj = dirs @ F.T
    med = [np.median(proj[:, labels == s], axis=1) for s in range(3)]
    g = np.abs(med[1] - med[0]) + np.abs(med[2] - med[0])
    best = np.argsort(g)[:4]
    out = []
    try:
        from scipy.optimize import minimize
    except ImportError:  # pragma: no cover
        minimize = None
    for b in best:
        w = dirs[b]
        if minimize is not None:
            def f(ang):
                v = np.array([np.cos(ang[0]) * np.sin(ang[1]), np.sin(ang[0]) * np.sin(ang[1]), np.cos(ang[1])])
                p = F @ v
                m = [np.median(p[labels == s]) for s in range(3)]
                return abs(m[1] - m[0]) + abs(m[2] - m[0])

            ang0 = [np.arctan2(w[1], w[0]), np.arccos(np.clip(w[2], -1, 1))]
            res = minimize(f, ang0, method="Nelder-Mead", options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 400})
            a = res.x
            w = np.array([np.cos(a[0]) * np.sin(a[1]), np.sin(a[0]) * np.sin(a[1]), np.cos(a[1])])
        p = F @ w
        out.append((w, float(np.median(p[labels == 0]))))
    return out


def _check_triples(P, labels, sizes, triples, r):
    """First triple (row order) whose plane satisfies the oriented majorities."""
    if len(triples) == 0:
        return None
    T = np.asarray(triples)
    a, b, c = P[T[:, 0]], P[T[:, 1]], P[T[:, 2]]
    u, v = b - a, c - a
    nrm = np.stack(
        [u[:, 1] * v[:, 2] - u[:, 2] * v[:, 1], u[:, 2] * v[:, 0] - u[:, 0] * v[:, 2], u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]],
        axis=1,
    )
    off = (nrm * a).sum(axis=1)
    vals = nrm @ P.T - off[:, None]  # (triples, points)
    pos = np.asarray(vals > 0, dtype=bool)
    neg = np.asarray(vals < 0, dtype=bool)
    ok_fwd = np.ones(len(T), dtype=bool)
    ok_bwd = np.ones(len(T), dtype=bool)
    for s, n_s in enumerate(sizes):
        m = labels == s
        above = pos[:, m].sum(axis=1)
        below = neg[:, m].sum(axis=1)
        closed_plus, closed_minus = n_s - below, n_s - above
        if s < r:
            ok_fwd &= 2 * closed_plus >= n_s
            ok_bwd &= 2 * closed_minus >= n_s
        else:
            ok_fwd &= 2 * closed_minus >= n_s
            ok_bwd &= 2 * closed_plus >= n_s
    nz = np.asarray((nrm != 0).any(axis=1), dtype=bool)
    hit = np.flatnonzero((ok_fwd | ok_bwd) & nz)
    if len(hit) == 0:
        return None
    h = int(hit[0])
    return tuple(int(x) for x in T[h]), bool(ok_fwd[h])


def ham_sandwich_oriented(*sets, r: int = 2, batch: int = 20000) -> OrientedPlane:
    """Plane whose closed H+ holds at least half of sets[:r] and closed H-
    at least half of sets[r:].

    Candidate planes are spanned by point triples of the union.  A float
    approximate cut ranks the triples (points nearest the approximate plane
    first); each candidate is then checked exactly, and the search widens to
    all triples before giving up.
    """
    if len(sets) != 4:
        raise ValueError("expected four point sets")
    groups = [as_points(S) for S in sets]
    if any(not g for g in groups):
        raise PreconditionViolated("every set must be nonempty")
    union = [p for g in groups for p in g]
    labels = np.array([s for s, g in enumerate(groups) for _ in g])
    sizes = [len(g) for g in groups]
    n = len(union)
    if n < 3:
        raise PreconditionViolated("need at least three points in total")
    P = integer_matrix(union)
    # magnitudes of 3x3 products: fall back to Python ints when they could overflow
    if P.dtype != object and int(np.abs(P).max()) >= (1 << 19):
        P = P.astype(object)
    F = np.array([[float(c) for c in p] for p in union])
    F = F - F.mean(axis=0)
    sc = np.abs(F).max() or 1.0
    F = F / sc

    tried = set()

    def attempt(triples):
        fresh = [t for t in triples if t not in tried]
        tried.update(fresh)
        for s in range(0, len(fresh), batch):
            got = _check_triples(P, labels, sizes, fresh[s : s + batch], r)
            if got is not None:
                return got
        return None

    found = None
    guesses = _numeric_cut(F, labels) if n > 12 else []
    for K in (16, 24, 36):
        for w, c in guesses:
            dist = np.abs(F @ w - c)
            near = sorted(np.argsort(dist, kind="stable")[: min(K, n)].tolist())
            found = attempt(list(itertools.combinations(near, 3)))
            if found:
                break
        if found:
            break
    if not found:
        found = attempt(list(itertools.combinations(range(n), 3)))
    if not found:
        raise SearchExhausted("no spanned plane satisfies the majorities")
    (i, j, k), forward = found
    plane = OrientedPlane.through(union[i], union[j], union[k])
    if not forward:
        plane = plane.flipped()
    if not check_ham_sandwich(plane, groups, r):
        raise AssertionError("ham-sandwich plane failed exact recount")
    return plane


# --------------------------------------------------------------------------
# 2-separation


def _tilt(plane: OrientedPlane, plus_pts, minus_pts, others_plus, others_minus) -> OrientedPlane:
    """Rotate ``plane`` slightly so on-plane points move to their assigned open
    side while every strictly-sided point keeps its side."""
    on_plus = [p for p in plus_pts if plane.side(p) == 0]
    on_minus = [p for p in minus_pts if plane.side(p) == 0]
    if not on_plus and not on_minus:
        return plane
    # affine L with L >= 1 on on_plus and L <= -1 on on_minus (variables w, c free)
    A_ub, b_ub = [], []
    for p in on_plus:
        A_ub.append([-x for x in p] + [ONE])
        b_ub.append(-ONE)
    for p in on_minus:
        A_ub.append(list(p) + [-ONE])
        b_ub.append(-ONE)
    res = lp.feasible(A_ub, b_ub, nvars=4, free=range(4))
    if not res.feasible:
        raise SeparationFailed("on-plane points cannot be split by a tilt")
    w, c = res.x[:3], res.x[3]
    strict = [p for p in list(plus_pts) + list(minus_pts) + list(others_plus) + list(others_minus) if plane.side(p) != 0]
    delta = ONE
    for p in strict:
        hv = abs(plane.value(p))
        lv = abs(dot(w, p) - c)
        if lv != 0 and hv / lv / 2 < delta:
            delta = hv / lv / 2
    normal = tuple(a + delta * b for a, b in zip(plane.normal, w))
    tilted = OrientedPlane(normal, plane.offset + delta * c)
    for p in strict:
        if tilted.side(p) != plane.side(p):
            raise AssertionError("tilt moved a point across")
    if any(tilted.side(p) <= 0 for p in on_plus) or any(tilted.side(p) >= 0 for p in on_minus):
        raise AssertionError("tilt left an on-plane point unassigned")
    return tilted


@dataclass
class SeparatedCollection:
    """Subsets Y_i of input sets X_i; ``members[i]`` indexes into X_i."""

    sources: list  # original point lists
    members: list  # tuples of indices
    provenance: list = field(default_factory=list)  # (quad, pairing, plane or None)

    @property
    def sets(self) -> list:
        return [[src[i] for i in mem] for src, mem in zip(self.sources, self.members)]

    def __len__(self):
        return len(self.members)


def _pairings(q):
    a, b, c, d = q
    return [((a, b), (c, d)), ((a, c), (b, d)), ((a, d), (b, c))]


def two_separate(sets, check_every: bool = False) -> SeparatedCollection:
    """Shrink the sets until the collection is 2-separated.

    4-tuples are processed in lexicographic order, each in its three
    pairings.  A pairing whose two unions already have disjoint hulls is left
    alone; otherwise a ham-sandwich cut keeps at least half of each set on its
    side (points on the cut are kept and the cut is tilted exactly).
    """
    srcs = [as_points(S) for S in sets]
    k = len(srcs)
    members = [list(range(len(s))) for s in srcs]
    if any(not m for m in members):
        raise EmptySetProduced("an input set is empty", index=next(i for i, m in enumerate(members) if not m))
    prov = []
    for quad in itertools.combinations(range(k), 4):
        for (a, b), (c, d) in _pairings(quad):
            pts = {s: [srcs[s][i] for i in members[s]] for s in (a, b, c, d)}
            if hulls_disjoint(pts[a] + pts[b], pts[c] + pts[d]):
                prov.append((quad, ((a, b), (c, d)), None))
                continue
            plane = ham_sandwich_oriented(pts[a], pts[b], pts[c], pts[d])
            plane = _tilt(plane, pts[a] + pts[b], pts[c] + pts[d], [], [])
            for s, want in ((a, 1), (b, 1), (c, -1), (d, -1)):
                members[s] = [i for i in members[s] if plane.side(srcs[s][i]) == want]
                if not members[s]:
                    raise EmptySetProduced(f"set {s} emptied", index=s)
            prov.append((quad, ((a, b), (c, d)), plane))
    out = SeparatedCollection(srcs, [tuple(m) for m in members], prov)
    if check_every:
        ok, wit = is_two_separated(out.sets)
        if not ok:
            raise AssertionError(f"2-separation failed at {wit}")
    return out


def is_two_separated(sets) -> tuple[bool, tuple | None]:
    groups = [as_points(S) for S in sets]
    for quad in itertools.combinations(range(len(groups)), 4):
        for (a, b), (c, d) in _pairings(quad):
            if not hulls_disjoint(groups[a] + groups[b], groups[c] + groups[d]):
                return False, ((a, b), (c, d))
    return True, None


def size_ledger_bound(n: int, k: int) -> mpq:
    from math import comb

    return mpq(n, 2 ** (3 * comb(k - 1, 3)))


def is_collection_convex_position(sets) -> tuple[bool, int | None]:
    groups = [as_points(S) for S in sets]
    for i, g in enumerate(groups):
        rest = [p for j, h in enumerate(groups) if j != i for p in h]
        if g and rest and not hulls_disjoint(g, rest):
            return False, i
    return True, None


def lift_separating_plane(sets, reps, plane: OrientedPlane, check: bool = True) -> OrientedPlane:
    """Plane with every set whose representative is in H+ strictly on its
    positive side and every other set strictly on its negative side."""
    groups = [as_points(S) for S in sets]
    if check:
        ok, wit = is_two_separated(groups)
        if not ok:
            raise SeparationFailed("collection is not 2-separated", witness=wit)
        ok, wit = is_collection_convex_position(groups)
        if not ok:
            raise SeparationFailed("collection is not in convex position", witness=wit)
    sides = [plane.side(x) for x in reps]
    if any(s == 0 for s in sides):
        raise PreconditionViolated("a representative lies on the plane")
    A = [p for g, s in zip(groups, sides) if s > 0 for p in g]
    B = [p for g, s in zip(groups, sides) if s < 0 for p in g]
    if not A or not B:
        allp = A or B
        lo = min(p[0] for p in allp)
        hi = max(p[0] for p in allp)
        if A:
            return OrientedPlane((ONE, ZERO, ZERO), lo - 1)
        return OrientedPlane((ONE, ZERO, ZERO), hi + 1)
    sep = hulls_disjoint(A, B)
    if not sep:
        wa = tuple(sorted(sep.weights_a))
        wb = tuple(sorted(sep.weights_b))
        raise SeparationFailed("the two unions have intersecting hulls", witness=(wa, wb))
    return sep.plane
