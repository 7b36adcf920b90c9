"""Facet-separation sets S(P, x), the regions R(P, S), facet adjacency
graphs, connected-subgraph counts, and independent vertex sets of 3D hulls
with pairwise disjoint separation sets."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

from gmpy2 import mpq

from . import lp
from .errors import DegenerateInput, PreconditionViolated
from .exact import ONE, ZERO, cross, dot, sub
from .geometry import (
    OrientedPlane,
    Polytope,
    as_points,
    convex_hull,
    is_convex_position,
)


def facet_planes(P) -> list:
    """Outward facet planes of a Polytope, or of a flat 3D polygon given by points.

    A flat polygon gets its supporting plane with both orientations plus one
    plane per edge, orthogonal to the polygon.
    """
    if isinstance(P, Polytope):
        return list(P.planes)
    pts = list(dict.fromkeys(as_points(P)))
    try:
        return list(convex_hull(pts).planes)
    except DegenerateInput:
        pass
    base = pts[0]
    nrm = None
    for a, b in itertools.combinations(pts[1:], 2):
        c = cross(sub(a, base), sub(b, base))
        if any(v != 0 for v in c):
            nrm = c
            break
    if nrm is None:
        raise DegenerateInput("points are collinear")
    if any(dot(nrm, sub(p, base)) != 0 for p in pts):
        raise DegenerateInput("unexpected hull failure on a full-dimensional set")
    # 2D hull inside the plane via an in-plane frame
    e1 = next(sub(p, base) for p in pts[1:] if any(v != 0 for v in sub(p, base)))
    e2 = cross(nrm, e1)
    flat = [(dot(sub(p, base), e1), dot(sub(p, base), e2)) for p in pts]
    hull2 = convex_hull(flat)
    ring = [pts[hull2.vertex_index[i]] for i, _ in hull2.facets]
    off = dot(nrm, base)
    planes = [OrientedPlane(nrm, off), OrientedPlane(tuple(-v for v in nrm), -off)]
    inner = tuple(sum((p[k] for p in ring), ZERO) / len(ring) for k in range(3))
    for a, b in zip(ring, ring[1:] + ring[:1]):
        w = cross(sub(b, a), nrm)
        pl = OrientedPlane(w, dot(w, a))
        if pl.side(inner) > 0:
            pl = pl.flipped()
        planes.append(pl)
    return planes


@dataclass(frozen=True)
class FaceSeparationSet:
    facets: frozenset

    def __len__(self):
        return len(self.facets)


def separating_facets(P, x) -> FaceSeparationSet:
    """Facets whose outward open half-space contains x (empty iff x ∈ P)."""
    planes = facet_planes(P)
    sides = [pl.side(x) for pl in planes]
    if all(s <= 0 for s in sides) and any(s == 0 for s in sides):
        raise DegenerateInput("query point lies on the boundary")
    return FaceSeparationSet(frozenset(f for f, s in enumerate(sides) if s > 0))


def region_nonempty(P, S) -> tuple[bool, tuple | None]:
    """Is there x separated from P by exactly the facets in S?

    Maximizes a common slack s (capped at 1) over the strict system; the region
    is nonempty iff the optimum is positive.  The witness is re-checked.
    """
    planes = facet_planes(P)
    S = frozenset(S)
    if any(f < 0 or f >= len(planes) for f in S):
        raise PreconditionViolated("facet index out of range")
    A_ub, b_ub = [], []
    for f, pl in enumerate(planes):
        n, b = pl.normal, pl.offset
        if f in S:
            # n.x - b >= s
            A_ub.append([-c for c in n] + [ONE])
            b_ub.append(-b)
        else:
            A_ub.append(list(n) + [ONE])
            b_ub.append(b)
    A_ub.append([ZERO, ZERO, ZERO, ONE])
    b_ub.append(ONE)
    res = lp.solve([0, 0, 0, 1], A_ub, b_ub, free=[0, 1, 2, 3], maximize=True)
    if res.status != lp.OPTIMAL or res.value <= 0:
        return False, None
    x = tuple(res.x[:3])
    if separating_facets(P, x).facets != S:
        raise AssertionError("region witness failed re-verification")
    return True, x


def facet_graph(P) -> dict:
    if isinstance(P, Polytope):
        return P.facet_graph()
    raise TypeError("facet graphs are defined for Polytope objects")


def is_connected_subset(G: dict, S) -> bool:
    S = set(S)
    if not S:
        return True
    start = next(iter(S))
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in G[v]:
            if w in S and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen == S


def facet_set_bound(t: int, f2: int, d: int = 3) -> int:
    return comb(d * t, t) * f2


@dataclass
class FacetSetCount:
    t: int
    count: int
    sets: list
    bound: int
    all_connected: bool


def count_realizable_facet_sets(P: Polytope, t: int) -> FacetSetCount:
    if t < 1:
        raise ValueError("t must be at least 1")
    G = P.facet_graph()
    found = []
    for S in itertools.combinations(range(len(P.facets)), t):
        ok, _ = region_nonempty(P, S)
        if ok:
            found.append(S)
    bound = facet_set_bound(t, P.f2)
    connected = all(is_connected_subset(G, S) for S in found)
    if len(found) > bound:
        raise AssertionError(f"{len(found)} realizable sets exceed the bound {bound}")
    if not connected:
        raise AssertionError("a realizable facet set is disconnected in the facet graph")
    return FacetSetCount(t, len(found), found, bound, connected)


def connected_subgraph_bound(t: int, n: int, d: int = 3) -> mpq:
    return mpq(comb(d * t, t), (d - 1) * t + 1) * n


def enumerate_connected_subsets(G: dict, t: int):
    """Each connected vertex set of size t exactly once (ESU-style extension)."""
    verts = sorted(G)
    for v in verts:
        ext = {w for w in G[v] if w > v}
        yield from _extend({v}, ext, v, G, t)


def _extend(sub_set, ext, v, G, t):
    if len(sub_set) == t:
        yield frozenset(sub_set)
        return
    ext = set(ext)
    nbhd = set()
    for u in sub_set:
        nbhd |= G[u]
    while ext:
        w = min(ext)
        ext.discard(w)
        new_ext = ext | {u for u in G[w] if u > v and u not in sub_set and u not in nbhd}
        yield from _extend(sub_set | {w}, new_ext, v, G, t)


def count_connected_subgraphs(G: dict, t: int, d: int = 3) -> int:
    """Exact number of connected induced vertex sets of size t; asserts the bound."""
    if any(len(nb) > d for nb in G.values()):
        raise PreconditionViolated(f"maximum degree exceeds {d}")
    if t < 1:
        raise ValueError("t must be at least 1")
    count = sum(1 for _ in enumerate_connected_subsets(G, t))
    if count > connected_subgraph_bound(t, len(G), d):
        raise AssertionError("connected subgraph count exceeds the bound")
    return count


# --------------------------------------------------------------------------
# independent sets with disjoint separation sets


def degeneracy_coloring(G: dict) -> dict:
    """Color along a reverse smallest-last order; planar graphs need at most 6 colors."""
    H = {v: set(nb) for v, nb in G.items()}
    order = []
    while H:
        v = min(H, key=lambda u: (len(H[u]), u))
        order.append(v)
        for w in H[v]:
            H[w].discard(v)
        del H[v]
    color = {}
    for v in reversed(order):
        used = {color[w] for w in G[v] if w in color}
        color[v] = next(c for c in itertools.count() if c not in used)
    return color


def max_independent_set(G: dict) -> tuple:
    from .search import max_independent_hyper

    verts = sorted(G)
    pos = {v: i for i, v in enumerate(verts)}
    bad = {tuple(sorted((pos[v], pos[w]))) for v in verts for w in G[v]}
    sol = max_independent_hyper(len(verts), bad)
    return tuple(verts[i] for i in sol)


@dataclass
class IndependentSeparation:
    Y: tuple  # indices into X
    method: str
    separation_sets: dict  # index -> frozenset of facet indices of conv(X - Y)


def _disjoint_sets(X, Y):
    rest = [p for i, p in enumerate(X) if i not in set(Y)]
    sets = {y: separating_facets(rest, X[y]).facets for y in Y}
    ok = all(not (sets[a] & sets[b]) for a, b in itertools.combinations(Y, 2))
    return ok, sets


def disjoint_separation_independent_set(X, exact_limit: int = 20) -> IndependentSeparation:
    """Independent vertex set Y of conv(X) with pairwise disjoint S(conv(X - Y), y)."""
    pts = as_points(X)
    n = len(pts)
    if n < 4:
        raise PreconditionViolated("need at least 4 points")
    ok, _ = is_convex_position(pts)
    if not ok:
        raise PreconditionViolated("input is not in convex position")
    if n == 4:
        return IndependentSeparation((0,), "trivial", {0: separating_facets(pts[1:], pts[0]).facets})
    hull = convex_hull(pts)
    G = {hull.vertex_index[v]: {hull.vertex_index[w] for w in nb} for v, nb in hull.vertex_graph().items()}
    col = degeneracy_coloring(G)
    classes = {}
    for v, c in col.items():
        classes.setdefault(c, []).append(v)
    greedy = tuple(sorted(max(classes.values(), key=lambda c: (len(c), [-v for v in c]))))
    candidates = [(greedy, "greedy-coloring")]
    if n <= exact_limit:
        candidates.insert(0, (tuple(sorted(max_independent_set(G))), "exact"))
    for Y, method in candidates:
        if n - len(Y) < 4:
            Y = Y[: n - 4]
        ok, sets = _disjoint_sets(pts, Y)
        if ok:
            return IndependentSeparation(Y, method, sets)
    raise AssertionError("independent set failed the disjointness check")


def verify_disjoint_sets_convex(P, xs) -> bool:
    """Points with pairwise disjoint separation sets are in convex position,
    and each facet in S(P, x_i) puts x_i strictly apart from every other x_j."""
    planes = facet_planes(P)
    xs = as_points(xs)
    sets = [separating_facets(P, x).facets for x in xs]
    for a, b in itertools.combinations(range(len(xs)), 2):
        if sets[a] & sets[b]:
            raise PreconditionViolated(f"separation sets of {a} and {b} overlap")
    for i, S in enumerate(sets):
        for f in S:
            if any(planes[f].side(xs[j]) > 0 for j in range(len(xs)) if j != i):
                return False
    if len(xs) >= 2 and not is_convex_position(xs)[0]:
        return False
    return True
