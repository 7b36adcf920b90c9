"""Finite posets from projections, Dilworth decompositions, C-free sets and
C-caps, and the cap-or-convex dichotomy for P-free point sets in R^3."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

from gmpy2 import mpq

from . import lp
from .cupcap import max_convex_subset_2d
from .errors import (
    DegenerateInput,
    NotFound,
    NotPFree,
    PreconditionViolated,
    ThresholdNotMet,
)
from .exact import ONE, ZERO, dot, sub
from .geometry import (
    HalfSpaceSystem,
    Polytope,
    as_points,
    convex_hull,
    is_convex_position,
    lambda_interval_member,
    point_in_cone_hull,
    projection_basis,
)
from .search import max_independent_hyper


@dataclass(frozen=True)
class FinitePoset:
    """Strict order on range(n); ``below[i]`` is the set of j with j < i."""

    n: int
    below: tuple  # of frozensets

    def __post_init__(self):
        below = tuple(frozenset(b) for b in self.below)
        object.__setattr__(self, "below", below)
        if len(below) != self.n:
            raise ValueError("relation size does not match n")
        for i, b in enumerate(below):
            if i in b:
                raise ValueError(f"relation is not irreflexive at {i}")
            for j in b:
                if i in below[j]:
                    raise ValueError(f"relation is not antisymmetric at {(i, j)}")
                if not below[j] <= b:
                    raise ValueError(f"relation is not transitive at {(i, j)}")

    @classmethod
    def from_pairs(cls, n, pairs):
        """``pairs`` lists (lo, hi) with lo < hi in the order."""
        below = [set() for _ in range(n)]
        for lo, hi in pairs:
            below[hi].add(lo)
        return cls(n, tuple(below))

    def less(self, i, j) -> bool:
        return i in self.below[j]

    def comparable(self, i, j) -> bool:
        return i in self.below[j] or j in self.below[i]

    def is_antichain(self, S) -> bool:
        return all(not self.comparable(i, j) for i, j in itertools.combinations(S, 2))

    def is_chain(self, S) -> bool:
        return all(self.comparable(i, j) for i, j in itertools.combinations(S, 2))


@dataclass
class DilworthResult:
    antichain: tuple
    chains: list  # each chain listed bottom to top


def dilworth(p: FinitePoset) -> DilworthResult:
    """Maximum antichain and minimum chain cover through bipartite matching.

    Split every element into a left and a right copy with an edge i -> j when
    i < j.  A maximum matching glues n - |M| chains; König's vertex cover
    read off the alternating-path closure gives an antichain of that size.
    """
    n = p.n
    succ = [sorted(j for j in range(n) if i in p.below[j]) for i in range(n)]
    match_r = [-1] * n  # right j -> left i
    match_l = [-1] * n

    def augment(i, seen):
        for j in succ[i]:
            if j in seen:
                continue
            seen.add(j)
            if match_r[j] < 0 or augment(match_r[j], seen):
                match_r[j] = i
                match_l[i] = j
                return True
        return False

    for i in range(n):
        augment(i, set())

    chains = []
    for start in range(n):
        if match_r[start] >= 0:
            continue
        chain = [start]
        while match_l[chain[-1]] >= 0:
            chain.append(match_l[chain[-1]])
        chains.append(chain)

    # alternating closure from unmatched left vertices
    zl = {i for i in range(n) if match_l[i] < 0}
    zr = set()
    stack = list(zl)
    while stack:
        i = stack.pop()
        for j in succ[i]:
            if j in zr or match_l[i] == j:
                continue
            zr.add(j)
            k = match_r[j]
            if k >= 0 and k not in zl:
                zl.add(k)
                stack.append(k)
    antichain = tuple(x for x in range(n) if x in zl and x not in zr)
    res = DilworthResult(antichain, chains)
    if not verify_dilworth(p, res):
        raise AssertionError("Dilworth certificates failed to verify")
    return res


def verify_dilworth(p: FinitePoset, res: DilworthResult) -> bool:
    covered = sorted(x for c in res.chains for x in c)
    if covered != list(range(p.n)):
        return False
    if any(not all(p.less(a, b) for a, b in zip(c, c[1:])) for c in res.chains):
        return False
    return p.is_antichain(res.antichain) and len(res.antichain) == len(res.chains)


# --------------------------------------------------------------------------
# obstacles


def as_system(C) -> HalfSpaceSystem:
    if isinstance(C, Polytope):
        return C.halfspaces()
    if isinstance(C, HalfSpaceSystem):
        return C
    raise TypeError("obstacle must be a Polytope or HalfSpaceSystem")


def obstacle_edges(C) -> list:
    """(point, direction) per edge: Polytope edges, or edge lines of a system."""
    if isinstance(C, Polytope):
        return [(C.vertices[a], sub(C.vertices[b], C.vertices[a])) for a, b in C.edges]
    return [(p, d) for p, d, _ in as_system(C).edges()]


def line_meets(x, y, C) -> bool:
    """Does the line through x and y meet the closed body C?"""
    lo, hi = None, None
    d = sub(y, x)
    for a, b in as_system(C).halfspaces:
        ad = dot(a, d)
        r = b - dot(a, x)
        if ad == 0:
            if r < 0:
                return False
            continue
        bound = r / ad
        if ad > 0:
            hi = bound if hi is None or bound < hi else hi
        else:
            lo = bound if lo is None or bound > lo else lo
        if lo is not None and hi is not None and lo > hi:
            return False
    return True


def is_P_free(X, C) -> tuple[bool, tuple | None]:
    pts = as_points(X)
    system = as_system(C)
    for i, p in enumerate(pts):
        if system.contains(p):
            raise PreconditionViolated(f"point {i} lies in the obstacle")
    for i, j in itertools.combinations(range(len(pts)), 2):
        if line_meets(pts[i], pts[j], system):
            return False, (i, j)
    return True, None


def is_P_cap(Y, C) -> bool:
    pts = as_points(Y)
    system = as_system(C)
    for i, y in enumerate(pts):
        rest = pts[:i] + pts[i + 1 :]
        if rest:
            if point_in_cone_hull(y, rest, system):
                return False
        elif system.contains(y):
            return False
    return True


@dataclass(frozen=True)
class PCapWitness:
    obstacle: object
    points: tuple  # indices into the source set


# --------------------------------------------------------------------------
# orders


def project_along(X, direction):
    """Planar images (u.x, v.x) for the orthogonal basis u, v of direction^perp."""
    u, v = projection_basis(direction)
    return [(dot(u, p), dot(v, p)) for p in as_points(X)]


def project_system(system: HalfSpaceSystem, direction) -> HalfSpaceSystem:
    """Shadow of an H-polyhedron along ``direction`` (Fourier-Motzkin on one axis)."""
    u, v = projection_basis(direction)
    d = tuple(mpq(c) for c in direction)
    uu, vv, dd = dot(u, u), dot(v, v), dot(d, d)
    rows = [((dot(a, u) / uu, dot(a, v) / vv), dot(a, d) / dd, b) for a, b in system.halfspaces]
    zero = [(a2, b) for a2, g, b in rows if g == 0]
    pos = [(a2, g, b) for a2, g, b in rows if g > 0]
    neg = [(a2, g, b) for a2, g, b in rows if g < 0]
    out = list(zero)
    for (ap, gp, bp), (an, gn, bn) in itertools.product(pos, neg):
        # (-gn)*(row p) + gp*(row n) eliminates the d component
        a2 = tuple(-gn * x + gp * y for x, y in zip(ap, an))
        out.append((a2, -gn * bp + gp * bn))
    out = [(a, b) for a, b in out if any(c != 0 for c in a) or b < 0]
    if not out:
        # the shadow is the whole plane: a vacuous constraint keeps the type usable
        out = [((ZERO, ZERO), ONE)]
    return HalfSpaceSystem(tuple(out))


def _shadow(C, direction) -> HalfSpaceSystem:
    if isinstance(C, Polytope):
        img = list(dict.fromkeys(project_along(C.vertices, direction)))
        if len(img) >= 3:
            try:
                return convex_hull(img).halfspaces()
            except DegenerateInput:
                pass
    return project_system(as_system(C), direction)


def order_by_edge_projection(X, C, e: int, check_free: bool = True) -> FinitePoset:
    """y < x iff the image of y lies in conv(image(C) ∪ {image of x}), images
    taken along edge ``e`` of C."""
    pts = as_points(X)
    if check_free:
        ok, pair = is_P_free(pts, C)
        if not ok:
            raise NotPFree("a connecting line meets the obstacle", pair=pair)
    _, direction = obstacle_edges(C)[e]
    img = project_along(pts, direction)
    shadow = _shadow(C, direction)
    return _order_from(img, shadow, ties_by_index=True)


def order_by_polyhedron(X, C) -> FinitePoset:
    """y < x iff y ∈ conv({x} ∪ C), computed in place (no projection)."""
    return _order_from(as_points(X), as_system(C))


def _order_from(pts, system, ties_by_index: bool = False) -> FinitePoset:
    """``ties_by_index``: images inside the shadow, or equal images, are
    mutually comparable; order such pairs by index (they sit below every
    other point, so antichains of size >= 2 are unaffected)."""
    n = len(pts)
    below = [set() for _ in range(n)]
    for i, j in itertools.permutations(range(n), 2):
        if pts[i] == pts[j] or lambda_interval_member(pts[j], pts[i], system):
            below[i].add(j)
    for i in range(n):
        for j in list(below[i]):
            if i in below[j]:
                if not ties_by_index:
                    raise NotPFree("relation is not antisymmetric", pair=(min(i, j), max(i, j)))
                below[min(i, j)].discard(max(i, j))
    return FinitePoset(n, tuple(below))


# --------------------------------------------------------------------------
# cap-or-convex


@dataclass
class CapOrConvex:
    kind: str  # "cap" or "convex"
    indices: tuple  # into X
    edge: int
    antichain: tuple
    threshold_met: bool
    target_met: bool
    cap_size: int = 0
    convex_size: int = 0
    notes: list = field(default_factory=list)


def cap_or_convex_threshold(a: int, b: int, edges: int) -> int:
    return comb(a + b - 4, a - 2) ** edges


def _in_cone2(y, s1, s2, system) -> bool:
    """y ∈ conv({s1, s2} ∪ C) for a planar H-polyhedron C (2-variable LP)."""
    A_ub, b_ub = [], []
    for a, b in system.halfspaces:
        vy = dot(a, y) - b
        A_ub.append([-(dot(a, s1) - b), -(dot(a, s2) - b)])
        b_ub.append(-vy)
    A_ub.append([ONE, ONE])
    b_ub.append(ONE)
    return lp.feasible(A_ub, b_ub, nvars=2).feasible


def largest_planar_cap(img, system, node_limit=2_000_000) -> tuple:
    """Largest C-cap among planar points: bad pairs and triples, then search."""
    n = len(img)
    bad = []
    for i, j in itertools.permutations(range(n), 2):
        if lambda_interval_member(img[i], img[j], system):
            bad.append((i, j))
    pair_bad = {frozenset(b) for b in bad}
    for y in range(n):
        for s1, s2 in itertools.combinations([k for k in range(n) if k != y], 2):
            if {frozenset((y, s1)), frozenset((y, s2)), frozenset((s1, s2))} & pair_bad:
                continue
            if _in_cone2(img[y], img[s1], img[s2], system):
                bad.append((y, s1, s2))
    return max_independent_hyper(n, bad, node_limit=node_limit)


def _spread_sample(img, size):
    order = sorted(range(len(img)), key=lambda i: img[i])
    if len(order) <= size:
        return order
    step = mpq(len(order) - 1, size - 1)
    return sorted({order[int(step * j)] for j in range(size)})


def pfree_or_convex(
    X, C, a: int, b: int, strict: bool = False, check_free: bool = True, cap_pool: int | None = None
) -> CapOrConvex:
    """An a-element C-cap or a b-element convex subset of a C-free set.

    Per edge of C, build the shadow order and take a maximum antichain; on the
    best edge (largest antichain, smallest index on ties) search the shadow for
    the largest cap and the largest convex polygon, then lift both.  Strict
    mode refuses inputs at or below the guaranteed threshold.  With
    ``cap_pool`` set, the cap search only sees that many shadow points
    spread evenly in x-order (the convex search still sees all of them).
    """
    if a < 2 or b < 2:
        raise ValueError("a and b must be at least 2")
    pts = as_points(X)
    if check_free:
        ok, pair = is_P_free(pts, C)
        if not ok:
            raise NotPFree("a connecting line meets the obstacle", pair=pair)
    edges = obstacle_edges(C)
    if not edges:
        raise PreconditionViolated("obstacle has no edges")
    thr = cap_or_convex_threshold(a, b, len(edges))
    met = len(pts) > thr
    if strict and not met:
        raise ThresholdNotMet(f"|X| = {len(pts)} does not exceed {thr}")
    best = None
    for e in range(len(edges)):
        poset = order_by_edge_projection(pts, C, e, check_free=False)
        anti = dilworth(poset).antichain
        if best is None or len(anti) > len(best[1]):
            best = (e, anti)
    e, anti = best
    direction = edges[e][1]
    img_all = project_along(pts, direction)
    shadow = _shadow(C, direction)
    seen = {}
    keep = []
    for i in anti:
        if img_all[i] not in seen:
            seen[img_all[i]] = i
            keep.append(i)
    img = [img_all[i] for i in keep]
    sub = list(range(len(img))) if cap_pool is None else _spread_sample(img, cap_pool)
    cap_local = largest_planar_cap([img[i] for i in sub], shadow)
    cap = tuple(sorted(keep[sub[i]] for i in cap_local))
    convex = ()
    if len(img) >= 3:
        try:
            _, wit = max_convex_subset_2d(img)
            convex = tuple(sorted(keep[i] for i in wit))
        except DegenerateInput:
            convex = ()
    if len(convex) < 3:
        convex = tuple(sorted(keep[:2]))
    res = None
    if len(cap) >= a:
        res = CapOrConvex("cap", cap[:a], e, anti, met, True)
    elif len(convex) >= b:
        res = CapOrConvex("convex", convex[:b], e, anti, met, True)
    elif strict:
        raise NotFound("neither target reached on the selected edge")
    else:
        if len(cap) / a >= len(convex) / b:
            res = CapOrConvex("cap", cap, e, anti, met, False)
        else:
            res = CapOrConvex("convex", convex, e, anti, met, False)
    res.cap_size, res.convex_size = len(cap), len(convex)
    sub_pts = [pts[i] for i in res.indices]
    if res.kind == "cap":
        if not is_P_cap(sub_pts, C):
            raise AssertionError("lifted cap failed verification")
    elif not is_convex_position(sub_pts)[0]:
        raise AssertionError("lifted convex set failed verification")
    return res
