"""Exact geometric substrate: point sets, planes, hulls, separation, projection.

Points are tuples of ``mpq``.  Every predicate is decided exactly; the only
floating point anywhere in this module is an optional numeric pre-filter in
:func:`hulls_disjoint` whose answers are re-verified exactly before use.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from gmpy2 import mpq

from . import lp
from .errors import (
    DegenerateInput,
    DimensionMismatch,
    HullsDisjoint,
    NonGenericDirection,
    PreconditionViolated,
    TooFewPoints,
)
from .exact import ONE, ZERO, Q, cross, det, dot, integer_matrix, sgn, sub

Point = tuple


# --------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class PointSet:
    dim: int
    points: tuple
    labels: tuple | None = None

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise DimensionMismatch(f"dimension must be 2 or 3, got {self.dim}")
        pts = tuple(tuple(Q(c) for c in p) for p in self.points)
        for p in pts:
            if len(p) != self.dim:
                raise DimensionMismatch(f"point {p} does not have dimension {self.dim}")
        if len(set(pts)) != len(pts):
            raise DegenerateInput("duplicate points")
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            if len(self.labels) != len(pts):
                raise ValueError("labels must match points")
            object.__setattr__(self, "labels", tuple(self.labels))

    @classmethod
    def of(cls, points: Iterable[Sequence], labels=None) -> "PointSet":
        pts = [tuple(p) for p in points]
        if not pts:
            raise TooFewPoints("empty point set needs an explicit dimension")
        return cls(len(pts[0]), tuple(pts), labels)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def subset(self, indices: Iterable[int]) -> "PointSet":
        idx = list(indices)
        labels = None if self.labels is None else tuple(self.labels[i] for i in idx)
        return PointSet(self.dim, tuple(self.points[i] for i in idx), labels)


def as_points(X) -> list:
    if isinstance(X, PointSet):
        return list(X.points)
    return [tuple(Q(c) for c in p) for p in X]


@dataclass(frozen=True)
class OrientedPlane:
    """Hyperplane normal . x = offset, with H+ = {normal . x >= offset}."""

    normal: tuple
    offset: mpq

    def __post_init__(self):
        n = tuple(Q(c) for c in self.normal)
        if all(c == 0 for c in n):
            raise DegenerateInput("zero normal")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", Q(self.offset))

    def value(self, x) -> mpq:
        return dot(self.normal, x) - self.offset

    def side(self, x) -> int:
        return sgn(self.value(x))

    def flipped(self) -> "OrientedPlane":
        return OrientedPlane(tuple(-c for c in self.normal), -self.offset)

    @classmethod
    def through(cls, *points) -> "OrientedPlane":
        """Plane (or 2D line) through d points; orientation follows the point order."""
        pts = [tuple(Q(c) for c in p) for p in points]
        if len(pts) == 2 and len(pts[0]) == 2:
            a, b = pts
            d = sub(b, a)
            n = (d[1], -d[0])
        elif len(pts) == 3 and len(pts[0]) == 3:
            a, b, c = pts
            n = cross(sub(b, a), sub(c, a))
        else:
            raise DimensionMismatch("need d points in dimension d")
        if all(v == 0 for v in n):
            raise DegenerateInput("points do not span a hyperplane")
        return cls(n, dot(n, pts[0]))


@dataclass(frozen=True)
class HalfSpaceSystem:
    """Intersection of closed half-spaces a . y <= b (possibly unbounded)."""

    halfspaces: tuple  # of (a: tuple, b: mpq)

    def __post_init__(self):
        hs = tuple((tuple(Q(c) for c in a), Q(b)) for a, b in self.halfspaces)
        object.__setattr__(self, "halfspaces", hs)

    @property
    def dim(self) -> int:
        return len(self.halfspaces[0][0])

    @classmethod
    def from_planes(cls, planes_and_sides) -> "HalfSpaceSystem":
        """Build from (OrientedPlane, '+' or '-') pairs."""
        out = []
        for plane, s in planes_and_sides:
            if s == "+":
                out.append((tuple(-c for c in plane.normal), -plane.offset))
            elif s == "-":
                out.append((plane.normal, plane.offset))
            else:
                raise ValueError("side must be '+' or '-'")
        return cls(tuple(out))

    def contains(self, x, strict=False) -> bool:
        for a, b in self.halfspaces:
            v = dot(a, x)
            if v > b or (strict and v == b):
                return False
        return True

    def edges(self) -> list:
        """1-dimensional faces as (point, direction, (i, j)) for 3D systems.

        An edge lies on the line where boundary planes i and j meet; it exists
        when that line has a nonempty part inside every other half-space.  For
        three half-spaces with independent normals these are three rays.
        """
        if self.dim != 3:
            raise DimensionMismatch("edges are only defined for 3D systems")
        out = []
        hs = self.halfspaces
        for i, j in itertools.combinations(range(len(hs)), 2):
            (a1, b1), (a2, b2) = hs[i], hs[j]
            direction = cross(a1, a2)
            if all(c == 0 for c in direction):
                continue
            base = _line_point(a1, b1, a2, b2, direction)
            lo, hi = None, None
            ok = True
            for m, (a, b) in enumerate(hs):
                if m in (i, j):
                    continue
                ad = dot(a, direction)
                r = b - dot(a, base)
                if ad == 0:
                    if r < 0:
                        ok = False
                        break
                    continue
                bound = r / ad
                if ad > 0:
                    hi = bound if hi is None else min(hi, bound)
                else:
                    lo = bound if lo is None else max(lo, bound)
            if not ok or (lo is not None and hi is not None and lo >= hi):
                continue
            if lo is not None:
                base = tuple(p + lo * d for p, d in zip(base, direction))
            elif hi is not None:
                base = tuple(p + hi * d for p, d in zip(base, direction))
                direction = tuple(-d for d in direction)
            out.append((base, direction, (i, j)))
        return out


def _line_point(a1, b1, a2, b2, direction):
    """A point on {a1.y = b1} ∩ {a2.y = b2}, solving with the direction row fixed to 0."""
    rows = [list(a1), list(a2), list(direction)]
    rhs = [b1, b2, ZERO]
    D = det(rows)
    out = []
    for k in range(3):
        m = [r[:] for r in rows]
        for r in range(3):
            m[r][k] = rhs[r]
        out.append(det(m) / D)
    return tuple(out)


@dataclass(frozen=True)
class Polytope:
    """Convex hull with both representations.

    ``facets`` are vertex-index tuples (triangles in 3D, segments in 2D)
    oriented so ``planes[f].normal`` points outward: the polytope lies in
    H- of every facet plane, and non-incident vertices lie strictly inside.
    """

    dim: int
    vertices: tuple  # points
    vertex_index: tuple  # index of each vertex in the source point set
    facets: tuple
    planes: tuple
    edges: tuple
    facet_adjacency: tuple  # sorted facet index pairs sharing a (d-2)-face

    @property
    def f0(self):
        return len(self.vertices)

    @property
    def f1(self):
        return len(self.edges)

    @property
    def f2(self):
        return len(self.facets) if self.dim == 3 else 1

    def halfspaces(self) -> HalfSpaceSystem:
        return HalfSpaceSystem(tuple((p.normal, p.offset) for p in self.planes))

    def contains(self, x, strict=False) -> bool:
        return self.halfspaces().contains(x, strict=strict)

    def facet_graph(self) -> dict:
        g = {f: set() for f in range(len(self.facets))}
        for f, h in self.facet_adjacency:
            g[f].add(h)
            g[h].add(f)
        return g

    def vertex_graph(self) -> dict:
        g = {v: set() for v in range(len(self.vertices))}
        for a, b in self.edges:
            g[a].add(b)
            g[b].add(a)
        return g

    def euler_characteristic(self) -> int:
        if self.dim == 2:
            return len(self.vertices) - len(self.edges)
        return len(self.vertices) - len(self.edges) + len(self.facets)


# --------------------------------------------------------------------------
# orientation and general position


def orientation(*points) -> int:
    """Sign of det[p1 - p0, ..., pd - p0] for d+1 points in dimension d."""
    pts = [tuple(Q(c) for c in p) for p in points]
    d = len(pts[0])
    if any(len(p) != d for p in pts) or len(pts) != d + 1:
        raise DimensionMismatch("orientation needs d+1 points of dimension d")
    p0 = pts[0]
    if d == 2:
        a, b = sub(pts[1], p0), sub(pts[2], p0)
        return sgn(a[0] * b[1] - a[1] * b[0])
    if d == 3:
        return sgn(dot(cross(sub(pts[1], p0), sub(pts[2], p0)), sub(pts[3], p0)))
    return sgn(det([sub(p, p0) for p in pts[1:]]))


def orient2(a, b, c) -> int:
    return sgn((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))


def orient3(a, b, c, d) -> int:
    ab0, ab1, ab2 = b[0] - a[0], b[1] - a[1], b[2] - a[2]
    ac0, ac1, ac2 = c[0] - a[0], c[1] - a[1], c[2] - a[2]
    ad0, ad1, ad2 = d[0] - a[0], d[1] - a[1], d[2] - a[2]
    v = (
        ab0 * (ac1 * ad2 - ac2 * ad1)
        - ab1 * (ac0 * ad2 - ac2 * ad0)
        + ab2 * (ac0 * ad1 - ac1 * ad0)
    )
    return sgn(v)


def _gcd_rows(V: np.ndarray) -> np.ndarray:
    g = np.abs(V[:, 0])
    for k in range(1, V.shape[1]):
        g = np.gcd(g, np.abs(V[:, k]))
    return g


def _canonical_dirs(V: np.ndarray) -> np.ndarray:
    """Primitive representative of each row up to sign (zero rows stay zero)."""
    g = _gcd_rows(V)
    g[g == 0] = 1
    W = V // g[:, None]
    first = np.zeros(len(W), dtype=W.dtype)
    for k in range(W.shape[1] - 1, -1, -1):
        col = W[:, k]
        first = np.where(col != 0, col, first)
    flip = np.where(first < 0, -1, 1)
    return W * flip[:, None]


def _gp_planar_all_pairs(P: np.ndarray):
    """Planar general position through one row-wise sort of the float slopes
    from every anchor; equal rational slopes round to equal floats."""
    n = len(P)
    I, J = np.nonzero(~np.eye(n, dtype=bool))  # row-major: n-1 entries per anchor
    V = P[J] - P[I]
    zero = np.flatnonzero((V == 0).all(axis=1))
    if len(zero):
        return False, _complete(n, (int(I[zero[0]]), int(J[zero[0]])), 3)
    V = np.where(((V[:, 0] < 0) | ((V[:, 0] == 0) & (V[:, 1] < 0)))[:, None], -V, V)
    with np.errstate(divide="ignore"):
        key = np.where(V[:, 0] == 0, np.inf, V[:, 1] / np.where(V[:, 0] == 0, 1, V[:, 0]))
    key = key.reshape(n, n - 1)
    order = np.argsort(key, axis=1)
    ks = np.take_along_axis(key, order, axis=1)
    rows, cols = np.nonzero(ks[:, 1:] == ks[:, :-1])
    for r in np.unique(rows):
        # every pair inside a run of equal keys gets the exact test
        run_keys = set(ks[r, cols[rows == r]].tolist())
        for kval in run_keys:
            members = [r * (n - 1) + int(c) for c in order[r][ks[r] == kval]]
            for x, y in itertools.combinations(members, 2):
                if int(V[x, 0]) * int(V[y, 1]) - int(V[x, 1]) * int(V[y, 0]) == 0:
                    return False, tuple(sorted((int(r), int(J[x]), int(J[y]))))
    return True, None


def _parallel_pair_2d(V: np.ndarray):
    """Some pair (a, b), a < b, of parallel nonzero int64 rows, or None.

    Equal rational slopes round to equal floats, so only runs of equal float
    keys need the exact cross-product check.
    """
    V = np.where(((V[:, 0] < 0) | ((V[:, 0] == 0) & (V[:, 1] < 0)))[:, None], -V, V)
    with np.errstate(divide="ignore"):
        key = np.where(V[:, 0] == 0, np.inf, V[:, 1] / np.where(V[:, 0] == 0, 1, V[:, 0]))
    order = np.argsort(key, kind="stable")
    ks = key[order]
    same = np.flatnonzero(ks[1:] == ks[:-1])
    if len(same) == 0:
        return None
    starts = np.flatnonzero(np.diff(np.concatenate(([False], ks[1:] == ks[:-1], [False])).astype(np.int8)) == 1)
    for st in starts:
        en = st + 1
        while en < len(ks) and ks[en] == ks[st]:
            en += 1
        run = order[st:en]
        for x, y in itertools.combinations(run, 2):
            if int(V[x, 0]) * int(V[y, 1]) - int(V[x, 1]) * int(V[y, 0]) == 0:
                return (int(min(x, y)), int(max(x, y)))
    return None


def _first_duplicate(rows: np.ndarray):
    """Indices (a, b), a < b, of the first pair of equal rows, or None."""
    if len(rows) < 2:
        return None
    seen = {}
    for idx, r in enumerate(map(tuple, rows.tolist())):
        if r in seen:
            return seen[r], idx
        seen[r] = idx
    return None


def is_general_position(X) -> tuple[bool, tuple | None]:
    """Exact general-position test.

    Returns (True, None) or (False, witness) where the witness is a sorted
    tuple of dim+1 indices lying on a common hyperplane.
    """
    pts = as_points(X)
    n = len(pts)
    if n == 0:
        raise TooFewPoints("empty point set")
    d = len(pts[0])
    if n < d + 1:
        raise TooFewPoints(f"need at least {d + 1} points")
    P = integer_matrix(pts)
    if P.dtype == object:
        if d == 3:
            return _gp_spatial_modular(pts, P)
        return _gp_python_ints(P.tolist())
    if d == 2 and n <= 2000:
        return _gp_planar_all_pairs(P)
    for i in range(n - 1):
        V = P[i + 1 :] - P[i]
        if d == 2:
            zero = np.flatnonzero((V == 0).all(axis=1))
            if len(zero):
                j = i + 1 + int(zero[0])
                return False, _complete(n, (i, j), d + 1)
            dup = _parallel_pair_2d(V)
            if dup is not None:
                return False, tuple(sorted((i, i + 1 + dup[0], i + 1 + dup[1])))
        else:
            m = len(V)
            if m < 2:
                continue
            jj, kk = np.triu_indices(m, 1)
            C = np.cross(V[jj], V[kk])
            zero = np.flatnonzero((C == 0).all(axis=1))
            if len(zero):
                z = int(zero[0])
                trip = (i, i + 1 + int(jj[z]), i + 1 + int(kk[z]))
                return False, _complete(n, trip, 4)
            dup = _first_duplicate(_canonical_dirs(C))
            if dup is not None:
                a, b = dup
                first = {i, i + 1 + int(jj[a]), i + 1 + int(kk[a])}
                other = [i + 1 + int(jj[b]), i + 1 + int(kk[b])]
                extra = next(o for o in other if o not in first)
                return False, tuple(sorted(first | {extra}))
    return True, None


def _complete(n, idx, size):
    out = set(idx)
    for j in range(n):
        if len(out) >= size:
            break
        out.add(j)
    return tuple(sorted(out))


def _primitive_key(v):
    g = 0
    for c in v:
        g = math.gcd(g, c)
    v = tuple(c // g for c in v)
    lead = next(c for c in v if c)
    return v if lead > 0 else tuple(-c for c in v)


def _gp_python_ints(P):
    # same direction-hashing test as the numpy path, on unbounded ints
    n, d = len(P), len(P[0])
    for i in range(n - 1):
        V = [tuple(b - a for a, b in zip(P[i], q)) for q in P[i + 1 :]]
        if d == 2:
            seen = {}
            for j, v in enumerate(V):
                if not any(v):
                    return False, _complete(n, (i, i + 1 + j), 3)
                key = _primitive_key(v)
                if key in seen:
                    return False, tuple(sorted((i, i + 1 + seen[key], i + 1 + j)))
                seen[key] = j
        else:
            seen = {}
            for j, k in itertools.combinations(range(len(V)), 2):
                c = tuple(int(x) for x in cross(V[j], V[k]))
                if not any(c):
                    return False, _complete(n, (i, i + 1 + j, i + 1 + k), 4)
                key = _primitive_key(c)
                if key in seen:
                    first = {i, i + 1 + seen[key][0], i + 1 + seen[key][1]}
                    extra = next(o for o in (i + 1 + j, i + 1 + k) if o not in first)
                    return False, tuple(sorted(first | {extra}))
                seen[key] = (j, k)
    return True, None


_GP_PRIME = 2147483629  # below 2^31, so residue products fit in int64


def _modinv(x, p):
    out = np.ones_like(x)
    base = x % p
    e = p - 2
    while e:
        if e & 1:
            out = out * base % p
        base = base * base % p
        e >>= 1
    return out


def _gp_spatial_modular(pts, P):
    """Coplanar quadruples via cross products hashed as projective points
    mod a prime; every collision and every zero residue is checked exactly."""
    p = _GP_PRIME
    n = len(pts)
    R = np.array([[int(v) % p for v in row] for row in P.tolist()], dtype=np.int64)
    for i in range(n - 2):
        V = (R[i + 1 :] - R[i]) % p
        m = len(V)
        jj, kk = np.triu_indices(m, 1)
        a, b = V[jj], V[kk]
        C = np.stack(
            [
                (a[:, 1] * b[:, 2] - a[:, 2] * b[:, 1]) % p,
                (a[:, 2] * b[:, 0] - a[:, 0] * b[:, 2]) % p,
                (a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]) % p,
            ],
            axis=1,
        )
        nz = C != 0
        zero = np.flatnonzero(~nz.any(axis=1))
        for z in zero:
            trip = (i, i + 1 + int(jj[z]), i + 1 + int(kk[z]))
            for l in range(n):
                if l not in trip and orientation(*(pts[t] for t in trip + (l,))) == 0:
                    return False, tuple(sorted(trip + (l,)))
        keep = np.flatnonzero(nz.any(axis=1))
        C, jj, kk = C[keep], jj[keep], kk[keep]
        lead = np.argmax(C != 0, axis=1)
        inv = _modinv(C[np.arange(len(C)), lead], p)
        K = C * inv[:, None] % p
        order = np.lexsort((K[:, 2], K[:, 1], K[:, 0]))
        Ks = K[order]
        eq = (Ks[1:] == Ks[:-1]).all(axis=1)
        pairs = []
        st = 0
        while st < len(eq):
            if not eq[st]:
                st += 1
                continue
            en = st
            while en < len(eq) and eq[en]:
                en += 1
            pairs.extend(itertools.combinations(order[st : en + 1], 2))
            st = en
        for x, y in pairs:
            quad = {i, i + 1 + int(jj[x]), i + 1 + int(kk[x]), i + 1 + int(jj[y]), i + 1 + int(kk[y])}
            base = (i, i + 1 + int(jj[x]), i + 1 + int(kk[x]))
            extra = next(o for o in sorted(quad) if o not in base)
            if orientation(*(pts[t] for t in base + (extra,))) == 0:
                return False, tuple(sorted(base + (extra,)))
    return True, None


def _gp_bruteforce(pts):
    d = len(pts[0])
    for combo in itertools.combinations(range(len(pts)), d + 1):
        if orientation(*(pts[i] for i in combo)) == 0:
            return False, combo
    return True, None


# --------------------------------------------------------------------------
# convex hulls


def convex_hull(X) -> Polytope:
    pts = as_points(X)
    if not pts:
        raise TooFewPoints("empty point set")
    d = len(pts[0])
    if len(pts) < d + 1:
        raise TooFewPoints(f"need at least {d + 1} points")
    if d == 2:
        return _hull2(pts)
    if d == 3:
        return _hull3(pts)
    raise DimensionMismatch("only 2D and 3D hulls are supported")


def _hull2(pts) -> Polytope:
    order = sorted(range(len(pts)), key=lambda i: pts[i])

    def chain(seq):
        out = []
        for i in seq:
            while len(out) >= 2 and orient2(pts[out[-2]], pts[out[-1]], pts[i]) <= 0:
                out.pop()
            out.append(i)
        return out

    lower = chain(order)
    upper = chain(reversed(order))
    ring = lower[:-1] + upper[:-1]
    if len(ring) < 3:
        raise DegenerateInput("points are collinear", witness=tuple(order[:3]))
    verts = sorted(ring)
    local = {g: k for k, g in enumerate(verts)}
    facets, planes = [], []
    for a, b in zip(ring, ring[1:] + ring[:1]):
        facets.append((local[a], local[b]))
        planes.append(OrientedPlane.through(pts[a], pts[b]))
    m = len(facets)
    edges = tuple(sorted(tuple(sorted(f)) for f in facets))
    adjacency = tuple(sorted(tuple(sorted((f, (f + 1) % m))) for f in range(m)))
    return Polytope(
        2,
        tuple(pts[g] for g in verts),
        tuple(verts),
        tuple(facets),
        tuple(planes),
        edges,
        adjacency,
    )


def _in_triangle_coplanar(a, b, c, p) -> bool:
    """Closed containment of p in triangle abc, all four points coplanar."""
    n = cross(sub(b, a), sub(c, a))
    for u, v in ((a, b), (b, c), (c, a)):
        if dot(cross(sub(v, u), sub(p, u)), n) < 0:
            return False
    return True


def _hull3(pts) -> Polytope:
    n = len(pts)
    i0 = 0
    i1 = 1
    i2 = next(
        (k for k in range(2, n) if any(c != 0 for c in cross(sub(pts[i1], pts[i0]), sub(pts[k], pts[i0])))),
        None,
    )
    if i2 is None:
        raise DegenerateInput("all points collinear", witness=tuple(range(min(n, 4))))
    i3 = next((k for k in range(2, n) if k != i2 and orient3(pts[i0], pts[i1], pts[i2], pts[k]) != 0), None)
    if i3 is None:
        raise DegenerateInput("all points coplanar", witness=tuple(range(4)))
    if orient3(pts[i0], pts[i1], pts[i2], pts[i3]) > 0:
        i1, i2 = i2, i1
    # i3 lies on the negative side of (i0, i1, i2): that face is outward-oriented
    faces = {}
    next_id = 0
    edge_face = {}

    def add_face(a, b, c):
        nonlocal next_id
        fid = next_id
        next_id += 1
        faces[fid] = (a, b, c)
        edge_face[(a, b)] = fid
        edge_face[(b, c)] = fid
        edge_face[(c, a)] = fid
        return fid

    def remove_face(fid):
        a, b, c = faces.pop(fid)
        for e in ((a, b), (b, c), (c, a)):
            if edge_face.get(e) == fid:
                del edge_face[e]

    add_face(i0, i1, i2)
    add_face(i0, i3, i1)
    add_face(i1, i3, i2)
    add_face(i2, i3, i0)

    for p in range(n):
        if p in (i0, i1, i2, i3):
            continue
        x = pts[p]
        visible = set()
        on_boundary = False
        for fid, (a, b, c) in faces.items():
            s = orient3(pts[a], pts[b], pts[c], x)
            if s > 0:
                visible.add(fid)
            elif s == 0:
                if _in_triangle_coplanar(pts[a], pts[b], pts[c], x):
                    on_boundary = True
                    break
                visible.add(fid)
        if on_boundary:
            continue
        if not visible:
            continue
        horizon = []
        for fid in visible:
            a, b, c = faces[fid]
            for u, v in ((a, b), (b, c), (c, a)):
                if edge_face.get((v, u)) not in visible:
                    horizon.append((u, v))
        for fid in visible:
            remove_face(fid)
        for u, v in horizon:
            add_face(u, v, p)

    used = sorted({v for f in faces.values() for v in f})
    local = {g: k for k, g in enumerate(used)}
    vertices = tuple(pts[g] for g in used)
    facets, planes = [], []
    for a, b, c in faces.values():
        facets.append((local[a], local[b], local[c]))
        planes.append(OrientedPlane.through(pts[a], pts[b], pts[c]))
    # degenerate (non-simplicial) configurations leave a vertex on a foreign facet plane
    for f, (tri, plane) in enumerate(zip(facets, planes)):
        for v in range(len(vertices)):
            if v in tri:
                continue
            s = plane.side(vertices[v])
            if s > 0:
                raise AssertionError("hull construction produced a non-convex facet")
            if s == 0:
                raise DegenerateInput(
                    "coplanar facet vertices", witness=tuple(sorted(used[i] for i in tri + (v,)))
                )
    edges = set()
    owner = {}
    adjacency = set()
    for f, (a, b, c) in enumerate(facets):
        for u, v in ((a, b), (b, c), (c, a)):
            e = (min(u, v), max(u, v))
            edges.add(e)
            if e in owner:
                adjacency.add((min(owner[e], f), max(owner[e], f)))
            else:
                owner[e] = f
    return Polytope(
        3,
        vertices,
        tuple(used),
        tuple(facets),
        tuple(planes),
        tuple(sorted(edges)),
        tuple(sorted(adjacency)),
    )


def is_convex_position(X) -> tuple[bool, int | None]:
    """(True, None) when every point is a hull vertex; else (False, index of a non-vertex)."""
    pts = as_points(X)
    n = len(pts)
    if n == 0:
        return True, None
    d = len(pts[0])
    if n <= d + 1:
        # affinely independent points are always in convex position; otherwise
        # fall through to the LP test
        if n <= 2 or _affinely_independent(pts):
            return True, None
        return _convex_position_lp(pts)
    if d == 3 and n > 40:
        got = _guided_convex_position(pts)
        if got is not None:
            return got
    try:
        hull = convex_hull(pts)
    except DegenerateInput:
        return _convex_position_lp(pts)
    if len(hull.vertices) == n:
        return True, None
    missing = sorted(set(range(n)) - set(hull.vertex_index))
    return False, missing[0]


def _homogeneous_rows(pts):
    """Rows (w*x, w) with w > 0 the point's own denominator lcm.

    Orientation signs of homogeneous rows equal those of the affine points.
    """
    from math import lcm

    rows = []
    for p in pts:
        w = lcm(*(int(c.denominator) for c in p))
        rows.append([int(c * w) for c in p] + [w])
    big = max(abs(v) for r in rows for v in r)
    return np.array(rows, dtype=np.int64 if big < (1 << 13) else object)


def _cofactor_normal(a, b, c):
    """h with h . p = det[a; b; c; p] for homogeneous 4-vectors."""
    M = np.stack([a, b, c], axis=1)  # (F, 3, 4)
    cols = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]]
    out = []
    for k, cs in enumerate(cols):
        m = M[:, :, cs]
        d3 = (
            m[:, 0, 0] * (m[:, 1, 1] * m[:, 2, 2] - m[:, 1, 2] * m[:, 2, 1])
            - m[:, 0, 1] * (m[:, 1, 0] * m[:, 2, 2] - m[:, 1, 2] * m[:, 2, 0])
            + m[:, 0, 2] * (m[:, 1, 0] * m[:, 2, 1] - m[:, 1, 1] * m[:, 2, 0])
        )
        out.append(-d3 if k % 2 == 0 else d3)
    return np.stack(out, axis=1)


def _guided_convex_position(pts):
    """Float hull proposes, exact orientation signs certify.

    Returns (True, None), (False, i) or None when the float answer cannot be
    certified.  A True certificate: every point is a vertex of some float
    facet whose plane has all other points strictly on one side.  A False
    certificate: the non-vertex lies strictly inside a tetrahedron of others.
    """
    try:
        from scipy.spatial import ConvexHull, Delaunay
    except ImportError:  # pragma: no cover
        return None
    F = np.array([[float(c) for c in p] for p in pts])
    F = F - F.mean(axis=0)
    F /= np.abs(F).max() or 1.0
    try:
        hull = ConvexHull(F)
    except Exception:
        return None
    n = len(pts)
    verts = sorted(set(int(v) for v in hull.vertices))
    if len(verts) < n:
        inside = sorted(set(range(n)) - set(verts))
        try:
            tri = Delaunay(F[verts])
        except Exception:
            return None
        for i in inside:
            s = int(tri.find_simplex(F[i]))
            if s < 0:
                continue
            tet = [verts[j] for j in tri.simplices[s]]
            if _strictly_inside_tetra([pts[j] for j in tet], pts[i]):
                return False, i
        return None
    H = _homogeneous_rows(pts)
    S = np.asarray(hull.simplices, dtype=np.int64)
    nrm = _cofactor_normal(H[S[:, 0]], H[S[:, 1]], H[S[:, 2]])
    vals = nrm @ H.T  # (F, n)
    pos = np.asarray(vals > 0, dtype=bool).sum(axis=1)
    neg = np.asarray(vals < 0, dtype=bool).sum(axis=1)
    if np.any(np.minimum(pos, neg) != 0) or np.any(pos + neg != n - 3):
        return None
    if len(set(S.ravel().tolist())) != n:
        return None
    return True, None


def hull_vertex_indices(X) -> tuple:
    """Indices of the vertices of conv(X) in R^3 (exactly certified)."""
    pts = as_points(X)
    if len(pts) > 40:
        try:
            from scipy.spatial import ConvexHull, Delaunay

            F = np.array([[float(c) for c in p] for p in pts])
            F = F - F.mean(axis=0)
            F /= np.abs(F).max() or 1.0
            verts = sorted(int(v) for v in ConvexHull(F).vertices)
            if _guided_convex_position([pts[i] for i in verts]) == (True, None):
                tri = Delaunay(F[verts])
                ok = True
                for i in sorted(set(range(len(pts))) - set(verts)):
                    s = int(tri.find_simplex(F[i]))
                    if s < 0 or not _strictly_inside_tetra([pts[verts[j]] for j in tri.simplices[s]], pts[i]):
                        ok = False
                        break
                if ok:
                    return tuple(verts)
        except ImportError:  # pragma: no cover
            pass
        except Exception:
            pass
    hull = convex_hull(pts)
    return tuple(sorted(hull.vertex_index))


def _strictly_inside_tetra(tet, q) -> bool:
    s0 = orient3(*tet)
    if s0 == 0:
        return False
    for k in range(4):
        rep = list(tet)
        rep[k] = q
        if orient3(*rep) != s0:
            return False
    return True


def _affinely_independent(pts) -> bool:
    base = pts[0]
    rows = [sub(p, base) for p in pts[1:]]
    return _rank(rows) == len(rows)


def _rank(rows) -> int:
    m = [list(r) for r in rows]
    rank = 0
    ncols = len(m[0]) if m else 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][col] != 0:
                f = m[r][col] / m[rank][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[rank])]
        rank += 1
    return rank


def _convex_position_lp(pts):
    for i, p in enumerate(pts):
        others = pts[:i] + pts[i + 1 :]
        if point_in_hull(p, others):
            return False, i
    return True, None


def point_in_hull(x, points) -> bool:
    """Exact test x ∈ conv(points)."""
    pts = as_points(points)
    if not pts:
        return False
    d = len(x)
    m = len(pts)
    A = [[pts[j][k] for j in range(m)] for k in range(d)] + [[ONE] * m]
    b = list(x) + [ONE]
    return lp.feasible(A_eq=A, b_eq=b, nvars=m).feasible


# --------------------------------------------------------------------------
# separation


@dataclass
class Separation:
    """Outcome of :func:`hulls_disjoint`.

    Disjoint: ``plane`` strictly separates, A ⊂ open H+ and B ⊂ open H-.
    Intersecting: ``point`` is a common point with convex weights over A and B.
    """

    disjoint: bool
    plane: OrientedPlane | None = None
    point: tuple | None = None
    weights_a: dict = field(default_factory=dict)
    weights_b: dict = field(default_factory=dict)

    def __bool__(self):
        return self.disjoint


def verify_separation(sep: Separation, A, B) -> bool:
    A, B = as_points(A), as_points(B)
    if sep.disjoint:
        pl = sep.plane
        return all(pl.side(a) > 0 for a in A) and all(pl.side(b) < 0 for b in B)
    d = len(sep.point)
    if any(w < 0 for w in sep.weights_a.values()) or any(w < 0 for w in sep.weights_b.values()):
        return False
    if sum(sep.weights_a.values()) != 1 or sum(sep.weights_b.values()) != 1:
        return False
    pa = tuple(sum((w * A[i][k] for i, w in sep.weights_a.items()), ZERO) for k in range(d))
    pb = tuple(sum((w * B[i][k] for i, w in sep.weights_b.items()), ZERO) for k in range(d))
    return pa == pb == tuple(sep.point)


def _plane_from_normal(w, A, B) -> OrientedPlane | None:
    lo = min(dot(w, a) for a in A)
    hi = max(dot(w, b) for b in B)
    if lo > hi:
        return OrientedPlane(w, (lo + hi) / 2)
    return None


def _numeric_separation(A, B):
    """Float LP maximizing the separation margin; returns a rational normal or None."""
    try:
        from scipy.optimize import linprog
    except ImportError:  # pragma: no cover
        return None
    FA = np.array([[float(c) for c in p] for p in A])
    FB = np.array([[float(c) for c in p] for p in B])
    allp = np.vstack([FA, FB])
    center = allp.mean(axis=0)
    spread = np.abs(allp - center).max()
    if not np.isfinite(spread) or spread == 0:
        return None
    FA = (FA - center) / spread
    FB = (FB - center) / spread
    d = FA.shape[1]
    # variables: w (d), c, delta ; maximize delta
    cost = np.zeros(d + 2)
    cost[-1] = -1.0
    rows_a = np.hstack([-FA, np.ones((len(FA), 1)), np.ones((len(FA), 1))])
    rows_b = np.hstack([FB, -np.ones((len(FB), 1)), np.ones((len(FB), 1))])
    A_ub = np.vstack([rows_a, rows_b])
    b_ub = np.zeros(len(A_ub))
    bounds = [(-1, 1)] * d + [(None, None), (None, 1)]
    res = linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if res.status != 0 or -res.fun <= 1e-9:
        return None
    w = res.x[:d]
    big = np.abs(w).max()
    scale = 2**40 / big
    return tuple(mpq(int(round(v * scale))) for v in w)


def _exact_intersection(A, B, cols_a=None, cols_b=None):
    ia = list(range(len(A))) if cols_a is None else list(cols_a)
    ib = list(range(len(B))) if cols_b is None else list(cols_b)
    d = len(A[0])
    na, nb = len(ia), len(ib)
    A_eq = []
    for k in range(d):
        A_eq.append([A[i][k] for i in ia] + [-B[j][k] for j in ib])
    A_eq.append([ONE] * na + [ZERO] * nb)
    A_eq.append([ZERO] * na + [ONE] * nb)
    b_eq = [ZERO] * d + [ONE, ONE]
    res = lp.feasible(A_eq=A_eq, b_eq=b_eq, nvars=na + nb)
    return res, ia, ib


def _intersection_result(res, A, ia, ib):
    wa = {ia[j]: res.x[j] for j in range(len(ia)) if res.x[j] != 0}
    wb = {ib[j]: res.x[len(ia) + j] for j in range(len(ib)) if res.x[len(ia) + j] != 0}
    d = len(A[0])
    point = tuple(sum((w * A[i][k] for i, w in wa.items()), ZERO) for k in range(d))
    return Separation(False, point=point, weights_a=wa, weights_b=wb)


def hulls_disjoint(A, B, numeric_filter: bool = True) -> Separation:
    """Decide conv(A) ∩ conv(B) = ∅ exactly, with a certificate either way."""
    A, B = as_points(A), as_points(B)
    if not A or not B:
        raise PreconditionViolated("both sets must be nonempty")
    if len(A[0]) != len(B[0]):
        raise DimensionMismatch("sets live in different dimensions")
    if numeric_filter and len(A) + len(B) > 12:
        w = _numeric_separation(A, B)
        if w is not None:
            plane = _plane_from_normal(w, A, B)
            if plane is not None:
                return Separation(True, plane=plane)
    res, ia, ib = _exact_intersection(A, B)
    if res.feasible:
        return _intersection_result(res, A, ia, ib)
    d = len(A[0])
    y = res.farkas
    w = tuple(y[:d])
    alpha, beta = y[d], y[d + 1]
    plane = OrientedPlane(w, (-alpha + beta) / 2)
    return Separation(True, plane=plane)


def kirchberger_witness(A, B) -> tuple[tuple, tuple]:
    """Smallest-total-size index subsets A', B' with intersecting hulls.

    Subsets are tried in increasing |A'| + |B'| and then lexicographically,
    so the witness is deterministic.  Raises HullsDisjoint if the hulls do not
    meet.
    """
    A, B = as_points(A), as_points(B)
    d = len(A[0])
    for total in range(2, d + 3):
        for sa in range(1, total):
            sb = total - sa
            if sa > len(A) or sb > len(B):
                continue
            for ca in itertools.combinations(range(len(A)), sa):
                for cb in itertools.combinations(range(len(B)), sb):
                    res, _, _ = _exact_intersection(A, B, ca, cb)
                    if res.feasible:
                        return ca, cb
    raise HullsDisjoint("hulls are disjoint; no Kirchberger witness exists")


# --------------------------------------------------------------------------
# projection


def projection_basis(direction) -> tuple[tuple, tuple]:
    """Two rational vectors spanning the orthogonal complement of ``direction``."""
    dvec = tuple(Q(c) for c in direction)
    if len(dvec) != 3 or all(c == 0 for c in dvec):
        raise DimensionMismatch("direction must be a nonzero 3-vector")
    k = min(range(3), key=lambda i: (abs(dvec[i]), i))
    e = tuple(ONE if i == k else ZERO for i in range(3))
    u = cross(dvec, e)
    v = cross(dvec, u)
    return u, v


def frame_coordinates(X, direction) -> list:
    """Coordinates (u.x, v.x, d.x) in a basis whose third axis is ``direction``.

    The map is linear and invertible, so convexity, separation and general
    position are all preserved; the projection along ``direction`` becomes
    "drop the last coordinate".
    """
    u, v = projection_basis(direction)
    dvec = tuple(Q(c) for c in direction)
    return [(dot(u, p), dot(v, p), dot(dvec, p)) for p in as_points(X)]


def project(X, direction) -> tuple[PointSet, list]:
    """Project a 3D set along ``direction``; raise NonGenericDirection unless
    the image is injective and in general position.  Returns the planar set and
    the index map (image index -> source index, here the identity)."""
    pts = as_points(X)
    if pts and len(pts[0]) != 3:
        raise DimensionMismatch("project expects a 3D point set")
    u, v = projection_basis(direction)
    img = [(dot(u, p), dot(v, p)) for p in pts]
    seen = {}
    for i, q in enumerate(img):
        if q in seen:
            raise NonGenericDirection("projection is not injective", witness=(seen[q], i))
        seen[q] = i
    if len(img) >= 3:
        ok, wit = is_general_position(img)
        if not ok:
            raise NonGenericDirection("projected points are not in general position", witness=wit)
    return PointSet(2, tuple(img)), list(range(len(pts)))


def generic_direction(X, max_tries: int = 10_000) -> tuple:
    """First direction (1, t, t^2), t = 1, 2, ..., passing the exact genericity check."""
    for t in range(1, max_tries + 1):
        direction = (mpq(1), mpq(t), mpq(t * t))
        try:
            project(X, direction)
        except NonGenericDirection:
            continue
        return direction
    raise NonGenericDirection("no generic direction found in the search range")


# --------------------------------------------------------------------------
# above / below


ABOVE = "above"
BELOW = "below"
DISJOINT_PROJECTIONS = "disjoint-projections"


def segment_relation(s1, s2) -> str:
    """Compare two 3D segments at the crossing of their (x, y) projections."""
    (p, q), (r, s) = [[tuple(Q(c) for c in e) for e in seg] for seg in (s1, s2)]
    if len(p) != 3:
        raise DimensionMismatch("segments must be in R^3")
    if p == q or r == s:
        raise DegenerateInput("segment endpoints must be distinct")
    d1 = (q[0] - p[0], q[1] - p[1])
    d2 = (s[0] - r[0], s[1] - r[1])
    den = d1[0] * d2[1] - d1[1] * d2[0]
    w = (r[0] - p[0], r[1] - p[1])
    if den == 0:
        if w[0] * d1[1] - w[1] * d1[0] == 0:
            raise DegenerateInput("projected segments are collinear")
        return DISJOINT_PROJECTIONS
    t = (w[0] * d2[1] - w[1] * d2[0]) / den
    u = (w[0] * d1[1] - w[1] * d1[0]) / den
    if t < 0 or t > 1 or u < 0 or u > 1:
        return DISJOINT_PROJECTIONS
    if t in (0, 1) or u in (0, 1):
        raise DegenerateInput("projected segments meet at an endpoint")
    z1 = p[2] + t * (q[2] - p[2])
    z2 = r[2] + u * (s[2] - r[2])
    if z1 == z2:
        raise DegenerateInput("segments intersect in space")
    return ABOVE if z1 > z2 else BELOW


# --------------------------------------------------------------------------
# conv(points ∪ polyhedron)


def _as_system(Q_) -> HalfSpaceSystem | None:
    if Q_ is None:
        return None
    if isinstance(Q_, Polytope):
        return Q_.halfspaces()
    if isinstance(Q_, HalfSpaceSystem):
        return Q_
    return HalfSpaceSystem(tuple(Q_))


def lambda_interval_member(x, apex, system: HalfSpaceSystem) -> bool:
    """x ∈ closure conv({apex} ∪ Q) via the 1-parameter family
    a.(x - lam*apex) <= (1 - lam) b, lam ∈ [0, 1]."""
    lo, hi = ZERO, ONE
    for a, b in system.halfspaces:
        vx = dot(a, x) - b
        va = dot(a, apex) - b
        # need vx <= lam * va
        if va > 0:
            bound = vx / va
            if bound > lo:
                lo = bound
        elif va < 0:
            bound = vx / va
            if bound < hi:
                hi = bound
        elif vx > 0:
            return False
        if lo > hi:
            return False
    return lo <= hi


def point_in_cone_hull(x, apexes, Q_=None) -> bool:
    """Decide x ∈ conv(apexes ∪ Q) for an H-polyhedron Q (possibly unbounded).

    Encoded as x = sum lam_i a_i + q, sum lam_i + t = 1, A q <= t b, which is
    linear in (lam, t, q) and covers recession directions of Q (t = 0).
    """
    x = tuple(Q(c) for c in x)
    apex_pts = as_points(apexes) if apexes is not None else []
    system = _as_system(Q_)
    if not apex_pts and system is None:
        raise PreconditionViolated("need apexes or a polyhedron")
    if system is None:
        return point_in_hull(x, apex_pts)
    if not apex_pts:
        return system.contains(x)
    if len(apex_pts) == 1:
        return lambda_interval_member(x, apex_pts[0], system)
    d = len(x)
    m = len(apex_pts)
    # variables: lam (m), t, q (d, free)
    nv = m + 1 + d
    A_eq = []
    for k in range(d):
        row = [apex_pts[i][k] for i in range(m)] + [ZERO] + [ONE if j == k else ZERO for j in range(d)]
        A_eq.append(row)
    A_eq.append([ONE] * m + [ONE] + [ZERO] * d)
    b_eq = list(x) + [ONE]
    A_ub, b_ub = [], []
    for a, b in system.halfspaces:
        A_ub.append([ZERO] * m + [-b] + list(a))
        b_ub.append(ZERO)
    free = list(range(m + 1, nv))
    return lp.feasible(A_ub, b_ub, A_eq, b_eq, nvars=nv, free=free).feasible
