"""Generators (Károlyi-Valtr, the planar Erdős-Szekeres lower bound, seeded
random sets) and exact maximum convex subsets in R^3."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from math import comb

import numpy as np
from gmpy2 import mpq

from .cupcap import extremal_cupcap_set, max_convex_subset_2d
from .errors import DegenerateInput, GuardExceeded, PreconditionViolated
from .exact import integer_matrix
from .geometry import PointSet, as_points, is_convex_position, is_general_position
from .search import max_independent_hyper

MC3_GUARD = 64


# --------------------------------------------------------------------------
# mc in R^3


def _orient4_signs(P, quads):
    a, b, c, d = (P[quads[:, i]] for i in range(4))
    u, v, w = b - a, c - a, d - a
    det = (
        u[:, 0] * (v[:, 1] * w[:, 2] - v[:, 2] * w[:, 1])
        - u[:, 1] * (v[:, 0] * w[:, 2] - v[:, 2] * w[:, 0])
        + u[:, 2] * (v[:, 0] * w[:, 1] - v[:, 1] * w[:, 0])
    )
    return np.asarray(det > 0, dtype=np.int64) - np.asarray(det < 0, dtype=np.int64)


def nonconvex_quintuples(X) -> list:
    """All 5-subsets of a general-position 3D set that are not in convex position.

    With s_i = (-1)^i * orient(omit i), five points are in convex position
    iff the signs split 2|3 (the Radon partition); a 1|4 split puts one point
    inside the tetrahedron of the others.
    """
    pts = as_points(X)
    n = len(pts)
    if n < 5:
        return []
    P = integer_matrix(pts)
    if P.dtype != object and int(np.abs(P).max()) >= (1 << 18):
        P = P.astype(object)
    quads = np.array(list(itertools.combinations(range(n), 4)), dtype=np.int64)
    signs = _orient4_signs(P, quads)
    if (signs == 0).any():
        z = int(np.flatnonzero(signs == 0)[0])
        raise DegenerateInput("four coplanar points", witness=tuple(int(v) for v in quads[z]))
    binom = np.array([[comb(v, j) for j in range(6)] for v in range(n + 1)], dtype=np.int64)
    table = np.zeros(comb(n, 4), dtype=np.int64)
    qr = sum(binom[quads[:, j], j + 1] for j in range(4))
    table[qr] = signs
    bad = []
    for first in range(n - 4):
        rest = np.array(list(itertools.combinations(range(first + 1, n), 4)), dtype=np.int64)
        if len(rest) == 0:
            continue
        five = np.hstack([np.full((len(rest), 1), first), rest])
        total = np.zeros(len(five), dtype=np.int64)
        for i in range(5):
            keep = [j for j in range(5) if j != i]
            sub = five[:, keep]
            r = sum(binom[sub[:, j], j + 1] for j in range(4))
            s = table[r] * (-1 if i % 2 else 1)
            total += s > 0
        hit = np.flatnonzero((total == 1) | (total == 4))
        bad.extend(tuple(int(v) for v in five[h]) for h in hit)
    return bad


def mc_3d(X, guard: int = MC3_GUARD, node_limit: int | None = 20_000_000):
    """Exact maximum convex subset of a general-position 3D set.

    Branch and bound over inclusion in the order of a fixed generic linear
    functional; a candidate is dropped as soon as it would complete a
    non-convex 5-subset.
    """
    pts = as_points(X)
    n = len(pts)
    if n > guard:
        raise GuardExceeded(f"|X| = {n} exceeds the mc guard {guard}")
    if n <= 4:
        if n == 4:
            ok, wit = is_general_position(pts)
            if not ok:
                raise DegenerateInput("four coplanar points", witness=wit)
        return n, tuple(range(n))
    bad = nonconvex_quintuples(pts)
    key = [pts[i][0] + pts[i][1] / 3 + pts[i][2] / 7 for i in range(n)]
    order = sorted(range(n), key=lambda i: key[i])
    best = max_independent_hyper(n, bad, order=order, node_limit=node_limit)
    ok, _ = is_convex_position([pts[i] for i in best])
    if not ok:
        raise AssertionError("mc witness is not in convex position")
    return len(best), best


def mc_bruteforce(X) -> int:
    pts = as_points(X)
    for r in range(len(pts), 0, -1):
        for c in itertools.combinations(range(len(pts)), r):
            if is_convex_position([pts[i] for i in c])[0]:
                return r
    return 0


def mc_any(X) -> tuple:
    pts = as_points(X)
    if not pts:
        return 0, ()
    d = len(pts[0])
    if d == 1:
        n = len(set(pts))
        return min(n, 2), tuple(range(min(n, 2)))
    if d == 2:
        return max_convex_subset_2d(pts)
    return mc_3d(pts)


# --------------------------------------------------------------------------
# Károlyi-Valtr


@dataclass
class KVConfig:
    d: int
    stage: int
    epsilons: list
    points: PointSet
    history: list = field(default_factory=list)  # PointSet per stage 0..stage
    mc: dict = field(default_factory=dict)  # stage -> mc(X_stage)
    mc_proj: dict = field(default_factory=dict)  # stage -> mc(pi(X_stage))
    halvings: list = field(default_factory=list)


def drop_last(X):
    return [p[:-1] for p in as_points(X)]


def _jitter(pts, eps, d, rng):
    out = []
    for p in pts:
        out.append(
            tuple(c + eps ** (d - k) * mpq(rng.randint(-256, 256), 256 * 1024) for k, c in enumerate(p))
        )
    return out


def _stage_ok(pts, d, check_gp: bool = True) -> bool:
    if len(set(pts)) != len(pts):
        return False
    proj = drop_last(pts)
    if len(set(proj)) != len(proj):
        return False
    if check_gp and len(pts) > d:
        if not is_general_position(pts)[0]:
            return False
    if d == 3 and len(proj) >= 3 and not is_general_position(proj)[0]:
        return False
    if d == 2 and len({p[0] for p in pts}) != len(pts):
        return False
    return True


def karolyi_valtr(d: int, i: int, seed: int = 0, check_recurrence: bool = True, max_halvings: int = 20) -> KVConfig:
    """X_0 = {0}; X_{s} = {x ± (eps^d, ..., eps) : x ∈ X_{s-1}} followed by a
    small deterministic jitter.  eps starts at (1/4)^s and halves until the
    stage is in general position (with its projection) and, when requested,
    mc(X_s) <= mc(X_{s-1}) + mc(pi(X_{s-1})) holds."""
    if d not in (2, 3):
        raise ValueError("d must be 2 or 3")
    if i < 1:
        raise ValueError("i must be at least 1")
    rng = random.Random(seed * 1_000_003 + d)
    cur = [tuple(mpq(0) for _ in range(d))]
    cfg = KVConfig(d, 0, [], PointSet(d, tuple(cur)), [PointSet(d, tuple(cur))])
    cfg.mc[0] = 1
    cfg.mc_proj[0] = 1
    for s in range(1, i + 1):
        eps = mpq(1, 4**s)
        for h in range(max_halvings + 1):
            shift = tuple(eps ** (d - k) for k in range(d))
            raw = [tuple(c + v for c, v in zip(p, shift)) for p in cur] + [
                tuple(c - v for c, v in zip(p, shift)) for p in cur
            ]
            cand = _jitter(raw, eps, d, rng)
            if _stage_ok(cand, d):
                if not check_recurrence:
                    break
                m_new = mc_any(cand)[0]
                if m_new <= cfg.mc[s - 1] + cfg.mc_proj[s - 1]:
                    cfg.mc[s] = m_new
                    break
            eps = eps / 2
        else:
            raise AssertionError(f"stage {s}: no eps passed after {max_halvings} halvings")
        cur = cand
        cfg.epsilons.append(eps)
        cfg.halvings.append(h)
        cfg.history.append(PointSet(d, tuple(cur)))
        if check_recurrence:
            cfg.mc_proj[s] = mc_any(drop_last(cur))[0]
    cfg.stage = i
    cfg.points = PointSet(d, tuple(cur))
    return cfg


def verify_mc_recurrence(cfg: KVConfig, stage: int | None = None) -> bool:
    """Recompute mc(X_s), mc(X_{s-1}) and mc(pi(X_{s-1})) from scratch and check."""
    stages = [stage] if stage is not None else range(1, cfg.stage + 1)
    for s in stages:
        cur = cfg.history[s]
        prev = cfg.history[s - 1]
        lhs = mc_any(cur)[0]
        rhs = mc_any(prev)[0] + mc_any(drop_last(prev))[0]
        if lhs > rhs:
            return False
    return True


# --------------------------------------------------------------------------
# planar Erdős-Szekeres lower bound


def es2_lower_construction(n: int) -> PointSet:
    """2^{n-2} planar points with no n in convex position.

    Blocks T_i (i = 0..n-2) with no (i+2)-cap and no (n-i)-cup are squashed
    flat and placed left to right at centers (i, i^2 - S*i): every slope
    between blocks is steeply negative and those slopes increase along the
    chain.  A convex polygon then takes a cap from its leftmost block, single
    points from intermediate blocks and a cup from its rightmost block.
    """
    if not 3 <= n <= 8:
        raise PreconditionViolated("n must be in 3..8")
    m = n - 2
    S = 2 * m + 4
    # displacements inside a block stay below w and below h vertically
    w = mpq(1, 200 * (S + m + 2))
    out = []
    for i in range(m + 1):
        block = as_points(extremal_cupcap_set(i + 2, n - i))
        xs = [p[0] for p in block]
        ys = [p[1] for p in block]
        W = max(xs) - min(xs) or mpq(1)
        H = max(ys) - min(ys) or mpq(1)
        smax = mpq(1)
        for a, b in itertools.combinations(block, 2):
            smax = max(smax, abs((b[1] - a[1]) / (b[0] - a[0])))
        # internal slopes shrink to at most 1/4 after scaling
        hscale = w / W / (4 * smax)
        cx, cy = mpq(i), mpq(i * i - S * i)
        for x, y in block:
            out.append((cx + (x - min(xs)) * w / W, cy + (y - min(ys)) * hscale))
    if len(out) > 2:
        ok, wit = is_general_position(out)
        if not ok:
            raise AssertionError(f"construction degenerate at {wit}")
    return PointSet(2, tuple(out))


# --------------------------------------------------------------------------
# random sets

DISTRIBUTIONS = ("cube", "sphere", "moment-curve-jitter")
GP_CHECK_LIMIT = {2: 3000, 3: 400}


def _draw(dim, dist, rng):
    R = 1 << 16
    if dist == "cube":
        return tuple(mpq(rng.randrange(R), R) for _ in range(dim))
    if dist == "sphere":
        # inverse stereographic projection of a rational point: exactly on the sphere
        u = [mpq(rng.randrange(-R, R), R // 4) for _ in range(dim - 1)]
        s = sum(c * c for c in u)
        return tuple([2 * c / (s + 1) for c in u] + [(s - 1) / (s + 1)])
    if dist == "moment-curve-jitter":
        t = mpq(rng.randrange(1, R), R // 8)
        jit = [mpq(rng.randrange(-16, 17), 1 << 24) for _ in range(dim)]
        return tuple(t ** (k + 1) + jit[k] for k in range(dim))
    raise ValueError(f"unknown distribution {dist!r}")


def random_pointset(dim: int, n: int, distribution: str = "cube", seed: int = 0, check_gp: bool | None = None) -> PointSet:
    """Seeded rational point set; general position is enforced by redrawing
    offending points whenever |X| is within the exact check limit."""
    if dim not in (2, 3):
        raise ValueError("dim must be 2 or 3")
    if distribution not in DISTRIBUTIONS:
        raise ValueError(f"distribution must be one of {DISTRIBUTIONS}")
    rng = random.Random(f"{dim}-{n}-{distribution}-{seed}")
    pts = []
    seen = set()
    while len(pts) < n:
        p = _draw(dim, distribution, rng)
        if p not in seen:
            seen.add(p)
            pts.append(p)
    if check_gp is None:
        check_gp = n <= GP_CHECK_LIMIT[dim]
    if check_gp and n > dim:
        for _ in range(10_000):
            ok, wit = is_general_position(pts)
            if ok:
                break
            j = wit[-1]
            p = _draw(dim, distribution, rng)
            while p in seen:
                p = _draw(dim, distribution, rng)
            seen.add(p)
            pts[j] = p
        else:
            raise AssertionError("could not reach general position")
    return PointSet(dim, tuple(pts))


# --------------------------------------------------------------------------
# supported clusters


def _meet(p1, p2, q1, q2):
    d1 = (p2[0] - p1[0], p2[1] - p1[1])
    d2 = (q2[0] - q1[0], q2[1] - q1[1])
    den = d1[0] * d2[1] - d1[1] * d2[0]
    t = ((q1[0] - p1[0]) * d2[1] - (q1[1] - p1[1]) * d2[0]) / den
    return (p1[0] + t * d1[0], p1[1] + t * d1[1])


def _unit(v):
    n = float(np.sqrt(sum(c * c for c in v)))
    return [c / n for c in v]


def supported_clusters(
    m: int = 8,
    seed: int = 0,
    heights=(60, -40, 20, -60, -20),
    aims=None,
    frac: float = 0.15,
    curvature: float = 0.4,
) -> PointSet:
    """Six cup vertices (on a low cubic) plus one small cluster in each of the five support
    regions, built in the (u, v, d) frame of direction (1, 1, 1) and mapped
    back, so the pipeline's first projection sees exactly this layout.

    Cluster j sits at the centroid of its region triangle at height
    ``heights[j]``; its m points lie on a tiny paraboloid patch whose axis
    points at the clusters listed in ``aims[j]`` (default: the centroid of all
    clusters).  Coordinates are rounded to a 2^-12 grid.
    """
    from .exact import det
    from .geometry import projection_basis

    aims = {0: [1, 2], 2: [0]} if aims is None else aims
    rng = random.Random(f"clusters-{m}-{seed}")
    V = [(10.0 * i, 3.0 * i * i) for i in range(6)]
    centers, radii = [], []
    for i in range(5):
        a, b = V[i], V[i + 1]
        prev = V[i - 1] if i > 0 else V[5]
        nxt = V[i + 2] if i + 2 < 6 else V[0]
        apex = _meet(prev, a, b, nxt)
        c = ((a[0] + b[0] + apex[0]) / 3, (a[1] + b[1] + apex[1]) / 3)
        area = abs((b[0] - a[0]) * (apex[1] - a[1]) - (b[1] - a[1]) * (apex[0] - a[0])) / 2
        per = sum(float(np.hypot(p[0] - q[0], p[1] - q[1])) for p, q in ((a, b), (b, apex), (apex, a)))
        centers.append((c[0], c[1], float(heights[i])))
        radii.append(frac * 2 * area / per)
    # cup vertices on a cubic: no four of them coplanar
    frame = [(mpq(x), mpq(y), mpq(i**3, 20)) for i, (x, y) in enumerate(V)]
    for j, c in enumerate(centers):
        tgt = [centers[i] for i in aims.get(j, range(5))]
        w = _unit([sum(t[k] for t in tgt) / len(tgt) - c[k] for k in range(3)])
        helper = [1.0, 0.0, 0.0] if abs(w[0]) < 0.9 else [0.0, 1.0, 0.0]
        u1 = _unit(np.cross(w, helper).tolist())
        u2 = np.cross(w, u1).tolist()
        for i in range(m):
            th = 2 * np.pi * (i + 0.3 * rng.random()) / m
            r = radii[j] * (0.6 + 0.4 * rng.random())
            p = [c[k] + r * (np.cos(th) * u1[k] + np.sin(th) * u2[k]) + curvature * r * r * w[k] for k in range(3)]
            frame.append(tuple(mpq(round(t * 4096), 4096) for t in p))
    u, v = projection_basis((1, 1, 1))
    M = [list(u), list(v), [mpq(1)] * 3]
    D = det(M)
    pts = []
    for f in frame:
        x = []
        for k in range(3):
            A = [row[:] for row in M]
            for r in range(3):
                A[r][k] = f[r]
            x.append(det(A) / D)
        pts.append(tuple(x))
    return PointSet(3, tuple(pts))
