"""Planar cups and caps: DPs, the cups-vs-caps threshold, extremal sets,
maximum convex subsets and the support structure of a cup or cap.

The DPs run on integer-scaled coordinates (exact int64 when the values are
small enough, Python ints otherwise) and are vectorized over one vertex of
the chain at a time.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from functools import reduce
from itertools import accumulate
from math import comb, lcm

import numpy as np
from gmpy2 import mpq

from .errors import DegenerateInput, NoPolygonOfRequestedSize, PreconditionViolated
from .exact import integer_matrix
from .geometry import HalfSpaceSystem, PointSet, as_points, orient2

CUP = "cup"
CAP = "cap"


@dataclass(frozen=True)
class CupCapWitness:
    kind: str
    indices: tuple  # left to right, into the input point set

    def __len__(self):
        return len(self.indices)


def is_chain(points, indices, kind) -> bool:
    """Slope monotonicity check: strictly left turns for cups, right turns for caps."""
    pts = as_points(points)
    seq = [pts[i] for i in indices]
    if any(seq[i][0] >= seq[i + 1][0] for i in range(len(seq) - 1)):
        return False
    want = 1 if kind == CUP else -1
    return all(orient2(seq[i], seq[i + 1], seq[i + 2]) == want for i in range(len(seq) - 2))


def shear_to_distinct_x(X):
    """Smallest t >= 0 such that (x + t*y, y) has pairwise distinct x; returns (points, t)."""
    pts = as_points(X)
    if len(set(pts)) != len(pts):
        raise DegenerateInput("repeated point; no shear separates it")
    t = 0
    while True:
        xs = [p[0] + t * p[1] for p in pts]
        if len(set(xs)) == len(xs):
            return [(x, p[1]) for x, p in zip(xs, pts)], mpq(t)
        t += 1


def reflect_y(X):
    return [(p[0], -p[1]) for p in as_points(X)]


def _x_order(pts):
    order = sorted(range(len(pts)), key=lambda i: pts[i][0])
    for a, b in zip(order, order[1:]):
        if pts[a][0] == pts[b][0]:
            raise DegenerateInput("two points share an x-coordinate", witness=(a, b))
    return order


def _chain_table(P, sign, start=None):
    """L[i, j] = size of the longest chain ending with edge i -> j (0 if none).

    ``P`` is sorted by x.  sign=+1 builds cups (left turns), -1 caps.  With
    ``start`` set, only chains beginning at that vertex are counted.
    """
    n = len(P)
    L = np.zeros((n, n), dtype=np.int64)
    pred = np.full((n, n), -1, dtype=np.int64)
    if start is None:
        iu = np.triu_indices(n, 1)
        L[iu] = 2
    else:
        L[start, start + 1 :] = 2
    lo = 0 if start is None else start
    for m in range(lo, n - 1):
        H = np.flatnonzero(L[:m, m] > 0)
        if len(H) == 0:
            continue
        J = np.arange(m + 1, n)
        d1 = P[m] - P[H]
        d2 = P[J] - P[m]
        cr = d1[:, 0, None] * d2[None, :, 1] - d1[:, 1, None] * d2[None, :, 0]
        ok = (cr > 0) if sign > 0 else (cr < 0)
        ok = np.asarray(ok, dtype=bool)
        vals = np.where(ok, L[H, m][:, None], 0)
        best = vals.argmax(axis=0)
        bv = vals[best, np.arange(len(J))]
        upd = (bv > 0) & (bv + 1 > L[m, J])
        L[m, J[upd]] = bv[upd] + 1
        pred[m, J[upd]] = H[best[upd]]
    return L, pred


def _unwind(pred, i, j):
    seq = [j, i]
    a, b = i, j
    h = pred[a, b]
    while h >= 0:
        seq.append(int(h))
        a, b = int(h), a
        h = pred[a, b]
    return seq[::-1]


def _prepare(X):
    pts = as_points(X)
    if pts and len(pts[0]) != 2:
        raise PreconditionViolated("cups and caps live in the plane")
    order = _x_order(pts)
    P = integer_matrix([pts[i] for i in order])
    return pts, order, P


def _largest_chain(X, kind):
    pts, order, P = _prepare(X)
    n = len(pts)
    if n == 0:
        return 0, CupCapWitness(kind, ())
    if n == 1:
        return 1, CupCapWitness(kind, (0,))
    L, pred = _chain_table(P, 1 if kind == CUP else -1)
    flat = int(L.argmax())
    i, j = divmod(flat, n)
    seq = _unwind(pred, i, j)
    return int(L[i, j]), CupCapWitness(kind, tuple(order[s] for s in seq))


def largest_cup(X):
    """Exact size of the largest cup, with a left-to-right witness."""
    return _largest_chain(X, CUP)


def largest_cap(X):
    return _largest_chain(X, CAP)


def find_cap_or_cup(X, a: int, b: int):
    """An a-cap or a b-cup (as a CupCapWitness), or None if neither exists.

    Points are added in x-order; each new rightmost point extends the cup
    and cap tables of the prefix, so the search stops at the first prefix
    holding a chain of the requested size.
    """
    pts, order, P = _prepare(X)
    n = len(pts)
    for kind, want in ((CAP, a), (CUP, b)):
        if want <= min(n, 2):
            return CupCapWitness(kind, tuple(order[i] for i in range(want)))
    if n < 3:
        return None
    D = P[None, :, :] - P[:, None, :]  # D[h, m] = P[m] - P[h]
    below = np.tril(np.ones((n, n), dtype=bool), -1).T  # h < m
    tabs = {kind: (np.zeros((n, n), dtype=np.int64), np.full((n, n), -1, dtype=np.int64)) for kind in (CUP, CAP)}
    for j in range(1, n):
        E = P[j] - P[:j]  # E[m] = P[j] - P[m]
        cr = D[:j, :j, 0] * E[None, :, 1] - D[:j, :j, 1] * E[None, :, 0]
        for kind, want in ((CUP, b), (CAP, a)):
            L, pred = tabs[kind]
            ok = (cr > 0 if kind == CUP else cr < 0) & below[:j, :j]
            vals = np.where(ok, L[:j, :j], 0)
            best = vals.argmax(axis=0)
            bv = vals[best, np.arange(j)]
            L[:j, j] = np.where(bv > 0, bv + 1, 2)
            pred[:j, j] = np.where(bv > 0, best, -1)
            hit = np.flatnonzero(L[:j, j] >= want)
            if len(hit):
                seq = _unwind(pred, int(hit[0]), j)[-want:]
                return CupCapWitness(kind, tuple(order[i] for i in seq))
    return None


def has_cap_or_cup(X, a: int, b: int) -> bool:
    return find_cap_or_cup(X, a, b) is not None


def cupcap_threshold(a: int, b: int) -> int:
    """Least N forcing an a-cap or a b-cup among N points in general position."""
    if a < 2 or b < 2:
        raise ValueError("a and b must be at least 2")
    return comb(a + b - 4, a - 2) + 1


# --------------------------------------------------------------------------
# extremal construction


def _max_slope(pts):
    best = None
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            (x1, y1), (x2, y2) = pts[i], pts[j]
            s = mpq(y2 - y1, x2 - x1) if x2 != x1 else None
            if s is None:
                raise DegenerateInput("vertical pair in extremal block")
            if best is None or s > best:
                best = s
    return best


def _extremal_int(a, b, memo):
    key = (a, b)
    if key in memo:
        return memo[key]
    if a == 2 or b == 2:
        out = [(0, 0)]
    else:
        left = _extremal_int(a, b - 1, memo)
        right = _extremal_int(a - 1, b, memo)
        wl = max(p[0] for p in left)
        hl = max(p[1] for p in left)
        wr = max(p[0] for p in right)
        slopes = [s for s in (_max_slope(left) if len(left) > 1 else None,
                              _max_slope(right) if len(right) > 1 else None) if s is not None]
        smax = max(slopes + [mpq(0)])
        span = wl + 1 + wr
        # every left-to-right slope must exceed every slope inside either block
        dy = hl + int((smax + 1) * span) + 1
        while mpq(dy - hl, span) <= smax:
            dy *= 2
        out = list(left) + [(x + wl + 1, y + dy) for x, y in right]
    memo[key] = out
    return out


def extremal_cupcap_set(a: int, b: int) -> PointSet:
    """binomial(a+b-4, a-2) points with no a-cap and no b-cup.

    Recursive two-block placement: the (a, b-1) set on the left and the
    (a-1, b) set on the right, lifted so that every slope between the blocks
    exceeds every slope inside them.  A cap can then use at most one point of
    the left block and a cup at most one point of the right block.
    """
    if a < 2 or b < 2:
        raise ValueError("a and b must be at least 2")
    pts = _extremal_int(a, b, {})
    return PointSet(2, tuple((mpq(x), mpq(y)) for x, y in pts))


# --------------------------------------------------------------------------
# maximum convex subset in the plane


def max_convex_subset_2d(X):
    """Exact mc(X) for a planar set in general position, with witness indices.

    A convex polygon is a cup and a cap sharing their leftmost and rightmost
    points; for every leftmost point l the two start-anchored DPs give the best
    cup and cap to every right endpoint r.
    """
    pts = as_points(X)
    n = len(pts)
    if n <= 2:
        return n, tuple(range(n))
    work, _ = shear_to_distinct_x(pts)
    order = _x_order(work)
    P = integer_matrix([work[i] for i in order])
    best_size, best = 2, (order[0], order[1])
    for l in range(n - 1):
        Lc, pc = _chain_table(P, 1, start=l)
        La, pa = _chain_table(P, -1, start=l)
        cup_end = Lc.max(axis=0)
        cap_end = La.max(axis=0)
        for r in range(l + 1, n):
            size = int(cup_end[r]) + int(cap_end[r]) - 2
            if size > best_size:
                ic = int(Lc[:, r].argmax())
                ia = int(La[:, r].argmax())
                lower = _unwind(pc, ic, r)
                upper = _unwind(pa, ia, r)
                best_size = size
                best = tuple(order[s] for s in sorted(set(lower) | set(upper)))
    return best_size, tuple(sorted(best))


# --------------------------------------------------------------------------
# support structure


@dataclass
class SupportStructure:
    kind: str
    polygon: tuple  # k+1 point indices, left to right
    regions: list  # k HalfSpaceSystem objects (strict interiors)
    members: list  # point indices strictly inside each region
    guarantee_fraction: float  # the 2^{-40k} fraction, reported only

    @property
    def counts(self):
        return [len(m) for m in self.members]

    @property
    def k(self):
        return len(self.regions)


def _line_halfplane(p, q, keep):
    """Half-plane a.y <= b bounded by line pq whose interior contains ``keep``."""
    a = (q[1] - p[1], p[0] - q[0])
    b = a[0] * p[0] + a[1] * p[1]
    if a[0] * keep[0] + a[1] * keep[1] > b:
        a = (-a[0], -a[1])
        b = -b
    return a, b


def support_regions(points, polygon):
    """The k regions attached to the supporting edges of a (k+1)-cup or cap."""
    return _support_regions(as_points(points), polygon)


def _support_regions(pts, polygon):
    v = [pts[i] for i in polygon]
    m = len(v)
    regions = []
    for i in range(m - 1):
        a, b = v[i], v[i + 1]
        prev = v[i - 1] if i > 0 else v[m - 1]
        nxt = v[i + 2] if i + 2 < m else v[0]
        # beyond the edge: the side not containing the rest of the polygon
        other = next(v[j] for j in range(m) if j not in (i, i + 1))
        (ea, eb) = _line_halfplane(a, b, other)
        edge_out = (tuple(-c for c in ea), -eb)
        h_prev = _line_halfplane(prev, a, b)
        h_next = _line_halfplane(b, nxt, a)
        regions.append(HalfSpaceSystem((edge_out, h_prev, h_next)))
    return regions


def _region_masks(P_int, regions_int, P64=None, pmax=None, Pf=None):
    """Strict membership masks; int64 rows whenever no product can overflow.

    Otherwise ``Pf`` (floats of ``P_int``) decides every point whose residual
    clears a relative error bound and exact integers decide the rest.
    """
    masks = []
    for rows in regions_int:
        m = np.ones(len(P_int), dtype=bool)
        for a0, a1, b in rows:
            if P64 is not None and (abs(a0) + abs(a1)) * pmax + abs(b) < (1 << 62):
                m &= P64[:, 0] * a0 + P64[:, 1] * a1 < b
            elif Pf is not None and _no_underflow((a0, a1, b)):
                s = max(abs(a0), abs(a1), abs(b)) or 1
                f0, f1, fb = a0 / s, a1 / s, b / s
                r = Pf[:, 0] * f0 + Pf[:, 1] * f1 - fb
                mag = np.abs(Pf[:, 0]) * abs(f0) + np.abs(Pf[:, 1]) * abs(f1) + abs(fb)
                row = r < 0
                unsure = np.flatnonzero(np.abs(r) <= 1e-9 * mag + 1e-300)
                for i in unsure:
                    row[i] = P_int[i, 0] * a0 + P_int[i, 1] * a1 < b
                m &= row
            else:
                m &= np.asarray(P_int[:, 0] * a0 + P_int[:, 1] * a1 < b, dtype=bool)
        masks.append(m)
    return masks


def _no_underflow(row) -> bool:
    s = max(abs(c) for c in row) or 1
    return all(c == 0 or c / s != 0.0 for c in row)


def _float_rows(P_int):
    try:
        Pf = P_int.astype(float)
    except OverflowError:
        return None
    return Pf if np.isfinite(Pf).all() else None


def _int_regions(regions, L):
    out = []
    for reg in regions:
        rows = []
        for a, b in reg.halfspaces:
            # a.(y/L) < b  <=>  a.y < b*L ; clear denominators of a and b
            s = lcm(int(a[0].denominator), int(a[1].denominator), int(b.denominator))
            rows.append((int(a[0] * s), int(a[1] * s), int(b * s * L)))
        out.append(rows)
    return out


def count_in_regions(points, regions):
    """Indices of points strictly inside each region."""
    pts = as_points(points)
    L = reduce(lcm, (int(c.denominator) for p in pts for c in p), 1)
    P = np.array([[int(c * L) for c in p] for p in pts], dtype=object)
    masks = _region_masks(P, _int_regions(regions, L))
    return [list(np.flatnonzero(m)) for m in masks]


def _count_chains(P, sign, length):
    """cnt[i, j] = number of chains of exactly ``length`` points ending with edge i->j."""
    n = len(P)
    cnt = np.zeros((n, n), dtype=object)
    iu = np.triu_indices(n, 1)
    cnt[iu] = 1
    ok_cache = {}
    for m in range(n):
        if m == 0 or m == n - 1:
            continue
        H = np.arange(m)
        J = np.arange(m + 1, n)
        d1 = P[m] - P[H]
        d2 = P[J] - P[m]
        cr = d1[:, 0, None] * d2[None, :, 1] - d1[:, 1, None] * d2[None, :, 0]
        ok_cache[m] = np.asarray((cr > 0) if sign > 0 else (cr < 0), dtype=bool)
    tables = [None, None, cnt]
    for ln in range(3, length + 1):
        prev = tables[-1]
        cur = np.zeros((n, n), dtype=object)
        for m in range(1, n - 1):
            inc = prev[:m, m]
            if not inc.any():
                continue
            ok = ok_cache[m]
            cur[m, m + 1 :] = (ok * inc[:, None]).sum(axis=0)
        tables.append(cur)
    return tables, ok_cache


def _sample_chain(tables, ok_cache, length, i, j, rng):
    seq = [j, i]
    for ln in range(length - 1, 1, -1):
        m = seq[-1]
        nxt = seq[-2]
        prev = tables[ln]
        col = nxt - m - 1
        weights = [(h, prev[h, m]) for h in range(m) if ok_cache[m][h, col] and prev[h, m] > 0]
        total = sum(w for _, w in weights)
        r = rng.randrange(int(total))
        for h, w in weights:
            if r < w:
                seq.append(h)
                break
            r -= w
    return seq[::-1]


def _enumerate_chains(tables, ok_cache, length, n, limit, rng):
    final = tables[length]
    ends = [(i, j) for i in range(n) for j in range(i + 1, n) if final[i, j] > 0]
    total = sum(int(final[i, j]) for i, j in ends)
    if total == 0:
        return []
    out = set()
    if total <= limit:
        def rec(seq, ln):
            if ln == 2:
                out.add(tuple(seq[::-1]))
                return
            m, nxt = seq[-1], seq[-2]
            col = nxt - m - 1
            for h in range(m):
                if ok_cache[m][h, col] and tables[ln - 1][h, m] > 0:
                    rec(seq + [h], ln - 1)

        for i, j in ends:
            rec([j, i], length)
        return sorted(out)
    cum = list(accumulate(int(final[i, j]) for i, j in ends))
    for _ in range(limit):
        i, j = rng.choices(ends, cum_weights=cum)[0]
        out.add(tuple(_sample_chain(tables, ok_cache, length, i, j, rng)))
    return sorted(out)


def _edge_weights(P, sign):
    """W[i, j]: points strictly between i and j in x-order lying beyond the
    edge i -> j (below it for cups, above for caps)."""
    n = len(P)
    W = np.zeros((n, n), dtype=np.int64)
    for i in range(n - 1):
        J = np.arange(i + 1, n)
        d = P[J] - P[i]  # (J, 2)
        rel = P[None, :, :] - P[i][None, None, :]  # (1, n, 2)
        cr = d[:, None, 0] * rel[:, :, 1] - d[:, None, 1] * rel[:, :, 0]  # (J, n)
        beyond = np.asarray((cr < 0) if sign > 0 else (cr > 0), dtype=bool)
        idx = np.arange(n)[None, :]
        between = (idx > i) & (idx < J[:, None])
        W[i, J] = (beyond & between).sum(axis=1)
    return W


def _balanced_chain(P, sign, length):
    """Chain of ``length`` points maximizing the smallest edge weight (exact DP)."""
    n = len(P)
    W = _edge_weights(P, sign)
    NEG = -1
    V = np.full((n, n), NEG, dtype=np.int64)
    iu = np.triu_indices(n, 1)
    V[iu] = W[iu]
    preds = []
    for _ in range(3, length + 1):
        cur = np.full((n, n), NEG, dtype=np.int64)
        pred = np.full((n, n), -1, dtype=np.int64)
        for m in range(1, n - 1):
            H = np.flatnonzero(V[:m, m] >= 0)
            if len(H) == 0:
                continue
            J = np.arange(m + 1, n)
            d1 = P[m] - P[H]
            d2 = P[J] - P[m]
            cr = d1[:, 0, None] * d2[None, :, 1] - d1[:, 1, None] * d2[None, :, 0]
            ok = np.asarray((cr > 0) if sign > 0 else (cr < 0), dtype=bool)
            vals = np.where(ok, np.minimum(V[H, m][:, None], W[m, J][None, :]), NEG)
            best = vals.argmax(axis=0)
            bv = vals[best, np.arange(len(J))]
            cur[m, J] = bv
            pred[m, J] = np.where(bv >= 0, H[best], -1)
        V = cur
        preds.append(pred)
    if V.max() < 0:
        return None
    i, j = np.unravel_index(int(V.argmax()), V.shape)
    seq = [int(j), int(i)]
    for pred in reversed(preds):
        h = int(pred[seq[-1], seq[-2]])
        seq.append(h)
    return seq[::-1]


def _climb(pts, pool, start, score, budget=1500):
    """Hill-climb on the score by replacing one polygon vertex at a time,
    stopping after ``budget`` score evaluations."""
    cur = start
    sign = 1 if cur[1] == CUP else -1
    improved = True
    while improved and budget > 0:
        improved = False
        poly = cur[2]
        for pos in range(len(poly)):
            for c in pool:
                if c in poly:
                    continue
                cand = list(poly)
                cand[pos] = c
                try:
                    cand.sort(key=lambda i: pts[i][0])
                except TypeError:  # pragma: no cover
                    continue
                if len({pts[i][0] for i in cand}) < len(cand):
                    continue
                if not _is_chain_sorted([pts[i] for i in cand], sign):
                    continue
                got = score(cur[1], tuple(cand))
                budget -= 1
                if got[0] > cur[0]:
                    cur = got
                    improved = True
                    break
            if improved:
                break
    return cur


def _is_chain_sorted(seq, sign) -> bool:
    for a, b, c in zip(seq, seq[1:], seq[2:]):
        cr = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        if cr * sign <= 0:
            return False
    return True


def por_valtr_support(
    X, k: int, pool_limit: int = 90, max_candidates: int = 4000, seed: int = 0, climb_starts: int = 3
):
    """Find a (k+1)-cup or cap whose k support regions are all well populated.

    Candidates are the (k+1)-cups and caps of a candidate pool (all points
    when |X| <= pool_limit, a seeded sample otherwise), enumerated exhaustively
    or sampled uniformly through the DP counts.  The polygon maximizing the
    smallest region count wins; ties go to the larger total, then to the
    lexicographically smaller index tuple.  One extra candidate per kind
    comes from an exact max-min DP on a per-edge proxy count (points beyond
    the edge within its x-range).  The best few candidates are then
    improved by single-vertex swaps within the pool while the score rises.
    """
    pts = as_points(X)
    n = len(pts)
    if k < 2:
        raise ValueError("k must be at least 2")
    rng = random.Random(seed)
    if n <= pool_limit:
        pool = list(range(n))
    else:
        pool = sorted(rng.sample(range(n), pool_limit))
    pool_pts = [pts[i] for i in pool]
    order = _x_order(pool_pts)
    P = integer_matrix([pool_pts[i] for i in order])
    candidates = []
    for kind, sign in ((CUP, 1), (CAP, -1)):
        tables, ok_cache = _count_chains(P, sign, k + 1)
        for chain in _enumerate_chains(tables, ok_cache, k + 1, len(P), max_candidates, rng):
            candidates.append((kind, tuple(pool[order[c]] for c in chain)))
        chain = _balanced_chain(P, sign, k + 1)
        if chain is not None:
            candidates.append((kind, tuple(pool[order[c]] for c in chain)))
    if not candidates:
        for kind, fn in ((CUP, largest_cup), (CAP, largest_cap)):
            size, wit = fn(pts)
            if size >= k + 1:
                candidates.append((kind, wit.indices[: k + 1]))
    if not candidates:
        raise NoPolygonOfRequestedSize(f"no {k + 1}-cup or {k + 1}-cap exists")

    L = reduce(lcm, (int(c.denominator) for p in pts for c in p), 1)
    P_all = integer_matrix(pts)
    P64, pmax, Pf = None, None, None
    if P_all.dtype != object:
        P64, pmax = P_all, int(np.abs(P_all).max())
        P_all = P_all.astype(object)
    else:
        Pf = _float_rows(P_all)

    def score(kind, poly):
        regions = _support_regions(pts, poly)
        masks = _region_masks(P_all, _int_regions(regions, L), P64, pmax, Pf)
        counts = [int(m.sum()) for m in masks]
        return (min(counts), sum(counts), tuple(-i for i in poly)), kind, poly, regions, masks

    scored = sorted((score(kind, poly) for kind, poly in candidates), key=lambda s: s[0], reverse=True)
    best = scored[0]
    for start in scored[:climb_starts]:
        got = _climb(pts, pool, start, score)
        if got[0] > best[0]:
            best = got
    _, kind, poly, regions, masks = best
    members = [[int(i) for i in np.flatnonzero(m)] for m in masks]
    return SupportStructure(kind, tuple(poly), regions, members, 2.0 ** (-40 * k))
