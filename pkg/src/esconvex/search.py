"""Largest subset avoiding a family of forbidden subsets.

Every search in the package with a hereditary target (convex position in R^3,
C-caps) reduces to: given the minimal bad subsets, find a largest set that
contains none of them.  Branch and bound on inclusion, candidates filtered
incrementally against the bad sets through the newly added vertex.

For n <= 63 the bad sets of size k are packed into uint64 tables
T_k[c, v, p_1..p_{k-3}] whose bits mark the last member, so the filter at a
node is one vectorized lookup over the (k-3)-subsets of the chosen set.
"""
from __future__ import annotations

import itertools
from collections import defaultdict

import numpy as np

from .errors import GuardExceeded

DENSE_LIMIT = 63
DENSE_CELLS = 40_000_000


def max_independent_hyper(n: int, bad_sets, order=None, node_limit: int | None = 5_000_000, lower: int = 0):
    """Largest subset of range(n) containing no member of ``bad_sets``.

    ``order`` fixes the branching order (default: index order).  Returns a
    sorted tuple.  Raises GuardExceeded once ``node_limit`` nodes are expanded.
    """
    order = list(range(n)) if order is None else list(order)
    by_size = defaultdict(list)
    for B in bad_sets:
        B = tuple(sorted(set(B)))
        by_size[len(B)].append(B)
    singles = {B[0] for B in by_size.pop(1, [])}
    order = [v for v in order if v not in singles]
    sizes = sorted(by_size)
    if sizes and sizes[-1] > 5:
        dense = False
    else:
        dense = n <= DENSE_LIMIT and all(n ** (k - 1) <= DENSE_CELLS for k in sizes)
    if dense:
        filt = _DenseFilter(n, by_size)
    else:
        filt = _SparseFilter(n, by_size)

    best = [lower - 1, ()]
    nodes = [0]

    def expand(S, chosen, cands):
        nodes[0] += 1
        if node_limit is not None and nodes[0] > node_limit:
            raise GuardExceeded(f"search exceeded {node_limit} nodes")
        if len(chosen) > best[0]:
            best[0], best[1] = len(chosen), tuple(chosen)
        for i, v in enumerate(cands):
            if len(chosen) + len(cands) - i <= best[0]:
                return
            rest = cands[i + 1 :]
            nxt = filt.admissible(rest, v, S, chosen)
            chosen.append(v)
            expand(S | (1 << v), chosen, nxt)
            chosen.pop()

    expand(0, [], order)
    return tuple(sorted(best[1]))


class _SparseFilter:
    def __init__(self, n, by_size):
        # rest[c][v]: masks of B - {c} for bad sets B containing both c and v
        self.rest = [defaultdict(list) for _ in range(n)]
        for B in (B for group in by_size.values() for B in group):
            mask = 0
            for v in B:
                mask |= 1 << v
            for c in B:
                m = mask & ~(1 << c)
                for v in B:
                    if v != c:
                        self.rest[c][v].append(m)

    def admissible(self, cands, v, S, chosen):
        S2 = S | (1 << v)
        out = []
        for c in cands:
            if all(m & ~S2 for m in self.rest[c].get(v, ())):
                out.append(c)
        return out


class _DenseFilter:
    def __init__(self, n, by_size):
        self.n = n
        self.tables = {}
        for k, group in by_size.items():
            arr = np.array(group, dtype=np.int64)
            T = np.zeros((n,) * (k - 1), dtype=np.uint64)
            for perm in itertools.permutations(range(k)):
                idx = tuple(arr[:, p] for p in perm[:-1])
                bits = np.left_shift(np.uint64(1), arr[:, perm[-1]].astype(np.uint64))
                np.bitwise_or.at(T, idx, bits)
            self.tables[k] = T

    def admissible(self, cands, v, S, chosen):
        if not cands:
            return []
        c = np.asarray(cands, dtype=np.int64)
        ok = np.ones(len(c), dtype=bool)
        ch = np.asarray(chosen, dtype=np.int64)
        Smask = np.uint64(S)
        for k, T in self.tables.items():
            if k == 2:
                ok &= ((T[c] >> np.uint64(v)) & np.uint64(1)) == 0
                continue
            if k == 3:
                ok &= (T[c, v] & Smask) == 0
                continue
            need = k - 3
            if len(ch) < need + 1:
                continue
            subs = np.array(list(itertools.combinations(ch, need)), dtype=np.int64)
            idx = (c[:, None], v) + tuple(subs[None, :, j] for j in range(need))
            hits = (T[idx] & Smask) != 0
            ok &= ~hits.any(axis=1)
        return [int(x) for x in c[ok]]


def brute_force_max(n: int, good) -> tuple:
    """Exponential oracle: largest subset (as a sorted tuple) accepted by ``good``."""
    for r in range(n, -1, -1):
        for c in itertools.combinations(range(n), r):
            if good(c):
                return c
    return ()
