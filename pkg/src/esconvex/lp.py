"""Two-phase primal simplex over exact rationals.

Small dense tableau, Bland's rule (no cycling), phase-one duals exported as a
Farkas certificate when the system is infeasible.  Problem sizes in this
package are a handful of rows by at most a few thousand columns.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from gmpy2 import mpq

ZERO = mpq(0)
ONE = mpq(1)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LPResult:
    status: str
    x: list = field(default_factory=list)
    value: mpq | None = None
    # For infeasible systems: multipliers y over (eq rows, then ub rows) with
    # y_ub >= 0, y^T A >= 0 on every (non-free) column, y^T A = 0 on free
    # columns, and y^T b < 0.
    farkas: list | None = None

    @property
    def feasible(self) -> bool:
        return self.status != INFEASIBLE


def solve(
    c: Sequence,
    A_ub: Sequence[Sequence] = (),
    b_ub: Sequence = (),
    A_eq: Sequence[Sequence] = (),
    b_eq: Sequence = (),
    free: Sequence[int] = (),
    maximize: bool = False,
) -> LPResult:
    """Minimize (or maximize) c.x subject to A_ub x <= b_ub, A_eq x = b_eq.

    Variables are nonnegative except those listed in ``free``.
    """
    n = len(c)
    free = sorted(set(free))
    # column map: original var j -> (plus col, minus col or None)
    cols: list[tuple[int, int | None]] = []
    k = 0
    free_set = set(free)
    for j in range(n):
        if j in free_set:
            cols.append((k, k + 1))
            k += 2
        else:
            cols.append((k, None))
            k += 1
    nx = k

    def expand(row):
        out = [ZERO] * nx
        for j, v in enumerate(row):
            if v:
                v = mpq(v)
                p, m = cols[j]
                out[p] = v
                if m is not None:
                    out[m] = -v
        return out

    cost = expand(c)
    if maximize:
        cost = [-v for v in cost]

    m_eq, m_ub = len(A_eq), len(A_ub)
    m = m_eq + m_ub
    ns = m_ub
    width = nx + ns + m  # structural + slack + artificial
    rhs_col = width
    rows: list[list] = []
    negated = []
    for i in range(m):
        if i < m_eq:
            base = expand(A_eq[i])
            b = mpq(b_eq[i])
            slack = [ZERO] * ns
        else:
            base = expand(A_ub[i - m_eq])
            b = mpq(b_ub[i - m_eq])
            slack = [ZERO] * ns
            slack[i - m_eq] = ONE
        row = base + slack
        neg = b < 0
        if neg:
            row = [-v for v in row]
            b = -b
        art = [ZERO] * m
        art[i] = ONE
        rows.append(row + art + [b])
        negated.append(neg)

    basis = [nx + ns + i for i in range(m)]
    art_start = nx + ns

    # phase one: minimize sum of artificials
    obj = [ZERO] * (width + 1)
    for r in rows:
        for j in range(width + 1):
            if r[j]:
                obj[j] -= r[j]
    for i in range(m):
        obj[art_start + i] = ZERO
    _run(rows, obj, basis, limit=art_start)

    phase1 = -obj[rhs_col]
    if phase1 > 0:
        # u = c_B B^{-1} with c_B = 1 on artificial basics; columns of B^{-1}
        # sit under the original artificial columns.
        u = [ZERO] * m
        for r, bv in zip(rows, basis):
            if bv >= art_start:
                for i in range(m):
                    u[i] += r[art_start + i]
        y = [(-ui if not neg else ui) for ui, neg in zip(u, negated)]
        return LPResult(INFEASIBLE, farkas=y)

    # drive zero-level artificials out of the basis
    keep = []
    for ri, bv in enumerate(basis):
        if bv < art_start:
            keep.append(ri)
            continue
        r = rows[ri]
        piv = next((j for j in range(art_start) if r[j] != 0), None)
        if piv is None:
            continue  # redundant row
        _pivot(rows, obj, basis, ri, piv)
        keep.append(ri)
    rows = [rows[i] for i in keep]
    basis = [basis[i] for i in keep]

    # phase two
    obj = [ZERO] * (width + 1)
    for j in range(nx):
        obj[j] = cost[j]
    for r, bv in zip(rows, basis):
        cb = obj[bv]
        if cb:
            for j in range(width + 1):
                if r[j]:
                    obj[j] -= cb * r[j]
    status = _run(rows, obj, basis, limit=art_start)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED)

    xs = [ZERO] * width
    for r, bv in zip(rows, basis):
        xs[bv] = r[rhs_col]
    x = []
    for p, mcol in cols:
        v = xs[p]
        if mcol is not None:
            v -= xs[mcol]
        x.append(v)
    value = -obj[rhs_col]
    if maximize:
        value = -value
    return LPResult(OPTIMAL, x=x, value=value)


def _pivot(rows, obj, basis, ri, cj):
    prow = rows[ri]
    p = prow[cj]
    if p != 1:
        inv = ONE / p
        prow[:] = [v * inv if v else v for v in prow]
    nz = [j for j, v in enumerate(prow) if v]
    for r in rows:
        if r is prow:
            continue
        f = r[cj]
        if f:
            for j in nz:
                r[j] -= f * prow[j]
    f = obj[cj]
    if f:
        for j in nz:
            obj[j] -= f * prow[j]
    basis[ri] = cj


def _run(rows, obj, basis, limit):
    rhs = len(obj) - 1
    while True:
        enter = next((j for j in range(limit) if obj[j] < 0), None)
        if enter is None:
            return OPTIMAL
        best = None
        for ri, r in enumerate(rows):
            a = r[enter]
            if a > 0:
                ratio = r[rhs] / a
                key = (ratio, basis[ri])
                if best is None or key < best[0]:
                    best = (key, ri)
        if best is None:
            return UNBOUNDED
        _pivot(rows, obj, basis, best[1], enter)


def feasible(A_ub=(), b_ub=(), A_eq=(), b_eq=(), nvars=None, free=()) -> LPResult:
    """Pure feasibility: zero objective."""
    if nvars is None:
        nvars = len((list(A_ub) or list(A_eq))[0])
    return solve([0] * nvars, A_ub, b_ub, A_eq, b_eq, free=free)
