"""End-to-end search for a large convex subset of a 3D point set.

Stages: project along a generic direction, find a well supported cup or cap
in the shadow, shrink the preimages of its regions to a 2-separated
collection, pick representatives with a uniform above/below pattern, build
the two polyhedra attached to each index triple, 2-color the triples by the
size of the free sets they admit, take a monochromatic clique, extract one
cap per odd clique position and glue the caps.

Every stage result is checked exactly when produced and recorded in a
:class:`CertificateTrace` that :func:`replay` re-verifies from scratch.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .cupcap import _support_regions, count_in_regions, por_valtr_support
from .errors import (
    AssemblyFailed,
    EsConvexError,
    InputTooSmall,
    NotFound,
    PlaneConstructionFailed,
    PreconditionViolated,
)
from .exact import ONE, ZERO, Q, to_str
from .geometry import (
    ABOVE,
    BELOW,
    DISJOINT_PROJECTIONS,
    HalfSpaceSystem,
    OrientedPlane,
    as_points,
    frame_coordinates,
    generic_direction,
    hull_vertex_indices,
    hulls_disjoint,
    is_convex_position,
    segment_relation,
)
from .posets import dilworth, is_P_cap, is_P_free, order_by_polyhedron, pfree_or_convex
from .separation import is_collection_convex_position, is_two_separated, lift_separating_plane, two_separate

STAGES = (
    "projection",
    "support",
    "separation",
    "above-below",
    "polyhedra",
    "coloring",
    "clique",
    "caps",
    "assembly",
)
RED, BLUE = "red", "blue"
# exact triple tests in the cap search grow cubically
CAP_POOL = 32


class StageFailure(EsConvexError):
    def __init__(self, stage, cause):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
        self.trace = None

    @property
    def exit_code(self) -> int:
        return 4 + STAGES.index(self.stage)


@dataclass
class PipelineParams:
    k0: int = 5
    k: int = 4
    t: int = 3
    a: int = 4
    b: int = 4
    mode: str = "best-effort"

    def validate(self):
        if min(self.k0, self.k, self.t, self.a, self.b) < 2:
            raise ValueError("all parameters must be at least 2")
        if self.k > self.k0 or self.t > self.k:
            raise ValueError("need t <= k <= k0")
        if self.mode not in ("strict", "best-effort"):
            raise ValueError(f"unknown mode {self.mode!r}")
        return self


@dataclass
class CertificateTrace:
    params: dict
    n: int
    stages: list = field(default_factory=list)  # (stage, status, detail)
    direction: list | None = None
    support: dict | None = None
    separated: list | None = None  # X-index lists, one per support region
    reps: list | None = None  # X index per separated set
    selection: dict | None = None
    triples: list = field(default_factory=list)
    clique: dict | None = None
    caps: list = field(default_factory=list)
    result: list = field(default_factory=list)
    result_kind: str = ""
    failed_stage: str | None = None

    def mark(self, stage, status, detail=""):
        self.stages.append((stage, status, detail))

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "n": self.n,
            "stages": [list(s) for s in self.stages],
            "direction": self.direction,
            "support": self.support,
            "separated": self.separated,
            "reps": self.reps,
            "selection": self.selection,
            "triples": self.triples,
            "clique": self.clique,
            "caps": self.caps,
            "result": self.result,
            "result_kind": self.result_kind,
            "failed_stage": self.failed_stage,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CertificateTrace":
        tr = cls(d["params"], d["n"])
        for key in ("direction", "support", "separated", "reps", "selection", "clique", "result_kind", "failed_stage"):
            setattr(tr, key, d.get(key))
        tr.stages = [tuple(s) for s in d.get("stages", [])]
        tr.triples = d.get("triples", [])
        tr.caps = d.get("caps", [])
        tr.result = list(d.get("result", []))
        return tr


def _plane_json(pl: OrientedPlane) -> dict:
    return {"normal": [to_str(c) for c in pl.normal], "offset": to_str(pl.offset)}


def _plane_from(d) -> OrientedPlane:
    return OrientedPlane(tuple(Q(c) for c in d["normal"]), Q(d["offset"]))


# --------------------------------------------------------------------------
# above / below selection


def above_below_select(xs, k: int) -> tuple[tuple, str]:
    """Indices S (|S| = k) of the frame points ``xs`` whose interleaved pairs
    all compare the same way; returns (S, ABOVE or BELOW).

    ``xs`` must project to a convex polygon in index order.  Backtracking in
    lexicographic order, ABOVE tried before BELOW.
    """
    xs = as_points(xs)
    n = len(xs)
    if k > n:
        raise NotFound(f"cannot select {k} of {n} points")
    rel = {}
    for q in itertools.combinations(range(n), 4):
        r = segment_relation((xs[q[0]], xs[q[2]]), (xs[q[1]], xs[q[3]]))
        if r == DISJOINT_PROJECTIONS:
            raise PreconditionViolated(f"projected segments of {q} do not cross")
        rel[q] = r
    for want in (ABOVE, BELOW):
        found = _extend_uniform([], 0, n, k, rel, want)
        if found is not None:
            return tuple(found), want
    raise NotFound(f"no {k} points with a uniform above/below pattern")


def _extend_uniform(S, start, n, k, rel, want):
    if len(S) == k:
        return list(S)
    for v in range(start, n - (k - len(S)) + 1):
        ok = all(rel[q + (v,)] == want for q in itertools.combinations(S, 3))
        if ok:
            res = _extend_uniform(S + [v], v + 1, n, k, rel, want)
            if res is not None:
                return res
    return None


def verify_cor_ab(xs, S=None) -> bool:
    """For 1 <= a <= b <= c <= k the point groups {x_1..x_{a-1}} ∪ {x_b..x_{c-1}}
    and {x_a..x_{b-1}} ∪ {x_c..x_k} have disjoint hulls."""
    xs = as_points(xs)
    pts = xs if S is None else [xs[i] for i in S]
    k = len(pts)
    for q in itertools.combinations(range(k), 4):
        r = segment_relation((pts[q[0]], pts[q[2]]), (pts[q[1]], pts[q[3]]))
        if r == DISJOINT_PROJECTIONS:
            return False
    for a, b, c in itertools.combinations_with_replacement(range(1, k + 2), 3):
        A = pts[: a - 1] + pts[b - 1 : c - 1]
        B = pts[a - 1 : b - 1] + pts[c - 1 :]
        if A and B and not hulls_disjoint(A, B):
            return False
    return True


# --------------------------------------------------------------------------
# polyhedra attached to a triple


@dataclass
class _Working:
    """Selected sets X_1..X_k (frame coordinates) with their edge lines."""

    sets: list  # lists of frame points
    idx: list  # lists of X indices
    reps: list  # frame points
    edges: list  # 2D (p, q) line of each supporting edge

    def reversed(self) -> "_Working":
        return _Working(self.sets[::-1], self.idx[::-1], self.reps[::-1], self.edges[::-1])

    @property
    def k(self):
        return len(self.sets)


@dataclass
class TriplePolyhedra:
    J: tuple
    H0: OrientedPlane
    H1: OrientedPlane
    H2: OrientedPlane
    groups: dict  # Z1..Z4 as lists of 1-based labels

    @property
    def P1(self) -> HalfSpaceSystem:
        return HalfSpaceSystem.from_planes([(self.H0, "-"), (self.H1, "+"), (self.H2, "+")])

    @property
    def P2(self) -> HalfSpaceSystem:
        return HalfSpaceSystem.from_planes([(self.H0, "-"), (self.H1, "-"), (self.H2, "-")])


def _groups(J, k):
    j1, j2, j3 = J
    return {
        "Z1": list(range(1, j1)),
        "Z2": list(range(max(j1, 1), j2)),
        "Z3": list(range(j2 + 1, j3 + 1)),
        "Z4": list(range(j3 + 1, k + 1)),
    }


def _vertical_plane(p, q, inside) -> OrientedPlane:
    a = (q[1] - p[1], p[0] - q[0], ZERO)
    pl = OrientedPlane(a, a[0] * p[0] + a[1] * p[1])
    return pl if pl.side(inside) > 0 else pl.flipped()


def _split_plane(W: _Working, plus_labels, minus_labels) -> OrientedPlane:
    plus = [W.reps[j - 1] for j in plus_labels]
    minus = [W.reps[j - 1] for j in minus_labels]
    if plus and minus:
        sep = hulls_disjoint(plus, minus)
        if not sep:
            raise PlaneConstructionFailed(f"representatives {plus_labels} / {minus_labels} are not separable")
        rep_plane = sep.plane
    else:
        xs = [p[0] for p in W.reps]
        rep_plane = OrientedPlane((ONE, ZERO, ZERO), min(xs) - 1 if plus else max(xs) + 1)
    return lift_separating_plane(W.sets, W.reps, rep_plane, check=False)


def build_PJ(J, W: _Working) -> TriplePolyhedra:
    """H0 through the supporting edge of X_{j2}, H1 and H2 lifted from the
    representative splits; P1 and P2 are checked against their groups.

    ``J = (j1, j2, j3)`` uses 1-based labels with j1 = 0 (no sets before) and
    j3 = j2 allowed.
    """
    k = W.k
    j1, j2, j3 = J
    if not (0 <= j1 < j2 <= j3 <= k):
        raise ValueError(f"bad triple {J}")
    g = _groups(J, k)
    p, q = W.edges[j2 - 1]
    H0 = _vertical_plane(p, q, W.reps[j2 - 1])
    H1 = _split_plane(W, g["Z1"] + g["Z3"], g["Z2"] + g["Z4"] + [j2])
    H2 = _split_plane(W, g["Z1"] + g["Z3"] + [j2], g["Z2"] + g["Z4"])
    T = TriplePolyhedra(tuple(J), H0, H1, H2, g)
    _check_PJ(T, W)
    return T


def _check_PJ(T: TriplePolyhedra, W: _Working):
    j2 = T.J[1]
    P1, P2 = T.P1, T.P2
    if any(T.H0.side(x) <= 0 for x in W.sets[j2 - 1]):
        raise PlaneConstructionFailed("H0 does not have X_j2 on its positive side")
    for lab in T.groups["Z1"] + T.groups["Z3"]:
        if not all(P1.contains(x, strict=True) for x in W.sets[lab - 1]):
            raise PlaneConstructionFailed(f"X_{lab} is not inside P1")
    for lab in T.groups["Z2"] + T.groups["Z4"]:
        if not all(P2.contains(x, strict=True) for x in W.sets[lab - 1]):
            raise PlaneConstructionFailed(f"X_{lab} is not inside P2")


# --------------------------------------------------------------------------
# coloring, clique, caps


def _longest_chain(poset) -> tuple:
    order = sorted(range(poset.n), key=lambda i: len(poset.below[i]))
    best = {}
    for i in order:
        prev = max(poset.below[i], key=lambda j: (best[j][0], -j), default=None)
        best[i] = (1, None) if prev is None else (best[prev][0] + 1, prev)
    if not best:
        return ()
    top = max(best, key=lambda i: (best[i][0], -i))
    chain = []
    while top is not None:
        chain.append(top)
        top = best[top][1]
    return tuple(sorted(chain, key=lambda i: len(poset.below[i])))


def color_triple(T: TriplePolyhedra, W: _Working) -> tuple[str, tuple]:
    """RED with a P1-free antichain of size >= ceil(sqrt m), else BLUE with a
    P2-free chain of at least that size.  Returns local indices into X_j2."""
    pts = W.sets[T.J[1] - 1]
    m = len(pts)
    need = math.isqrt(m - 1) + 1 if m else 0
    poset = order_by_polyhedron(pts, T.P1)
    anti = dilworth(poset).antichain
    if len(anti) >= need:
        ok, pair = is_P_free([pts[i] for i in anti], T.P1)
        if not ok:
            raise AssertionError(f"antichain is not P1-free at {pair}")
        return RED, tuple(anti)
    chain = _longest_chain(poset)
    if len(chain) < need:
        raise AssertionError("Dilworth bound violated")
    ok, pair = is_P_free([pts[i] for i in chain], T.P2)
    if not ok:
        raise PlaneConstructionFailed(f"chain is not P2-free at {pair}")
    return BLUE, tuple(chain)


def monochromatic_clique(coloring: dict, k: int, t: int) -> tuple[tuple, str]:
    """First t-subset of 1..k (lexicographic) whose triples share one color."""
    for C in itertools.combinations(range(1, k + 1), t):
        cols = {coloring[J] for J in itertools.combinations(C, 3)}
        if len(cols) <= 1:
            return C, (cols.pop() if cols else RED)
    raise NotFound(f"no monochromatic {t}-clique among {k} labels")


def cap_triples(clique) -> list:
    """(l, J_l) for odd positions l, with J_l = (j_{l-1}, j_l, j_t) and j_0 = 0."""
    js = (0,) + tuple(clique)
    t = len(clique)
    return [(l, (js[l - 1], js[l], js[t])) for l in range(1, t + 1, 2)]


def assemble_caps(W: _Working, caps) -> tuple:
    """Union of the caps; every cap must sit inside the other caps' P1 and the
    union must be in convex position."""
    for l, T, K in caps:
        P1 = T.P1
        for l2, _, K2 in caps:
            if l2 != l and not all(P1.contains(x, strict=True) for x in K2):
                raise AssemblyFailed(f"cap {l2} is not inside the polyhedron of cap {l}")
    pts = [x for _, _, K in caps for x in K]
    if len(pts) >= 4 and not is_convex_position(pts)[0]:
        raise AssemblyFailed("assembled caps are not in convex position")
    return tuple(pts)


# --------------------------------------------------------------------------
# driver


def min_input_size(params: PipelineParams) -> int:
    return 2 * params.k0 + 1


def find_convex_subset_3d(X, params: PipelineParams | None = None, threads: int = 1) -> tuple[tuple, CertificateTrace]:
    """Indices of a subset of X in convex position, with its certificate trace.

    Strict mode raises :class:`StageFailure` at the first failing stage.
    Best-effort mode falls back to the certified hull vertices (or a larger
    set found en route) and records the failed stage in the trace.  With
    ``threads > 1`` the triple coloring runs in a process pool; results are
    identical for every thread count.
    """
    params = (params or PipelineParams()).validate()
    pts = as_points(X)
    n = len(pts)
    trace = CertificateTrace(dict(params.__dict__), n)
    if n < min_input_size(params):
        raise InputTooSmall(f"need at least {min_input_size(params)} points, got {n}")
    if pts and len(pts[0]) != 3:
        raise PreconditionViolated("the pipeline expects points in R^3")
    ok, _ = is_convex_position(pts)
    if ok:
        trace.mark("input", "ok", "input already in convex position")
        return _finish(trace, pts, tuple(range(n)), "input-convex")
    found = []
    try:
        return _run(pts, params, trace, found, threads)
    except StageFailure as exc:
        trace.failed_stage = exc.stage
        trace.mark(exc.stage, "failed", str(exc.cause))
        if params.mode == "strict":
            exc.trace = trace
            raise
    return _fallback(pts, trace, found)


def _stage(name):
    def wrap(fn):
        def inner(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except StageFailure:
                raise
            except EsConvexError as exc:
                raise StageFailure(name, exc) from exc

        return inner

    return wrap


def _finish(trace, pts, indices, kind):
    indices = tuple(sorted(indices))
    if len(indices) >= 4 and not is_convex_position([pts[i] for i in indices])[0]:
        raise AssertionError("pipeline output is not in convex position")
    trace.result = list(indices)
    trace.result_kind = kind
    return indices, trace


def _fallback(pts, trace, found):
    cands = list(found)
    cands.append(("hull-vertices", hull_vertex_indices(pts)))
    kind, best = max(cands, key=lambda c: (len(c[1]), c[0] != "hull-vertices"))
    trace.mark("fallback", "ok", f"{kind} with {len(best)} points")
    return _finish(trace, pts, best, "fallback:" + kind)


def _run(pts, params, trace, found, threads=1):
    F, direction = _project(pts, trace)
    sup = _support(F, params, trace)
    W = _separate(F, sup, params, trace)
    W = _select(W, params, trace)
    triples = _polyhedra(W, trace)
    coloring, free = _coloring(W, triples, trace, threads)
    clique, color = _clique(coloring, W.k, params.t, trace)
    if color == BLUE:
        W = W.reversed()
        clique = tuple(sorted(W.k + 1 - j for j in clique))
    caps, early = _caps(W, clique, params, trace, found)
    if early is not None:
        trace.mark("caps", "ok", f"convex set of size {len(early)} found early")
        return _finish(trace, pts, early, "early-convex")
    K = _assemble(W, caps, params, trace)
    if params.mode != "strict" and len(K) < params.a * ((params.t + 1) // 2):
        found.append(("assembled", K))
        return _fallback(pts, trace, found)
    return _finish(trace, pts, K, "assembled")


@_stage("projection")
def _project(pts, trace):
    direction = generic_direction(pts)
    F = frame_coordinates(pts, direction)
    trace.direction = [to_str(c) for c in direction]
    trace.mark("projection", "ok")
    return F, direction


@_stage("support")
def _support(F, params, trace):
    img = [p[:2] for p in F]
    sup = por_valtr_support(img, params.k0, max_candidates=1000)
    trace.support = {"kind": sup.kind, "polygon": list(sup.polygon), "members": [list(m) for m in sup.members]}
    empty = [i for i, m in enumerate(sup.members) if not m]
    if empty:
        raise StageFailure("support", NotFound(f"regions {empty} are empty"))
    trace.mark("support", "ok", f"counts {sup.counts}")
    return sup


@_stage("separation")
def _separate(F, sup, params, trace):
    img = [p[:2] for p in F]
    groups = [[F[i] for i in m] for m in sup.members]
    sc = two_separate(groups)
    idx = [[sup.members[s][i] for i in mem] for s, mem in enumerate(sc.members)]
    sets = sc.sets
    ok, wit = is_two_separated(sets)
    if not ok:
        raise StageFailure("separation", NotFound(f"2-separation check failed at {wit}"))
    ok, wit = is_collection_convex_position(sets)
    if not ok:
        raise StageFailure("separation", NotFound(f"collection not in convex position at {wit}"))
    reps = [m[0] for m in idx]
    trace.separated = [list(m) for m in idx]
    trace.reps = reps
    poly = sup.polygon
    edges = [(img[poly[i]], img[poly[i + 1]]) for i in range(len(poly) - 1)]
    trace.mark("separation", "ok", f"sizes {[len(m) for m in idx]}")
    return _Working(sets, idx, [F[r] for r in reps], edges)


@_stage("above-below")
def _select(W, params, trace):
    S, polarity = above_below_select(W.reps, params.k)
    if not verify_cor_ab(W.reps, S):
        raise StageFailure("above-below", NotFound("hull disjointness check failed"))
    trace.selection = {"S": list(S), "polarity": polarity}
    trace.mark("above-below", "ok", f"{polarity} {list(S)}")
    return _Working([W.sets[i] for i in S], [W.idx[i] for i in S], [W.reps[i] for i in S], [W.edges[i] for i in S])


@_stage("polyhedra")
def _polyhedra(W, trace):
    out = {}
    for J in itertools.combinations(range(1, W.k + 1), 3):
        out[J] = build_PJ(J, W)
    trace.mark("polyhedra", "ok", f"{len(out)} triples")
    return out


@_stage("coloring")
def _coloring(W, triples, trace, threads=1):
    coloring, free = {}, {}
    items = list(triples.items())
    if threads > 1 and len(items) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(color_triple, [T for _, T in items], [W] * len(items)))
    else:
        results = [color_triple(T, W) for _, T in items]
    for (J, T), (col, local) in zip(items, results):
        coloring[J], free[J] = col, local
        trace.triples.append(
            {
                "J": list(J),
                "H0": _plane_json(T.H0),
                "H1": _plane_json(T.H1),
                "H2": _plane_json(T.H2),
                "color": col,
                "free": [W.idx[J[1] - 1][i] for i in local],
            }
        )
    trace.mark("coloring", "ok", " ".join(f"{J}:{c}" for J, c in coloring.items()))
    return coloring, free


@_stage("clique")
def _clique(coloring, k, t, trace):
    C, color = monochromatic_clique(coloring, k, t)
    trace.clique = {"labels": list(C), "color": color}
    trace.mark("clique", "ok", f"{color} {list(C)}")
    return C, color


@_stage("caps")
def _caps(W, clique, params, trace, found):
    caps = []
    for l, J in cap_triples(clique):
        T = build_PJ(J, W)
        pts = W.sets[J[1] - 1]
        anti = dilworth(order_by_polyhedron(pts, T.P1)).antichain
        Z = [pts[i] for i in anti]
        ok, pair = is_P_free(Z, T.P1)
        if not ok:
            raise StageFailure("caps", NotFound(f"free set for position {l} fails at {pair}"))
        entry = {
            "l": l,
            "J": list(J),
            "reversed": bool(trace.clique and trace.clique["color"] == BLUE),
            "H0": _plane_json(T.H0),
            "H1": _plane_json(T.H1),
            "H2": _plane_json(T.H2),
            "Z": [W.idx[J[1] - 1][i] for i in anti],
        }
        if len(Z) < 2:
            raise StageFailure("caps", NotFound(f"free set for position {l} has {len(Z)} points"))
        res = pfree_or_convex(Z, T.P1, params.a, params.b, strict=False, check_free=False, cap_pool=CAP_POOL)
        chosen = [W.idx[J[1] - 1][anti[i]] for i in res.indices]
        entry.update({"kind": res.kind, "K": chosen, "target_met": res.target_met, "threshold_met": res.threshold_met})
        trace.caps.append(entry)
        if res.kind == "convex" and res.target_met:
            return caps, tuple(chosen)
        if res.kind == "convex":
            found.append(("convex-" + str(l), tuple(chosen)))
        if not res.target_met and params.mode == "strict":
            raise StageFailure("caps", NotFound(f"position {l}: cap {res.cap_size}, convex {res.convex_size}"))
        if res.kind != "cap":
            res_cap = ()
        else:
            res_cap = tuple(chosen)
        caps.append((l, T, res_cap))
    trace.mark("caps", "ok", " ".join(f"{l}:{len(K)}" for l, _, K in caps))
    return caps, None


@_stage("assembly")
def _assemble(W, caps, params, trace):
    where = {}
    for j, ids in enumerate(W.idx):
        for loc, i in enumerate(ids):
            where[i] = (j, loc)
    frame_caps = [(l, T, [W.sets[where[i][0]][where[i][1]] for i in K]) for l, T, K in caps]
    assemble_caps(W, frame_caps)
    K = tuple(i for _, _, ids in caps for i in ids)
    trace.mark("assembly", "ok", f"{len(K)} points")
    return K


# --------------------------------------------------------------------------
# replay


def replay(trace: CertificateTrace, X) -> tuple[bool, list]:
    """Re-verify every recorded stage from the raw points; returns (ok, problems)."""
    pts = as_points(X)
    problems = []

    def need(cond, msg):
        if not cond:
            problems.append(msg)

    need(trace.n == len(pts), "point count does not match")
    res = [pts[i] for i in trace.result]
    need(len(set(trace.result)) == len(trace.result), "result repeats indices")
    if len(res) >= 4:
        need(is_convex_position(res)[0], "result is not in convex position")
    if trace.direction is None or problems:
        return not problems, problems
    direction = tuple(Q(c) for c in trace.direction)
    F = frame_coordinates(pts, direction)
    img = [p[:2] for p in F]
    if trace.support:
        poly = trace.support["polygon"]
        regions = _support_regions(img, poly)
        members = count_in_regions(img, regions)
        need([list(m) for m in members] == trace.support["members"], "support members do not match the regions")
    if trace.separated:
        sets = [[F[i] for i in m] for m in trace.separated]
        for s, m in enumerate(trace.separated):
            need(set(m) <= set(trace.support["members"][s]), f"separated set {s} leaves its region")
        need(is_two_separated(sets)[0], "collection is not 2-separated")
        need(all(r in m for r, m in zip(trace.reps, trace.separated)), "a representative is outside its set")
    if trace.selection:
        S = trace.selection["S"]
        reps = [F[trace.reps[i]] for i in S]
        rels = {
            segment_relation((reps[q[0]], reps[q[2]]), (reps[q[1]], reps[q[3]]))
            for q in itertools.combinations(range(len(S)), 4)
        }
        need(rels <= {trace.selection["polarity"]}, "above/below pattern is not uniform")
        need(verify_cor_ab(reps), "representative hulls intersect")
        W = _Working(
            [[F[i] for i in trace.separated[s]] for s in S],
            [trace.separated[s] for s in S],
            reps,
            [None] * len(S),
        )
        coloring = {}
        for tr in trace.triples:
            J = tuple(tr["J"])
            T = TriplePolyhedra(J, _plane_from(tr["H0"]), _plane_from(tr["H1"]), _plane_from(tr["H2"]), _groups(J, W.k))
            try:
                _check_PJ(T, W)
            except PlaneConstructionFailed as exc:
                problems.append(f"triple {J}: {exc}")
            free = [F[i] for i in tr["free"]]
            need(set(tr["free"]) <= set(W.idx[J[1] - 1]), f"triple {J}: free set outside X_j2")
            m = len(W.sets[J[1] - 1])
            need(len(free) >= math.isqrt(m - 1) + 1, f"triple {J}: free set too small")
            P = T.P1 if tr["color"] == RED else T.P2
            need(is_P_free(free, P)[0], f"triple {J}: free set is not free")
            coloring[J] = tr["color"]
        if trace.clique:
            C = tuple(trace.clique["labels"])
            cols = {coloring.get(J) for J in itertools.combinations(C, 3)}
            need(cols <= {trace.clique["color"]}, "clique is not monochromatic")
            Wc = W.reversed() if trace.clique["color"] == BLUE else W
            frame_caps = []
            for cp in trace.caps:
                J = tuple(cp["J"])
                T = TriplePolyhedra(J, _plane_from(cp["H0"]), _plane_from(cp["H1"]), _plane_from(cp["H2"]), _groups(J, Wc.k))
                try:
                    _check_PJ(T, Wc)
                except PlaneConstructionFailed as exc:
                    problems.append(f"cap {cp['l']}: {exc}")
                Z = [F[i] for i in cp["Z"]]
                need(set(cp["Z"]) <= set(Wc.idx[J[1] - 1]), f"cap {cp['l']}: free set outside its group")
                need(is_P_free(Z, T.P1)[0], f"cap {cp['l']}: free set is not free")
                K = [F[i] for i in cp["K"]]
                need(set(cp["K"]) <= set(cp["Z"]), f"cap {cp['l']}: cap outside the free set")
                if cp["kind"] == "cap":
                    need(is_P_cap(K, T.P1), f"cap {cp['l']}: not a cap")
                    frame_caps.append((cp["l"], T, K))
            if trace.result_kind == "assembled":
                union = sorted({i for cp in trace.caps if cp["kind"] == "cap" for i in cp["K"]})
                need(union == sorted(trace.result), "result is not the union of the recorded caps")
                try:
                    assemble_caps(Wc, frame_caps)
                except AssemblyFailed as exc:
                    problems.append(str(exc))
    return not problems, problems
