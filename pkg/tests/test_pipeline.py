import copy
import itertools
import random

import pytest
from gmpy2 import mpq

from esconvex.constructions import random_pointset, supported_clusters
from esconvex.errors import InputTooSmall, NotFound
from esconvex.fileio import dump_trace, load_trace
from esconvex.geometry import ABOVE, BELOW, is_convex_position, segment_relation
from esconvex.pipeline import (
    STAGES,
    PipelineParams,
    StageFailure,
    above_below_select,
    find_convex_subset_3d,
    replay,
    verify_cor_ab,
)


@pytest.fixture(scope="module")
def engineered():
    X = supported_clusters()
    K, trace = find_convex_subset_3d(X, PipelineParams(mode="strict"))
    return X, K, trace


def _convex_polygon_points(rng, n):
    # projections on the parabola y = x^2 are in convex position, heights random
    xs = sorted(rng.sample(range(1, 200), n))
    return [(mpq(x), mpq(x * x), mpq(rng.randint(-10**6, 10**6))) for x in xs]


def _uniform(pts, S, want):
    return all(
        segment_relation((pts[S[a]], pts[S[c]]), (pts[S[b]], pts[S[d]])) == want
        for a, b, c, d in itertools.combinations(range(len(S)), 4)
    )


def test_above_below_select_against_bruteforce():
    rng = random.Random(1)
    for trial in range(25):
        pts = _convex_polygon_points(rng, rng.randint(5, 9))
        k = 4
        brute = [
            (S, w) for w in (ABOVE, BELOW) for S in itertools.combinations(range(len(pts)), k) if _uniform(pts, S, w)
        ]
        if not brute:
            with pytest.raises(NotFound):
                above_below_select(pts, k)
            continue
        S, polarity = above_below_select(pts, k)
        assert _uniform(pts, S, polarity)
        assert (S, polarity) == min(brute, key=lambda b: (b[1] != ABOVE, b[0]))


def test_uniform_selection_gives_disjoint_alternating_hulls():
    rng = random.Random(2)
    for trial in range(10):
        pts = _convex_polygon_points(rng, 8)
        try:
            S, polarity = above_below_select(pts, 5)
        except NotFound:
            continue
        assert verify_cor_ab(pts, S)


def test_params_validation():
    with pytest.raises(ValueError):
        PipelineParams(k=6, k0=5).validate()
    with pytest.raises(ValueError):
        PipelineParams(mode="fast").validate()
    assert StageFailure("caps", "x").exit_code == 4 + STAGES.index("caps")


def test_input_too_small():
    with pytest.raises(InputTooSmall):
        find_convex_subset_3d(random_pointset(3, 8, "cube", seed=0))


def test_engineered_instance_strict(engineered):
    X, K, trace = engineered
    assert trace.result_kind == "assembled"
    assert len(K) >= 8
    assert is_convex_position([X.points[i] for i in K])[0]
    assert [s[1] for s in trace.stages] == ["ok"] * len(STAGES)
    assert replay(trace, X) == (True, [])


def test_trace_file_round_trip(engineered, tmp_path):
    X, K, trace = engineered
    path = tmp_path / "trace.json"
    dump_trace(trace, X, path)
    tr2, X2 = load_trace(path)
    assert X2.points == X.points
    assert tr2.to_dict() == trace.to_dict()
    assert replay(tr2, X2)[0]


def test_tampered_traces_fail_replay(engineered):
    X, K, trace = engineered
    bad = copy.deepcopy(trace)
    spoiler = next(
        i for i in range(len(X)) if i not in K and not is_convex_position([X.points[j] for j in K + (i,)])[0]
    )
    bad.result = sorted(bad.result + [spoiler])
    ok, problems = replay(bad, X)
    assert not ok and "result is not in convex position" in problems

    bad = copy.deepcopy(trace)
    bad.result = bad.result[:-1]
    assert not replay(bad, X)[0]

    bad = copy.deepcopy(trace)
    bad.selection["polarity"] = BELOW if trace.selection["polarity"] == ABOVE else ABOVE
    assert not replay(bad, X)[0]

    bad = copy.deepcopy(trace)
    outsider = next(i for i in range(len(X)) if i not in bad.caps[0]["Z"])
    bad.caps[0]["K"] = bad.caps[0]["K"] + [outsider]
    assert not replay(bad, X)[0]

    bad = copy.deepcopy(trace)
    H0 = bad.caps[0]["H0"]
    H0["normal"] = [str(-mpq(c)) for c in H0["normal"]]
    H0["offset"] = str(-mpq(H0["offset"]))
    assert not replay(bad, X)[0]


def test_threads_do_not_change_the_trace(engineered):
    X, K, trace = engineered
    K2, trace2 = find_convex_subset_3d(X, PipelineParams(mode="strict"), threads=2)
    assert K2 == K
    assert trace2.to_dict() == trace.to_dict()


def test_best_effort_random_inputs():
    for seed in range(3):
        X = random_pointset(3, 120, "cube", seed=seed)
        K, trace = find_convex_subset_3d(X)
        assert is_convex_position([X.points[i] for i in K])[0]
        assert replay(trace, X)[0]


def test_strict_failure_carries_trace():
    X = random_pointset(3, 150, "cube", seed=1)
    try:
        K, trace = find_convex_subset_3d(X, PipelineParams(mode="strict"))
    except StageFailure as exc:
        assert exc.trace is not None and exc.trace.failed_stage == exc.stage
        assert replay(exc.trace, X)[0]
    else:
        assert is_convex_position([X.points[i] for i in K])[0]


def test_convex_input_returned_whole():
    X = random_pointset(3, 60, "sphere", seed=2)
    K, trace = find_convex_subset_3d(X)
    assert K == tuple(range(60)) and trace.result_kind == "input-convex"
