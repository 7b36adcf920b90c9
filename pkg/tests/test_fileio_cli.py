import json
import random

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from esconvex.cli import EXIT_GUARD, EXIT_OK, EXIT_USAGE, EXIT_VIOLATED, main
from esconvex.constructions import supported_clusters
from esconvex.fileio import (
    FileFormatError,
    dump_pointset,
    load_pointset,
    parse_rational,
    pointset_from_dict,
    pointset_to_dict,
)
from esconvex.geometry import PointSet
from esconvex.separation import two_separate


def test_parse_rational_forms():
    assert parse_rational("3/7") == mpq(3, 7)
    assert parse_rational("-12") == mpq(-12)
    assert parse_rational(5) == mpq(5)
    # decimal literals are read exactly, not through a binary float
    assert parse_rational("0.1") == mpq(1, 10)
    assert parse_rational(" 1e-3 ") == mpq(1, 1000)
    for bad in (True, 0.5, None, "x/2", "1/0", [1]):
        with pytest.raises(FileFormatError):
            parse_rational(bad)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.fractions(), st.fractions()), min_size=1, max_size=12, unique=True))
def test_pointset_round_trip(raw):
    pts = tuple((mpq(x.numerator, x.denominator), mpq(y.numerator, y.denominator)) for x, y in raw)
    ps = PointSet(2, pts)
    text = json.dumps(pointset_to_dict(ps, {"seed": 3}))
    back, meta = pointset_from_dict(json.loads(text, parse_float=str))
    assert back.points == pts and meta == {"seed": 3}


def test_json_decimals_stay_exact(tmp_path):
    f = tmp_path / "p.json"
    f.write_text('{"format": "esconvex-pointset", "version": 1, "dim": 2, "points": [[0.1, 2], ["1/3", 0.30000000000000004]]}')
    ps, _ = load_pointset(f)
    assert ps.points[0] == (mpq(1, 10), mpq(2))
    assert ps.points[1][1] == mpq(30000000000000004, 10**17)


def test_bad_files(tmp_path):
    cases = {
        "notjson": "{",
        "wrongformat": '{"format": "other", "dim": 2, "points": []}',
        "dims": '{"dim": 3, "points": [["1", "2"]]}',
        "nopoints": '{"dim": 2}',
    }
    for name, text in cases.items():
        f = tmp_path / f"{name}.json"
        f.write_text(text)
        with pytest.raises(FileFormatError):
            load_pointset(f)


def test_labels_survive(tmp_path):
    ps = PointSet(2, ((mpq(0), mpq(1)), (mpq(2), mpq(3))), ("a", "b"))
    dump_pointset(ps, tmp_path / "l.json")
    back, _ = load_pointset(tmp_path / "l.json")
    assert back.labels == ("a", "b")


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_and_verify(tmp_path, capsys):
    kv = tmp_path / "kv.json"
    assert _run(capsys, "gen", "kv", "--dim", 3, "--stage", 2, "--out", kv)[0] == EXIT_OK
    ps, meta = load_pointset(kv)
    assert len(ps) == 4 and meta["stage"] == 2
    assert _run(capsys, "verify", "general-position", kv)[0] == EXIT_OK

    kv4 = tmp_path / "kv4.json"
    _run(capsys, "gen", "kv", "--dim", 2, "--stage", 4, "--out", kv4)
    code, out, _ = _run(capsys, "verify", "convex-position", kv4)
    assert code == EXIT_VIOLATED and out.startswith("FAIL witness")

    es = tmp_path / "es.json"
    _run(capsys, "gen", "es2", "--n", 5, "--out", es)
    code, out, _ = _run(capsys, "analyze", es, "--mc", "--json")
    assert code == EXIT_OK and json.loads(out)["mc"]["size"] == 4

    code, out, _ = _run(capsys, "gen", "random", "--dim", 2, "--n", 30, "--dist", "sphere", "--seed", 4)
    assert code == EXIT_OK and len(json.loads(out)["points"]) == 30
    # the same seed gives the same file
    assert _run(capsys, "gen", "random", "--dim", 2, "--n", 30, "--dist", "sphere", "--seed", 4)[1] == out


def test_analyze_cups_caps_and_support(tmp_path, capsys):
    f = tmp_path / "ex.json"
    _run(capsys, "gen", "extremal-cupcap", "--a", 4, "--b", 5, "--out", f)
    code, out, _ = _run(capsys, "analyze", f, "--cups-caps", "--json")
    d = json.loads(out)
    assert code == EXIT_OK and d["n"] == 10
    assert d["cup"]["size"] <= 4 and d["cap"]["size"] <= 3

    r = tmp_path / "r.json"
    _run(capsys, "gen", "random", "--dim", 2, "--n", 80, "--seed", 1, "--out", r)
    code, out, _ = _run(capsys, "analyze", r, "--support", 4, "--json")
    sup = json.loads(out)["support"]
    assert code == EXIT_OK and len(sup["polygon"]) == 5 and len(sup["counts"]) == 4


def test_analyze_guard_exit(tmp_path, capsys):
    f = tmp_path / "big.json"
    _run(capsys, "gen", "random", "--dim", 3, "--n", 40, "--out", f)
    code, _, err = _run(capsys, "analyze", f, "--mc", "--guard", 20)
    assert code == EXIT_GUARD and "guard" in err


def test_two_separated_files(tmp_path, capsys):
    rng = random.Random(5)
    sets = [[tuple(mpq(rng.randint(-999, 999)) for _ in range(3)) for _ in range(8)] for _ in range(4)]
    mixed = [tmp_path / f"m{j}.json" for j in range(4)]
    for f, S in zip(mixed, sets):
        dump_pointset(PointSet(3, tuple(S)), f)
    code, out, _ = _run(capsys, "verify", "two-separated", *mixed)
    assert code == EXIT_VIOLATED and out.startswith("FAIL pairing")

    Y = two_separate(sets).sets
    files = [tmp_path / f"s{j}.json" for j in range(4)]
    for f, S in zip(files, Y):
        dump_pointset(PointSet(3, tuple(S)), f)
    assert _run(capsys, "verify", "two-separated", *files) == (EXIT_OK, "OK\n", "")

    # one file whose labels name the groups
    pts = tuple(p for S in Y for p in S)
    labels = tuple(j for j, S in enumerate(Y) for _ in S)
    one = tmp_path / "labeled.json"
    dump_pointset(PointSet(3, pts, labels), one)
    assert _run(capsys, "verify", "two-separated", one)[0] == EXIT_OK
    assert _run(capsys, "verify", "two-separated", files[0])[0] == EXIT_USAGE


def test_pipeline_trace_round_trip(tmp_path, capsys):
    src = tmp_path / "clusters.json"
    dump_pointset(supported_clusters(), src)
    tr, out_pts = tmp_path / "trace.json", tmp_path / "k.json"
    code, out, _ = _run(capsys, "pipeline", src, "--mode", "strict", "--trace", tr, "--out", out_pts)
    assert code == EXIT_OK and "assembled" in out
    K, _ = load_pointset(out_pts)
    assert len(K) >= 8
    assert _run(capsys, "verify", "convex-position", out_pts)[0] == EXIT_OK
    code, out, _ = _run(capsys, "verify", "trace", tr)
    assert code == EXIT_OK and out.startswith("OK")

    d = json.loads(tr.read_text())
    d["trace"]["result"] = d["trace"]["result"][:-1]
    tr.write_text(json.dumps(d))
    assert _run(capsys, "verify", "trace", tr)[0] == EXIT_VIOLATED


def test_tables(capsys):
    code, out, _ = _run(capsys, "table", "cupcap-thresholds", "--min", 2, "--max", 4, "--format", "csv")
    lines = out.strip().splitlines()
    assert code == EXIT_OK and lines[0] == "a\\b,2,3,4"
    assert lines[3] == "4,2,4,7"
    code, out, _ = _run(capsys, "table", "lemma-bounds", "--polytope", "tetrahedron", "--tmax", 2)
    assert code == EXIT_OK
    row1 = [c.strip() for c in out.splitlines()[2].strip("|").split("|")]
    assert row1[:4] == ["1", "4", "12", "yes"]


def test_plot_svg(tmp_path, capsys):
    f, svg = tmp_path / "p.json", tmp_path / "p.svg"
    _run(capsys, "gen", "random", "--dim", 2, "--n", 60, "--seed", 2, "--out", f)
    code, out, _ = _run(capsys, "plot", f, "--out", svg, "--support", 4, "--cups-caps")
    text = svg.read_text()
    assert code == EXIT_OK and text.startswith("<svg")
    assert 'class="region"' in text and text.count('class="point"') == 60

    f3 = tmp_path / "p3.json"
    _run(capsys, "gen", "random", "--dim", 3, "--n", 20, "--out", f3)
    assert _run(capsys, "plot", f3, "--out", svg)[0] == EXIT_USAGE
    assert _run(capsys, "plot", f3, "--out", svg, "--project")[0] == EXIT_OK


def test_usage_errors(tmp_path, capsys):
    assert _run(capsys)[0] == EXIT_USAGE
    assert _run(capsys, "gen", "es2")[0] == EXIT_USAGE
    assert _run(capsys, "gen", "bogus")[0] == EXIT_USAGE
    assert _run(capsys, "verify", "convex-position", tmp_path / "missing.json")[0] == EXIT_USAGE
    assert _run(capsys, "--threads", 0, "table", "cupcap-thresholds")[0] == EXIT_USAGE
    assert _run(capsys, "table", "cupcap-thresholds", "--min", 5, "--max", 3)[0] == EXIT_USAGE
    f = tmp_path / "small.json"
    _run(capsys, "gen", "random", "--dim", 3, "--n", 5, "--out", f)
    assert _run(capsys, "pipeline", f)[0] == EXIT_USAGE
    assert _run(capsys, "pipeline", f, "--k", 1)[0] == EXIT_USAGE
    assert _run(capsys, "analyze", f)[0] == EXIT_USAGE
