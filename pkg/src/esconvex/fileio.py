"""JSON point-set and trace files with exact rational coordinates."""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from gmpy2 import mpq

from .exact import to_str
from .geometry import PointSet

POINTSET_FORMAT = "esconvex-pointset"
TRACE_FORMAT = "esconvex-trace"
VERSION = 1


class FileFormatError(ValueError):
    pass


def parse_rational(text) -> mpq:
    """Exact value of an int, "p/q" or decimal literal (never via binary floats)."""
    if isinstance(text, bool):
        raise FileFormatError(f"not a number: {text!r}")
    if isinstance(text, int):
        return mpq(text)
    if not isinstance(text, str):
        raise FileFormatError(f"coordinates must be strings or integers, got {text!r}")
    try:
        f = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise FileFormatError(f"bad rational {text!r}") from exc
    return mpq(f.numerator, f.denominator)


def _loads(text: str):
    # keep JSON decimals as their literal text so they stay exact
    return json.loads(text, parse_float=str)


def pointset_to_dict(ps: PointSet, metadata: dict | None = None) -> dict:
    d = {
        "format": POINTSET_FORMAT,
        "version": VERSION,
        "dim": ps.dim,
        "points": [[to_str(c) for c in p] for p in ps.points],
    }
    if ps.labels is not None:
        d["labels"] = list(ps.labels)
    d["metadata"] = dict(metadata or {})
    return d


def pointset_from_dict(d: dict) -> tuple[PointSet, dict]:
    if not isinstance(d, dict) or d.get("format", POINTSET_FORMAT) != POINTSET_FORMAT:
        raise FileFormatError("not a point-set file")
    try:
        dim = int(d["dim"])
        pts = tuple(tuple(parse_rational(c) for c in p) for p in d["points"])
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"malformed point-set file: {exc}") from exc
    if any(len(p) != dim for p in pts):
        raise FileFormatError("a point does not match the declared dimension")
    labels = d.get("labels")
    return PointSet(dim, pts, tuple(labels) if labels is not None else None), dict(d.get("metadata", {}))


def dump_pointset(ps: PointSet, path, metadata: dict | None = None):
    Path(path).write_text(json.dumps(pointset_to_dict(ps, metadata), indent=1) + "\n")


def load_pointset(path) -> tuple[PointSet, dict]:
    try:
        d = _loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: invalid JSON ({exc})") from exc
    return pointset_from_dict(d)


def dump_trace(trace, ps: PointSet, path):
    d = {"format": TRACE_FORMAT, "version": VERSION, "points": pointset_to_dict(ps), "trace": trace.to_dict()}
    Path(path).write_text(json.dumps(d, indent=1) + "\n")


def load_trace(path):
    from .pipeline import CertificateTrace

    try:
        d = _loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: invalid JSON ({exc})") from exc
    if d.get("format") != TRACE_FORMAT:
        raise FileFormatError("not a trace file")
    ps, _ = pointset_from_dict(d["points"])
    return CertificateTrace.from_dict(d["trace"]), ps
