"""Minimal SVG rendering of planar point sets.  Rounding happens here only."""
from __future__ import annotations

import math

from .geometry import convex_hull

PALETTE = ("#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7")


def region_polygon(system, lo, hi):
    """Vertices of a planar H-polyhedron clipped to the box [lo, hi]^2 (floats)."""
    rows = [(float(a[0]), float(a[1]), float(b)) for a, b in system.halfspaces]
    rows += [(1.0, 0.0, hi[0]), (-1.0, 0.0, -lo[0]), (0.0, 1.0, hi[1]), (0.0, -1.0, -lo[1])]
    pts = []
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            a1, b1, c1 = rows[i]
            a2, b2, c2 = rows[j]
            den = a1 * b2 - a2 * b1
            if abs(den) < 1e-15:
                continue
            x = (c1 * b2 - c2 * b1) / den
            y = (a1 * c2 - a2 * c1) / den
            if all(a * x + b * y <= c + 1e-9 * (1 + abs(c)) for a, b, c in rows):
                pts.append((x, y))
    if len(pts) < 3:
        return []
    cx = sum(p[0] for p in pts) / len(pts)
    cy = sum(p[1] for p in pts) / len(pts)
    return sorted(pts, key=lambda p: math.atan2(p[1] - cy, p[0] - cx))


def render_svg(points, regions=(), chains=(), size: int = 600, margin: int = 20, title: str = "") -> str:
    """SVG with the points, their hull, shaded regions and highlighted chains.

    ``points`` are exact planar points; ``regions`` are HalfSpaceSystem
    objects; ``chains`` are index sequences drawn as polylines.
    """
    xs = [float(p[0]) for p in points]
    ys = [float(p[1]) for p in points]
    lo = (min(xs), min(ys))
    hi = (max(xs), max(ys))
    span = max(hi[0] - lo[0], hi[1] - lo[1]) or 1.0
    pad = 0.05 * span
    lo = (lo[0] - pad, lo[1] - pad)
    hi = (hi[0] + pad, hi[1] + pad)
    span += 2 * pad
    scale = (size - 2 * margin) / span

    def tx(x, y):
        return margin + (x - lo[0]) * scale, size - margin - (y - lo[1]) * scale

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">']
    if title:
        out.append(f"<title>{title}</title>")
    out.append(f'<rect width="{size}" height="{size}" fill="white"/>')
    for r, system in enumerate(regions):
        poly = region_polygon(system, lo, hi)
        if poly:
            coords = " ".join("%.2f,%.2f" % tx(x, y) for x, y in poly)
            out.append(f'<polygon class="region" points="{coords}" fill="{PALETTE[r % len(PALETTE)]}" fill-opacity="0.25" stroke="none"/>')
    if len(points) >= 3:
        try:
            hull = convex_hull(points)
            ring = [hull.vertex_index[i] for i, _ in hull.facets]
            coords = " ".join("%.2f,%.2f" % tx(xs[i], ys[i]) for i in ring)
            out.append(f'<polygon class="hull" points="{coords}" fill="none" stroke="#888" stroke-width="1"/>')
        except Exception:
            pass
    for c, chain in enumerate(chains):
        coords = " ".join("%.2f,%.2f" % tx(xs[i], ys[i]) for i in chain)
        out.append(f'<polyline class="chain" points="{coords}" fill="none" stroke="{PALETTE[(c + 2) % len(PALETTE)]}" stroke-width="2"/>')
    for x, y in zip(xs, ys):
        px, py = tx(x, y)
        out.append(f'<circle class="point" cx="{px:.2f}" cy="{py:.2f}" r="3" fill="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
