"""Deterministic SVG line charts of summary rows."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

from .validation import ValidationError

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f")
WIDTH, HEIGHT = 640, 420
MARGIN = (70, 20, 30, 50)  # left, right, top, bottom


def _get(row, name):
    if isinstance(row, dict):
        return row[name]
    return getattr(row, name)


def _scale(lo, hi, a, b, log):
    if log:
        lo, hi = math.log10(lo), math.log10(hi)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5

    def f(v):
        v = math.log10(v) if log else v
        return a + (v - lo) / (hi - lo) * (b - a)
    return f


def emit_svg(rows, x: str = "n", y: str = "mean", group: str = "algorithm", logx: bool = False, logy: bool = False,
             err: str | None = "stderr", title: str = "") -> str:
    """Curves of ``y`` against ``x`` per ``group``; error bars are +-1 ``err``.

    Points that cannot be drawn on a log axis (value <= 0) are skipped.
    """
    rows = list(rows)
    if not rows:
        raise ValidationError("nothing to plot")
    pts: dict[str, list[tuple[float, float, float]]] = {}
    for r in rows:
        xv, yv = float(_get(r, x)), float(_get(r, y))
        ev = float(_get(r, err)) if err and y == "mean" else 0.0
        if (logx and xv <= 0) or (logy and yv <= 0):
            continue
        pts.setdefault(str(_get(r, group)), []).append((xv, yv, ev))
    if not pts:
        raise ValidationError("no point is drawable on the requested axes")
    xs = [p[0] for g in pts.values() for p in g]
    lows = [p[1] - p[2] for g in pts.values() for p in g]
    highs = [p[1] + p[2] for g in pts.values() for p in g]
    if logy:
        lows = [v for v in lows if v > 0] or [min(p[1] for g in pts.values() for p in g)]
    L, R, T, B = MARGIN
    fx = _scale(min(xs), max(xs), L, WIDTH - R, logx)
    fy = _scale(min(lows), max(highs), HEIGHT - B, T, logy)
    y_floor = min(lows)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{L}" y1="{HEIGHT - B}" x2="{WIDTH - R}" y2="{HEIGHT - B}" stroke="black"/>',
        f'<line x1="{L}" y1="{T}" x2="{L}" y2="{HEIGHT - B}" stroke="black"/>',
        f'<text x="{(L + WIDTH - R) / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle" font-size="12">{escape(x)}{" (log)" if logx else ""}</text>',
        f'<text x="14" y="{(T + HEIGHT - B) / 2:.1f}" text-anchor="middle" font-size="12" transform="rotate(-90 14 {(T + HEIGHT - B) / 2:.1f})">{escape(y)}{" (log)" if logy else ""}</text>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="16" text-anchor="middle" font-size="13">{escape(title)}</text>')
    for v, anchor, px, py in (
        (min(xs), "start", fx(min(xs)), HEIGHT - B + 14),
        (max(xs), "end", fx(max(xs)), HEIGHT - B + 14),
    ):
        out.append(f'<text x="{px:.1f}" y="{py:.1f}" text-anchor="{anchor}" font-size="10">{v:.4g}</text>')
    for v in (min(lows), max(highs)):
        out.append(f'<text x="{L - 4}" y="{fy(v) + 3:.1f}" text-anchor="end" font-size="10">{v:.4g}</text>')
    for k, name in enumerate(sorted(pts)):
        color = PALETTE[k % len(PALETTE)]
        series = sorted(pts[name])
        coords = " ".join(f"{fx(a):.2f},{fy(b):.2f}" for a, b, _ in series)
        out.append(f'<g class="series" data-group="{escape(name)}">')
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        for a, b, e in series:
            if e > 0:
                lo = max(b - e, y_floor) if logy else b - e
                out.append(f'<line x1="{fx(a):.2f}" y1="{fy(lo):.2f}" x2="{fx(a):.2f}" y2="{fy(b + e):.2f}" stroke="{color}"/>')
            out.append(f'<circle cx="{fx(a):.2f}" cy="{fy(b):.2f}" r="3" fill="{color}"/>')
        out.append("</g>")
        out.append(f'<text x="{WIDTH - R - 4}" y="{T + 14 * (k + 1)}" text-anchor="end" font-size="11" fill="{color}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
