"""Bare-bones SVG charts (axes, polylines or markers, legend)."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 150, 40, 50


def _scale(values, log):
    vals = [math.log10(v) for v in values if v > 0] if log else list(values)
    if not vals:
        return 0.0, 1.0
    lo, hi = min(vals), max(vals)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def _fmt(v):
    return f"{v:.3g}"


def _chart(series, title, xlabel, ylabel, logx, logy, markers):
    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts]
    x0, x1 = _scale(xs, logx)
    y0, y1 = _scale(ys, logy)
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(x):
        v = math.log10(x) if logx else x
        return LEFT + (v - x0) / (x1 - x0) * pw

    def py(y):
        v = math.log10(y) if logy else y
        return TOP + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'font-family="sans-serif" font-size="11">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for i in range(5):
        fx = x0 + (x1 - x0) * i / 4
        fy = y0 + (y1 - y0) * i / 4
        gx = LEFT + pw * i / 4
        gy = TOP + ph - ph * i / 4
        lx = 10**fx if logx else fx
        ly = 10**fy if logy else fy
        out.append(f'<text x="{gx:.1f}" y="{TOP + ph + 16}" text-anchor="middle">{_fmt(lx)}</text>')
        out.append(f'<text x="{LEFT - 6}" y="{gy + 4:.1f}" text-anchor="end">{_fmt(ly)}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{TOP + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {TOP + ph / 2:.1f})">{escape(ylabel)}</text>'
    )
    for i, (name, pts) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        pts = [(x, y) for x, y in pts if (x > 0 or not logx) and (y > 0 or not logy)]
        if markers:
            out.extend(
                f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" r="2.5" fill="{color}"/>' for x, y in pts
            )
        elif pts:
            path = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in pts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = TOP + 14 + 18 * i
        out.append(f'<rect x="{WIDTH - RIGHT + 12}" y="{ly - 8}" width="12" height="8" fill="{color}"/>')
        out.append(f'<text x="{WIDTH - RIGHT + 30}" y="{ly}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def line_chart(series, title="", xlabel="", ylabel="", logx=False, logy=False) -> str:
    """``series`` maps a legend label to a list of (x, y) points."""
    return _chart(series, title, xlabel, ylabel, logx, logy, markers=False)


def scatter_chart(series, title="", xlabel="", ylabel="", logx=False, logy=False) -> str:
    return _chart(series, title, xlabel, ylabel, logx, logy, markers=True)
