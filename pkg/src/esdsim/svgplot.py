"""Minimal deterministic SVG plotting for concurrence-vs-gamma_t figures.

Blue markers: system concurrence.  Orange markers: environment concurrence.
Solid lines: closed-form curves.  Output depends only on the inputs, so files
can be compared byte for byte.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence
from xml.sax.saxutils import escape

SYSTEM_COLOR = "#1f77b4"
ENV_COLOR = "#ff7f0e"

WIDTH, HEIGHT = 640, 440
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 30, 60


@dataclass
class PointSeries:
    x: Sequence[float]
    y: Sequence[float]
    err: Sequence[float]
    color: str
    label: str


@dataclass
class Curve:
    x: Sequence[float]
    y: Sequence[float]
    color: str
    label: str


@dataclass
class Figure:
    title: str = ""
    points: list[PointSeries] = field(default_factory=list)
    curves: list[Curve] = field(default_factory=list)


def _n(v: float) -> str:
    return f"{v:.2f}"


def _finite(*vals: float) -> bool:
    return all(math.isfinite(v) for v in vals)


def render(fig: Figure) -> str:
    xs = [v for s in fig.points for v in s.x if math.isfinite(v)]
    xs += [v for c in fig.curves for v in c.x if math.isfinite(v)]
    x_lo = min(xs, default=0.0)
    x_hi = max(xs, default=1.0)
    if x_hi - x_lo < 1e-12:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(x: float) -> float:
        return LEFT + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y: float) -> float:
        y = min(1.05, max(-0.05, y))
        return TOP + (1 - y) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for i in range(6):
        yv = i / 5
        out.append(f'<line x1="{LEFT - 5}" y1="{_n(py(yv))}" x2="{LEFT}" y2="{_n(py(yv))}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{_n(py(yv) + 4)}" text-anchor="end">{yv:.1f}</text>')
    for i in range(6):
        xv = x_lo + (x_hi - x_lo) * i / 5
        out.append(f'<line x1="{_n(px(xv))}" y1="{TOP + ph}" x2="{_n(px(xv))}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{_n(px(xv))}" y="{TOP + ph + 20}" text-anchor="middle">{xv:.2f}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.2f}" y="{HEIGHT - 15}" text-anchor="middle">γt</text>')
    out.append(
        f'<text x="18" y="{TOP + ph / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {TOP + ph / 2:.2f})">Concurrence</text>'
    )
    if fig.title:
        out.append(f'<text x="{LEFT + pw / 2:.2f}" y="20" text-anchor="middle">{escape(fig.title)}</text>')

    for c in fig.curves:
        pts = " ".join(f"{_n(px(x))},{_n(py(y))}" for x, y in zip(c.x, c.y) if _finite(x, y))
        if pts:
            out.append(f'<polyline points="{pts}" fill="none" stroke="{c.color}" stroke-width="2"/>')
    for s in fig.points:
        for x, y, e in zip(s.x, s.y, s.err):
            if not _finite(x, y):
                continue
            cx, cy = px(x), py(y)
            if _finite(e) and e > 0:
                y0, y1 = py(y - e), py(y + e)
                out.append(f'<line x1="{_n(cx)}" y1="{_n(y0)}" x2="{_n(cx)}" y2="{_n(y1)}" stroke="{s.color}"/>')
                for yy in (y0, y1):
                    out.append(f'<line x1="{_n(cx - 3)}" y1="{_n(yy)}" x2="{_n(cx + 3)}" y2="{_n(yy)}" stroke="{s.color}"/>')
            out.append(f'<circle cx="{_n(cx)}" cy="{_n(cy)}" r="3.5" fill="{s.color}"/>')

    legend = [(s.label, s.color, "dot") for s in fig.points] + [(c.label, c.color, "line") for c in fig.curves]
    for i, (label, color, kind) in enumerate(legend):
        ly = TOP + 14 + 16 * i
        lx = LEFT + pw - 170
        if kind == "dot":
            out.append(f'<circle cx="{lx + 10}" cy="{ly - 4}" r="3.5" fill="{color}"/>')
        else:
            out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 20}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 28}" y="{ly}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
