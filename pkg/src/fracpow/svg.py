"""Tiny self-contained SVG line plot."""
from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape


def line_plot(xs: Sequence[float], ys: Sequence[float], *, title: str = "",
              xlabel: str = "", ylabel: str = "", width: int = 480, height: int = 320) -> str:
    if len(xs) != len(ys) or not xs:
        raise ValueError("need equally many x and y values, at least one")
    pad = 50
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1

    def px(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def py(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<polyline points="{pts}" fill="none" stroke="steelblue" stroke-width="2"/>',
    ]
    for x, y in zip(xs, ys):
        out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" fill="steelblue"/>')
    for v, lab in ((x0, x0), (x1, x1)):
        out.append(f'<text x="{px(v):.2f}" y="{height - pad + 16}" font-size="11" '
                   f'text-anchor="middle">{lab:g}</text>')
    for v in (y0, y1):
        out.append(f'<text x="{pad - 6}" y="{py(v):.2f}" font-size="11" '
                   f'text-anchor="end">{v:.3g}</text>')
    out.append(f'<text x="{width / 2}" y="20" font-size="14" text-anchor="middle">{escape(title)}</text>')
    out.append(f'<text x="{width / 2}" y="{height - 10}" font-size="12" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{height / 2}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 14 {height / 2})">{escape(ylabel)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
