"""Minimal static SVG line chart for a similarity series."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np


def series_svg(values, title: str = "", width: int = 800, height: int = 300, labels=None) -> str:
    v = np.asarray(values, dtype=np.float64)
    pad = 40
    lo, hi = (float(v.min()), float(v.max())) if v.size else (0.0, 1.0)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    n = max(v.size - 1, 1)

    def xy(i, val):
        x = pad + (width - 2 * pad) * i / n
        y = height - pad - (height - 2 * pad) * (val - lo) / (hi - lo)
        return f"{x:.2f},{y:.2f}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{pad}" y="{pad - 10}" font-size="12">{escape(title)}</text>',
        f'<text x="2" y="{pad + 4}" font-size="10">{hi:.3f}</text>',
        f'<text x="2" y="{height - pad}" font-size="10">{lo:.3f}</text>',
    ]
    if labels is not None:
        lab = np.asarray(labels, dtype=bool)
        step = (width - 2 * pad) / n
        for i in np.flatnonzero(lab):
            x = pad + (width - 2 * pad) * i / n - step / 2
            parts.append(f'<rect x="{x:.2f}" y="{pad}" width="{step:.2f}" height="{height - 2 * pad}" fill="#fdd"/>')
    if v.size:
        pts = " ".join(xy(i, val) for i, val in enumerate(v))
        parts.append(f'<polyline fill="none" stroke="#1f77b4" stroke-width="1" points="{pts}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
