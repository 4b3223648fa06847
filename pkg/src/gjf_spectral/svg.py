"""Minimal self-contained SVG writers for error curves and solution heatmaps."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2")


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def semilog_plot(
    curves: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    title: str,
    xlabel: str,
    width: int = 640,
    height: int = 420,
) -> str:
    """Line plot of ``log10(y)`` against ``x`` for each ``(label, x, y)`` curve."""
    pts = [(lab, np.asarray(x, float), np.log10(np.maximum(np.asarray(y, float), 1e-300))) for lab, x, y in curves]
    xs = np.concatenate([p[1] for p in pts]) if pts else np.array([0.0, 1.0])
    ys = np.concatenate([p[2] for p in pts]) if pts else np.array([0.0, 1.0])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = math.floor(float(ys.min())), math.ceil(float(ys.max()))
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1
    left, right, top, bottom = 70, 150, 40, 50
    pw, ph = width - left - right, height - top - bottom

    def sx(v):
        return left + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return top + (y1 - v) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{_esc(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    step = max(1, (y1 - y0) // 8)
    for d in range(y0, y1 + 1, step):
        yy = sy(d)
        out.append(f'<line x1="{left}" y1="{yy:.1f}" x2="{left + pw}" y2="{yy:.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 6}" y="{yy + 4:.1f}" text-anchor="end">1e{d}</text>')
    for v in sorted(set(float(x) for x in xs)):
        out.append(f'<text x="{sx(v):.1f}" y="{top + ph + 16}" text-anchor="middle">{v:g}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{_esc(xlabel)}</text>')
    for idx, (lab, x, y) in enumerate(pts):
        color = _COLORS[idx % len(_COLORS)]
        order = np.argsort(x)
        path = " ".join(f"{sx(a):.1f},{sy(b):.1f}" for a, b in zip(x[order], y[order]))
        out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for a, b in zip(x, y):
            out.append(f'<circle cx="{sx(a):.1f}" cy="{sy(b):.1f}" r="2.5" fill="{color}"/>')
        ly = top + 14 + 18 * idx
        out.append(f'<line x1="{left + pw + 10}" y1="{ly - 4}" x2="{left + pw + 30}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 34}" y="{ly}">{_esc(lab)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _color(v: float) -> str:
    # blue -> white -> red
    v = min(max(v, 0.0), 1.0)
    if v < 0.5:
        a = v / 0.5
        r, g, b = int(40 + 215 * a), int(80 + 175 * a), 255
    else:
        a = (v - 0.5) / 0.5
        r, g, b = 255, int(255 - 200 * a), int(255 - 215 * a)
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap_panels(
    panels: Sequence[tuple[str, np.ndarray]],
    title: str,
    cols: int = 3,
    cell: int = 4,
) -> str:
    """Grid of filled-rectangle heatmaps sharing one colour scale.

    Each panel is ``(label, values)`` with ``values[ix, it]``; ``x`` runs
    horizontally and ``t`` upwards.
    """
    lo = min(float(np.min(v)) for _, v in panels)
    hi = max(float(np.max(v)) for _, v in panels)
    span = hi - lo if hi > lo else 1.0
    nx, nt = panels[0][1].shape
    pw, ph = nx * cell, nt * cell
    rows = math.ceil(len(panels) / cols)
    gap, top = 30, 40
    width = cols * (pw + gap) + gap
    height = top + rows * (ph + gap + 10)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{_esc(title)} '
        f"(range {lo:.3g} .. {hi:.3g})</text>",
    ]
    for p, (label, vals) in enumerate(panels):
        ox = gap + (p % cols) * (pw + gap)
        oy = top + (p // cols) * (ph + gap + 10)
        out.append(f'<text x="{ox + pw / 2:.1f}" y="{oy + 12}" text-anchor="middle">{_esc(label)}</text>')
        oy += 16
        for i in range(nx):
            for j in range(nt):
                c = _color((float(vals[i, j]) - lo) / span)
                out.append(f'<rect x="{ox + i * cell}" y="{oy + (nt - 1 - j) * cell}" width="{cell}" height="{cell}" fill="{c}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
