"""Minimal self-contained SVG writers (no plotting dependency)."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")
W, H, PAD = 640, 420, 56


def _num(x: float) -> str:
    return f"{x:.2f}"


class _Frame:
    def __init__(self, xs, ys, equal=False):
        xs, ys = np.asarray(xs, float), np.asarray(ys, float)
        self.x0, self.x1 = _span(xs)
        self.y0, self.y1 = _span(ys)
        if equal:
            half = max(self.x1 - self.x0, self.y1 - self.y0) / 2
            cx, cy = (self.x0 + self.x1) / 2, (self.y0 + self.y1) / 2
            self.x0, self.x1, self.y0, self.y1 = cx - half, cx + half, cy - half, cy + half

    def px(self, x):
        return PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2 * PAD)

    def py(self, y):
        return H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2 * PAD)


def _span(v):
    lo, hi = float(np.min(v)), float(np.max(v))
    if hi - lo < 1e-12:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.04 * (hi - lo)
    return lo - pad, hi + pad


def _document(body, title, xlabel="", ylabel="", frame=None):
    head = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
            f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
            f'<rect width="{W}" height="{H}" fill="white"/>',
            f'<text x="{W / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>']
    if frame is not None:
        head.append(f'<rect x="{PAD}" y="{PAD}" width="{W - 2 * PAD}" height="{H - 2 * PAD}" '
                    'fill="none" stroke="#444"/>')
        for x in np.linspace(frame.x0, frame.x1, 5)[1:-1]:
            head.append(f'<text x="{_num(frame.px(x))}" y="{H - PAD + 16}" text-anchor="middle">{x:.3g}</text>')
        for y in np.linspace(frame.y0, frame.y1, 5)[1:-1]:
            head.append(f'<text x="{PAD - 6}" y="{_num(frame.py(y) + 4)}" text-anchor="end">{y:.3g}</text>')
        head.append(f'<text x="{W / 2}" y="{H - 14}" text-anchor="middle">{escape(xlabel)}</text>')
        head.append(f'<text x="16" y="{H / 2}" text-anchor="middle" '
                    f'transform="rotate(-90 16 {H / 2})">{escape(ylabel)}</text>')
    return "\n".join(head + body + ["</svg>"]) + "\n"


def line_plot(series: dict, title: str, xlabel: str, ylabel: str, bands: dict | None = None) -> str:
    """Lines ``name -> (x, y)``, optional shaded ``name -> (low, high)`` bands."""
    xs = np.concatenate([np.asarray(x, float) for x, _ in series.values()])
    ys = np.concatenate([np.asarray(y, float) for _, y in series.values()])
    if bands:
        ys = np.concatenate([ys] + [np.concatenate(b) for b in bands.values()])
    fr = _Frame(xs, ys)
    body = []
    for i, (name, (x, y)) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        if bands and name in bands:
            lo, hi = bands[name]
            pts = [f"{_num(fr.px(a))},{_num(fr.py(b))}" for a, b in zip(x, hi)]
            pts += [f"{_num(fr.px(a))},{_num(fr.py(b))}" for a, b in zip(x[::-1], lo[::-1])]
            body.append(f'<polygon points="{" ".join(pts)}" fill="{color}" fill-opacity="0.15" stroke="none"/>')
        pts = " ".join(f"{_num(fr.px(a))},{_num(fr.py(b))}" for a, b in zip(x, y))
        body.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        body.append(f'<text x="{PAD + 10}" y="{PAD + 16 + 16 * i}" fill="{color}">{escape(name)}</text>')
    return _document(body, title, xlabel, ylabel, fr)


def scatter_plot(x, y, title: str, xlabel: str, ylabel: str) -> str:
    fr = _Frame(x, y)
    body = [f'<circle cx="{_num(fr.px(a))}" cy="{_num(fr.py(b))}" r="3" fill="{PALETTE[0]}"/>'
            for a, b in zip(x, y)]
    return _document(body, title, xlabel, ylabel, fr)


def graph_drawing(coords, edges, highlight=(), title: str = "") -> str:
    """Nodes at ``coords``; ``highlight`` edges (e.g. options) drawn in red."""
    coords = np.asarray(coords, float)
    fr = _Frame(coords[:, 0], coords[:, 1], equal=True)
    body = []
    for u, v in edges:
        body.append(f'<line x1="{_num(fr.px(coords[u, 0]))}" y1="{_num(fr.py(coords[u, 1]))}" '
                    f'x2="{_num(fr.px(coords[v, 0]))}" y2="{_num(fr.py(coords[v, 1]))}" '
                    'stroke="#999" stroke-width="1"/>')
    for u, v in highlight:
        body.append(f'<line x1="{_num(fr.px(coords[u, 0]))}" y1="{_num(fr.py(coords[u, 1]))}" '
                    f'x2="{_num(fr.px(coords[v, 0]))}" y2="{_num(fr.py(coords[v, 1]))}" '
                    f'stroke="{PALETTE[1]}" stroke-width="2"/>')
    for x, y in coords:
        body.append(f'<circle cx="{_num(fr.px(x))}" cy="{_num(fr.py(y))}" r="3" fill="{PALETTE[0]}"/>')
    return _document(body, title, "v2", "v3", fr)
