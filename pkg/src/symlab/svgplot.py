"""Hand-rolled deterministic SVG line plots.

Golden-file testing needs byte-stable output, so no plotting library:
fixed 800x600 viewport, fixed palette, 6-significant-digit coordinate
formatting, no timestamps or generator metadata.
"""

from __future__ import annotations

import math

WIDTH, HEIGHT = 800, 600
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 40, 50
PALETTE = ("#1f5fa8", "#c23b22", "#2e8540", "#7040a0", "#b8860b",
           "#008080", "#8b2252", "#556b2f", "#483d8b")


def _fmt(v: float) -> str:
    if v == 0:
        return "0"
    return f"{v:.6g}"


def _ticks(lo: float, hi: float, n: int = 6) -> list:
    if not math.isfinite(lo) or not math.isfinite(hi) or lo == hi:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 2.5, 5, 10):
        if raw <= m * mag:
            step = m * mag
            break
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-12 * abs(step):
        out.append(0.0 if abs(t) < 1e-12 * abs(step) else t)
        t += step
    return out


def line_plot(series: list, title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    """series: list of (x values, y values, label). Returns SVG text."""
    xs = [float(v) for x, _, _ in series for v in x]
    ys = [float(v) for _, y, _ in series for v in y]
    if not xs or not ys:
        raise ValueError("cannot plot empty series")
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    padx = 0.03 * (x1 - x0)
    pady = 0.06 * (y1 - y0)
    x0, x1 = x0 - padx, x1 + padx
    y0, y1 = y0 - pady, y1 + pady
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def px(v):
        return MARGIN_L + (v - x0) / (x1 - x0) * pw

    def py(v):
        return MARGIN_T + (y1 - v) / (y1 - y0) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" '
        f'fill="none" stroke="#333333" stroke-width="1"/>',
    ]
    for t in _ticks(x0, x1):
        X = px(t)
        if MARGIN_L - 1 <= X <= WIDTH - MARGIN_R + 1:
            parts.append(f'<line x1="{_fmt(X)}" y1="{MARGIN_T + ph}" '
                         f'x2="{_fmt(X)}" y2="{MARGIN_T + ph + 5}" stroke="#333333"/>')
            parts.append(f'<text x="{_fmt(X)}" y="{MARGIN_T + ph + 20}" '
                         f'font-family="monospace" font-size="12" '
                         f'text-anchor="middle">{_fmt(t)}</text>')
    for t in _ticks(y0, y1):
        Y = py(t)
        if MARGIN_T - 1 <= Y <= HEIGHT - MARGIN_B + 1:
            parts.append(f'<line x1="{MARGIN_L - 5}" y1="{_fmt(Y)}" '
                         f'x2="{MARGIN_L}" y2="{_fmt(Y)}" stroke="#333333"/>')
            parts.append(f'<text x="{MARGIN_L - 8}" y="{_fmt(Y + 4)}" '
                         f'font-family="monospace" font-size="12" '
                         f'text-anchor="end">{_fmt(t)}</text>')
    if title:
        parts.append(f'<text x="{WIDTH // 2}" y="24" font-family="monospace" '
                     f'font-size="15" text-anchor="middle">{title}</text>')
    if xlabel:
        parts.append(f'<text x="{WIDTH // 2}" y="{HEIGHT - 12}" '
                     f'font-family="monospace" font-size="13" '
                     f'text-anchor="middle">{xlabel}</text>')
    if ylabel:
        parts.append(f'<text x="18" y="{HEIGHT // 2}" font-family="monospace" '
                     f'font-size="13" text-anchor="middle" '
                     f'transform="rotate(-90 18 {HEIGHT // 2})">{ylabel}</text>')
    for i, (x, y, label) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_fmt(px(float(a)))},{_fmt(py(float(b)))}"
                       for a, b in zip(x, y))
        parts.append(f'<polyline fill="none" stroke="{color}" '
                     f'stroke-width="1.2" points="{pts}"/>')
        if label:
            parts.append(f'<text x="{MARGIN_L + 10}" y="{MARGIN_T + 18 + 16 * i}" '
                         f'font-family="monospace" font-size="12" '
                         f'fill="{color}">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
