"""Minimal static SVG line plots (no plotting dependency).

Emits SVG 1.1 with linear x and optionally log10 y, axis ticks, and a
legend. Good enough for convergence curves; not a general plotting kit.
"""

from __future__ import annotations

import math

__all__ = ["line_plot_svg"]

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd",
            "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"]

_W, _H = 640, 480
_ML, _MR, _MT, _MB = 70, 20, 40, 50


def _nice_ticks(lo: float, hi: float, n: int = 6) -> list:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1, 2, 5, 10):
        step = mult * mag
        if raw <= step:
            break
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _fmt(v: float) -> str:
    if v == int(v) and abs(v) < 1e7:
        return str(int(v))
    return f"{v:g}"


def line_plot_svg(series, title: str = "", xlabel: str = "", ylabel: str = "",
                  log_y: bool = True) -> str:
    """Render [(label, xs, ys), ...] as an SVG line plot string.

    With log_y, nonpositive y values are dropped from the plot (they
    cannot be drawn on a log axis).
    """
    pts = []
    for _, xs, ys in series:
        for x, y in zip(xs, ys):
            if not log_y or y > 0:
                pts.append((float(x), float(y)))
    if not pts:
        raise ValueError("nothing to plot")
    xs_all = [p[0] for p in pts]
    ys_all = [p[1] for p in pts]
    x_lo, x_hi = min(xs_all), max(xs_all)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if log_y:
        y_lo = math.floor(math.log10(min(ys_all)))
        y_hi = math.ceil(math.log10(max(ys_all)))
        if y_hi == y_lo:
            y_hi += 1
    else:
        y_lo, y_hi = min(ys_all), max(ys_all)
        if y_hi == y_lo:
            y_hi = y_lo + 1.0

    pw, ph = _W - _ML - _MR, _H - _MT - _MB

    def sx(x: float) -> float:
        return _ML + pw * (x - x_lo) / (x_hi - x_lo)

    def sy(y: float) -> float:
        v = math.log10(y) if log_y else y
        return _MT + ph * (1.0 - (v - y_lo) / (y_hi - y_lo))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" '
        'fill="none" stroke="black"/>',
    ]
    if title:
        out.append(f'<text x="{_W / 2}" y="24" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="16">{title}</text>')

    for t in _nice_ticks(x_lo, x_hi):
        px = sx(t)
        out.append(f'<line x1="{px:.1f}" y1="{_MT + ph}" x2="{px:.1f}" '
                   f'y2="{_MT + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.1f}" y="{_MT + ph + 20}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{_fmt(t)}</text>')
    y_ticks = (range(int(y_lo), int(y_hi) + 1) if log_y
               else _nice_ticks(y_lo, y_hi))
    for t in y_ticks:
        py = sy(10.0 ** t) if log_y else sy(t)
        label = f"1e{t}" if log_y else _fmt(t)
        out.append(f'<line x1="{_ML - 5}" y1="{py:.1f}" x2="{_ML}" '
                   f'y2="{py:.1f}" stroke="black"/>')
        out.append(f'<text x="{_ML - 8}" y="{py + 4:.1f}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">{label}</text>')
    if xlabel:
        out.append(f'<text x="{_ML + pw / 2}" y="{_H - 12}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="13">{xlabel}</text>')
    if ylabel:
        out.append(f'<text x="18" y="{_MT + ph / 2}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="13" '
                   f'transform="rotate(-90 18 {_MT + ph / 2})">{ylabel}</text>')

    for idx, (label, xs, ys) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        coords = [
            f"{sx(float(x)):.2f},{sy(float(y)):.2f}"
            for x, y in zip(xs, ys) if not log_y or y > 0
        ]
        if coords:
            out.append(f'<polyline points="{" ".join(coords)}" fill="none" '
                       f'stroke="{color}" stroke-width="1.5"/>')
        ly = _MT + 16 + 18 * idx
        out.append(f'<line x1="{_ML + pw - 150}" y1="{ly - 4}" '
                   f'x2="{_ML + pw - 120}" y2="{ly - 4}" stroke="{color}" '
                   'stroke-width="1.5"/>')
        out.append(f'<text x="{_ML + pw - 114}" y="{ly}" font-family="sans-serif" '
                   f'font-size="12">{label}</text>')

    out.append("</svg>")
    return "\n".join(out) + "\n"
