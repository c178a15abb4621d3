"""Static SVG line charts.

One polyline per series, linear or log vertical axis, no external
assets. Output is a pure function of the input, byte for byte, so the
artifacts can be golden-tested and diffed across runs.
"""

import numpy as np

from .errors import EmptySeries

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 64, 16, 34, 42


def _coerce(series, log_y):
    cleaned = []
    for t, y in series:
        t = np.asarray(t, dtype=float)
        y = np.asarray(y, dtype=float)
        if t.shape != y.shape or t.ndim != 1:
            raise EmptySeries("series must be matching 1-d arrays")
        if t.shape[0] < 2:
            raise EmptySeries("a series needs at least two points")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(y))):
            raise EmptySeries("series contain non-finite values")
        if log_y:
            if np.any(y <= 0.0):
                raise EmptySeries("log scale needs strictly positive values")
            y = np.log10(y)
        cleaned.append((t, y))
    if not cleaned:
        raise EmptySeries("no series given")
    return cleaned


def _span(lo, hi):
    if hi - lo < 1e-300:
        pad = 0.5 if lo == 0.0 else abs(lo) * 0.05 + 1e-300
        return lo - pad, hi + pad
    return lo, hi


def _ticks(lo, hi, count=5):
    return [lo + (hi - lo) * k / (count - 1) for k in range(count)]


def _fmt_tick(v, log_axis):
    if log_axis:
        return "1e%d" % int(round(v)) if abs(v - round(v)) < 1e-9 else "%.3g" % 10.0**v
    return "%.4g" % v


def emit_svg(series, style=None):
    """Render series of (t, y) arrays to a standalone SVG string.

    style keys (all optional): title, xlabel, ylabel, log_y, labels
    (one per series).
    """
    style = {} if style is None else dict(style)
    log_y = bool(style.get("log_y", False))
    data = _coerce(series, log_y)

    t_lo = min(float(t.min()) for t, _ in data)
    t_hi = max(float(t.max()) for t, _ in data)
    y_lo = min(float(y.min()) for _, y in data)
    y_hi = max(float(y.max()) for _, y in data)
    t_lo, t_hi = _span(t_lo, t_hi)
    y_lo, y_hi = _span(y_lo, y_hi)

    px = _W - _ML - _MR
    py = _H - _MT - _MB

    def sx(t):
        return _ML + (t - t_lo) / (t_hi - t_lo) * px

    def sy(y):
        return _MT + (y_hi - y) / (y_hi - y_lo) * py

    out = []
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
               f'viewBox="0 0 {_W} {_H}" font-family="Helvetica,Arial,sans-serif">')
    out.append(f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="#ffffff"/>')

    for tv in _ticks(t_lo, t_hi):
        x = sx(tv)
        out.append(f'<line x1="{x:.2f}" y1="{_MT}" x2="{x:.2f}" y2="{_MT + py}" '
                   f'stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{x:.2f}" y="{_MT + py + 16}" font-size="11" '
                   f'fill="#333333" text-anchor="middle">{_fmt_tick(tv, False)}</text>')
    for yv in _ticks(y_lo, y_hi):
        yy = sy(yv)
        out.append(f'<line x1="{_ML}" y1="{yy:.2f}" x2="{_ML + px}" y2="{yy:.2f}" '
                   f'stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{_ML - 6}" y="{yy + 4:.2f}" font-size="11" '
                   f'fill="#333333" text-anchor="end">{_fmt_tick(yv, log_y)}</text>')

    out.append(f'<rect x="{_ML}" y="{_MT}" width="{px}" height="{py}" '
               f'fill="none" stroke="#333333" stroke-width="1"/>')

    labels = style.get("labels", [])
    for k, (t, y) in enumerate(data):
        color = _PALETTE[k % len(_PALETTE)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(t, y))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5"/>')
        if k < len(labels):
            out.append(f'<text x="{_ML + px - 8}" y="{_MT + 16 + 14 * k}" '
                       f'font-size="11" fill="{color}" '
                       f'text-anchor="end">{labels[k]}</text>')

    if style.get("title"):
        out.append(f'<text x="{_W / 2:.0f}" y="20" font-size="13" fill="#000000" '
                   f'text-anchor="middle">{style["title"]}</text>')
    if style.get("xlabel"):
        out.append(f'<text x="{_ML + px / 2:.0f}" y="{_H - 8}" font-size="11" '
                   f'fill="#000000" text-anchor="middle">{style["xlabel"]}</text>')
    if style.get("ylabel"):
        ycen = _MT + py / 2
        out.append(f'<text x="14" y="{ycen:.0f}" font-size="11" fill="#000000" '
                   f'text-anchor="middle" transform="rotate(-90 14 {ycen:.0f})">'
                   f'{style["ylabel"]}</text>')

    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, series, style=None):
    from .io import atomic_write_text
    atomic_write_text(path, emit_svg(series, style))
