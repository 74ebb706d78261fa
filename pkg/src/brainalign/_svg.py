"""Hand-rolled SVG builders for the report subcommand.

No plotting dependency: charts are assembled as strings so the output
is byte-identical for identical input, which the pipeline determinism
checks rely on.
"""

from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

# plot box margins: left, right, top, bottom
_ML, _MR, _MT, _MB = 58, 16, 34, 46


def _num(x):
    """Compact fixed-point coordinate; avoids platform repr jitter."""
    out = f"{float(x):.2f}".rstrip("0").rstrip(".")
    return "0" if out == "-0" else out


def _tick(v):
    return f"{v:.4g}"


@dataclass
class Curve:
    label: str
    x: list
    y: list
    lo: list = None  # optional CI band
    hi: list = None


def _ranges(lo, hi):
    if hi <= lo:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


class _Frame:
    """Axis-aligned mapping from data space to pixel space."""

    def __init__(self, x0, x1, y0, y1, width, height):
        self.x0, self.x1 = _ranges(x0, x1)
        self.y0, self.y1 = _ranges(y0, y1)
        self.w, self.h = width, height

    def px(self, x):
        span = self.x1 - self.x0
        return _ML + (x - self.x0) * (self.w - _ML - _MR) / span

    def py(self, y):
        span = self.y1 - self.y0
        return self.h - _MB - (y - self.y0) * (self.h - _MT - _MB) / span


def _header(width, height, title):
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}" '
        'font-family="sans-serif">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width // 2}" y="20" text-anchor="middle" '
        f'font-size="14">{escape(title)}</text>',
    ]


def _axes(fr, x_label, y_label, x_ticks, parts):
    bottom, left = fr.h - _MB, _ML
    parts.append(
        f'<line x1="{left}" y1="{_MT}" x2="{left}" y2="{bottom}" '
        'stroke="black"/>'
    )
    parts.append(
        f'<line x1="{left}" y1="{bottom}" x2="{fr.w - _MR}" y2="{bottom}" '
        'stroke="black"/>'
    )
    for k in range(5):
        v = fr.y0 + k * (fr.y1 - fr.y0) / 4
        y = _num(fr.py(v))
        parts.append(
            f'<text x="{left - 6}" y="{y}" text-anchor="end" '
            f'font-size="10" dominant-baseline="middle">{_tick(v)}</text>'
        )
        parts.append(
            f'<line x1="{left - 3}" y1="{y}" x2="{left}" y2="{y}" '
            'stroke="black"/>'
        )
    for v in x_ticks:
        x = _num(fr.px(v))
        parts.append(
            f'<line x1="{x}" y1="{bottom}" x2="{x}" y2="{bottom + 3}" '
            'stroke="black"/>'
        )
        parts.append(
            f'<text x="{x}" y="{bottom + 14}" text-anchor="middle" '
            f'font-size="10">{_tick(v)}</text>'
        )
    parts.append(
        f'<text x="{(left + fr.w - _MR) // 2}" y="{fr.h - 8}" '
        f'text-anchor="middle" font-size="11">{escape(x_label)}</text>'
    )
    parts.append(
        f'<text x="14" y="{(bottom + _MT) // 2}" text-anchor="middle" '
        f'font-size="11" transform="rotate(-90 14 {(bottom + _MT) // 2})">'
        f"{escape(y_label)}</text>"
    )


def line_chart(title, curves, x_label="", y_label="", width=640, height=400):
    """Polyline per curve with optional shaded band between lo and hi."""
    xs = np.concatenate([np.asarray(c.x, float) for c in curves])
    ys = []
    for c in curves:
        ys.append(np.asarray(c.y, float))
        if c.lo is not None:
            ys.extend([np.asarray(c.lo, float), np.asarray(c.hi, float)])
    ys = np.concatenate(ys)
    fr = _Frame(xs.min(), xs.max(), ys.min(), ys.max(), width, height)

    x_ticks = sorted(set(np.asarray(curves[0].x, float).tolist()))
    if len(x_ticks) > 10:
        x_ticks = x_ticks[:: len(x_ticks) // 10 + 1]
    parts = _header(width, height, title)
    _axes(fr, x_label, y_label, x_ticks, parts)

    for i, c in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        if c.lo is not None:
            fwd = [(fr.px(x), fr.py(h)) for x, h in zip(c.x, c.hi)]
            back = [(fr.px(x), fr.py(l)) for x, l in zip(c.x, c.lo)][::-1]
            pts = " ".join(f"{_num(x)},{_num(y)}" for x, y in fwd + back)
            parts.append(
                f'<polygon points="{pts}" fill="{color}" '
                'fill-opacity="0.15" stroke="none"/>'
            )
        pts = " ".join(
            f"{_num(fr.px(x))},{_num(fr.py(y))}" for x, y in zip(c.x, c.y)
        )
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            'stroke-width="1.5"/>'
        )
        for x, y in zip(c.x, c.y):
            parts.append(
                f'<circle cx="{_num(fr.px(x))}" cy="{_num(fr.py(y))}" '
                f'r="2.5" fill="{color}"/>'
            )
        ly = _MT + 14 * i
        parts.append(
            f'<rect x="{width - _MR - 110}" y="{ly}" width="10" '
            f'height="10" fill="{color}"/>'
        )
        parts.append(
            f'<text x="{width - _MR - 96}" y="{ly + 9}" font-size="10">'
            f"{escape(c.label)}</text>"
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def bar_chart(title, labels, values, y_label="", width=640, height=400):
    """Vertical bars from a zero baseline, one slot per label."""
    values = np.asarray(values, float)
    fr = _Frame(0.0, float(len(labels)), min(0.0, values.min()),
                max(0.0, values.max()), width, height)
    parts = _header(width, height, title)
    _axes(fr, "", y_label, [], parts)

    base = fr.py(0.0)
    slot = (width - _ML - _MR) / len(labels)
    for i, (label, v) in enumerate(zip(labels, values)):
        x = _ML + slot * (i + 0.15)
        top = fr.py(v)
        y, h = (top, base - top) if v >= 0 else (base, top - base)
        parts.append(
            f'<rect x="{_num(x)}" y="{_num(y)}" width="{_num(slot * 0.7)}" '
            f'height="{_num(h)}" fill="{PALETTE[0]}"/>'
        )
        cx = _num(x + slot * 0.35)
        parts.append(
            f'<text x="{cx}" y="{_num(top - 4 if v >= 0 else top + 12)}" '
            f'text-anchor="middle" font-size="10">{_tick(v)}</text>'
        )
        parts.append(
            f'<text x="{cx}" y="{fr.h - _MB + 14}" text-anchor="middle" '
            f'font-size="10">{escape(str(label))}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
