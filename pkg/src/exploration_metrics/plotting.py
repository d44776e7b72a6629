"""Static SVG rendering of sweep results: one panel per metric, mean line over a min-max band."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .exceptions import InputError

PANEL_W = 320
PANEL_H = 220
MARGIN = dict(left=58, right=14, top=28, bottom=38)
COLUMNS = 3
BAND_COLOR = "#9ecae1"
LINE_COLOR = "#08519c"


@dataclass(frozen=True)
class Axes:
    """Data-to-pixel mapping of one panel."""

    x0: float
    y0: float
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float
    log_x: bool

    @property
    def width(self) -> float:
        return PANEL_W - MARGIN["left"] - MARGIN["right"]

    @property
    def height(self) -> float:
        return PANEL_H - MARGIN["top"] - MARGIN["bottom"]

    def px(self, x):
        x = np.log10(x) if self.log_x else np.asarray(x, dtype=float)
        lo, hi = (math.log10(self.x_lo), math.log10(self.x_hi)) if self.log_x else (self.x_lo, self.x_hi)
        return self.x0 + MARGIN["left"] + (x - lo) / (hi - lo) * self.width

    def py(self, y):
        y = np.asarray(y, dtype=float)
        return self.y0 + MARGIN["top"] + (self.y_hi - y) / (self.y_hi - self.y_lo) * self.height


def _span(lo: float, hi: float):
    if hi - lo < 1e-12 * max(1.0, abs(hi), abs(lo)):
        pad = 0.5 if lo == 0 else 0.1 * abs(lo)
        return lo - pad, hi + pad
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def panel_axes(scales, lo, hi, x0: float, y0: float, log_x: bool | None = None) -> Axes:
    scales = np.asarray(scales, dtype=float)
    if log_x is None:
        log_x = bool(scales.min() > 0 and scales.max() / scales.min() >= 100)
    finite = np.isfinite(lo) & np.isfinite(hi)
    y_lo, y_hi = (_span(float(np.min(lo[finite])), float(np.max(hi[finite])))
                  if finite.any() else (-1.0, 1.0))
    x_lo, x_hi = float(scales.min()), float(scales.max())
    if x_hi == x_lo:
        x_lo, x_hi = (x_lo / 2, x_hi * 2) if log_x else (x_lo - 0.5, x_hi + 0.5)
    return Axes(x0, y0, x_lo, x_hi, y_lo, y_hi, log_x)


def _points(xs, ys) -> str:
    return " ".join(f"{x:.3f},{y:.3f}" for x, y in zip(xs, ys))


def _panel(result, metric: str, axes: Axes) -> list[str]:
    scales, mean, lo, hi = result.series(metric)
    ok = np.isfinite(mean)
    parts = [f'<g class="panel" data-metric="{escape(metric)}">']
    left, top = axes.x0 + MARGIN["left"], axes.y0 + MARGIN["top"]
    parts.append(
        f'<rect x="{left:.3f}" y="{top:.3f}" width="{axes.width:.3f}" height="{axes.height:.3f}" '
        'fill="none" stroke="#444" stroke-width="0.8"/>'
    )
    parts.append(
        f'<text x="{axes.x0 + PANEL_W / 2:.1f}" y="{axes.y0 + 18:.1f}" text-anchor="middle" '
        f'font-size="13">{escape(metric)}</text>'
    )
    for val in (axes.y_lo, axes.y_hi):
        parts.append(
            f'<text x="{left - 4:.1f}" y="{float(axes.py(val)):.1f}" text-anchor="end" '
            f'font-size="10">{val:.3g}</text>'
        )
    for val in (axes.x_lo, axes.x_hi):
        parts.append(
            f'<text x="{float(axes.px(val)):.1f}" y="{top + axes.height + 14:.1f}" '
            f'text-anchor="middle" font-size="10">{val:.3g}</text>'
        )
    parts.append(
        f'<text x="{left + axes.width / 2:.1f}" y="{top + axes.height + 30:.1f}" '
        f'text-anchor="middle" font-size="11">scale{" (log)" if axes.log_x else ""}</text>'
    )
    if ok.any():
        xs = axes.px(scales[ok])
        band = _points(np.concatenate([xs, xs[::-1]]),
                       np.concatenate([axes.py(hi[ok]), axes.py(lo[ok])[::-1]]))
        parts.append(f'<polygon class="band" points="{band}" fill="{BAND_COLOR}" '
                     'fill-opacity="0.6" stroke="none"/>')
        parts.append(f'<polyline class="mean" points="{_points(xs, axes.py(mean[ok]))}" '
                     f'fill="none" stroke="{LINE_COLOR}" stroke-width="1.6"/>')
    parts.append("</g>")
    return parts


def render_svg(result, title: str | None = None) -> str:
    if len(result.scales) == 0 or len(result.metrics) == 0:
        raise InputError("cannot plot an empty sweep result")
    n_panels = len(result.metrics)
    cols = min(COLUMNS, n_panels)
    rows = math.ceil(n_panels / cols)
    header = 30
    width, height = cols * PANEL_W, rows * PANEL_H + header
    title = title if title is not None else result.family
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="15">{escape(title)}</text>',
    ]
    for p, metric in enumerate(result.metrics):
        _, _, lo, hi = result.series(metric)
        axes = panel_axes(result.scales, lo, hi, (p % cols) * PANEL_W, header + (p // cols) * PANEL_H)
        parts.extend(_panel(result, metric, axes))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_plot(result, path, title: str | None = None) -> None:
    Path(path).write_text(render_svg(result, title))
