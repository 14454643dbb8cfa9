"""
Self-contained SVG plots of two CSV columns.

The SVG text is built as a string and depends only on the CSV contents and the
PlotSpec, so the same input always gives the same bytes.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Optional, Sequence, Tuple
from xml.sax.saxutils import escape, quoteattr

import numpy as np
import pandas as pd

from .errors import UsageError
from .experiments.sinks import IResultSink, read_csv

logger = logging.getLogger(__name__)

Scale = Literal["linear", "log"]
Kind = Literal["scatter", "line"]

WIDTH, HEIGHT = 800, 600
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 90, 30, 50, 70
TICK_TARGET = 10


@dataclass(frozen=True)
class PlotSpec:
    x: str
    y: str
    xscale: Scale = "linear"
    yscale: Scale = "linear"
    kind: Kind = "scatter"
    title: str = ""

    def __post_init__(self):
        for name in ("xscale", "yscale"):
            if getattr(self, name) not in ("linear", "log"):
                raise UsageError(f"{name} must be 'linear' or 'log', got '{getattr(self, name)}'")
        if self.kind not in ("scatter", "line"):
            raise UsageError(f"kind must be 'scatter' or 'line', got '{self.kind}'")


# ---- axes ----

def nice_step(span: float, target: int = TICK_TARGET) -> float:
    raw = span / target
    magnitude = 10.0 ** math.floor(math.log10(raw))
    for m in (1.0, 2.0, 5.0, 10.0):
        if m * magnitude >= raw:
            return m * magnitude
    return 10.0 * magnitude


@dataclass(frozen=True)
class Axis:
    lo: float
    hi: float
    scale: str
    ticks: Tuple[float, ...]

    @classmethod
    def fit(cls, values: np.ndarray, scale: str) -> "Axis":
        if scale == "log":
            if values.size == 0:
                return cls(1.0, 10.0, scale, (1.0, 10.0))
            lo_exp = math.floor(math.log10(values.min()))
            hi_exp = math.ceil(math.log10(values.max()))
            if hi_exp == lo_exp:
                hi_exp += 1
            ticks = tuple(10.0 ** k for k in range(lo_exp, hi_exp + 1))
            return cls(ticks[0], ticks[-1], scale, ticks)

        lo, hi = (float(values.min()), float(values.max())) if values.size else (0.0, 1.0)
        if hi == lo:
            pad = abs(lo) * 0.5 or 1.0
            lo, hi = lo - pad, hi + pad
        step = nice_step(hi - lo)
        start = math.floor(lo / step)
        stop = math.ceil(hi / step)
        ticks = tuple(round(k * step, 12) for k in range(start, stop + 1))
        return cls(ticks[0], ticks[-1], scale, ticks)

    def fraction(self, v: float) -> float:
        if self.scale == "log":
            return (math.log10(v) - math.log10(self.lo)) / (math.log10(self.hi) - math.log10(self.lo))
        return (v - self.lo) / (self.hi - self.lo)


def tick_label(v: float) -> str:
    return f"{v:g}"


# ---- canvas ----

class SvgCanvas:
    """Accumulates SVG elements as text."""

    def __init__(self, width: int = WIDTH, height: int = HEIGHT):
        self.width = width
        self.height = height
        self.svg = ""

    def header(self) -> None:
        self.svg += '<?xml version="1.0" encoding="UTF-8"?>\n'
        self.svg += (
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{self.width}" height="{self.height}" viewBox="0 0 {self.width} {self.height}">\n'
        )
        self.svg += f'<rect x="0" y="0" width="{self.width}" height="{self.height}" fill="white"/>\n'

    def line(self, x1: float, y1: float, x2: float, y2: float, stroke: str = "black", extra: str = "") -> None:
        self.svg += f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" stroke="{stroke}" {extra}/>\n'

    def text(self, x: float, y: float, string: str, extra: str = "") -> None:
        self.svg += f'<text x="{x:.2f}" y="{y:.2f}" font-family="sans-serif" {extra}>{escape(string)}</text>\n'

    def circle(self, cx: float, cy: float, r: float = 3.0, fill: str = "steelblue") -> None:
        self.svg += f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{r:.1f}" fill="{fill}"/>\n'

    def polyline(self, points: Sequence[Tuple[float, float]], stroke: str = "steelblue") -> None:
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
        self.svg += f'<polyline points="{coords}" fill="none" stroke="{stroke}" stroke-width="1.5"/>\n'

    def get_svg(self) -> str:
        return f"{self.svg}</svg>\n"


# ---- rendering ----

def _column(frame: pd.DataFrame, name: str) -> np.ndarray:
    if name not in frame.columns:
        raise UsageError(f"column '{name}' not found; available: {', '.join(map(str, frame.columns))}")
    values = pd.to_numeric(frame[name], errors="coerce").to_numpy(dtype=np.float64)
    bad = np.flatnonzero(np.isnan(values) & frame[name].notna().to_numpy())
    if bad.size:
        row = int(bad[0])
        raise UsageError(f"row {row + 1}: column '{name}' value {frame[name].iloc[row]!r} is not numeric")
    return values


def _check_log(values: np.ndarray, name: str) -> None:
    bad = np.flatnonzero(values <= 0)
    if bad.size:
        row = int(bad[0])
        raise UsageError(f"row {row + 1}: column '{name}' value {values[row]!r} is not positive under log scale")


def render_svg(frame: pd.DataFrame, spec: PlotSpec) -> str:
    """SVG text for spec.y against spec.x. Rows with a missing value are skipped."""
    xs = _column(frame, spec.x)
    ys = _column(frame, spec.y)
    if spec.xscale == "log":
        _check_log(xs, spec.x)
    if spec.yscale == "log":
        _check_log(ys, spec.y)
    keep = ~(np.isnan(xs) | np.isnan(ys))
    if not keep.all():
        logger.debug("Skipping %d rows with missing values", int((~keep).sum()))
    xs, ys = xs[keep], ys[keep]

    x_axis = Axis.fit(xs, spec.xscale)
    y_axis = Axis.fit(ys, spec.yscale)
    left, right = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    top, bottom = MARGIN_TOP, HEIGHT - MARGIN_BOTTOM

    def px(v: float) -> float:
        return left + x_axis.fraction(v) * (right - left)

    def py(v: float) -> float:
        return bottom - y_axis.fraction(v) * (bottom - top)

    canvas = SvgCanvas()
    canvas.header()
    if spec.title:
        canvas.text(WIDTH / 2, MARGIN_TOP / 2 + 5, spec.title, 'text-anchor="middle" font-size="18"')

    canvas.line(left, bottom, right, bottom)
    canvas.line(left, bottom, left, top)
    for t in x_axis.ticks:
        x = px(t)
        canvas.line(x, bottom, x, bottom + 6)
        canvas.text(x, bottom + 22, tick_label(t), 'text-anchor="middle" font-size="12"')
    for t in y_axis.ticks:
        y = py(t)
        canvas.line(left - 6, y, left, y)
        canvas.text(left - 10, y + 4, tick_label(t), 'text-anchor="end" font-size="12"')

    x_label = spec.x + (" (log)" if spec.xscale == "log" else "")
    y_label = spec.y + (" (log)" if spec.yscale == "log" else "")
    canvas.text((left + right) / 2, HEIGHT - 20, x_label, 'text-anchor="middle" font-size="14"')
    mid_y = (top + bottom) / 2
    rotate = quoteattr(f"rotate(-90 20 {mid_y:.2f})")
    canvas.text(20, mid_y, y_label, f'text-anchor="middle" font-size="14" transform={rotate}')

    points = [(px(x), py(y)) for x, y in zip(xs, ys)]
    if spec.kind == "scatter":
        for cx, cy in points:
            canvas.circle(cx, cy)
    elif points:
        canvas.polyline(points)
    return canvas.get_svg()


def emit_plot_svg(csv_path: str, spec: PlotSpec, sink: IResultSink, name: Optional[str] = None) -> str:
    """Render a CSV file and write the SVG through the sink. Returns the written path."""
    frame = read_csv(csv_path)
    svg = render_svg(frame, spec)
    target = name or f"{Path(csv_path).stem}_{spec.y}_vs_{spec.x}.svg"
    return sink.write_text(target, svg)
