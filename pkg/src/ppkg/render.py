"""Deterministic SVG scatterplots of clustered projections.

Byte-for-byte reproducible: fixed canvas, fixed 12-color palette cycled by
cluster label, coordinates formatted to 2 decimals. Noise points render
gray at a smaller radius. No imaging dependency; the output is plain SVG
markup diff-able in tests.
"""

from __future__ import annotations

from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .clustering import NOISE, ClusterAssignment

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78", "#98df8a",
)
NOISE_COLOR = "#999999"
POINT_RADIUS = 4.0
NOISE_RADIUS = 2.5

WIDTH = 800
HEIGHT = 520
PLOT = (50.0, 30.0, 550.0, 480.0)  # x0, y0, x1, y1
LEGEND_X = 570.0


def label_color(label: int) -> str:
    if label == NOISE:
        return NOISE_COLOR
    return PALETTE[label % len(PALETTE)]


def _axis(values: np.ndarray) -> tuple[float, float]:
    if len(values) == 0:
        return 0.0, 1.0
    lo = float(values.min())
    hi = float(values.max())
    span = hi - lo
    margin = 0.05 * span if span > 0 else 0.5
    return lo - margin, hi + margin


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def render_scatter(y, a: ClusterAssignment | None = None,
                   annotations: Mapping[int, Sequence[str]] | None = None,
                   title: str = "") -> bytes:
    """Render one scatterplot; one <circle> per point, legend on the right.

    ``y`` is a Projection or an (n, 2) array. Labels default to a single
    cluster 0 when no assignment is given. The legend lists each cluster
    with its size and top annotation terms, plus a gray noise row when
    noise is present. Axes span the data bounds with a 5% margin.
    """
    points = np.asarray(getattr(y, "data", y), dtype=float).reshape(-1, 2)
    n = len(points)
    if a is None:
        labels = [0] * n
    else:
        labels = list(a.labels)
    annotations = annotations or {}
    x0, y0, x1, y1 = PLOT
    xmin, xmax = _axis(points[:, 0])
    ymin, ymax = _axis(points[:, 1])

    def sx(v: float) -> float:
        if xmax == xmin:
            return (x0 + x1) / 2.0
        return x0 + (v - xmin) / (xmax - xmin) * (x1 - x0)

    def sy(v: float) -> float:
        if ymax == ymin:
            return (y0 + y1) / 2.0
        return y1 - (v - ymin) / (ymax - ymin) * (y1 - y0)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(x1 - x0)}" '
        f'height="{_fmt(y1 - y0)}" fill="none" stroke="#333333" stroke-width="1"/>',
    ]
    if title:
        parts.append(f'<text x="{_fmt(x0)}" y="20" font-size="13" '
                     f'font-family="sans-serif">{escape(title)}</text>')
    for axis_v, anchor, tx, ty in (
            (xmin, "start", x0, y1 + 16.0), (xmax, "end", x1, y1 + 16.0)):
        parts.append(f'<text x="{_fmt(tx)}" y="{_fmt(ty)}" font-size="10" '
                     f'font-family="sans-serif" text-anchor="{anchor}">'
                     f'{_fmt(axis_v)}</text>')
    for axis_v, ty in ((ymin, y1), (ymax, y0 + 8.0)):
        parts.append(f'<text x="{_fmt(x0 - 6.0)}" y="{_fmt(ty)}" font-size="10" '
                     f'font-family="sans-serif" text-anchor="end">{_fmt(axis_v)}</text>')

    for (px, py), label in zip(points, labels):
        radius = NOISE_RADIUS if label == NOISE else POINT_RADIUS
        parts.append(f'<circle cx="{_fmt(sx(px))}" cy="{_fmt(sy(py))}" '
                     f'r="{_fmt(radius)}" fill="{label_color(label)}" '
                     f'fill-opacity="0.8"/>')

    counts: dict[int, int] = {}
    for label in labels:
        counts[label] = counts.get(label, 0) + 1
    legend_y = y0 + 10.0
    for label in sorted(c for c in counts if c != NOISE):
        terms = ", ".join(annotations.get(label, ()))
        text = f"cluster {label} ({counts[label]})"
        if terms:
            text += f": {terms}"
        parts.append(f'<rect x="{_fmt(LEGEND_X)}" y="{_fmt(legend_y - 9.0)}" '
                     f'width="10" height="10" fill="{label_color(label)}"/>')
        parts.append(f'<text x="{_fmt(LEGEND_X + 16.0)}" y="{_fmt(legend_y)}" '
                     f'font-size="11" font-family="sans-serif">{escape(text)}</text>')
        legend_y += 18.0
    if NOISE in counts:
        parts.append(f'<rect x="{_fmt(LEGEND_X)}" y="{_fmt(legend_y - 9.0)}" '
                     f'width="10" height="10" fill="{NOISE_COLOR}"/>')
        parts.append(f'<text x="{_fmt(LEGEND_X + 16.0)}" y="{_fmt(legend_y)}" '
                     f'font-size="11" font-family="sans-serif">'
                     f'noise ({counts[NOISE]})</text>')
    parts.append("</svg>")
    return ("\n".join(parts) + "\n").encode("utf-8")
