"""Minimal dependency-free SVG line chart for sweep tables."""
from __future__ import annotations

from pathlib import Path

from .simulator import SweepTable

__all__ = ["write_ratio_chart"]

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
_W, _H = 800, 500
_ML, _MR, _MT, _MB = 70, 20, 30, 50


def write_ratio_chart(table: SweepTable, path: str | Path, title: str = "") -> None:
    """Energy ratio vs deadline, one polyline per strategy; NA cells skipped."""
    series: dict[str, list[tuple[float, float]]] = {}
    for c in table.cells:
        if c.energy_ratio is not None:
            series.setdefault(c.strategy, []).append((c.deadline, c.energy_ratio))
    if not series:
        raise ValueError("nothing to plot: all cells are NA")
    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys + [1.0]), max(ys + [1.0])
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    pad = 0.05 * (y_hi - y_lo) or 0.05
    y_lo, y_hi = y_lo - pad, y_hi + pad
    pw = _W - _ML - _MR
    ph = _H - _MT - _MB

    def px(x: float) -> float:
        return _ML + pw * (x - x_lo) / (x_hi - x_lo)

    def py(y: float) -> float:
        return _MT + ph * (1.0 - (y - y_lo) / (y_hi - y_lo))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="monospace" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<line x1="{_ML}" y1="{_MT + ph}" x2="{_ML + pw}" y2="{_MT + ph}" stroke="black"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_MT + ph}" stroke="black"/>',
        f'<line x1="{_ML}" y1="{py(1.0):.2f}" x2="{_ML + pw}" y2="{py(1.0):.2f}" '
        'stroke="#bbbbbb" stroke-dasharray="4 3"/>',
    ]
    for k in range(5):
        x = x_lo + (x_hi - x_lo) * k / 4
        y = y_lo + (y_hi - y_lo) * k / 4
        parts.append(
            f'<text x="{px(x):.2f}" y="{_MT + ph + 18}" text-anchor="middle">{x:.4g}</text>'
        )
        parts.append(
            f'<text x="{_ML - 8}" y="{py(y) + 4:.2f}" text-anchor="end">{y:.3g}</text>'
        )
    parts.append(
        f'<text x="{_ML + pw / 2}" y="{_H - 12}" text-anchor="middle">deadline (s)</text>'
    )
    if title:
        parts.append(f'<text x="{_ML}" y="18">{title}</text>')
    for si, (name, pts) in enumerate(sorted(series.items())):
        color = _COLORS[si % len(_COLORS)]
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in sorted(pts))
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>'
        )
        parts.append(
            f'<text x="{_ML + pw - 4}" y="{_MT + 16 + 16 * si}" text-anchor="end" '
            f'fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
