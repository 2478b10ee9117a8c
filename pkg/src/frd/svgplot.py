"""Tiny deterministic SVG line charts (no plotting dependency, no timestamps).

Charts are textual and diffable; rerunning with identical data produces
byte-identical files. Only the two layouts the CLI needs are provided: a
log-log severity chart and a linear per-phase kinetics chart with marker
radius proportional to the standard deviation.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

_WIDTH, _HEIGHT = 480, 360
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 64, 16, 28, 44
_COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    return f"{v:g}"


def _log_ticks(lo: float, hi: float) -> List[float]:
    first = math.floor(math.log10(lo))
    last = math.ceil(math.log10(hi))
    return [10.0 ** e for e in range(first, last + 1)]


def _lin_ticks(lo: float, hi: float, n: int = 5) -> List[float]:
    if hi == lo:
        return [lo]
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


class _Axes:
    def __init__(self, x_range, y_range, log_x=False, log_y=False):
        self.log_x, self.log_y = log_x, log_y
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range

    def _t(self, v, lo, hi, log):
        if log:
            v, lo, hi = math.log10(v), math.log10(lo), math.log10(hi)
        if hi == lo:
            return 0.5
        return (v - lo) / (hi - lo)

    def px(self, x: float) -> float:
        t = self._t(x, self.x0, self.x1, self.log_x)
        return _MARGIN_L + t * (_WIDTH - _MARGIN_L - _MARGIN_R)

    def py(self, y: float) -> float:
        t = self._t(y, self.y0, self.y1, self.log_y)
        return _HEIGHT - _MARGIN_B - t * (_HEIGHT - _MARGIN_T - _MARGIN_B)


def _render(
    series: Sequence[Tuple[str, Sequence[float], Sequence[float], Optional[Sequence[float]]]],
    title: str,
    x_label: str,
    y_label: str,
    log_x: bool,
    log_y: bool,
    fingerprint: str,
) -> str:
    xs_all = [x for _, xs, _, _ in series for x in xs]
    ys_all = [y for _, _, ys, _ in series for y in ys]
    eps = 1e-12
    if log_x:
        xs_all = [max(x, eps) for x in xs_all]
    if log_y:
        ys_all = [max(y, eps) for y in ys_all]
    x_range = (min(xs_all), max(xs_all))
    y_range = (min(ys_all), max(ys_all))
    if x_range[0] == x_range[1]:
        x_range = (x_range[0] - 0.5, x_range[1] + 0.5) if not log_x else (x_range[0] / 2, x_range[1] * 2)
    if y_range[0] == y_range[1]:
        y_range = (y_range[0] - 0.5, y_range[1] + 0.5) if not log_y else (y_range[0] / 2, y_range[1] * 2)
    ax = _Axes(x_range, y_range, log_x, log_y)
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f"<!-- config_fingerprint={fingerprint} -->",
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH / 2:.0f}" y="16" text-anchor="middle" font-size="13">{title}</text>',
    ]
    x_ticks = _log_ticks(*x_range) if log_x else _lin_ticks(*x_range)
    y_ticks = _log_ticks(*y_range) if log_y else _lin_ticks(*y_range)
    x_ticks = [t for t in x_ticks if x_range[0] <= t <= x_range[1]] or list(x_range)
    y_ticks = [t for t in y_ticks if y_range[0] <= t <= y_range[1]] or list(y_range)
    for t in x_ticks:
        x = ax.px(t)
        parts.append(
            f'<line x1="{_fmt(x)}" y1="{_MARGIN_T}" x2="{_fmt(x)}" y2="{_HEIGHT - _MARGIN_B}" '
            'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(x)}" y="{_HEIGHT - _MARGIN_B + 14}" text-anchor="middle">{_tick_label(t)}</text>'
        )
    for t in y_ticks:
        y = ax.py(t)
        parts.append(
            f'<line x1="{_MARGIN_L}" y1="{_fmt(y)}" x2="{_WIDTH - _MARGIN_R}" y2="{_fmt(y)}" '
            'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_MARGIN_L - 6}" y="{_fmt(y + 4)}" text-anchor="end">{_tick_label(t)}</text>'
        )
    parts.append(
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{_WIDTH - _MARGIN_L - _MARGIN_R}" '
        f'height="{_HEIGHT - _MARGIN_T - _MARGIN_B}" fill="none" stroke="#333333"/>'
    )
    parts.append(
        f'<text x="{(_MARGIN_L + _WIDTH - _MARGIN_R) / 2:.0f}" y="{_HEIGHT - 8}" '
        f'text-anchor="middle">{x_label}</text>'
    )
    parts.append(
        f'<text x="14" y="{(_MARGIN_T + _HEIGHT - _MARGIN_B) / 2:.0f}" text-anchor="middle" '
        f'transform="rotate(-90 14 {(_MARGIN_T + _HEIGHT - _MARGIN_B) / 2:.0f})">{y_label}</text>'
    )
    for idx, (label, xs, ys, radii) in enumerate(series):
        color = _COLORS[idx % len(_COLORS)]
        pts = [
            (ax.px(max(x, eps) if log_x else x), ax.py(max(y, eps) if log_y else y))
            for x, y in zip(xs, ys)
        ]
        coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for (x, y), r in zip(pts, radii if radii is not None else [3.0] * len(pts)):
            parts.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(max(r, 1.5))}" fill="{color}"/>')
        ly = _MARGIN_T + 14 + 14 * idx
        lx = _WIDTH - _MARGIN_R - 110
        parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 18}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 22}" y="{ly}">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def sweep_chart(
    series: Sequence[Tuple[str, Sequence[float], Sequence[float]]],
    path,
    fingerprint: str = "",
    title: str = "FRD per perturbation scale",
) -> None:
    """Log-log chart of FRD vs. perturbation scale, one line per kind."""
    data = [(label, xs, ys, None) for label, xs, ys in series]
    svg = _render(data, title, "scale [%]", "FRD", log_x=True, log_y=True, fingerprint=fingerprint)
    Path(path).write_text(svg, encoding="utf-8")


def kinetics_chart(
    phase_labels: Sequence[str],
    means: Sequence[float],
    stds: Sequence[float],
    path,
    fingerprint: str = "",
    title: str = "Tumor-region contrast kinetics",
) -> None:
    """Mean value per phase; marker radius scales with the standard deviation."""
    xs = list(range(len(phase_labels)))
    max_std = max(stds) if stds and max(stds) > 0 else 1.0
    radii = [2.0 + 8.0 * s / max_std for s in stds]
    data = [("mean", xs, list(means), radii)]
    svg = _render(data, title, " / ".join(phase_labels), "value", log_x=False, log_y=False, fingerprint=fingerprint)
    Path(path).write_text(svg, encoding="utf-8")
