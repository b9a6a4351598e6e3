"""Static SVG plots of timed spaces: one row per time index with the
boxes drawn to scale, a fill color per component. 3D inputs become two
coordinate-against-time projections (x-t and y-t)."""

from __future__ import annotations

from typing import Sequence

from .checkers import point_formulas, spaces_dim
from .regions import Region
from .timeorder import TimeOrder
from .transforms import TimedSpace, spatial_region

_PALETTE = (
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759",
    "#b07aa1", "#76b7b2", "#edc948", "#9c755f",
)
_PLOT_W = 640
_LEFT = 90
_PAD = 12
_ROW_2D = 56
_ROW_1D = 22


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _per_point_regions(
    spaces: Sequence[TimedSpace], order: TimeOrder, dim: int
) -> tuple[list[str], list[dict[str, Region]]]:
    tables = [point_formulas(ts, order) for ts in spaces]
    points = order.sorted_points(set().union(*map(set, tables)) if tables else set())
    rows = []
    for p in points:
        row = {}
        for ts, table in zip(spaces, tables):
            if p in table:
                row[ts.component] = spatial_region(table[p], ts.mode, dim)
        rows.append(row)
    return points, rows


def _bounds(rows: Sequence[dict[str, Region]], axis_lo: int, axis_hi: int):
    lo, hi = None, None
    for row in rows:
        for region in row.values():
            for box in region.boxes:
                b_lo, b_hi = box.lo[axis_lo], box.hi[axis_hi]
                lo = b_lo if lo is None else min(lo, b_lo)
                hi = b_hi if hi is None else max(hi, b_hi)
    if lo is None:
        return 0, 1
    return lo, max(hi, lo + 1)


def render_svg(spaces: Sequence[TimedSpace], order: TimeOrder) -> str:
    """Render grounded, geometrized timed spaces to an SVG document."""
    dim = spaces_dim(spaces)
    points, rows = _per_point_regions(spaces, order, dim)
    colors = {ts.component: _PALETTE[i % len(_PALETTE)] for i, ts in enumerate(spaces)}

    parts: list[str] = []
    legend_y = _PAD + 14
    x = _LEFT
    for ts in spaces:
        c = colors[ts.component]
        parts.append(
            f'<rect x="{x}" y="{legend_y - 10}" width="12" height="12" fill="{c}" fill-opacity="0.6"/>'
        )
        parts.append(f'<text x="{x + 16}" y="{legend_y}" font-size="12">{_esc(ts.component)}</text>')
        x += 22 + 8 * len(ts.component) + 16

    top = legend_y + _PAD
    if dim == 2:
        height = top + len(points) * _ROW_2D + _PAD
        parts += _panel_2d(points, rows, colors, top)
    else:
        panel_h = len(points) * _ROW_1D + 24
        height = top + 2 * panel_h + _PAD
        parts += _panel_1d(points, rows, colors, top, axis=0, title="x against time")
        parts += _panel_1d(points, rows, colors, top + panel_h, axis=1, title="y against time")

    width = _LEFT + _PLOT_W + _PAD
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{max(height, 60)}" '
        f'viewBox="0 0 {width} {max(height, 60)}" font-family="sans-serif">\n'
    )
    frame = f'<rect x="0" y="0" width="{width}" height="{max(height, 60)}" fill="white"/>'
    return head + frame + "\n" + "\n".join(parts) + "\n</svg>\n"


def _panel_2d(points, rows, colors, top) -> list[str]:
    min_x, max_x = _bounds(rows, 0, 0)
    min_y, max_y = _bounds(rows, 1, 1)
    sx = _PLOT_W / (max_x - min_x + 1)
    sy = (_ROW_2D - 6) / (max_y - min_y + 1)
    parts = []
    for i, (p, row) in enumerate(zip(points, rows)):
        oy = top + i * _ROW_2D
        parts.append(
            f'<rect x="{_LEFT}" y="{oy}" width="{_PLOT_W}" height="{_ROW_2D - 4}" '
            'fill="#f7f7f7" stroke="#cccccc"/>'
        )
        parts.append(
            f'<text x="{_LEFT - 8}" y="{oy + _ROW_2D / 2}" font-size="12" text-anchor="end">{_esc(p)}</text>'
        )
        for component, region in sorted(row.items()):
            for box in region.boxes:
                rx = _LEFT + (box.lo[0] - min_x) * sx
                rw = (box.hi[0] - box.lo[0] + 1) * sx
                # SVG y grows downward; flip so larger y plots higher.
                ry = oy + (_ROW_2D - 6) - (box.hi[1] - min_y + 1) * sy + 2
                rh = (box.hi[1] - box.lo[1] + 1) * sy
                parts.append(
                    f'<rect x="{rx:.2f}" y="{ry:.2f}" width="{rw:.2f}" height="{rh:.2f}" '
                    f'fill="{colors[component]}" fill-opacity="0.55" stroke="{colors[component]}"/>'
                )
    return parts


def _panel_1d(points, rows, colors, top, axis: int, title: str) -> list[str]:
    lo, hi = _bounds(rows, axis, axis)
    s = _PLOT_W / (hi - lo + 1)
    parts = [f'<text x="{_LEFT}" y="{top + 12}" font-size="12" font-weight="bold">{_esc(title)}</text>']
    base = top + 20
    for i, (p, row) in enumerate(zip(points, rows)):
        oy = base + i * _ROW_1D
        parts.append(
            f'<rect x="{_LEFT}" y="{oy}" width="{_PLOT_W}" height="{_ROW_1D - 4}" '
            'fill="#f7f7f7" stroke="#dddddd"/>'
        )
        parts.append(
            f'<text x="{_LEFT - 8}" y="{oy + _ROW_1D - 9}" font-size="11" text-anchor="end">{_esc(p)}</text>'
        )
        for component, region in sorted(row.items()):
            for box in region.boxes:
                rx = _LEFT + (box.lo[axis] - lo) * s
                rw = (box.hi[axis] - box.lo[axis] + 1) * s
                parts.append(
                    f'<rect x="{rx:.2f}" y="{oy + 3}" width="{rw:.2f}" height="{_ROW_1D - 10}" '
                    f'fill="{colors[component]}" fill-opacity="0.55"/>'
                )
    return parts
