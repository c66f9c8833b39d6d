"""SVG drawings of layouts and their patterning decompositions."""
from __future__ import annotations

from pathlib import Path

from dsacolor.layout import Layout
from dsacolor.solver import ColoringSolution

PALETTE = (
    "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4",
    "#42d4f4", "#f032e6", "#9a6324", "#469990", "#808000",
)
UNCOLORED = "#9e9e9e"


def _n(x: float) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def render_svg(layout: Layout, solution: ColoringSolution | None = None,
               max_colors: int | None = None) -> str:
    """Vias as true-scale circles; each color a patterning step; groups wrapped in a hull."""
    d = layout.diameter
    pad = d
    if solution is not None:
        if len(solution.color_of) != len(layout):
            raise ValueError(f"solution has {len(solution.color_of)} vias, layout {len(layout)}")
        used = max(solution.color_of, default=0)
        limit = len(PALETTE) if max_colors is None else min(len(PALETTE), max_colors)
        if used > limit:
            raise ValueError(f"palette exhausted: {used} colors requested, {limit} available")
    if len(layout):
        xs = [v.x for v in layout.vias]
        ys = [v.y for v in layout.vias]
        x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    else:
        x0 = x1 = y0 = y1 = 0.0
    width = x1 - x0 + 2 * (d / 2 + pad)
    height = y1 - y0 + 2 * (d / 2 + pad)

    def pos(v):
        return v.x - x0 + d / 2 + pad, (y1 - v.y) + d / 2 + pad

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_n(width)}" height="{_n(height)}" '
        f'viewBox="0 0 {_n(width)} {_n(height)}">',
        f'<rect class="background" x="0" y="0" width="{_n(width)}" height="{_n(height)}" '
        f'fill="#ffffff"/>',
    ]
    if solution is not None:
        for grp in solution.groups:
            if len(grp) < 2:
                continue
            color = PALETTE[solution.color_of[grp[0]] - 1]
            pts = " ".join(f"{_n(x)},{_n(y)}" for x, y in (pos(layout.vias[v]) for v in grp))
            out.append(
                f'<polyline class="hull" points="{pts}" fill="none" stroke="{color}" '
                f'stroke-opacity="0.35" stroke-width="{_n(1.8 * d)}" '
                f'stroke-linecap="round" stroke-linejoin="round"/>')
    for v in layout.vias:
        x, y = pos(v)
        fill = UNCOLORED if solution is None else PALETTE[solution.color_of[v.id] - 1]
        out.append(f'<circle class="via" id="via{v.id}" cx="{_n(x)}" cy="{_n(y)}" '
                   f'r="{_n(d / 2)}" fill="{fill}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def save_svg(layout: Layout, path, solution: ColoringSolution | None = None,
             max_colors: int | None = None) -> None:
    Path(path).write_text(render_svg(layout, solution, max_colors))
