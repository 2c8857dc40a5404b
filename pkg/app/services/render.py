"""
Render service: SVG drawings of a coloring inside a finite window, with
optional quarter-plane shading, border marks, traced edge sequences and
highlighted paths.
"""

import logging
import math
from typing import Optional

import drawsvg as draw
import numpy as np

from app.config import get_settings
from app.models.schemas import Axis, Overlays, QuarterPlane, TraceRequest
from app.services.coloring import ColoringSource
from app.services.connectivity import Region
from app.services.edgetrace import TraceResult, make_edge, trace
from app.services.hexgrid import Tile, WindowLike, centers, qp_border, qp_boundary_tiles, window_tiles

settings = get_settings()
logger = logging.getLogger(__name__)

_SQRT3_2 = math.sqrt(3) / 2
# Flat-top corners in circumradius units, counter-clockwise from east.
_CORNERS = np.array([(math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)) for k in range(6)])


class Theme:
    """Colors for the board and its overlays."""

    def __init__(
        self,
        background: str = "#ffffff",
        black: str = "#1b1b1b",
        vacant: str = "#ffffff",
        grid: str = "#9a9a9a",
        quarter_plane: str = "#3b82f6",
        border_v: str = "#dc2626",
        border_h: str = "#16a34a",
        trace: str = "#f59e0b",
        path: str = "#a855f7",
    ):
        self.background = background
        self.black = black
        self.vacant = vacant
        self.grid = grid
        self.quarter_plane = quarter_plane
        self.border_v = border_v
        self.border_h = border_h
        self.trace = trace
        self.path = path


DEFAULT_THEME = Theme()


class BoardRenderer:
    """Maps tile centers to canvas pixels (y grows downward) and draws layers in order."""

    def __init__(
        self,
        window: WindowLike,
        hex_size: Optional[float] = None,
        margin: Optional[float] = None,
        theme: Optional[Theme] = None,
    ):
        self.window = window
        self.tiles = window_tiles(window)
        self.size = settings.SVG_HEX_SIZE if hex_size is None else hex_size
        self.margin = settings.SVG_MARGIN if margin is None else margin
        self.theme = theme or DEFAULT_THEME

        pts = centers(self.tiles)
        self._x0 = float(pts[:, 0].min()) - 1.0
        self._y1 = float(pts[:, 1].max()) + _SQRT3_2
        self.width = self.size * (float(pts[:, 0].max()) + 1.0 - self._x0) + 2 * self.margin
        self.height = self.size * (self._y1 - float(pts[:, 1].min()) + _SQRT3_2) + 2 * self.margin

    def to_canvas(self, pts: np.ndarray) -> np.ndarray:
        out = np.empty_like(pts, dtype=np.float64)
        out[:, 0] = self.margin + self.size * (pts[:, 0] - self._x0)
        out[:, 1] = self.margin + self.size * (self._y1 - pts[:, 1])
        return out

    def _hexagon(self, t: Tile, **attrs) -> draw.Lines:
        corners = centers([t])[0] + _CORNERS * 0.98
        flat = self.to_canvas(corners).round(3).ravel().tolist()
        return draw.Lines(*flat, close=True, **attrs)

    def render(self, src: ColoringSource, overlays: Optional[Overlays] = None) -> draw.Drawing:
        overlays = overlays or Overlays()
        d = draw.Drawing(round(self.width, 3), round(self.height, 3))
        d.append(draw.Rectangle(0, 0, round(self.width, 3), round(self.height, 3), fill=self.theme.background))

        blacks = set(src.blacks_in(self.window))
        for t in self.tiles:
            black = t in blacks
            d.append(
                self._hexagon(
                    t,
                    fill=self.theme.black if black else self.theme.vacant,
                    stroke=self.theme.grid,
                    stroke_width=0.75,
                    class_="tile black" if black else "tile",
                )
            )
        logger.debug("drew %d tiles, %d black", len(self.tiles), len(blacks))

        for qp in overlays.quarter_planes:
            self._render_quarter_plane(d, qp, overlays.borders)
        for k, req in enumerate(overlays.traces):
            self._render_trace(d, run_trace(src, req), label=f"T{k}")
        for path in overlays.paths:
            self._render_path(d, [Tile(*t) for t in path])
        return d

    def _render_quarter_plane(self, d: draw.Drawing, qp: QuarterPlane, borders: bool) -> None:
        region = Region(self.window, qp).predicate()
        group = draw.Group(fill=self.theme.quarter_plane, fill_opacity=0.18, stroke="none", class_="quarter-plane")
        for t in self.tiles:
            if region(t):
                group.append(self._hexagon(t))
        d.append(group)
        if not borders:
            return
        for t in qp_boundary_tiles(qp, self.window):
            parts = qp_border(t, qp)
            if not parts:
                continue
            color = self.theme.border_v if Axis.V in parts else self.theme.border_h
            d.append(
                self._hexagon(
                    t,
                    fill="none",
                    stroke=color,
                    stroke_width=2.0,
                    class_="border " + "".join(sorted(a.value for a in parts)),
                )
            )

    def _render_trace(self, d: draw.Drawing, tr: TraceResult, label: str) -> None:
        # Each edge is drawn at the midpoint of the side shared by its two tiles.
        mids = (centers([e.a for e in tr.edges]) + centers([e.b for e in tr.edges])) / 2.0
        pts = self.to_canvas(mids).round(3)
        if len(pts) > 1:
            d.append(
                draw.Lines(
                    *pts.ravel().tolist(),
                    close=False,
                    fill="none",
                    stroke=self.theme.trace,
                    stroke_width=1.5,
                    class_="trace",
                )
            )
            (x0, y0), (x1, y1) = pts[-2], pts[-1]
            self._draw_arrowhead(d, float(x1), float(y1), math.atan2(y1 - y0, x1 - x0), self.size * 0.4)
        d.append(
            draw.Text(
                label,
                self.size * 0.6,
                float(pts[0][0]),
                float(pts[0][1]) - self.size * 0.3,
                fill=self.theme.trace,
                text_anchor="middle",
                class_="trace-label",
            )
        )

    def _render_path(self, d: draw.Drawing, tiles: list[Tile]) -> None:
        if not tiles:
            return
        pts = self.to_canvas(centers(tiles)).round(3)
        d.append(
            draw.Lines(
                *pts.ravel().tolist(),
                close=False,
                fill="none",
                stroke=self.theme.path,
                stroke_width=2.5,
                stroke_opacity=0.8,
                class_="path",
            )
        )

    def _draw_arrowhead(self, d: draw.Drawing, x: float, y: float, angle: float, size: float) -> None:
        p1_x = x - size * math.cos(angle - math.pi / 6)
        p1_y = y - size * math.sin(angle - math.pi / 6)
        p2_x = x - size * math.cos(angle + math.pi / 6)
        p2_y = y - size * math.sin(angle + math.pi / 6)
        d.append(
            draw.Lines(
                round(x, 3), round(y, 3),
                round(p1_x, 3), round(p1_y, 3),
                round(p2_x, 3), round(p2_y, 3),
                close=True,
                fill=self.theme.trace,
                stroke="none",
                class_="arrowhead",
            )
        )


def run_trace(src: ColoringSource, req: TraceRequest) -> TraceResult:
    region = Region(quarter_plane=req.region) if req.region is not None else None
    return trace(src, make_edge(*req.edge), req.direction, req.max_steps, region)


def render(src: ColoringSource, window: WindowLike, overlays: Optional[Overlays] = None) -> str:
    """SVG document for `src` inside `window`; one hexagon per tile, filled for black tiles."""
    return BoardRenderer(window).render(src, overlays).as_svg()


def render_to_file(src: ColoringSource, window: WindowLike, path: str, overlays: Optional[Overlays] = None) -> None:
    BoardRenderer(window).render(src, overlays).save_svg(path)
