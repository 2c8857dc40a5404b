"""
Edge tracing service: boundary edges (black, vacant) of a coloring, the
successor automaton that walks them with black on the left, bounded traces,
line-visit counting and cycle orientation.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Optional

import numpy as np

from app.models.schemas import Line, TraceDirection, TraceOutcome, TraceReport
from app.services.coloring import ColoringSource
from app.services.connectivity import Region
from app.services.hexgrid import Tile, WindowLike, centers, direction_between, line_touch, neighbors, step

logger = logging.getLogger(__name__)


class InvalidEdgeError(ValueError):
    """The pair is not (black tile, adjacent vacant tile)."""


class Edge(NamedTuple):
    a: Tile
    b: Tile


def make_edge(a, b) -> Edge:
    return Edge(Tile(*a), Tile(*b))


def is_edge(src: ColoringSource, e: Edge) -> bool:
    return direction_between(e[0], e[1]) is not None and src.is_black(e[0]) and not src.is_black(e[1])


def edges_of(src: ColoringSource, tiles: Iterable[Tile]) -> list[Edge]:
    """Every edge whose black side is one of `tiles`, in tile then direction order."""
    out = []
    for t in tiles:
        t = Tile(*t)
        if not src.is_black(t):
            continue
        out.extend(Edge(t, nb) for nb in neighbors(t) if not src.is_black(nb))
    return out


# ── Successor automaton ──
#
# At the vertex ahead of (a, b) the third tile is c. The pair of colors
# (a, c) selects the next edge; b is vacant on every valid edge.

_SUCCESSOR: dict[tuple[bool, bool], Optional[Callable[[Tile, Tile, Tile], Edge]]] = {
    (True, False): lambda a, b, c: Edge(a, c),
    (True, True): lambda a, b, c: Edge(c, b),
    (False, False): None,
    (False, True): None,
}


def _turn(src: ColoringSource, e: Edge, offset: int) -> Edge:
    a, b = e
    d = direction_between(a, b)
    if d is None or src.is_black(b):
        raise InvalidEdgeError(f"not an edge: {tuple(a)} -> {tuple(b)}")
    c = step(a, d + offset)
    rule = _SUCCESSOR[(src.is_black(a), src.is_black(c))]
    if rule is None:
        raise InvalidEdgeError(f"black side {tuple(a)} is vacant")
    return rule(Tile(*a), Tile(*b), c)


def next_edge(src: ColoringSource, e: Edge) -> Edge:
    """Successor keeping black on the left (counter-clockwise around black)."""
    return _turn(src, e, -1)


def prev_edge(src: ColoringSource, e: Edge) -> Edge:
    return _turn(src, e, +1)


# ── Tracing ──


@dataclass(frozen=True)
class TraceResult:
    """
    Edges visited from `start` (index 0) in one direction. For PERIODIC,
    `period` is the orbit length and the start edge is not repeated. For
    LEFT_REGION, `left_at` indexes the first edge with both tiles outside.
    """

    start: Edge
    direction: TraceDirection
    edges: tuple[Edge, ...]
    outcome: TraceOutcome
    period: Optional[int] = None
    left_at: Optional[int] = None


def trace(
    src: ColoringSource,
    e: Edge,
    direction: TraceDirection = TraceDirection.FORWARD,
    max_steps: int = 1000,
    region: Optional[Region] = None,
) -> TraceResult:
    e = make_edge(*e)
    if not is_edge(src, e):
        raise InvalidEdgeError(f"not an edge: {tuple(e.a)} -> {tuple(e.b)}")
    advance = next_edge if direction == TraceDirection.FORWARD else prev_edge
    inside = region.predicate() if region is not None else None

    edges = [e]
    current = e
    for k in range(1, max_steps + 1):
        current = advance(src, current)
        if current == e:
            return TraceResult(e, direction, tuple(edges), TraceOutcome.PERIODIC, period=k)
        edges.append(current)
        if inside is not None and not inside(current.a) and not inside(current.b):
            return TraceResult(e, direction, tuple(edges), TraceOutcome.LEFT_REGION, left_at=k)
    return TraceResult(e, direction, tuple(edges), TraceOutcome.BUDGET)


def line_visits(tr: TraceResult, line: Line) -> int:
    """Maximal runs of consecutive edges whose black tile touches `line`; a closed cycle wraps."""
    touching = [line_touch(edge.a, line) for edge in tr.edges]
    runs = sum(1 for i, hit in enumerate(touching) if hit and (i == 0 or not touching[i - 1]))
    if tr.outcome == TraceOutcome.PERIODIC and runs > 1 and touching[0] and touching[-1]:
        runs -= 1
    return runs


def boundary_cycles(src: ColoringSource, window: WindowLike) -> list[TraceResult]:
    """Partition every edge of the window's black tiles into forward traces."""
    all_edges = edges_of(src, src.blacks_in(window))
    budget = len(all_edges)
    visited: set[Edge] = set()
    cycles = []
    for e in all_edges:
        if e in visited:
            continue
        tr = trace(src, e, TraceDirection.FORWARD, max_steps=budget)
        visited.update(tr.edges)
        cycles.append(tr)
    logger.debug("found %d boundary cycles over %d edges", len(cycles), budget)
    return cycles


def cycle_orientation(tr: TraceResult) -> int:
    """+1 for a counter-clockwise cycle (outer boundary), −1 for a clockwise one (hole)."""
    if tr.outcome != TraceOutcome.PERIODIC:
        raise ValueError("orientation is only defined for periodic traces")
    mids = (centers([e.a for e in tr.edges]) + centers([e.b for e in tr.edges])) / 2.0
    x, y = mids[:, 0], mids[:, 1]
    area = float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
    return 1 if area > 0 else -1


def trace_report(tr: TraceResult, lines: Iterable[Line] = ()) -> TraceReport:
    return TraceReport(
        start=(tuple(tr.start.a), tuple(tr.start.b)),
        direction=tr.direction,
        outcome=tr.outcome,
        period=tr.period,
        left_at=tr.left_at,
        edges=[(tuple(e.a), tuple(e.b)) for e in tr.edges],
        line_visits={f"{line.axis.value}{line.index}": line_visits(tr, line) for line in lines},
    )
