"""
Connectivity service: budgeted breadth-first exploration of black components
inside a region (window, quarter-plane, both, or the full plane).
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional

from app.models.schemas import QuarterPlane, Truth
from app.services.coloring import ColoringSource
from app.services.hexgrid import (
    PreconditionError,
    Tile,
    WindowLike,
    neighbors,
    qp_predicate,
    window_predicate,
    window_size,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Region:
    """Intersection of an optional window and an optional quarter-plane."""

    window: Optional[WindowLike] = None
    quarter_plane: Optional[QuarterPlane] = None

    def predicate(self) -> Callable[[Tile], bool]:
        in_w = window_predicate(self.window) if self.window is not None else None
        in_q = qp_predicate(self.quarter_plane) if self.quarter_plane is not None else None
        if in_w and in_q:
            return lambda t: in_w(t) and in_q(t)
        return in_w or in_q or (lambda t: True)

    def unbounded_predicate(self) -> Callable[[Tile], bool]:
        """The region with its window dropped."""
        return Region(quarter_plane=self.quarter_plane).predicate()

    def contains(self, t: Tile) -> bool:
        return self.predicate()(t)


FULL_PLANE = Region()


@dataclass(frozen=True)
class ComponentReport:
    """
    Result of one exploration. `tiles` is in discovery order. `frontier_open`
    means the budget stopped the search before closure. `escapes_window` means a
    black neighbor lies in the unbounded region but outside the window, so a
    closed report is only the window's share of a larger component.
    """

    seed: Tile
    tiles: tuple[Tile, ...]
    frontier_open: bool
    escapes_window: bool = False
    hit: Optional[Tile] = None
    tile_set: frozenset[Tile] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "tile_set", frozenset(self.tiles))

    @property
    def size(self) -> int:
        return len(self.tiles)

    @property
    def closed(self) -> bool:
        return not self.frontier_open

    @property
    def certified_finite(self) -> bool:
        """Closed without touching the window edge: exactly the component in the unbounded region."""
        return not self.frontier_open and not self.escapes_window


def component(
    src: ColoringSource,
    reg: Region,
    seed: Tile,
    budget: int,
    target: Optional[Callable[[Tile], bool]] = None,
) -> ComponentReport:
    """
    BFS closure of `seed` among black tiles of `reg`, keeping at most `budget`
    tiles. With `target`, the search stops at the first tile satisfying it
    (reported as `hit`, with the frontier left open).
    """
    seed = Tile(*seed)
    inside = reg.predicate()
    if not src.is_black(seed) or not inside(seed):
        raise PreconditionError(f"seed {tuple(seed)} must be black and inside the region")
    if budget < 1:
        raise PreconditionError("budget must be positive")
    if target is not None and target(seed):
        return ComponentReport(seed=seed, tiles=(seed,), frontier_open=True, hit=seed)

    outer = reg.unbounded_predicate() if reg.window is not None else None
    is_black = src.is_black
    seen = {seed}
    found = [seed]
    queue = deque([seed])
    frontier_open = False
    escapes = False
    hit: Optional[Tile] = None

    while queue and not frontier_open:
        t = queue.popleft()
        for nb in neighbors(t):
            if nb in seen:
                continue
            seen.add(nb)
            if not is_black(nb):
                continue
            if not inside(nb):
                if outer is not None and outer(nb):
                    escapes = True
                continue
            if len(found) >= budget:
                frontier_open = True
                break
            found.append(nb)
            queue.append(nb)
            if target is not None and target(nb):
                hit = nb
                frontier_open = True
                break

    if frontier_open and hit is None:
        logger.debug("component of %s hit budget %d", tuple(seed), budget)
    return ComponentReport(
        seed=seed, tiles=tuple(found), frontier_open=frontier_open, escapes_window=escapes, hit=hit
    )


def component_at_least(src: ColoringSource, reg: Region, seed: Tile, m: int, budget: int) -> Truth:
    """Decide |C(reg ∩ B, seed)| ≥ m; a budget of at least m always decides."""
    if budget < m:
        raise PreconditionError(f"budget {budget} is below the size target {m}")
    report = component(src, reg, seed, m)
    return Truth.TRUE if report.size >= m else Truth.FALSE


def iter_components(
    src: ColoringSource,
    reg: Region,
    seeds: Iterable[Tile],
    budget: int,
    target: Optional[Callable[[Tile], bool]] = None,
) -> Iterator[ComponentReport]:
    """
    One report per component hit by a black seed of reg, in seed order.
    A truncated report covers only the tiles it found, so later seeds of the
    same component may produce another report.
    """
    inside = reg.predicate()
    covered: set[Tile] = set()
    for t in seeds:
        t = Tile(*t)
        if t in covered or not inside(t) or not src.is_black(t):
            continue
        report = component(src, reg, t, budget, target)
        covered.update(report.tiles)
        yield report


def components_meeting(
    src: ColoringSource, window: WindowLike, targets: Iterable[Tile], budget: Optional[int] = None
) -> list[ComponentReport]:
    """Components of the window's black set that contain a black target tile."""
    inside = window_predicate(window)
    targets = sorted(Tile(*t) for t in targets)
    outside = [t for t in targets if not inside(t)]
    if outside:
        raise PreconditionError(f"targets outside the window: {outside[:3]}")
    limit = budget if budget is not None else window_size(window)
    return list(iter_components(src, Region(window=window), targets, limit))
