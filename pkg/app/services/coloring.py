"""
Coloring service: immutable black/vacant oracles over the infinite board.
Finite boards, the analytic fixtures (empty, full, diagonal, comb), overlays,
seeded random boards and the JSON board format.
"""

import bisect
import logging
import threading
from typing import Any, Optional

import numpy as np

from app.config import get_settings
from app.models.schemas import CombParams
from app.services.hexgrid import (
    Tile,
    WindowLike,
    column_span,
    iter_window,
    q_range,
    window_predicate,
)

settings = get_settings()
logger = logging.getLogger(__name__)


class CombParamsError(ValueError):
    """Comb amplitudes must be positive and strictly increasing."""


# ── Sources ──


class ColoringSource:
    """
    Membership oracle mapping tiles to black (True) or vacant (False).
    Subclasses override `blacks_in` when they can enumerate a window faster
    than probing every tile.
    """

    family = "custom"

    def is_black(self, t: Tile) -> bool:
        raise NotImplementedError

    def blacks_in(self, w: WindowLike) -> list[Tile]:
        """Black tiles of w in (q, r) order."""
        return [t for t in iter_window(w) if self.is_black(t)]

    def finite_support(self) -> Optional[frozenset[Tile]]:
        """The exact black set when it is known to be finite, else None."""
        return None


class FiniteSource(ColoringSource):
    family = "finite"

    def __init__(self, blacks: frozenset[Tile] | set[Tile] | list[Tile]):
        self._blacks = frozenset(Tile(int(q), int(r)) for q, r in blacks)

    def is_black(self, t: Tile) -> bool:
        return (t[0], t[1]) in self._blacks

    def blacks_in(self, w: WindowLike) -> list[Tile]:
        inside = window_predicate(w)
        return sorted(t for t in self._blacks if inside(t))

    def finite_support(self) -> frozenset[Tile]:
        return self._blacks


class FullSource(ColoringSource):
    """Every tile black."""

    family = "full"

    def is_black(self, t: Tile) -> bool:
        return True

    def blacks_in(self, w: WindowLike) -> list[Tile]:
        return list(iter_window(w))


class DiagonalSource(ColoringSource):
    """Black exactly on the diagonal {d_n} = {(n, 0)}."""

    family = "diagonal"

    def is_black(self, t: Tile) -> bool:
        return t[1] == 0

    def blacks_in(self, w: WindowLike) -> list[Tile]:
        q_lo, q_hi = q_range(w)
        out = []
        for q in range(q_lo, q_hi + 1):
            span = column_span(w, q)
            if span is not None and span[0] <= 0 <= span[1]:
                out.append(Tile(q, 0))
        return out


class OverlaySource(ColoringSource):
    """Black where either layer is black."""

    family = "overlay"

    def __init__(self, a: ColoringSource, b: ColoringSource):
        self.a = a
        self.b = b

    def is_black(self, t: Tile) -> bool:
        return self.a.is_black(t) or self.b.is_black(t)

    def blacks_in(self, w: WindowLike) -> list[Tile]:
        return sorted(set(self.a.blacks_in(w)) | set(self.b.blacks_in(w)))

    def finite_support(self) -> Optional[frozenset[Tile]]:
        sa = self.a.finite_support()
        sb = self.b.finite_support()
        if sa is None or sb is None:
            return None
        return sa | sb


class CombSource(ColoringSource):
    """
    Trunk plus eastward branches of growing amplitude.

    Black set: the tail {(q, 0) : q < 0}, the spine {(0, r) : r ≥ 0}, and for
    each branch b ≥ 0 the tiles at q > 0 with H-center index g(q) + 4b, where
    g is the shared lobe profile. g(0) = 0 and lobe m (m = 0, 1, ...) appends,
    column by column, `jog_pairs` copies of (1, 0), then 1, 2, ..., A_m, then
    A_m − 1, ..., 0. Each column moves g by exactly one, so a branch is a
    NE/SE staircase. Branch b starts at (0, 2b) on its base H-line 4b and
    returns to it at the end of every lobe. Branches are translates of each
    other by two rows and are never adjacent.
    """

    family = "comb"

    def __init__(self, params: CombParams):
        self.params = params
        self._prefix = list(params.amplitudes or [])
        self._starts: list[int] = [0]
        self._amps: list[int] = []
        self._lock = threading.Lock()
        validate_comb_params(params)

    def amplitude(self, m: int) -> int:
        p = self.params
        if m < len(self._prefix):
            return self._prefix[m]
        if self._prefix:
            return self._prefix[-1] + p.amplitude_step * (m - len(self._prefix) + 1)
        return p.amplitude_offset + p.amplitude_step * m

    def _lobe_width(self, m: int) -> int:
        return 2 * self.params.jog_pairs + 2 * self.amplitude(m)

    def _extend_to(self, q: int) -> None:
        with self._lock:
            while self._starts[-1] < q:
                m = len(self._amps)
                self._amps.append(self.amplitude(m))
                self._starts.append(self._starts[-1] + self._lobe_width(m))
            logger.debug("comb profile extended to %d lobes", len(self._amps))

    def lobe_starts(self, q_max: int) -> list[int]:
        """Columns where a lobe ends and the next begins (g = 0 there), up to q_max."""
        if self._starts[-1] < q_max:
            self._extend_to(q_max)
        return [s for s in self._starts if s <= q_max]

    def profile(self, q: int) -> int:
        """g(q) for q ≥ 0."""
        if q <= 0:
            return 0
        if self._starts[-1] < q:
            self._extend_to(q)
        m = bisect.bisect_left(self._starts, q) - 1
        k = q - self._starts[m]
        jog = 2 * self.params.jog_pairs
        amp = self._amps[m]
        if k <= jog:
            return k % 2
        if k <= jog + amp:
            return k - jog
        return 2 * amp + jog - k

    def _branch_allowed(self, b: int) -> bool:
        limit = self.params.branch_count_limit
        return b >= 0 and (limit is None or b < limit)

    def is_black(self, t: Tile) -> bool:
        q, r = t
        if q < 0:
            return r == 0
        if q == 0:
            return r >= 0
        offset = 2 * r + q - self.profile(q)
        return offset % 4 == 0 and self._branch_allowed(offset // 4)

    def blacks_in(self, w: WindowLike) -> list[Tile]:
        q_lo, q_hi = q_range(w)
        out: list[Tile] = []
        for q in range(q_lo, q_hi + 1):
            span = column_span(w, q)
            if span is None:
                continue
            lo, hi = span
            if q < 0:
                if lo <= 0 <= hi:
                    out.append(Tile(q, 0))
                continue
            if q == 0:
                out.extend(Tile(0, r) for r in range(max(lo, 0), hi + 1))
                continue
            g = self.profile(q)
            b_lo = max(0, -((-(2 * lo + q - g)) // 4))
            b_hi = (2 * hi + q - g) // 4
            limit = self.params.branch_count_limit
            if limit is not None:
                b_hi = min(b_hi, limit - 1)
            out.extend(Tile(q, (g + 4 * b - q) // 2) for b in range(b_lo, b_hi + 1))
        return out

    def branch_tiles(self, b: int, q_max: int) -> list[Tile]:
        """Tiles of branch b over columns 0..q_max, starting at (0, 2b)."""
        if not self._branch_allowed(b):
            return []
        return [Tile(q, (self.profile(q) + 4 * b - q) // 2) for q in range(0, q_max + 1)]


def validate_comb_params(params: CombParams) -> None:
    if params.amplitudes is not None:
        amps = params.amplitudes
        if not amps or amps[0] < 1 or any(b <= a for a, b in zip(amps, amps[1:])):
            raise CombParamsError(f"amplitudes must be positive and strictly increasing: {amps}")
    elif params.amplitude_offset < 1:
        raise CombParamsError("first amplitude must be positive")
    if params.amplitude_step < 1:
        raise CombParamsError("amplitude step must be at least 1")


# ── Constructors ──


def finite_source(blacks) -> FiniteSource:
    return FiniteSource(blacks)


def empty_source() -> FiniteSource:
    return FiniteSource(frozenset())


def full_source() -> FullSource:
    return FullSource()


def diagonal_source() -> DiagonalSource:
    return DiagonalSource()


def comb_source(params: Optional[CombParams] = None) -> CombSource:
    return CombSource(params or CombParams())


def overlay(a: ColoringSource, b: ColoringSource) -> OverlaySource:
    return OverlaySource(a, b)


def random_source(
    rng: np.random.Generator, window: WindowLike, density: Optional[float] = None
) -> FiniteSource:
    """Each tile of the window black independently with probability `density`."""
    tiles = list(iter_window(window))
    p = settings.RANDOM_DENSITY if density is None else density
    mask = rng.random(len(tiles)) < p
    return FiniteSource([t for t, black in zip(tiles, mask) if black])


def family_source(family: str, params: Optional[dict[str, Any]] = None) -> ColoringSource:
    params = params or {}
    if family == "comb":
        return comb_source(CombParams(**params))
    if family == "diagonal":
        return diagonal_source()
    if family == "empty":
        return empty_source()
    if family == "full":
        return full_source()
    raise ValueError(f"unknown family: {family!r}")


# ── Labeled edge fixture ──

# Two clusters: a bent chain of five tiles and one isolated tile. The labels
# follow the boundary of the chain forward from edge 0.
LABELED_BLACKS: tuple[Tile, ...] = (
    Tile(0, 0),
    Tile(0, 1),
    Tile(0, 2),
    Tile(1, 0),
    Tile(2, -1),
    Tile(1, -2),
)

LABELED_EDGES: dict[int, tuple[Tile, Tile]] = {
    -4: (Tile(0, 1), Tile(-1, 2)),
    -3: (Tile(0, 1), Tile(-1, 1)),
    -2: (Tile(0, 0), Tile(-1, 1)),
    -1: (Tile(0, 0), Tile(-1, 0)),
    0: (Tile(0, 0), Tile(0, -1)),
    1: (Tile(0, 0), Tile(1, -1)),
    2: (Tile(1, 0), Tile(1, -1)),
    3: (Tile(2, -1), Tile(1, -1)),
    4: (Tile(2, -1), Tile(2, -2)),
    5: (Tile(2, -1), Tile(3, -2)),
    6: (Tile(2, -1), Tile(3, -1)),
    7: (Tile(2, -1), Tile(2, 0)),
    8: (Tile(1, 0), Tile(2, 0)),
    9: (Tile(1, 0), Tile(1, 1)),
    10: (Tile(0, 1), Tile(1, 1)),
}


def labeled_edges_fixture() -> tuple[FiniteSource, dict[int, tuple[Tile, Tile]]]:
    return FiniteSource(LABELED_BLACKS), dict(LABELED_EDGES)


# ── JSON board format ──


def source_from_json(payload: dict[str, Any]) -> ColoringSource:
    """Load {"blacks": [[q, r], ...]} or {"family": name, "params": {...}}."""
    if "blacks" in payload:
        return FiniteSource([tuple(t) for t in payload["blacks"]])
    if "family" in payload:
        return family_source(payload["family"], payload.get("params"))
    raise ValueError("board JSON needs 'blacks' or 'family'")


def source_to_json(src: ColoringSource, window: Optional[WindowLike] = None) -> dict[str, Any]:
    """Finite and fixture sources serialize exactly; anything else as its blacks in `window`."""
    support = src.finite_support()
    if support is not None:
        return {"blacks": [list(t) for t in sorted(support)]}
    if isinstance(src, CombSource):
        return {"family": "comb", "params": src.params.model_dump(exclude_none=True)}
    if isinstance(src, (DiagonalSource, FullSource)):
        return {"family": src.family, "params": {}}
    if window is None:
        raise ValueError("a window is needed to export an infinite source")
    return {"blacks": [list(t) for t in src.blacks_in(window)]}
