"""
Hex grid service: axial coordinates of the flat-top tiling, adjacency,
quarter-planes and their borders, lines, balls and finite windows.

Convention: tile (q, r) has center (3q/2, (2r+q)·√3/2) in circumradius units;
h = 2r + q is its H-center index.
"""

import math
from enum import IntEnum
from typing import Callable, Iterator, NamedTuple, Optional, Sequence, Union

import numpy as np

from app.models.schemas import Axis, BallWindow, Line, QuarterPlane, RectWindow, Sign

WindowLike = Union[BallWindow, RectWindow]


class PreconditionError(ValueError):
    """An operation was called outside its documented domain."""


class Tile(NamedTuple):
    q: int
    r: int


class Direction(IntEnum):
    """Neighbor directions in clockwise cyclic order starting at north."""

    N = 0
    NE = 1
    SE = 2
    S = 3
    SW = 4
    NW = 5

    @property
    def opposite(self) -> "Direction":
        return Direction((self + 3) % 6)


DIRS: tuple[tuple[int, int], ...] = ((0, 1), (1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1))
_DIR_INDEX = {d: i for i, d in enumerate(DIRS)}


# ── Adjacency ──


def step(t: Tile, d: int) -> Tile:
    dq, dr = DIRS[d % 6]
    return Tile(t[0] + dq, t[1] + dr)


def neighbors(t: Tile) -> list[Tile]:
    """The 6 neighbors in order N, NE, SE, S, SW, NW."""
    q, r = t
    return [Tile(q + dq, r + dr) for dq, dr in DIRS]


def direction_between(a: Tile, b: Tile) -> Optional[int]:
    """Index of b − a in DIRS, or None when the tiles are not adjacent."""
    return _DIR_INDEX.get((b[0] - a[0], b[1] - a[1]))


def is_adjacent(a: Tile, b: Tile) -> bool:
    return direction_between(a, b) is not None


def hex_distance(a: Tile, b: Tile) -> int:
    dq = a[0] - b[0]
    dr = a[1] - b[1]
    return (abs(dq) + abs(dr) + abs(dq + dr)) // 2


def ball(center_tile: Tile, radius: int) -> list[Tile]:
    """All tiles within graph distance `radius`, sorted by (q, r)."""
    return window_tiles(BallWindow(center=(center_tile[0], center_tile[1]), radius=radius))


# ── Embedding ──

_SQRT3_2 = math.sqrt(3) / 2


def h_index(t: Tile) -> int:
    return 2 * t[1] + t[0]


def center(t: Tile) -> tuple[float, float]:
    return (1.5 * t[0], h_index(t) * _SQRT3_2)


def centers(tiles: Sequence[Tile]) -> np.ndarray:
    """Vectorized `center` over many tiles; returns an (n, 2) float array."""
    arr = np.asarray(tiles, dtype=np.int64).reshape(-1, 2)
    out = np.empty(arr.shape, dtype=np.float64)
    out[:, 0] = 1.5 * arr[:, 0]
    out[:, 1] = (2 * arr[:, 1] + arr[:, 0]) * _SQRT3_2
    return out


# ── Diagonal & quarter-planes ──


def diagonal_tile(n: int) -> Tile:
    """d_n: d_0 is the origin and each d_n is the NE neighbor of d_{n−1}."""
    return Tile(n, 0)


def qp_depth(t: Tile, sign: Sign) -> int:
    """
    Signed depth of t: for + the largest n with t ∈ Q⁺ₙ, for − the negated
    least n with t ∈ Q⁻ₙ. Larger is deeper in both cases.
    """
    q, h = t[0], h_index(t)
    if sign == Sign.PLUS:
        return min(q, h)
    return -max(q, h)


def qp_member(t: Tile, qp: QuarterPlane) -> bool:
    q, h = t[0], h_index(t)
    if qp.sign == Sign.PLUS:
        return q >= qp.n and h >= qp.n
    return q <= qp.n and h <= qp.n


def qp_predicate(qp: QuarterPlane) -> Callable[[Tile], bool]:
    """Membership test for qp as a closure, for tight search loops."""
    n = qp.n
    if qp.sign == Sign.PLUS:
        return lambda t: t[0] >= n and 2 * t[1] + t[0] >= n
    return lambda t: t[0] <= n and 2 * t[1] + t[0] <= n


def on_qp_boundary(t: Tile, qp: QuarterPlane) -> bool:
    """True iff t is a member of qp with at least one non-member neighbor."""
    return qp_member(t, qp) and any(not qp_member(nb, qp) for nb in neighbors(t))


def qp_border(t: Tile, qp: QuarterPlane) -> frozenset[Axis]:
    """Which border parts of qp contain t: ∂_V, ∂_H, both (only at d_n), or neither."""
    if not qp_member(t, qp):
        raise PreconditionError(f"tile {tuple(t)} is not in Q{qp.sign.value}{qp.n}")
    if tuple(t) == tuple(diagonal_tile(qp.n)):
        return frozenset({Axis.V, Axis.H})
    on_v = t[0] == qp.n and (t[1] >= 0 if qp.sign == Sign.PLUS else t[1] <= 0)
    if on_v:
        return frozenset({Axis.V})
    if on_qp_boundary(t, qp):
        return frozenset({Axis.H})
    return frozenset()


def reflect_through_diagonal(t: Tile, n: int) -> Tile:
    """Point reflection through the center of d_n; swaps Q⁺ₙ and Q⁻ₙ."""
    return Tile(2 * n - t[0], -t[1])


# ── Lines ──


def line_touch(t: Tile, line: Line) -> bool:
    if line.axis == Axis.H:
        return abs(line.index - h_index(t)) <= 1
    return t[0] == line.index


# ── Windows ──


def q_range(w: WindowLike) -> tuple[int, int]:
    if isinstance(w, BallWindow):
        return w.center[0] - w.radius, w.center[0] + w.radius
    return w.q_min, w.q_max


def column_span(w: WindowLike, q: int) -> Optional[tuple[int, int]]:
    """Inclusive r-range of column q inside w, or None when the column misses w."""
    if isinstance(w, BallWindow):
        cq, cr = w.center
        radius = w.radius
        dq = q - cq
        if abs(dq) > radius:
            return None
        return cr + max(-radius, -dq - radius), cr + min(radius, radius - dq)
    if q < w.q_min or q > w.q_max:
        return None
    return w.r_min, w.r_max


def window_contains(w: WindowLike, t: Tile) -> bool:
    if isinstance(w, BallWindow):
        return hex_distance(Tile(*w.center), t) <= w.radius
    return w.q_min <= t[0] <= w.q_max and w.r_min <= t[1] <= w.r_max


def window_predicate(w: WindowLike) -> Callable[[Tile], bool]:
    if isinstance(w, BallWindow):
        cq, cr = w.center
        radius = w.radius

        def _in_ball(t: Tile) -> bool:
            dq = t[0] - cq
            dr = t[1] - cr
            return abs(dq) + abs(dr) + abs(dq + dr) <= 2 * radius

        return _in_ball
    q_min, q_max, r_min, r_max = w.q_min, w.q_max, w.r_min, w.r_max
    return lambda t: q_min <= t[0] <= q_max and r_min <= t[1] <= r_max


def iter_window(w: WindowLike) -> Iterator[Tile]:
    q_lo, q_hi = q_range(w)
    for q in range(q_lo, q_hi + 1):
        span = column_span(w, q)
        if span is None:
            continue
        for r in range(span[0], span[1] + 1):
            yield Tile(q, r)


def window_tiles(w: WindowLike) -> list[Tile]:
    """Exact enumeration of w in lexicographic (q, r) order."""
    return list(iter_window(w))


def window_size(w: WindowLike) -> int:
    if isinstance(w, BallWindow):
        return 1 + 3 * w.radius * (w.radius + 1)
    return (w.q_max - w.q_min + 1) * (w.r_max - w.r_min + 1)


def window_edge(w: WindowLike) -> list[Tile]:
    """Tiles of w with at least one neighbor outside w, in (q, r) order."""
    inside = window_predicate(w)
    return [t for t in iter_window(w) if any(not inside(nb) for nb in neighbors(t))]


def qp_boundary_tiles(qp: QuarterPlane, w: WindowLike) -> list[Tile]:
    """
    ∂Q ∩ w in (q, r) order. For + the boundary is column n (h ≥ n) plus the
    staircase h ∈ {n, n+1} (q ≥ n); for − it mirrors to h ∈ {n − 1, n}.
    """
    n = qp.n
    plus = qp.sign == Sign.PLUS
    out = []
    q_lo, q_hi = q_range(w)
    q_lo, q_hi = (max(q_lo, n), q_hi) if plus else (q_lo, min(q_hi, n))
    for q in range(q_lo, q_hi + 1):
        span = column_span(w, q)
        if span is None:
            continue
        if q == n:
            lo, hi = (max(span[0], 0), span[1]) if plus else (span[0], min(span[1], 0))
            out.extend(Tile(q, r) for r in range(lo, hi + 1))
            continue
        h = n + ((n + q) % 2 if plus else -((n + q) % 2))
        r = (h - q) // 2
        if span[0] <= r <= span[1]:
            out.append(Tile(q, r))
    return out


def corners_inside(w: WindowLike, n_max: int) -> bool:
    """True iff d_n lies in w for every |n| ≤ n_max."""
    inside = window_predicate(w)
    return all(inside(diagonal_tile(n)) for n in range(-n_max, n_max + 1))
