"""
Reduction service: turns an input x and a clopen family X(a, b, c, d) into a
board coloring y = f(x), computed lazily tile by tile.

Pipeline: failure points → greedy trajectories (collapse of ∃c ∀d into one
index n) → command sets K(i, j) → per-step command pairs A(i, j) and descent
indices dsc(i, j) → path geometry. Black wins on y iff x ∈ ⋃_a ⋂_b ⋃_c ⋂_d X.
"""

import bisect
import logging
import threading
from dataclasses import dataclass, field
from typing import Optional

from app.models.schemas import DescentReport, GeometrySpec, PlanReport, PlanViolation
from app.services.clopen import BitStream, ClopenFamily
from app.services.coloring import ColoringSource
from app.services.hexgrid import Tile, WindowLike, column_span, h_index, is_adjacent, iter_window, q_range

logger = logging.getLogger(__name__)

# Anchor columns ℓ_{j+1} − ℓ_j = 8j + 4: the tightest spacing the dip profile fits.
SKELETON_GEOMETRY = GeometrySpec(gap_scale=8, gap_offset=4)

K_LINE_SPACING = 4


class GeometryError(ValueError):
    """Anchor columns must be even and strictly increasing."""


# ── Collapse ──


def failure_point(fam: ClopenFamily, x: BitStream, a: int, b: int, c: int, bound: int) -> Optional[int]:
    """Least d ≤ bound with x ∉ X(a, b, c, d); None when every d ≤ bound passes."""
    for d in range(bound + 1):
        if not fam.member(a, b, c, d, x):
            return d
    return None


def is_trajectory_sum(fam: ClopenFamily, x: BitStream, a: int, b: int, n: int) -> bool:
    """
    n is a partial sum of the greedy trajectory (f(0)+1) + (f(1)+1) + ...,
    where f(c) is the failure point of X(a, b, c, ·). Each part is at least 1,
    so the walk reaches or passes n after at most n parts.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    running = 0
    c = 0
    while running < n:
        f = failure_point(fam, x, a, b, c, n - running - 1)
        if f is None:
            return False
        running += f + 1
        c += 1
    return running == n


def collapsed_member(fam: ClopenFamily, x: BitStream, a: int, b: int, n: int, literal: bool = False) -> bool:
    """x ∈ X(a, b, n): n is not a trajectory sum (or is one, under the literal reading)."""
    hit = is_trajectory_sum(fam, x, a, b, n)
    return hit if literal else not hit


def command_set(fam: ClopenFamily, x: BitStream, i: int, j: int, literal: bool = False) -> set[int]:
    """K(i, j) = {b ≤ j : x ∉ X(i, b, j)}."""
    return {b for b in range(j + 1) if not collapsed_member(fam, x, i, b, j, literal)}


class CommandOracle:
    """
    Memoized K(i, j). Each (a, b) keeps its greedy trajectory as far as any
    query has needed it, so repeated queries never retest a (c, d).
    """

    def __init__(self, fam: ClopenFamily, x: BitStream, literal: bool = False):
        self.fam = fam
        self.x = x
        self.literal = literal
        self._walks: dict[tuple[int, int], "_Walk"] = {}
        self._lock = threading.Lock()

    def is_trajectory_sum(self, a: int, b: int, n: int) -> bool:
        with self._lock:
            walk = self._walks.setdefault((a, b), _Walk())
            return walk.reaches(self.fam, self.x, a, b, n)

    def command_set(self, i: int, j: int) -> set[int]:
        if self.literal:
            return {b for b in range(j + 1) if not self.is_trajectory_sum(i, b, j)}
        return {b for b in range(j + 1) if self.is_trajectory_sum(i, b, j)}


@dataclass
class _Walk:
    sums: list[int] = field(default_factory=lambda: [0])
    sum_set: set[int] = field(default_factory=lambda: {0})
    c: int = 0
    checked: int = -1

    def reaches(self, fam: ClopenFamily, x: BitStream, a: int, b: int, n: int) -> bool:
        while self.sums[-1] < n:
            bound = n - self.sums[-1] - 1
            failed = None
            for d in range(self.checked + 1, bound + 1):
                if not fam.member(a, b, self.c, d, x):
                    failed = d
                    break
                self.checked = d
            if failed is None:
                return False
            self.sums.append(self.sums[-1] + failed + 1)
            self.sum_set.add(self.sums[-1])
            self.c += 1
            self.checked = -1
        return n in self.sum_set


# ── Command pairs & descent ──

CommandPair = tuple[int, int]


@dataclass(frozen=True)
class StepRecord:
    """Per-path tables of one step j."""

    j: int
    K: tuple[frozenset[int], ...]
    A_prime: tuple[frozenset[CommandPair], ...]
    b: tuple[Optional[int], ...]
    r: tuple[int, ...]
    dsc: tuple[int, ...]


@dataclass(frozen=True)
class ReductionState:
    """A(i, j) for i ≤ i_bound at the start of step j, plus the tables of step j − 1."""

    j: int
    A: tuple[frozenset[CommandPair], ...]
    last: Optional[StepRecord] = None

    @classmethod
    def initial(cls, i_bound: int) -> "ReductionState":
        return cls(j=0, A=tuple(frozenset() for _ in range(i_bound + 1)))

    @property
    def i_bound(self) -> int:
        return len(self.A) - 1


def _update_pairs(a_prime: frozenset[CommandPair], dsc: int) -> frozenset[CommandPair]:
    """Retire pairs reached this span, keep those still at their best, record improvements."""
    out = set()
    for b, best in a_prime:
        if dsc <= b:
            continue
        if best <= dsc:
            out.add((b, best))
        else:
            out.add((b, dsc))
    return frozenset(out)


def _step_path(
    oracle: CommandOracle, i: int, j: int, pairs: frozenset[CommandPair], lower: int
) -> tuple[frozenset[int], frozenset[CommandPair], Optional[int], int, frozenset[CommandPair]]:
    """
    One path, one step. Only pairs whose best depth is still above the floor
    `lower` (the relative line reached by P_{i−1}) can pull P_i; a path with
    no such pair counts as commanded to its own anchor line. Hence
    dsc(i, j) = max over i′ ≤ i of the lowest live command.
    Returns (K, A′, b, dsc, next A).
    """
    k = frozenset(oracle.command_set(i, j))
    a_prime = pairs | {(b, j) for b in k}
    live = [b for b, best in a_prime if best > lower]
    b = min(live) if live else None
    dsc = max(lower, j if b is None else b)
    return k, a_prime, b, dsc, _update_pairs(a_prime, dsc)


def advance(state: ReductionState, oracle: CommandOracle) -> ReductionState:
    """Step j → j + 1 for every path i ≤ i_bound."""
    j = state.j
    ks, primes, bs, rs, dscs, next_a = [], [], [], [], [], []
    lower = -1
    for i, pairs in enumerate(state.A):
        k, a_prime, b, dsc, nxt = _step_path(oracle, i, j, pairs, lower)
        lower = dsc
        ks.append(k)
        primes.append(a_prime)
        bs.append(b)
        rs.append(j - dsc)
        dscs.append(dsc)
        next_a.append(nxt)
    record = StepRecord(j, tuple(ks), tuple(primes), tuple(bs), tuple(rs), tuple(dscs))
    return ReductionState(j=j + 1, A=tuple(next_a), last=record)


def run_steps(oracle: CommandOracle, i_bound: int, steps: int) -> list[list[int]]:
    """dsc table indexed [j][i] for j < steps."""
    state = ReductionState.initial(i_bound)
    table = []
    for _ in range(steps):
        state = advance(state, oracle)
        assert state.last is not None
        table.append(list(state.last.dsc))
    return table


def _next_pow2(n: int) -> int:
    size = 1
    while size < n:
        size *= 2
    return size


class DescentSchedule:
    """
    Lazily grown dsc(i, j). Both dimensions grow to powers of two, so the
    computed extent after any set of queries depends only on the largest
    (i, j) requested.
    """

    def __init__(self, oracle: CommandOracle):
        self.oracle = oracle
        self._dsc: list[list[int]] = []
        self._pairs: list[frozenset[CommandPair]] = []
        self._steps = 0
        self._lock = threading.Lock()

    @property
    def extent(self) -> tuple[int, int]:
        return len(self._dsc), self._steps

    def dsc(self, i: int, j: int) -> int:
        if i >= len(self._dsc) or j >= self._steps:
            self.ensure(i + 1, j + 1)
        return self._dsc[i][j]

    def ensure(self, paths: int, steps: int) -> None:
        with self._lock:
            if steps > self._steps:
                self._grow_steps(_next_pow2(steps))
            if paths > len(self._dsc):
                self._grow_paths(_next_pow2(paths))

    def _grow_steps(self, steps: int) -> None:
        for j in range(self._steps, steps):
            lower = -1
            for i in range(len(self._dsc)):
                _, _, _, dsc, self._pairs[i] = _step_path(self.oracle, i, j, self._pairs[i], lower)
                self._dsc[i].append(dsc)
                lower = dsc
        self._steps = steps
        logger.debug("descent schedule: %d paths x %d steps", len(self._dsc), steps)

    def _grow_paths(self, paths: int) -> None:
        steps = max(self._steps, 1)
        for i in range(len(self._dsc), paths):
            pairs: frozenset[CommandPair] = frozenset()
            row = []
            for j in range(steps):
                lower = self._dsc[i - 1][j] if i > 0 else -1
                _, _, _, dsc, pairs = _step_path(self.oracle, i, j, pairs, lower)
                row.append(dsc)
            self._dsc.append(row)
            self._pairs.append(pairs)
        self._steps = steps
        logger.debug("descent schedule: %d paths x %d steps", paths, steps)


def b_prime_ladder(b: list[int]) -> list[int]:
    """b′₀ = b₀, b′ᵢ = max(bᵢ, b′ᵢ₋₁): the relative depth path i can reach infinitely often."""
    ladder = []
    for value in b:
        ladder.append(value if not ladder else max(value, ladder[-1]))
    return ladder


# ── Geometry ──


class Geometry:
    """k-lines at H-index 4i; anchor columns ℓ_0 = 0, ℓ_{j+1} = ℓ_j + g(j)."""

    def __init__(self, spec: GeometrySpec):
        self.spec = spec
        if spec.gap_scale % 2 or spec.gap_offset % 2:
            raise GeometryError("gaps must be even so anchors sit on tiles")
        if spec.gap_offset < 1:
            raise GeometryError("the first gap must be positive")
        self._cols = [0]
        self._lock = threading.Lock()

    def gap(self, j: int) -> int:
        return self.spec.gap_scale * j + self.spec.gap_offset

    def column(self, j: int) -> int:
        """ℓ_j."""
        while len(self._cols) <= j:
            with self._lock:
                if len(self._cols) <= j:
                    self._cols.append(self._cols[-1] + self.gap(len(self._cols) - 1))
        return self._cols[j]

    def span_of(self, q: int) -> int:
        """The j with ℓ_j ≤ q < ℓ_{j+1}, for q ≥ 0."""
        while self.column(len(self._cols) - 1) <= q:
            self.column(len(self._cols))
        return bisect.bisect_right(self._cols, q) - 1

    def anchor(self, i: int, j: int) -> Tile:
        """t_(i,j): column ℓ_j on line k_{i+j}."""
        q = self.column(j)
        return Tile(q, (K_LINE_SPACING * (i + j) - q) // 2)

    def dip(self, x: int, j: int, delta: int) -> int:
        """
        H-index offset above k_{i+j} at x columns into span j for a path that
        descends delta lines: SE staircase down, a flat bottom alternating on
        and just below the target line, NE staircase up to the next anchor.
        """
        return max(-x, -K_LINE_SPACING * delta - (x % 2), x - self.gap(j) + 4)

    def path_h(self, i: int, q: int, dsc_ij: int, j: int) -> int:
        return K_LINE_SPACING * (i + j) + self.dip(q - self.column(j), j, j - dsc_ij)


# ── The reduction coloring ──


class ReductionSource(ColoringSource):
    """
    y = f(x): tail {(q, 0) : q < 0}, spine {(0, r) : r ≥ 0}, and paths P_i
    starting at (0, 2i) through every anchor t_(i,j). Within span j, P_i's
    lowest k-line is k_{i + dsc(i, j)}. A query computes the schedule only
    up to the tile's span and the paths whose band can reach its row.
    """

    family = "reduction"

    def __init__(
        self,
        fam: ClopenFamily,
        x: BitStream,
        geometry: Optional[GeometrySpec] = None,
        literal: bool = False,
    ):
        self.fam = fam
        self.x = x
        self.geometry = Geometry(geometry or GeometrySpec())
        self.oracle = CommandOracle(fam, x, literal)
        self.schedule = DescentSchedule(self.oracle)

    def _candidates(self, q: int, h: int) -> tuple[int, range]:
        j = self.geometry.span_of(q)
        lo = max(0, -((-(h - K_LINE_SPACING * j - 4)) // K_LINE_SPACING))
        hi = (h + 1) // K_LINE_SPACING
        return j, range(lo, hi + 1)

    def is_black(self, t: Tile) -> bool:
        q, r = t
        if q < 0:
            return r == 0
        if q == 0:
            return r >= 0
        h = 2 * r + q
        j, candidates = self._candidates(q, h)
        for i in candidates:
            if self.geometry.path_h(i, q, self.schedule.dsc(i, j), j) == h:
                return True
        return False

    def required_extent(self, t: Tile) -> tuple[int, int]:
        """(paths, steps) of the schedule a query of t needs; (0, 0) when none."""
        q, r = t
        if q <= 0:
            return 0, 0
        j, candidates = self._candidates(q, 2 * r + q)
        if not candidates:
            return 0, 0
        return candidates[-1] + 1, j + 1

    def bit_bound(self, t: Tile) -> int:
        """Length of the prefix of x that suffices to answer is_black(t)."""
        paths, steps = self.required_extent(t)
        if paths == 0:
            return 0
        return family_prefix_bound(self.fam, _next_pow2(paths), _next_pow2(steps))

    def descent_table(self, paths: int, steps: int) -> list[list[int]]:
        """dsc indexed [i][j]."""
        self.schedule.ensure(paths, steps)
        return [[self.schedule.dsc(i, j) for j in range(steps)] for i in range(paths)]

    def paths_for_window(self, w: WindowLike) -> int:
        """Paths whose band can meet w: P_i stays at H-index ≥ 4i − 1 on the east side."""
        q_lo, q_hi = q_range(w)
        top = -1
        for q in range(max(q_lo, 1), q_hi + 1):
            span = column_span(w, q)
            if span is not None:
                top = max(top, 2 * span[1] + q)
        return (top + 1) // K_LINE_SPACING + 1 if top >= 0 else 0


def family_prefix_bound(fam: ClopenFamily, paths: int, steps: int) -> int:
    """
    Largest prefix_len over a < paths and b, c, d < steps: every test made by
    K(i, j) for i < paths, j < steps stays inside this box.
    """
    if steps == 0 or paths == 0:
        return 0
    return fam.prefix_bound(paths - 1, steps - 1, steps - 1, steps - 1)


# ── Plans ──


@dataclass
class ReductionPlan:
    """Finitely many materialized paths: P_i over columns 0..ℓ_steps."""

    geometry: Geometry
    dsc: list[list[int]]
    paths: dict[int, list[Tile]]

    @property
    def steps(self) -> int:
        return len(self.dsc[0]) if self.dsc else 0


def materialize_paths(src: ReductionSource, paths: int, steps: int) -> ReductionPlan:
    geo = src.geometry
    table = src.descent_table(paths, steps)
    tiles: dict[int, list[Tile]] = {}
    for i in range(paths):
        out = [Tile(0, 2 * i)]
        for j in range(steps):
            start, end = geo.column(j), geo.column(j + 1)
            for q in range(start + 1, end + 1):
                h = geo.path_h(i, q, table[i][j], j)
                out.append(Tile(q, (h - q) // 2))
        tiles[i] = out
    return ReductionPlan(geo, table, tiles)


def _min_k_line(tiles: list[Tile]) -> Optional[int]:
    """Least m such that some tile touches H-line 4m."""
    best = None
    for t in tiles:
        h = h_index(t)
        for line in (h - 1, h, h + 1):
            if line % K_LINE_SPACING == 0:
                m = line // K_LINE_SPACING
                best = m if best is None else min(best, m)
    return best


def validate_plan(plan: ReductionPlan) -> list[PlanViolation]:
    """Structural checks of a materialized plan; violations are returned, never raised."""
    geo = plan.geometry
    out: list[PlanViolation] = []
    steps = plan.steps

    for j in range(steps):
        if geo.gap(j) < 8 * j + 4:
            out.append(PlanViolation(check="gap", step=j, detail=f"gap {geo.gap(j)} < {8 * j + 4}"))

    for i, tiles in plan.paths.items():
        for k in range(1, len(tiles)):
            if not is_adjacent(tiles[k - 1], tiles[k]):
                out.append(
                    PlanViolation(check="connectivity", path=i, detail=f"{tuple(tiles[k - 1])} -> {tuple(tiles[k])}")
                )
                break
        on_path = set(tiles)
        for j in range(steps + 1):
            if geo.anchor(i, j) not in on_path:
                out.append(PlanViolation(check="anchor", path=i, step=j, detail=f"missing {tuple(geo.anchor(i, j))}"))
        for j in range(steps):
            lo, hi = geo.column(j), geo.column(j + 1)
            span_tiles = [t for t in tiles if lo <= t[0] <= hi]
            want = i + plan.dsc[i][j]
            got = _min_k_line(span_tiles)
            if got != want:
                out.append(PlanViolation(check="minimal_line", path=i, step=j, detail=f"touches k_{got}, want k_{want}"))

    owner: dict[Tile, int] = {}
    for i, tiles in plan.paths.items():
        for t in tiles:
            if t in owner and owner[t] != i:
                out.append(PlanViolation(check="disjoint", path=i, detail=f"{tuple(t)} shared with P_{owner[t]}"))
            owner.setdefault(t, i)
    for t, i in owner.items():
        for d in ((0, 1), (1, 0), (1, -1)):
            nb = Tile(t[0] + d[0], t[1] + d[1])
            other = owner.get(nb)
            if other is not None and other != i:
                out.append(PlanViolation(check="disjoint", path=i, detail=f"{tuple(t)} touches P_{other}"))

    for j in range(steps):
        levels = [i + plan.dsc[i][j] for i in sorted(plan.paths)]
        if any(b <= a for a, b in zip(levels, levels[1:])):
            out.append(PlanViolation(check="nesting", step=j, detail=f"i + dsc not increasing: {levels}"))

    return out


def plan_report(plan: ReductionPlan) -> PlanReport:
    return PlanReport(paths=len(plan.paths), steps=plan.steps, violations=validate_plan(plan))


# ── Descent statistics ──


def descent_stats(src: ReductionSource, i: int, steps: int) -> DescentReport:
    """
    For β = 0..steps, the number of spans j ∈ [1, steps] in which P_i dips to
    or below its relative line β while β is strictly above the span's anchor line.
    """
    src.schedule.ensure(i + 1, steps + 1)
    dsc = [src.schedule.dsc(i, j) for j in range(steps + 1)]
    counts = [sum(1 for j in range(1, steps + 1) if dsc[j] <= beta < j) for beta in range(steps + 1)]
    return DescentReport(path=i, steps=steps, dsc=dsc, counts=counts)


def window_bit_bound(src: ReductionSource, w: WindowLike) -> int:
    """
    Prefix of x that suffices to color every tile of w. The schedule grows as
    one rectangle, so the bound covers the joint (paths, steps) extent.
    """
    paths = steps = 0
    for t in iter_window(w):
        p, s = src.required_extent(t)
        paths = max(paths, p)
        steps = max(steps, s)
    if paths == 0:
        return 0
    return family_prefix_bound(src.fam, _next_pow2(paths), _next_pow2(steps))
