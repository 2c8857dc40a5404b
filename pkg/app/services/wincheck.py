"""
Win-check service: bounded three-valued evaluators for the winning-condition
formulas ψ₁, ψ′₁, φ₁, φ′₁, φ₂(±), φ₃(±), φ₄ and the window crossing oracle.

Every True/False carries a certificate; anything the budgets cannot settle is
Unknown. Quantifiers over n run over [−n_max, n_max]; ∃r runs over balls
around the origin up to r_max.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator, Optional

from joblib import Parallel, delayed

from app.config import get_settings
from app.models.schemas import (
    BallWindow,
    QuarterPlane,
    Resolution,
    Sign,
    TraceDirection,
    TraceOutcome,
    Truth,
    VerdictReport,
)
from app.services.coloring import ColoringSource
from app.services.connectivity import ComponentReport, Region, component, iter_components
from app.services.edgetrace import Edge, TraceResult, edges_of, trace
from app.services.hexgrid import (
    PreconditionError,
    Tile,
    WindowLike,
    corners_inside,
    diagonal_tile,
    h_index,
    hex_distance,
    neighbors,
    qp_boundary_tiles,
    qp_depth,
    qp_member,
    qp_predicate,
    window_edge,
    window_predicate,
)

settings = get_settings()
logger = logging.getLogger(__name__)

ORIGIN = Tile(0, 0)
MIN_EXIT_LENGTH = 12

FORMULAS = ("phi1", "phi1_primed", "phi2+", "phi2-", "phi3+", "phi3-", "phi4")


# ── Kleene connectives ──


def truth_all(values: Iterable[Truth]) -> Truth:
    values = list(values)
    if any(v == Truth.FALSE for v in values):
        return Truth.FALSE
    if any(v == Truth.UNKNOWN for v in values):
        return Truth.UNKNOWN
    return Truth.TRUE


def truth_any(values: Iterable[Truth]) -> Truth:
    values = list(values)
    if any(v == Truth.TRUE for v in values):
        return Truth.TRUE
    if any(v == Truth.UNKNOWN for v in values):
        return Truth.UNKNOWN
    return Truth.FALSE


def truth_not(value: Truth) -> Truth:
    if value == Truth.TRUE:
        return Truth.FALSE
    if value == Truth.FALSE:
        return Truth.TRUE
    return Truth.UNKNOWN


def _first_true(values: Iterator[Truth]) -> Truth:
    """Lazy Kleene OR: stops at the first True."""
    seen_unknown = False
    for v in values:
        if v == Truth.TRUE:
            return Truth.TRUE
        seen_unknown = seen_unknown or v == Truth.UNKNOWN
    return Truth.UNKNOWN if seen_unknown else Truth.FALSE


@dataclass(frozen=True)
class Verdict:
    value: Truth
    witness: Any = None
    certificate_kind: str = "none"
    parts: dict[str, "Verdict"] = field(default_factory=dict)


# ── Helpers ──


def check_resolution(res: Resolution) -> None:
    if not corners_inside(res.window, res.n_max):
        raise PreconditionError(f"window does not contain d_n for all |n| <= {res.n_max}")


def _n_range(res: Resolution) -> list[int]:
    return list(range(-res.n_max, res.n_max + 1))


def _per_n(fn: Callable[[int], Any], ns: list[int]) -> list[Any]:
    """Evaluate fn for every n; threads only change timing, never results."""
    return Parallel(n_jobs=settings.N_JOBS, prefer="threads")(delayed(fn)(n) for n in ns)


def _dist(t: Tile) -> int:
    return hex_distance(ORIGIN, t)


def _tile_json(t: Tile) -> list[int]:
    return [int(t[0]), int(t[1])]


def _edge_json(e: Edge) -> list[list[int]]:
    return [_tile_json(e.a), _tile_json(e.b)]


def _deep_predicate(sign: Sign, depth: int) -> Callable[[Tile], bool]:
    """Membership in Q⁺_depth (for +) or Q⁻_{−depth} (for −)."""
    return lambda t: qp_depth(t, sign) >= depth


def _qp(sign: Sign, n: int) -> QuarterPlane:
    return QuarterPlane(sign=sign, n=n)


# ── ψ₁ and ψ′₁ ──


def _psi1_truth(report: ComponentReport, threshold: int) -> Truth:
    if report.certified_finite:
        return Truth.FALSE
    if report.size >= threshold:
        return Truth.TRUE
    return Truth.UNKNOWN


def _psi1_primed_truth(report: ComponentReport) -> Truth:
    if report.hit is not None:
        return Truth.TRUE
    if report.certified_finite:
        return Truth.FALSE
    return Truth.UNKNOWN


def _check_seed(src: ColoringSource, a: Tile, qp: QuarterPlane, window: WindowLike) -> None:
    if not src.is_black(a):
        raise PreconditionError(f"tile {tuple(a)} is not black")
    if not qp_member(a, qp):
        raise PreconditionError(f"tile {tuple(a)} is not in Q{qp.sign.value}{qp.n}")
    if not window_predicate(window)(a):
        raise PreconditionError(f"tile {tuple(a)} is outside the window")


def eval_psi1(src: ColoringSource, a: Tile, n: int, sign: Sign, res: Resolution) -> Verdict:
    """Is the component of a in Q*ₙ ∩ B infinite? Closure inside the window certifies finiteness."""
    a = Tile(*a)
    qp = _qp(sign, n)
    _check_seed(src, a, qp, res.window)
    report = component(src, Region(res.window, qp), a, res.component_budget)
    value = _psi1_truth(report, res.size_threshold)
    kind = {
        Truth.FALSE: "finite_component",
        Truth.TRUE: "size_threshold",
        Truth.UNKNOWN: "closed_at_window_edge",
    }[value]
    return Verdict(value, {"anchor": _tile_json(a), "size": report.size}, kind)


def eval_psi1_primed(src: ColoringSource, a: Tile, n: int, sign: Sign, res: Resolution) -> Verdict:
    """Does the component of a in Q*ₙ ∩ B reach the deepest quarter-plane of the resolution?"""
    a = Tile(*a)
    qp = _qp(sign, n)
    _check_seed(src, a, qp, res.window)
    report = component(src, Region(res.window, qp), a, res.component_budget, _deep_predicate(sign, res.n_max))
    value = _psi1_primed_truth(report)
    witness = {"anchor": _tile_json(a), "reached": _tile_json(report.hit) if report.hit else None}
    kind = {
        Truth.TRUE: "reaches_deepest_quarter_plane",
        Truth.FALSE: "finite_component",
        Truth.UNKNOWN: "budget_exhausted",
    }[value]
    return Verdict(value, witness, kind)


# ── φ₁ and φ′₁ ──


def _anchors(src: ColoringSource, res: Resolution) -> list[Tile]:
    inside = window_predicate(res.window)
    near = [t for t in src.blacks_in(BallWindow(center=(0, 0), radius=res.r_max)) if inside(t)]
    return sorted(near, key=lambda t: (_dist(t), t[0], t[1]))


def _side_truth(
    src: ColoringSource, anchor: ComponentReport, n: int, sign: Sign, res: Resolution, primed: bool
) -> Truth:
    """Kleene OR over the components of F ∩ Q*ₙ, F being the anchor's window component."""
    qp = _qp(sign, n)
    in_q = qp_predicate(qp)
    seeds = (t for t in anchor.tiles if in_q(t))
    region = Region(res.window, qp)
    if primed:
        target = _deep_predicate(sign, res.n_max)
        reports = iter_components(src, region, seeds, res.component_budget, target)
        values = (_psi1_primed_truth(r) for r in reports)
    else:
        reports = iter_components(src, region, seeds, res.size_threshold)
        values = (_psi1_truth(r, res.size_threshold) for r in reports)
    value = _first_true(values)
    if value == Truth.FALSE and not anchor.certified_finite:
        return Truth.UNKNOWN
    return value


def _eval_anchor_formula(src: ColoringSource, res: Resolution, primed: bool) -> Verdict:
    check_resolution(res)
    anchors = _anchors(src, res)
    if not anchors:
        return Verdict(Truth.FALSE, {"anchors": []}, "no_anchor")

    covered: set[Tile] = set()
    tried = []
    unknown = []
    for t in anchors:
        if t in covered:
            continue
        f = component(src, Region(window=res.window), t, res.component_budget)
        covered.update(f.tiles)
        tried.append(_tile_json(t))
        if f.certified_finite:
            logger.debug("anchor %s: finite component of %d tiles", tuple(t), f.size)
            continue

        def _at_n(n: int, f: ComponentReport = f) -> Truth:
            plus = _side_truth(src, f, n, Sign.PLUS, res, primed)
            if plus == Truth.FALSE:
                return plus
            return truth_all([plus, _side_truth(src, f, n, Sign.MINUS, res, primed)])

        by_n = dict(zip(_n_range(res), _per_n(_at_n, _n_range(res))))
        value = truth_all(by_n.values())
        logger.debug("anchor %s: %s", tuple(t), value.value)
        if value == Truth.TRUE:
            kind = "reaches_deepest_quarter_plane" if primed else "size_threshold"
            return Verdict(Truth.TRUE, {"anchor": _tile_json(t), "component_size": f.size}, kind)
        if value == Truth.UNKNOWN:
            unknown.append(_tile_json(t))

    if unknown:
        return Verdict(Truth.UNKNOWN, {"undecided_anchors": unknown}, "budget_exhausted")
    return Verdict(Truth.FALSE, {"anchors": tried}, "all_anchors_finite")


def eval_phi1(src: ColoringSource, res: Resolution) -> Verdict:
    verdict = _eval_anchor_formula(src, res, primed=False)
    logger.info("phi1: %s (%s)", verdict.value.value, verdict.certificate_kind)
    return verdict


def eval_phi1_primed(src: ColoringSource, res: Resolution) -> Verdict:
    verdict = _eval_anchor_formula(src, res, primed=True)
    logger.info("phi1_primed: %s (%s)", verdict.value.value, verdict.certificate_kind)
    return verdict


# ── φ₂ ──


def border_edges(src: ColoringSource, qp: QuarterPlane, window: WindowLike) -> list[Edge]:
    """Edges with both tiles on ∂Q ∩ window, nearest the origin first."""
    border = qp_boundary_tiles(qp, window)
    on_border = set(border)
    edges = []
    for a in border:
        if not src.is_black(a):
            continue
        for b in neighbors(a):
            if b in on_border and not src.is_black(b):
                edges.append(Edge(a, b))
    return sorted(edges, key=lambda e: (min(_dist(e.a), _dist(e.b)), e.a, e.b))


@dataclass(frozen=True)
class _BorderResult:
    value: Truth
    needed_r: int
    witnesses: tuple[Edge, ...] = ()


def _phi2_at(src: ColoringSource, n: int, sign: Sign, res: Resolution, finite: bool = False) -> _BorderResult:
    """With a known finite black set every trace is a cycle, so a Budget outcome is never a witness."""
    qp = _qp(sign, n)
    region = Region(quarter_plane=qp)
    needed_r = 0
    witnesses: list[Edge] = []
    witness_sets: list[frozenset[Edge]] = []

    for e in border_edges(src, qp, res.window):
        forward = trace(src, e, TraceDirection.FORWARD, res.trace_budget, region)
        backward = trace(src, e, TraceDirection.BACKWARD, res.trace_budget, region)
        if forward.outcome == TraceOutcome.LEFT_REGION and backward.outcome == TraceOutcome.LEFT_REGION:
            continue
        near = min(_dist(e.a), _dist(e.b))
        needed_r = max(needed_r, near)
        if near <= res.r_max or finite:
            continue
        for tr in (forward, backward):
            if tr.outcome != TraceOutcome.BUDGET:
                continue
            edge_set = frozenset(tr.edges)
            if edge_set in witness_sets:
                continue
            witness_sets.append(edge_set)
            witnesses.append(e)
            break
        if len(witnesses) >= res.witness_budget:
            logger.debug("phi2%s at n=%d: %d separated non-exiting traces", sign.value, n, len(witnesses))
            return _BorderResult(Truth.FALSE, needed_r, tuple(witnesses))

    value = Truth.TRUE if needed_r <= res.r_max else Truth.UNKNOWN
    return _BorderResult(value, needed_r)


def eval_phi2(src: ColoringSource, sign: Sign, res: Resolution) -> Verdict:
    """Edge sequences crossing ∂Q*ₙ outside some B_r leave Q*ₙ in both directions, for every n."""
    check_resolution(res)
    support = src.finite_support()
    if support is not None:
        reach = max((_dist(t) for t in support), default=0)
        if reach <= res.r_max:
            logger.info("phi2%s: true (finite_support)", sign.value)
            return Verdict(Truth.TRUE, {"support_radius": reach}, "finite_support")
    ns = _n_range(res)
    finite = support is not None
    results = dict(zip(ns, _per_n(lambda n: _phi2_at(src, n, sign, res, finite), ns)))
    value = truth_all(r.value for r in results.values())

    if value == Truth.FALSE:
        n = next(n for n, r in results.items() if r.value == Truth.FALSE)
        witness = {"n": n, "edges": [_edge_json(e) for e in results[n].witnesses]}
        verdict = Verdict(Truth.FALSE, witness, "separated_nonexiting_traces")
    elif value == Truth.TRUE:
        verdict = Verdict(
            Truth.TRUE, {"needed_r": {str(n): r.needed_r for n, r in results.items()}}, "border_traces_exit"
        )
    else:
        undecided = [n for n, r in results.items() if r.value == Truth.UNKNOWN]
        verdict = Verdict(Truth.UNKNOWN, {"undecided_n": undecided}, "budget_exhausted")
    logger.info("phi2%s: %s", sign.value, verdict.value.value)
    return verdict


# ── φ₃ ──


def _depth_axes(t: Tile, sign: Sign) -> tuple[int, int]:
    """The two coordinates whose minimum is qp_depth: (q, h) for +, (−q, −h) for −."""
    q, h = t[0], h_index(t)
    return (q, h) if sign == Sign.PLUS else (-q, -h)


def _exit_evidence(tr: TraceResult, sign: Sign, n_max: int) -> bool:
    """
    The trace leaves the window, and from its first in-window edge at depth
    ≥ n_max onwards neither depth axis ever decreases, over at least
    MIN_EXIT_LENGTH edges that end strictly deeper than they start. A single
    step back on either axis rejects the trace.
    """
    if tr.outcome != TraceOutcome.LEFT_REGION or tr.left_at is None:
        return False
    axes = [_depth_axes(e.a, sign) for e in tr.edges[: tr.left_at]]
    start = next((i for i, (x, y) in enumerate(axes) if min(x, y) >= n_max), None)
    if start is None:
        return False
    suffix = axes[start:]
    if len(suffix) < MIN_EXIT_LENGTH:
        return False
    steady = all(x1 >= x0 and y1 >= y0 for (x0, y0), (x1, y1) in zip(suffix, suffix[1:]))
    return steady and min(suffix[-1]) > min(suffix[0])


def _candidate_traces(src: ColoringSource, res: Resolution) -> Iterator[TraceResult]:
    """Pairs of traces (forward, backward) from edges of black tiles nearest the origin."""
    region = Region(window=res.window)
    blacks = sorted(src.blacks_in(res.window), key=lambda t: (_dist(t), t[0], t[1]))
    seen: set[Edge] = set()
    distinct = 0
    for t in blacks:
        for e in edges_of(src, [t]):
            if e in seen:
                continue
            forward = trace(src, e, TraceDirection.FORWARD, res.trace_budget, region)
            backward = trace(src, e, TraceDirection.BACKWARD, res.trace_budget, region)
            seen.update(forward.edges)
            seen.update(backward.edges)
            yield forward
            yield backward
            distinct += 1
            if distinct >= res.witness_budget:
                return


def eval_phi3(src: ColoringSource, sign: Sign, res: Resolution) -> Verdict:
    """Some black edge's sequence eventually stays in every Q*ₙ."""
    check_resolution(res)
    for tr in _candidate_traces(src, res):
        if _exit_evidence(tr, sign, res.n_max):
            witness = {"edge": _edge_json(tr.start), "direction": tr.direction.value, "in_window_length": tr.left_at}
            verdict = Verdict(Truth.TRUE, witness, "window_exit_suffix")
            logger.info("phi3%s: true (window_exit_suffix)", sign.value)
            return verdict

    support = src.finite_support()
    if support is not None and all(window_predicate(res.window)(t) for t in support):
        verdict = Verdict(Truth.FALSE, {"support_size": len(support)}, "finite_support")
    else:
        verdict = Verdict(Truth.UNKNOWN, None, "budget_exhausted")
    logger.info("phi3%s: %s", sign.value, verdict.value.value)
    return verdict


# ── φ₄ ──


def eval_phi4(src: ColoringSource, res: Resolution) -> Verdict:
    """φ₁ ∧ (φ₂(+) ∨ φ₃(+)) ∧ (φ₂(−) ∨ φ₃(−)) under Kleene connectives."""
    parts = {
        "phi1": eval_phi1(src, res),
        "phi2+": eval_phi2(src, Sign.PLUS, res),
        "phi3+": eval_phi3(src, Sign.PLUS, res),
        "phi2-": eval_phi2(src, Sign.MINUS, res),
        "phi3-": eval_phi3(src, Sign.MINUS, res),
    }
    value = truth_all(
        [
            parts["phi1"].value,
            truth_any([parts["phi2+"].value, parts["phi3+"].value]),
            truth_any([parts["phi2-"].value, parts["phi3-"].value]),
        ]
    )
    logger.info("phi4: %s", value.value)
    return Verdict(value, {k: v.value.value for k, v in parts.items()}, "kleene", parts)


def eval_phi(name: str, src: ColoringSource, res: Resolution) -> Verdict:
    """Dispatch by formula name (see FORMULAS)."""
    if name == "phi1":
        return eval_phi1(src, res)
    if name == "phi1_primed":
        return eval_phi1_primed(src, res)
    if name == "phi4":
        return eval_phi4(src, res)
    if name in ("phi2+", "phi2-", "phi3+", "phi3-"):
        sign = Sign(name[-1])
        return eval_phi2(src, sign, res) if name.startswith("phi2") else eval_phi3(src, sign, res)
    raise ValueError(f"unknown formula: {name!r}")


def verdict_report(formula: str, verdict: Verdict, res: Resolution) -> VerdictReport:
    return VerdictReport(
        formula=formula,
        verdict=verdict.value,
        witness=verdict.witness,
        certificate_kind=verdict.certificate_kind,
        resolution=res,
        parts={k: verdict_report(k, v, res) for k, v in verdict.parts.items()},
    )


# ── Crossing oracle ──


def crossing_oracle(src: ColoringSource, n: int, window: WindowLike) -> bool:
    """
    A black path inside the window joins a black window-edge tile of Q⁺ₙ to a
    black window-edge tile of Q⁻ₙ.
    """
    inside = window_predicate(window)
    if not inside(diagonal_tile(n)):
        raise PreconditionError(f"d_{n} is outside the window")
    plus = _qp(Sign.PLUS, n)
    minus = _qp(Sign.MINUS, n)
    rim = [t for t in window_edge(window) if src.is_black(t)]
    goals = {t for t in rim if qp_member(t, minus)}
    if not goals:
        return False

    queue = deque(t for t in rim if qp_member(t, plus))
    seen = set(queue)
    while queue:
        t = queue.popleft()
        if t in goals:
            return True
        for nb in neighbors(t):
            if nb not in seen and inside(nb) and src.is_black(nb):
                seen.add(nb)
                queue.append(nb)
    return False
