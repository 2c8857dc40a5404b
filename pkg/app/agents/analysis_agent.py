"""
Analysis Agent: Runs one requested analysis against an ingested source and
returns its report entry. Second stage of the scenario pipeline.
"""

import logging
import re
from typing import Any, Union

from pydantic import BaseModel

from app.agents.ingestion_agent import ScenarioError
from app.models.schemas import (
    ComponentRequest,
    DescentRequest,
    OracleReport,
    OracleRequest,
    PlanRequest,
    Resolution,
    TraceOutcome,
    TraceRequest,
)
from app.services import wincheck
from app.services.clopen import CountingBitStream
from app.services.coloring import ColoringSource
from app.services.edgetrace import InvalidEdgeError, boundary_cycles, cycle_orientation, trace_report
from app.services.hexgrid import PreconditionError, WindowLike
from app.services.reduction import (
    ReductionSource,
    descent_stats,
    materialize_paths,
    plan_report,
    window_bit_bound,
)
from app.services.render import run_trace

logger = logging.getLogger(__name__)

AnalysisEntry = Union[str, dict[str, Any]]

FORMULA_KINDS = frozenset(wincheck.FORMULAS) | {"psi1", "psi1_primed"}
REDUCTION_KINDS = frozenset({"descent_stats", "plan", "bit_bound"})
TRACE_KINDS = frozenset({"trace", "cycles"})
ORACLE_KINDS = frozenset({"oracle"})

_ORACLE_CALL = re.compile(r"^oracle\((-?\d+)\)$")

_REQUEST_MODELS: dict[str, type[BaseModel]] = {
    "trace": TraceRequest,
    "oracle": OracleRequest,
    "descent_stats": DescentRequest,
    "plan": PlanRequest,
    "psi1": ComponentRequest,
    "psi1_primed": ComponentRequest,
}


def parse_entry(entry: AnalysisEntry) -> tuple[str, Any]:
    """
    Normalize an analysis entry to (kind, request). Strings name a formula or a
    parameterless analysis ("oracle(2)" carries its n inline); dicts map one
    kind to its request object.
    """
    if isinstance(entry, str):
        m = _ORACLE_CALL.match(entry)
        if m:
            return "oracle", OracleRequest(n=int(m.group(1)))
        if entry in FORMULA_KINDS - {"psi1", "psi1_primed"} or entry in ("cycles", "bit_bound"):
            return entry, None
        if entry in ("descent_stats", "plan"):
            return entry, _REQUEST_MODELS[entry]()
        raise ScenarioError(f"unknown analysis: {entry!r}")
    if len(entry) != 1:
        raise ScenarioError(f"analysis object needs exactly one key, got {sorted(entry)}")
    ((kind, params),) = entry.items()
    model = _REQUEST_MODELS.get(kind)
    if model is None:
        raise ScenarioError(f"unknown analysis: {kind!r}")
    return kind, model.model_validate(params or {})


def entry_key(kind: str, req: Any) -> str:
    """Stable report key for one analysis."""
    if req is None:
        return kind
    if kind == "oracle":
        return f"oracle({req.n})"
    if kind == "trace":
        (aq, ar), (bq, br) = req.edge
        return f"trace(({aq},{ar})->({bq},{br}),{req.direction.value})"
    if kind == "descent_stats":
        return f"descent_stats(path={req.path},steps={req.steps})"
    if kind == "plan":
        paths = "window" if req.paths is None else req.paths
        return f"plan(paths={paths},steps={req.steps})"
    q, r = req.tile
    return f"{kind}(({q},{r}),n={req.n},{req.sign.value})"


def _require_reduction(src: ColoringSource, kind: str) -> ReductionSource:
    if not isinstance(src, ReductionSource):
        raise ScenarioError(f"{kind} needs a reduction source")
    return src


def _bit_bound(src: ReductionSource, window: WindowLike) -> dict[str, int]:
    # A fresh source so the count covers every query the window needs.
    counter = CountingBitStream(src.x)
    fresh = ReductionSource(src.fam, counter, src.geometry.spec, src.oracle.literal)
    blacks = fresh.blacks_in(window)
    return {
        "bound": window_bit_bound(fresh, window),
        "consumed": counter.consumed,
        "queries": counter.queries,
        "blacks": len(blacks),
    }


def run_analysis(kind: str, req: Any, src: ColoringSource, res: Resolution, window: WindowLike) -> Any:
    """Evaluate one parsed analysis and return its JSON-ready payload."""
    try:
        if kind in wincheck.FORMULAS:
            wincheck.check_resolution(res)
            return wincheck.verdict_report(kind, wincheck.eval_phi(kind, src, res), res).model_dump(mode="json")
        if kind in ("psi1", "psi1_primed"):
            evaluate = wincheck.eval_psi1 if kind == "psi1" else wincheck.eval_psi1_primed
            verdict = evaluate(src, req.tile, req.n, req.sign, res)
            return wincheck.verdict_report(kind, verdict, res).model_dump(mode="json")
        if kind == "oracle":
            crossing = wincheck.crossing_oracle(src, req.n, window)
            return OracleReport(n=req.n, crossing=crossing, window=window).model_dump(mode="json")
        if kind == "trace":
            return trace_report(run_trace(src, req), req.lines).model_dump(mode="json")
        if kind == "cycles":
            return [
                {
                    "start": [list(tr.start.a), list(tr.start.b)],
                    "outcome": tr.outcome.value,
                    "period": tr.period,
                    "orientation": cycle_orientation(tr) if tr.outcome == TraceOutcome.PERIODIC else None,
                }
                for tr in boundary_cycles(src, window)
            ]
        if kind == "descent_stats":
            return descent_stats(_require_reduction(src, kind), req.path, req.steps).model_dump(mode="json")
        if kind == "plan":
            reduction = _require_reduction(src, kind)
            paths = req.paths or max(1, reduction.paths_for_window(window))
            plan = materialize_paths(reduction, paths, req.steps)
            return plan_report(plan).model_dump(mode="json")
        if kind == "bit_bound":
            return _bit_bound(_require_reduction(src, kind), window)
    except (PreconditionError, InvalidEdgeError) as e:
        raise ScenarioError(f"{kind}: {e}") from e
    raise ScenarioError(f"unknown analysis: {kind!r}")
