"""
Agent Orchestrator: Chains the ingestion → analysis pipeline for one scenario
and one CLI command, producing a deterministic report.
"""

import logging
from typing import Any, Iterable, Optional

from app.agents import analysis_agent, ingestion_agent
from app.agents.analysis_agent import AnalysisEntry
from app.agents.ingestion_agent import ScenarioError
from app.models.schemas import OracleRequest, Scenario
from app.services import render as render_service
from app.services.edgetrace import InvalidEdgeError
from app.services.wincheck import FORMULAS

logger = logging.getLogger(__name__)

COMMANDS = ("analyze", "reduce", "trace", "oracle")

_COMMAND_KINDS = {
    "reduce": analysis_agent.REDUCTION_KINDS,
    "trace": analysis_agent.TRACE_KINDS,
    "oracle": analysis_agent.ORACLE_KINDS,
}


def _requests(scenario: Scenario, command: str, n_max: int) -> list[tuple[str, Any]]:
    """Parsed analyses for `command`, falling back to the command's defaults."""
    parsed = [analysis_agent.parse_entry(entry) for entry in scenario.analyses]
    if command == "analyze":
        return parsed or [analysis_agent.parse_entry(name) for name in FORMULAS]

    kinds = _COMMAND_KINDS[command]
    chosen = [(kind, req) for kind, req in parsed if kind in kinds]
    if command == "trace":
        chosen.extend(("trace", req) for req in scenario.overlays.traces)
    if chosen:
        return chosen

    defaults: Iterable[AnalysisEntry]
    if command == "reduce":
        defaults = ("descent_stats", "plan")
    elif command == "trace":
        defaults = ("cycles",)
    else:
        return [("oracle", OracleRequest(n=n)) for n in range(-n_max, n_max + 1)]
    return [analysis_agent.parse_entry(entry) for entry in defaults]


def run(scenario: Scenario, command: str = "analyze", seed: Optional[int] = None) -> dict[str, Any]:
    """
    Execute every analysis the command selects and return {key: payload} in
    request order. Raises ScenarioError when the scenario cannot be run.
    """
    if command not in COMMANDS:
        raise ScenarioError(f"unknown command: {command!r}")
    src, res = ingestion_agent.ingest(scenario, seed)
    window = ingestion_agent.resolve_window(scenario, res)

    report: dict[str, Any] = {}
    for kind, req in _requests(scenario, command, res.n_max):
        key = analysis_agent.entry_key(kind, req)
        logger.info("running %s", key)
        report[key] = analysis_agent.run_analysis(kind, req, src, res, window)
    return report


def render_scenario(scenario: Scenario, seed: Optional[int] = None) -> str:
    """SVG of the scenario's source inside its window, with its overlays."""
    src, res = ingestion_agent.ingest(scenario, seed)
    window = ingestion_agent.resolve_window(scenario, res)
    try:
        return render_service.render(src, window, scenario.overlays)
    except InvalidEdgeError as e:
        raise ScenarioError(f"render: {e}") from e
