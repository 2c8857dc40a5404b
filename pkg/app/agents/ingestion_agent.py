"""
Ingestion Agent: Loads a scenario file and turns it into a coloring source and
a resolution. First stage of the scenario pipeline.
"""

import json
import logging
from pathlib import Path
from typing import Optional

import numpy as np
from pydantic import ValidationError

from app.models.schemas import BallWindow, Resolution, Scenario
from app.services.clopen import bitstream_from_spec, family_from_spec
from app.services.coloring import CombParamsError, ColoringSource, FiniteSource, family_source, random_source
from app.services.hexgrid import WindowLike
from app.services.reduction import GeometryError, ReductionSource

logger = logging.getLogger(__name__)


class ScenarioError(ValueError):
    """The scenario is well-formed JSON but cannot be run as given."""


def load_scenario(path: str | Path) -> Scenario:
    """
    Parse and validate a scenario file. JSON syntax errors, missing files and
    pydantic validation errors propagate to the caller unchanged.
    """
    with open(path, "r", encoding="utf-8") as f:
        payload = json.load(f)
    return Scenario.model_validate(payload)


def build_source(scenario: Scenario, seed: Optional[int] = None) -> ColoringSource:
    """The scenario's one coloring source; `seed` drives random scenarios."""
    try:
        if scenario.blacks is not None:
            return FiniteSource([tuple(t) for t in scenario.blacks])
        if scenario.family is not None:
            return family_source(scenario.family, scenario.params)
        if scenario.reduction is not None:
            spec = scenario.reduction
            return ReductionSource(
                family_from_spec(spec.family),
                bitstream_from_spec(spec.bits),
                spec.geometry,
                spec.literal,
            )
        assert scenario.random is not None
        rng = np.random.default_rng(0 if seed is None else seed)
        return random_source(rng, BallWindow(radius=scenario.random.radius), scenario.random.density)
    except (CombParamsError, GeometryError, ValidationError) as e:
        raise ScenarioError(str(e)) from e


def resolve_resolution(scenario: Scenario) -> Resolution:
    """The scenario's resolution; a bare `window` fills in the resolution window."""
    if scenario.resolution is not None:
        return scenario.resolution
    if scenario.window is not None:
        return Resolution(window=scenario.window)
    if scenario.random is not None:
        return Resolution(window=BallWindow(radius=scenario.random.radius))
    return Resolution()


def resolve_window(scenario: Scenario, res: Resolution) -> WindowLike:
    """Drawing and oracle window: the explicit `window`, else the resolution's."""
    return scenario.window if scenario.window is not None else res.window


def ingest(scenario: Scenario, seed: Optional[int] = None) -> tuple[ColoringSource, Resolution]:
    src = build_source(scenario, seed)
    res = resolve_resolution(scenario)
    logger.info("ingested scenario %s: source=%s", scenario.name or "<unnamed>", type(src).__name__)
    return src, res
