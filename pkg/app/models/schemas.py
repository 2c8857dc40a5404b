"""
Pydantic v2 models for every JSON contract of the toolkit: windows, resolutions,
verdict/trace/descent reports, and scenario files.
"""

from enum import Enum
from typing import Annotated, Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.config import get_settings

settings = get_settings()

TileJSON = tuple[int, int]

# ──────────────────────────────────────────────
# Enums
# ──────────────────────────────────────────────


class Sign(str, Enum):
    PLUS = "+"
    MINUS = "-"


class Axis(str, Enum):
    H = "H"
    V = "V"


class Truth(str, Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"


class TraceDirection(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


class TraceOutcome(str, Enum):
    PERIODIC = "periodic"
    BUDGET = "budget"
    LEFT_REGION = "left_region"


# ──────────────────────────────────────────────
# Geometry Models
# ──────────────────────────────────────────────


class QuarterPlane(BaseModel):
    """Q⁺ₙ or Q⁻ₙ, anchored at the diagonal tile d_n."""

    model_config = ConfigDict(frozen=True)

    sign: Sign
    n: int


class Line(BaseModel):
    """H-line h at y = h·√3/2, or V-line v at x = v·3/2."""

    model_config = ConfigDict(frozen=True)

    axis: Axis
    index: int


class BallWindow(BaseModel):
    """Graph-distance ball B_radius around a center tile."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["ball"] = "ball"
    center: TileJSON = (0, 0)
    radius: int = Field(..., ge=0)


class RectWindow(BaseModel):
    """Axis-aligned q-range × r-range, bounds inclusive."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["rect"] = "rect"
    q_min: int
    q_max: int
    r_min: int
    r_max: int

    @model_validator(mode="after")
    def _check_bounds(self) -> "RectWindow":
        if self.q_min > self.q_max or self.r_min > self.r_max:
            raise ValueError("rectangle bounds are empty")
        return self


Window = Annotated[Union[BallWindow, RectWindow], Field(discriminator="kind")]


# ──────────────────────────────────────────────
# Evaluation Models
# ──────────────────────────────────────────────


class Resolution(BaseModel):
    """Budget vector for bounded evaluation of the winning-condition formulas."""

    model_config = ConfigDict(frozen=True)

    n_max: int = Field(default_factory=lambda: settings.DEFAULT_N_MAX, ge=1)
    r_max: int = Field(default_factory=lambda: settings.DEFAULT_R_MAX, ge=1)
    size_threshold: int = Field(default_factory=lambda: settings.DEFAULT_SIZE_THRESHOLD, ge=1)
    trace_budget: int = Field(default_factory=lambda: settings.DEFAULT_TRACE_BUDGET, ge=1)
    window: Window = Field(default_factory=lambda: BallWindow(radius=settings.DEFAULT_WINDOW_RADIUS))
    witness_budget: int = Field(default_factory=lambda: settings.DEFAULT_WITNESS_BUDGET, ge=1)
    component_budget: int = Field(default_factory=lambda: settings.DEFAULT_COMPONENT_BUDGET, ge=1)


class VerdictReport(BaseModel):
    """Serialized three-valued verdict with its certificate."""

    formula: str
    verdict: Truth
    witness: Optional[Any] = None
    certificate_kind: str
    resolution: Resolution
    parts: dict[str, "VerdictReport"] = Field(default_factory=dict)


class TraceReport(BaseModel):
    """An exported edge trace."""

    start: tuple[TileJSON, TileJSON]
    direction: TraceDirection
    outcome: TraceOutcome
    period: Optional[int] = None
    left_at: Optional[int] = None
    edges: list[tuple[TileJSON, TileJSON]]
    line_visits: dict[str, int] = Field(default_factory=dict)


class OracleReport(BaseModel):
    n: int
    crossing: bool
    window: Window


class DescentReport(BaseModel):
    """Per-line descent counts for one path of the reduction coloring."""

    path: int
    steps: int
    dsc: list[int]
    counts: list[int]


class PlanViolation(BaseModel):
    check: str
    path: Optional[int] = None
    step: Optional[int] = None
    detail: str


class PlanReport(BaseModel):
    paths: int
    steps: int
    violations: list[PlanViolation]


# ──────────────────────────────────────────────
# Source Definitions
# ──────────────────────────────────────────────


class CombParams(BaseModel):
    """Comb fixture parameters; amplitude of lobe m is offset + step·m unless listed."""

    branch_count_limit: Optional[int] = Field(default=None, ge=1)
    amplitude_offset: int = Field(default_factory=lambda: settings.COMB_AMPLITUDE_OFFSET)
    amplitude_step: int = Field(default_factory=lambda: settings.COMB_AMPLITUDE_STEP)
    amplitudes: Optional[list[int]] = None
    jog_pairs: int = Field(default_factory=lambda: settings.COMB_JOG_PAIRS, ge=1)


class TableEntry(BaseModel):
    a: int = Field(..., ge=0)
    b: int = Field(..., ge=0)
    c: int = Field(..., ge=0)
    d: int = Field(..., ge=0)
    value: bool


class ClopenSpec(BaseModel):
    kind: Literal["const", "bit_test", "table"]
    value: bool = True
    pairing: Literal["cantor4"] = "cantor4"
    entries: list[TableEntry] = Field(default_factory=list)
    default: bool = True


class BitStreamSpec(BaseModel):
    prefix: str = Field(default="", pattern=r"^[01]*$")
    period: str = Field(default="0", min_length=1, pattern=r"^[01]+$")


class GeometrySpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    gap_scale: int = Field(default_factory=lambda: settings.GAP_SCALE, ge=0)
    gap_offset: int = Field(default_factory=lambda: settings.GAP_OFFSET)


class ReductionSpec(BaseModel):
    family: ClopenSpec
    bits: BitStreamSpec = Field(default_factory=BitStreamSpec)
    geometry: GeometrySpec = Field(default_factory=GeometrySpec)
    literal: bool = False


class RandomSpec(BaseModel):
    radius: int = Field(default_factory=lambda: settings.RANDOM_RADIUS, ge=0)
    density: float = Field(default_factory=lambda: settings.RANDOM_DENSITY, ge=0.0, le=1.0)


# ──────────────────────────────────────────────
# Analysis Requests & Scenario
# ──────────────────────────────────────────────


class TraceRequest(BaseModel):
    edge: tuple[TileJSON, TileJSON]
    direction: TraceDirection = TraceDirection.FORWARD
    max_steps: int = Field(default=1000, ge=0)
    region: Optional[QuarterPlane] = None
    lines: list[Line] = Field(default_factory=list)


class OracleRequest(BaseModel):
    n: int


class ComponentRequest(BaseModel):
    """Seed tile and quarter-plane for ψ₁ / ψ′₁."""

    tile: TileJSON
    n: int = 0
    sign: Sign = Sign.PLUS


class DescentRequest(BaseModel):
    path: int = Field(default=0, ge=0)
    steps: int = Field(default=32, ge=0)


class PlanRequest(BaseModel):
    """`paths` left out means every path that can meet the scenario window."""

    paths: Optional[int] = Field(default=None, ge=1)
    steps: int = Field(default=32, ge=1)


class Overlays(BaseModel):
    quarter_planes: list[QuarterPlane] = Field(default_factory=list)
    borders: bool = False
    traces: list[TraceRequest] = Field(default_factory=list)
    paths: list[list[TileJSON]] = Field(default_factory=list)


class Scenario(BaseModel):
    """A scenario file: one coloring source, a resolution and the analyses to run."""

    name: Optional[str] = None
    blacks: Optional[list[TileJSON]] = None
    family: Optional[Literal["comb", "diagonal", "empty", "full"]] = None
    params: dict[str, Any] = Field(default_factory=dict)
    reduction: Optional[ReductionSpec] = None
    random: Optional[RandomSpec] = None
    resolution: Optional[Resolution] = None
    window: Optional[Window] = None
    analyses: list[Union[str, dict[str, Any]]] = Field(default_factory=list)
    overlays: Overlays = Field(default_factory=Overlays)

    @model_validator(mode="after")
    def _one_source(self) -> "Scenario":
        given = [
            key
            for key, value in (
                ("blacks", self.blacks),
                ("family", self.family),
                ("reduction", self.reduction),
                ("random", self.random),
            )
            if value is not None
        ]
        if len(given) != 1:
            raise ValueError(f"scenario needs exactly one source, got {given or 'none'}")
        return self
