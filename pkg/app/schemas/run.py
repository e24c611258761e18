from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.core.config import settings
from app.schemas.metric import BundleMetricCoeffs, MetricCoeffs
from app.schemas.structure import GroupId, JParams


class Command(str, Enum):
    VERIFY = "verify"
    FLOW = "flow"
    CLASSIFY = "classify"
    TABLE_K1 = "table-k1"
    HSI = "hsi"


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"


class RunConfig(BaseModel):
    """
    Settings of one command line run, built from flags and an optional JSON file.

    When ``group`` is given its catalog structure replaces ``params``.
    """
    command: Command
    group: Optional[GroupId] = Field(None, description="Catalog group; overrides params", examples=["N3"])
    params: JParams = Field(default_factory=JParams)
    metric: MetricCoeffs = Field(default_factory=lambda: MetricCoeffs.diagonal(1.0, 1.0, 1.0))
    bundle_metric: Optional[BundleMetricCoeffs] = None
    tau: float = Field(-1.0, description="Gauduchon parameter of the tangent connection")
    kappa: float = Field(-1.0, description="Gauduchon parameter of the bundle connection")
    alpha_prime: float = Field(0.0, description="Slope parameter α′")
    dt: float = Field(settings.DEFAULT_DT, gt=0, description="Integrator step")
    t_max: float = Field(settings.DEFAULT_T_MAX, gt=0, description="Length of a flow run")
    seed: int = Field(settings.DEFAULT_SEED, description="Seed of the verification draws")
    draws: int = Field(settings.VERIFY_DRAWS, ge=0, description="Number of random draws per suite")
    settle: bool = Field(False, description="hsi: integrate the coupled flow before evaluating")
    k1_grid: list[float] = Field(default_factory=lambda: [-1.0, 0.0, 1.0])
    k2_grid: list[float] = Field(default_factory=lambda: [-1.0, 0.0, 1.0])
    out: Optional[str] = Field(None, description="Output path; stdout when omitted")
    format: OutputFormat = OutputFormat.JSON

    @field_validator("k1_grid", "k2_grid")
    @classmethod
    def validate_grid(cls, v: list[float]) -> list[float]:
        """Grids must not be empty"""
        if not v:
            raise ValueError("classification grids need at least one value")
        return v

    model_config = ConfigDict(
        frozen=True,
        extra="forbid",
        json_schema_extra={
            "example": {
                "command": "flow",
                "group": "N3",
                "metric": {"r2": 1.0, "s2": 1.0, "k2": 1.0},
                "bundle_metric": {"tr2": 1.0, "ts2": 1.0, "tk2": 1.0},
                "tau": -1.0,
                "kappa": -1.0,
                "alpha_prime": 1.0,
                "dt": 0.01,
                "t_max": 10.0,
                "format": "csv",
            }
        }
    )


class VerificationEntry(BaseModel):
    """
    Worst closed-form vs first-principles disagreement of one draw.

    Attributes:
        index: Draw number
        check: Suite name
        max_rel_error: max |closed − brute| / max(1, max |brute|)
        worst_entry: Location of the largest difference, e.g. "(1,3) e^{25}"
        passed: max_rel_error ≤ REL_TOL
    """
    index: int
    check: str
    max_rel_error: float
    worst_entry: Optional[str] = None
    passed: bool

    model_config = ConfigDict(frozen=True)


class VerificationReport(BaseModel):
    """All entries of a verification run."""
    seed: int
    draws: int
    tolerance: float
    entries: list[VerificationEntry] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def failures(self) -> list[VerificationEntry]:
        return [e for e in self.entries if not e.passed]

    def worst(self) -> Optional[VerificationEntry]:
        """Entry with the largest error, None for an empty report."""
        return max(self.entries, key=lambda e: e.max_rel_error, default=None)

    model_config = ConfigDict(frozen=True)
