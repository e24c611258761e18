from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.exceptions import InvalidMetricError
from app.schemas.common import Complex
from app.schemas.metric import BundleMetricCoeffs, MetricCoeffs
from app.schemas.structure import GroupId


class ConservedConstants(BaseModel):
    """
    Quantities preserved by the Anomaly flow, fixed by the initial metric:

        c1 = ‖Ψ‖(r²k² − |z|²),  c2 = ‖Ψ‖(s²k² − |v|²),  c3 = ‖Ψ‖(r²v − i z ū),
        c4 = ‖Ψ‖(s²z + i u v),  c5 = ‖Ψ‖(k²u − i z v̄).
    """
    c1: float = Field(..., description="‖Ψ‖(r²k² − |z|²)", examples=[2.8284271247461903])
    c2: float = Field(..., description="‖Ψ‖(s²k² − |v|²)", examples=[2.8284271247461903])
    c3: Complex = Field(0j, description="‖Ψ‖(r²v − i z ū) as [re, im]")
    c4: Complex = Field(0j, description="‖Ψ‖(s²z + i u v) as [re, im]")
    c5: Complex = Field(0j, description="‖Ψ‖(k²u − i z v̄) as [re, im]")

    @model_validator(mode="after")
    def validate_positive(self) -> "ConservedConstants":
        """
        Check c1 > 0, c2 > 0 and c1c2 > |c5|².

        Raises:
            InvalidMetricError: If the constants cannot come from a positive metric
        """
        if self.c1 <= 0 or self.c2 <= 0:
            raise InvalidMetricError(f"c1 and c2 must be positive, got {self.c1}, {self.c2}")
        if self.c1 * self.c2 <= abs(self.c5) ** 2:
            raise InvalidMetricError("conserved constants violate c1·c2 > |c5|²")
        return self

    @property
    def fiber_k2(self) -> float:
        """k² = (c1c2 − |c5|²)/8, constant along the flow."""
        return (self.c1 * self.c2 - abs(self.c5) ** 2) / 8

    def as_list(self) -> list[complex]:
        return [complex(self.c1), complex(self.c2), self.c3, self.c4, self.c5]

    model_config = ConfigDict(frozen=True)


class ModelConstants(BaseModel):
    """
    Constants of the model problem h′ = K1 + K2/h² for h = r².

    Attributes:
        K1: c1·B/4
        K2: −α′·c1·C/16
        B: i∂∂̄ω = B ζ^{12 1̄ 2̄}
        C: r⁴ times the ζ^{12 1̄ 2̄} coefficient of Tr(Ω^τ ∧ Ω^τ)
        alpha_prime: Slope parameter α′
        tau: Gauduchon parameter of the tangent connection
    """
    K1: float
    K2: float
    B: float
    C: float
    alpha_prime: float
    tau: float

    model_config = ConfigDict(frozen=True)


class FlowState(BaseModel):
    """Coefficients of (ω_t, H_t) at flow time t; H is absent for the flat-bundle flow."""
    t: float
    omega: MetricCoeffs
    H: Optional[BundleMetricCoeffs] = None

    model_config = ConfigDict(frozen=True)


class QualitativeKind(str, Enum):
    STATIONARY = "Stationary"
    IMMORTAL = "Immortal"
    ANCIENT = "Ancient"
    ETERNAL = "Eternal"


class QualitativeClass(BaseModel):
    """
    Qualitative behaviour of a model-problem solution.

    Attributes:
        kind: Maximal existence interval type
        asymptote: Short description of the long-time behaviour
        h_star: Stationary point h₀ = sqrt(−K2/K1) when it exists
        slope: Linear growth rate of h in the direction where it is unbounded
        extinction_time: Time at which h reaches 0, when known in closed form
        closed_form_only: Sign case settled from the explicit solution alone (K1 ≠ 0, K2 = 0)
    """
    kind: QualitativeKind
    asymptote: str = ""
    h_star: Optional[float] = None
    slope: Optional[float] = None
    extinction_time: Optional[float] = None
    closed_form_only: bool = False

    model_config = ConfigDict(frozen=True)


class ModelTrajectory(BaseModel):
    """
    Samples (t, h) of a model-problem run.

    Attributes:
        K1: Model constant
        K2: Model constant
        times: Sample times (negative for backward runs)
        h: Values of h = r²
        blow_down: The run stopped because h approached 0 or h′ blew up
        blow_down_time: Last valid time when blow_down is set, an estimate of the extinction time
        analytic: Values come from the explicit solution
    """
    K1: float
    K2: float
    times: list[float]
    h: list[float]
    blow_down: bool = False
    blow_down_time: Optional[float] = None
    analytic: bool = False

    model_config = ConfigDict(frozen=True)


class CoupledTrajectory(BaseModel):
    """Samples of the coupled (ω_t, H_t) flow."""
    states: list[FlowState]
    constants: ConservedConstants
    kappa: float
    tau: float
    alpha_prime: float
    blow_down: bool = False
    blow_down_time: Optional[float] = None

    model_config = ConfigDict(frozen=True)


class HsiResiduals(BaseModel):
    """
    Max-norm residuals of the Hull-Strominger-Ivanov system.

    Attributes:
        bundle_hym: ω² ∧ A^κ
        bundle_pq: (2,0) and (0,2) parts of A^κ
        anomaly: i∂∂̄ω − (α′/4)(Tr Rm^τ∧Rm^τ − Tr A^κ∧A^κ)
        conformally_balanced: d(‖Ψ‖ω²)
        tangent_instanton: ω² ∧ Rm^τ together with the (2,0) and (0,2) parts of Rm^τ
    """
    bundle_hym: float
    bundle_pq: float
    anomaly: float
    conformally_balanced: float
    tangent_instanton: float

    @property
    def max_residual(self) -> float:
        return max(self.bundle_hym, self.bundle_pq, self.anomaly, self.conformally_balanced, self.tangent_instanton)

    def all_below(self, tol: float) -> bool:
        return self.max_residual < tol

    model_config = ConfigDict(frozen=True)


class CollapseProfile(BaseModel):
    """
    Behaviour of (1+t)^{-1}·ω_t along an immortal flat-bundle run.

    Attributes:
        times: Sample times
        r2: r²/(1+t) samples
        s2: s²/(1+t) samples
        k2: k²/(1+t) samples
        vanishing: Coefficients whose scaled value tends to 0
        limit: "torus" when the base block survives, "point" when everything shrinks
    """
    times: list[float]
    r2: list[float]
    s2: list[float]
    k2: list[float]
    vanishing: list[str]
    limit: str

    model_config = ConfigDict(frozen=True)


class K1SignRow(BaseModel):
    """
    Achievable signs of K1 on one group.

    Attributes:
        group: Lie group
        signs: Subset of "<0", "=0", ">0"
        computed: Signs were obtained by sampling the family; otherwise they are quoted
        note: Free text, e.g. why a row is quoted
    """
    group: GroupId
    signs: list[str]
    computed: bool = True
    note: str = ""

    model_config = ConfigDict(frozen=True)


class InstantonReport(BaseModel):
    """
    Instanton conditions on a curvature matrix.

    Attributes:
        pq_ok: All (2,0) and (0,2) parts vanish
        hym_ok: ω² ∧ F^i_j = 0 for every entry
        pq_residual: Largest (2,0)+(0,2) coefficient over the largest curvature coefficient
        hym_residual: Largest ω² ∧ F coefficient over the largest curvature coefficient
    """
    pq_ok: bool
    hym_ok: bool
    pq_residual: float
    hym_residual: float

    model_config = ConfigDict(frozen=True)
