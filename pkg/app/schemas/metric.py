import math

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.exceptions import InvalidMetricError
from app.schemas.common import Complex


class MetricCoeffs(BaseModel):
    """
    Left-invariant Hermitian metric

        2ω = i(r²ζ^{1 1̄} + s²ζ^{2 2̄} + k²ζ^{3 3̄}) + uζ^{1 2̄} − ūζ^{2 1̄}
             + vζ^{2 3̄} − v̄ζ^{3 2̄} + zζ^{1 3̄} − z̄ζ^{3 1̄}.

    Construction raises InvalidMetricError when the form is not positive definite.

    Attributes:
        r2: r², coefficient of ζ^{1 1̄}
        s2: s², coefficient of ζ^{2 2̄}
        k2: k², coefficient of ζ^{3 3̄}
        u: coefficient of ζ^{1 2̄}
        v: coefficient of ζ^{2 3̄}
        z: coefficient of ζ^{1 3̄}
    """
    r2: float = Field(..., description="r²", examples=[1.0])
    s2: float = Field(..., description="s²", examples=[1.0])
    k2: float = Field(..., description="k²", examples=[1.0])
    u: Complex = Field(0j, description="Coefficient of ζ^{1 2̄} as [re, im]", examples=[[0.5, 0.0]])
    v: Complex = Field(0j, description="Coefficient of ζ^{2 3̄} as [re, im]", examples=[[0.0, 0.0]])
    z: Complex = Field(0j, description="Coefficient of ζ^{1 3̄} as [re, im]", examples=[[0.0, 0.0]])

    @model_validator(mode="after")
    def validate_positive_definite(self) -> "MetricCoeffs":
        """
        Check the non-degeneracy inequalities.

        Raises:
            InvalidMetricError: If ω is not positive definite
        """
        if min(self.r2, self.s2, self.k2) <= 0:
            raise InvalidMetricError(f"diagonal coefficients must be positive, got {self.r2}, {self.s2}, {self.k2}")
        if (self.r2 * self.s2 <= abs(self.u) ** 2
                or self.s2 * self.k2 <= abs(self.v) ** 2
                or self.r2 * self.k2 <= abs(self.z) ** 2):
            raise InvalidMetricError("metric coefficients violate r²s² > |u|², s²k² > |v|², r²k² > |z|²")
        if self.det <= 0:
            raise InvalidMetricError(f"metric is not positive definite: D = {self.det}")
        return self

    @property
    def det(self) -> float:
        """D = 8i det ω."""
        u, v, z = self.u, self.v, self.z
        cross = (1j * u.conjugate() * v.conjugate() * z).real
        return (self.r2 * self.s2 * self.k2 + 2 * cross
                - self.k2 * abs(u) ** 2 - self.r2 * abs(v) ** 2 - self.s2 * abs(z) ** 2)

    @property
    def is_almost_diagonal(self) -> bool:
        """v = z = 0."""
        return self.v == 0 and self.z == 0

    @property
    def is_diagonal(self) -> bool:
        """u = v = z = 0."""
        return self.u == 0 and self.is_almost_diagonal

    @classmethod
    def diagonal(cls, r2: float, s2: float, k2: float) -> "MetricCoeffs":
        """Diagonal metric with the given squared coefficients."""
        return cls(r2=r2, s2=s2, k2=k2)

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {"r2": 1.0, "s2": 1.0, "k2": 1.0, "u": [0.5, 0.0], "v": [0.0, 0.0], "z": [0.0, 0.0]}
        }
    )


class AdaptedCoeffs(BaseModel):
    """
    Coefficients of the metric read in its adapted basis.

    Attributes:
        re2: r_e² = r² − |z|²/k²
        se2: s_e² = s² − |v|²/k²
        ke2: k_e² = k²
        ue: u_e = u − i v̄ z / k²
        delta: Δ_e = sqrt(r_e² s_e² − |u_e|²)
    """
    re2: float = Field(..., gt=0)
    se2: float = Field(..., gt=0)
    ke2: float = Field(..., gt=0)
    ue: Complex = Field(0j)
    delta: float = Field(..., gt=0)

    @property
    def u1(self) -> float:
        return self.ue.real

    @property
    def u2(self) -> float:
        return self.ue.imag

    @property
    def re(self) -> float:
        return math.sqrt(self.re2)

    @property
    def ke(self) -> float:
        return math.sqrt(self.ke2)

    model_config = ConfigDict(frozen=True)


class BundleMetricCoeffs(BaseModel):
    """
    Diagonal Hermitian metric H on the holomorphic tangent bundle,
    2H = i(r̃²ζ^{1 1̄} + s̃²ζ^{2 2̄} + k̃²ζ^{3 3̄}).
    """
    tr2: float = Field(..., gt=0, description="r̃²", examples=[1.0])
    ts2: float = Field(..., gt=0, description="s̃²", examples=[1.0])
    tk2: float = Field(..., gt=0, description="k̃²", examples=[1.0])

    def as_metric(self) -> MetricCoeffs:
        """H read as a diagonal MetricCoeffs."""
        return MetricCoeffs.diagonal(self.tr2, self.ts2, self.tk2)

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={"example": {"tr2": 1.0, "ts2": 1.0, "tk2": 1.0}}
    )


class AlmostDiagonalReduction(BaseModel):
    """
    Result of the automorphism σ¹ = ζ¹, σ² = ζ², σ³ = ζ³ − (iv/k²)ζ² − (iz/k²)ζ¹.

    Attributes:
        matrix: 3x3 complex rows expressing (σ¹, σ², σ³) in (ζ¹, ζ², ζ³)
        metric: Coefficients of ω in the new coframe (v = z = 0)
    """
    matrix: list[list[Complex]]
    metric: MetricCoeffs

    model_config = ConfigDict(frozen=True)
