from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.schemas.common import Complex


class GroupId(str, Enum):
    """Nilpotent Lie groups carrying the complex structures of the family."""

    N2 = "N2"
    N3 = "N3"
    N4 = "N4"
    N5 = "N5"
    N6 = "N6"
    N8 = "N8"
    UNKNOWN = "Unknown"


class JParams(BaseModel):
    """
    Coefficients of the complex structure equations
    dζ³ = ρ ζ¹² + ζ^{1 1̄} + λ ζ^{1 2̄} + (x+iy) ζ^{2 2̄}.

    Attributes:
        rho: Coefficient of ζ¹², either 0 or 1
        lam: Coefficient λ ≥ 0 of ζ^{1 2̄} (serialized as ``lambda``)
        x: Real part of the ζ^{2 2̄} coefficient
        y: Imaginary part of the ζ^{2 2̄} coefficient
    """
    rho: int = Field(0, description="Coefficient of ζ¹², 0 or 1", examples=[0])
    lam: float = Field(0.0, alias="lambda", ge=0.0, description="Coefficient of ζ^{1 2̄}", examples=[0.0])
    x: float = Field(0.0, description="Real part of the ζ^{2 2̄} coefficient", examples=[-1.0])
    y: float = Field(0.0, description="Imaginary part of the ζ^{2 2̄} coefficient", examples=[0.0])

    @field_validator("rho")
    @classmethod
    def validate_rho(cls, v: int) -> int:
        """
        Validate ρ.

        Args:
            v: ρ

        Returns:
            int: ρ

        Raises:
            ValueError: If ρ is not 0 or 1
        """
        if v not in (0, 1):
            raise ValueError("rho must be 0 or 1")
        return v

    @property
    def w(self) -> complex:
        """The ζ^{2 2̄} coefficient x + iy."""
        return complex(self.x, self.y)

    @property
    def sign_quantity(self) -> float:
        """ρ + λ² − 2x, whose sign is the sign of K1."""
        return self.rho + self.lam ** 2 - 2 * self.x

    model_config = ConfigDict(
        frozen=True,
        populate_by_name=True,
        json_schema_extra={
            "example": {"rho": 0, "lambda": 0.0, "x": -1.0, "y": 0.0}
        }
    )


class ComplexStructureEquations(BaseModel):
    """
    Structure equations of the (1,0)-coframe. dζ¹ = dζ² = 0 and dζ³ is
    the combination of the four listed coefficients.
    """
    zeta_12: Complex = Field(..., description="Coefficient of ζ¹²")
    zeta_1_1bar: Complex = Field(..., description="Coefficient of ζ^{1 1̄}")
    zeta_1_2bar: Complex = Field(..., description="Coefficient of ζ^{1 2̄}")
    zeta_2_2bar: Complex = Field(..., description="Coefficient of ζ^{2 2̄}")

    model_config = ConfigDict(frozen=True)


class StructureConstants(BaseModel):
    """
    Dense structure constants of a 6-dimensional Lie algebra.

    ``c[k, i, j]`` (zero-based) is the coefficient of e^{ij} in de^k, so that
    de^k = Σ_{i<j} c[k, i, j] e^{ij}. The array is read-only.
    """
    c: np.ndarray = Field(..., description="6x6x6 array antisymmetric in its last two indices")

    @field_validator("c", mode="before")
    @classmethod
    def validate_constants(cls, v) -> np.ndarray:
        """
        Validate shape and antisymmetry and freeze the array.

        Args:
            v: array-like of shape (6, 6, 6)

        Returns:
            np.ndarray: read-only float copy

        Raises:
            ValueError: If the shape is wrong or c[k] is not antisymmetric
        """
        arr = np.array(v, dtype=float)
        if arr.shape != (6, 6, 6):
            raise ValueError(f"structure constants must have shape (6, 6, 6), got {arr.shape}")
        if not np.array_equal(arr, -np.transpose(arr, (0, 2, 1))):
            raise ValueError("structure constants must be antisymmetric in (i, j)")
        arr.setflags(write=False)
        return arr

    @classmethod
    def from_entries(cls, entries: dict[tuple[int, int, int], float]) -> "StructureConstants":
        """
        Build constants from 1-based entries ``{(k, i, j): c^k_{ij}}`` with i < j.

        Args:
            entries: Upper-triangular entries

        Returns:
            StructureConstants: Antisymmetrized constants
        """
        arr = np.zeros((6, 6, 6))
        for (k, i, j), value in entries.items():
            arr[k - 1, i - 1, j - 1] = value
            arr[k - 1, j - 1, i - 1] = -value
        return cls(c=arr)

    @classmethod
    def zeros(cls) -> "StructureConstants":
        """Constants of the abelian Lie algebra."""
        return cls(c=np.zeros((6, 6, 6)))

    def entry(self, k: int, i: int, j: int) -> float:
        """c^k_{ij} with 1-based indices."""
        return float(self.c[k - 1, i - 1, j - 1])

    def to_list(self) -> list:
        """Nested-list form for JSON dumps."""
        return self.c.tolist()

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class NilpotencyReport(BaseModel):
    """
    Algebraic checks on a set of structure constants.

    Attributes:
        jacobi_ok: d∘d = 0 on every e^k
        two_step: [g, [g, g]] = 0
        b1: First Betti number of the Lie algebra
    """
    jacobi_ok: bool
    two_step: bool
    b1: int

    model_config = ConfigDict(frozen=True)
