"""Left-invariant forms on the fixed 6-dimensional Lie algebra.

A form is a map from 6-bit masks to complex coefficients: bit ``i - 1`` set
means e^i is a factor, and factors are always read in increasing order, so
mask 0b000011 is e¹² = e¹∧e². Mixed degrees may be stored together.
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Optional, Sequence

import numpy as np

from app.core.exceptions import InvalidFrameError

DIM = 6

# Pairs related by the complex structure: entry (a, b) equals sign * entry (c, d).
J_RELATIONS: tuple[tuple[tuple[int, int], int, tuple[int, int]], ...] = (
    ((2, 3), -1, (1, 4)),
    ((2, 4), 1, (1, 3)),
    ((2, 5), -1, (1, 6)),
    ((2, 6), 1, (1, 5)),
    ((4, 5), -1, (3, 6)),
    ((4, 6), 1, (3, 5)),
)

INDEPENDENT_PAIRS: tuple[tuple[int, int], ...] = (
    (1, 2), (1, 3), (1, 4), (1, 5), (1, 6), (3, 4), (3, 5), (3, 6), (5, 6),
)


def mask_of(*indices: int) -> int:
    """Mask of a set of 1-based indices."""
    mask = 0
    for i in indices:
        mask |= 1 << (i - 1)
    return mask


def indices_of(mask: int) -> tuple[int, ...]:
    """Increasing 1-based indices of a mask."""
    return tuple(i + 1 for i in range(DIM) if mask >> i & 1)


def degree_of(mask: int) -> int:
    return bin(mask).count("1")


class Form:
    """
    Complex-coefficient left-invariant differential form.

    Arithmetic (+, -, scalar *) is provided here; the wedge product and the
    differential live in ExteriorService. Exact zero coefficients are pruned.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Optional[Mapping[int, complex]] = None):
        self._coeffs: dict[int, complex] = {}
        for mask, value in (coeffs or {}).items():
            if not 0 <= mask < 1 << DIM:
                raise ValueError(f"mask {mask} out of range")
            if value != 0:
                self._coeffs[mask] = complex(value)

    @classmethod
    def zero(cls) -> "Form":
        return cls()

    @classmethod
    def scalar(cls, value: complex) -> "Form":
        return cls({0: value})

    @classmethod
    def basis(cls, *indices: int, coeff: complex = 1) -> "Form":
        """
        The monomial coeff · e^{i1} ∧ ... ∧ e^{ik} for 1-based indices in any order.

        Args:
            indices: 1-based indices
            coeff: Scalar factor

        Returns:
            Form: the monomial, zero if an index repeats
        """
        if len(set(indices)) != len(indices):
            return cls()
        inversions = sum(1 for a in range(len(indices)) for b in range(a + 1, len(indices)) if indices[a] > indices[b])
        sign = -1 if inversions % 2 else 1
        return cls({mask_of(*indices): sign * coeff})

    @classmethod
    def from_vector(cls, vector: Sequence[complex]) -> "Form":
        """1-form Σ vector[i] e^{i+1}."""
        return cls({1 << i: vector[i] for i in range(DIM)})

    @property
    def coeffs(self) -> Mapping[int, complex]:
        return dict(self._coeffs)

    def items(self) -> Iterator[tuple[int, complex]]:
        return iter(self._coeffs.items())

    def coefficient(self, *indices: int) -> complex:
        """Coefficient of e^{i1...ik}, indices 1-based and increasing."""
        return self._coeffs.get(mask_of(*indices), 0j)

    def degrees(self) -> set[int]:
        return {degree_of(m) for m in self._coeffs}

    def part(self, degree: int) -> "Form":
        """Homogeneous component of the given degree."""
        return Form({m: c for m, c in self._coeffs.items() if degree_of(m) == degree})

    def to_vector(self) -> np.ndarray:
        """Coefficient vector of the degree-1 part."""
        return np.array([self._coeffs.get(1 << i, 0j) for i in range(DIM)], dtype=complex)

    def is_zero(self, atol: float = 0.0) -> bool:
        return self.max_abs() <= atol

    def max_abs(self) -> float:
        return max((abs(c) for c in self._coeffs.values()), default=0.0)

    def isclose(self, other: "Form", atol: float = 0.0) -> bool:
        """Coefficient-wise equality up to an absolute tolerance."""
        return (self - other).max_abs() <= atol

    def conjugate(self) -> "Form":
        return Form({m: c.conjugate() for m, c in self._coeffs.items()})

    def real(self) -> "Form":
        return Form({m: c.real for m, c in self._coeffs.items()})

    def __add__(self, other: "Form") -> "Form":
        out = dict(self._coeffs)
        for m, c in other._coeffs.items():
            out[m] = out.get(m, 0j) + c
        return Form(out)

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def __neg__(self) -> "Form":
        return Form({m: -c for m, c in self._coeffs.items()})

    def __mul__(self, scalar: complex) -> "Form":
        if isinstance(scalar, Form):
            return NotImplemented
        return Form({m: scalar * c for m, c in self._coeffs.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "Form":
        return self * (1 / scalar)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Form):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self):
        return hash(frozenset(self._coeffs.items()))

    def __bool__(self) -> bool:
        return bool(self._coeffs)

    def __repr__(self) -> str:
        if not self._coeffs:
            return "Form(0)"
        terms = []
        for m in sorted(self._coeffs):
            label = "".join(str(i) for i in indices_of(m)) or "1"
            terms.append(f"{self._coeffs[m]:.6g}·e^{label}")
        return "Form(" + " + ".join(terms) + ")"

    def to_json(self) -> list[dict]:
        """Serialize as a list of {"mask", "re", "im"} records."""
        return [{"mask": m, "re": c.real, "im": c.imag} for m, c in sorted(self._coeffs.items())]

    @classmethod
    def from_json(cls, records: Iterable[dict]) -> "Form":
        out: dict[int, complex] = {}
        for rec in records:
            out[int(rec["mask"])] = out.get(int(rec["mask"]), 0j) + complex(rec["re"], rec["im"])
        return cls(out)


@dataclass(frozen=True, eq=False)
class ComplexFrame:
    """
    A (1,0)-coframe (ζ¹, ζ², ζ³) written in the real coframe e¹..e⁶.

    ``zeta[a, j]`` is the coefficient of e^{j+1} in ζ^{a+1}. The full basis
    θ = (ζ¹, ζ², ζ³, ζ̄¹, ζ̄², ζ̄³) must be invertible.
    """
    zeta: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.zeta, dtype=complex)
        if arr.shape != (3, DIM):
            raise InvalidFrameError(f"frame must be 3x6, got {arr.shape}")
        full = np.vstack([arr, arr.conj()])
        if not np.all(np.isfinite(full)) or np.linalg.matrix_rank(full) < DIM:
            raise InvalidFrameError("complex frame is singular")
        arr.setflags(write=False)
        object.__setattr__(self, "zeta", arr)

    @classmethod
    def standard(cls) -> "ComplexFrame":
        """ζ¹ = e¹ + ie², ζ² = e³ + ie⁴, ζ³ = e⁵ + ie⁶."""
        z = np.zeros((3, DIM), dtype=complex)
        for a in range(3):
            z[a, 2 * a] = 1
            z[a, 2 * a + 1] = 1j
        return cls(z)

    @cached_property
    def matrix(self) -> np.ndarray:
        """6x6 matrix P with θ = P e."""
        return np.vstack([self.zeta, self.zeta.conj()])

    @cached_property
    def inverse(self) -> np.ndarray:
        """Q = P⁻¹, so e = Q θ."""
        return np.linalg.inv(self.matrix)

    def theta(self, a: int) -> Form:
        """θ^a for a in 1..6: ζ¹, ζ², ζ³, ζ̄¹, ζ̄², ζ̄³."""
        return Form.from_vector(self.matrix[a - 1])

    def zeta_form(self, a: int, conjugate: bool = False) -> Form:
        """ζ^a or its conjugate, a in 1..3."""
        return self.theta(a + 3 if conjugate else a)

    @cached_property
    def j_matrix(self) -> np.ndarray:
        """
        Real 6x6 matrix of J on 1-form coefficient row vectors: Jα = α @ M,
        with Jζ = iζ and Jζ̄ = −iζ̄.
        """
        eigen = np.diag([1j, 1j, 1j, -1j, -1j, -1j])
        return (self.inverse @ eigen @ self.matrix).real

    @cached_property
    def compound_cache(self) -> dict:
        """Compound matrices of P and Q per degree, filled by the (p,q) splitter."""
        return {}


class FormMatrix:
    """6x6 matrix of forms addressed with 1-based (i, j) pairs."""

    def __init__(self, entries: Sequence[Sequence[Form]]):
        rows = tuple(tuple(row) for row in entries)
        if len(rows) != DIM or any(len(row) != DIM for row in rows):
            raise ValueError("form matrices are 6x6")
        self._entries = rows

    @classmethod
    def from_upper(cls, upper: Mapping[tuple[int, int], Form]) -> "FormMatrix":
        """
        Build an antisymmetric matrix from entries with i < j; missing entries are zero.
        """
        rows = [[Form() for _ in range(DIM)] for _ in range(DIM)]
        for (i, j), f in upper.items():
            if i >= j:
                raise ValueError(f"upper entries need i < j, got {(i, j)}")
            rows[i - 1][j - 1] = f
            rows[j - 1][i - 1] = -f
        return cls(rows)

    @classmethod
    def from_independent(cls, independent: Mapping[tuple[int, int], Form]) -> "FormMatrix":
        """
        Complete the nine independent entries with the J-relations and antisymmetry.
        """
        upper = dict(independent)
        for target, sign, source in J_RELATIONS:
            upper[target] = sign * independent.get(source, Form())
        return cls.from_upper(upper)

    def __getitem__(self, ij: tuple[int, int]) -> Form:
        i, j = ij
        return self._entries[i - 1][j - 1]

    def pairs(self, upper_only: bool = False) -> Iterator[tuple[int, int]]:
        for i in range(1, DIM + 1):
            for j in range(1, DIM + 1):
                if not upper_only or i < j:
                    yield i, j

    def max_abs(self) -> float:
        return max(self[p].max_abs() for p in self.pairs())

    def compare(self, other: "FormMatrix") -> tuple[float, Optional[tuple[int, int, int]]]:
        """
        Largest absolute coefficient difference and where it occurs.

        Returns:
            tuple: (max difference, (i, j, mask) of the worst entry or None)
        """
        worst, where = 0.0, None
        for i, j in self.pairs():
            diff = self[i, j] - other[i, j]
            for mask, c in diff.items():
                if abs(c) > worst:
                    worst, where = abs(c), (i, j, mask)
        return worst, where

    def to_json(self) -> dict[str, list[dict]]:
        return {f"{i},{j}": self[i, j].to_json() for i, j in self.pairs(upper_only=True)}

    def __repr__(self) -> str:
        return f"{type(self).__name__}(max |coeff| = {self.max_abs():.3g})"


class ConnectionForms(FormMatrix):
    """Connection 1-forms σ^i_j."""


class CurvatureForms(FormMatrix):
    """Curvature 2-forms Ω^i_j."""

