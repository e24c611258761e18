"""Exterior algebra on the 6-dimensional Lie algebra.

Wedge signs are counted from transpositions on bit masks, the differential is
the Chevalley-Eilenberg operator fixed by de^k = Σ_{i<j} c^k_{ij} e^{ij}, and
bidegrees are read off by rewriting a form in the basis θ = (ζ, ζ̄) of a
complex frame through compound matrices.
"""
import itertools
import logging
from collections import defaultdict
from typing import Sequence

import numpy as np

from app.core.exceptions import InvalidFrameError
from app.schemas.forms import DIM, ComplexFrame, Form, degree_of
from app.schemas.structure import StructureConstants

logger = logging.getLogger(__name__)

_P_BITS = 0b000111


def wedge_sign(a: int, b: int) -> int:
    """Sign of e^a ∧ e^b relative to e^{a|b} for disjoint masks."""
    swaps = 0
    for j in range(DIM):
        if b >> j & 1:
            swaps += degree_of(a >> (j + 1))
    return -1 if swaps % 2 else 1


def _masks_of_degree(k: int) -> list[int]:
    return [sum(1 << i for i in combo) for combo in itertools.combinations(range(DIM), k)]


def _compound(matrix: np.ndarray, k: int) -> np.ndarray:
    """k-th compound matrix: minors det(matrix[I, K]) over increasing index sets."""
    combos = list(itertools.combinations(range(DIM), k))
    out = np.empty((len(combos), len(combos)), dtype=complex)
    for r, rows in enumerate(combos):
        sub = matrix[list(rows)]
        for c, cols in enumerate(combos):
            out[r, c] = np.linalg.det(sub[:, list(cols)])
    return out


class ExteriorService:
    """Wedge product, differential and (p,q) calculus on left-invariant forms."""

    def wedge(self, a: Form, b: Form) -> Form:
        """
        Exterior product.

        Args:
            a: Left factor
            b: Right factor

        Returns:
            Form: a ∧ b
        """
        out: dict[int, complex] = defaultdict(complex)
        for ma, ca in a.items():
            for mb, cb in b.items():
                if ma & mb:
                    continue
                out[ma | mb] += wedge_sign(ma, mb) * ca * cb
        return Form(out)

    def wedge_all(self, *forms: Form) -> Form:
        """Iterated exterior product from left to right."""
        result = Form.scalar(1)
        for f in forms:
            result = self.wedge(result, f)
        return result

    def differentials(self, sc: StructureConstants) -> list[Form]:
        """The 2-forms de¹..de⁶ (zero-based list)."""
        out = []
        for k in range(DIM):
            coeffs = {}
            for i in range(DIM):
                for j in range(i + 1, DIM):
                    value = sc.c[k, i, j]
                    if value != 0:
                        coeffs[(1 << i) | (1 << j)] = value
            out.append(Form(coeffs))
        return out

    def d(self, a: Form, sc: StructureConstants) -> Form:
        """
        Chevalley-Eilenberg differential, the degree +1 antiderivation with
        de^k = Σ_{i<j} c^k_{ij} e^{ij}. Scalars are closed.

        Args:
            a: Form of any (mixed) degree
            sc: Structure constants

        Returns:
            Form: da
        """
        de = self.differentials(sc)
        out: dict[int, complex] = defaultdict(complex)
        for mask, coeff in a.items():
            for p in range(DIM):
                if not mask >> p & 1:
                    continue
                before = mask & ((1 << p) - 1)
                after = mask & ~((1 << (p + 1)) - 1)
                sign = -1 if degree_of(before) % 2 else 1
                for m2, c2 in de[p].items():
                    if m2 & (before | after):
                        continue
                    # before ∧ de^p ∧ after
                    s = wedge_sign(before, m2) * wedge_sign(before | m2, after)
                    out[before | m2 | after] += sign * s * coeff * c2
        return Form(out)

    def evaluate(self, a: Form, *vectors: Sequence[float]) -> complex:
        """
        Evaluate the degree-k part of a form on k vectors, with
        e^{i1...ik}(X1, ..., Xk) = det(X_b[i_a]).

        Args:
            a: Form
            vectors: k vectors given by their components in the dual basis e_1..e_6

        Returns:
            complex: a(X1, ..., Xk)
        """
        k = len(vectors)
        cols = np.array(vectors, dtype=float).T
        total = 0j
        for mask, coeff in a.part(k).items():
            rows = [i for i in range(DIM) if mask >> i & 1]
            total += coeff * np.linalg.det(cols[rows]) if k else coeff
        return total

    def evaluate_on_basis(self, a: Form, *indices: int) -> complex:
        """
        a(e_{i1}, ..., e_{ik}) on basis vectors, 1-based indices in any order.
        """
        if len(set(indices)) < len(indices):
            return 0j
        inversions = sum(1 for p in range(len(indices)) for q in range(p + 1, len(indices)) if indices[p] > indices[q])
        sign = -1 if inversions % 2 else 1
        return sign * a.coefficient(*sorted(indices))

    def _compounds(self, frame: ComplexFrame, k: int) -> tuple[np.ndarray, np.ndarray]:
        cache = frame.compound_cache
        if k not in cache:
            cache[k] = (_compound(frame.inverse, k), _compound(frame.matrix, k))
        return cache[k]

    def to_theta(self, a: Form, frame: ComplexFrame) -> dict[int, complex]:
        """
        Coefficients of a form in the basis θ^K = θ^{k1} ∧ ... of the frame,
        keyed by 6-bit masks over (ζ¹, ζ², ζ³, ζ̄¹, ζ̄², ζ̄³).
        """
        out: dict[int, complex] = {}
        for k in sorted(a.degrees()):
            masks = _masks_of_degree(k)
            index = {m: n for n, m in enumerate(masks)}
            q_comp, _ = self._compounds(frame, k)
            vec = np.zeros(len(masks), dtype=complex)
            for mask, coeff in a.part(k).items():
                vec[index[mask]] = coeff
            for m, value in zip(masks, vec @ q_comp):
                if value != 0:
                    out[m] = value
        return out

    def from_theta(self, coeffs: dict[int, complex], frame: ComplexFrame) -> Form:
        """Inverse of to_theta."""
        by_degree: dict[int, dict[int, complex]] = defaultdict(dict)
        for m, value in coeffs.items():
            by_degree[degree_of(m)][m] = value
        out: dict[int, complex] = {}
        for k, part in by_degree.items():
            masks = _masks_of_degree(k)
            index = {m: n for n, m in enumerate(masks)}
            _, p_comp = self._compounds(frame, k)
            vec = np.zeros(len(masks), dtype=complex)
            for m, value in part.items():
                vec[index[m]] = value
            for m, value in zip(masks, vec @ p_comp):
                if value != 0:
                    out[m] = value
        return Form(out)

    def zeta_monomial(self, frame: ComplexFrame, holomorphic: Sequence[int], antiholomorphic: Sequence[int] = ()) -> Form:
        """ζ^{a1...} ∧ ζ̄^{b1...} written in the e basis, indices 1..3."""
        factors = [frame.zeta_form(a) for a in holomorphic]
        factors += [frame.zeta_form(b, conjugate=True) for b in antiholomorphic]
        return self.wedge_all(*factors)

    def decompose_pq(self, a: Form, frame: ComplexFrame) -> dict[tuple[int, int], Form]:
        """
        Split a form into pure bidegree components with respect to a frame.

        Args:
            a: Form of any (mixed) degree
            frame: Complex frame defining J

        Returns:
            dict: (p, q) -> component; components sum to a

        Raises:
            InvalidFrameError: If the frame cannot be inverted
        """
        try:
            theta = self.to_theta(a, frame)
        except np.linalg.LinAlgError as e:
            logger.error(f"Failed to split form by bidegree: {str(e)}")
            raise InvalidFrameError(f"singular frame: {str(e)}")
        grouped: dict[tuple[int, int], dict[int, complex]] = defaultdict(dict)
        for m, value in theta.items():
            grouped[(degree_of(m & _P_BITS), degree_of(m >> 3))][m] = value
        return {pq: self.from_theta(part, frame) for pq, part in sorted(grouped.items())}

    def bidegree_part(self, a: Form, frame: ComplexFrame, p: int, q: int) -> Form:
        """The (p, q) component of a form, zero when absent."""
        return self.decompose_pq(a, frame).get((p, q), Form())

    def del_delbar(self, a: Form, frame: ComplexFrame, sc: StructureConstants) -> tuple[Form, Form]:
        """
        ∂a and ∂̄a: for each pure (p, q) piece of a, the (p+1, q) and (p, q+1) parts of its differential.

        Args:
            a: Form of any (mixed) degree
            frame: Complex frame defining J
            sc: Structure constants

        Returns:
            tuple: (∂a, ∂̄a)
        """
        holo, antiholo = Form(), Form()
        for (p, q), piece in self.decompose_pq(a, frame).items():
            parts = self.decompose_pq(self.d(piece, sc), frame)
            holo = holo + parts.get((p + 1, q), Form())
            antiholo = antiholo + parts.get((p, q + 1), Form())
        return holo, antiholo

    def ddbar(self, a: Form, frame: ComplexFrame, sc: StructureConstants) -> Form:
        """∂∂̄a."""
        _, antiholo = self.del_delbar(a, frame, sc)
        holo, _ = self.del_delbar(antiholo, frame, sc)
        return holo


def get_exterior_service() -> ExteriorService:
    """
    Factory function for creating ExteriorService instance.

    Returns:
        ExteriorService: Service instance
    """
    return ExteriorService()
