import logging
import math
from typing import Optional

import numpy as np

from app.core.config import settings
from app.core.exceptions import InvalidMetricError, NilflowError
from app.schemas.forms import DIM, ComplexFrame, Form
from app.schemas.metric import AdaptedCoeffs, AlmostDiagonalReduction, MetricCoeffs
from app.schemas.structure import JParams, StructureConstants
from app.services.exterior_service import ExteriorService, get_exterior_service
from app.services.lie_service import LieAlgebraService, get_lie_service

logger = logging.getLogger(__name__)


class HermitianService:
    """Service for invariant Hermitian metrics on (G, J)."""

    def __init__(self, exterior: ExteriorService, lie: LieAlgebraService):
        """
        Initialize Hermitian service.

        Args:
            exterior: Exterior algebra service
            lie: Lie algebra service providing structure constants
        """
        self.exterior = exterior
        self.lie = lie

    def det_quantity(self, m: MetricCoeffs) -> float:
        """
        D = 8i det ω = r²s²k² + 2 Re(i ū v̄ z) − k²|u|² − r²|v|² − s²|z|².

        Args:
            m: Metric coefficients

        Returns:
            float: D > 0

        Raises:
            InvalidMetricError: If D ≤ 0
        """
        value = m.det
        if not value > 0:
            raise InvalidMetricError(f"metric is not positive definite: D = {value}")
        return value

    def psi_norm(self, m: MetricCoeffs) -> float:
        """‖Ψ‖_ω = sqrt(8 / D) for Ψ = ζ¹∧ζ²∧ζ³."""
        return math.sqrt(8.0 / self.det_quantity(m))

    def fundamental_form(self, m: MetricCoeffs, frame: ComplexFrame) -> Form:
        """
        The fundamental form ω of the metric, written in the e basis of a frame.

        Args:
            m: Metric coefficients
            frame: (1,0)-coframe the coefficients refer to

        Returns:
            Form: ω (real 2-form)

        Raises:
            InvalidMetricError: If the metric is not positive definite
        """
        self.det_quantity(m)
        z = self.exterior.zeta_monomial
        two_omega = (1j * (m.r2 * z(frame, (1,), (1,)) + m.s2 * z(frame, (2,), (2,)) + m.k2 * z(frame, (3,), (3,)))
                     + m.u * z(frame, (1,), (2,)) - m.u.conjugate() * z(frame, (2,), (1,))
                     + m.v * z(frame, (2,), (3,)) - m.v.conjugate() * z(frame, (3,), (2,))
                     + m.z * z(frame, (1,), (3,)) - m.z.conjugate() * z(frame, (3,), (1,)))
        return 0.5 * two_omega

    def omega_squared(self, m: MetricCoeffs, frame: ComplexFrame) -> Form:
        """ω ∧ ω."""
        omega = self.fundamental_form(m, frame)
        return self.exterior.wedge(omega, omega)

    def adapted_coeffs(self, m: MetricCoeffs) -> AdaptedCoeffs:
        """
        r_e² = r² − |z|²/k², s_e² = s² − |v|²/k², k_e² = k², u_e = u − i v̄ z/k².

        Raises:
            InvalidMetricError: If Δ_e² = r_e² s_e² − |u_e|² is not positive
        """
        self.det_quantity(m)
        re2 = m.r2 - abs(m.z) ** 2 / m.k2
        se2 = m.s2 - abs(m.v) ** 2 / m.k2
        ue = m.u - 1j * m.v.conjugate() * m.z / m.k2
        delta2 = re2 * se2 - abs(ue) ** 2
        if not delta2 > 0:
            raise InvalidMetricError(f"adapted determinant must be positive, got {delta2}")
        return AdaptedCoeffs(re2=re2, se2=se2, ke2=m.k2, ue=ue, delta=math.sqrt(delta2))

    def adapted_basis(self, params: JParams, m: MetricCoeffs) -> tuple[ComplexFrame, AdaptedCoeffs]:
        """
        Frame in which J is standard and ω = e¹² + e³⁴ + e⁵⁶.

        With τ¹ = e¹+ie², τ² = e³+ie⁴, τ³ = e⁵+ie⁶ the frame is
        ζ¹ = (τ¹ − (iū_e/Δ_e)τ²)/r_e, ζ² = (r_e/Δ_e)τ²,
        ζ³ = τ³/k_e + (iv/k²)ζ² + (iz/k²)ζ¹.

        Args:
            params: Complex structure parameters
            m: Metric coefficients

        Returns:
            tuple: (frame, adapted coefficients)

        Raises:
            InvalidMetricError: If the metric is not positive definite
        """
        adapted = self.adapted_coeffs(m)
        tau = ComplexFrame.standard().zeta
        re, ke, delta = adapted.re, adapted.ke, adapted.delta
        zeta = np.zeros((3, DIM), dtype=complex)
        zeta[0] = (tau[0] - 1j * adapted.ue.conjugate() / delta * tau[1]) / re
        zeta[1] = re / delta * tau[1]
        zeta[2] = tau[2] / ke + 1j * m.v / m.k2 * zeta[1] + 1j * m.z / m.k2 * zeta[0]
        logger.debug(f"Adapted basis for {params!r}: Δ_e = {delta}")
        return ComplexFrame(zeta), adapted

    def relation_factor(self, adapted: AdaptedCoeffs) -> float:
        """Scalar with e¹²³⁴ = (Δ_e²/4) ζ^{12 1̄ 2̄}."""
        return adapted.delta ** 2 / 4

    def reduce_almost_diagonal(self, params: JParams, m: MetricCoeffs) -> AlmostDiagonalReduction:
        """
        Automorphism σ¹ = ζ¹, σ² = ζ², σ³ = ζ³ − (iv/k²)ζ² − (iz/k²)ζ¹ bringing ω to v = z = 0.

        It preserves the structure equations and Ψ = σ¹∧σ²∧σ³.

        Args:
            params: Complex structure parameters
            m: Metric coefficients

        Returns:
            AlmostDiagonalReduction: coframe change and reduced coefficients
        """
        adapted = self.adapted_coeffs(m)
        matrix = [
            [1 + 0j, 0j, 0j],
            [0j, 1 + 0j, 0j],
            [-1j * m.z / m.k2, -1j * m.v / m.k2, 1 + 0j],
        ]
        reduced = MetricCoeffs(r2=adapted.re2, s2=adapted.se2, k2=adapted.ke2, u=adapted.ue)
        return AlmostDiagonalReduction(matrix=matrix, metric=reduced)

    def _frame_and_constants(self, params: JParams, m: MetricCoeffs) -> tuple[ComplexFrame, StructureConstants]:
        frame, adapted = self.adapted_basis(params, m)
        return frame, self.lie.real_structure_constants(params, adapted)

    def balanced_residual(self, params: JParams, m: MetricCoeffs) -> float:
        """
        Closed-form balanced residual
        |s²k² − |v|² + (x+iy)(r²k² − |z|²) − iλ(k²ū + i v z̄)|, normalized by the size of its terms.
        """
        lhs = m.s2 * m.k2 - abs(m.v) ** 2 + params.w * (m.r2 * m.k2 - abs(m.z) ** 2)
        rhs = 1j * params.lam * (m.k2 * m.u.conjugate() + 1j * m.v * m.z.conjugate())
        scale = max(1.0, m.s2 * m.k2, abs(params.w) * m.r2 * m.k2, abs(rhs))
        return abs(lhs - rhs) / scale

    def exterior_balanced_residual(self, params: JParams, m: MetricCoeffs) -> float:
        """max |dω²| in the adapted basis, normalized by the largest structure constant."""
        frame, sc = self._frame_and_constants(params, m)
        d_omega2 = self.exterior.d(self.omega_squared(m, frame), sc)
        return d_omega2.max_abs() / max(1.0, float(np.max(np.abs(sc.c))))

    def is_balanced(self, params: JParams, m: MetricCoeffs) -> bool:
        """
        dω² = 0, decided by the closed-form condition and cross-checked
        against the exterior differential.

        Residuals on opposite sides of INSTANTON_TOL log a warning as long as
        neither exceeds BALANCED_BAND times the tolerance.

        Raises:
            InvalidMetricError: If the metric is not positive definite
            NilflowError: If the two computations disagree outside the band
        """
        try:
            by_forms = self.exterior_balanced_residual(params, m)
            by_formula = self.balanced_residual(params, m)
        except InvalidMetricError:
            raise
        except Exception as e:
            logger.error(f"Failed to evaluate balanced condition: {str(e)}")
            raise NilflowError(f"Failed to evaluate balanced condition: {str(e)}")
        tol = settings.INSTANTON_TOL
        band = settings.BALANCED_BAND * tol
        if (by_forms <= tol and by_formula > band) or (by_formula <= tol and by_forms > band):
            logger.error(f"Balanced predicates disagree for {params!r}, {m!r}: {by_forms:.3e} vs {by_formula:.3e}")
            raise NilflowError("balanced condition: exterior and closed-form computations disagree")
        if (by_forms <= tol) != (by_formula <= tol):
            logger.warning(f"Balanced residuals straddle the tolerance: exterior {by_forms:.3e}, closed form {by_formula:.3e}")
        return by_formula <= tol

    def is_lck(self, params: JParams, m: MetricCoeffs) -> bool:
        """
        Locally conformally Kähler predicate. Only structures with
        ρ = λ = y = 0 and x = 1 are admitted; there the metric is lcK iff
        r²k² − |z|² = s²k² − |v|² and k²u = i z v̄.
        """
        self.det_quantity(m)
        if params.rho != 0 or params.lam != 0 or params.y != 0 or abs(params.x - 1) > settings.ABS_TOL:
            return False
        scale = max(1.0, m.r2 * m.k2, m.s2 * m.k2)
        same_blocks = abs((m.r2 * m.k2 - abs(m.z) ** 2) - (m.s2 * m.k2 - abs(m.v) ** 2)) <= settings.INSTANTON_TOL * scale
        cross = abs(m.k2 * m.u - 1j * m.z * m.v.conjugate()) <= settings.INSTANTON_TOL * scale
        return same_blocks and cross

    def is_pluriclosed(self, params: JParams, m: MetricCoeffs) -> bool:
        """∂∂̄ω = 0, computed numerically."""
        frame, sc = self._frame_and_constants(params, m)
        ddbar = self.exterior.ddbar(self.fundamental_form(m, frame), frame, sc)
        scale = max(1.0, float(np.max(np.abs(sc.c)))) ** 2
        return ddbar.max_abs() / scale <= settings.INSTANTON_TOL


def get_hermitian_service(
    exterior: Optional[ExteriorService] = None,
    lie: Optional[LieAlgebraService] = None,
) -> HermitianService:
    """
    Factory function for creating HermitianService instance.

    Returns:
        HermitianService: Service instance
    """
    exterior = exterior or get_exterior_service()
    return HermitianService(exterior=exterior, lie=lie or get_lie_service(exterior))
