import logging
from typing import Optional

import numpy as np

from app.core.config import settings
from app.core.exceptions import InvalidMetricError, NilflowError
from app.schemas.forms import DIM, ComplexFrame, Form
from app.schemas.metric import AdaptedCoeffs
from app.schemas.structure import (
    ComplexStructureEquations,
    GroupId,
    JParams,
    NilpotencyReport,
    StructureConstants,
)
from app.services.exterior_service import ExteriorService, get_exterior_service

logger = logging.getLogger(__name__)

# Default representatives of the groups reachable with λ = 0.
CATALOG: dict[GroupId, JParams] = {
    GroupId.N2: JParams(rho=0, lam=0.0, x=0.0, y=1.0),
    GroupId.N3: JParams(rho=0, lam=0.0, x=-1.0, y=0.0),
    GroupId.N5: JParams(rho=1, lam=0.0, x=-0.125, y=0.0),
    GroupId.N8: JParams(rho=0, lam=0.0, x=0.0, y=0.0),
}


class LieAlgebraService:
    """Service for the family of 2-step nilpotent Lie algebras with complex structure J."""

    def __init__(self, exterior: ExteriorService):
        """
        Initialize Lie algebra service.

        Args:
            exterior: Exterior algebra service used for d
        """
        self.exterior = exterior

    def complex_structure_equations(self, params: JParams) -> ComplexStructureEquations:
        """
        Structure equations of the (1,0)-coframe: dζ¹ = dζ² = 0 and
        dζ³ = ρ ζ¹² + ζ^{1 1̄} + λ ζ^{1 2̄} + (x+iy) ζ^{2 2̄}.

        Args:
            params: Complex structure parameters

        Returns:
            ComplexStructureEquations: Coefficients of dζ³
        """
        return ComplexStructureEquations(
            zeta_12=params.rho,
            zeta_1_1bar=1.0,
            zeta_1_2bar=params.lam,
            zeta_2_2bar=params.w,
        )

    def structure_form(self, params: JParams, frame: ComplexFrame) -> Form:
        """
        dζ³ of the structure equations written in the e basis of a frame.

        Args:
            params: Complex structure parameters
            frame: Frame whose ζ are used

        Returns:
            Form: the 2-form dζ³
        """
        eq = self.complex_structure_equations(params)
        ext = self.exterior
        return (eq.zeta_12 * ext.zeta_monomial(frame, (1, 2))
                + eq.zeta_1_1bar * ext.zeta_monomial(frame, (1,), (1,))
                + eq.zeta_1_2bar * ext.zeta_monomial(frame, (1,), (2,))
                + eq.zeta_2_2bar * ext.zeta_monomial(frame, (2,), (2,)))

    def real_structure_constants(self, params: JParams, adapted: AdaptedCoeffs) -> StructureConstants:
        """
        Structure constants of the adapted real coframe; de¹ = ... = de⁴ = 0.

        Args:
            params: Complex structure parameters
            adapted: Adapted metric coefficients

        Returns:
            StructureConstants: Constants with only de⁵, de⁶ non-zero

        Raises:
            InvalidMetricError: If Δ_e is not positive
        """
        if not adapted.delta > 0:
            raise InvalidMetricError(f"adapted determinant must be positive, got {adapted.delta}")
        rho, lam, x, y = params.rho, params.lam, params.x, params.y
        ke, re2, u1, u2 = adapted.ke, adapted.re2, adapted.u1, adapted.u2
        delta = adapted.delta
        delta2 = delta * delta
        entries = {
            (5, 1, 3): ke / delta * (rho + lam),
            (5, 2, 4): -ke / delta * (rho - lam),
            (5, 3, 4): 2 * ke / delta2 * (re2 * y - lam * u1),
            (6, 1, 2): -2 * ke / re2,
            (6, 1, 3): 2 * ke * u1 / (re2 * delta),
            (6, 1, 4): ke / (re2 * delta) * (re2 * (rho - lam) + 2 * u2),
            (6, 2, 3): ke / (re2 * delta) * (re2 * (rho + lam) - 2 * u2),
            (6, 2, 4): 2 * ke * u1 / (re2 * delta),
            (6, 3, 4): -2 * ke / (re2 * delta2) * (re2 * re2 * x - lam * re2 * u2 + u1 * u1 + u2 * u2),
        }
        return StructureConstants.from_entries(entries)

    def check_nilpotency(self, sc: StructureConstants) -> NilpotencyReport:
        """
        Jacobi identity, 2-step nilpotency and first Betti number.

        Args:
            sc: Structure constants

        Returns:
            NilpotencyReport: jacobi_ok iff d∘d = 0 on every e^k; b1 = 6 − rank(d on 1-forms)
        """
        scale = max(1.0, float(np.max(np.abs(sc.c))))
        tol = settings.ABS_TOL * scale * scale
        jacobi_ok = all(
            self.exterior.d(self.exterior.d(Form.basis(k), sc), sc).is_zero(tol)
            for k in range(1, DIM + 1)
        )
        # [e_l, [e_i, e_j]] = Σ_k c^k_ij c^m_lk e_m
        nested = np.einsum("kij,mlk->mlij", sc.c, sc.c)
        two_step = bool(np.max(np.abs(nested)) <= tol)
        pairs = [(i, j) for i in range(DIM) for j in range(i + 1, DIM)]
        d_matrix = np.array([[sc.c[k, i, j] for k in range(DIM)] for i, j in pairs])
        b1 = DIM - int(np.linalg.matrix_rank(d_matrix))
        return NilpotencyReport(jacobi_ok=jacobi_ok, two_step=two_step, b1=b1)

    def classify_group(self, params: JParams) -> GroupId:
        """
        Lie group carrying the complex structure, for the λ = 0 catalog.

        N4 and N6 are never returned: no parameter ranges inside the family are
        known to single them out, and λ > 0 is left Unknown.

        Args:
            params: Complex structure parameters

        Returns:
            GroupId: N2, N3, N5, N8 or Unknown
        """
        if params.lam != 0:
            return GroupId.UNKNOWN
        if params.rho == 0:
            if params.y != 0:
                return GroupId.N2
            if params.x != 0:
                return GroupId.N3
            return GroupId.N8
        if 1 + 4 * params.x > 4 * params.y ** 2:
            return GroupId.N5
        return GroupId.UNKNOWN

    def catalog_params(self, group: GroupId) -> JParams:
        """
        Default complex structure on a catalog group.

        Raises:
            NilflowError: If the group has no representative in the family
        """
        try:
            return CATALOG[group]
        except KeyError:
            raise NilflowError(f"group {group.value} has no parameter representative")

    def catalog(self, group: Optional[GroupId] = None) -> dict[GroupId, JParams]:
        """Representatives of all catalog groups, or of one."""
        if group is None:
            return dict(CATALOG)
        return {group: self.catalog_params(group)}


def get_lie_service(exterior: Optional[ExteriorService] = None) -> LieAlgebraService:
    """
    Factory function for creating LieAlgebraService instance.

    Args:
        exterior: Exterior service, a new one if omitted

    Returns:
        LieAlgebraService: Service instance
    """
    return LieAlgebraService(exterior=exterior or get_exterior_service())
