import logging
import math
from typing import Optional

import numpy as np

from app.core.config import settings
from app.core.exceptions import UnsupportedParametersError
from app.schemas.flow import InstantonReport
from app.schemas.forms import DIM, ComplexFrame, ConnectionForms, CurvatureForms, Form, FormMatrix, mask_of
from app.schemas.metric import AdaptedCoeffs, BundleMetricCoeffs, MetricCoeffs
from app.schemas.structure import JParams, StructureConstants
from app.services import curvature_tables
from app.services.exterior_service import ExteriorService, get_exterior_service
from app.services.hermitian_service import HermitianService, get_hermitian_service
from app.services.lie_service import LieAlgebraService, get_lie_service

logger = logging.getLogger(__name__)

# e¹² + e³⁴ + e⁵⁶, the fundamental form in an adapted basis
ADAPTED_OMEGA = Form.basis(1, 2) + Form.basis(3, 4) + Form.basis(5, 6)


def _j_basis(i: int) -> tuple[int, int]:
    """J on basis vectors: J e_{2p-1} = −e_{2p}, J e_{2p} = e_{2p-1} (1-based)."""
    if i % 2:
        return -1, i + 1
    return 1, i - 1


def bundle_trace_coefficient(rho: float, x: float, y: float, r2: float, s2: float, k2: float,
                             tr2: float, ts2: float, tk2: float, kappa: float) -> float:
    """ζ^{12 1̄ 2̄} coefficient of Tr(A^κ ∧ A^κ) for diagonal ω and H on a λ = 0 structure."""
    q, pp = kappa - 1, kappa + 1
    xy = x * x + y * y
    bracket = (rho * q * ((2 * kappa * r2 * tk2 + k2 * tr2) * ts2 ** 3 + xy * (2 * kappa * s2 * tk2 + k2 * ts2) * tr2 ** 3)
               + 4 * x * q * (xy * tr2 * tr2 + ts2 * ts2) * k2 * tr2 * ts2
               - x * pp * pp * (xy * s2 * tr2 ** 3 + r2 * ts2 ** 3) * tk2)
    return q * tk2 * tk2 / (2 * k2 * tr2 ** 3 * ts2 ** 3) * bracket


class GauduchonService:
    """Gauduchon connections on TG (parameter τ) and on the bundle metric H (parameter κ)."""

    def __init__(self, exterior: ExteriorService, lie: LieAlgebraService, hermitian: HermitianService):
        """
        Initialize Gauduchon connection service.

        Args:
            exterior: Exterior algebra service
            lie: Lie algebra service
            hermitian: Hermitian metric service
        """
        self.exterior = exterior
        self.lie = lie
        self.hermitian = hermitian

    # Tangent bundle

    def connection_one_forms_tau(self, params: JParams, sc: StructureConstants, tau: float) -> ConnectionForms:
        """
        Connection 1-forms of ∇^τ in an adapted basis (ω = e¹² + e³⁴ + e⁵⁶):

            σ^i_j(e_k) = ½(c^i_{jk} − c^k_{ij} + c^j_{ki})
                         − (1−τ)/4 · T(e_i, e_j, e_k) − (1+τ)/4 · C(e_k, e_i, e_j)

        with T(X, Y, Z) = −dω(JX, JY, JZ) and C(X, Y, Z) = dω(JX, Y, Z).

        Args:
            params: Complex structure parameters
            sc: Structure constants of the adapted basis
            tau: Gauduchon parameter

        Returns:
            ConnectionForms: σ^i_j
        """
        c = sc.c
        d_omega = self.exterior.d(ADAPTED_OMEGA, sc)
        on_basis = self.exterior.evaluate_on_basis
        rows = []
        for i in range(1, DIM + 1):
            si, ji = _j_basis(i)
            row = []
            for j in range(1, DIM + 1):
                sj, jj = _j_basis(j)
                coeffs = {}
                for k in range(1, DIM + 1):
                    sk, jk = _j_basis(k)
                    value = 0.5 * (c[i - 1, j - 1, k - 1] - c[k - 1, i - 1, j - 1] + c[j - 1, k - 1, i - 1])
                    torsion = -si * sj * sk * on_basis(d_omega, ji, jj, jk).real
                    chern = sk * on_basis(d_omega, jk, i, j).real
                    value += -(1 - tau) / 4 * torsion - (1 + tau) / 4 * chern
                    if value != 0:
                        coeffs[mask_of(k)] = value
                row.append(Form(coeffs))
            rows.append(row)
        logger.debug(f"Built ∇^τ connection forms for τ = {tau} on {params!r}")
        return ConnectionForms(rows)

    def closed_form_connection_tau(self, params: JParams, adapted: AdaptedCoeffs, tau: float) -> ConnectionForms:
        """
        Connection 1-forms of ∇^τ from their explicit expressions.

        Args:
            params: Complex structure parameters
            adapted: Adapted metric coefficients
            tau: Gauduchon parameter

        Returns:
            ConnectionForms: σ^i_j
        """
        table = curvature_tables.tangent_connection_table(
            tau, params.rho, params.lam, params.x, params.y,
            adapted.re2, adapted.u1, adapted.u2, adapted.ke2, adapted.delta,
        )
        return ConnectionForms.from_independent(
            {ij: Form({mask_of(k): v for k, v in entry.items()}) for ij, entry in table.items()}
        )

    def curvature(self, sigma: FormMatrix, sc: StructureConstants) -> CurvatureForms:
        """
        Ω^i_j = dσ^i_j + Σ_k σ^i_k ∧ σ^k_j.

        Args:
            sigma: Connection 1-forms
            sc: Structure constants

        Returns:
            CurvatureForms: Ω^i_j
        """
        wedge = self.exterior.wedge
        rows = []
        for i in range(1, DIM + 1):
            row = []
            for j in range(1, DIM + 1):
                entry = self.exterior.d(sigma[i, j], sc)
                for k in range(1, DIM + 1):
                    if sigma[i, k] and sigma[k, j]:
                        entry = entry + wedge(sigma[i, k], sigma[k, j])
                row.append(entry)
            rows.append(row)
        return CurvatureForms(rows)

    def closed_form_curvature_tau(self, params: JParams, adapted: AdaptedCoeffs, tau: float) -> CurvatureForms:
        """
        Curvature 2-forms of ∇^τ from their explicit expressions, each scaled by
        k_e²/(2 r_e⁴ Δ_e²), with Ω⁵₆ = −(Ω¹₂ + Ω³₄) + its listed extra terms.

        Args:
            params: Complex structure parameters
            adapted: Adapted metric coefficients
            tau: Gauduchon parameter

        Returns:
            CurvatureForms: Ω^i_j
        """
        table = curvature_tables.tangent_curvature_table(
            tau, params.rho, params.lam, params.x, params.y,
            adapted.re2, adapted.se2, adapted.u1, adapted.u2, adapted.delta,
        )
        scale = adapted.ke2 / (2 * adapted.re2 ** 2 * adapted.delta ** 2)
        entries = {ij: scale * Form({mask_of(k, l): v for (k, l), v in entry.items()}) for ij, entry in table.items()}
        entries[(5, 6)] = entries[(5, 6)] - entries[(1, 2)] - entries[(3, 4)]
        return CurvatureForms.from_independent(entries)

    def trace_wedge(self, curv: FormMatrix) -> Form:
        """Tr(Ω ∧ Ω) = Σ_{i<j} Ω^i_j ∧ Ω^i_j."""
        total = Form()
        for i, j in curv.pairs(upper_only=True):
            if curv[i, j]:
                total = total + self.exterior.wedge(curv[i, j], curv[i, j])
        return total

    def closed_form_trace_tau(self, params: JParams, adapted: AdaptedCoeffs, tau: float) -> complex:
        """
        Coefficient C with Tr(Ω^τ ∧ Ω^τ) = C ζ^{12 1̄ 2̄}.

        Args:
            params: Complex structure parameters
            adapted: Adapted metric coefficients
            tau: Gauduchon parameter

        Returns:
            complex: C (real valued)
        """
        rho, lam, x, y, t = params.rho, params.lam, params.x, params.y, tau
        re2, se2, u1, u2 = adapted.re2, adapted.se2, adapted.u1, adapted.u2
        uu = u1 * u1 + u2 * u2
        xy = x * x + y * y
        s_term = se2 * se2 - 2 * lam * se2 * u2 + 2 * x * uu
        q_term = u1 * u1 - u2 * u2
        r_term = u1 * y * (se2 - lam * u2)
        l_term = lam * se2 - 2 * u2 * x - 2 * u1 * y
        b1 = ((rho - lam * lam + 5 * x) * s_term - 3 * lam * lam * x * q_term - 6 * lam * r_term + 6 * y * y * uu
              + t * (rho + lam * lam - 2 * x) * s_term
              + t * t * ((-2 * rho + x) * s_term - lam * lam * x * q_term - 2 * lam * r_term + 2 * y * y * uu))
        b2 = re2 * lam * ((rho - lam * lam + 2 * x) * l_term - 6 * u2 * xy
                          + t * (rho + lam * lam - 2 * x) * l_term
                          + t * t * (-2 * rho * l_term - 2 * u2 * xy))
        b3 = re2 * re2 * xy * ((rho - lam * lam + 5 * x) + t * (rho + lam * lam - 2 * x) + t * t * (-2 * rho + x))
        delta4 = adapted.delta ** 4
        return complex(-(t - 1) * adapted.ke2 ** 2 / (2 * delta4) * (b1 + b2 + b3))

    def trace_coefficient(self, trace: Form, adapted: AdaptedCoeffs) -> complex:
        """ζ^{12 1̄ 2̄} coefficient of a 4-form, read from its e¹²³⁴ coefficient."""
        return trace.coefficient(1, 2, 3, 4) * self.hermitian.relation_factor(adapted)

    # Bundle metric H

    def check_bundle_gate(self, params: JParams, omega: MetricCoeffs) -> None:
        """
        Raises:
            UnsupportedParametersError: If λ ≠ 0 or ω is not diagonal
        """
        if params.lam != 0:
            raise UnsupportedParametersError(f"bundle connections need λ = 0, got λ = {params.lam}")
        if not omega.is_diagonal:
            raise UnsupportedParametersError("bundle connections need a diagonal metric ω")

    def bundle_connection_kappa(self, params: JParams, omega: MetricCoeffs, H: BundleMetricCoeffs, kappa: float) -> ConnectionForms:
        """
        Connection 1-forms of the Gauduchon connection ∇^κ of H, written in the
        adapted basis of ω.

        The ∇^κ forms of H are computed in H's own adapted basis and carried
        over with M = diag(r/r̃, r/r̃, s/s̃, s/s̃, k/k̃, k/k̃):
        σ^i_j(e_k) = M_i/(M_j M_k) σ̃^i_j(ẽ_k) for i < j, completed by antisymmetry.

        Args:
            params: Complex structure parameters (λ = 0)
            omega: Diagonal metric ω
            H: Diagonal bundle metric
            kappa: Gauduchon parameter of the bundle connection

        Returns:
            ConnectionForms: σ^κ

        Raises:
            UnsupportedParametersError: If λ ≠ 0 or ω is not diagonal
        """
        self.check_bundle_gate(params, omega)
        h_adapted = self.hermitian.adapted_coeffs(H.as_metric())
        h_sigma = self.connection_one_forms_tau(params, self.lie.real_structure_constants(params, h_adapted), kappa)
        ratios = [math.sqrt(omega.r2 / H.tr2)] * 2 + [math.sqrt(omega.s2 / H.ts2)] * 2 + [math.sqrt(omega.k2 / H.tk2)] * 2
        upper = {}
        for i, j in h_sigma.pairs(upper_only=True):
            coeffs = {}
            for mask, value in h_sigma[i, j].items():
                k = mask.bit_length()
                coeffs[mask] = ratios[i - 1] / (ratios[j - 1] * ratios[k - 1]) * value
            upper[(i, j)] = Form(coeffs)
        return ConnectionForms.from_upper(upper)

    def closed_form_bundle_connection_kappa(self, params: JParams, omega: MetricCoeffs, H: BundleMetricCoeffs, kappa: float) -> ConnectionForms:
        """Connection 1-forms of ∇^κ from their explicit expressions."""
        self.check_bundle_gate(params, omega)
        table = curvature_tables.bundle_connection_table(
            kappa, params.rho, params.x, params.y,
            math.sqrt(omega.r2), math.sqrt(omega.s2), math.sqrt(omega.k2), H.tr2, H.ts2, H.tk2,
        )
        return ConnectionForms.from_independent(
            {ij: Form({mask_of(k): v for k, v in entry.items()}) for ij, entry in table.items()}
        )

    def bundle_curvature(self, params: JParams, omega: MetricCoeffs, H: BundleMetricCoeffs, kappa: float) -> CurvatureForms:
        """A^κ from the first-principles bundle connection and the structure constants of ω."""
        _, adapted = self.hermitian.adapted_basis(params, omega)
        sc = self.lie.real_structure_constants(params, adapted)
        return self.curvature(self.bundle_connection_kappa(params, omega, H, kappa), sc)

    def bundle_curvature_closed_form(self, params: JParams, omega: MetricCoeffs, H: BundleMetricCoeffs, kappa: float) -> CurvatureForms:
        """
        Curvature 2-forms A^κ from their explicit expressions.

        Raises:
            UnsupportedParametersError: If λ ≠ 0 or ω is not diagonal
        """
        self.check_bundle_gate(params, omega)
        table = curvature_tables.bundle_curvature_table(
            kappa, params.rho, params.x, params.y,
            omega.r2, omega.s2, omega.k2, H.tr2, H.ts2, H.tk2,
        )
        return CurvatureForms.from_independent(
            {ij: Form({mask_of(k, l): v for (k, l), v in entry.items()}) for ij, entry in table.items()}
        )

    def closed_form_trace_kappa(self, params: JParams, omega: MetricCoeffs, H: BundleMetricCoeffs, kappa: float) -> float:
        """
        Coefficient C_A with Tr(A^κ ∧ A^κ) = C_A ζ^{12 1̄ 2̄}.

        Raises:
            UnsupportedParametersError: If λ ≠ 0 or ω is not diagonal
        """
        self.check_bundle_gate(params, omega)
        return bundle_trace_coefficient(params.rho, params.x, params.y, omega.r2, omega.s2, omega.k2,
                                        H.tr2, H.ts2, H.tk2, kappa)

    # Instanton conditions

    def hym_contractions(self, curv: FormMatrix, omega_form: Form) -> np.ndarray:
        """
        Real 6x6 matrix of ω² ∧ F^i_j / ω³.

        Args:
            curv: Curvature 2-forms
            omega_form: Fundamental form

        Returns:
            np.ndarray: contractions
        """
        wedge = self.exterior.wedge
        omega2 = wedge(omega_form, omega_form)
        volume = wedge(omega2, omega_form).coefficient(1, 2, 3, 4, 5, 6)
        out = np.zeros((DIM, DIM))
        for i, j in curv.pairs():
            out[i - 1, j - 1] = (wedge(omega2, curv[i, j]).coefficient(1, 2, 3, 4, 5, 6) / volume).real
        return out

    def instanton_parts(self, curv: FormMatrix, omega_form: Form, frame: ComplexFrame) -> tuple[float, float]:
        """
        Largest (2,0)+(0,2) coefficient and largest ω²∧F coefficient over all entries of a curvature.

        Returns:
            tuple: (pq residual, hym residual)
        """
        omega2 = self.exterior.wedge(omega_form, omega_form)
        pq, hym = 0.0, 0.0
        for i, j in curv.pairs(upper_only=True):
            if not curv[i, j]:
                continue
            parts = self.exterior.decompose_pq(curv[i, j], frame)
            for bidegree in ((2, 0), (0, 2)):
                if bidegree in parts:
                    pq = max(pq, parts[bidegree].max_abs())
            hym = max(hym, self.exterior.wedge(omega2, curv[i, j]).max_abs())
        return pq, hym

    def instanton_residuals(self, curv: FormMatrix, omega_form: Form, frame: ComplexFrame) -> tuple[float, float]:
        """instanton_parts normalized by the largest curvature coefficient; zero for flat curvature."""
        scale = curv.max_abs()
        if scale == 0:
            return 0.0, 0.0
        pq, hym = self.instanton_parts(curv, omega_form, frame)
        return pq / scale, hym / scale

    def is_instanton(self, curv: FormMatrix, omega_form: Form, frame: ComplexFrame) -> InstantonReport:
        """
        SU(3)-instanton test: ω² ∧ F = 0 and F^{2,0} = F^{0,2} = 0.

        Args:
            curv: Curvature 2-forms
            omega_form: Fundamental form
            frame: Frame defining J

        Returns:
            InstantonReport: Both conditions and their residuals
        """
        pq, hym = self.instanton_residuals(curv, omega_form, frame)
        return InstantonReport(
            pq_ok=pq <= settings.INSTANTON_TOL,
            hym_ok=hym <= settings.INSTANTON_TOL,
            pq_residual=pq,
            hym_residual=hym,
        )

    def nabla_psi_check(self, params: JParams, adapted: AdaptedCoeffs, tau: float) -> bool:
        """
        ∇^τ Ψ = 0, i.e. σ¹₂ + σ³₄ + σ⁵₆ = 0.

        Args:
            params: Complex structure parameters
            adapted: Adapted metric coefficients
            tau: Gauduchon parameter

        Returns:
            bool: True iff Ψ is parallel
        """
        sc = self.lie.real_structure_constants(params, adapted)
        sigma = self.connection_one_forms_tau(params, sc, tau)
        total = sigma[1, 2] + sigma[3, 4] + sigma[5, 6]
        scale = max(1.0, float(np.max(np.abs(sc.c))))
        return total.max_abs() / scale <= settings.INSTANTON_TOL


def get_gauduchon_service(
    exterior: Optional[ExteriorService] = None,
    lie: Optional[LieAlgebraService] = None,
    hermitian: Optional[HermitianService] = None,
) -> GauduchonService:
    """
    Factory function for creating GauduchonService instance.

    Returns:
        GauduchonService: Service instance
    """
    exterior = exterior or get_exterior_service()
    lie = lie or get_lie_service(exterior)
    hermitian = hermitian or get_hermitian_service(exterior, lie)
    return GauduchonService(exterior=exterior, lie=lie, hermitian=hermitian)
