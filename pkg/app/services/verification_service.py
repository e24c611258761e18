"""Random-draw comparison of every printed formula with its first-principles counterpart."""
import logging
from typing import Optional

import numpy as np

from app.core.config import settings
from app.core.exceptions import InvalidMetricError, NilflowError
from app.schemas.forms import Form, FormMatrix, indices_of
from app.schemas.metric import BundleMetricCoeffs, MetricCoeffs
from app.schemas.run import VerificationEntry, VerificationReport
from app.schemas.structure import JParams
from app.services.gauduchon_service import GauduchonService, get_gauduchon_service

logger = logging.getLogger(__name__)

TANGENT_SUITES = ("tangent_connection", "tangent_curvature", "tangent_trace")
BUNDLE_SUITES = ("bundle_connection", "bundle_curvature", "bundle_trace")
SUITES = TANGENT_SUITES + BUNDLE_SUITES

# Redraws allowed for one positive definite metric
MAX_REDRAWS = 1000


def _entry_label(where: Optional[tuple[int, int, int]]) -> Optional[str]:
    if where is None:
        return None
    i, j, mask = where
    return f"({i},{j}) e^{{{''.join(str(k) for k in indices_of(mask))}}}"


class VerificationService:
    """Runs the oracle suites over seeded random draws."""

    def __init__(self, gauduchon: GauduchonService):
        """
        Initialize verification service.

        Args:
            gauduchon: Gauduchon connection service holding both computations
        """
        self.gauduchon = gauduchon
        self.hermitian = gauduchon.hermitian
        self.lie = gauduchon.lie

    def draw_tangent(self, rng: np.random.Generator) -> tuple[JParams, MetricCoeffs, float]:
        """ρ ∈ {0, 1}, λ ∈ [0, 2], x, y ∈ [−2, 2], a positive definite metric and τ ∈ [−3, 3]."""
        params = JParams(
            rho=int(rng.integers(0, 2)),
            lam=float(rng.uniform(0, 2)),
            x=float(rng.uniform(-2, 2)),
            y=float(rng.uniform(-2, 2)),
        )
        for _ in range(MAX_REDRAWS):
            r2, s2, k2 = rng.uniform(0.5, 2.0, size=3)
            u, v, z = rng.uniform(-0.5, 0.5, size=3) + 1j * rng.uniform(-0.5, 0.5, size=3)
            try:
                metric = MetricCoeffs(r2=r2, s2=s2, k2=k2, u=complex(u), v=complex(v), z=complex(z))
                break
            except InvalidMetricError:
                continue
        else:
            raise NilflowError("could not draw a positive definite metric")
        return params, metric, float(rng.uniform(-3, 3))

    def draw_bundle(self, rng: np.random.Generator) -> tuple[JParams, MetricCoeffs, BundleMetricCoeffs, float]:
        """λ = 0 structure, diagonal ω and H with coefficients in [0.5, 2], κ ∈ [−3, 3]."""
        params = JParams(rho=int(rng.integers(0, 2)), x=float(rng.uniform(-2, 2)), y=float(rng.uniform(-2, 2)))
        r2, s2, k2, tr2, ts2, tk2 = (float(v) for v in rng.uniform(0.5, 2.0, size=6))
        return params, MetricCoeffs.diagonal(r2, s2, k2), BundleMetricCoeffs(tr2=tr2, ts2=ts2, tk2=tk2), float(rng.uniform(-3, 3))

    def _matrix_entry(self, index: int, check: str, closed: FormMatrix, brute: FormMatrix) -> VerificationEntry:
        diff, where = closed.compare(brute)
        error = diff / max(1.0, brute.max_abs())
        return VerificationEntry(index=index, check=check, max_rel_error=error,
                                 worst_entry=_entry_label(where), passed=error <= settings.REL_TOL)

    def _trace_entry(self, index: int, check: str, closed: complex, brute: complex, trace: Form) -> VerificationEntry:
        # everything outside e¹²³⁴ must vanish
        off = trace - Form.basis(1, 2, 3, 4, coeff=trace.coefficient(1, 2, 3, 4))
        scale = max(1.0, abs(brute))
        error = abs(closed - brute) / scale
        off_error = off.max_abs() / max(1.0, trace.max_abs())
        passed = error <= settings.REL_TOL and off_error <= settings.INSTANTON_TOL
        label = "ζ^{12 1̄ 2̄}" if error / settings.REL_TOL >= off_error / settings.INSTANTON_TOL else "off-ζ^{12 1̄ 2̄}"
        return VerificationEntry(index=index, check=check, max_rel_error=max(error, off_error),
                                 worst_entry=label, passed=passed)

    def check_tangent(self, index: int, params: JParams, metric: MetricCoeffs, tau: float) -> list[VerificationEntry]:
        """
        Compare σ^τ, Ω^τ and Tr(Ω^τ∧Ω^τ) with their printed forms on one draw.

        Args:
            index: Draw number
            params: Complex structure parameters
            metric: Metric coefficients
            tau: Gauduchon parameter

        Returns:
            list[VerificationEntry]: One entry per tangent suite
        """
        g = self.gauduchon
        adapted = self.hermitian.adapted_coeffs(metric)
        sc = self.lie.real_structure_constants(params, adapted)
        sigma = g.connection_one_forms_tau(params, sc, tau)
        curv = g.curvature(sigma, sc)
        trace = g.trace_wedge(curv)
        return [
            self._matrix_entry(index, "tangent_connection", g.closed_form_connection_tau(params, adapted, tau), sigma),
            self._matrix_entry(index, "tangent_curvature", g.closed_form_curvature_tau(params, adapted, tau), curv),
            self._trace_entry(index, "tangent_trace", g.closed_form_trace_tau(params, adapted, tau),
                              g.trace_coefficient(trace, adapted), trace),
        ]

    def check_bundle(self, index: int, params: JParams, omega: MetricCoeffs, H: BundleMetricCoeffs,
                     kappa: float) -> list[VerificationEntry]:
        """Compare σ^κ, A^κ and Tr(A^κ∧A^κ) with their printed forms on one draw."""
        g = self.gauduchon
        adapted = self.hermitian.adapted_coeffs(omega)
        curv = g.bundle_curvature(params, omega, H, kappa)
        trace = g.trace_wedge(curv)
        return [
            self._matrix_entry(index, "bundle_connection", g.closed_form_bundle_connection_kappa(params, omega, H, kappa),
                               g.bundle_connection_kappa(params, omega, H, kappa)),
            self._matrix_entry(index, "bundle_curvature", g.bundle_curvature_closed_form(params, omega, H, kappa), curv),
            self._trace_entry(index, "bundle_trace", complex(g.closed_form_trace_kappa(params, omega, H, kappa)),
                              g.trace_coefficient(trace, adapted), trace),
        ]

    def run(self, draws: Optional[int] = None, seed: Optional[int] = None) -> VerificationReport:
        """
        Run all six suites on ``draws`` random draws from ``np.random.default_rng(seed)``.

        Tangent and bundle draws come from the same generator, alternating, so
        a seed fixes the whole report.

        Args:
            draws: Number of draws, VERIFY_DRAWS when omitted
            seed: Generator seed, DEFAULT_SEED when omitted

        Returns:
            VerificationReport: Per-draw worst errors

        Raises:
            NilflowError: If a draw cannot be evaluated
        """
        draws = settings.VERIFY_DRAWS if draws is None else draws
        seed = settings.DEFAULT_SEED if seed is None else seed
        if draws == 0:
            logger.warning("Verification requested with zero draws; report is empty")
        rng = np.random.default_rng(seed)
        entries: list[VerificationEntry] = []
        for index in range(draws):
            try:
                entries += self.check_tangent(index, *self.draw_tangent(rng))
                entries += self.check_bundle(index, *self.draw_bundle(rng))
            except NilflowError:
                raise
            except Exception as e:
                logger.error(f"Failed to verify draw {index}: {str(e)}")
                raise NilflowError(f"Failed to verify draw {index}: {str(e)}")
        report = VerificationReport(seed=seed, draws=draws, tolerance=settings.REL_TOL, entries=entries)
        worst = report.worst()
        if worst is not None:
            logger.info(f"Verification finished: worst error {worst.max_rel_error:.3g} in {worst.check} ({worst.worst_entry})")
        return report


def get_verification_service(gauduchon: Optional[GauduchonService] = None) -> VerificationService:
    """
    Factory function for creating VerificationService instance.

    Returns:
        VerificationService: Service instance
    """
    return VerificationService(gauduchon=gauduchon or get_gauduchon_service())
