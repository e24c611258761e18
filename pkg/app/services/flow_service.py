"""Anomaly flow on the invariant metrics of the family.

The flat-bundle flow is carried by the scalar h = r², which solves
h′ = K1 + K2/h²; full metrics are recovered from the conserved
quantities. The coupled flow with a diagonal bundle metric H integrates
(r², r̃², s̃², k̃²) directly.
"""
import logging
import math
from typing import Callable, Optional

import numpy as np

from app.core.config import settings
from app.core.exceptions import (
    IntegrationError,
    InvalidConfigError,
    InvalidMetricError,
    NilflowError,
    UnsupportedParametersError,
)
from app.schemas.flow import (
    CollapseProfile,
    ConservedConstants,
    CoupledTrajectory,
    FlowState,
    HsiResiduals,
    K1SignRow,
    ModelConstants,
    ModelTrajectory,
    QualitativeClass,
    QualitativeKind,
)
from app.schemas.metric import AdaptedCoeffs, BundleMetricCoeffs, MetricCoeffs
from app.schemas.structure import GroupId, JParams
from app.services.gauduchon_service import GauduchonService, bundle_trace_coefficient, get_gauduchon_service
from app.services.hermitian_service import HermitianService

logger = logging.getLogger(__name__)

# Parameter samples per catalog group; each list hits every sign the group admits.
SIGN_SAMPLES: dict[GroupId, list[JParams]] = {
    GroupId.N2: [JParams(rho=0, y=1.0, x=x) for x in (-1.0, -0.5, 0.0, 0.5, 1.0)],
    GroupId.N3: [JParams(rho=0, x=x) for x in (-1.0, 1.0)],
    GroupId.N5: [JParams(rho=1, x=x, y=y) for x, y in ((-0.2, 0.0), (0.0, 0.0), (0.5, 0.0), (1.0, 0.0), (1.0, 0.5))],
    GroupId.N8: [JParams()],
}

# Rows with no parameter representative in the family; signs are quoted, not sampled.
QUOTED_SIGNS: dict[GroupId, list[str]] = {
    GroupId.N4: ["<0", "=0", ">0"],
    GroupId.N6: [">0"],
}

SIGN_LABELS = ("<0", "=0", ">0")


def _rk4_step(f: Callable, y, dt: float):
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _monotone(values: list[float], direction: float) -> bool:
    """Successive values move in the direction of the sign, up to rounding."""
    return all((b - a) * direction >= -1e-12 * max(1.0, abs(a)) for a, b in zip(values, values[1:]))


def _check_run(dt: Optional[float], t_max: Optional[float]) -> tuple[float, float]:
    dt = settings.DEFAULT_DT if dt is None else dt
    t_max = settings.DEFAULT_T_MAX if t_max is None else t_max
    if not (dt > 0 and math.isfinite(dt)):
        raise InvalidConfigError(f"step size must be positive, got {dt}")
    if not (t_max > 0 and math.isfinite(t_max)):
        raise InvalidConfigError(f"time horizon must be positive, got {t_max}")
    return dt, t_max


class AnomalyFlowService:
    """Service for the Anomaly flow reductions, their integration and classification."""

    def __init__(self, hermitian: HermitianService, gauduchon: GauduchonService):
        """
        Initialize Anomaly flow service.

        Args:
            hermitian: Hermitian metric service
            gauduchon: Gauduchon connection service
        """
        self.hermitian = hermitian
        self.gauduchon = gauduchon

    # Conserved quantities

    def conserved_constants(self, omega0: MetricCoeffs) -> ConservedConstants:
        """
        The five quantities preserved by the flow, read off the initial metric.

        Args:
            omega0: Initial metric

        Returns:
            ConservedConstants: c1..c5

        Raises:
            InvalidMetricError: If the metric is not positive definite
        """
        n = self.hermitian.psi_norm(omega0)
        m = omega0
        return ConservedConstants(
            c1=n * (m.r2 * m.k2 - abs(m.z) ** 2),
            c2=n * (m.s2 * m.k2 - abs(m.v) ** 2),
            c3=n * (m.r2 * m.v - 1j * m.z * m.u.conjugate()),
            c4=n * (m.s2 * m.z + 1j * m.u * m.v),
            c5=n * (m.k2 * m.u - 1j * m.z * m.v.conjugate()),
        )

    def almost_diagonal_solution(self, c: ConservedConstants, r2: float) -> MetricCoeffs:
        """
        Metric of the flat-bundle flow when r² = r2:
        s² = (c2/c1)r², u = (c5/c1)r², k² = (c1c2 − |c5|²)/8, v = z = 0.

        Raises:
            InvalidMetricError: If r2 is not positive
        """
        if not r2 > 0:
            raise InvalidMetricError(f"r² must be positive, got {r2}")
        return MetricCoeffs(r2=r2, s2=c.c2 / c.c1 * r2, k2=c.fiber_k2, u=c.c5 / c.c1 * r2)

    def _almost_diagonal_adapted(self, c: ConservedConstants, r2: float) -> AdaptedCoeffs:
        ue = c.c5 / c.c1 * r2
        se2 = c.c2 / c.c1 * r2
        return AdaptedCoeffs(re2=r2, se2=se2, ke2=c.fiber_k2, ue=ue, delta=math.sqrt(r2 * se2 - abs(ue) ** 2))

    # Model problem

    def model_constants(self, params: JParams, omega0: MetricCoeffs, alpha_prime: float, tau: float) -> ModelConstants:
        """
        Constants of the model problem h′ = K1 + K2/h² reached from ω₀.

        B = ((c1c2 − |c5|²)/16)(ρ + λ² − 2x) and C = r⁴·Tr(Ω^τ∧Ω^τ) on the
        almost diagonal solution, which does not depend on r.

        Args:
            params: Complex structure parameters
            omega0: Initial metric, reduced to almost diagonal form first
            alpha_prime: Slope parameter α′
            tau: Gauduchon parameter of the tangent connection

        Returns:
            ModelConstants: K1 = c1B/4, K2 = −α′c1C/16

        Raises:
            InvalidMetricError: If the metric is not positive definite
        """
        reduced = self.hermitian.reduce_almost_diagonal(params, omega0).metric
        c = self.conserved_constants(reduced)
        B = c.fiber_k2 / 2 * (params.rho + params.lam ** 2 - 2 * params.x)
        C = self.gauduchon.closed_form_trace_tau(params, self._almost_diagonal_adapted(c, 1.0), tau).real
        return ModelConstants(
            K1=c.c1 * B / 4,
            K2=-alpha_prime * c.c1 * C / 16,
            B=B,
            C=C,
            alpha_prime=alpha_prime,
            tau=tau,
        )

    def classify_model(self, K1: float, K2: float, h0_init: float) -> QualitativeClass:
        """
        Qualitative type of the solution of h′ = K1 + K2/h², h(0) = h0_init.

        Args:
            K1: Model constant
            K2: Model constant
            h0_init: Initial value of h = r²

        Returns:
            QualitativeClass: Kind and asymptotics

        Raises:
            InvalidConfigError: If h0_init ≤ 0
        """
        if not h0_init > 0:
            raise InvalidConfigError(f"initial h must be positive, got {h0_init}")
        h = h0_init
        if K1 == 0 and K2 == 0:
            return QualitativeClass(kind=QualitativeKind.STATIONARY, asymptote="h constant")
        if K2 == 0:
            logger.warning(f"K2 = 0 with K1 = {K1}: classified from the linear solution only")
            extinction = -h / K1
            if K1 > 0:
                return QualitativeClass(kind=QualitativeKind.IMMORTAL, asymptote="h = h(0) + K1·t", slope=K1,
                                        extinction_time=extinction, closed_form_only=True)
            return QualitativeClass(kind=QualitativeKind.ANCIENT, asymptote="h = h(0) + K1·t", slope=K1,
                                    extinction_time=extinction, closed_form_only=True)
        if K1 == 0:
            if K2 > 0:
                return QualitativeClass(kind=QualitativeKind.IMMORTAL, asymptote="h³ = h(0)³ + 3K2·t",
                                        extinction_time=-h ** 3 / (3 * K2))
            return QualitativeClass(kind=QualitativeKind.ANCIENT, asymptote="h³ = h(0)³ + 3K2·t",
                                    extinction_time=-h ** 3 / (3 * K2))
        if K1 > 0 and K2 > 0:
            return QualitativeClass(kind=QualitativeKind.IMMORTAL, asymptote="h ~ K1·t as t → +∞", slope=K1)
        if K1 < 0 and K2 < 0:
            return QualitativeClass(kind=QualitativeKind.ANCIENT, asymptote="h ~ K1·t as t → −∞", slope=K1)

        h_star = math.sqrt(-K2 / K1)
        if abs(h - h_star) < settings.STATIONARY_TIE * max(1.0, h_star):
            return QualitativeClass(kind=QualitativeKind.STATIONARY, asymptote="h ≡ h₀", h_star=h_star)
        if h > h_star:
            return QualitativeClass(kind=QualitativeKind.ETERNAL, asymptote="h ~ |K1·t| on one side, h → h₀ on the other",
                                    h_star=h_star, slope=K1)
        if K1 > 0:
            return QualitativeClass(kind=QualitativeKind.ANCIENT, asymptote="h → h₀ as t → −∞", h_star=h_star)
        return QualitativeClass(kind=QualitativeKind.IMMORTAL, asymptote="h → h₀ as t → +∞", h_star=h_star)

    def integrate_model(
        self,
        K1: float,
        K2: float,
        h0: float,
        dt: Optional[float] = None,
        t_max: Optional[float] = None,
        backward: bool = False,
        sample_every: int = 1,
    ) -> ModelTrajectory:
        """
        Solve h′ = K1 + K2/h² from h(0) = h0.

        K1 = 0 and K2 = 0 use the explicit solutions; otherwise classical RK4
        with step halving. A step is rejected when h would fall below H_FLOOR
        or |h′| would exceed DERIVATIVE_CEILING; after MAX_STEP_HALVINGS
        rejections the run stops with the blow-down flag.

        Args:
            K1: Model constant
            K2: Model constant
            h0: Initial value
            dt: Step size
            t_max: Length of the time interval
            backward: Integrate towards negative times
            sample_every: Keep every n-th accepted step

        Returns:
            ModelTrajectory: Samples and blow-down information

        Raises:
            InvalidConfigError: If h0, dt or t_max is not positive
        """
        dt, t_max = _check_run(dt, t_max)
        if not h0 > 0:
            raise InvalidConfigError(f"initial h must be positive, got {h0}")
        sign = -1.0 if backward else 1.0
        k1, k2 = sign * K1, sign * K2
        if k1 == 0 or k2 == 0:
            return self._integrate_model_exact(K1, K2, k1, k2, h0, dt, t_max, sign, sample_every)

        def rhs(h: float) -> float:
            return k1 + k2 / (h * h)

        def admissible(h: float) -> bool:
            return math.isfinite(h) and h >= settings.H_FLOOR and abs(rhs(h)) <= settings.DERIVATIVE_CEILING

        t, h = 0.0, h0
        times, values = [0.0], [h0]
        steps, blow_down = 0, False
        while t_max - t > 1e-12 * t_max:
            step = min(dt, t_max - t)
            for _ in range(settings.MAX_STEP_HALVINGS + 1):
                k_1 = rhs(h)
                mid = h + 0.5 * step * k_1
                if mid > 0:
                    k_2 = rhs(mid)
                    mid = h + 0.5 * step * k_2
                if mid > 0:
                    k_3 = rhs(mid)
                    end = h + step * k_3
                    if end > 0:
                        new = h + step / 6 * (k_1 + 2 * k_2 + 2 * k_3 + rhs(end))
                        if admissible(new):
                            break
                step /= 2
            else:
                blow_down = True
                break
            t += step
            h = new
            steps += 1
            if steps % sample_every == 0:
                times.append(sign * t)
                values.append(h)
        if times[-1] != sign * t:
            times.append(sign * t)
            values.append(h)
        if blow_down:
            logger.info(f"Model run blew down at t = {sign * t} (h = {h})")
        return ModelTrajectory(K1=K1, K2=K2, times=times, h=values, blow_down=blow_down,
                               blow_down_time=sign * t if blow_down else None)

    def _integrate_model_exact(self, K1, K2, k1, k2, h0, dt, t_max, sign, sample_every) -> ModelTrajectory:
        if k2 == 0:
            extinction = h0 / -k1 if k1 < 0 else math.inf

            def h_at(s: float) -> float:
                return h0 + k1 * s
        else:
            extinction = h0 ** 3 / (-3 * k2) if k2 < 0 else math.inf

            def h_at(s: float) -> float:
                return math.copysign(abs(h0 ** 3 + 3 * k2 * s) ** (1 / 3), h0 ** 3 + 3 * k2 * s)

        end = min(t_max, extinction)
        n = max(1, math.ceil(end / dt - 1e-9))
        times, values = [], []
        for i in range(0, n + 1):
            s = min(i * dt, end)
            if i % sample_every and i != n:
                continue
            h = h_at(s)
            if h < settings.H_FLOOR:
                break
            times.append(sign * s)
            values.append(h)
        blow_down = extinction <= t_max
        return ModelTrajectory(K1=K1, K2=K2, times=times, h=values, blow_down=blow_down,
                               blow_down_time=sign * extinction if blow_down else None, analytic=True)

    def confirm_classification(self, K1: float, K2: float, h0: float, dt: float = 1e-2, t_max: float = 10.0) -> bool:
        """
        Numerical confirmation of classify_model.

        Forward and backward runs over t_max must blow down exactly on the
        finite ends of the existence interval and move h monotonically in the
        direction of h′(0). On each end without blow-down a long run over
        10³/|K1| (10³/|K2| when K1 = 0) must show the predicted behavior:
        slope K1 within 1% (h³ slope 3K2 when K1 = 0) where h grows, and
        |K1 + K2/h²| < 1e-10·|K1| with h → h₀ where it converges.
        Stationary data must stay put.

        Args:
            K1: Model constant
            K2: Model constant
            h0: Initial value of h
            dt: Step size of the blow-down runs
            t_max: Length of the blow-down runs

        Returns:
            bool: True iff every check agrees with the classification
        """
        cls = self.classify_model(K1, K2, h0)
        forward = self.integrate_model(K1, K2, h0, dt, t_max)
        if cls.kind == QualitativeKind.STATIONARY:
            return not forward.blow_down and max(abs(v - h0) for v in forward.h) <= 1e-10 * max(1.0, h0)
        backward = self.integrate_model(K1, K2, h0, dt, t_max, backward=True)
        expected = {
            QualitativeKind.IMMORTAL: (False, True),
            QualitativeKind.ANCIENT: (True, False),
            QualitativeKind.ETERNAL: (False, False),
        }[cls.kind]
        if (forward.blow_down, backward.blow_down) != expected:
            logger.warning(f"Blow-down pattern of ({K1}, {K2}, {h0}) does not match {cls.kind.value}")
            return False
        direction = math.copysign(1.0, K1 + K2 / h0 ** 2)
        if not (_monotone(forward.h, direction) and _monotone(backward.h, -direction)):
            logger.warning(f"Run from ({K1}, {K2}, {h0}) is not monotone in the direction of h′(0)")
            return False

        horizon = 1e3 / abs(K1 if K1 != 0 else K2)
        step = horizon / 1e4
        if cls.h_star is not None:
            step = min(step, 0.1 * cls.h_star / abs(K1))
        for side, run in ((1.0, forward), (-1.0, backward)):
            if run.blow_down:
                continue
            long = self.integrate_model(K1, K2, h0, step, horizon, backward=side < 0, sample_every=100)
            if long.blow_down or not _monotone(long.h, side * direction):
                return False
            converging = cls.h_star is not None and side * direction * (cls.h_star - h0) > 0
            if converging:
                h = long.h[-1]
                if abs(K1 + K2 / h ** 2) > 1e-10 * abs(K1) or abs(h - cls.h_star) > 1e-8 * cls.h_star:
                    logger.warning(f"Run from ({K1}, {K2}, {h0}) does not settle at h₀ = {cls.h_star}")
                    return False
            elif side * direction > 0:
                mid = len(long.times) // 2
                span = long.times[-1] - long.times[mid]
                if K1 != 0:
                    slope, target = (long.h[-1] - long.h[mid]) / span, K1
                else:
                    slope, target = (long.h[-1] ** 3 - long.h[mid] ** 3) / span, 3 * K2
                if abs(slope - target) > 1e-2 * abs(target):
                    logger.warning(f"Run from ({K1}, {K2}, {h0}) grows with slope {slope}, expected {target}")
                    return False
            else:
                return False
        return True

    def reconstruct_flat_flow(self, c: ConservedConstants, trajectory: ModelTrajectory) -> list[FlowState]:
        """Almost diagonal metrics ω_t along a model-problem run."""
        return [FlowState(t=t, omega=self.almost_diagonal_solution(c, h)) for t, h in zip(trajectory.times, trajectory.h)]

    def gamma1(self, params: JParams, omega0: MetricCoeffs) -> float:
        """
        γ₁(ω₀) = k⁴(ρ + λ² − 2x)/D, whose sign is the sign of K1.

        Raises:
            InvalidMetricError: If the metric is not positive definite
        """
        D = self.hermitian.det_quantity(omega0)
        return omega0.k2 ** 2 * (params.rho + params.lam ** 2 - 2 * params.x) / D

    def k1_sign_table(self) -> list[K1SignRow]:
        """
        Achievable signs of K1 per group, sampled on the unit diagonal metric.

        Groups without a representative in the family (N4, N6) are quoted.

        Returns:
            list[K1SignRow]: Rows ordered by group
        """
        unit = MetricCoeffs.diagonal(1.0, 1.0, 1.0)
        rows = []
        for group in (GroupId.N2, GroupId.N3, GroupId.N4, GroupId.N5, GroupId.N6, GroupId.N8):
            if group in QUOTED_SIGNS:
                rows.append(K1SignRow(group=group, signs=QUOTED_SIGNS[group], computed=False,
                                      note="no parameter representative; signs quoted"))
                continue
            found = set()
            for params in SIGN_SAMPLES[group]:
                K1 = self.model_constants(params, unit, 0.0, 1.0).K1
                found.add(1 if K1 > settings.ABS_TOL else -1 if K1 < -settings.ABS_TOL else 0)
            rows.append(K1SignRow(group=group, signs=[SIGN_LABELS[s + 1] for s in sorted(found)]))
        return rows

    def immortal_and_ancient(self, params: JParams, omega0: MetricCoeffs, tau: float
                             ) -> tuple[tuple[float, ModelConstants, QualitativeClass], tuple[float, ModelConstants, QualitativeClass]]:
        """
        An immortal and an ancient flat-bundle solution from the same ω₀,
        obtained by choosing the sign (and size) of α′.

        When the wanted kind depends on the position of h relative to h₀, α′
        is chosen so that h₀ = 2h(0).

        Args:
            params: Complex structure parameters
            omega0: Initial metric
            tau: Gauduchon parameter

        Returns:
            tuple: ((α′, constants, class) of the immortal run, same for the ancient run)

        Raises:
            UnsupportedParametersError: If K1 = 0 or the trace coefficient C vanishes
        """
        base = self.model_constants(params, omega0, 1.0, tau)
        if abs(base.K1) <= settings.ABS_TOL:
            raise UnsupportedParametersError("immortal and ancient solutions need K1 ≠ 0")
        if base.C == 0:
            raise UnsupportedParametersError(f"Tr(Ω^τ∧Ω^τ) vanishes for τ = {tau}; K2 cannot be tuned")
        h0 = self.hermitian.adapted_coeffs(omega0).re2
        c1 = self.conserved_constants(omega0).c1
        K1 = base.K1
        if K1 > 0:
            targets = (K1 * h0 ** 2, -4 * K1 * h0 ** 2)
        else:
            targets = (-4 * K1 * h0 ** 2, K1 * h0 ** 2)
        out = []
        for K2 in targets:
            alpha_prime = -16 * K2 / (c1 * base.C)
            constants = self.model_constants(params, omega0, alpha_prime, tau)
            out.append((alpha_prime, constants, self.classify_model(constants.K1, constants.K2, h0)))
        return out[0], out[1]

    def collapse_diagnostic(self, c: ConservedConstants, trajectory: ModelTrajectory) -> CollapseProfile:
        """
        Rescaled coefficients (1+t)^{-1}(r², s², k²) along an immortal run.

        A coefficient vanishes when its last rescaled sample is below
        COLLAPSE_RATIO times its first. The limit is a torus when only the
        fibre shrinks and a point when everything does. Since the rescaled k²
        decays like (1+t)^{-1}, nothing can register before t = 1/COLLAPSE_RATIO − 1
        (99 by default); shorter runs come back "undetermined" with a warning.

        Raises:
            InvalidConfigError: If the trajectory blew down
        """
        if trajectory.blow_down:
            raise InvalidConfigError("collapse diagnostic needs a trajectory without blow-down")
        times = trajectory.times
        if times[-1] < 1 / settings.COLLAPSE_RATIO - 1:
            logger.warning(f"Run ends at t = {times[-1]}, before the fibre can fall below COLLAPSE_RATIO")
        r2 = [h / (1 + t) for t, h in zip(times, trajectory.h)]
        s2 = [c.c2 / c.c1 * v for v in r2]
        k2 = [c.fiber_k2 / (1 + t) for t in times]
        vanishing = [name for name, seq in (("r2", r2), ("s2", s2), ("k2", k2))
                     if seq[-1] < settings.COLLAPSE_RATIO * seq[0]]
        if len(vanishing) == 3:
            limit = "point"
        elif vanishing == ["k2"]:
            limit = "torus"
        else:
            limit = "undetermined"
        return CollapseProfile(times=times, r2=r2, s2=s2, k2=k2, vanishing=vanishing, limit=limit)

    # Coupled flow with a bundle metric

    def _check_coupled(self, params: JParams, c: ConservedConstants) -> None:
        if params.lam != 0:
            raise UnsupportedParametersError(f"the coupled flow needs λ = 0, got λ = {params.lam}")
        if c.c3 != 0 or c.c4 != 0 or c.c5 != 0:
            raise UnsupportedParametersError("the coupled flow needs a diagonal metric ω")

    def _coupled_field(self, params: JParams, c: ConservedConstants, kappa: float, tau: float,
                       alpha_prime: float) -> Callable[[np.ndarray], np.ndarray]:
        rho, x, y = params.rho, params.x, params.y
        xy = x * x + y * y
        c1, c2, k2 = c.c1, c.c2, c.fiber_k2
        C = self.gauduchon.closed_form_trace_tau(params, self._almost_diagonal_adapted(c, 1.0), tau).real
        K1 = c1 * k2 / 8 * (rho - 2 * x)
        K2 = -alpha_prime * c1 * C / 16
        p, q = (kappa + 1) ** 2, (kappa - 1) ** 2

        def field(state: np.ndarray) -> np.ndarray:
            r2, tr2, ts2, tk2 = state
            trace_a = bundle_trace_coefficient(rho, x, y, r2, c2 / c1 * r2, k2, tr2, ts2, tk2, kappa)
            d_r2 = K1 + K2 / (r2 * r2) + alpha_prime * c1 * trace_a / 16
            d_tr2 = ((2 * (c2 * p - c1 * rho * q) * r2 * tk2 - c1 * c2 * (kappa - 1) * (c1 * x + c2) * tr2)
                     * tk2 / (3 * c1 * c2 * c2 * r2 * r2 * tr2))
            d_ts2 = ((2 * (c1 * p * xy - c2 * rho * q) * r2 * tk2 - c1 * c1 * (kappa - 1) * (c1 * xy + c2 * x) * ts2)
                     * tk2 / (3 * c1 * c1 * c2 * r2 * r2 * ts2))
            d_tk2 = (2 * (rho * q * (c1 * c1 * ts2 * ts2 + c2 * c2 * tr2 * tr2) - c1 * c2 * p * (xy * tr2 * tr2 + ts2 * ts2))
                     * tk2 ** 3 / (3 * c1 * c1 * c2 * c2 * r2 * tr2 * tr2 * ts2 * ts2))
            return np.array([d_r2, d_tr2, d_ts2, d_tk2])

        return field

    def coupled_rhs(self, params: JParams, state: FlowState, c: ConservedConstants,
                    kappa: float, tau: float, alpha_prime: float) -> tuple[float, float, float, float]:
        """
        Time derivatives of (r², r̃², s̃², k̃²) for diagonal ω and H on a λ = 0 structure.

        dr²/dt = K1 + K2/r⁴ + (α′c1/16)·C_A, with C_A the ζ^{12 1̄ 2̄} coefficient of
        Tr(A^κ∧A^κ) at the current state; the H equations are the diagonal
        reduction of the Hermitian-Yang-Mills-type evolution of H.

        Args:
            params: Complex structure parameters (λ = 0)
            state: Current state, H required
            c: Conserved constants of ω₀ (c3 = c4 = c5 = 0)
            kappa: Gauduchon parameter of the bundle connection
            tau: Gauduchon parameter of the tangent connection
            alpha_prime: Slope parameter α′

        Returns:
            tuple: (dr²/dt, dr̃²/dt, ds̃²/dt, dk̃²/dt)

        Raises:
            UnsupportedParametersError: If λ ≠ 0, ω is not diagonal or H is missing
        """
        self._check_coupled(params, c)
        if state.H is None:
            raise UnsupportedParametersError("the coupled flow needs a bundle metric H")
        if not state.omega.is_diagonal:
            raise UnsupportedParametersError("the coupled flow needs a diagonal metric ω")
        field = self._coupled_field(params, c, kappa, tau, alpha_prime)
        y = np.array([state.omega.r2, state.H.tr2, state.H.ts2, state.H.tk2])
        return tuple(float(v) for v in field(y))

    def integrate_coupled(
        self,
        params: JParams,
        omega0: MetricCoeffs,
        H0: BundleMetricCoeffs,
        kappa: float,
        tau: float,
        alpha_prime: float,
        dt: Optional[float] = None,
        t_max: Optional[float] = None,
        sample_every: int = 1,
    ) -> CoupledTrajectory:
        """
        RK4 integration of the coupled flow from diagonal (ω₀, H₀).

        A step is halved while any coefficient would become non-positive or
        non-finite; after MAX_STEP_HALVINGS halvings the run stops with the
        blow-down flag.

        Args:
            params: Complex structure parameters (λ = 0)
            omega0: Diagonal initial metric
            H0: Initial bundle metric
            kappa: Gauduchon parameter of the bundle connection
            tau: Gauduchon parameter of the tangent connection
            alpha_prime: Slope parameter α′
            dt: Step size
            t_max: Length of the run
            sample_every: Keep every n-th accepted step

        Returns:
            CoupledTrajectory: Sampled states

        Raises:
            InvalidConfigError: If dt or t_max is not positive
            UnsupportedParametersError: If λ ≠ 0 or ω₀ is not diagonal
            IntegrationError: If the right-hand side is not finite at t = 0
        """
        dt, t_max = _check_run(dt, t_max)
        if not omega0.is_diagonal:
            raise UnsupportedParametersError("the coupled flow needs a diagonal metric ω")
        c = self.conserved_constants(omega0)
        self._check_coupled(params, c)
        field = self._coupled_field(params, c, kappa, tau, alpha_prime)
        y = np.array([omega0.r2, H0.tr2, H0.ts2, H0.tk2])
        if not np.all(np.isfinite(field(y))):
            raise IntegrationError("coupled right-hand side is not finite at t = 0")

        def to_state(t: float, v: np.ndarray) -> FlowState:
            return FlowState(t=t, omega=self.almost_diagonal_solution(c, float(v[0])),
                             H=BundleMetricCoeffs(tr2=float(v[1]), ts2=float(v[2]), tk2=float(v[3])))

        t = 0.0
        states = [to_state(t, y)]
        steps, blow_down = 0, False
        with np.errstate(all="ignore"):
            while t_max - t > 1e-12 * t_max:
                step = min(dt, t_max - t)
                for _ in range(settings.MAX_STEP_HALVINGS + 1):
                    new = _rk4_step(field, y, step)
                    if np.all(np.isfinite(new)) and np.all(new > 0):
                        break
                    step /= 2
                else:
                    blow_down = True
                    break
                t += step
                y = new
                steps += 1
                if steps % sample_every == 0:
                    states.append(to_state(t, y))
        if states[-1].t != t:
            states.append(to_state(t, y))
        if blow_down:
            logger.info(f"Coupled run blew down at t = {t}")
        return CoupledTrajectory(states=states, constants=c, kappa=kappa, tau=tau, alpha_prime=alpha_prime,
                                 blow_down=blow_down, blow_down_time=t if blow_down else None)

    def stationary_kappa_values(self, c: ConservedConstants, rho: int, params: Optional[JParams] = None) -> list[float]:
        """
        Values of κ for which the H equations vanish identically from a balanced ω₀,
        the roots of (c2 − ρc1)κ² + 2(c2 + ρc1)κ + (c2 − ρc1).

        Args:
            c: Conserved constants of ω₀
            rho: ρ of the complex structure
            params: Complex structure, only used to warn when ω₀ is not balanced

        Returns:
            list[float]: Sorted distinct roots
        """
        if params is not None and abs(c.c1 * params.w + c.c2) > settings.INSTANTON_TOL * max(c.c1, c.c2):
            logger.warning("stationary κ values assume a balanced initial metric; c1(x+iy) + c2 ≠ 0")
        if rho == 0:
            return [-1.0]
        a = c.c2 - c.c1
        if abs(a) <= settings.ABS_TOL * max(c.c1, c.c2):
            return [0.0]
        root = 2 * math.sqrt(c.c1 * c.c2)
        return sorted([(c.c1 + c.c2 - root) / (c.c1 - c.c2), (c.c1 + c.c2 + root) / (c.c1 - c.c2)])

    def freezing_alpha_prime(self, params: JParams, omega0: MetricCoeffs, tau: float,
                             H: Optional[BundleMetricCoeffs] = None, kappa: Optional[float] = None) -> float:
        """
        α′ for which dr²/dt = 0 at t = 0; with a bundle metric the Tr(A^κ∧A^κ) term is included.

        Raises:
            UnsupportedParametersError: If no α′ freezes r², or the bundle gate fails
        """
        mc = self.model_constants(params, omega0, 1.0, tau)
        c = self.conserved_constants(omega0)
        h0 = self.hermitian.adapted_coeffs(omega0).re2
        trace_a = 0.0
        if H is not None:
            if kappa is None:
                raise UnsupportedParametersError("a bundle metric needs κ")
            trace_a = self.gauduchon.closed_form_trace_kappa(params, omega0, H, kappa)
        per_alpha = c.c1 * (trace_a - mc.C / h0 ** 2) / 16
        if abs(per_alpha) <= settings.ABS_TOL:
            raise UnsupportedParametersError("the anomaly term vanishes; no α′ freezes r²")
        return -mc.K1 / per_alpha

    def chern_bundle_closed_form(self, c: ConservedConstants, r2: float, H0: BundleMetricCoeffs, t: float) -> BundleMetricCoeffs:
        """
        H_t for κ = 1 on N3 (x = −1, y = 0) with r² frozen and r̃₀ = s̃₀:
        r̃¹² = At + r̃₀¹² with A = 16 r̃₀⁸ k̃₀⁴/(c1c2 r²), s̃ = r̃, k̃ = r̃₀² k̃₀/r̃².

        Raises:
            UnsupportedParametersError: If r̃₀ ≠ s̃₀
            InvalidConfigError: If t lies before the start of the solution
        """
        if abs(H0.tr2 - H0.ts2) > settings.ABS_TOL * max(H0.tr2, H0.ts2):
            raise UnsupportedParametersError("the closed form needs r̃₀ = s̃₀")
        A = 16 * H0.tr2 ** 4 * H0.tk2 ** 2 / (c.c1 * c.c2 * r2)
        r12 = A * t + H0.tr2 ** 6
        if not r12 > 0:
            raise InvalidConfigError(f"t = {t} lies before the start of the solution")
        tr2 = r12 ** (1 / 6)
        return BundleMetricCoeffs(tr2=tr2, ts2=tr2, tk2=H0.tr2 ** 2 * H0.tk2 / tr2 ** 2)

    def bismut_trace_closed_form(self, H: BundleMetricCoeffs) -> float:
        """ζ^{12 1̄ 2̄} coefficient of Tr(A^{−1}∧A^{−1}) on N3: −8(r̃⁴ + s̃⁴)k̃⁴/(r̃⁴s̃⁴)."""
        return -8 * (H.tr2 ** 2 + H.ts2 ** 2) * H.tk2 ** 2 / (H.tr2 ** 2 * H.ts2 ** 2)

    def bismut_model_constants(self, c: ConservedConstants, H0: BundleMetricCoeffs,
                               alpha_prime: float, tau: float) -> tuple[float, float]:
        """
        (K1, K2) of dr²/dt = K1 + K2/r⁴ on N3 with balanced ω₀ and κ = −1, where H stays fixed:
        K1 = c1³/2⁵ − α′(c1/2)k̃⁴(r̃⁴ + s̃⁴)/(r̃⁴s̃⁴), K2 = α′(1 − τ)(τ² − 2τ + 5)c1⁵/2¹⁰.
        """
        c1 = c.c1
        K1 = c1 ** 3 / 32 + alpha_prime * c1 / 16 * self.bismut_trace_closed_form(H0)
        K2 = alpha_prime * (1 - tau) * (tau * tau - 2 * tau + 5) * c1 ** 5 / 1024
        return K1, K2

    # Hull-Strominger-Ivanov system

    def hsi_residuals(self, params: JParams, omega: MetricCoeffs, H: BundleMetricCoeffs,
                      tau: float, kappa: float, alpha_prime: float) -> HsiResiduals:
        """
        Max-norm residuals of the Hull-Strominger-Ivanov equations at (ω, H),
        all computed from first principles in the adapted basis of ω.

        Args:
            params: Complex structure parameters (λ = 0)
            omega: Diagonal metric
            H: Bundle metric
            tau: Gauduchon parameter of Rm^τ
            kappa: Gauduchon parameter of A^κ
            alpha_prime: Slope parameter α′

        Returns:
            HsiResiduals: Raw residuals, no threshold applied

        Raises:
            UnsupportedParametersError: If λ ≠ 0 or ω is not diagonal
        """
        self.gauduchon.check_bundle_gate(params, omega)
        exterior = self.gauduchon.exterior
        try:
            frame, adapted = self.hermitian.adapted_basis(params, omega)
            sc = self.gauduchon.lie.real_structure_constants(params, adapted)
            omega_form = self.hermitian.fundamental_form(omega, frame)
            bundle = self.gauduchon.bundle_curvature(params, omega, H, kappa)
            tangent = self.gauduchon.curvature(self.gauduchon.connection_one_forms_tau(params, sc, tau), sc)

            bundle_pq, bundle_hym = self.gauduchon.instanton_parts(bundle, omega_form, frame)
            tangent_pq, tangent_hym = self.gauduchon.instanton_parts(tangent, omega_form, frame)
            anomaly = (1j * exterior.ddbar(omega_form, frame, sc)
                       - alpha_prime / 4 * (self.gauduchon.trace_wedge(tangent) - self.gauduchon.trace_wedge(bundle)))
            omega2 = exterior.wedge(omega_form, omega_form)
            balanced = self.hermitian.psi_norm(omega) * exterior.d(omega2, sc).max_abs()
        except NilflowError:
            raise
        except Exception as e:
            logger.error(f"Failed to evaluate HSI residuals: {str(e)}")
            raise NilflowError(f"Failed to evaluate HSI residuals: {str(e)}")
        return HsiResiduals(
            bundle_hym=bundle_hym,
            bundle_pq=bundle_pq,
            anomaly=anomaly.max_abs(),
            conformally_balanced=balanced,
            tangent_instanton=max(tangent_pq, tangent_hym),
        )


def get_flow_service(
    hermitian: Optional[HermitianService] = None,
    gauduchon: Optional[GauduchonService] = None,
) -> AnomalyFlowService:
    """
    Factory function for creating AnomalyFlowService instance.

    Returns:
        AnomalyFlowService: Service instance
    """
    gauduchon = gauduchon or get_gauduchon_service(hermitian=hermitian)
    return AnomalyFlowService(hermitian=hermitian or gauduchon.hermitian, gauduchon=gauduchon)
