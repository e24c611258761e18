import logging
import math

import numpy as np
import pytest

from app.core.exceptions import InvalidConfigError, InvalidMetricError, UnsupportedParametersError
from app.schemas.flow import ConservedConstants, FlowState, QualitativeKind
from app.schemas.metric import BundleMetricCoeffs, MetricCoeffs
from app.schemas.structure import GroupId, JParams

ROOT2 = math.sqrt(2)
ROOT8 = math.sqrt(8)


@pytest.fixture
def unit_constants(flow, unit_metric):
    """Conserved constants c1 = c2 = √8 of the unit diagonal metric."""
    return flow.conserved_constants(unit_metric)


@pytest.fixture
def bismut_run(flow, n3, unit_metric, unit_bundle):
    """Coupled N3 run with τ = κ = −1, α′ = 1 from unit data."""
    return flow.integrate_coupled(n3, unit_metric, unit_bundle, kappa=-1.0, tau=-1.0, alpha_prime=1.0,
                                  dt=1e-2, t_max=10.0)


# Conserved quantities

def test_conserved_constants_diagonal(flow):
    """Test c1 = √8 rk/s and c2 = √8 sk/r for r = 2, s = k = 1."""
    c = flow.conserved_constants(MetricCoeffs.diagonal(4.0, 1.0, 1.0))
    assert c.c1 == pytest.approx(2 * ROOT8)
    assert c.c2 == pytest.approx(ROOT8 / 2)
    assert (c.c3, c.c4, c.c5) == (0, 0, 0)


def test_conserved_constants_unit(unit_constants):
    """Test c1 = c2 = √8 and k² = 1 for the unit metric."""
    assert unit_constants.c1 == pytest.approx(ROOT8)
    assert unit_constants.c2 == pytest.approx(ROOT8)
    assert unit_constants.fiber_k2 == pytest.approx(1.0)


def test_conserved_constants_almost_diagonal(flow, hermitian):
    """Test c5 = ‖Ψ‖k²u and c3 = c4 = 0 when v = z = 0."""
    metric = MetricCoeffs(r2=1.0, s2=2.0, k2=1.5, u=0.3 + 0.2j)
    c = flow.conserved_constants(metric)
    assert c.c5 == pytest.approx(hermitian.psi_norm(metric) * 1.5 * (0.3 + 0.2j))
    assert c.c3 == 0 and c.c4 == 0


def test_conserved_constants_reject_invalid():
    """Test that c1c2 ≤ |c5|² is rejected."""
    with pytest.raises(InvalidMetricError):
        ConservedConstants(c1=1.0, c2=1.0, c5=2.0)


def test_almost_diagonal_solution_unit(flow, unit_constants):
    """Test s² = 1, k² = 1, u = 0 at r² = 1."""
    metric = flow.almost_diagonal_solution(unit_constants, 1.0)
    assert (metric.s2, metric.k2) == pytest.approx((1.0, 1.0))
    assert metric.u == 0


def test_almost_diagonal_solution_constant_ratios(flow):
    """Test that k² does not depend on r² and u/r² = c5/c1."""
    c = flow.conserved_constants(MetricCoeffs(r2=1.0, s2=1.0, k2=1.0, u=0.3j))
    first = flow.almost_diagonal_solution(c, 1.0)
    second = flow.almost_diagonal_solution(c, 7.0)
    assert first.k2 == pytest.approx(second.k2)
    assert first.u / first.r2 == pytest.approx(second.u / second.r2)
    assert second.u / second.r2 == pytest.approx(c.c5 / c.c1)


def test_almost_diagonal_solution_non_positive(flow, unit_constants):
    """Test that r² ≤ 0 is rejected."""
    with pytest.raises(InvalidMetricError):
        flow.almost_diagonal_solution(unit_constants, 0.0)


def test_psi_norm_along_solution(flow, hermitian):
    """Test ‖Ψ‖ = 8c1/((c1c2 − |c5|²) r²) on the almost diagonal solution."""
    c = flow.conserved_constants(MetricCoeffs(r2=1.2, s2=0.7, k2=1.1, u=0.1 - 0.2j))
    for r2 in (0.5, 1.0, 3.0):
        expected = 8 * c.c1 / ((c.c1 * c.c2 - abs(c.c5) ** 2) * r2)
        assert hermitian.psi_norm(flow.almost_diagonal_solution(c, r2)) == pytest.approx(expected)


# Model problem

def test_model_constants_n3(flow, n3, unit_metric):
    """Test K1 = √2/2 and K2 = 2√2·α′ for τ = −1 on N3."""
    mc = flow.model_constants(n3, unit_metric, 1.0, -1.0)
    assert mc.K1 == pytest.approx(ROOT2 / 2)
    assert mc.B == pytest.approx(1.0)
    assert mc.C == pytest.approx(-16.0)
    assert mc.K2 == pytest.approx(ROOT8)


def test_model_constants_no_anomaly(flow, generic_params, generic_metric):
    """Test K2 = 0 when α′ = 0 or τ = 1."""
    assert flow.model_constants(generic_params, generic_metric, 0.0, -1.0).K2 == 0
    assert flow.model_constants(generic_params, generic_metric, 3.0, 1.0).K2 == 0


def test_model_constants_reduces_first(flow, generic_params, generic_metric, hermitian):
    """Test that constants of ω₀ and of its almost diagonal reduction agree."""
    reduced = hermitian.reduce_almost_diagonal(generic_params, generic_metric).metric
    first = flow.model_constants(generic_params, generic_metric, 0.5, 0.2)
    second = flow.model_constants(generic_params, reduced, 0.5, 0.2)
    assert (first.K1, first.K2) == pytest.approx((second.K1, second.K2))


@pytest.mark.parametrize("K1, K2, h0, kind", [
    (-1.0, 1.0, 1.0, QualitativeKind.STATIONARY),
    (1.0, 1.0, 5.0, QualitativeKind.IMMORTAL),
    (1.0, -1.0, 0.5, QualitativeKind.ANCIENT),
    (1.0, -1.0, 2.0, QualitativeKind.ETERNAL),
    (-1.0, -1.0, 1.0, QualitativeKind.ANCIENT),
    (-1.0, 1.0, 0.5, QualitativeKind.IMMORTAL),
    (-1.0, 1.0, 3.0, QualitativeKind.ETERNAL),
    (0.0, 1.0, 1.0, QualitativeKind.IMMORTAL),
    (0.0, -1.0, 1.0, QualitativeKind.ANCIENT),
    (-1.0, 0.0, 1.0, QualitativeKind.ANCIENT),
    (0.0, 0.0, 1.0, QualitativeKind.STATIONARY),
])
def test_classify_model(flow, K1, K2, h0, kind):
    """Test the sign-case table."""
    assert flow.classify_model(K1, K2, h0).kind == kind


def test_classify_model_stationary_point(flow):
    """Test h₀ = √(−K2/K1) is reported for mixed signs."""
    assert flow.classify_model(1.0, -4.0, 0.5).h_star == pytest.approx(2.0)


def test_classify_model_linear_case(flow):
    """Test that K1 > 0, K2 = 0 is settled from the linear solution."""
    cls = flow.classify_model(1.0, 0.0, 1.0)
    assert cls.kind == QualitativeKind.IMMORTAL
    assert cls.closed_form_only
    assert cls.extinction_time == pytest.approx(-1.0)


def test_classify_model_non_positive(flow):
    """Test that h(0) ≤ 0 is rejected."""
    with pytest.raises(InvalidConfigError):
        flow.classify_model(1.0, 1.0, 0.0)


def test_integrate_model_cubic(flow):
    """Test h(1) = 4^{1/3} for K1 = 0, K2 = 1, h(0) = 1."""
    run = flow.integrate_model(0.0, 1.0, 1.0, dt=0.1, t_max=1.0)
    assert run.analytic
    assert run.times[-1] == pytest.approx(1.0)
    assert run.h[-1] == pytest.approx(4 ** (1 / 3))


def test_integrate_model_linear(flow):
    """Test h(3) = 4 for K1 = 1, K2 = 0, h(0) = 1."""
    run = flow.integrate_model(1.0, 0.0, 1.0, dt=0.1, t_max=3.0)
    assert run.h[-1] == pytest.approx(4.0)


def test_integrate_model_linear_extinction(flow):
    """Test that K1 = −1, K2 = 0 blows down at t = h(0)."""
    run = flow.integrate_model(-1.0, 0.0, 1.0, dt=0.1, t_max=3.0)
    assert run.blow_down
    assert run.blow_down_time == pytest.approx(1.0)


def test_integrate_model_stationary(flow):
    """Test h(t) = 1 for K1 = −1, K2 = 1, h(0) = 1."""
    run = flow.integrate_model(-1.0, 1.0, 1.0, dt=1e-2, t_max=10.0)
    assert not run.blow_down
    assert max(abs(h - 1.0) for h in run.h) <= 1e-12


def test_integrate_model_rk4_accuracy(flow):
    """Test RK4 against the implicit solution of h′ = 1 + 1/h² from h(0) = 1."""
    run = flow.integrate_model(1.0, 1.0, 1.0, dt=1e-2, t_max=2.0)
    h = run.h[-1]
    # h′ = (h² + 1)/h², so t = h − arctan h − (1 − π/4)
    assert h - math.atan(h) - (1 - math.pi / 4) == pytest.approx(2.0, abs=1e-8)


def test_integrate_model_blow_down(flow):
    """Test that an ancient solution run forward blows down before its extinction time."""
    run = flow.integrate_model(-1.0, -1.0, 1.0, dt=1e-2, t_max=10.0)
    assert run.blow_down
    # h′ ≤ −1 bounds the extinction time by h(0)
    assert 0 < run.blow_down_time <= 1.0


def test_integrate_model_backward(flow):
    """Test that backward times are negative and an immortal solution blows down backward."""
    run = flow.integrate_model(1.0, 1.0, 1.0, dt=1e-2, t_max=10.0, backward=True)
    assert run.blow_down
    assert run.times[-1] < 0


def test_integrate_model_slope(flow):
    """Test that h grows with slope K1 within 1%."""
    run = flow.integrate_model(1.0, 1.0, 1.0, dt=0.1, t_max=1000.0, sample_every=100)
    half = len(run.times) // 2
    slope = (run.h[-1] - run.h[half]) / (run.times[-1] - run.times[half])
    assert slope == pytest.approx(1.0, rel=1e-2)


def test_integrate_model_invalid_step(flow):
    """Test that a non-positive step is rejected."""
    with pytest.raises(InvalidConfigError):
        flow.integrate_model(1.0, 1.0, 1.0, dt=0.0)


def test_classification_grid_confirmed(flow):
    """Test that numerics confirm every cell of the 3×3×3 sign grid."""
    for K1 in (-1.0, 0.0, 1.0):
        for K2 in (-1.0, 0.0, 1.0):
            if K1 * K2 < 0:
                h_star = math.sqrt(-K2 / K1)
                starts = (h_star / 2, h_star, 2 * h_star)
            else:
                starts = (0.5, 1.0, 2.0)
            for h0 in starts:
                assert flow.confirm_classification(K1, K2, h0), (K1, K2, h0)


def test_confirm_classification_wrong_limit(flow, mocker):
    """Test that a run settling away from the reported fixed point is not confirmed."""
    cls = flow.classify_model(-1.0, 1.0, 0.5)
    mocker.patch.object(flow, "classify_model", return_value=cls.model_copy(update={"h_star": 0.9}))
    assert not flow.confirm_classification(-1.0, 1.0, 0.5)


def test_confirm_classification_wrong_direction(flow, mocker):
    """Test that h moving against the sign of h′(0) is not confirmed."""
    integrate = flow.integrate_model

    def reversed_run(*args, **kwargs):
        run = integrate(*args, **kwargs)
        return run.model_copy(update={"h": run.h[::-1]})

    mocker.patch.object(flow, "integrate_model", side_effect=reversed_run)
    assert not flow.confirm_classification(1.0, 1.0, 1.0)


def test_confirm_classification_wrong_slope(flow, mocker):
    """Test that growth at twice the slope K1 is not confirmed."""
    integrate = flow.integrate_model

    def stretched_run(*args, **kwargs):
        run = integrate(*args, **kwargs)
        if kwargs.get("sample_every", 1) > 1:
            return run.model_copy(update={"h": [2 * h for h in run.h]})
        return run

    mocker.patch.object(flow, "integrate_model", side_effect=stretched_run)
    assert not flow.confirm_classification(1.0, 1.0, 1.0)


def test_reconstruct_flat_flow(flow, hermitian, n3):
    """Test k² constant, balanced preserved and conserved constants unchanged along a run."""
    omega0 = MetricCoeffs.diagonal(1.5, 1.5, 0.8)
    c = flow.conserved_constants(omega0)
    mc = flow.model_constants(n3, omega0, 0.2, -1.0)
    run = flow.integrate_model(mc.K1, mc.K2, omega0.r2, dt=1e-2, t_max=5.0, sample_every=100)
    states = flow.reconstruct_flat_flow(c, run)
    assert len(states) == len(run.times)
    for state in states:
        assert state.omega.k2 == pytest.approx(c.fiber_k2, rel=1e-12)
        assert hermitian.is_balanced(n3, state.omega)
        drift = flow.conserved_constants(state.omega)
        assert (drift.c1, drift.c2) == pytest.approx((c.c1, c.c2), rel=1e-8)


def test_reconstruct_preserves_lck(flow, hermitian, unit_metric):
    """Test that the lcK condition holds along the flow on the lcK structure."""
    params = JParams(x=1.0)
    c = flow.conserved_constants(unit_metric)
    mc = flow.model_constants(params, unit_metric, 0.0, 1.0)
    run = flow.integrate_model(mc.K1, mc.K2, 1.0, dt=1e-2, t_max=0.5)
    assert all(hermitian.is_lck(params, s.omega) for s in flow.reconstruct_flat_flow(c, run))


def _growing_run(flow, hermitian, params, omega0, tau):
    """Flat-bundle states along a run on which h only grows."""
    reduced = hermitian.reduce_almost_diagonal(params, omega0).metric
    base = flow.model_constants(params, omega0, 1.0, tau)
    direction = 1.0 if base.K1 >= 0 else -1.0
    mc = flow.model_constants(params, omega0, -0.1 * direction * float(np.sign(base.C)), tau)
    run = flow.integrate_model(mc.K1, mc.K2, reduced.r2, dt=1e-2, t_max=1.0, backward=direction < 0,
                               sample_every=10)
    assert not run.blow_down
    return flow.reconstruct_flat_flow(flow.conserved_constants(reduced), run)


def test_balanced_preserved_random_trajectories(flow, hermitian, verification, draw_balanced, rng):
    """Test that the balanced predicate is constant along 20 seeded runs."""
    for i in range(20):
        if i % 2:
            params, omega0, tau = verification.draw_tangent(rng)
        else:
            params, omega0 = draw_balanced(rng)
            tau = float(rng.uniform(-3.0, 3.0))
        expected = hermitian.is_balanced(params, omega0)
        assert expected == (i % 2 == 0)
        states = _growing_run(flow, hermitian, params, omega0, tau)
        assert all(hermitian.is_balanced(params, s.omega) == expected for s in states), (params, omega0)


def test_lck_preserved_random_trajectories(flow, hermitian, verification, rng):
    """Test that the lcK predicate is constant along 20 seeded runs on the lcK structure."""
    params = JParams(x=1.0)
    for i in range(20):
        if i % 2:
            _, omega0, _ = verification.draw_tangent(rng)
        else:
            k2, a = (float(c) for c in rng.uniform(0.5, 2.0, size=2))
            v = complex(*rng.uniform(-0.4, 0.4, size=2))
            z = complex(*rng.uniform(-0.4, 0.4, size=2))
            omega0 = MetricCoeffs(r2=a + abs(z) ** 2 / k2, s2=a + abs(v) ** 2 / k2, k2=k2,
                                  u=1j * v.conjugate() * z / k2, v=v, z=z)
        expected = hermitian.is_lck(params, omega0)
        assert expected == (i % 2 == 0)
        states = _growing_run(flow, hermitian, params, omega0, float(rng.uniform(-3.0, 3.0)))
        assert all(hermitian.is_lck(params, s.omega) == expected for s in states), omega0


# γ₁ and the sign of K1

def test_gamma1_n3(flow, n3, unit_metric):
    """Test γ₁ = 2 on N3 with the unit metric."""
    assert flow.gamma1(n3, unit_metric) == pytest.approx(2.0)


def test_gamma1_pluriclosed(flow, unit_metric):
    """Test γ₁ = 0 on a pluriclosed structure."""
    assert flow.gamma1(JParams(rho=1, x=0.5), unit_metric) == 0


def test_sign_law_random(flow, verification, rng):
    """Test sign K1 = sign(ρ + λ² − 2x) = sign γ₁ on 1000 seeded draws."""
    for _ in range(1000):
        params, metric, tau = verification.draw_tangent(rng)
        expected = np.sign(params.sign_quantity)
        assert np.sign(flow.model_constants(params, metric, 1.0, tau).K1) == expected
        assert np.sign(flow.gamma1(params, metric)) == expected


def test_sign_n3_never_zero(flow, lie, verification, rng):
    """Test that sampled N3 structures give K1 of both signs and never zero."""
    signs = set()
    for _ in range(200):
        _, metric, tau = verification.draw_tangent(rng)
        params = JParams(x=float(rng.choice([-1.0, 1.0]) * rng.uniform(0.05, 2.0)))
        assert lie.classify_group(params) == GroupId.N3
        signs.add(float(np.sign(flow.model_constants(params, metric, 1.0, tau).K1)))
    assert signs == {-1.0, 1.0}


def test_sign_n8_always_zero(flow, lie, verification, rng):
    """Test that K1 vanishes for every sampled metric on N8."""
    params = JParams()
    assert lie.classify_group(params) == GroupId.N8
    for _ in range(200):
        _, metric, tau = verification.draw_tangent(rng)
        assert flow.model_constants(params, metric, 1.0, tau).K1 == 0


def test_k1_sign_table(flow):
    """Test the rows of the K1 sign table."""
    rows = {row.group: row for row in flow.k1_sign_table()}
    assert rows[GroupId.N2].signs == ["<0", "=0", ">0"]
    assert rows[GroupId.N3].signs == ["<0", ">0"]
    assert rows[GroupId.N5].signs == ["<0", "=0", ">0"]
    assert rows[GroupId.N8].signs == ["=0"]
    assert not rows[GroupId.N4].computed
    assert rows[GroupId.N6].signs == [">0"]


def test_immortal_and_ancient(flow, n3, unit_metric):
    """Test both kinds from one N3 metric, with α′ = 1/4 and α′ = −1."""
    (a_imm, _, cls_imm), (a_anc, mc_anc, cls_anc) = flow.immortal_and_ancient(n3, unit_metric, -1.0)
    assert cls_imm.kind == QualitativeKind.IMMORTAL
    assert cls_anc.kind == QualitativeKind.ANCIENT
    assert a_imm == pytest.approx(0.25)
    assert a_anc == pytest.approx(-1.0)
    assert cls_anc.h_star == pytest.approx(2.0)
    assert mc_anc.K2 < 0


def test_immortal_and_ancient_chern(flow, n3, unit_metric):
    """Test that τ = 1 cannot tune K2."""
    with pytest.raises(UnsupportedParametersError):
        flow.immortal_and_ancient(n3, unit_metric, 1.0)


# Collapse

def test_collapse_torus(flow, unit_constants):
    """Test that K1 > 0, K2 > 0 collapses the fibre only."""
    run = flow.integrate_model(1.0, 1.0, 1.0, dt=0.5, t_max=500.0)
    profile = flow.collapse_diagnostic(unit_constants, run)
    assert profile.vanishing == ["k2"]
    assert profile.limit == "torus"


@pytest.mark.parametrize("h0", [0.5, 1.0])
def test_collapse_point(flow, unit_constants, h0):
    """Test that bounded runs collapse to a point."""
    run = flow.integrate_model(-1.0, 1.0, h0, dt=0.5, t_max=500.0)
    assert flow.collapse_diagnostic(unit_constants, run).limit == "point"


def test_collapse_blow_down(flow, unit_constants):
    """Test that a blown-down run is rejected."""
    run = flow.integrate_model(-1.0, 0.0, 1.0, dt=0.1, t_max=3.0)
    with pytest.raises(InvalidConfigError):
        flow.collapse_diagnostic(unit_constants, run)


def test_collapse_short_run_undetermined(flow, unit_constants, caplog):
    """Test that a run ending before t = 1/COLLAPSE_RATIO − 1 is undetermined and warned about."""
    run = flow.integrate_model(1.0, 1.0, 1.0, dt=0.1, t_max=10.0)
    with caplog.at_level(logging.WARNING):
        profile = flow.collapse_diagnostic(unit_constants, run)
    assert profile.limit == "undetermined"
    assert profile.vanishing == []
    assert "COLLAPSE_RATIO" in caplog.text


# Coupled flow

def test_coupled_rhs_chern_n3(flow, n3, unit_metric, unit_constants):
    """Test the κ = 1 right-hand sides on N3 with r² = 1."""
    tr2, ts2, tk2 = 1.3, 0.9, 0.8
    state = FlowState(t=0.0, omega=unit_metric, H=BundleMetricCoeffs(tr2=tr2, ts2=ts2, tk2=tk2))
    _, d_tr2, d_ts2, d_tk2 = flow.coupled_rhs(n3, state, unit_constants, 1.0, -1.0, 0.0)
    assert d_tr2 == pytest.approx(tk2 ** 2 / (3 * tr2))
    assert d_ts2 == pytest.approx(tk2 ** 2 / (3 * ts2))
    assert d_tk2 == pytest.approx(-(tr2 ** 2 + ts2 ** 2) * tk2 ** 3 / (3 * tr2 ** 2 * ts2 ** 2))


def test_coupled_rhs_bismut_n3(flow, n3):
    """Test dk̃²/dt = 0 for κ = −1 and H constant when ω₀ is balanced."""
    H = BundleMetricCoeffs(tr2=0.7, ts2=1.4, tk2=1.1)
    unbalanced = MetricCoeffs.diagonal(1.0, 2.0, 1.0)
    state = FlowState(t=0.0, omega=unbalanced, H=H)
    assert flow.coupled_rhs(n3, state, flow.conserved_constants(unbalanced), -1.0, -1.0, 1.0)[3] == 0
    balanced = MetricCoeffs.diagonal(1.5, 1.5, 0.5)
    state = FlowState(t=0.0, omega=balanced, H=H)
    derivatives = flow.coupled_rhs(n3, state, flow.conserved_constants(balanced), -1.0, -1.0, 1.0)
    assert max(abs(v) for v in derivatives[1:]) <= 1e-12


def test_coupled_rhs_requires_bundle(flow, n3, unit_metric, unit_constants):
    """Test that a missing H is rejected."""
    with pytest.raises(UnsupportedParametersError):
        flow.coupled_rhs(n3, FlowState(t=0.0, omega=unit_metric), unit_constants, -1.0, -1.0, 1.0)


def test_integrate_coupled_gates(flow, unit_metric, unit_bundle):
    """Test λ ≠ 0, non-diagonal ω₀ and a bad step are rejected."""
    with pytest.raises(UnsupportedParametersError):
        flow.integrate_coupled(JParams(lam=0.5), unit_metric, unit_bundle, -1.0, -1.0, 1.0, dt=0.1, t_max=1.0)
    with pytest.raises(UnsupportedParametersError):
        flow.integrate_coupled(JParams(x=-1.0), MetricCoeffs(r2=1.0, s2=1.0, k2=1.0, u=0.1), unit_bundle,
                               -1.0, -1.0, 1.0, dt=0.1, t_max=1.0)
    with pytest.raises(InvalidConfigError):
        flow.integrate_coupled(JParams(x=-1.0), unit_metric, unit_bundle, -1.0, -1.0, 1.0, dt=-0.1, t_max=1.0)


def test_bismut_model_constants(flow, unit_constants, unit_bundle):
    """Test K1 = −3√2/2 and K2 = 2√2 for α′ = 1, τ = −1."""
    K1, K2 = flow.bismut_model_constants(unit_constants, unit_bundle, 1.0, -1.0)
    assert K1 == pytest.approx(-3 * ROOT2 / 2)
    assert K2 == pytest.approx(ROOT8)
    assert flow.classify_model(K1, K2, 1.0).h_star == pytest.approx(math.sqrt(4 / 3))


def test_bismut_trace_closed_form(flow, gauduchon, n3, unit_metric):
    """Test C_A = −8(r̃⁴ + s̃⁴)k̃⁴/(r̃⁴s̃⁴) against the bundle trace formula."""
    H = BundleMetricCoeffs(tr2=0.7, ts2=1.4, tk2=1.1)
    assert flow.bismut_trace_closed_form(H) == pytest.approx(gauduchon.closed_form_trace_kappa(n3, unit_metric, H, -1.0))
    assert flow.bismut_trace_closed_form(BundleMetricCoeffs(tr2=1.0, ts2=1.0, tk2=1.0)) == pytest.approx(-16)


def test_bismut_flow_converges(flow, bismut_run, unit_bundle, n3):
    """Test H fixed, r² → √(4/3) and a vanishing r² derivative at the end of the run."""
    assert not bismut_run.blow_down
    for state in bismut_run.states:
        assert (state.H.tr2, state.H.ts2, state.H.tk2) == pytest.approx((1.0, 1.0, 1.0), abs=1e-10)
    final = bismut_run.states[-1]
    assert final.omega.r2 == pytest.approx(math.sqrt(4 / 3), rel=1e-9)
    d_r2 = flow.coupled_rhs(n3, final, bismut_run.constants, -1.0, -1.0, 1.0)[0]
    assert abs(d_r2) < 1e-12


def test_bismut_flow_solves_hsi(flow, bismut_run, n3):
    """Test that the limit of the Bismut run solves the Hull-Strominger-Ivanov system."""
    final = bismut_run.states[-1]
    residuals = flow.hsi_residuals(n3, final.omega, final.H, -1.0, -1.0, 1.0)
    assert residuals.all_below(1e-10)


@pytest.mark.parametrize("kappa, alpha_prime", [(-1.0, 1.0), (1.0, -0.25)])
def test_coupled_flow_conserves(flow, n3, unit_metric, unit_bundle, kappa, alpha_prime):
    """Test that c1, ..., c5 do not drift and k² stays fixed over t in [0, 10] at dt = 1e-3."""
    run = flow.integrate_coupled(n3, unit_metric, unit_bundle, kappa=kappa, tau=-1.0, alpha_prime=alpha_prime,
                                 dt=1e-3, t_max=10.0, sample_every=100)
    assert not run.blow_down
    c = run.constants
    scale = max(c.c1, c.c2)
    for state in run.states:
        drift = flow.conserved_constants(state.omega)
        assert (drift.c1, drift.c2) == pytest.approx((c.c1, c.c2), rel=1e-8)
        for now, start in ((drift.c3, c.c3), (drift.c4, c.c4), (drift.c5, c.c5)):
            assert abs(now - start) <= 1e-8 * scale
        assert state.omega.k2 == pytest.approx(c.fiber_k2, rel=1e-12)


def test_freezing_alpha_prime(flow, n3, unit_metric, unit_bundle):
    """Test α′ = −1/4 freezes r² for κ = 1, τ = −1 on N3."""
    assert flow.freezing_alpha_prime(n3, unit_metric, -1.0, unit_bundle, 1.0) == pytest.approx(-0.25)


def test_freezing_alpha_prime_needs_kappa(flow, n3, unit_metric, unit_bundle):
    """Test that a bundle metric without κ is rejected."""
    with pytest.raises(UnsupportedParametersError):
        flow.freezing_alpha_prime(n3, unit_metric, -1.0, unit_bundle)


def test_chern_flow_closed_form(flow, n3, unit_metric, unit_bundle, unit_constants):
    """Test r̃(t) = (2t + 1)^{1/12} for the Chern bundle connection with frozen r²."""
    alpha_prime = flow.freezing_alpha_prime(n3, unit_metric, -1.0, unit_bundle, 1.0)
    run = flow.integrate_coupled(n3, unit_metric, unit_bundle, kappa=1.0, tau=-1.0, alpha_prime=alpha_prime,
                                 dt=1e-2, t_max=10.0)
    for state in run.states:
        assert state.omega.r2 == pytest.approx(1.0, abs=1e-8)
        assert math.sqrt(state.H.tr2) == pytest.approx((2 * state.t + 1) ** (1 / 12), abs=1e-6)
        closed = flow.chern_bundle_closed_form(unit_constants, 1.0, unit_bundle, state.t)
        assert state.H.tk2 == pytest.approx(closed.tk2, abs=1e-6)


def test_chern_closed_form_needs_equal_radii(flow, unit_constants):
    """Test that r̃₀ ≠ s̃₀ is rejected."""
    with pytest.raises(UnsupportedParametersError):
        flow.chern_bundle_closed_form(unit_constants, 1.0, BundleMetricCoeffs(tr2=1.0, ts2=2.0, tk2=1.0), 1.0)


# Stationary κ

def test_stationary_kappa_bismut(flow, unit_constants):
    """Test κ = −1 for ρ = 0."""
    assert flow.stationary_kappa_values(unit_constants, 0) == [-1.0]


def test_stationary_kappa_lichnerowicz(flow, unit_constants):
    """Test κ = 0 for ρ = 1, c1 = c2."""
    assert flow.stationary_kappa_values(unit_constants, 1) == [0.0]


def test_stationary_kappa_pair(flow):
    """Test κ ∈ {1/3, 3} for c1 = 8, c2 = 2."""
    c = ConservedConstants(c1=8.0, c2=2.0)
    assert flow.stationary_kappa_values(c, 1) == pytest.approx([1 / 3, 3.0])


@pytest.mark.parametrize("kappa", [1 / 3, 3.0])
def test_stationary_kappa_freezes_bundle(flow, kappa):
    """Test that H does not move for the stationary κ values from a balanced ω₀."""
    params = JParams(rho=1, x=-0.25)
    omega0 = MetricCoeffs.diagonal(4.0, 1.0, 1.0)
    c = flow.conserved_constants(omega0)
    assert flow.stationary_kappa_values(c, 1, params) == pytest.approx([1 / 3, 3.0])
    for H in (BundleMetricCoeffs(tr2=1.0, ts2=1.0, tk2=1.0), BundleMetricCoeffs(tr2=0.6, ts2=1.7, tk2=1.3)):
        derivatives = flow.coupled_rhs(params, FlowState(t=0.0, omega=omega0, H=H), c, kappa, -1.0, 0.5)
        assert max(abs(v) for v in derivatives[1:]) <= 1e-12


# Hull-Strominger-Ivanov residuals

def test_hsi_residuals_no_anomaly(flow, n3, unit_metric, unit_bundle):
    """Test that α′ = 0 leaves i∂∂̄ω in the anomaly residual."""
    residuals = flow.hsi_residuals(n3, unit_metric, unit_bundle, -1.0, -1.0, 0.0)
    assert residuals.anomaly > 1e-3
    assert residuals.conformally_balanced <= 1e-10


def test_hsi_residuals_unbalanced(flow, n3, unit_bundle):
    """Test that an unbalanced ω has a non-zero conformally balanced residual."""
    residuals = flow.hsi_residuals(n3, MetricCoeffs.diagonal(1.0, 2.0, 1.0), unit_bundle, -1.0, -1.0, 1.0)
    assert residuals.conformally_balanced > 1e-6


def test_hsi_residuals_gate(flow, unit_metric, unit_bundle):
    """Test that λ ≠ 0 is refused."""
    with pytest.raises(UnsupportedParametersError):
        flow.hsi_residuals(JParams(lam=1.0), unit_metric, unit_bundle, -1.0, -1.0, 1.0)
