import pytest

from app.core.exceptions import InvalidFrameError
from app.schemas.forms import ComplexFrame, Form
from app.schemas.metric import MetricCoeffs
from app.schemas.structure import JParams, StructureConstants


@pytest.fixture
def n3_constants(lie, hermitian, n3, unit_metric):
    """Structure constants of N3 in the adapted basis of the unit metric."""
    return lie.real_structure_constants(n3, hermitian.adapted_coeffs(unit_metric))


def test_wedge_basis_order(exterior):
    """Test e¹ ∧ e² = e¹² and e² ∧ e¹ = −e¹²."""
    assert exterior.wedge(Form.basis(1), Form.basis(2)) == Form.basis(1, 2)
    assert exterior.wedge(Form.basis(2), Form.basis(1)) == -Form.basis(1, 2)


def test_wedge_repeated_index(exterior):
    """Test (e¹ + e³) ∧ e¹³ = 0."""
    assert not exterior.wedge(Form.basis(1) + Form.basis(3), Form.basis(1, 3))


def test_wedge_sign_across_blocks(exterior):
    """Test e²⁴ ∧ e¹³ = −e¹²³⁴."""
    assert exterior.wedge(Form.basis(2, 4), Form.basis(1, 3)) == Form.basis(1, 2, 3, 4, coeff=-1)


def test_d_closed_generator(exterior, n3_constants):
    """Test de¹ = 0 on N3."""
    assert not exterior.d(Form.basis(1), n3_constants)


def test_d_last_generator(exterior, n3_constants):
    """Test de⁶ = −2e¹² + 2e³⁴ on N3 with the unit metric."""
    expected = Form.basis(1, 2, coeff=-2) + Form.basis(3, 4, coeff=2)
    assert exterior.d(Form.basis(6), n3_constants).isclose(expected, 1e-14)


def test_d_leibniz_on_top_generators(exterior, lie, hermitian, generic_params, generic_metric):
    """Test d(e⁵∧e⁶) = de⁵∧e⁶ − e⁵∧de⁶."""
    sc = lie.real_structure_constants(generic_params, hermitian.adapted_coeffs(generic_metric))
    e5, e6 = Form.basis(5), Form.basis(6)
    lhs = exterior.d(exterior.wedge(e5, e6), sc)
    rhs = exterior.wedge(exterior.d(e5, sc), e6) - exterior.wedge(e5, exterior.d(e6, sc))
    assert lhs.isclose(rhs, 1e-12)


def test_d_of_scalar(exterior, n3_constants):
    """Test that constants are closed."""
    assert not exterior.d(Form.scalar(3.0), n3_constants)


def test_evaluate_matches_coefficient(exterior):
    """Test e¹²(e_1, e_2) = 1 and e¹²(e_2, e_1) = −1."""
    e1 = [1, 0, 0, 0, 0, 0]
    e2 = [0, 1, 0, 0, 0, 0]
    assert exterior.evaluate(Form.basis(1, 2), e1, e2) == pytest.approx(1)
    assert exterior.evaluate(Form.basis(1, 2), e2, e1) == pytest.approx(-1)
    assert exterior.evaluate_on_basis(Form.basis(1, 2), 2, 1) == -1


def test_decompose_pq_mixed_type(exterior):
    """Test that ζ^{1 2̄} is entirely of type (1,1)."""
    frame = ComplexFrame.standard()
    form = exterior.zeta_monomial(frame, (1,), (2,))
    parts = exterior.decompose_pq(form, frame)
    assert list(parts) == [(1, 1)]
    assert parts[(1, 1)].isclose(form, 1e-14)


def test_decompose_pq_reconstructs(exterior, hermitian, generic_params, generic_metric):
    """Test that the bidegree parts of e¹² sum back to e¹²."""
    frame, _ = hermitian.adapted_basis(generic_params, generic_metric)
    parts = exterior.decompose_pq(Form.basis(1, 2), frame)
    assert set(parts) <= {(2, 0), (1, 1), (0, 2)}
    total = Form()
    for part in parts.values():
        total = total + part
    assert total.isclose(Form.basis(1, 2), 1e-12)


def test_structure_form_bidegree(exterior, lie, hermitian, generic_params, generic_metric):
    """Test that dζ³ only has (2,0) and (1,1) parts."""
    frame, _ = hermitian.adapted_basis(generic_params, generic_metric)
    parts = exterior.decompose_pq(lie.structure_form(generic_params, frame), frame)
    assert (0, 2) not in parts or parts[(0, 2)].is_zero(1e-12)


def test_decompose_pq_singular_frame(exterior):
    """Test that a degenerate frame is rejected."""
    with pytest.raises(InvalidFrameError):
        exterior.decompose_pq(Form.basis(1), ComplexFrame([[1, 0, 0, 0, 0, 0]] * 3))


def test_ddbar_fundamental_form_n3(exterior, lie, hermitian, n3, unit_metric):
    """Test i∂∂̄ω = ζ^{12 1̄ 2̄} for the unit metric on N3."""
    frame, adapted = hermitian.adapted_basis(n3, unit_metric)
    sc = lie.real_structure_constants(n3, adapted)
    omega = hermitian.fundamental_form(unit_metric, frame)
    result = 1j * exterior.ddbar(omega, frame, sc)
    assert result.isclose(exterior.zeta_monomial(frame, (1, 2), (1, 2)), 1e-12)


def test_ddbar_coefficient_scales_with_fiber(exterior, lie, hermitian):
    """Test i∂∂̄ω = (k²/2)(ρ + λ² − 2x) ζ^{12 1̄ 2̄} on a diagonal metric."""
    params = JParams(rho=1, x=-0.5, y=0.3)
    metric = MetricCoeffs.diagonal(1.0, 1.0, 2.0)
    frame, adapted = hermitian.adapted_basis(params, metric)
    sc = lie.real_structure_constants(params, adapted)
    result = 1j * exterior.ddbar(hermitian.fundamental_form(metric, frame), frame, sc)
    expected = exterior.zeta_monomial(frame, (1, 2), (1, 2)) * (2.0 / 2 * params.sign_quantity)
    assert result.isclose(expected, 1e-12)


def test_ddbar_scalar(exterior, n3_constants):
    """Test ∂∂̄ of a constant is zero."""
    assert not exterior.ddbar(Form.scalar(1.0), ComplexFrame.standard(), n3_constants)


def test_delbar_closed_conjugate(exterior, generic_params, lie, hermitian, generic_metric):
    """Test ∂̄ζ̄¹ = 0."""
    frame, adapted = hermitian.adapted_basis(generic_params, generic_metric)
    sc = lie.real_structure_constants(generic_params, adapted)
    _, delbar = exterior.del_delbar(frame.zeta_form(1, conjugate=True), frame, sc)
    assert delbar.is_zero(1e-12)


def test_d_abelian(exterior):
    """Test that every form is closed on the abelian algebra."""
    assert not exterior.d(Form.basis(5, 6) + Form.basis(1), StructureConstants.zeros())
