import sys
import os
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import numpy as np
import pytest

from app.core.exceptions import InvalidMetricError
from app.schemas.metric import BundleMetricCoeffs, MetricCoeffs
from app.schemas.structure import JParams
from app.services.exterior_service import get_exterior_service
from app.services.flow_service import get_flow_service
from app.services.gauduchon_service import get_gauduchon_service
from app.services.hermitian_service import get_hermitian_service
from app.services.lie_service import get_lie_service
from app.services.verification_service import get_verification_service


@pytest.fixture
def exterior():
    """Fixture for creating ExteriorService."""
    return get_exterior_service()


@pytest.fixture
def lie(exterior):
    """Fixture for creating LieAlgebraService on a shared exterior service."""
    return get_lie_service(exterior)


@pytest.fixture
def hermitian(exterior, lie):
    """Fixture for creating HermitianService."""
    return get_hermitian_service(exterior, lie)


@pytest.fixture
def gauduchon(exterior, lie, hermitian):
    """Fixture for creating GauduchonService."""
    return get_gauduchon_service(exterior, lie, hermitian)


@pytest.fixture
def flow(hermitian, gauduchon):
    """Fixture for creating AnomalyFlowService."""
    return get_flow_service(hermitian, gauduchon)


@pytest.fixture
def verification(gauduchon):
    """Fixture for creating VerificationService."""
    return get_verification_service(gauduchon)


@pytest.fixture
def n3():
    """Complex structure dζ³ = ζ^{1 1̄} − ζ^{2 2̄} on N3."""
    return JParams(rho=0, x=-1.0)


@pytest.fixture
def unit_metric():
    """Diagonal metric r = s = k = 1."""
    return MetricCoeffs.diagonal(1.0, 1.0, 1.0)


@pytest.fixture
def unit_bundle():
    """Bundle metric r̃ = s̃ = k̃ = 1."""
    return BundleMetricCoeffs(tr2=1.0, ts2=1.0, tk2=1.0)


@pytest.fixture
def generic_params():
    """Structure with every coefficient switched on."""
    return JParams(rho=1, lam=0.7, x=0.3, y=-0.4)


@pytest.fixture
def generic_metric():
    """Non-diagonal positive definite metric."""
    return MetricCoeffs(r2=1.3, s2=0.9, k2=1.1, u=0.2 + 0.1j, v=-0.15 + 0.05j, z=0.1 - 0.2j)


@pytest.fixture
def rng():
    """Seeded generator for random draws inside tests."""
    return np.random.default_rng(7)


@pytest.fixture
def draw_balanced():
    """
    Sampler of balanced (params, metric) pairs.

    The adapted coefficients solve s_e² + x r_e² = λu_e₂ and y r_e² = λu_e₁;
    v and z are then switched on without changing them.
    """
    def draw(rng: np.random.Generator) -> tuple[JParams, MetricCoeffs]:
        while True:
            re2, k2 = (float(c) for c in rng.uniform(0.5, 2.0, size=2))
            v = complex(*rng.uniform(-0.4, 0.4, size=2))
            z = complex(*rng.uniform(-0.4, 0.4, size=2))
            if rng.random() < 0.5:
                lam, x, y = 0.0, float(rng.uniform(-2.0, -0.25)), 0.0
                ue = complex(*rng.uniform(-0.3, 0.3, size=2))
            else:
                lam, x, y = (float(c) for c in rng.uniform([0.25, -2.0, -2.0], [2.0, 2.0, 2.0]))
                ue = complex(y * re2 / lam, float(rng.uniform(-1.0, 1.0)))
            se2 = lam * ue.imag - x * re2
            if se2 < 0.1 or re2 * se2 < 1.1 * abs(ue) ** 2:
                continue
            try:
                metric = MetricCoeffs(r2=re2 + abs(z) ** 2 / k2, s2=se2 + abs(v) ** 2 / k2, k2=k2,
                                      u=ue + 1j * v.conjugate() * z / k2, v=v, z=z)
            except InvalidMetricError:
                continue
            return JParams(rho=int(rng.integers(0, 2)), lam=lam, x=x, y=y), metric

    return draw
