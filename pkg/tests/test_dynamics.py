import numpy as np
import pytest

from semipassive.dynamics import (
    CATALOG_NAMES,
    CERT_TOL,
    builtin_model,
    certify_semipassivity,
    model_from_config,
    polynomial_model,
)
from semipassive.errors import InvalidBox, UnknownModel


def test_cubic_vector_field():
    m = builtin_model("cubic")
    assert m.f(2.0) == -6.0
    assert m.rho == np.sqrt(2.0)


def test_lorenz_vector_field():
    m = builtin_model("lorenz")
    x = np.array([1.0, 2.0, 3.0])
    np.testing.assert_allclose(m.f(x), [10.0 * (2 - 1), 28 * 1 - 2 - 1 * 3, 1 * 2 - 8 / 3 * 3])
    np.testing.assert_array_equal(m.storage_grad(x), x - [0, 0, 38])


def test_unknown_model():
    with pytest.raises(UnknownModel):
        builtin_model("van_der_pol")


def test_cubic_bound_is_exact_at_rho():
    # x^4/2 >= x^2  <=>  x^2 >= 2, so H = x^4 - x^2 meets psi = x^4/2 at |x| = sqrt 2
    m = builtin_model("cubic")
    r = np.linspace(m.rho, 10.0, 1001)
    assert np.all(m.H(r) - m.psi(r) >= -1e-12)
    assert m.H(1.4) < m.psi(1.4)


def test_cubic_certificate():
    cert = certify_semipassivity(builtin_model("cubic"), 5.0, 10_000)
    assert cert.passed
    assert cert.worst_violation <= 0.0
    assert cert.sample_count == 10_000


def test_unstable_linear_fails_with_witness():
    cert = certify_semipassivity(builtin_model("unstable_linear"), 5.0, 10_000)
    assert not cert.passed
    assert cert.worst_check == "bound"
    (x,) = cert.worst_location
    assert abs(x) >= builtin_model("unstable_linear").rho
    assert cert.checks["bound"]["violations"] > 0


def test_lorenz_certificate():
    cert = certify_semipassivity(builtin_model("lorenz"), 100.0, 100_000)
    assert cert.passed, cert.to_dict()


@pytest.mark.parametrize("name", [n for n in CATALOG_NAMES if builtin_model(n).semipassive])
@pytest.mark.parametrize("factor", [2.0, 3.7, 10.0])
def test_catalog_passes_over_box_range(name, factor):
    m = builtin_model(name)
    cert = certify_semipassivity(m, factor * m.rho, 4096 if m.state_dim == 3 else 2000)
    assert cert.passed
    assert cert.worst_violation <= CERT_TOL


def test_certificate_is_deterministic():
    a = certify_semipassivity(builtin_model("lorenz"), 150.0, 5000)
    b = certify_semipassivity(builtin_model("lorenz"), 150.0, 5000)
    assert a == b


def test_psi_positive():
    for name in CATALOG_NAMES:
        m = builtin_model(name)
        r = np.linspace(1e-6, 50 * m.rho, 2000)
        assert np.all(m.psi(r) > 0)


def test_invalid_box():
    m = builtin_model("cubic")
    with pytest.raises(InvalidBox):
        certify_semipassivity(m, 1.0, 10_000)
    with pytest.raises(InvalidBox):
        certify_semipassivity(m, 5.0, 10)


def test_polynomial_model_from_config():
    # dx/dt = 2x - x^3: H = x^4 - 2x^2 >= x^4/2 for x^2 >= 4
    m = model_from_config({"type": "polynomial", "f": [0, 2, 0, -1],
                           "H": [0, 0, -2, 0, 1], "psi": [0, 0, 0, 0, 0.5], "rho": 2.0})
    assert m.f(1.0) == 1.0
    assert certify_semipassivity(m, 10.0, 5000).passed
    # psi claimed too large: must fail
    bad = polynomial_model([0, 2, 0, -1], [0, 0, -2, 0, 1], [0, 0, 0, 0, 2.0], 2.0)
    assert not certify_semipassivity(bad, 10.0, 5000).passed
    # H claimed larger than the true dissipation: must fail
    bad = polynomial_model([0, 2, 0, -1], [0, 0, 0, 0, 1], [0, 0, 0, 0, 0.5], 2.0)
    cert = certify_semipassivity(bad, 10.0, 5000)
    assert not cert.passed and cert.worst_check == "dissipation"
    assert model_from_config({"model": "cubic"}) == builtin_model("cubic")
    with pytest.raises(UnknownModel):
        model_from_config(42)
