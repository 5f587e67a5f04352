import math

import numpy as np
import pytest

from conftest import massive, random_problem
from slspec.characteristic import (
    PropagationError,
    characteristic_at_mu,
    characteristic_at_zero,
    characteristic_limit_over_z2,
    delta_complex_form,
    ln_characteristic,
    ln_characteristic_many,
    mu_series,
    propagate,
    wronskian_residual,
    zero_mode_detect,
)
from slspec.wkb import CoupledBC, SeparatedBC, SLProblem


def test_propagate_examples(free):
    st = propagate(free, -1.0, (0.0, 1.0))
    assert st.value[0] == pytest.approx(math.sinh(1.0), rel=1e-11)
    st = propagate(free, 0.0, (0.0, 1.0))
    assert st.value == pytest.approx([1.0, 1.0], rel=1e-12)
    st = propagate(free, math.pi**2, (0.0, 1.0))
    assert abs(st.value[0]) <= 1e-11


def test_propagate_strongly_negative_mu(free):
    z = 1000.0
    st = propagate(free, -z * z, (0.0, 1.0))
    expected = z - math.log(2 * z)  # ln(sinh z / z)
    assert st.log_scale + math.log(abs(st.vector[0])) == pytest.approx(expected, rel=1e-12)


def test_ln_omega_examples(free):
    assert ln_characteristic(free, SeparatedBC.dirichlet(), 1.0).log_abs == pytest.approx(
        math.log(math.sinh(1.0)), abs=1e-11)
    cv = ln_characteristic(free, SeparatedBC.neumann(), 2.0)
    assert cv.log_abs == pytest.approx(math.log(2 * math.sinh(2.0)), abs=1e-11)
    assert cv.sign == 1


def test_small_z_limit():
    prob = massive(1.5)
    bc = SeparatedBC(1.0, 0.3, 0.7, 1.0)
    c0 = characteristic_at_zero(prob, bc)
    for z in (1e-2, 1e-3):
        dev = ln_characteristic(prob, bc, z).log_abs - math.log(abs(c0))
        assert abs(dev) <= 10 * z**2


def test_ln_delta_examples(free):
    cv = ln_characteristic(free, CoupledBC.periodic(), 1.0)
    assert cv.value == pytest.approx(2 - 2 * math.cosh(1.0), rel=1e-11)
    assert cv.sign == -1
    bc = CoupledBC(math.pi / 2, 1.0, 0.0, 0.0, 1.0)
    assert ln_characteristic(free, bc, 0.7).value == pytest.approx(-2 * math.cosh(0.7), rel=1e-11)
    assert characteristic_at_zero(free, bc) == pytest.approx(-2.0, rel=1e-12)


def test_characteristic_at_zero(free):
    assert characteristic_at_zero(free, SeparatedBC.dirichlet()) == pytest.approx(1.0, rel=1e-12)
    m = 2.0
    assert characteristic_at_zero(massive(m), SeparatedBC.dirichlet()) == pytest.approx(math.sinh(m) / m, rel=1e-11)
    assert abs(characteristic_at_zero(free, CoupledBC.periodic())) <= 1e-12


def test_real_axis_values(free):
    lam = 2.3
    assert characteristic_at_mu(free, SeparatedBC.dirichlet(), lam**2) == pytest.approx(math.sin(lam) / lam, rel=1e-11)


@pytest.mark.parametrize("seed", range(3))
def test_wronskian_identity(seed):
    prob = random_problem(np.random.default_rng(seed))
    for z in np.geomspace(0.1, 100.0, 9):
        assert wronskian_residual(prob, z) <= 1e-9


def test_complex_form_is_real():
    prob = random_problem(np.random.default_rng(7))
    bc = CoupledBC(0.8, 1.2, 0.4, 0.3, (1 + 0.12) / 1.2)
    for z in (0.3, 1.0, 3.0):
        cf = delta_complex_form(prob, bc, z)
        ref = ln_characteristic(prob, bc, z).value
        assert abs(cf.imag) <= 1e-12 * max(1.0, abs(cf.real))
        assert cf.real == pytest.approx(ref, rel=1e-10)


def test_many_matches_single(example):
    bc = SeparatedBC(1.0, 0.5, 2.0, 1.0)
    zs = np.array([0.5, 5.0, 50.0])
    la, sg = ln_characteristic_many(example, bc, zs)
    for z, v, s in zip(zs, la, sg):
        cv = ln_characteristic(example, bc, z)
        assert (v, s) == (cv.log_abs, cv.sign)


def test_interval_mapping_preserves_spectrum():
    """The same operator on [0, 2] and rescaled to [0, 1] has the same characteristic zeros."""
    big = SLProblem("4", "0", interval=(0.0, 2.0))
    # -4 y'' on [0, 2] with Dirichlet data has eigenvalues (n pi)^2
    assert abs(characteristic_at_mu(big, SeparatedBC.dirichlet(), math.pi**2)) <= 1e-11


def test_tolerance_range(free):
    with pytest.raises(ValueError):
        ln_characteristic(free, SeparatedBC.dirichlet(), 1.0, tol=1e-3)


def test_mu_series_exact_coefficients(free):
    """sin(sqrt(mu))/sqrt(mu) = sum (-mu)^k / (2k+1)!."""
    a = mu_series(free, SeparatedBC.dirichlet()).a
    for k in range(12):
        assert a[k] == pytest.approx((-1) ** k / math.factorial(2 * k + 1), rel=1e-12, abs=1e-300)


def test_log_coefficients_bernoulli(free):
    """ln(sinh z / z) = sum 2^(2j) B_2j z^(2j) / (2j (2j)!)."""
    from scipy.special import bernoulli

    c = mu_series(free, SeparatedBC.dirichlet()).z_log_coefficients()
    B = bernoulli(30)
    for j in range(1, 12):
        ref = 2 ** (2 * j) * B[2 * j] / (2 * j * math.factorial(2 * j))
        assert c[j - 1] == pytest.approx(ref, rel=1e-12)


def test_zero_mode_neumann(free):
    found, data = zero_mode_detect(free, SeparatedBC.neumann())
    assert found
    assert np.allclose(data.phi, 1.0)
    assert data.norm2 == pytest.approx(1.0, rel=1e-12)
    assert data.phi1 == pytest.approx(1.0)
    assert data.xi == pytest.approx(-1.0)
    assert data.limit_over_z2() == pytest.approx(1.0, rel=1e-12)


def test_zero_mode_periodic(free):
    found, data = zero_mode_detect(free, CoupledBC.periodic())
    assert found
    c = data.phi[0]
    assert np.allclose(data.phi, c)
    assert abs(data.norm2 / np.conj(data.phi1)) == pytest.approx(abs(c), rel=1e-12)


def test_no_zero_mode():
    assert not zero_mode_detect(massive(1.0), SeparatedBC.dirichlet())[0]


@pytest.mark.parametrize("method", ["richardson", "series"])
def test_limit_over_z2(free, method):
    assert characteristic_limit_over_z2(free, SeparatedBC.neumann(), method=method) == pytest.approx(1.0, rel=1e-8)
    lim = characteristic_limit_over_z2(free, CoupledBC.periodic(), method=method)
    assert abs(lim) == pytest.approx(1.0, rel=1e-8)


def test_limit_routes_agree_nontrivial():
    prob = SLProblem("2 + sin(2*pi*x)", "0")
    bc = CoupledBC(0.0, 1.0, 0.0, 0.0, 1.0)
    found, data = zero_mode_detect(prob, bc)
    assert found
    r = characteristic_limit_over_z2(prob, bc)
    s = characteristic_limit_over_z2(prob, bc, method="series")
    assert r == pytest.approx(s, rel=1e-8)
    assert abs(data.limit_over_z2()) == pytest.approx(abs(s), rel=1e-8)


def test_propagation_error_is_reported():
    prob = SLProblem("1", "0")
    with pytest.raises(ValueError):
        ln_characteristic(prob, SeparatedBC.dirichlet(), -1.0)
    assert issubclass(PropagationError, ArithmeticError)
