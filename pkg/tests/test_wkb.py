import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tail_closed_forms import M1, M2, N1, N2
from conftest import massive, random_coupled, random_problem, random_separated
from slspec.characteristic import ln_characteristic
from slspec.wkb import (
    CoupledBC,
    SeparatedBC,
    SLProblem,
    coupled_N,
    even_boundary_integrals,
    ln_characteristic_asymptotic,
    minus_branch_check,
    s_coefficients,
    s_integrals,
    separated_M,
    series_exp,
    series_log,
)


def test_boundary_condition_validation():
    with pytest.raises(ValueError):
        SeparatedBC(0.0, 0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        CoupledBC(0.0, 1.0, 0.0, 0.0, 0.5)
    with pytest.raises(ValueError):
        CoupledBC(4.0, 1.0, 0.0, 0.0, 1.0)


def test_s_coefficients_free(free):
    s = s_coefficients(free, 0.3, 2)
    assert [float(j.value) for j in s] == pytest.approx([1, 0, 0, 0], abs=1e-15)


def test_s_coefficients_massive():
    m = 1.7
    s = s_coefficients(massive(m), 0.3, 3)
    assert float(s[2].value) == pytest.approx(m**2 / 2, rel=1e-14)
    assert float(s[3].value) == pytest.approx(0.0, abs=1e-14)
    assert float(s[4].value) == pytest.approx(-(m**4) / 8, rel=1e-13)


def test_s_minus_one_exp():
    assert float(s_coefficients(SLProblem("exp(x)"), 0.0, 1)[0].value) == pytest.approx(1.0)


def test_minus_branch(free):
    assert minus_branch_check(free, np.linspace(0, 1, 5), 5) == 0.0
    assert minus_branch_check(massive(2.0), np.linspace(0, 1, 5), 6) <= 1e-12


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_minus_branch_random(seed):
    prob = random_problem(np.random.default_rng(seed))
    assert minus_branch_check(prob, np.linspace(0, 1, 7), 5) <= 1e-10


def test_s_integrals():
    assert s_integrals(SLProblem("1"), 2)[0] == pytest.approx(1.0, abs=1e-15)
    assert s_integrals(SLProblem("exp(x)"), 2)[1] == pytest.approx(-0.25, abs=1e-13)
    assert s_integrals(massive(3.0), 2)[2] == pytest.approx(4.5, rel=1e-13)


@pytest.mark.parametrize("seed", range(10))
def test_log_p_identity(seed):
    """The integral of S_0 equals -(1/4) ln(p(1)/p(0))."""
    prob = random_problem(np.random.default_rng(seed))
    expected = -0.25 * math.log(float(prob.p(1.0)) / float(prob.p(0.0)))
    assert s_integrals(prob, 1)[1] == pytest.approx(expected, abs=1e-12)


def test_series_log_examples():
    assert series_log([0.0, 0.0, 0.0]) == [0.0, 0.0, 0.0]
    x = 0.37
    out = series_log([x], 2)
    assert out == pytest.approx([x, -(x**2) / 2])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-2, 2, allow_nan=False), min_size=1, max_size=8))
def test_series_exp_inverts_log(a):
    back = series_exp(series_log(a))
    assert np.allclose(back, a, rtol=1e-10, atol=1e-10 * max(1.0, max(abs(t) for t in a)) ** len(a))


def test_separated_M_examples(free):
    assert separated_M(free, SeparatedBC.dirichlet(), 6) == pytest.approx([0.0] * 6, abs=1e-14)
    assert separated_M(free, SeparatedBC(1, 1, 1, 1), 1)[0] == pytest.approx(2.0, rel=1e-14)
    assert separated_M(massive(3.0), SeparatedBC.dirichlet(), 1)[0] == pytest.approx(4.5, rel=1e-13)


def test_coupled_N_examples(free):
    assert coupled_N(free, CoupledBC.periodic(), 6) == pytest.approx([0.0] * 6, abs=1e-14)
    assert coupled_N(massive(3.0), CoupledBC.periodic(), 1)[0] == pytest.approx(4.5, rel=1e-13)
    assert coupled_N(free, CoupledBC(0.0, 1, 1, 0, 1), 1)[0] == pytest.approx(-2.0, rel=1e-14)


def test_massive_dirichlet_tail_matches_closed_form():
    """ln(sinh w / w) with w = sqrt(z^2 + m^2) expands in 1/z with known coefficients."""
    m = 1.3
    M = separated_M(massive(m), SeparatedBC.dirichlet(), 4)
    # w = z + m^2/(2z) - m^4/(8 z^3) + ...,  ln w = ln z + m^2/(2 z^2) - m^4/(4 z^4) + ...
    assert M == pytest.approx([m**2 / 2, -(m**2) / 2, -(m**4) / 8, m**4 / 4], rel=1e-12)


def test_expansion_examples(free):
    a = ln_characteristic_asymptotic(free, SeparatedBC.dirichlet(), 3)
    assert (a.const_block, a.lnz_coeff, a.linear_coeff) == pytest.approx((-math.log(2), -1.0, 1.0))
    assert list(a.tail.coefficients) == pytest.approx([0, 0, 0], abs=1e-14)
    z = ln_characteristic_asymptotic(free, CoupledBC.periodic(), 3, zero_mode=True)
    assert z.lnz_coeff == -2.0
    e = ln_characteristic_asymptotic(SLProblem("exp(x)"), SeparatedBC.dirichlet(), 3)
    assert e.const_block == pytest.approx(-0.25 - math.log(2), rel=1e-14)


def test_even_boundary_integrals_against_quadrature():
    prob = random_problem(np.random.default_rng(3))
    closed = even_boundary_integrals(prob, 4)
    direct = s_integrals(prob, 4)  # index i + 1 holds the integral of S_i
    for m, value in enumerate(closed):
        assert value == pytest.approx(direct[2 * m + 1], abs=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_tail_closed_form_regression(seed):
    rng = np.random.default_rng(100 + seed)
    prob = random_problem(rng)
    sep = random_separated(rng, robin=bool(seed % 2 == 0))
    cpl = random_coupled(rng, k12_zero=bool(seed % 2))
    M = separated_M(prob, sep, 2)
    N = coupled_N(prob, cpl, 2)
    for got, ref in ((M[0], M1(prob, sep)), (M[1], M2(prob, sep)), (N[0], N1(prob, cpl)), (N[1], N2(prob, cpl))):
        assert abs(got - ref) <= 1e-9 * max(1.0, abs(ref))


def test_asymptotic_residual_decays(example):
    bc = SeparatedBC.dirichlet()
    a = ln_characteristic_asymptotic(example, bc, 3)
    zs = np.array([20.0, 40.0, 80.0])
    r = [abs(ln_characteristic(example, bc, z, 1e-13).log_abs - a.evaluate(z)) for z in zs]
    slope = np.polyfit(np.log(zs), np.log(r), 1)[0]
    assert abs(slope + 4) < 0.3
