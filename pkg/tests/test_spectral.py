import cmath
import math

import numpy as np
import pytest
from mpmath import mp, mpf
from mpmath import zeta as mp_zeta

from conftest import bc_families, massive, random_coupled, random_problem, random_separated
from slspec.funcexpr import SmoothFunction
from slspec.spectral import (
    NegativeSpectrumError,
    PoleError,
    Z_function,
    functional_determinant,
    functional_determinant_prime,
    heat_coeff_closed_form,
    heat_coefficients,
    invariant_potential,
    pole_part,
    robin_to_separated,
    zeta,
    zeta_at_nonpositive_int,
    zeta_many,
    zeta_prime_zero,
    zeta_residue,
)
from slspec.wkb import CoupledBC, SeparatedBC, SLProblem

mp.dps = 30


def dirichlet_free_zeta(s):
    s = mpf(s) if not isinstance(s, complex) else mp.mpc(s.real, s.imag)
    return complex(mp.pi ** (-2 * s) * mp_zeta(2 * s))


@pytest.mark.parametrize("s", [0.75, 0.6, 1.3, 2.0, 3.0, 0.3 + 0.5j, -0.3, 0.1])
def test_free_dirichlet(free, s):
    v = zeta(free, SeparatedBC.dirichlet(), s)
    assert abs(v.total - dirichlet_free_zeta(s)) <= 1e-10 * max(1.0, abs(v.total))


def test_free_dirichlet_at_zero(free):
    assert zeta(free, SeparatedBC.dirichlet(), 0.0).total.real == pytest.approx(-0.5, abs=1e-14)


def test_neumann_zero_mode(free):
    v = zeta(free, SeparatedBC.neumann(), 0.75)
    assert v.zero_mode
    assert v.total.real == pytest.approx(dirichlet_free_zeta(0.75).real, rel=1e-10)


def test_periodic_zero_mode(free):
    v = zeta(free, CoupledBC.periodic(), 0.75)
    expected = 2 * (2 * math.pi) ** -1.5 * float(mp_zeta(1.5))
    assert v.total.real == pytest.approx(expected, rel=1e-10)
    assert zeta(free, CoupledBC.periodic(), 0.0).total.real == pytest.approx(-1.0, abs=1e-14)


def test_sin_prefactor_kills_Z_at_nonpositive_integers(example):
    for bc in bc_families().values():
        for n in (0, 1, 2):
            assert Z_function(example, bc, -n) == 0


def test_batch_matches_single(example):
    bc = SeparatedBC(1.0, 0.5, 2.0, 1.0)
    svals = [0.75, 1.25, -0.4]
    batch = zeta_many(example, bc, svals)
    for s, b in zip(svals, batch):
        assert b.total == pytest.approx(zeta(example, bc, s).total, rel=1e-9)


def test_continuation_is_analytic_across_integers(example):
    """Values near s = 2 approach the exact integer limit from both sides."""
    bc = SeparatedBC.dirichlet()
    center = zeta(example, bc, 2.0).total.real
    left = zeta(example, bc, 2.0 - 1e-4).total.real
    right = zeta(example, bc, 2.0 + 1e-4).total.real
    assert 0.5 * (left + right) == pytest.approx(center, rel=1e-7)


def test_pole_guard(free):
    with pytest.raises(PoleError):
        zeta(free, SeparatedBC.dirichlet(), 0.5)
    with pytest.raises(PoleError):
        zeta(free, SeparatedBC.dirichlet(), -1.5 + 1e-8)
    with pytest.raises(ValueError):
        zeta(free, SeparatedBC.dirichlet(), -3.5, L=5)


def test_negative_spectrum_detected():
    prob = SLProblem("1", "-30")
    with pytest.raises(NegativeSpectrumError):
        zeta(prob, SeparatedBC.dirichlet(), 0.75)


def test_residues(free):
    assert zeta_residue(free, SeparatedBC.dirichlet(), 0) == pytest.approx(1 / (2 * math.pi), rel=1e-14)
    assert zeta_residue(free, SeparatedBC.dirichlet(), 1) == pytest.approx(0.0, abs=1e-14)
    assert zeta_residue(SLProblem("4"), SeparatedBC.dirichlet(), 0) == pytest.approx(1 / (4 * math.pi), rel=1e-13)


def test_residue_matches_numeric_limit(example):
    bc = SeparatedBC(1.0, 0.5, 2.0, 1.0)
    eps = [1e-3, 5e-4]
    r = [e * zeta(example, bc, 0.5 + e).total.real for e in eps]
    assert 2 * r[1] - r[0] == pytest.approx(zeta_residue(example, bc, 0), abs=1e-6)


def test_residue_at_negative_half_matches_pole_part(example):
    bc = SeparatedBC(1.0, 0.5, 2.0, 1.0)
    eps = 1e-5
    num = eps * (pole_part(example, bc, -0.5 + eps) - pole_part(example, bc, -0.5 - eps)) / 2
    assert num.real == pytest.approx(zeta_residue(example, bc, 1), rel=1e-6)


@pytest.mark.parametrize(
    "bc, expected",
    [
        (SeparatedBC.dirichlet(), -0.5),
        (SeparatedBC(1.0, 1.0, 1.0, 1.0), 0.5),
        (SeparatedBC(0.0, 1.0, 1.0, 0.0), 0.0),
        (SeparatedBC(1.0, 0.0, 1.0, 2.0), 0.0),
    ],
)
def test_zeta_at_zero(bc, expected):
    prob = SLProblem("1.5 + x", "2")
    assert zeta_at_nonpositive_int(prob, bc, 0) == expected


def test_periodic_zeta_minus_one(free):
    assert zeta_at_nonpositive_int(free, CoupledBC.periodic(), 1) == pytest.approx(0.0, abs=1e-14)


def test_zeta_minus_one_massive_dirichlet():
    """Eigenvalues n^2 pi^2 + m^2 give zeta(-1) = pi^2 zeta_R(-2) + m^2 zeta_R(0) = -m^2/2."""
    m = 2.0
    assert zeta_at_nonpositive_int(massive(m), SeparatedBC.dirichlet(), 1) == pytest.approx(-(m**2) / 2, rel=1e-12)


def test_zeta_prime_zero_examples(free):
    assert zeta_prime_zero(free, SeparatedBC.dirichlet()) == pytest.approx(-math.log(2), abs=1e-12)
    m = 1.5
    assert zeta_prime_zero(massive(m), SeparatedBC.dirichlet()) == pytest.approx(
        -math.log(2 * math.sinh(m) / m), abs=1e-11)
    assert zeta_prime_zero(free, CoupledBC.periodic()) == pytest.approx(0.0, abs=1e-12)


POSITIVE_BCS = {
    "dirichlet": SeparatedBC.dirichlet(),
    "robin": SeparatedBC(1.0, 0.5, 2.0, 1.0),
    "coupled": CoupledBC(0.3, 1.0, 0.0, 0.0, 1.0),
    "coupled_k12": CoupledBC(-0.7, 1.2, -0.4, -0.3, (1.0 + 0.12) / 1.2),
}


@pytest.mark.parametrize("name", sorted(POSITIVE_BCS))
def test_zeta_prime_routes_agree(name):
    prob = SLProblem("2 + sin(2*pi*x)", "2 + cos(2*pi*x)")
    bc = POSITIVE_BCS[name]
    a = zeta_prime_zero(prob, bc)
    b = zeta_prime_zero(prob, bc, route="numeric")
    assert a == pytest.approx(b, abs=1e-8)


def test_determinants(free):
    assert functional_determinant(free, SeparatedBC.dirichlet()).value == pytest.approx(2.0, rel=1e-11)
    for m in (1.0, 2.5):
        d = functional_determinant(massive(m), SeparatedBC.dirichlet())
        assert d.value == pytest.approx(2 * math.sinh(m) / m, rel=1e-10)
        d = functional_determinant(massive(m), CoupledBC.periodic())
        assert d.value == pytest.approx(4 * math.sinh(m / 2) ** 2, rel=1e-10)


def test_primed_determinants(free):
    d = functional_determinant_prime(free, SeparatedBC.neumann())
    assert d.zero_mode_extracted and d.value == pytest.approx(2.0, rel=1e-10)
    assert functional_determinant_prime(free, CoupledBC.periodic()).value == pytest.approx(1.0, rel=1e-10)


def test_determinant_preconditions(free):
    with pytest.raises(ValueError):
        functional_determinant_prime(free, SeparatedBC(0.0, 1.0, 1.0, 1.0))
    with pytest.raises(ValueError):
        functional_determinant(free, SeparatedBC.neumann())


def test_interval_invariance():
    """Rescaling [0, 2] to [0, 1] leaves the spectrum, hence zeta and det, unchanged."""
    a = SLProblem("4", "1", interval=(0.0, 2.0))
    b = SLProblem("1", "1")
    bc = SeparatedBC.dirichlet()
    assert zeta(a, bc, 0.75).total == pytest.approx(zeta(b, bc, 0.75).total, rel=1e-10)


def test_heat_coefficient_examples(free):
    h = heat_coefficients(free, SeparatedBC.dirichlet(), 3)
    assert h[0.0] == pytest.approx(1 / (2 * math.sqrt(math.pi)), rel=1e-14)
    assert h[0.5] == -0.5
    periodic = heat_coefficients(SLProblem("2 + sin(2*pi*x)", "1 + cos(2*pi*x)"), CoupledBC.periodic(), 7)
    for idx in (0.5, 1.5, 2.5, 3.5):
        assert abs(periodic[idx]) <= 1e-9


def test_heat_coefficients_need_enough_orders(free):
    with pytest.raises(ValueError):
        heat_coefficients(free, SeparatedBC.dirichlet(), 6, L=2)


def test_heat_closed_form_examples(free):
    m = 1.7
    assert heat_coeff_closed_form(massive(m), SeparatedBC.dirichlet(), "a1") == pytest.approx(
        -(m**2) / (2 * math.sqrt(math.pi)), rel=1e-12)
    assert heat_coeff_closed_form(free, SeparatedBC(1, 1, 1, 1), "a1") == pytest.approx(-2 / math.sqrt(math.pi))
    assert heat_coeff_closed_form(massive(m), CoupledBC.periodic(), "a3/2") == pytest.approx(0.0, abs=1e-13)


@pytest.mark.parametrize("seed", range(4))
def test_heat_closed_forms_match_machinery(seed):
    rng = np.random.default_rng(seed)
    prob = random_problem(rng)
    for bc in (random_separated(rng, True), random_separated(rng, False), random_coupled(rng, False),
               random_coupled(rng, True)):
        h = heat_coefficients(prob, bc, 3)
        assert heat_coeff_closed_form(prob, bc, "a1") == pytest.approx(h[1.0], rel=1e-9, abs=1e-12)
        assert heat_coeff_closed_form(prob, bc, "a3/2") == pytest.approx(h[1.5], rel=1e-9, abs=1e-12)


def test_robin_translation():
    assert robin_to_separated(SmoothFunction("1"), 0.0, 0.0) == SeparatedBC(0.0, 1.0, 0.0, 1.0)
    assert robin_to_separated(SmoothFunction("1"), 1.0, 0.0) == SeparatedBC(-1.0, 1.0, 0.0, 1.0)
    bc = robin_to_separated("exp(x)", 0.0, 0.0)
    assert (bc.A1, bc.A2) == pytest.approx((-0.25, 1.0))


def test_invariant_potential():
    E, w = invariant_potential(massive(3.0), 0.4)
    assert (E, w) == pytest.approx((-9.0, 0.0))
    assert invariant_potential(SLProblem("exp(x)"), 0.0) == pytest.approx((-3 / 16, 0.25))
    assert invariant_potential(SLProblem("(1 + x)^2"), 0.0) == pytest.approx((-0.25, 0.5))


def test_zeta_value_diagnostics(example):
    v = zeta(example, SeparatedBC.dirichlet(), 0.75)
    assert v.L == 5 and not v.zero_mode
    assert v.total == pytest.approx(v.analytic_part + v.pole_part)
    assert {"z_s", "z_max", "quad_error"} <= set(v.diagnostics)
    assert cmath.isfinite(v.total)
