import math

import numpy as np
import pytest
from mpmath import mp
from mpmath import zeta as mp_zeta

from conftest import massive, random_coupled, random_problem, random_separated
from slspec.characteristic import characteristic_at_mu
from slspec.oracle import EigenvalueList, direct_zeta, heat_trace, scan_eigenvalues
from slspec.spectral import NegativeSpectrumError, heat_coefficients, zeta_many
from slspec.wkb import CoupledBC, SeparatedBC, SLProblem


def test_free_dirichlet_eigenvalues(free):
    ev = scan_eigenvalues(free, SeparatedBC.dirichlet(), 20.0)
    assert ev.values == pytest.approx(math.pi * np.arange(1, 7), rel=1e-12)
    assert not ev.zero_mode


def test_free_periodic_eigenvalues_are_doubled(free):
    ev = scan_eigenvalues(free, CoupledBC.periodic(), 20.0)
    assert ev.values == pytest.approx(2 * math.pi * np.array([1, 1, 2, 2, 3, 3]), rel=1e-7)
    assert ev.zero_mode and ev.double_roots == 3
    assert ev.count == 7


def test_massive_dirichlet_eigenvalues():
    m = 2.0
    ev = scan_eigenvalues(massive(m), SeparatedBC.dirichlet(), 40.0)
    n = np.arange(1, len(ev.values) + 1)
    assert ev.values == pytest.approx(np.sqrt(n**2 * math.pi**2 + m**2), rel=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_eigenvalues_are_roots(seed):
    rng = np.random.default_rng(seed)
    prob = random_problem(rng)
    bc = random_separated(rng)
    ubc = prob.unit_bc(bc)
    ev = scan_eigenvalues(prob, bc, 30 * math.pi)
    step = 0.5 * math.pi / prob.sqrt_p_integral() / ev.grid_factor
    for lam in ev.values:
        scale = max(abs(characteristic_at_mu(prob, ubc, (lam + d) ** 2, unit=True)) for d in (-step, step))
        assert abs(characteristic_at_mu(prob, ubc, lam * lam, unit=True)) <= 1e-9 * scale


@pytest.mark.parametrize("seed", range(3))
def test_weyl_count(seed):
    rng = np.random.default_rng(seed)
    prob = random_problem(rng)
    lam_max = 20 * math.pi
    for bc in (random_separated(rng), random_coupled(rng, False, positive=True)):
        ev = scan_eigenvalues(prob, bc, lam_max)
        assert abs(ev.weyl_discrepancy) <= 2
        gaps = np.diff(ev.values[10:])
        mean_gap = math.pi / prob.sqrt_p_integral()
        assert np.all(gaps < 2 * mean_gap)


def test_negative_spectrum_rejected():
    with pytest.raises(NegativeSpectrumError):
        scan_eigenvalues(SLProblem("1", "-30"), SeparatedBC.dirichlet(), 20.0)


def test_direct_zeta_free_dirichlet_s2(free):
    d = direct_zeta(free, SeparatedBC.dirichlet(), 2.0, n_target=1000)
    assert d.n_eigenvalues == 1000
    assert d.value.real == pytest.approx(1 / 90, rel=1e-8)


def test_direct_zeta_empty_list(free):
    empty = EigenvalueList(np.array([]), False, 1.0, 8, 1 / math.pi, 0)
    assert direct_zeta(free, SeparatedBC.dirichlet(), 0.75, eigen=empty, tail="none").value == 0


def test_direct_zeta_needs_strip(free):
    with pytest.raises(ValueError):
        direct_zeta(free, SeparatedBC.dirichlet(), 0.4)


def test_tail_gap_shrinks(free):
    bc = SeparatedBC.dirichlet()
    prob = SLProblem("1.5 + x", "1")
    gaps = []
    for n in (20, 80, 320):
        with_tail = direct_zeta(prob, bc, 0.75, n_target=n).value
        without = direct_zeta(prob, bc, 0.75, n_target=n, tail="none").value
        gaps.append(abs(with_tail - without))
    assert gaps[0] > gaps[1] > gaps[2]


def test_direct_zeta_matches_exact_periodic(free):
    d = direct_zeta(free, CoupledBC.periodic(), 0.75, n_target=200)
    assert d.value.real == pytest.approx(2 * (2 * math.pi) ** -1.5 * float(mp_zeta(1.5)), rel=1e-6)


def test_heat_trace_free_dirichlet(free):
    t = 0.01
    exact = float(mp.nsum(lambda n: mp.exp(-t * n * n * mp.pi**2), [1, mp.inf]))
    h = heat_trace(free, SeparatedBC.dirichlet(), t)
    assert h.value == pytest.approx(exact, rel=1e-9)
    coeffs = heat_coefficients(free, SeparatedBC.dirichlet(), 3)
    assert coeffs.trace(t, 4) == pytest.approx(h.value, rel=1e-3)


def test_heat_trace_large_time(free):
    t = 2.0
    h = heat_trace(free, SeparatedBC.dirichlet(), t)
    assert h.value == pytest.approx(math.exp(-t * math.pi**2), rel=1e-6)


def test_heat_trace_periodic_zero_mode(free):
    t = 0.01
    h = heat_trace(free, CoupledBC.periodic(), t)
    exact = 1 + 2 * float(mp.nsum(lambda n: mp.exp(-t * 4 * n * n * mp.pi**2), [1, mp.inf]))
    assert h.value == pytest.approx(exact, rel=1e-9)


@pytest.mark.parametrize("family", ["robin", "dirichlet", "coupled"])
@pytest.mark.parametrize("seed", range(5))
def test_strip_consistency(family, seed):
    rng = np.random.default_rng(100 + seed)
    prob = random_problem(rng)
    bc = {
        "robin": lambda: random_separated(rng, True),
        "dirichlet": lambda: SeparatedBC.dirichlet(),
        "coupled": lambda: random_coupled(rng, False, positive=True),
    }[family]()
    eigen = scan_eigenvalues(prob, bc, 200 * math.pi / prob.sqrt_p_integral())
    svals = (0.6, 0.75, 0.9)
    for s, cont in zip(svals, zeta_many(prob, bc, svals)):
        cont = cont.total
        direct = direct_zeta(prob, bc, s, eigen=eigen).value
        assert abs(cont - direct) <= 1e-4 * abs(direct)
