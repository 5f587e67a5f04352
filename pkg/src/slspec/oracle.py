"""Independent reference values from explicitly computed eigenvalues.

Eigenvalues ``lambda_n > 0`` are located as zeros of the characteristic
function on the real ``lambda`` axis: a fine scan finds sign changes, which
are refined with Brent's method, and local extrema of ``|Char|`` that do not
change sign are examined for double roots (degenerate pairs under coupled
conditions).  The zeta function and heat trace are then plain sums plus a
Weyl-law estimate of the remainder.  Nothing here uses the asymptotic
expansion or the contour representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import erfc

from .characteristic import DEFAULT_TOL, characteristic_at_mu, ln_characteristic, zero_mode_detect
from .spectral import NegativeSpectrumError
from .wkb import SLProblem

__all__ = ["EigenvalueList", "DirectSum", "scan_eigenvalues", "direct_zeta", "heat_trace"]

DOUBLE_ROOT_REL = 1e-7


@dataclass
class EigenvalueList:
    """Positive eigenvalues ``lambda_n`` (repeated by multiplicity) below ``lambda_max``."""

    values: np.ndarray
    zero_mode: bool
    lambda_max: float
    grid_factor: int
    weyl_expected: float
    double_roots: int

    @property
    def count(self):
        """Number of eigenvalues in ``[0, lambda_max]`` counting the zero mode."""
        return len(self.values) + int(self.zero_mode)

    @property
    def weyl_discrepancy(self):
        return self.count - self.weyl_expected


@dataclass
class DirectSum:
    value: complex
    partial_sum: complex
    tail: complex
    n_eigenvalues: int
    lambda_max: float
    error_bound: float | None = None


def _check_no_negative(prob, ubc, zero_mode, tol):
    ref = characteristic_at_mu(prob, ubc, 0.0, tol, unit=True)
    v_min = float(np.min(prob.V(np.linspace(0.0, 1.0, 257))))
    z_hi = math.sqrt(max(0.0, -v_min) / float(np.min(prob.p(np.linspace(0.0, 1.0, 257))))) + 50.0
    zs = np.geomspace(1e-3, z_hi, 80)
    signs = [ln_characteristic(prob, ubc, float(z), tol, unit=True).sign for z in zs]
    if zero_mode:
        if len(set(signs)) > 1:
            raise NegativeSpectrumError("negative eigenvalue detected")
        return
    if ref == 0 or any(s != (1 if ref > 0 else -1) for s in signs):
        raise NegativeSpectrumError("negative eigenvalue detected")


def _scan_once(f, lam_max, step):
    start = 1e-6 * step
    grid = np.arange(start, lam_max + 3 * step, step)
    vals = np.array([f(x) for x in grid])
    roots = []
    doubles = 0
    for i in range(len(grid) - 1):
        a, b, fa, fb = grid[i], grid[i + 1], vals[i], vals[i + 1]
        if fa == 0.0:
            roots.append(a)
            continue
        if fa * fb < 0:
            roots.append(brentq(f, a, b, xtol=1e-14 * max(1.0, b), maxiter=200))
    # extrema of |f| without a sign change may hide a double root or a close pair
    for i in range(1, len(grid) - 1):
        f0, f1, f2 = vals[i - 1], vals[i], vals[i + 1]
        if not (f0 * f1 > 0 and f1 * f2 > 0 and abs(f1) < abs(f0) and abs(f1) < abs(f2)):
            continue
        sgn = 1.0 if f1 > 0 else -1.0
        res = minimize_scalar(lambda x: sgn * f(x), bounds=(grid[i - 1], grid[i + 1]), method="bounded",
                              options={"xatol": 1e-12 * max(1.0, grid[i])})
        xm, fm = float(res.x), sgn * float(res.fun)
        amp = max(abs(f0), abs(f2))
        if fm * f1 < 0:
            roots.append(brentq(f, grid[i - 1], xm, xtol=1e-14 * max(1.0, xm), maxiter=200))
            roots.append(brentq(f, xm, grid[i + 1], xtol=1e-14 * max(1.0, xm), maxiter=200))
        elif abs(fm) <= DOUBLE_ROOT_REL * amp:
            roots.extend([xm, xm])
            doubles += 1
    roots = np.sort(np.array(roots))
    return roots[roots <= lam_max], doubles


def scan_eigenvalues(prob: SLProblem, bc, lambda_max: float, grid_factor: int = 8,
                     tol: float = DEFAULT_TOL, retries: int = 3) -> EigenvalueList:
    """All eigenvalues ``0 < lambda_n <= lambda_max``.

    The scan step is ``(pi / I) / grid_factor`` with ``I = int p^(-1/2)``.
    When the count differs from the Weyl estimate ``lambda_max I / pi`` by
    more than 2, the scan is repeated with a doubled grid factor.

    Raises
    ------
    NegativeSpectrumError
        If the operator has a negative eigenvalue.
    RuntimeError
        If the Weyl check still fails after ``retries`` refinements.
    """
    if not lambda_max > 0:
        raise ValueError("lambda_max must be positive")
    ubc = prob.unit_bc(bc)
    zero_mode = zero_mode_detect(prob, ubc, unit=True)[0]
    _check_no_negative(prob, ubc, zero_mode, tol)
    I = prob.sqrt_p_integral()
    weyl = lambda_max * I / math.pi

    def f(lam):
        return characteristic_at_mu(prob, ubc, lam * lam, tol, unit=True)

    gf = grid_factor
    for _ in range(retries + 1):
        roots, doubles = _scan_once(f, lambda_max, (math.pi / I) / gf)
        out = EigenvalueList(roots, zero_mode, lambda_max, gf, weyl, doubles)
        if abs(out.weyl_discrepancy) <= 2:
            return out
        gf *= 2
    raise RuntimeError(f"eigenvalue count {out.count} disagrees with the Weyl estimate {weyl:.2f}")


def _default_lambda_max(prob, n):
    # half a mean spacing past the n-th eigenvalue, so root n is not on the edge
    return (n + 0.5) * math.pi / prob.sqrt_p_integral()


def _counting_offset(ev, lam_max, I, zero_mode):
    """Mean of ``N(lambda) - I lambda / pi`` over the last two mean periods."""
    lo = max(0.0, lam_max - 2.0 * math.pi / I)
    grid = np.linspace(lo, lam_max, 4001)[:-1]
    counts = np.searchsorted(ev, grid, side="right") + int(zero_mode)
    return float(np.mean(counts - I * grid / math.pi))


def direct_zeta(prob: SLProblem, bc, s, lambda_max: float | None = None, n_target: int = 60,
                eigen: EigenvalueList | None = None, tail: str = "weyl") -> DirectSum:
    """``sum lambda_n^(-2s)`` over the computed eigenvalues plus a Weyl tail.

    With ``tail="none"`` only the partial sum is returned.

    Writing the remainder as a Stieltjes integral against the counting
    function ``N(lambda) ~ I lambda / pi + b`` gives

        sum_{lambda_n > Lambda} lambda_n^(-2s)
            ~ (I/pi) Lambda^(1-2s) 2s/(2s-1) - (N(Lambda) - b) Lambda^(-2s),

    with ``b`` the average offset of ``N`` over the last two mean periods.
    Requires ``Re s > 1/2``.
    """
    s = complex(s)
    if s.real <= 0.5:
        raise ValueError("direct summation needs Re s > 1/2")
    if tail not in ("weyl", "none"):
        raise ValueError(f"unknown tail {tail!r}; expected 'weyl' or 'none'")
    if eigen is None:
        lam = lambda_max or _default_lambda_max(prob, n_target)
        eigen = scan_eigenvalues(prob, bc, lam)
    ev = eigen.values
    Lam = eigen.lambda_max
    I = prob.sqrt_p_integral()
    partial = complex(np.sum(ev.astype(complex) ** (-2 * s)))
    if tail == "none":
        return DirectSum(partial, partial, 0j, len(ev), Lam)
    b = _counting_offset(ev, Lam, I, eigen.zero_mode)
    n_lam = len(ev) + int(eigen.zero_mode)
    tail = (I / math.pi) * Lam ** (1 - 2 * s) * 2 * s / (2 * s - 1) - (n_lam - b) * Lam ** (-2 * s)
    return DirectSum(partial + tail, partial, complex(tail), len(ev), Lam)


def heat_trace(prob: SLProblem, bc, t: float, eigen: EigenvalueList | None = None,
               cutoff: float = 30.0) -> DirectSum:
    """``Tr exp(-t L) = sum exp(-t lambda_n^2)`` including a zero mode.

    Eigenvalues are summed up to ``Lambda = sqrt(cutoff / t)``; the remainder
    is estimated by the Weyl law and bounded by ``exp(-t Lambda^2)/(2 t Lambda)``
    times the Weyl density.

    Raises
    ------
    ValueError
        If the truncation bound exceeds ``1e-6`` of the sum.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    lam_max = math.sqrt(cutoff / t)
    if eigen is None or eigen.lambda_max < lam_max:
        eigen = scan_eigenvalues(prob, bc, lam_max)
    ev = eigen.values[eigen.values <= lam_max]
    I = prob.sqrt_p_integral()
    partial = float(np.sum(np.exp(-t * ev**2))) + (1.0 if eigen.zero_mode else 0.0)
    start = (ev[-1] if len(ev) else 0.0) + math.pi / (2 * I)
    tail = (I / math.pi) * 0.5 * math.sqrt(math.pi / t) * erfc(start * math.sqrt(t))
    bound = (I / math.pi) * math.exp(-t * lam_max**2) / (2 * t * lam_max)
    if bound > 1e-6 * (partial + tail):
        raise ValueError(f"truncation bound {bound:.3g} too large; increase the cutoff")
    return DirectSum(partial + tail, partial, tail, len(ev), lam_max, bound)
