"""Analytically continued zeta function, determinants and heat coefficients.

Along the imaginary axis the zeta function is

    zeta(s) = sin(pi s)/pi * int_0^inf z^(-2s) d/dz rho(z) dz,

with ``rho = ln|Char(iz)|`` (divided by ``z^2`` when zero is an eigenvalue).
Subtracting the large-z expansion on ``[1, inf)`` gives the pole part in
closed form; what is left, ``Z(s)``, is evaluated after integrating by parts
so that no derivative of ``rho`` is ever formed:

    Z(s) = sin(pi s)/pi * { B + 2s [ J0 + J1 + sum_{j<=K} c_j/(2j - 2s) ] }

where ``B = asym(1) - rho_ref``, ``c_j`` are the Taylor coefficients of
``rho(z) - rho_ref`` in ``z^2`` (from the mu-derivative chain), ``J0`` is the
small-z integral with ``K`` of those terms removed and ``J1`` the large-z
integral of ``rho - asym``.  The representation is valid for
``-(L+1)/2 < Re s < K + 1`` with ``K = max(1, floor(Re s) + 1)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .characteristic import (
    DEFAULT_TOL,
    characteristic_at_zero,
    ln_characteristic,
    mu_series,
    zero_mode_detect,
)
from .funcexpr import SmoothFunction
from .quadrature import CachedFunction, integrate
from .wkb import (
    CoupledBC,
    SeparatedBC,
    SLProblem,
    coupled_Q,
    delta,
    ln_characteristic_asymptotic,
)

__all__ = [
    "ZetaValue",
    "DeterminantResult",
    "HeatCoefficients",
    "NegativeSpectrumError",
    "PoleError",
    "Z_function",
    "pole_part",
    "zeta",
    "zeta_many",
    "zeta_residue",
    "zeta_at_nonpositive_int",
    "zeta_prime_zero",
    "functional_determinant",
    "functional_determinant_prime",
    "heat_coefficients",
    "heat_coeff_closed_form",
    "robin_to_separated",
    "invariant_potential",
]

POLE_GUARD = 1e-6
QUAD_TOL = 1e-11
EXTRA_TAIL = 3  # asymptotic coefficients beyond L used for the cut-off tail


class NegativeSpectrumError(ValueError):
    """The characteristic function changes sign on the imaginary axis."""


class PoleError(ValueError):
    """``s`` is within the guard distance of a pole of zeta."""


# ---------------------------------------------------------------------------
# result types


@dataclass
class ZetaValue:
    s: complex
    total: complex
    analytic_part: complex
    pole_part: complex
    L: int
    zero_mode: bool
    diagnostics: dict = field(default_factory=dict)


@dataclass
class DeterminantResult:
    value: float
    log_value: float
    zero_mode_extracted: bool
    route: str
    numeric_log_value: float | None = None
    route_discrepancy: float | None = None
    diagnostics: dict = field(default_factory=dict)


@dataclass
class HeatCoefficients:
    """Coefficients ``a_{n/2}`` of ``Tr exp(-t L) ~ t^(-1/2) sum_n a_{n/2} t^(n/2)``."""

    values: list  # (index as float n/2, value)
    convention: str = "t^(-1/2) sum a_{n/2} t^(n/2)"

    def as_dict(self):
        return {idx: val for idx, val in self.values}

    def __getitem__(self, index):
        for idx, val in self.values:
            if idx == index:
                return val
        raise KeyError(index)

    def trace(self, t, n_terms=None):
        """Truncated small-t expansion of the heat trace."""
        vals = self.values if n_terms is None else self.values[:n_terms]
        return sum(v * t ** (idx - 0.5) for idx, v in vals)


# ---------------------------------------------------------------------------
# helpers for sin(pi s) with exact integer zeros


def sin_pi(s):
    """``sin(pi s)`` with the argument reduced by the nearest integer."""
    s = complex(s)
    n = round(s.real)
    r = s - n
    val = cmath.sin(math.pi * r)
    return -val if n % 2 else val


def sinc_pi(x):
    """``sin(pi x) / (pi x)``, equal to 1 at ``x = 0``."""
    x = complex(x)
    if abs(x) < 1e-8:
        return 1.0 - (math.pi * x) ** 2 / 6.0
    return sin_pi(x) / (math.pi * x)


def _poles(L):
    return [0.5] + [-(i / 2.0) for i in range(1, L + 1, 2)]


def _check_pole(s, L):
    for pole in _poles(L):
        if abs(s - pole) < POLE_GUARD:
            raise PoleError(f"s = {s} is within {POLE_GUARD:g} of the pole at {pole}; use zeta_residue")


# ---------------------------------------------------------------------------
# evaluation context


class _Context:
    """Everything about one (problem, bc, L, zero mode) that does not depend on s."""

    def __init__(self, prob: SLProblem, ubc, L: int, zero_mode: bool, tol: float):
        self.prob = prob
        self.bc = ubc
        self.L = L
        self.zero_mode = zero_mode
        self.tol = tol
        self.asym = ln_characteristic_asymptotic(prob, ubc, L + EXTRA_TAIL, zero_mode, unit=True)
        self.series = mu_series(prob, ubc, nterms=28, tol=tol, unit=True)
        self.c = list(self.series.z_log_coefficients(zero_mode))
        if zero_mode:
            ref_value = -self.series.a[1]
        else:
            ref_value = characteristic_at_zero(prob, ubc, tol, unit=True)
        if ref_value == 0:
            raise ValueError("characteristic function vanishes at zero: a zero mode is present")
        self.ref = math.log(abs(ref_value))
        self.ref_sign = 1 if ref_value > 0 else -1
        self.radius = self.series.radius(zero_mode)
        self.z_s = min(0.5, 0.3 * self.radius)
        self.rho = CachedFunction(self._rho)
        self.I = self.asym.linear_coeff

    # rho(z) = ln|Char(iz)| (- 2 ln z)
    def _rho(self, zs):
        out = np.empty(len(zs))
        for i, z in enumerate(zs):
            cv = ln_characteristic(self.prob, self.bc, float(z), self.tol, unit=True)
            if cv.sign != self.ref_sign:
                raise NegativeSpectrumError(
                    f"Char(iz) changes sign between z=0 and z={z:g}: the operator has a negative eigenvalue"
                )
            out[i] = cv.log_abs - (2.0 * math.log(z) if self.zero_mode else 0.0)
        return out

    def asym_value(self, z, L=None):
        return self.asym.evaluate(z, self.L if L is None else L)

    @property
    def boundary_B(self):
        return float(self.asym_value(1.0)) - self.ref

    def z_max(self, s_re_min):
        """Cut-off for the large-z integral.

        Balances the truncation of the asymptotic tail against the
        propagation error of ``rho``, which grows roughly like ``tol * I * z``.
        The exponentially small corrections must also have decayed.
        """
        grow = max(0.0, -2.0 * s_re_min)
        lo = max(2.0, 16.0 / self.I)
        while math.exp(-2.0 * self.I * lo) * lo**grow > 1e-14 and lo < 1000.0:
            lo *= 1.1
        m_last = abs(self.asym.tail[self.L + EXTRA_TAIL])
        expo = self.L + EXTRA_TAIL + 2.0 * s_re_min
        if m_last == 0 or expo <= 0:
            return float(min(lo, 1000.0))
        grid = np.geomspace(lo, max(lo, 1000.0), 200)
        cost = m_last * grid**-expo / expo + self.noise(grid, s_re_min)
        return float(grid[np.argmin(cost)])

    def noise(self, z, s_re_min):
        """Rough size of the accumulated propagation error in the large-z integral."""
        return 0.5 * self.tol * self.I * np.asarray(z, dtype=float) ** max(0.0, 2.0 - 2.0 * s_re_min)


def _context(prob, bc, L, zero_mode, tol, unit=False):
    ubc = bc if unit else prob.unit_bc(bc)
    if zero_mode is None:
        zero_mode = zero_mode_detect(prob, ubc, unit=True)[0]
    key = ("zeta-context", ubc, L, bool(zero_mode), tol)
    if key not in prob._cache:
        prob._cache[key] = _Context(prob, ubc, L, bool(zero_mode), tol)
    return prob._cache[key]


def _K(s):
    return max(1, math.floor(complex(s).real) + 1)


def _Z_many(ctx: _Context, s_list, quad_tol=None):
    quad_tol = QUAD_TOL if quad_tol is None else quad_tol
    s_arr = np.array([complex(s) for s in s_list])
    sins = np.array([sin_pi(s) for s in s_arr])
    out = np.zeros(len(s_arr), dtype=complex)
    diag = {"z_s": ctx.z_s, "radius": ctx.radius, "B": ctx.boundary_B}
    need = np.nonzero(sins != 0)[0]
    Ks = [_K(s) for s in s_arr]
    c = ctx.c
    if len(c) < max(Ks) + 4:
        raise ValueError("Re s too large for the available Taylor coefficients")

    # exact contributions of the subtracted Taylor terms (with integer limits)
    for idx, s in enumerate(s_arr):
        total = 0.0 + 0.0j
        for j in range(1, Ks[idx] + 1):
            # sin(pi s)/pi * 2s c_j / (2j - 2s) = -s c_j (-1)^j sinc(s - j)
            total += -s * c[j - 1] * (-1) ** j * sinc_pi(s - j)
        out[idx] += total

    if len(need):
        sn = s_arr[need]
        Kn = [Ks[i] for i in need]
        ln_zs = math.log(ctx.z_s)
        # series part of J0 on [0, z_s]
        j0_series = np.zeros(len(sn), dtype=complex)
        for m, s in enumerate(sn):
            for j in range(Kn[m] + 1, len(c) + 1):
                j0_series[m] += c[j - 1] * ctx.z_s ** (2 * j - 2 * s) / (2 * j - 2 * s)

        def f0(u):
            z = np.exp(u)
            k = ctx.rho(z) - ctx.ref
            vals = np.empty((len(u), len(sn)), dtype=complex)
            for m, s in enumerate(sn):
                taylor = sum(c[j - 1] * z ** (2 * j) for j in range(1, Kn[m] + 1))
                vals[:, m] = np.exp(-2.0 * s * u) * (k - taylor)
            return vals

        r0 = integrate(f0, ln_zs, 0.0, atol=quad_tol, rtol=quad_tol,
                       breakpoints=np.linspace(ln_zs, 0.0, 5)[1:-1])

        zmax = ctx.z_max(min(float(s.real) for s in sn))
        umax = math.log(zmax)

        def f1(u):
            z = np.exp(u)
            h = ctx.rho(z) - ctx.asym_value(z)
            return np.exp(-2.0 * np.outer(u, sn)) * h[:, None]

        nbreak = max(4, int(math.ceil(umax / 0.5)))
        atol1 = max(quad_tol, float(ctx.noise(zmax, min(float(s.real) for s in sn))))
        r1 = integrate(f1, 0.0, umax, atol=atol1, rtol=quad_tol,
                       breakpoints=np.linspace(0.0, umax, nbreak + 1)[1:-1])
        tail = np.zeros(len(sn), dtype=complex)
        for i in range(ctx.L + 1, ctx.L + EXTRA_TAIL):
            tail += ctx.asym.tail[i] * zmax ** (-2 * sn - i) / (2 * sn + i)
        J = j0_series + r0.value + r1.value + tail
        out[need] += sins[need] / math.pi * (ctx.boundary_B + 2.0 * sn * J)
        diag.update(
            z_max=zmax,
            quad_error=float(r0.error + r1.error),
            quad_panels=int(r0.intervals + r1.intervals),
            tail_bound=float(abs(ctx.asym.tail[ctx.L + EXTRA_TAIL]) * zmax ** -(ctx.L + EXTRA_TAIL + 2 * min(sn.real))),
        )
    diag["rho_evaluations"] = ctx.rho.calls
    return out, diag


# ---------------------------------------------------------------------------
# public operations


def _pole_part_ctx(ctx_like, s):
    """Pole part from an expansion-like object with ``lnz_coeff``, ``linear_coeff``, ``tail``."""
    s = complex(s)
    asym, L = ctx_like
    val = asym.lnz_coeff / 2.0 * sinc_pi(s)  # sin(pi s)/pi * c/(2s)
    sp = sin_pi(s) / math.pi
    val += sp * asym.linear_coeff / (2 * s - 1)
    for i in range(1, L + 1):
        Mi = asym.tail[i]
        if Mi == 0:
            continue
        if i % 2 == 0:
            n = i // 2
            # sin(pi s)/pi * i M_i/(2s+i) = n M_i (-1)^n sinc(s + n)
            val -= n * Mi * (-1) ** n * sinc_pi(s + n)
        else:
            val -= sp * i * Mi / (2 * s + i)
    return val


def pole_part(prob, bc, s, L=5, zero_mode=None):
    """The meromorphic part ``sin(pi s)/pi [c_ln/(2s) + I/(2s-1) - sum i T_i/(2s+i)]``."""
    ubc = prob.unit_bc(bc)
    if zero_mode is None:
        zero_mode = zero_mode_detect(prob, ubc, unit=True)[0]
    _check_pole(complex(s), L)
    asym = ln_characteristic_asymptotic(prob, ubc, L, zero_mode, unit=True)
    return _pole_part_ctx((asym, L), s)


def Z_function(prob: SLProblem, bc, s, L: int = 5, zero_mode=None, tol: float = DEFAULT_TOL,
               quad_tol: float = QUAD_TOL) -> complex:
    """The analytic part ``Z(s)`` (see the module docstring)."""
    ctx = _context(prob, bc, L, zero_mode, tol)
    _check_window(s, L)
    return complex(_Z_many(ctx, [s], quad_tol)[0][0])


def _check_window(s, L):
    if complex(s).real <= -(L + 1) / 2.0:
        raise ValueError(f"Re s must exceed -(L+1)/2 = {-(L + 1) / 2}")


def zeta_many(prob: SLProblem, bc, s_values, L: int = 5, zero_mode=None, tol: float = DEFAULT_TOL,
              quad_tol: float = QUAD_TOL):
    """:func:`zeta` for several ``s`` sharing one set of quadrature panels."""
    ctx = _context(prob, bc, L, zero_mode, tol)
    for s in s_values:
        _check_pole(complex(s), L)
        _check_window(s, L)
    Z, diag = _Z_many(ctx, s_values, quad_tol)
    out = []
    for s, z in zip(s_values, Z):
        P = _pole_part_ctx((ctx.asym, L), s)
        out.append(ZetaValue(complex(s), complex(z + P), complex(z), complex(P), L, ctx.zero_mode, dict(diag)))
    return out


def zeta(prob: SLProblem, bc, s, L: int = 5, zero_mode=None, tol: float = DEFAULT_TOL,
         quad_tol: float = QUAD_TOL) -> ZetaValue:
    """Continued spectral zeta function ``sum lambda_n^(-2s)`` (zero eigenvalue excluded).

    Parameters
    ----------
    prob : SLProblem
    bc : SeparatedBC or CoupledBC
    s : complex
        Must keep a distance of at least 1e-6 from the poles ``1/2`` and
        ``-(2k+1)/2``, and satisfy ``Re s > -(L+1)/2``.
    L : int
        Number of asymptotic orders subtracted.
    zero_mode : bool or None
        ``None`` detects a zero eigenvalue automatically.
    tol, quad_tol : float
        Propagation tolerance and quadrature tolerance.
    """
    return zeta_many(prob, bc, [s], L, zero_mode, tol, quad_tol)[0]


def zeta_residue(prob: SLProblem, bc, pole_index: int, L: int = 5, zero_mode=None) -> float:
    """Residue of zeta at ``s = 1/2`` (``pole_index = 0``) or ``s = -(2n-1)/2`` (``pole_index = n >= 1``)."""
    ubc = prob.unit_bc(bc)
    if pole_index == 0:
        return prob.sqrt_p_integral() / (2.0 * math.pi)
    i = 2 * pole_index - 1
    if i > L:
        raise ValueError(f"the pole at s = {-i / 2} needs L >= {i}")
    if zero_mode is None:
        zero_mode = zero_mode_detect(prob, ubc, unit=True)[0]
    asym = ln_characteristic_asymptotic(prob, ubc, i, zero_mode, unit=True)
    n = pole_index - 1
    return (-1) ** n * i * asym.tail[i] / (2.0 * math.pi)


def zeta_at_nonpositive_int(prob: SLProblem, bc, n: int, L: int = 5, zero_mode=None) -> float:
    """``zeta(-n)`` for ``n >= 0`` from the asymptotic coefficients alone."""
    if n < 0:
        raise ValueError("n must be non-negative")
    ubc = prob.unit_bc(bc)
    if zero_mode is None:
        zero_mode = zero_mode_detect(prob, ubc, unit=True)[0]
    Lr = max(L, 2 * n, 1)
    if 2 * n > L:
        raise ValueError(f"zeta(-{n}) needs L >= {2 * n}")
    asym = ln_characteristic_asymptotic(prob, ubc, Lr, zero_mode, unit=True)
    if n == 0:
        return asym.lnz_coeff / 2.0
    return (-1) ** (n + 1) * n * asym.tail[2 * n]


def _zeta_prime_numeric(ctx, h0=0.04, levels=4):
    # the nearest singularity is the pole at s = 1/2, so h0 stays well inside it
    hs = [h0 / 2**k for k in range(levels)]
    svals = [x for h in hs for x in (h, -h)]
    Z, _ = _Z_many(ctx, svals)
    vals = [complex(z + _pole_part_ctx((ctx.asym, ctx.L), s)).real for s, z in zip(svals, Z)]
    table = [(vals[2 * k] - vals[2 * k + 1]) / (2 * hs[k]) for k in range(levels)]
    # central differences have an error series in h^2
    for m in range(1, levels):
        f = 4.0**m
        table = [(f * table[k + 1] - table[k]) / (f - 1) for k in range(len(table) - 1)]
    return table[0]


def zeta_prime_zero(prob: SLProblem, bc, L: int = 5, zero_mode=None, route: str = "closed_form",
                    tol: float = DEFAULT_TOL) -> float:
    """``zeta'(0)``.

    ``route="closed_form"`` uses ``Z'(0) = asym(1) - rho_ref`` so that
    ``zeta'(0) = const_block - rho_ref``; ``route="numeric"`` differentiates
    the continued zeta function by Richardson-extrapolated central differences.
    """
    if L < 2:
        raise ValueError("L must be at least 2")
    ctx = _context(prob, bc, L, zero_mode, tol)
    if route == "closed_form":
        return ctx.asym.const_block - ctx.ref
    if route == "numeric":
        return _zeta_prime_numeric(ctx)
    raise ValueError(f"unknown route {route!r}")


def _determinant(prob, bc, want_zero_mode, L, tol, numeric):
    ubc = prob.unit_bc(bc)
    has_zero, data = zero_mode_detect(prob, ubc, unit=True)
    if has_zero and not want_zero_mode:
        raise ValueError("zero is an eigenvalue: use functional_determinant_prime")
    if want_zero_mode and not has_zero:
        raise ValueError("no zero mode detected: use functional_determinant")
    ctx = _context(prob, ubc, L, has_zero, tol, unit=True)
    log_det = ctx.ref - ctx.asym.const_block
    res = DeterminantResult(math.exp(log_det), log_det, has_zero, "closed_form")
    res.diagnostics["negative_log_arguments"] = list(ctx.asym.negative_log_arguments)
    if has_zero:
        res.diagnostics["limit_over_z2"] = float(-ctx.series.a[1])
        res.diagnostics["limit_inner_product_form"] = complex(data.limit_over_z2())
        res.diagnostics["zero_mode_construction"] = data.construction
    else:
        res.diagnostics["char_at_zero"] = float(ctx.ref_sign * math.exp(ctx.ref))
    if numeric:
        num = -_zeta_prime_numeric(ctx)
        res.numeric_log_value = num
        res.route_discrepancy = abs(num - log_det) / max(1.0, abs(log_det))
    return res


def functional_determinant(prob: SLProblem, bc, L: int = 5, tol: float = DEFAULT_TOL,
                           numeric_check: bool = False) -> DeterminantResult:
    """``det L = exp(-zeta'(0))`` for a problem without zero eigenvalue."""
    return _determinant(prob, bc, False, L, tol, numeric_check)


def functional_determinant_prime(prob: SLProblem, bc, L: int = 5, tol: float = DEFAULT_TOL,
                                 numeric_check: bool = False) -> DeterminantResult:
    """Determinant with the zero eigenvalue removed, ``exp(-zeta_0'(0))``."""
    return _determinant(prob, bc, True, L, tol, numeric_check)


# ---------------------------------------------------------------------------
# heat kernel


def heat_coefficients(prob: SLProblem, bc, n_max: int, L: int | None = None) -> HeatCoefficients:
    """``a_0, a_{1/2}, ..., a_{n_max/2}`` of the heat trace (zero modes included).

    Integer-index coefficients come from the odd tail coefficients, the
    half-integer ones from the even tail coefficients and the ``ln z``
    coefficient.
    """
    need = max(1, n_max - 1)
    if L is None:
        L = need
    elif L < need:
        raise ValueError(f"a_{n_max}/2 needs L >= {need}")
    ubc = prob.unit_bc(bc)
    asym = ln_characteristic_asymptotic(prob, ubc, L, False, unit=True)
    vals = []
    for n in range(n_max + 1):
        if n == 0:
            v = asym.linear_coeff / (2.0 * math.sqrt(math.pi))
        elif n == 1:
            v = asym.lnz_coeff / 2.0
        elif n % 2 == 0:
            k = n // 2 - 1
            v = -(2.0 ** (2 * k)) * math.factorial(k) / (math.sqrt(math.pi) * math.factorial(2 * k)) * asym.tail[2 * k + 1]
        else:
            m = (n - 1) // 2
            v = -asym.tail[2 * m] / math.factorial(m - 1)
        vals.append((n / 2.0, float(v)))
    return HeatCoefficients([(idx, val + 0.0) for idx, val in vals])  # no negative zeros


def _endpoint_derivs(prob):
    pj, Vj = prob.endpoint_jets(3)
    p = [[pj.coeffs[k][e] * math.factorial(k) for k in range(3)] for e in (0, 1)]
    V = [float(Vj.coeffs[0][e]) for e in (0, 1)]
    return p, V


def heat_coeff_closed_form(prob: SLProblem, bc, which: str) -> float:
    """Printed closed forms of ``a_1`` and ``a_{3/2}`` (``which`` in ``{"a1", "a3/2"}``)."""
    ubc = prob.unit_bc(bc)
    (P0, P1), (V0, V1) = _endpoint_derivs(prob)
    sq = math.sqrt(math.pi)
    r0, r1 = math.sqrt(P0[0]), math.sqrt(P1[0])
    if which == "a1":

        def f(t):
            pj = prob.p.jet(t, 2).coeffs
            p, dp, ddp = pj[0], pj[1], 2 * pj[2]
            return (16 * prob.V(t) - dp**2 / p + 4 * ddp) / np.sqrt(p)

        vol = -float(integrate(f, 0.0, 1.0, atol=1e-14, rtol=1e-14).value) / (32 * sq)
        if isinstance(ubc, SeparatedBC):
            out = vol
            if not delta(ubc.A2):
                out -= (ubc.A2 * P0[1] + 4 * ubc.A1) / (4 * ubc.A2 * sq * r0)
            if not delta(ubc.B2):
                out += (ubc.B2 * P1[1] - 4 * ubc.B1) / (4 * ubc.B2 * sq * r1)
            return out
        k11, k12, k21, k22 = ubc.k11, ubc.k12, ubc.k21, ubc.k22
        if delta(k12):
            return vol + (k11 * P1[1] - k22 * P0[1] + 4 * k21) / (4 * sq * (r1 * k11 + r0 * k22))
        return vol + ((k22 * r0 + k11 * r1) / (k12 * r0 * r1) - P0[1] / (4 * r0) + P1[1] / (4 * r1)) / sq
    if which != "a3/2":
        raise ValueError("which must be 'a1' or 'a3/2'")
    out = (V0 + V1) / 4 - (P0[1] ** 2 / P0[0] + P1[1] ** 2 / P1[0]) / 64 + (P0[2] + P1[2]) / 16
    if isinstance(ubc, SeparatedBC):
        A1, A2, B1, B2 = ubc.A1, ubc.A2, ubc.B1, ubc.B2
        if not delta(A2):
            out += (A1**2 / (2 * A2**2 * P0[0]) - V0 / 2 + A1 * P0[1] / (4 * A2 * P0[0])
                    + P0[1] ** 2 / (16 * P0[0]) - P0[2] / 8)
        if not delta(B2):
            out += (B1**2 / (2 * B2**2 * P1[0]) - V1 / 2 - B1 * P1[1] / (4 * B2 * P1[0])
                    + P1[1] ** 2 / (16 * P1[0]) - P1[2] / 8)
        return out
    k11, k12, k21, k22 = ubc.k11, ubc.k12, ubc.k21, ubc.k22
    if not delta(k12):
        br = ((k22 * r0 + k11 * r1) / (k12 * r0 * r1)) ** 2 - (V0 + V1)
        # sign of the p'(1)^2 term follows the second tail coefficient
        br += (P0[1] ** 2 / P0[0] + P1[1] ** 2 / P1[0]) / 8
        br -= (P0[2] + P1[2]) / 4 + 2 * k21 / (k12 * r0 * r1)
        br -= (k11 * P0[1] / P0[0] - k22 * P1[1] / P1[0]) / (2 * k12)
        return out + br / 2
    q = r1 * k11 + r0 * k22
    br = ((k11 * P1[1] - k22 * P0[1] + 4 * k21) / q) ** 2
    br -= (4 * r0 * k22 * (4 * V0 + P0[2]) + 4 * r1 * k11 * (4 * V1 + P1[2])
           - k22 * P0[1] ** 2 / r0 - k11 * P1[1] ** 2 / r1) / q
    return out + br / 32


# ---------------------------------------------------------------------------
# geometric form


def robin_to_separated(p, R1: float, R2: float) -> SeparatedBC:
    """Separated constants for Robin data in the Liouville-normal form.

    The Robin parameters ``R1, R2`` enter as ``(d/dn - R) phi = 0`` after the
    Liouville transformation; the result is the equivalent separated
    condition for ``-(p y')' + V y``.

    Parameters
    ----------
    p : SmoothFunction, str or SLProblem
        The coefficient on ``[0, 1]``, or a problem whose original interval
        is used.
    R1, R2 : float
    """
    if isinstance(p, SLProblem):
        a, b = p.interval
        c = p.p_source.jet(np.array([a, b]), 1).coeffs
    else:
        f = p if isinstance(p, SmoothFunction) else SmoothFunction(str(p), positive=True)
        c = f.jet(np.array([0.0, 1.0]), 1).coeffs
    p0, p1, dp0, dp1 = float(c[0][0]), float(c[0][1]), float(c[1][0]), float(c[1][1])
    if p0 <= 0 or p1 <= 0:
        raise ValueError("p must be positive at the end points")
    return SeparatedBC(-dp0 / (4 * math.sqrt(p0)) - R1, 1 / math.sqrt(p0),
                       dp1 / (4 * math.sqrt(p1)) - R2, 1 / math.sqrt(p1))


def invariant_potential(prob: SLProblem, x):
    """``(E(x), omega(x))`` with ``omega = p'/(4p)`` and ``E = -(V + p''/4 - p'^2/(16 p))``.

    Evaluated in the unit-interval variables of ``prob``.
    """
    pj = prob.p.jet(x, 2).coeffs
    p, dp, ddp = pj[0], pj[1], 2 * pj[2]
    V = prob.V.jet(x, 0).coeffs[0]
    omega = dp / (4 * p)
    E = -(V + ddp / 4 - dp**2 / (16 * p))
    if np.ndim(x) == 0:
        return float(E), float(omega)
    return E, omega
