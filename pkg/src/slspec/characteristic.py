"""Characteristic functions on the imaginary axis, at zero, and zero-mode data.

The solutions of ``-(p y')' + V y = mu y`` are propagated as
``(phi, p phi')`` with the compiled (or fallback) kernel.  Exponential growth
for ``mu = -z^2`` is absorbed by rescaling with a logarithmic accumulator, so
every returned characteristic value is a :class:`CharacteristicValue`
``sign * exp(log_abs)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .wkb import CoupledBC, SeparatedBC, SLProblem, series_log

__all__ = [
    "LogScaledState",
    "CharacteristicValue",
    "ZeroModeData",
    "MuSeries",
    "PropagationError",
    "propagate",
    "ln_omega",
    "ln_delta",
    "ln_characteristic",
    "ln_characteristic_many",
    "characteristic_at_zero",
    "mu_series",
    "zero_mode_detect",
    "characteristic_limit_over_z2",
    "wronskian_residual",
    "delta_complex_form",
]

DEFAULT_TOL = 1e-12
RESCALE = 1e8


class PropagationError(ArithmeticError):
    """The ODE integration failed (step-size underflow or non-finite state)."""


@dataclass(frozen=True)
class LogScaledState:
    """``(phi, p phi') = exp(log_scale) * vector`` at the end point."""

    vector: np.ndarray
    log_scale: float

    @property
    def value(self):
        return self.vector * math.exp(self.log_scale)


@dataclass(frozen=True)
class CharacteristicValue:
    """A nonzero real number stored as ``sign * exp(log_abs)``."""

    log_abs: float
    sign: int

    @property
    def value(self):
        return self.sign * math.exp(self.log_abs)

    @classmethod
    def from_scaled(cls, mantissa, log_scale):
        if mantissa == 0 or not math.isfinite(mantissa):
            raise ValueError("characteristic function vanishes (or is not finite) here")
        return cls(math.log(abs(mantissa)) + log_scale, 1 if mantissa > 0 else -1)


@dataclass
class ZeroModeData:
    """The solution at zero spectral parameter when zero is an eigenvalue."""

    x: np.ndarray
    phi: np.ndarray
    norm2: float
    phi1: complex
    pdphi1: complex
    boundary_class: str
    xi: float | None
    residual: float
    construction: str

    def limit_over_z2(self):
        """``lim_{z->0} Char(iz)/z^2`` from the inner-product identity."""
        if self.boundary_class == "separated":
            return -self.xi * self.norm2
        value = self.norm2 / np.conj(self.phi1)
        return value


@dataclass(frozen=True)
class MuSeries:
    """Taylor coefficients ``Char(mu) = sum_k a_k mu^k`` about ``mu = 0``."""

    a: np.ndarray
    weight: float

    def z_log_coefficients(self, zero_mode=False):
        """Coefficients ``c_j`` of ``ln|Char(iz)/Char_ref| = sum_{j>=1} c_j z^(2j)``.

        ``Char_ref`` is ``Char(0)``, or ``lim Char(iz)/z^2`` when ``zero_mode``.
        """
        a = self.a
        k = np.arange(len(a))
        b = a * (-1.0) ** k  # coefficients in t = z^2
        if zero_mode:
            b = b[1:]
        if b[0] == 0:
            raise ValueError("reference value of the characteristic function vanishes")
        return series_log(list(b[1:] / b[0]))

    def radius(self, zero_mode=False):
        """Estimated convergence radius in ``z`` of the log series.

        Taken from the ratio of the last few nonzero ``c_j``; ``inf`` when the
        series terminates.
        """
        c = np.abs(np.asarray(self.z_log_coefficients(zero_mode)))
        idx = [j for j in range(len(c)) if c[j] > 0]
        if len(idx) < 4:
            return math.inf
        tail = idx[-5:]
        est = [(c[i] / c[j]) ** (1.0 / (2 * (j - i))) for i, j in zip(tail[:-1], tail[1:])]
        return float(np.median(est))


# ---------------------------------------------------------------------------
# propagation


def _programs(prob: SLProblem):
    key = ("programs", _backend.BACKEND)
    if key not in prob._cache:
        k = _backend.kernel
        prob._cache[key] = (k.make_program(prob.p.expr), k.make_program(prob.V.expr))
    return prob._cache[key]


def _check_tol(tol):
    if not 1e-13 <= tol <= 1e-6:
        raise ValueError("tol must lie in [1e-13, 1e-6]")


def _run(prob, mu, y0, xs, tol, rescale=RESCALE, weight=1.0):
    p_prog, v_prog = _programs(prob)
    try:
        return _backend.kernel.propagate(p_prog, v_prog, float(mu), np.asarray(y0, dtype=float),
                                         np.asarray(xs, dtype=float), tol, tol, rescale, 0.0,
                                         20_000_000, float(weight))
    except _backend.KernelErrors as exc:
        raise PropagationError(str(exc)) from None


def propagate(prob: SLProblem, mu: float, y0, tol: float = DEFAULT_TOL, rescale: float = RESCALE) -> LogScaledState:
    """Propagate ``(phi, p phi')`` from ``x = 0`` to ``x = 1`` at spectral parameter ``mu``.

    ``mu`` is ``lambda^2`` (negative for ``lambda = iz``).
    """
    _check_tol(tol)
    y0 = np.asarray(y0, dtype=float).reshape(1, 1, 2)
    states, logs, _ = _run(prob, mu, y0, [1.0], tol, rescale)
    return LogScaledState(states[-1, 0, 0].copy(), float(logs[-1]))


def _resolve(prob, bc, unit):
    return bc if unit else prob.unit_bc(bc)


def _omega_scaled(bc, state):
    return bc.B1 * state[0] + bc.B2 * state[1]


def _bracket(bc, u, v):
    # k22 v(1) - k21 u(1) + k11 p u'(1) - k12 p v'(1)
    return bc.k22 * v[0] - bc.k21 * u[0] + bc.k11 * u[1] - bc.k12 * v[1]


def ln_omega(prob: SLProblem, bc: SeparatedBC, z: float, tol: float = DEFAULT_TOL,
             rescale: float = RESCALE, unit: bool = False) -> CharacteristicValue:
    """``Omega(iz) = B1 phi(1) + B2 p(1) phi'(1)`` with ``(phi, p phi')(0) = (A2, A1)``."""
    if not z > 0:
        raise ValueError("z must be positive")
    _check_tol(tol)
    ubc = _resolve(prob, bc, unit)
    states, logs, _ = _run(prob, -z * z, [[[ubc.A2, ubc.A1]]], [1.0], tol, rescale)
    return CharacteristicValue.from_scaled(_omega_scaled(ubc, states[-1, 0, 0]), float(logs[-1]))


def _delta_from_state(bc, st, log_scale):
    u, v = st[0, 0], st[1, 0]
    b = _bracket(bc, u, v)
    if log_scale > 700:
        mantissa = -b
    else:
        mantissa = 2.0 * math.cos(bc.gamma) * math.exp(-log_scale) - b
    return CharacteristicValue.from_scaled(mantissa, log_scale)


def ln_delta(prob: SLProblem, bc: CoupledBC, z: float, tol: float = DEFAULT_TOL,
             rescale: float = RESCALE, unit: bool = False) -> CharacteristicValue:
    """``Delta(iz) = 2 cos(gamma) - [k22 v - k21 u + k11 p u' - k12 p v'](1)``."""
    if not z > 0:
        raise ValueError("z must be positive")
    _check_tol(tol)
    ubc = _resolve(prob, bc, unit)
    states, logs, _ = _run(prob, -z * z, [[[0.0, 1.0]], [[1.0, 0.0]]], [1.0], tol, rescale)
    return _delta_from_state(ubc, states[-1], float(logs[-1]))


def ln_characteristic(prob, bc, z, tol=DEFAULT_TOL, rescale=RESCALE, unit=False) -> CharacteristicValue:
    """Dispatch to :func:`ln_omega` or :func:`ln_delta`."""
    ubc = _resolve(prob, bc, unit)
    if isinstance(ubc, SeparatedBC):
        return ln_omega(prob, ubc, z, tol, rescale, unit=True)
    if isinstance(ubc, CoupledBC):
        return ln_delta(prob, ubc, z, tol, rescale, unit=True)
    raise TypeError(f"unknown boundary condition {bc!r}")


def ln_characteristic_many(prob, bc, zs, tol=DEFAULT_TOL, unit=False):
    """Vectorised :func:`ln_characteristic`: arrays ``(log_abs, sign)``."""
    zs = np.asarray(zs, dtype=float)
    out = np.empty(zs.shape)
    sgn = np.empty(zs.shape)
    ubc = _resolve(prob, bc, unit)
    for idx, z in np.ndenumerate(zs):
        cv = ln_characteristic(prob, ubc, float(z), tol, unit=True)
        out[idx] = cv.log_abs
        sgn[idx] = cv.sign
    return out, sgn


def wronskian_residual(prob: SLProblem, z: float, tol: float = DEFAULT_TOL) -> float:
    """Relative residual of ``u p v' - v p u' = -1`` at ``x = 1``.

    Returns ``|W + 1| / max(1, |u p v'| + |v p u'|)`` evaluated in scaled
    arithmetic, i.e. the Wronskian error measured against the size of the
    terms that cancel.
    """
    states, logs, _ = _run(prob, -z * z, [[[0.0, 1.0]], [[1.0, 0.0]]], [1.0], tol)
    u, v = states[-1, 0, 0], states[-1, 1, 0]
    s2 = 2.0 * float(logs[-1])
    t1, t2 = u[0] * v[1], v[0] * u[1]
    mag = abs(t1) + abs(t2)
    if s2 > 700:
        return abs(t1 - t2) / mag
    scale = math.exp(s2)
    w = (t1 - t2) * scale
    return abs(w + 1.0) / max(1.0, mag * scale)


def delta_complex_form(prob: SLProblem, bc: CoupledBC, z: float, tol: float = DEFAULT_TOL,
                       unit: bool = False) -> complex:
    """``-exp(-i gamma)`` times the unreduced determinant of the coupled system.

    Built from the Wronskian form before the identity ``W = -1`` is used; its
    imaginary part vanishes for a self-adjoint condition and its real part
    equals ``Delta(iz)``.  Meaningful for moderate ``z`` only.
    """
    ubc = _resolve(prob, bc, unit)
    states, logs, _ = _run(prob, -z * z, [[[0.0, 1.0]], [[1.0, 0.0]]], [1.0], tol)
    scale = math.exp(float(logs[-1]))
    u, v = states[-1, 0, 0] * scale, states[-1, 1, 0] * scale
    w = u[0] * v[1] - v[0] * u[1]
    e = cmath.exp(1j * ubc.gamma)
    d15 = w - e * e + e * _bracket(ubc, u, v)
    return -d15 / e


# ---------------------------------------------------------------------------
# spectral parameter zero


def characteristic_at_mu(prob: SLProblem, bc, mu: float, tol: float = DEFAULT_TOL, unit: bool = False) -> float:
    """``Omega`` or ``Delta`` at the real spectral parameter ``mu = lambda^2``."""
    _check_tol(tol)
    ubc = _resolve(prob, bc, unit)
    if isinstance(ubc, SeparatedBC):
        states, logs, _ = _run(prob, mu, [[[ubc.A2, ubc.A1]]], [1.0], tol)
        return float(_omega_scaled(ubc, states[-1, 0, 0]) * math.exp(logs[-1]))
    if not isinstance(ubc, CoupledBC):
        raise TypeError(f"unknown boundary condition {bc!r}")
    states, logs, _ = _run(prob, mu, [[[0.0, 1.0]], [[1.0, 0.0]]], [1.0], tol)
    scale = math.exp(float(logs[-1]))
    u, v = states[-1, 0, 0] * scale, states[-1, 1, 0] * scale
    return float(2.0 * math.cos(ubc.gamma) - _bracket(ubc, u, v))


def characteristic_at_zero(prob: SLProblem, bc, tol: float = DEFAULT_TOL, unit: bool = False) -> float:
    """``Omega(0)`` or ``Delta(0)``."""
    return characteristic_at_mu(prob, bc, 0.0, tol, unit)


def _series_once(prob, ubc, nterms, weight, tol):
    if isinstance(ubc, SeparatedBC):
        y0 = np.zeros((1, nterms, 2))
        y0[0, 0] = (ubc.A2, ubc.A1)
    else:
        y0 = np.zeros((2, nterms, 2))
        y0[0, 0] = (0.0, 1.0)
        y0[1, 0] = (1.0, 0.0)
    states, logs, _ = _run(prob, 0.0, y0, [1.0], tol, weight=weight)
    st = states[-1]
    scale = math.exp(float(logs[-1]))
    w_pow = weight ** -np.arange(nterms, dtype=float)
    if isinstance(ubc, SeparatedBC):
        a = (ubc.B1 * st[0, :, 0] + ubc.B2 * st[0, :, 1]) * scale * w_pow
    else:
        u, v = st[0], st[1]
        b = ubc.k22 * v[:, 0] - ubc.k21 * u[:, 0] + ubc.k11 * u[:, 1] - ubc.k12 * v[:, 1]
        a = -b * scale * w_pow
        a[0] += 2.0 * math.cos(ubc.gamma)
    return a


def mu_series(prob: SLProblem, bc, nterms: int = 24, tol: float = DEFAULT_TOL, unit: bool = False) -> MuSeries:
    """Taylor coefficients of the characteristic function in ``mu = lambda^2`` at 0.

    The k-th coefficient block is propagated as ``weight**k`` times its true
    size so that all blocks share one error scale; the weight is tuned to
    the observed coefficient ratio.
    """
    ubc = _resolve(prob, bc, unit)
    key = ("museries", ubc, nterms, tol)
    if key in prob._cache:
        return prob._cache[key]
    weight = max(1.0, (math.pi / prob.sqrt_p_integral()) ** 2)
    for _ in range(3):
        a = _series_once(prob, ubc, nterms, weight, tol)
        nz = np.nonzero(a[nterms // 2:])[0]
        if len(nz) < 2:
            break
        i, j = nterms // 2 + nz[-2], nterms // 2 + nz[-1]
        ratio = abs(a[i] / a[j]) ** (1.0 / (j - i))
        if 0.125 < ratio / weight < 8.0:
            break
        weight = ratio
    res = MuSeries(a, weight)
    prob._cache[key] = res
    return res


def _scale_at_one(prob, ubc, tol):
    return abs(ln_characteristic(prob, ubc, 1.0, tol, unit=True).value)


def _gauss_grid(panels=8, nodes=24):
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(0.0, 1.0, panels + 1)
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        xs.append(0.5 * (a + b) + 0.5 * (b - a) * x)
        ws.append(0.5 * (b - a) * w)
    return np.concatenate(xs), np.concatenate(ws)


def zero_mode_detect(prob: SLProblem, bc, tol_zero: float = 1e-9, tol: float = DEFAULT_TOL,
                     unit: bool = False):
    """Decide whether zero is an eigenvalue and, if so, build :class:`ZeroModeData`.

    Zero is declared an eigenvalue when ``|Char(0)| <= tol_zero * |Char(i)|``.

    Returns
    -------
    (bool, ZeroModeData or None)
    """
    ubc = _resolve(prob, bc, unit)
    key = ("zeromode", ubc, tol_zero, tol)
    if key in prob._cache:
        return prob._cache[key]
    c0 = characteristic_at_zero(prob, ubc, tol, unit=True)
    scale = _scale_at_one(prob, ubc, tol)
    if abs(c0) > tol_zero * scale:
        prob._cache[key] = (False, None)
        return prob._cache[key]
    xq, wq = _gauss_grid()
    xs = np.concatenate([xq, [1.0]])
    if isinstance(ubc, SeparatedBC):
        states, logs, _ = _run(prob, 0.0, [[[ubc.A2, ubc.A1]]], xs, tol)
        sol = states[:, 0, 0, :] * np.exp(logs)[:, None]
        phi = sol[:-1, 0]
        phi1, pdphi1 = sol[-1]
        if ubc.B1 != 0:
            xi = ubc.B1 / pdphi1
        else:
            xi = -ubc.B2 / phi1
        res = abs(ubc.B1 * phi1 + ubc.B2 * pdphi1) / (
            (abs(ubc.B1) + abs(ubc.B2)) * max(abs(phi1), abs(pdphi1)))
        norm2 = float(np.sum(wq * phi**2))
        data = ZeroModeData(xq, phi, norm2, phi1, pdphi1, "separated", float(xi), float(res), "initial data (A2, A1)")
    else:
        states, logs, _ = _run(prob, 0.0, [[[0.0, 1.0]], [[1.0, 0.0]]], xs, tol)
        sc = np.exp(logs)[:, None]
        U = states[:, 0, 0, :] * sc
        Vv = states[:, 1, 0, :] * sc
        e = cmath.exp(1j * ubc.gamma)
        alpha = Vv[-1, 0] - e * ubc.k11
        beta = -U[-1, 0] + e * ubc.k12
        construction = "alpha, beta combination"
        if abs(alpha) + abs(beta) <= 1e-10 * (1.0 + abs(Vv[-1, 0]) + abs(U[-1, 0])):
            M = np.array([[U[-1, 0] - e * ubc.k12, Vv[-1, 0] - e * ubc.k11],
                          [U[-1, 1] - e * ubc.k22, Vv[-1, 1] - e * ubc.k21]])
            _, sv, vh = np.linalg.svd(M)
            if sv[0] <= 1e-8 * (1.0 + np.abs(M).max()):
                raise ValueError("double zero mode: the zero eigenvalue is degenerate")
            alpha, beta = np.conj(vh[-1])
            construction = "null vector of the boundary system"
        phi_all = alpha * U[:, 0] + beta * Vv[:, 0]
        dphi_all = alpha * U[:, 1] + beta * Vv[:, 1]
        phi = phi_all[:-1]
        phi1, pdphi1 = phi_all[-1], dphi_all[-1]
        start = np.array([beta, alpha])
        target = e * np.array([[ubc.k11, ubc.k12], [ubc.k21, ubc.k22]]) @ start
        res = float(np.max(np.abs(np.array([phi1, pdphi1]) - target)) / max(1e-300, np.max(np.abs(target))))
        norm2 = float(np.sum(wq * np.abs(phi) ** 2))
        data = ZeroModeData(xq, phi, norm2, complex(phi1), complex(pdphi1), "coupled", None, res, construction)
    if data.residual > 1e-8:
        raise ValueError(f"zero mode fails the boundary condition at x=1 (residual {data.residual:.3g})")
    if not data.norm2 > 0:
        raise ValueError("zero mode has vanishing norm")
    prob._cache[key] = (True, data)
    return prob._cache[key]


def characteristic_limit_over_z2(prob: SLProblem, bc, h: float = 1e-2, tol: float = DEFAULT_TOL,
                                 unit: bool = False, method: str = "richardson") -> float:
    """``lim_{z->0} Char(iz)/z^2`` when zero is an eigenvalue.

    ``method="richardson"`` extrapolates ``Char(iz)/z^2`` sampled at
    ``z = h, h/2, h/4, h/8`` (the error is a series in ``z^2``);
    ``method="series"`` returns ``-a_1`` from :func:`mu_series`.
    """
    ubc = _resolve(prob, bc, unit)
    if method == "series":
        return float(-mu_series(prob, ubc).a[1])
    if method != "richardson":
        raise ValueError(f"unknown method {method!r}")
    zs = h / 2.0 ** np.arange(4)
    T = [[ln_characteristic(prob, ubc, z, tol, unit=True).value / z**2 for z in zs]]
    for k in range(1, 4):
        prev = T[-1]
        f = 4.0**k
        T.append([(f * prev[i + 1] - prev[i]) / (f - 1.0) for i in range(len(prev) - 1)])
    best, before = T[3][0], T[2][1]
    if abs(best - before) > 1e-6 * max(abs(best), 1e-300):
        raise ArithmeticError("Richardson extrapolation of Char(iz)/z^2 did not converge")
    return float(best)
