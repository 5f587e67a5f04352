"""WKB recurrence and the large-z expansion of the characteristic functions.

For ``z -> infinity`` the logarithm of the characteristic function along the
imaginary axis behaves like

    ln|Char(iz)| ~ const + c_ln ln z + I z + sum_i T_i z^(-i)

with ``I = int_0^1 p^(-1/2)``.  The tail coefficients ``T_i`` (``M_i`` for
separated, ``N_i`` for coupled boundary conditions) are assembled from the
WKB functions ``S_i(x)`` through formal power-series logarithms.  All
derivatives of ``p`` and ``V`` are carried exactly as jets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .funcexpr import DomainError, SmoothFunction
from .jets import Jet
from .quadrature import integrate

__all__ = [
    "SLProblem",
    "SeparatedBC",
    "CoupledBC",
    "PowerTail",
    "AsymptoticLogExpansion",
    "delta",
    "s_coefficients",
    "minus_branch_check",
    "s_integrals",
    "even_boundary_integrals",
    "series_log",
    "series_exp",
    "separated_M",
    "coupled_N",
    "ln_characteristic_asymptotic",
]


def delta(value) -> int:
    """Exact indicator: 1 if ``value`` is exactly zero, else 0."""
    return 1 if value == 0 else 0


# ---------------------------------------------------------------------------
# problem and boundary data


@dataclass(frozen=True)
class SeparatedBC:
    """``A1 phi(0) - A2 p(0) phi'(0) = 0`` and ``B1 phi(1) + B2 p(1) phi'(1) = 0``."""

    A1: float
    A2: float
    B1: float
    B2: float

    def __post_init__(self):
        for name in ("A1", "A2", "B1", "B2"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.A1 == 0 and self.A2 == 0:
            raise ValueError("(A1, A2) must not both vanish")
        if self.B1 == 0 and self.B2 == 0:
            raise ValueError("(B1, B2) must not both vanish")

    kind = "separated"

    @classmethod
    def dirichlet(cls):
        return cls(1.0, 0.0, 1.0, 0.0)

    @classmethod
    def neumann(cls):
        return cls(0.0, 1.0, 0.0, 1.0)


@dataclass(frozen=True)
class CoupledBC:
    """``(phi(1), p phi'(1)) = exp(i gamma) K (phi(0), p phi'(0))`` with ``K`` in SL(2, R)."""

    gamma: float
    k11: float
    k12: float
    k21: float
    k22: float

    DET_TOL = 1e-12

    def __post_init__(self):
        for name in ("gamma", "k11", "k12", "k21", "k22"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if not -math.pi < self.gamma < math.pi:
            raise ValueError("gamma must lie in (-pi, pi)")
        det = self.k11 * self.k22 - self.k12 * self.k21
        if abs(det - 1.0) > self.DET_TOL:
            raise ValueError(f"K must have unit determinant (det K = {det!r})")

    kind = "coupled"

    @classmethod
    def periodic(cls):
        return cls(0.0, 1.0, 0.0, 0.0, 1.0)

    @property
    def K(self):
        return np.array([[self.k11, self.k12], [self.k21, self.k22]])


class SLProblem:
    """The operator ``-(p y')' + V y`` on an interval, stored on ``[0, 1]``.

    Parameters
    ----------
    p, V : str or SmoothFunction
        Coefficient expressions in ``x`` on the original interval.
    interval : (float, float)
        ``[a, b]`` with ``a < b``.  The problem is mapped to ``[0, 1]`` by
        ``x = a + (b - a) t``, which sends ``p`` to ``p(x(t)) / (b - a)^2`` and
        keeps ``V``; the spectrum is unchanged.  Boundary conditions given on
        ``[a, b]`` are mapped with :meth:`unit_bc`.
    """

    def __init__(self, p, V="0", interval=(0.0, 1.0)):
        a, b = (float(t) for t in interval)
        if not (math.isfinite(a) and math.isfinite(b) and a < b):
            raise ValueError("interval must satisfy a < b")
        self.interval = (a, b)
        self.length = b - a
        self.p_source = p if isinstance(p, SmoothFunction) else SmoothFunction(str(p), positive=True)
        self.V_source = V if isinstance(V, SmoothFunction) else SmoothFunction(str(V))
        if self.length == 1.0 and a == 0.0:
            p_unit, V_unit = self.p_source, self.V_source
        else:
            p_unit = self.p_source.affine(a, b, 1.0 / self.length**2)
            V_unit = self.V_source.affine(a, b)
        self.p = SmoothFunction(p_unit.expr, positive=True)
        self.V = SmoothFunction(V_unit.expr)
        self._cache = {}

    def __repr__(self):
        return f"SLProblem(p={self.p_source.text!r}, V={self.V_source.text!r}, interval={self.interval})"

    def unit_bc(self, bc):
        """Express boundary data given on ``[a, b]`` in the unit-interval variables."""
        ell = self.length
        if ell == 1.0:
            return bc
        if isinstance(bc, SeparatedBC):
            return SeparatedBC(bc.A1, ell * bc.A2, bc.B1, ell * bc.B2)
        if isinstance(bc, CoupledBC):
            return CoupledBC(bc.gamma, bc.k11, ell * bc.k12, bc.k21 / ell, bc.k22)
        raise TypeError(f"unknown boundary condition {bc!r}")

    def endpoint_jets(self, order):
        """Jets of ``p`` and ``V`` at ``x = 0`` and ``x = 1``."""
        key = ("ends", order)
        if key not in self._cache:
            xs = np.array([0.0, 1.0])
            self._cache[key] = (self.p.jet(xs, order), self.V.jet(xs, order))
        return self._cache[key]

    def sqrt_p_integral(self):
        """``int_0^1 p^(-1/2) dt``."""
        if "I" not in self._cache:
            res = integrate(lambda t: self.p(t) ** -0.5, 0.0, 1.0, atol=1e-15, rtol=1e-14)
            self._cache["I"] = float(res.value)
        return self._cache["I"]


# ---------------------------------------------------------------------------
# WKB functions


def _s_chain(p: Jet, V: Jet, L: int, sign: float = 1.0):
    """Run the recurrence for ``S_-1 .. S_L`` from jets of ``p`` and ``V``.

    ``sign = -1`` runs the independent minus branch, seeded with
    ``S_-1 = -p^(-1/2)``.
    """
    root = p.sqrt()
    s_m1 = sign / root
    # S_0 = -1/2 (ln |p S_-1|)' = -1/2 (ln sqrt p)'
    s0 = -0.5 * (sign * p * s_m1).log().derivative()
    out = [s_m1, s0]
    two_p_sm1 = 2.0 * p * s_m1
    # S_1 = [V - p S_0^2 - (p S_0)'] / (2 p S_-1)
    num = V - p * s0 * s0 - (p * s0).derivative()
    out.append(num / two_p_sm1)
    for i in range(1, L):
        conv = out[1] * out[i + 1]
        for m in range(1, i + 1):
            conv = conv + out[m + 1] * out[i - m + 1]
        num = (p * out[i + 1]).derivative() + p * conv
        out.append(-1.0 * num / two_p_sm1)
    return out[: L + 2]


def s_coefficients(prob: SLProblem, x, L: int, order: int | None = None) -> list[Jet]:
    """Jets of ``S_-1^+, S_0^+, ..., S_L^+`` at ``x``.

    Parameters
    ----------
    prob : SLProblem
    x : float or array
        Points in ``[0, 1]``.
    L : int
        Highest index, ``L >= 1``.
    order : int, optional
        Jet order of ``p`` and ``V`` (default ``L + 3``); ``S_i`` comes back
        with order ``order - 1 - i``.
    """
    if L < 1:
        raise ValueError("L must be at least 1")
    K = L + 3 if order is None else order
    if K < L + 2:
        raise ValueError("jet order must be at least L + 2")
    p = prob.p.jet(x, K)
    if np.any(p.value <= 0):
        raise DomainError("p must be positive")
    V = prob.V.jet(x, K)
    return _s_chain(p, V, L)


def minus_branch_check(prob: SLProblem, x, L: int) -> float:
    """``max_i |S_i^- - (-1)^i S_i^+|`` relative to ``max(1, |S_i^+|)``."""
    K = L + 3
    p = prob.p.jet(x, K)
    V = prob.V.jet(x, K)
    plus = _s_chain(p, V, L, 1.0)
    minus = _s_chain(p, V, L, -1.0)
    worst = 0.0
    for i, (sp, sm) in enumerate(zip(plus, minus), start=-1):
        ref = (-1) ** (i % 2) * sp.value
        scale = np.maximum(1.0, np.abs(sp.value))
        worst = max(worst, float(np.max(np.abs(sm.value - ref) / scale)))
    return worst


def s_integrals(prob: SLProblem, L: int, quad_nodes: int = 32, tol: float = 1e-13) -> list[float]:
    """``int_0^1 S_i^+(t) dt`` for ``i = -1 .. L`` by adaptive Gauss-Legendre."""
    if quad_nodes < 2:
        raise ValueError("quad_nodes too small")
    key = ("sint", L, quad_nodes, tol)
    if key in prob._cache:
        return list(prob._cache[key])

    def raw(t):
        chain = s_coefficients(prob, t, L)
        return np.stack([s.value for s in chain], axis=-1)

    # each S_i is measured against its own size so that high orders, whose
    # values carry large cancelling terms, do not set an absolute floor
    scale = np.maximum(np.max(np.abs(raw(np.linspace(0.0, 1.0, 65))), axis=0), 1e-300)
    res = integrate(lambda t: raw(t) / scale, 0.0, 1.0, atol=tol, rtol=tol,
                    order=max(8, quad_nodes // 2))
    out = [float(v) for v in res.value * scale]
    prob._cache[key] = tuple(out)
    return out


# ---------------------------------------------------------------------------
# formal power series


@dataclass(frozen=True)
class PowerTail:
    """Formal expansion ``sum_i c_i z^(-i)`` for ``i = start, start + 1, ...``."""

    coefficients: tuple
    start: int = 1

    def __len__(self):
        return len(self.coefficients)

    def __getitem__(self, i):
        """Coefficient of ``z^(-i)`` (zero outside the stored range)."""
        j = i - self.start
        if 0 <= j < len(self.coefficients):
            return self.coefficients[j]
        return 0.0

    def evaluate(self, z):
        z = np.asarray(z, dtype=float)
        total = np.zeros_like(z)
        for j, c in enumerate(self.coefficients):
            total = total + c * z ** -(j + self.start)
        return total


def series_log(a: Sequence | PowerTail, n: int | None = None):
    """Coefficients of ``ln(1 + sum_{k>=1} a_k w^k)`` through ``w^n``.

    ``a`` lists ``a_1, a_2, ...``; entries may be floats, Fractions or jets.
    A :class:`PowerTail` (with ``start=1``) is returned as a PowerTail.
    """
    as_tail = isinstance(a, PowerTail)
    if as_tail:
        if a.start != 1:
            raise ValueError("series_log needs a tail starting at w^1")
        a = a.coefficients
    a = list(a)
    n = len(a) if n is None else n
    a = a + [0 * a[0] if a else 0.0] * max(0, n - len(a))
    ell = []
    for k in range(1, n + 1):
        acc = k * a[k - 1]
        for j in range(1, k):
            acc = acc - j * ell[j - 1] * a[k - j - 1]
        ell.append(acc / k)
    return PowerTail(tuple(ell)) if as_tail else ell


def series_exp(ell: Sequence, n: int | None = None):
    """Inverse of :func:`series_log`: ``exp(sum ell_k w^k) = 1 + sum a_k w^k``."""
    ell = list(ell)
    n = len(ell) if n is None else n
    ell = ell + [0.0] * max(0, n - len(ell))
    a = [1]
    for k in range(1, n + 1):
        acc = 0 * ell[0] if ell else 0.0
        for j in range(1, k + 1):
            acc = acc + j * ell[j - 1] * a[k - j]
        a.append(acc / k)
    return a[1:]


# ---------------------------------------------------------------------------
# endpoint data shared by M_i and N_i


@dataclass
class _EndpointData:
    p0: float
    p1: float
    S0: list  # S_i(0), index i+1 for i = -1..L
    S1: list  # S_i(1)
    ints: list  # int S_i, index i+1


def _endpoint_data(prob: SLProblem, L: int) -> _EndpointData:
    key = ("endpoint", L)
    if key not in prob._cache:
        chain = s_coefficients(prob, np.array([0.0, 1.0]), L)
        vals = [s.value for s in chain]
        prob._cache[key] = _EndpointData(
            p0=float(prob.p(0.0)),
            p1=float(prob.p(1.0)),
            S0=[float(v[0]) for v in vals],
            S1=[float(v[1]) for v in vals],
            ints=s_integrals(prob, L),
        )
    return prob._cache[key]


def _S(data_list, i):
    return data_list[i + 1]


def _odd_log_coefficients(p_val: float, S: list, L: int) -> list:
    """Series-log coefficients of ``1 + sum_{k>=1} sqrt(p) S_{2k-1} w^(2k)``."""
    root = math.sqrt(p_val)
    a = [0.0] * L
    for k in range(1, L // 2 + 1):
        a[2 * k - 1] = root * _S(S, 2 * k - 1)
    return series_log(a, L)


def even_boundary_integrals(prob: SLProblem, L: int) -> list[float]:
    """Boundary closed form of ``int_0^1 S_{2m}^+`` for ``m = 0 .. L // 2``.

    Uses ``S_even = -1/2 (ln(p S_odd))'``, so each even integral is a
    difference of endpoint values.
    """
    d = _endpoint_data(prob, L)
    out = [-0.25 * math.log(d.p1 / d.p0)]
    ell0 = _odd_log_coefficients(d.p0, d.S0, L)
    ell1 = _odd_log_coefficients(d.p1, d.S1, L)
    for m in range(1, L // 2 + 1):
        out.append(-0.5 * (ell1[2 * m - 1] - ell0[2 * m - 1]))
    return out


# ---------------------------------------------------------------------------
# tail coefficients


def separated_M(prob: SLProblem, bc: SeparatedBC, L: int) -> list[float]:
    """``M_1 .. M_L`` for separated boundary conditions (``bc`` on the unit interval)."""
    if L < 1:
        raise ValueError("L must be at least 1")
    d = _endpoint_data(prob, L)
    dj = _odd_log_coefficients(d.p0, d.S0, L)
    dA2, dB2 = delta(bc.A2), delta(bc.B2)
    Zm = [0.0] * L
    Zp = [0.0] * L
    if not dA2:
        sig = [-bc.A2 * d.p0 * _S(d.S0, 0) + bc.A1]
        sig += [(-1) ** (i + 1) * bc.A2 * d.p0 * _S(d.S0, i) for i in range(1, L)]
        norm = bc.A2 * math.sqrt(d.p0)
        Zm = series_log([s / norm for s in sig], L)
    if not dB2:
        sig = [bc.B2 * d.p1 * _S(d.S1, 0) + bc.B1]
        sig += [bc.B2 * d.p1 * _S(d.S1, i) for i in range(1, L)]
        norm = bc.B2 * math.sqrt(d.p1)
        Zp = series_log([s / norm for s in sig], L)
    return [d.ints[i + 1] - dj[i - 1] + Zm[i - 1] + Zp[i - 1] for i in range(1, L + 1)]


def coupled_Q(prob: SLProblem, bc: CoupledBC) -> float:
    """``k22 sqrt(p(0)) + k11 sqrt(p(1))``, the normalisation of the ``k12 = 0`` branch."""
    return bc.k22 * math.sqrt(float(prob.p(0.0))) + bc.k11 * math.sqrt(float(prob.p(1.0)))


def coupled_N(prob: SLProblem, bc: CoupledBC, L: int) -> list[float]:
    """``N_1 .. N_L`` for coupled boundary conditions (``bc`` on the unit interval)."""
    if L < 1:
        raise ValueError("L must be at least 1")
    d = _endpoint_data(prob, L)
    dj = _odd_log_coefficients(d.p0, d.S0, L)
    k11, k12, k21, k22 = bc.k11, bc.k12, bc.k21, bc.k22
    phi = [-k21 - k22 * d.p0 * _S(d.S0, 0) + k11 * d.p1 * _S(d.S1, 0)]
    phi += [(-1) ** (i + 1) * k22 * d.p0 * _S(d.S0, i) + k11 * d.p1 * _S(d.S1, i) for i in range(1, L)]
    Q = coupled_Q(prob, bc)
    if delta(k12):
        if Q == 0.0:
            raise ValueError("degenerate coupled condition: k12 = 0 and k22 sqrt(p0) + k11 sqrt(p1) = 0")
        tail = series_log([phi[k - 1] / Q for k in range(1, L + 1)], L)
    else:
        r0, r1 = math.sqrt(d.p0), math.sqrt(d.p1)
        # S-bar_0 = 1, S-bar_i = sqrt(p) S_{i-1}
        sb0 = [1.0] + [r0 * _S(d.S0, i - 1) for i in range(1, L + 1)]
        sb1 = [1.0] + [r1 * _S(d.S1, i - 1) for i in range(1, L + 1)]
        c = [sum((-1) ** m * sb0[m] * sb1[i - m] for m in range(i + 1)) for i in range(L + 1)]
        norm = k12 * r0 * r1
        psi = [c[1] - Q / norm] + [c[i] - phi[i - 2] / norm for i in range(2, L + 1)]
        tail = series_log(psi, L)
    return [d.ints[i + 1] - dj[i - 1] + tail[i - 1] for i in range(1, L + 1)]


# ---------------------------------------------------------------------------
# assembled expansion


@dataclass(frozen=True)
class AsymptoticLogExpansion:
    """``const_block + lnz_coeff ln z + linear_coeff z + sum_i tail_i z^(-i)``."""

    const_block: float
    lnz_coeff: float
    linear_coeff: float
    tail: PowerTail
    kind: str
    negative_log_arguments: tuple = field(default=())

    def __post_init__(self):
        if not self.linear_coeff > 0:
            raise ValueError("linear coefficient must be positive")

    @property
    def L(self):
        return len(self.tail)

    def evaluate(self, z, L: int | None = None):
        """The expansion at ``z`` truncated after ``z^(-L)``."""
        z = np.asarray(z, dtype=float)
        n = self.L if L is None else min(L, self.L)
        total = self.const_block + self.lnz_coeff * np.log(z) + self.linear_coeff * z
        for i in range(1, n + 1):
            total = total + self.tail[i] * z**-i
        return total


def _log_abs(value, label, negatives):
    if value == 0:
        raise ValueError(f"{label} vanishes; its logarithm is undefined")
    if value < 0:
        negatives.append(label)
    return math.log(abs(value))


def ln_characteristic_asymptotic(prob: SLProblem, bc, L: int, zero_mode: bool = False,
                                 unit: bool = False) -> AsymptoticLogExpansion:
    """Large-z expansion of ``ln|Char(iz)|`` (or ``ln|Char(iz)/z^2|`` with a zero mode).

    Parameters
    ----------
    prob : SLProblem
    bc : SeparatedBC or CoupledBC
        Given on the problem's original interval unless ``unit`` is true.
    L : int
        Number of inverse-power coefficients.
    zero_mode : bool
        Shift the ``ln z`` coefficient by ``-2`` for the divided characteristic
        function.

    Notes
    -----
    Logarithms of boundary constants are taken of absolute values; any
    negative argument is listed in ``negative_log_arguments``.
    """
    ubc = bc if unit else prob.unit_bc(bc)
    p0, p1 = float(prob.p(0.0)), float(prob.p(1.0))
    I = prob.sqrt_p_integral()
    neg = []
    const = -0.25 * math.log(p0 * p1) - math.log(2.0)
    if isinstance(ubc, SeparatedBC):
        dA2, dB2 = delta(ubc.A2), delta(ubc.B2)
        const += (1 - dA2) * (_log_abs(ubc.A2 * math.sqrt(p0), "A2", neg) if not dA2 else 0.0)
        const += (1 - dB2) * (_log_abs(ubc.B2 * math.sqrt(p1), "B2", neg) if not dB2 else 0.0)
        const += _log_abs(ubc.A1, "A1", neg) if dA2 else 0.0
        const += _log_abs(ubc.B1, "B1", neg) if dB2 else 0.0
        lnz = 1.0 - dA2 - dB2
        tail = separated_M(prob, ubc, L)
        kind = "separated"
    elif isinstance(ubc, CoupledBC):
        d12 = delta(ubc.k12)
        if d12:
            const += _log_abs(coupled_Q(prob, ubc), "k22 sqrt(p0) + k11 sqrt(p1)", neg)
        else:
            const += _log_abs(ubc.k12 * math.sqrt(p0 * p1), "k12", neg)
        lnz = 1.0 - d12
        tail = coupled_N(prob, ubc, L)
        kind = "coupled"
    else:
        raise TypeError(f"unknown boundary condition {bc!r}")
    if zero_mode:
        lnz -= 2.0
        kind += "_zero_mode"
    return AsymptoticLogExpansion(const, lnz, I, PowerTail(tuple(tail)), kind, tuple(neg))
