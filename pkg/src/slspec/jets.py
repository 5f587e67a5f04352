"""Truncated Taylor series ("jets") with exact truncation semantics.

A jet of order K holds ``c[0..K]`` with ``c[k] = f^(k)(x) / k!``.  Coefficient
arrays may carry extra trailing axes so one jet can describe many base points
at once.  Binary operations between jets of different order truncate to the
smaller order.
"""

from __future__ import annotations

import numpy as np


class Jet:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.ndim == 0:
            coeffs = coeffs[None]
        self.coeffs = coeffs

    # construction ---------------------------------------------------------

    @classmethod
    def constant(cls, value, order, shape=()):
        c = np.zeros((order + 1,) + tuple(shape))
        c[0] = value
        return cls(c)

    @classmethod
    def variable(cls, x, order):
        x = np.asarray(x, dtype=float)
        c = np.zeros((order + 1,) + x.shape)
        c[0] = x
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @property
    def order(self):
        return self.coeffs.shape[0] - 1

    @property
    def value(self):
        return self.coeffs[0]

    def truncate(self, order):
        if order > self.order:
            raise ValueError("cannot raise the order of a jet")
        return Jet(self.coeffs[: order + 1])

    def derivative(self):
        """Jet of f' (one order lower): ``c'[k] = (k+1) c[k+1]``."""
        if self.order < 1:
            raise ValueError("derivative of an order-0 jet is undefined")
        k = np.arange(1, self.order + 1).reshape((-1,) + (1,) * (self.coeffs.ndim - 1))
        return Jet(k * self.coeffs[1:])

    def __repr__(self):
        return f"Jet({self.coeffs.tolist()!r})"

    # arithmetic -----------------------------------------------------------

    def _pair(self, other):
        if isinstance(other, Jet):
            n = min(self.order, other.order)
            return self.coeffs[: n + 1], other.coeffs[: n + 1]
        c = np.zeros_like(self.coeffs)
        c[0] = other
        return self.coeffs, c

    def __add__(self, other):
        a, b = self._pair(other)
        return Jet(a + b)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._pair(other)
        return Jet(a - b)

    def __rsub__(self, other):
        a, b = self._pair(other)
        return Jet(b - a)

    def __neg__(self):
        return Jet(-self.coeffs)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs * other)
        a, b = self._pair(other)
        return Jet(_convolve(a, b))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs / other)
        a, b = self._pair(other)
        if np.any(b[0] == 0.0):
            raise ZeroDivisionError("division by a jet with zero value")
        q = np.empty(np.broadcast_shapes(a.shape, b.shape))
        for k in range(a.shape[0]):
            acc = a[k] - sum(b[j] * q[k - j] for j in range(1, k + 1))
            q[k] = acc / b[0]
        return Jet(q)

    def __rtruediv__(self, other):
        return Jet.constant(other, self.order, self.coeffs.shape[1:]) / self

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)):
            raise TypeError("jets support integer powers only")
        if n < 0:
            return 1.0 / (self ** (-n))
        result = Jet.constant(1.0, self.order, self.coeffs.shape[1:])
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # elementary functions -------------------------------------------------

    def _dcoef(self):
        # j * a_j for j = 0..K
        k = np.arange(self.order + 1).reshape((-1,) + (1,) * (self.coeffs.ndim - 1))
        return k * self.coeffs

    def exp(self):
        a = self._dcoef()
        e = np.empty_like(self.coeffs)
        e[0] = np.exp(self.coeffs[0])
        for k in range(1, self.order + 1):
            e[k] = sum(a[j] * e[k - j] for j in range(1, k + 1)) / k
        return Jet(e)

    def log(self):
        c = self.coeffs
        if np.any(c[0] <= 0.0):
            raise ValueError("log of a jet with non-positive value")
        out = np.empty_like(c)
        out[0] = np.log(c[0])
        for k in range(1, self.order + 1):
            acc = k * c[k] - sum(j * out[j] * c[k - j] for j in range(1, k))
            out[k] = acc / (k * c[0])
        return Jet(out)

    def sqrt(self):
        c = self.coeffs
        if np.any(c[0] < 0.0):
            raise ValueError("sqrt of a jet with negative value")
        r = np.empty_like(c)
        r[0] = np.sqrt(c[0])
        for k in range(1, self.order + 1):
            acc = c[k] - sum(r[j] * r[k - j] for j in range(1, k))
            r[k] = acc / (2.0 * r[0])
        return Jet(r)

    def _sincos(self, hyperbolic):
        a = self._dcoef()
        s = np.empty_like(self.coeffs)
        c = np.empty_like(self.coeffs)
        x0 = self.coeffs[0]
        s[0], c[0] = (np.sinh(x0), np.cosh(x0)) if hyperbolic else (np.sin(x0), np.cos(x0))
        sign = 1.0 if hyperbolic else -1.0
        for k in range(1, self.order + 1):
            s[k] = sum(a[j] * c[k - j] for j in range(1, k + 1)) / k
            c[k] = sign * sum(a[j] * s[k - j] for j in range(1, k + 1)) / k
        return Jet(s), Jet(c)

    def sin(self):
        return self._sincos(False)[0]

    def cos(self):
        return self._sincos(False)[1]

    def sinh(self):
        return self._sincos(True)[0]

    def cosh(self):
        return self._sincos(True)[1]

    def tanh(self):
        s, c = self._sincos(True)
        return s / c


def _convolve(a, b):
    n = a.shape[0]
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    for k in range(n):
        out[k] = sum(a[j] * b[k - j] for j in range(k + 1))
    return out


def jet_arith(a: Jet, b: Jet | None, op: str, n: int | None = None) -> Jet:
    """Functional front end: ``op`` in add, sub, mul, div, sqrt, log, pow_int."""
    if op in ("add", "sub", "mul", "div"):
        if b is None or a.order != b.order:
            raise ValueError("binary jet operations need two jets of equal order")
        return {"add": a.__add__, "sub": a.__sub__, "mul": a.__mul__, "div": a.__truediv__}[op](b)
    if op == "sqrt":
        return a.sqrt()
    if op == "log":
        return a.log()
    if op == "pow_int":
        return a ** int(n)
    raise ValueError(f"unknown jet operation {op!r}")


def jet_shift_derivative(a: Jet) -> Jet:
    return a.derivative()
