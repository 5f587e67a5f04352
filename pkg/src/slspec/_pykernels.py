"""Pure-Python propagation kernel (fallback for the compiled ``_kernels``).

Implements the same DOP853 stepping, error norm, step control and
log-rescaling as the compiled module, with numpy doing the per-stage
vector work and compiled Python lambdas evaluating ``p`` and ``V``.
"""

import math

import numpy as np

from . import _tableau
from .funcexpr import compile_python

NS = _tableau.N_STAGES
TA = np.zeros((NS, NS))
for _i, _row in enumerate(_tableau.A):
    TA[_i, : len(_row)] = _row
TB = np.array(_tableau.B)
TC = np.array(_tableau.C)
TE3 = np.array(_tableau.E3)
TE5 = np.array(_tableau.E5)


class KernelError(ArithmeticError):
    pass


class Program:
    """Scalar evaluator for an expression tree."""

    def __init__(self, expr):
        self._f = compile_python(expr)

    def __call__(self, x):
        try:
            return float(self._f(x))
        except (ValueError, ZeroDivisionError, OverflowError):
            return math.nan


def make_program(expr):
    return Program(expr)


def _rhs(p, v, mu, w, x, y, out):
    # y, out: (ncols, nblocks, 2)
    pinv = 1.0 / p(x)
    vm = v(x) - mu
    out[:, :, 0] = y[:, :, 1] * pinv
    out[:, :, 1] = vm * y[:, :, 0]
    out[:, 1:, 1] -= w * y[:, :-1, 0]


def propagate(p, v, mu, y0, xs, atol, rtol, rescale=1e8, h0=0.0, max_steps=20_000_000,
              weight=1.0):
    """Integrate from x=0 through the sorted output points ``xs``.

    Returns ``(states, logs, nsteps)``; see the compiled kernel.
    """
    shape = np.shape(y0)
    y = np.array(y0, dtype=float).reshape(shape[0], -1, 2)
    ncols, nblocks = y.shape[:2]
    n = y.size
    xout = np.asarray(xs, dtype=float)
    nout = xout.shape[0]
    states = np.empty((nout,) + y.shape)
    logs = np.empty(nout)
    if nout == 0:
        return states.reshape((0,) + shape), logs, 0
    if np.any(np.diff(xout) < 0):
        raise ValueError("output points must be sorted")
    if xout[0] < 0.0 or xout[-1] > 1.0:
        raise ValueError("output points must lie in [0, 1]")

    lo = 1.0 / rescale
    logscale = 0.0
    nrm = np.max(np.abs(y))
    if nrm == 0.0:
        raise ValueError("zero initial state")
    if nrm > rescale or nrm < lo:
        y /= nrm
        logscale += math.log(nrm)

    K = np.empty((NS + 1,) + y.shape)
    h = h0 if h0 > 0.0 else min(0.05, 0.2 / (math.sqrt(abs(mu)) + 1.0))
    x = 0.0
    _rhs(p, v, mu, weight, x, y, K[0])
    steps = 0
    rejected = False
    io = 0
    while io < nout:
        target = xout[io]
        if target - x <= 1e-15:
            states[io] = y
            logs[io] = logscale
            io += 1
            continue
        hit = False
        hstep = h
        if x + hstep >= target - 1e-14 * hstep:
            hstep = target - x
            hit = True
        if hstep < 1e-14:
            raise KernelError(f"step size underflow at x={x!r}")
        for s in range(1, NS):
            ytmp = y + hstep * np.tensordot(TA[s, :s], K[:s], axes=1)
            _rhs(p, v, mu, weight, x + TC[s] * hstep, ytmp, K[s])
        ynew = y + hstep * np.tensordot(TB, K[:NS], axes=1)
        _rhs(p, v, mu, weight, x + hstep, ynew, K[NS])
        steps += 1
        if steps > max_steps:
            raise KernelError(f"step limit exceeded at x={x!r}")
        if not np.all(np.isfinite(ynew)):
            raise KernelError(f"non-finite state at x={x!r} (coefficient outside its domain?)")
        bnorm = atol * np.maximum(np.abs(y).max(axis=(1, 2)), np.abs(ynew).max(axis=(1, 2))) + 1e-300
        sc = bnorm[:, None, None] + rtol * np.maximum(np.abs(y), np.abs(ynew))
        e3 = np.tensordot(TE3, K, axes=1) / sc
        e5 = np.tensordot(TE5, K, axes=1) / sc
        err3 = float(np.sum(e3 * e3))
        err5 = float(np.sum(e5 * e5))
        if err5 == 0.0 and err3 == 0.0:
            err = 0.0
        else:
            err = hstep * err5 / math.sqrt((err5 + 0.01 * err3) * n)
        if err <= 1.0:
            x = target if hit else x + hstep
            y = ynew
            K[0] = K[NS]
            factor = 10.0 if err == 0.0 else min(10.0, 0.9 * err ** -0.125)
            if rejected:
                factor = min(1.0, factor)
            rejected = False
            if not hit or hstep * factor > h:
                h = hstep * factor
            nrm = np.max(np.abs(y))
            if nrm > rescale or 0.0 < nrm < lo:
                y = y / nrm
                K[0] /= nrm
                logscale += math.log(nrm)
            if hit:
                states[io] = y
                logs[io] = logscale
                io += 1
        else:
            h = hstep * max(0.2, 0.9 * err ** -0.125)
            rejected = True
    return states.reshape((nout,) + shape), logs, steps
