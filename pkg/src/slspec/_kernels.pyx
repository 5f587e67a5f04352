# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Native propagation kernel.

Integrates the first-order Sturm-Liouville system

    phi_k' = psi_k / p(x)
    psi_k' = (V(x) - mu) phi_k - phi_{k-1}

for ``ncols`` independent columns, each carrying a chain of ``nblocks``
mu-derivative blocks (block k is the k-th Taylor coefficient in mu; the
chain is empty for a plain solve).  DOP853 with embedded 5th/3rd order error
estimate; the state is rescaled by its max-norm whenever that leaves
[1/R, R] and the logarithm of the scale is accumulated.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, exp, log, sqrt, sinh, cosh, tanh, fabs, pow, isfinite

from . import _tableau
from .funcexpr import compile_program

cnp.import_array()

cdef enum:
    NS = 12
    STACK = 64

cdef double TA[NS][NS]
cdef double TB[NS]
cdef double TC[NS]
cdef double TE3[NS + 1]
cdef double TE5[NS + 1]


def _load_tableau():
    cdef int i, j
    for i in range(NS):
        for j in range(NS):
            TA[i][j] = 0.0
        for j in range(i):
            TA[i][j] = _tableau.A[i][j]
        TB[i] = _tableau.B[i]
        TC[i] = _tableau.C[i]
    for i in range(NS + 1):
        TE3[i] = _tableau.E3[i]
        TE5[i] = _tableau.E5[i]


_load_tableau()


class KernelError(ArithmeticError):
    pass


cdef class Program:
    """Postfix program evaluating an expression at a double ``x``."""

    cdef int[::1] ops
    cdef double[::1] args
    cdef int n

    def __init__(self, expr):
        ops, args, depth = compile_program(expr)
        if depth > STACK:
            raise ValueError("expression nested too deeply for the native kernel")
        self.ops = ops
        self.args = args
        self.n = ops.shape[0]

    def __call__(self, double x):
        return self.eval(x)

    cdef double eval(self, double x):
        cdef double stack[STACK]
        cdef int sp = 0, i, op, e, m
        cdef double a, r
        for i in range(self.n):
            op = self.ops[i]
            if op == 0:
                stack[sp] = self.args[i]
                sp += 1
            elif op == 1:
                stack[sp] = x
                sp += 1
            elif op <= 5:
                sp -= 1
                a = stack[sp]
                if op == 2:
                    stack[sp - 1] = stack[sp - 1] + a
                elif op == 3:
                    stack[sp - 1] = stack[sp - 1] - a
                elif op == 4:
                    stack[sp - 1] = stack[sp - 1] * a
                else:
                    stack[sp - 1] = stack[sp - 1] / a
            elif op == 6:
                stack[sp - 1] = -stack[sp - 1]
            elif op == 7:
                e = <int> self.args[i]
                a = stack[sp - 1]
                m = e if e >= 0 else -e
                r = 1.0
                while m:
                    if m & 1:
                        r *= a
                    a *= a
                    m >>= 1
                stack[sp - 1] = r if e >= 0 else 1.0 / r
            else:
                a = stack[sp - 1]
                if op == 8:
                    stack[sp - 1] = sin(a)
                elif op == 9:
                    stack[sp - 1] = cos(a)
                elif op == 10:
                    stack[sp - 1] = exp(a)
                elif op == 11:
                    stack[sp - 1] = log(a) if a > 0.0 else 0.0 / 0.0
                elif op == 12:
                    stack[sp - 1] = sqrt(a) if a >= 0.0 else 0.0 / 0.0
                elif op == 13:
                    stack[sp - 1] = sinh(a)
                elif op == 14:
                    stack[sp - 1] = cosh(a)
                else:
                    stack[sp - 1] = tanh(a)
        return stack[0]


def make_program(expr):
    return Program(expr)


cdef inline void _rhs(Program p, Program v, double mu, double w, double x, double* y,
                      double* out, int ncols, int nblocks):
    cdef double pinv = 1.0 / p.eval(x)
    cdef double vm = v.eval(x) - mu
    cdef int c, k, idx
    for c in range(ncols):
        for k in range(nblocks):
            idx = 2 * (c * nblocks + k)
            out[idx] = y[idx + 1] * pinv
            out[idx + 1] = vm * y[idx]
            if k > 0:
                out[idx + 1] -= w * y[idx - 2]


def propagate(Program p, Program v, double mu, y0, xs, double atol, double rtol,
              double rescale=1e8, double h0=0.0, long max_steps=20000000,
              double weight=1.0):
    """Integrate from x=0 through the sorted output points ``xs``.

    Returns ``(states, logs, nsteps)`` where ``states[i]`` (shape of ``y0``)
    times ``exp(logs[i])`` is the solution at ``xs[i]``.  Block ``k`` of each
    column carries ``weight**k`` times the k-th mu-Taylor coefficient.
    """
    cdef cnp.ndarray[double, ndim=3] y0a = np.ascontiguousarray(y0, dtype=np.float64).reshape(
        (np.shape(y0)[0], -1, 2))
    cdef int ncols = y0a.shape[0]
    cdef int nblocks = y0a.shape[1]
    cdef int n = 2 * ncols * nblocks
    cdef double[::1] xout = np.ascontiguousarray(xs, dtype=np.float64)
    cdef int nout = xout.shape[0]
    cdef cnp.ndarray[double, ndim=2] states = np.empty((nout, n))
    cdef cnp.ndarray[double, ndim=1] logs = np.empty(nout)

    cdef double[::1] y = y0a.reshape(-1).copy()
    cdef double[::1] ynew = np.empty(n)
    cdef double[::1] ytmp = np.empty(n)
    cdef double[:, ::1] K = np.empty((NS + 1, n))
    cdef double[::1] bnorm = np.empty(ncols)

    cdef double x = 0.0, h, hstep, target, err, err3, err5, e3, e5, sc, denom, factor
    cdef double nrm, logscale = 0.0, lo = 1.0 / rescale, dy, bo, bn
    cdef int i, j, s, io = 0, b, cw = 2 * nblocks
    cdef long steps = 0
    cdef bint rejected = False, hit

    if nout == 0:
        return states.reshape((0,) + np.shape(y0)), logs, 0
    for i in range(1, nout):
        if xout[i] < xout[i - 1]:
            raise ValueError("output points must be sorted")
    if xout[0] < 0.0 or xout[nout - 1] > 1.0:
        raise ValueError("output points must lie in [0, 1]")

    nrm = 0.0
    for i in range(n):
        nrm = max(nrm, fabs(y[i]))
    if nrm == 0.0:
        raise ValueError("zero initial state")
    if nrm > rescale or nrm < lo:
        for i in range(n):
            y[i] /= nrm
        logscale += log(nrm)

    h = h0 if h0 > 0.0 else min(0.05, 0.2 / (sqrt(fabs(mu)) + 1.0))
    _rhs(p, v, mu, weight, x, &y[0], &K[0, 0], ncols, nblocks)

    while io < nout:
        target = xout[io]
        if target - x <= 1e-15:
            for i in range(n):
                states[io, i] = y[i]
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
        # stages
        for s in range(1, NS):
            for i in range(n):
                dy = 0.0
                for j in range(s):
                    dy += TA[s][j] * K[j, i]
                ytmp[i] = y[i] + hstep * dy
            _rhs(p, v, mu, weight, x + TC[s] * hstep, &ytmp[0], &K[s, 0], ncols, nblocks)
        for i in range(n):
            dy = 0.0
            for j in range(NS):
                dy += TB[j] * K[j, i]
            ynew[i] = y[i] + hstep * dy
        _rhs(p, v, mu, weight, x + hstep, &ynew[0], &K[NS, 0], ncols, nblocks)
        steps += 1
        if steps > max_steps:
            raise KernelError(f"step limit exceeded at x={x!r}")
        # per-column scale: atol relative to the column max-norm, rtol per component
        for b in range(ncols):
            bo = 0.0
            for i in range(b * cw, (b + 1) * cw):
                bo = max(bo, max(fabs(y[i]), fabs(ynew[i])))
            bnorm[b] = atol * bo + 1e-300
        err3 = 0.0
        err5 = 0.0
        for i in range(n):
            if not isfinite(ynew[i]):
                raise KernelError(f"non-finite state at x={x!r} (coefficient outside its domain?)")
            sc = bnorm[i // cw] + rtol * max(fabs(y[i]), fabs(ynew[i]))
            e3 = 0.0
            e5 = 0.0
            for j in range(NS + 1):
                e3 += TE3[j] * K[j, i]
                e5 += TE5[j] * K[j, i]
            e3 /= sc
            e5 /= sc
            err3 += e3 * e3
            err5 += e5 * e5
        if err5 == 0.0 and err3 == 0.0:
            err = 0.0
        else:
            denom = err5 + 0.01 * err3
            err = hstep * err5 / sqrt(denom * n)
        if err <= 1.0:
            x = target if hit else x + hstep
            for i in range(n):
                y[i] = ynew[i]
                K[0, i] = K[NS, i]
            factor = 10.0 if err == 0.0 else min(10.0, 0.9 * pow(err, -0.125))
            if rejected:
                factor = min(1.0, factor)
            rejected = False
            if not hit or hstep * factor > h:
                h = hstep * factor
            nrm = 0.0
            for i in range(n):
                nrm = max(nrm, fabs(y[i]))
            if nrm > rescale or (nrm < lo and nrm > 0.0):
                for i in range(n):
                    y[i] /= nrm
                    K[0, i] /= nrm
                logscale += log(nrm)
            if hit:
                for i in range(n):
                    states[io, i] = y[i]
                logs[io] = logscale
                io += 1
        else:
            h = hstep * max(0.2, 0.9 * pow(err, -0.125))
            rejected = True

    return states.reshape((nout,) + np.shape(y0)), logs, steps
