"""Closed forms for the first two tail coefficients, written out term by term.

These are independent of the cumulant machinery: they use only endpoint
derivatives of p, V and one volume integral each.
"""

import math

from slspec.quadrature import integrate
from slspec.wkb import delta


def _ends(prob):
    p = prob.p.jet([0.0, 1.0], 4).coeffs
    V = prob.V.jet([0.0, 1.0], 2).coeffs
    # value, first, second, third derivative at each end
    pd = [[p[k][e] * math.factorial(k) for k in range(4)] for e in (0, 1)]
    Vd = [[V[k][e] * math.factorial(k) for k in range(2)] for e in (0, 1)]
    return pd, Vd


def _vol1(prob):
    def f(t):
        pj = prob.p.jet(t, 2).coeffs
        p, dp, ddp = pj[0], pj[1], 2 * pj[2]
        V = prob.V(t)
        return V / (2 * p**0.5) - dp**2 / (32 * p**1.5) + ddp / (8 * p**0.5)

    return float(integrate(f, 0.0, 1.0, atol=1e-14, rtol=1e-14).value)


def _vol2(prob):
    def f(t):
        pj = prob.p.jet(t, 3).coeffs
        p, dp, ddp, dddp = pj[0], pj[1], 2 * pj[2], 6 * pj[3]
        dV = prob.V.jet(t, 1).coeffs[1]
        return -dp**3 / (64 * p**2) - dV / 4 + dp * ddp / (32 * p) - dddp / 16

    return float(integrate(f, 0.0, 1.0, atol=1e-14, rtol=1e-14).value)


def M1(prob, bc):
    (P0, P1), (V0, V1) = _ends(prob)
    out = _vol1(prob)
    if not delta(bc.A2):
        out += (bc.A2 * P0[1] + 4 * bc.A1) / (4 * bc.A2 * math.sqrt(P0[0]))
    if not delta(bc.B2):
        out -= (bc.B2 * P1[1] - 4 * bc.B1) / (4 * bc.B2 * math.sqrt(P1[0]))
    return out


def M2(prob, bc):
    (P0, P1), (V0, V1) = _ends(prob)
    out = _vol2(prob) - V0[0] / 2 + P0[1] ** 2 / (32 * P0[0]) - P0[2] / 8
    A1, A2, B1, B2 = bc.A1, bc.A2, bc.B1, bc.B2
    if not delta(A2):
        out += (-A1**2 / (2 * A2**2 * P0[0]) + V0[0] / 2 - A1 * P0[1] / (4 * A2 * P0[0])
                - P0[1] ** 2 / (16 * P0[0]) + P0[2] / 8)
    if not delta(B2):
        out += (-B1**2 / (2 * B2**2 * P1[0]) + V1[0] / 2 + B1 * P1[1] / (4 * B2 * P1[0])
                - P1[1] ** 2 / (16 * P1[0]) + P1[2] / 8)
    return out


def N1(prob, bc):
    (P0, P1), _ = _ends(prob)
    k11, k12, k21, k22 = bc.k11, bc.k12, bc.k21, bc.k22
    r0, r1 = math.sqrt(P0[0]), math.sqrt(P1[0])
    out = _vol1(prob)
    if delta(k12):
        out -= (k11 * P1[1] - k22 * P0[1] + 4 * k21) / (4 * (r1 * k11 + r0 * k22))
    else:
        out -= (k22 * r0 + k11 * r1) / (k12 * r0 * r1) - P0[1] / (4 * r0) + P1[1] / (4 * r1)
    return out


def N2(prob, bc, sign_p1_term=+1):
    """Second coupled coefficient.

    ``sign_p1_term`` selects the sign in front of ``p'(1)^2/p(1)`` inside the
    ``k12 != 0`` bracket; the two printed versions of this bracket disagree.
    """
    (P0, P1), (V0, V1) = _ends(prob)
    k11, k12, k21, k22 = bc.k11, bc.k12, bc.k21, bc.k22
    r0, r1 = math.sqrt(P0[0]), math.sqrt(P1[0])
    out = _vol2(prob) - V0[0] / 2 + P0[1] ** 2 / (32 * P0[0]) - P0[2] / 8
    if not delta(k12):
        br = ((k22 * r0 + k11 * r1) / (k12 * r0 * r1)) ** 2 - (V0[0] + V1[0])
        br += (P0[1] ** 2 / P0[0] + sign_p1_term * P1[1] ** 2 / P1[0]) / 8
        br -= (P0[2] + P1[2]) / 4 + 2 * k21 / (k12 * r0 * r1)
        br -= k11 * P0[1] / (2 * P0[0] * k12) - k22 * P1[1] / (2 * P1[0] * k12)
        out -= br / 2
    else:
        q = r1 * k11 + r0 * k22
        br = ((k11 * P1[1] - k22 * P0[1] + 4 * k21) / q) ** 2
        br -= (4 * r0 * k22 * (4 * V0[0] + P0[2]) + 4 * r1 * k11 * (4 * V1[0] + P1[2])
               - k22 * P0[1] ** 2 / r0 - k11 * P1[1] ** 2 / r1) / q
        out -= br / 32
    return out
