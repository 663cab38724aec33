"""Nahm's equation 1 - z_i = prod_j z_j^(A_ij) on (0,1)^N, the volume Lambda,
and rational recognition of lambda = Lambda / (2 pi)^2."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
from mpmath import mp

from .errors import NoConvergence
from .model import NahmData, validate
from .specialfn import GUARD, rogers_L, to_mpf


@dataclass(frozen=True)
class NahmSolution:
    z: tuple                  # mpf entries in (0, 1)
    Lambda: object
    lam: object
    residual: object
    prec: int
    iterations: int = 0

    def as_json(self, digits: int = 30) -> dict:
        return {"z": [mpmath.nstr(x, digits) for x in self.z],
                "Lambda": mpmath.nstr(self.Lambda, digits),
                "lambda": mpmath.nstr(self.lam, digits),
                "residual": mpmath.nstr(self.residual, 5)}


def nahm_residual(data: NahmData, z: Sequence) -> object:
    """max_i |1 - z_i - prod_j z_j^(A_ij)|."""
    N = data.N
    worst = mpmath.mpf(0)
    for i in range(N):
        prod = mpmath.mpf(1)
        for j in range(N):
            if data.A[i][j]:
                prod *= z[j] ** to_mpf(data.A[i][j])
        worst = max(worst, abs(1 - z[i] - prod))
    return worst


def _newton(data: NahmData, x, max_iter: int):
    """Damped Newton on g_i(x) = log(1 - e^(x_i)) - sum_j A_ij x_j, x = log z."""
    N = data.N
    A = [[to_mpf(a) for a in row] for row in data.A]
    tol = mpmath.mpf(10) ** (-(mp.dps - 5))

    def g(x):
        return mpmath.matrix([mpmath.log(1 - mpmath.exp(x[i]))
                              - sum(A[i][j] * x[j] for j in range(N)) for i in range(N)])

    gx = g(x)
    for it in range(1, max_iter + 1):
        J = mpmath.matrix(N, N)
        for i in range(N):
            ez = mpmath.exp(x[i])
            for k in range(N):
                J[i, k] = -A[i][k]
            J[i, i] -= ez / (1 - ez)
        step = mpmath.lu_solve(J, -gx)
        t = mpmath.mpf(1)
        norm0 = mpmath.norm(gx)
        while True:
            cand = x + t * step
            if all(cand[i] < 0 for i in range(N)):
                gc = g(cand)
                if mpmath.norm(gc) <= norm0 or t < mpmath.mpf(2) ** -30:
                    break
            t /= 2
            if t < mpmath.mpf(2) ** -60:
                raise NoConvergence("line search failed to stay inside (0,1)^N")
        x, gx = cand, gc
        if mpmath.norm(t * step) < tol and mpmath.norm(gx) < tol * 10:
            return x, it
    raise NoConvergence(f"Newton did not converge in {max_iter} steps")


def solve_nahm(data: NahmData, prec: int = 60, start: Sequence | None = None,
               max_iter: int = 500) -> NahmSolution:
    """The unique solution of Nahm's equation in (0,1)^N.

    Iterates at 1.2*prec digits in log coordinates; ``start`` is an optional
    initial z (default all 1/2).
    """
    validate(data)
    work = int(math.ceil(1.2 * prec)) + GUARD
    with mp.workdps(work):
        z0 = start if start is not None else [mpmath.mpf(1) / 2] * data.N
        x = mpmath.matrix([mpmath.log(mpmath.mpf(v)) for v in z0])
        x, its = _newton(data, x, max_iter)
        z = tuple(mpmath.exp(x[i]) for i in range(data.N))
        res = nahm_residual(data, z)
        Lam, lam = _lambda(data, z)
    with mp.workdps(prec):
        return NahmSolution(tuple(+v for v in z), +Lam, +lam, +res, prec, its)


def _lambda(data: NahmData, z):
    Lam = -sum(rogers_L(z[i], mp.dps) / data.d[i] for i in range(data.N))
    return Lam, Lam / (2 * mpmath.pi) ** 2


def compute_lambda(sol: NahmSolution, data: NahmData):
    """(Lambda, lambda) recomputed from z: Lambda = -sum L(z_i)/d_i."""
    with mp.workdps(sol.prec + GUARD):
        Lam, lam = _lambda(data, sol.z)
    with mp.workdps(sol.prec):
        return +Lam, +lam


def detect_rational(x, max_den: int = 1000, tol=None) -> Fraction | None:
    """First continued-fraction convergent p/q with q <= max_den and |x - p/q| < tol.

    The default tolerance is 10^(-P/2) for the current working precision P.
    """
    x = mpmath.mpmathify(x)
    if tol is None:
        tol = mpmath.mpf(10) ** (-(mp.dps // 2))
    tol = mpmath.mpf(tol)
    with mp.workdps(mp.dps + GUARD):
        h0, h1 = 0, 1
        k0, k1 = 1, 0
        y = x
        for _ in range(200):
            a = int(mpmath.floor(y))
            h0, h1 = h1, a * h1 + h0
            k0, k1 = k1, a * k1 + k0
            if k1 > max_den:
                return None
            if abs(x - mpmath.mpf(h1) / k1) < tol:
                return Fraction(h1, k1)
            frac = y - a
            if frac == 0:
                return None
            y = 1 / frac
    return None
