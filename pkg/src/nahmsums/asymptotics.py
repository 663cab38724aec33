"""Radial asymptotics of Nahm sums at roots of unity.

The expansion is built symbolically-numerically: the exponent of the Gaussian
integrand is a polynomial in x graded by powers of eps^(1/2), it is
exponentiated with the usual power-series recursion, and every monomial is
integrated against the Gaussian with covariance m (A~ D)^-1 via Wick pairings.
"""
from __future__ import annotations

import cmath
import itertools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import mpmath
from mpmath import mp

from .errors import NotCoprime, NotPositiveDefinite
from .model import NahmData, exponent_denominator, quadratic_form, strong_denominator, validate
from .qseries import eval_numeric
from .solver import NahmSolution, solve_nahm
from .specialfn import (GUARD, RootOfUnityContext, bernoulli_shift_coeffs, chi_factor, e,
                        gauss_sum, polylog_nonpositive, to_mpf)


class BranchWarning(UserWarning):
    """A 1/m-th root of a cyclic dilogarithm value is taken across the principal cut."""


# --- formal series in eps^(1/2) ---------------------------------------------------

class FormalSeries:
    """sum_k c_k eps^(k/2), k = 0..2K; everything beyond eps^K is discarded."""

    __slots__ = ("K", "c")

    def __init__(self, K: int, coeffs=None):
        self.K = int(K)
        c = list(coeffs or [])
        c = c[:2 * self.K + 1] + [mpmath.mpf(0)] * max(0, 2 * self.K + 1 - len(c))
        self.c = c

    @classmethod
    def constant(cls, K, value):
        return cls(K, [value])

    def __add__(self, other):
        if not isinstance(other, FormalSeries):
            return FormalSeries(self.K, [self.c[0] + other] + self.c[1:])
        K = min(self.K, other.K)
        return FormalSeries(K, [a + b for a, b in zip(self.c, other.c)])

    __radd__ = __add__

    def __mul__(self, other):
        if not isinstance(other, FormalSeries):
            return FormalSeries(self.K, [a * other for a in self.c])
        K = min(self.K, other.K)
        L = 2 * K + 1
        out = [mpmath.mpf(0)] * L
        for i in range(L):
            if self.c[i]:
                for j in range(L - i):
                    out[i + j] += self.c[i] * other.c[j]
        return FormalSeries(K, out)

    __rmul__ = __mul__

    def exp(self):
        """exp of the series; the constant term is factored out as a scalar."""
        L = 2 * self.K + 1
        F = [mpmath.mpf(0)] * L
        F[0] = mpmath.mpf(1)
        for h in range(1, L):
            F[h] = sum((j * self.c[j] * F[h - j] for j in range(1, h + 1)), mpmath.mpf(0)) / h
        return FormalSeries(self.K, [mpmath.exp(self.c[0]) * f for f in F])

    def coefficient(self, power) -> object:
        """Coefficient of eps^power, power a multiple of 1/2."""
        k = Fraction(power) * 2
        if k.denominator != 1 or not 0 <= k <= 2 * self.K:
            raise ValueError(f"eps^{power} is outside the series")
        return self.c[int(k)]

    def integer_coeffs(self):
        return [self.c[2 * j] for j in range(self.K + 1)]

    def evaluate(self, eps):
        eps = mpmath.mpmathify(eps)
        s = mpmath.sqrt(eps)
        return sum((ck * s ** k for k, ck in enumerate(self.c)), mpmath.mpf(0))

    def __repr__(self):
        return "FormalSeries(" + ", ".join(mpmath.nstr(x, 8) for x in self.integer_coeffs()) + ")"


# --- polynomials in x_1..x_N ------------------------------------------------------

Poly = dict  # exponent tuple -> coefficient


def _padd(P: Poly, Q: Poly, scale=1):
    for k, v in Q.items():
        P[k] = P.get(k, 0) + scale * v


def _pmul(P: Poly, Q: Poly) -> Poly:
    out: Poly = {}
    for a, u in P.items():
        for b, v in Q.items():
            k = tuple(x + y for x, y in zip(a, b))
            out[k] = out.get(k, 0) + u * v
    return out


class _Wick:
    """Centered Gaussian moments E[x^k] with covariance C, memoised."""

    def __init__(self, C):
        self.C = C
        self.N = len(C)
        self.memo: dict[tuple[int, ...], object] = {(0,) * self.N: mpmath.mpf(1)}

    def __call__(self, k: tuple[int, ...]):
        if sum(k) % 2:
            return mpmath.mpf(0)
        if k in self.memo:
            return self.memo[k]
        i = next(j for j in range(self.N) if k[j])
        rest = list(k)
        rest[i] -= 1
        total = mpmath.mpf(0)
        for j in range(self.N):
            if rest[j]:
                cnt = rest[j]
                r2 = list(rest)
                r2[j] -= 1
                total += cnt * self.C[i][j] * self(tuple(r2))
        self.memo[k] = total
        return total


def gaussian_moment(C, k: Sequence[int]):
    """E[prod x_i^k_i] for the centered Gaussian with covariance C (Wick pairings).

    The formal integral I_M[x^k] with quadratic form 1/2 x^T M x is
    gaussian_moment(M^-1, k).
    """
    N = len(C)
    with mp.workdps(mp.dps + GUARD):
        Cm = mpmath.matrix([[mpmath.mpmathify(x) for x in row] for row in C])
        try:
            mpmath.cholesky(Cm)
        except ValueError as exc:
            raise NotPositiveDefinite("covariance is not positive definite") from exc
        return _Wick([[Cm[i, j] for j in range(N)] for i in range(N)])(tuple(k))


# --- psi series -------------------------------------------------------------------

def psi_series(w, ctx: RootOfUnityContext, K: int, d: int = 1, prec=None) -> dict[int, dict[int, object]]:
    """psi_{w,zeta}(x eps^(-1/2), d eps) graded by eps^(h/2), h = 1..2K.

    Returns {h: {j: coeff}} meaning coeff * x^j * eps^(h/2).  A term
    B_r(...) nu^j eps^(r-1) lands in grade h = 2(r-1) - j; the r = 2, j = 2
    term cancels against the delta correction, so h >= 1 throughout.
    """
    m = ctx.m
    with mp.workdps((mp.dps if prec is None else prec) + GUARD):
        zeta = ctx.zeta(mp.dps - GUARD)
        w = mpmath.mpmathify(w)
        out: dict[int, dict[int, object]] = {}
        pts = []
        zt = mpmath.mpf(1)
        for t in range(1, m + 1):
            zt *= zeta
            pts.append(zt * w)
        for r in range(2, 2 * K + 3):
            lis = [polylog_nonpositive(2 - r, p, mp.dps - GUARD) for p in pts]
            scale = mpmath.mpf(d) ** (r - 1) / math.factorial(r)
            for t in range(1, m + 1):
                coeffs = list(bernoulli_shift_coeffs(r, 1 - Fraction(t, m), Fraction(-1, m)))
                if r == 2:
                    coeffs[2] -= Fraction(1, m * m)
                for j, cj in enumerate(coeffs):
                    if cj == 0:
                        continue
                    h = 2 * (r - 1) - j
                    if h < 1:
                        raise AssertionError("psi has a nonpositive grade term")
                    if h > 2 * K:
                        continue
                    slot = out.setdefault(h, {})
                    slot[j] = slot.get(j, 0) - to_mpf(cj) * lis[t - 1] * scale
        return out


# --- the ingredients of the theorem ------------------------------------------------

def tilde_A(data: NahmData, sol: NahmSolution):
    """A~ = A + diag(z/(1-z)) as an mp matrix."""
    N = data.N
    M = mpmath.matrix(N, N)
    for i in range(N):
        for j in range(N):
            M[i, j] = to_mpf(data.A[i][j])
        M[i, i] += sol.z[i] / (1 - sol.z[i])
    return M


def _covariance(data: NahmData, sol: NahmSolution, m: int):
    At = tilde_A(data, sol)
    N = data.N
    ATD = mpmath.matrix(N, N)
    for i in range(N):
        for j in range(N):
            ATD[i, j] = At[i, j] * data.d[j]
    C = mpmath.inverse(ATD) * m
    return [[(C[i, j] + C[j, i]) / 2 for j in range(N)] for i in range(N)]


def I_series(data: NahmData, ctx: RootOfUnityContext, sol: NahmSolution, k: Sequence[int],
             K: int = 3, prec: int | None = None, _cache=None) -> FormalSeries:
    """The formal Gaussian integral I_{Q,zeta}(k, eps) up to eps^K.

    Odd powers of eps^(1/2) vanish by parity and are stored as exact zeros
    after checking they are negligible.
    """
    m = ctx.m
    N = data.N
    P = mp.dps if prec is None else prec
    with mp.workdps(P + GUARD):
        cache = _cache if _cache is not None else {}
        if "wick" not in cache:
            cache["wick"] = _Wick(_covariance(data, sol, m))
        wick = cache["wick"]
        theta = [sol.z[i] ** (mpmath.mpf(1) / m) for i in range(N)]
        # exponent E = sum_h E_h eps^(h/2) as polynomials in x
        E: list[Poly] = [dict() for _ in range(2 * K + 1)]
        unit = [tuple(int(a == i) * 0 for a in range(N)) for i in range(N)]
        for i in range(N):
            ci = ctx.power(data.d[i])
            key = ("psi", i, k[i] % m)
            if key not in cache:
                w = ci.zeta(P) ** (k[i] % m) * theta[i]
                cache[key] = psi_series(w, ci, K, data.d[i], P)
            for h, terms in cache[key].items():
                for j, cj in terms.items():
                    mono = [0] * N
                    mono[i] = j
                    _padd(E[h], {tuple(mono): cj})
            mono = [0] * N
            mono[i] = 1
            _padd(E[1], {tuple(mono): -to_mpf(data.b[i]) / m})
        if K >= 1:
            _padd(E[2], {(0,) * N: -(to_mpf(data.c) + mpmath.mpf(sum(data.d)) / 24) / m})
        del unit
        # F = exp(E): h F_h = sum_j j E_j F_{h-j}
        F: list[Poly] = [{(0,) * N: mpmath.mpf(1)}]
        for h in range(1, 2 * K + 1):
            acc: Poly = {}
            for j in range(1, h + 1):
                if E[j] and F[h - j]:
                    _padd(acc, _pmul(E[j], F[h - j]), j)
            F.append({kk: v / h for kk, v in acc.items()})
        coeffs = []
        for h in range(2 * K + 1):
            val = sum((v * wick(mono) for mono, v in F[h].items()), mpmath.mpf(0))
            coeffs.append(val)
        return FormalSeries(K, coeffs)


def c_of_Q(data: NahmData, sol: NahmSolution, ctx: RootOfUnityContext):
    """(det A~)^(-1/2) prod theta_i^(b_i/d_i) (1-z_i)^(1/2 - 1/m)."""
    m = ctx.m
    with mp.workdps(sol.prec + GUARD):
        dt = mpmath.det(tilde_A(data, sol))
        if dt <= 0:
            raise NotPositiveDefinite("det A~ must be positive")
        out = 1 / mpmath.sqrt(dt)
        for i in range(data.N):
            theta = sol.z[i] ** (mpmath.mpf(1) / m)
            out *= theta ** to_mpf(data.b[i] / data.d[i])
            out *= (1 - sol.z[i]) ** (mpmath.mpf(1) / 2 - mpmath.mpf(1) / m)
        return out


def _red(x: Fraction, m: int) -> int:
    """x reduced modulo m (denominator must be invertible mod m)."""
    x = Fraction(x)
    if m == 1:
        return 0
    if math.gcd(x.denominator, m) != 1:
        raise NotCoprime(f"denominator of {x} is not prime to {m}")
    return (x.numerator * pow(x.denominator, -1, m)) % m


def _check_hypotheses(data: NahmData, ctx: RootOfUnityContext, delta: int):
    m = ctx.m
    if math.gcd(m, delta) != 1:
        raise NotCoprime(f"m = {m} is not prime to the strong denominator {delta}")
    for di in data.d:
        if math.gcd(m, di) != 1:
            raise NotCoprime(f"m = {m} is not prime to d_i = {di}")


def log_cyclic_dilog(ctx: RootOfUnityContext, x):
    """sum_{t<m} t Log(1 - zeta^t x): the branch of log D_zeta(x) analytic on |x| < 1."""
    zeta = ctx.zeta(mp.dps)
    total = mpmath.mpf(0)
    zt = mpmath.mpf(1)
    for t in range(1, ctx.m):
        zt *= zeta
        total += t * mpmath.log(1 - zt * x)
    return total


def _dilog_root(ctx: RootOfUnityContext, x, branch: str):
    """D_zeta(x)^(-1/m) on the analytic ('log') or principal branch, plus a cut flag."""
    L = log_cyclic_dilog(ctx, x)
    analytic = mpmath.exp(-L / ctx.m)
    principal = mpmath.exp(-mpmath.log(mpmath.exp(L)) / ctx.m)
    crossed = abs(analytic - principal) > mpmath.mpf(10) ** (-(mp.dps // 2)) * abs(analytic)
    return (analytic if branch == "log" else principal), crossed


def _qbar_phase(data0: NahmData, ctx: RootOfUnityContext, k: Sequence[int]):
    """zeta^{Q0(k) mod m} for the c-free form Q0."""
    m = ctx.m
    if m == 1:
        return mpmath.mpf(1)
    T = _red(quadratic_form(data0, k), m)
    return e(Fraction(ctx.a * T % m, m))


def _k_summand(data0, ctx, theta, zetas, k, twist=None):
    m = ctx.m
    N = data0.N
    term = _qbar_phase(data0, ctx, k)
    for i in range(N):
        x = sum((k[j] * data0.A[j][i] for j in range(N)), Fraction(0))
        term *= theta[i] ** to_mpf(x)
        if twist is not None:
            term *= zetas[i] ** (twist[i] * _red(x, m))
        base = zetas[i] * theta[i] * (zetas[i] ** twist[i] if twist is not None else 1)
        poch = mpmath.mpf(1)
        y = base
        for _ in range(k[i]):
            poch *= 1 - y
            y *= zetas[i]
        term /= poch
    return term


@dataclass
class AsymptoticExpansion:
    """prefactor * S(eps) with prefactor = m^(-N/2) chi c(Q) G and the Lambda of the exponent."""
    alpha: Fraction
    m: int
    Lambda: object
    prefactor: object
    S: FormalSeries
    chi: object
    cQ: object
    G: object
    branch_warning: bool = False
    parts: dict = field(default_factory=dict)

    def value(self, eps):
        return self.prefactor * self.S.evaluate(eps)


def S_series(data: NahmData, ctx: RootOfUnityContext, sol: NahmSolution, K: int = 3,
             prec: int | None = None, branch: str = "log") -> tuple[FormalSeries, bool]:
    """S_{Q,zeta}(eps) up to eps^K and whether a cyclic-dilog root crossed the principal cut.

    ``branch='log'`` takes D^(-1/m) = exp(-(1/m) sum t Log(1 - zeta^t x)); ``'principal'``
    uses the principal root of the product.  The phase e(alpha c) of q^c is not part of S.
    """
    validate(data)
    m, N = ctx.m, data.N
    delta = strong_denominator(data)
    _check_hypotheses(data, ctx, delta)
    P = sol.prec if prec is None else prec
    data0 = data.replace(c=0)
    with mp.workdps(P + GUARD):
        theta = [sol.z[i] ** (mpmath.mpf(1) / m) for i in range(N)]
        zetas = [ctx.power(data.d[i]).zeta(P) for i in range(N)]
        pre = mpmath.mpf(1)
        crossed = False
        for i in range(N):
            root, cr = _dilog_root(ctx.power(data.d[i]), zetas[i] * theta[i], branch)
            pre *= root
            crossed |= cr
        cache: dict = {}
        total = FormalSeries(K, [mpmath.mpf(0)])
        for k in itertools.product(range(m), repeat=N):
            coeff = _k_summand(data0, ctx, theta, zetas, k)
            total = total + I_series(data, ctx, sol, k, K, P, cache) * coeff
        if crossed:
            warnings.warn("cyclic dilogarithm root taken across the principal cut", BranchWarning)
        return total * pre, crossed


def asymptotic_expansion(data: NahmData, alpha, K: int = 3, prec: int = 40,
                         sol: NahmSolution | None = None, branch: str = "log") -> AsymptoticExpansion:
    """Right-hand side m^(-N/2) chi(d, alpha) c(Q) G(Q, alpha) S(eps) of the radial formula.

    G and zeta^{Q(k)-bar} are evaluated for the c-free form and the exact phase
    e(alpha c) is applied separately, which equals the product of the two
    c-dependent phases whenever those are defined.
    """
    alpha = Fraction(alpha)
    ctx = RootOfUnityContext.from_alpha(alpha)
    m, N = ctx.m, data.N
    sol = sol or solve_nahm(data, prec)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BranchWarning)
        S, crossed = S_series(data, ctx, sol, K, prec, branch)
    with mp.workdps(prec + GUARD):
        chi = chi_factor(data.d, alpha, prec)
        cQ = c_of_Q(data, sol, ctx)
        data0 = data.replace(c=0)
        G = gauss_sum(data0, alpha, prec) * e(alpha * data.c % 1)
        pref = mpmath.mpf(m) ** (-mpmath.mpf(N) / 2) * chi * cQ * G
    if crossed:
        warnings.warn("cyclic dilogarithm root taken across the principal cut", BranchWarning)
    return AsymptoticExpansion(alpha, m, sol.Lambda, pref, S, chi, cQ, G, crossed)


# --- u and its Galois shadow --------------------------------------------------------

def compute_u(data: NahmData, ctx: RootOfUnityContext, sol: NahmSolution, branch: str = "log"):
    """(u, u_alt): u as displayed and the a_zeta(theta) form, on the same root branch."""
    m, N = ctx.m, data.N
    data0 = data.replace(c=0)
    with mp.workdps(sol.prec + GUARD):
        theta = [sol.z[i] ** (mpmath.mpf(1) / m) for i in range(N)]
        zetas = [ctx.power(data.d[i]).zeta(sol.prec) for i in range(N)]
        pre1 = mpmath.mpf(1)
        pre2 = mpmath.mpf(1)
        for i in range(N):
            ci = ctx.power(data.d[i])
            tb = theta[i] ** to_mpf(data.b[i] / data.d[i])
            r1, _ = _dilog_root(ci, zetas[i] * theta[i], branch)
            r2, _ = _dilog_root(ci, theta[i], branch)
            pre1 *= tb * (1 - sol.z[i]) ** (-mpmath.mpf(1) / m) * r1
            pre2 *= tb * r2
        s1 = mpmath.mpf(0)
        a_zeta = mpmath.mpf(0)
        for k in itertools.product(range(m), repeat=N):
            s1 += _k_summand(data0, ctx, theta, zetas, k)
            a_zeta += _a_summand(data0, ctx, theta, zetas, k)
        return pre1 * s1, pre2 * a_zeta


def _a_summand(data0, ctx, theta, zetas, k):
    N = data0.N
    term = _qbar_phase(data0, ctx, k)
    for i in range(N):
        x = sum((k[j] * data0.A[j][i] for j in range(N)), Fraction(0))
        term *= theta[i] ** to_mpf(x)
        poch = mpmath.mpf(1)
        y = theta[i]
        for _ in range(k[i] + 1):
            poch *= 1 - y
            y *= zetas[i]
        term /= poch
    return term


def u_power(data: NahmData, ctx: RootOfUnityContext, sol: NahmSolution, twist: Sequence[int] | None = None):
    """u^m, optionally after the Galois twist theta_i -> zeta_i^(e_i) theta_i.

    Fractional powers theta_i^x move to zeta_i^(e_i * (x mod m)) theta_i^x, which is
    the action of an automorphism fixing F_m on the Kummer generators.
    """
    m, N = ctx.m, data.N
    data0 = data.replace(c=0)
    e_vec = list(twist) if twist is not None else [0] * N
    with mp.workdps(sol.prec + GUARD):
        theta = [sol.z[i] ** (mpmath.mpf(1) / m) for i in range(N)]
        zetas = [ctx.power(data.d[i]).zeta(sol.prec) for i in range(N)]
        pre = mpmath.mpf(1)
        for i in range(N):
            ci = ctx.power(data.d[i])
            pre *= sol.z[i] ** to_mpf(data.b[i] / data.d[i]) / (1 - sol.z[i])
            x = zetas[i] ** (1 + e_vec[i]) * theta[i]
            D = mpmath.exp(log_cyclic_dilog(ci, x))
            pre /= D
        s = mpmath.mpf(0)
        for k in itertools.product(range(m), repeat=N):
            s += _k_summand(data0, ctx, theta, zetas, k, e_vec)
        return pre * s ** m


# --- comparison with the Nahm sum near the root of unity ----------------------------

@dataclass
class RadialReport:
    alpha: Fraction
    K: int
    sigma: int
    eps: list
    lhs: list
    rhs: list
    rel_errors: list
    phase_adjusted: bool
    branch_warning: bool
    orders: list
    abs_errors: list = field(default_factory=list)

    def as_json(self, digits=15) -> dict:
        return {"alpha": str(self.alpha), "K": self.K, "sigma": self.sigma,
                "eps": [mpmath.nstr(x, 10) for x in self.eps],
                "rel_errors": [mpmath.nstr(x, 5) for x in self.rel_errors],
                "abs_errors": [mpmath.nstr(x, 5) for x in self.abs_errors],
                "convergence_orders": [mpmath.nstr(x, 5) for x in self.orders],
                "phase_adjusted": self.phase_adjusted, "branch_warning": self.branch_warning}


def radial_value(data: NahmData, alpha, eps, Lambda, sigma: int = 1, prec: int = 30):
    """e^(-sigma Lambda/(m eps)) f~(alpha + i eps/(2 pi m)) with a certified tail."""
    alpha = Fraction(alpha)
    m = alpha.denominator
    with mp.workdps(prec + GUARD):
        eps = mpmath.mpmathify(eps)
        tau = to_mpf(alpha) + 1j * eps / (2 * mpmath.pi * m)
        # absolute tolerance relative to the expected size e^(Lambda/(m eps)) of f
        atol = mpmath.mpf(10) ** (-(prec + 5)) * mpmath.exp(mpmath.mpf(Lambda) / (m * eps))
        r = eval_numeric(data, tau=tau, prec=prec, atol=atol)
        return mpmath.exp(-sigma * Lambda / (m * eps)) * r.value


_SIGMA: list[int] = []


def calibrate_sign(prec: int = 30) -> int:
    """Sign sigma for which e^(-sigma Lambda/eps) f(e^-eps) tends to a finite nonzero limit.

    Calibrated once on the Rogers-Ramanujan data; +1 is the literal reading.
    """
    if _SIGMA:
        return _SIGMA[0]
    rr = NahmData.make([[2]])
    sol = solve_nahm(rr, prec)
    best = None
    for sigma in (1, -1):
        v1 = radial_value(rr, 0, mpmath.mpf(1) / 20, sol.Lambda, sigma, prec)
        v2 = radial_value(rr, 0, mpmath.mpf(1) / 40, sol.Lambda, sigma, prec)
        ratio = abs(mpmath.log(abs(v2 / v1)))
        if best is None or ratio < best[0]:
            best = (ratio, sigma)
    _SIGMA.append(best[1])
    return best[1]


def predict_radial(data: NahmData, alpha, eps_list: Sequence, K: int = 3, prec: int = 40,
                   sigma: int | None = None, branch: str = "log") -> RadialReport:
    """Compare the truncated expansion with numerically evaluated radial values.

    The relative error is expected to scale like eps^(K+1); ``orders`` holds the
    empirical exponents between consecutive eps values.  When the branch flag
    is set, the RHS may be corrected by the m-th root of unity nearest to the
    observed phase ratio.
    """
    alpha = Fraction(alpha)
    sigma = calibrate_sign() if sigma is None else sigma
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BranchWarning)
        exp_ = asymptotic_expansion(data, alpha, K, prec, branch=branch)
    lhs, rhs, errs, abs_errs = [], [], [], []
    adjusted = False
    eps_mp = [to_mpf(x) if isinstance(x, Fraction) else mpmath.mpmathify(x) for x in eps_list]
    with mp.workdps(prec + GUARD):
        tiny = mpmath.mpf(10) ** (-prec)
        for eps in eps_mp:
            L = radial_value(data, alpha, eps, exp_.Lambda, sigma, prec)
            R = exp_.value(eps)
            if exp_.branch_warning and exp_.m > 1 and abs(R) > tiny:
                k = int(mpmath.nint(mpmath.arg(L / R) * exp_.m / (2 * mpmath.pi))) % exp_.m
                if k:
                    R *= e(Fraction(k, exp_.m))
                    adjusted = True
            lhs.append(L)
            rhs.append(R)
            abs_errs.append(abs(L - R))
            # a vanishing constant term (u = 0) leaves only the absolute error meaningful
            errs.append(abs(L - R) / abs(R) if abs(R) > tiny else mpmath.inf)
        orders = []
        for i in range(1, len(errs)):
            e0, e1 = abs_errs[i - 1], abs_errs[i]
            ok = e0 > 0 and e1 > 0
            orders.append(mpmath.log(e1 / e0) / mpmath.log(eps_mp[i] / eps_mp[i - 1]) if ok else mpmath.inf)
    return RadialReport(alpha, K, sigma, eps_mp, lhs, rhs, errs, adjusted,
                        exp_.branch_warning, orders, abs_errs)


# --- the constant c from the vanishing of the eps-expansion --------------------------

@dataclass
class CEstimate:
    c_est: object
    s1: object
    shifted: list            # eps^0..eps^K coefficients of S after setting c = c_est

    def residual(self):
        return max((abs(x) for x in self.shifted[2:]), default=mpmath.mpf(0))


def determine_c(data: NahmData, K: int = 3, prec: int = 40, sol: NahmSolution | None = None) -> CEstimate:
    """The c making the eps^1 coefficient of S vanish at alpha = 0.

    At m = 1 the constant c enters only through exp(-c eps), so c_est is the
    eps^1 coefficient of S computed with c = 0; the eps^2, eps^3 coefficients
    after the shift must also vanish for a modular candidate.
    """
    data0 = data.replace(c=0)
    sol = sol or solve_nahm(data0, prec)
    ctx = RootOfUnityContext(1, 0)
    with mp.workdps(prec + GUARD):
        S, _ = S_series(data0, ctx, sol, K, prec)
        s0 = S.coefficient(0)
        s1 = mpmath.re(S.coefficient(1) / s0)
        shift = FormalSeries(K, [mpmath.mpf(0), mpmath.mpf(0), -s1]).exp()
        T = S * shift * (1 / s0)
        return CEstimate(s1, s1, [mpmath.re(x) if abs(mpmath.im(x)) < mpmath.mpf(10) ** -(prec // 2)
                                  else x for x in T.integer_coeffs()])
