"""Special functions at arbitrary precision.

Precision is always an explicit ``prec`` argument (decimal digits); every
routine works internally with ``prec + GUARD`` digits via ``mp.workdps`` and
never mutates the global mpmath context.  ``prec=None`` means "the caller's
current ``mp.dps``".
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
from mpmath import mp

from .errors import Divergent, DomainError, NotCoprime, PoleAtOne
from .model import NahmData, exponent_denominator, quadratic_form, strong_denominator

GUARD = 10


def _dps(prec):
    return (mp.dps if prec is None else int(prec)) + GUARD


def e(x):
    """e(x) = exp(2 pi i x) for Fraction or mp input."""
    if isinstance(x, Fraction):
        x = mpmath.mpf(x.numerator) / x.denominator
    return mpmath.expjpi(2 * x)


def to_mpf(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpmathify(x)


# --- Bernoulli polynomials --------------------------------------------------------

@lru_cache(maxsize=None)
def bernoulli_number(n: int) -> Fraction:
    """B_n with the convention B_1 = -1/2 (generating function t/(e^t - 1))."""
    if n == 0:
        return Fraction(1)
    if n == 1:
        return Fraction(-1, 2)
    if n % 2:
        return Fraction(0)
    total = sum((math.comb(n + 1, k) * bernoulli_number(k) for k in range(n)), Fraction(0))
    return -total / (n + 1)


@lru_cache(maxsize=None)
def bernoulli_poly_coeffs(r: int) -> tuple[Fraction, ...]:
    """Coefficients c_j of B_r(x) = sum_j c_j x^j."""
    if r < 0:
        raise ValueError("degree must be nonnegative")
    return tuple(math.comb(r, j) * bernoulli_number(r - j) for j in range(r + 1))


def bernoulli_poly(r: int, x, prec=None):
    """B_r(x); exact for Fraction/int input, mpmath otherwise."""
    coeffs = bernoulli_poly_coeffs(r)
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        out = Fraction(0)
        for c in reversed(coeffs):
            out = out * x + c
        return out
    with mp.workdps(_dps(prec)):
        x = mpmath.mpmathify(x)
        out = mpmath.mpf(0)
        for c in reversed(coeffs):
            out = out * x + to_mpf(c)
        return +out


def bernoulli_shift_coeffs(r: int, u: Fraction, scale: Fraction) -> tuple[Fraction, ...]:
    """Coefficients of B_r(u + scale*nu) as a polynomial in nu (Appell property)."""
    return tuple(math.comb(r, j) * bernoulli_poly(r - j, u) * scale ** j for j in range(r + 1))


# --- polylogarithms ---------------------------------------------------------------

@lru_cache(maxsize=None)
def eulerian_row(n: int) -> tuple[int, ...]:
    """Eulerian numbers A(n, k), k = 0..n-1."""
    row = [1]
    for i in range(2, n + 1):
        new = [0] * i
        for k in range(i):
            a = (k + 1) * row[k] if k < len(row) else 0
            b = (i - k) * row[k - 1] if 0 < k <= len(row) else 0
            new[k] = a + b
        row = new
    return tuple(row)


def polylog_nonpositive(s: int, w, prec=None, tol=None):
    """Li_s(w) for s <= 0 as the exact rational function of w.

    Li_0(w) = w/(1-w) and Li_{-n}(w) = w * sum_k A(n,k) w^k / (1-w)^(n+1).
    """
    if s > 0:
        raise ValueError("order must be <= 0")
    with mp.workdps(_dps(prec)):
        w = mpmath.mpmathify(w)
        one_minus = 1 - w
        if tol is None:
            tol = mpmath.mpf(10) ** (-(mp.dps - GUARD) // 2)
        if abs(one_minus) < tol:
            raise PoleAtOne(f"Li_{s} has a pole at w = 1 (w = {w})")
        n = -s
        if n == 0:
            return w / one_minus
        num = mpmath.polyval(list(reversed(eulerian_row(n))), w)
        return w * num / one_minus ** (n + 1)


def dilog(w, prec=None):
    """Li_2(w) off the branch cut (1, inf).

    Bernoulli series in -log(1-w) on the left half of the unit disk,
    reflection w -> 1-w on the right half and inversion w -> 1/w outside.
    """
    with mp.workdps(_dps(prec)):
        w = mpmath.mpmathify(w)
        if w == 0:
            return mpmath.mpf(0)
        if w == 1:
            return mpmath.pi ** 2 / 6
        if mpmath.im(w) == 0 and mpmath.re(w) > 1:
            raise DomainError("Li_2 is evaluated off the cut (1, inf) only")
        if abs(w) > 1:
            return -mpmath.pi ** 2 / 6 - mpmath.log(-w) ** 2 / 2 - dilog(1 / w, mp.dps - GUARD)
        if mpmath.re(w) > 0.5:
            return (mpmath.pi ** 2 / 6 - mpmath.log(w) * mpmath.log(1 - w)
                    - _li2_series(1 - w))
        return _li2_series(w)


def _li2_series(w):
    """Bernoulli-number series in u = -log(1-w), valid for |u| < 2 pi."""
    u = -mpmath.log(1 - w)
    eps = mpmath.mpf(2) ** (-mp.prec - 4)
    total = u - u * u / 4
    u2 = u * u
    upow = u
    inv_fact = mpmath.mpf(1)
    n = 2
    while True:
        upow *= u2                      # u^(n+1)
        inv_fact /= n * (n + 1)         # 1/(n+1)!
        term = mpmath.bernoulli(n) * upow * inv_fact
        total += term
        if abs(term) <= eps * abs(total):
            return total
        n += 2


def rogers_L(z, prec=None):
    """L(z) = Li_2(z) + 1/2 log(z) log(1-z) - pi^2/6, for real 0 < z < 1."""
    with mp.workdps(_dps(prec)):
        z = mpmath.mpf(z)
        if not 0 < z < 1:
            raise DomainError("rogers_L needs 0 < z < 1")
        return dilog(z, mp.dps - GUARD) + mpmath.log(z) * mpmath.log(1 - z) / 2 - mpmath.pi ** 2 / 6


# --- Dedekind sums, characters and Gauss sums -------------------------------------

def saw(x) -> Fraction:
    """((x)) = x - floor(x) - 1/2 off the integers, 0 on them."""
    x = Fraction(x)
    if x.denominator == 1:
        return Fraction(0)
    return x - math.floor(x) - Fraction(1, 2)


def dedekind_sum(p: int, q: int) -> Fraction:
    """s(p, q) = sum_{r mod q} ((r/q)) ((p r/q))."""
    if q <= 0:
        raise ValueError("q must be positive")
    if math.gcd(p, q) != 1:
        raise NotCoprime(f"gcd({p}, {q}) != 1")
    return sum((saw(Fraction(r, q)) * saw(Fraction(p * r, q)) for r in range(1, q)), Fraction(0))


def chi_factor(d, alpha, prec=None):
    """prod_i e(s(p_i, q_i)/2) where p_i/q_i = alpha*d_i in lowest terms."""
    alpha = Fraction(alpha)
    with mp.workdps(_dps(prec)):
        total = Fraction(0)
        for di in d:
            x = alpha * di
            total += dedekind_sum(x.numerator, x.denominator) / 2
        return e(total)


def alpha_bar(data: NahmData, alpha, period: int | None = None) -> int:
    """Integer lift of alpha = a/m "modulo delta": a * m^-1 mod L.

    L is lcm(period, denominator of the values Q(k)); working modulo the
    exponent denominator is what makes e(alpha_bar Q(k)) well defined when
    Q(k) has a larger denominator than the strong denominator.
    """
    alpha = Fraction(alpha)
    a, m = alpha.numerator, alpha.denominator
    delta = period if period is not None else strong_denominator(data)
    L = math.lcm(delta, exponent_denominator(data, include_c=True))
    if math.gcd(m, L) != 1:
        raise NotCoprime(f"denominator {m} of alpha is not prime to {L}")
    return (a * pow(m, -1, L)) % L if L > 1 else 0


def gauss_sum(data: NahmData, alpha, prec=None, period: int | None = None):
    """G(Q, alpha) = delta^-N sum_{k mod delta} e(alpha_bar Q(k))."""
    import itertools
    delta = period if period is not None else strong_denominator(data)
    abar = alpha_bar(data, alpha, delta)
    with mp.workdps(_dps(prec)):
        total = mpmath.mpc(0)
        # sum by residue of alpha_bar*Q(k) mod 1 to keep this exact until the end
        counts: dict[Fraction, int] = {}
        for k in itertools.product(range(delta), repeat=data.N):
            v = (abar * quadratic_form(data, k)) % 1
            counts[v] = counts.get(v, 0) + 1
        for v, cnt in counts.items():
            total += cnt * e(v)
        return total / mpmath.mpf(delta) ** data.N


# --- roots of unity and the cyclic quantum dilogarithm ---------------------------

@dataclass(frozen=True)
class RootOfUnityContext:
    """zeta = e(a/m) with gcd(a, m) = 1."""
    m: int
    a: int = 1

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("order must be positive")
        if math.gcd(self.a, self.m) != 1:
            raise NotCoprime(f"gcd({self.a}, {self.m}) != 1")

    @classmethod
    def from_alpha(cls, alpha) -> "RootOfUnityContext":
        alpha = Fraction(alpha)
        return cls(alpha.denominator, alpha.numerator % alpha.denominator)

    @property
    def alpha(self) -> Fraction:
        return Fraction(self.a, self.m)

    def zeta(self, prec=None):
        with mp.workdps(_dps(prec)):
            return e(Fraction(self.a % self.m, self.m))

    def power(self, k: int) -> "RootOfUnityContext":
        """The context of zeta^k (must stay primitive)."""
        return RootOfUnityContext(self.m, (self.a * k) % self.m if self.m > 1 else 0)


def qpochhammer(x, q, n, prec=None):
    """(x; q)_n for a nonnegative integer n or n = mpmath.inf."""
    with mp.workdps(_dps(prec)):
        x = mpmath.mpmathify(x)
        q = mpmath.mpmathify(q)
        if n == mpmath.inf or n == math.inf:
            if abs(q) >= 1:
                raise Divergent("(x; q)_inf needs |q| < 1")
            eps = mpmath.mpf(10) ** (-mp.dps)
            out = mpmath.mpf(1)
            term = x
            while abs(term) >= eps:
                out *= 1 - term
                term *= q
            return out
        n = int(n)
        if n < 0:
            raise ValueError("negative length; use qpochhammer(x*q**n, q, -n) explicitly")
        out = mpmath.mpf(1)
        term = x
        for _ in range(n):
            out *= 1 - term
            term *= q
        return out


def cyclic_dilog(ctx: RootOfUnityContext, x, prec=None):
    """D_zeta(x) = prod_{t=1}^{m-1} (1 - zeta^t x)^t."""
    with mp.workdps(_dps(prec)):
        x = mpmath.mpmathify(x)
        zeta = ctx.zeta(mp.dps - GUARD)
        out = mpmath.mpf(1)
        zt = mpmath.mpf(1)
        for t in range(1, ctx.m):
            zt *= zeta
            out *= (1 - zt * x) ** t
        return out


# --- identities of the cyclic dilogarithm ----------------------------------------

def _inverse_mod(p: int, m: int) -> int:
    """The positive q < m with p q = 1 mod m (q = 1 when m = 1)."""
    if m == 1:
        return 1
    return pow(p, -1, m)


def shift_identity_sides(ctx: RootOfUnityContext, x, prec=None):
    """(D(zeta x) / D(x), (1 - x)^m / (1 - x^m))."""
    with mp.workdps(_dps(prec)):
        x = mpmath.mpmathify(x)
        zeta = ctx.zeta(mp.dps - GUARD)
        lhs = cyclic_dilog(ctx, zeta * x, mp.dps - GUARD) / cyclic_dilog(ctx, x, mp.dps - GUARD)
        rhs = (1 - x) ** ctx.m / (1 - x ** ctx.m)
        return lhs, rhs


def change_of_zeta_sides(m: int, p: int, x, prec=None):
    """Both sides of D_zeta(x)^p / D_{zeta^q}(x)
    = ((1 - x^m)^(p-1) prod_{t<p} 1/(x; zeta)_{floor(mt/p)+1})^m, zeta = e(1/m)."""
    if p < 1 or math.gcd(p, m) != 1:
        raise NotCoprime(f"need p > 0 coprime to {m}")
    q = _inverse_mod(p, m)
    ctx = RootOfUnityContext(m, 1)
    with mp.workdps(_dps(prec)):
        x = mpmath.mpmathify(x)
        zeta = ctx.zeta(mp.dps - GUARD)
        lhs = cyclic_dilog(ctx, x, mp.dps - GUARD) ** p / cyclic_dilog(ctx.power(q), x, mp.dps - GUARD)
        inner = (1 - x ** m) ** (p - 1)
        for t in range(1, p):
            inner /= qpochhammer(x, zeta, (m * t) // p + 1)
        return lhs, inner ** m


def change_of_zeta_quotient(m: int, p: int, x, prec=None):
    """D_zeta(x)^p / D_{zeta^q}(x) divided by (prod_{t<p} 1/(x; zeta)_{tq})^m.

    The two sides agree modulo m-th powers of (1 - x^m): the quotient equals
    (1 - x^m)^(m E) with E = p - 1 + sum_t floor(tq/m), so it vanishes to
    order at least m at every m-th root of unity when p > 1.
    """
    if p < 1 or math.gcd(p, m) != 1:
        raise NotCoprime(f"need p > 0 coprime to {m}")
    q = _inverse_mod(p, m)
    ctx = RootOfUnityContext(m, 1)
    with mp.workdps(_dps(prec)):
        x = mpmath.mpmathify(x)
        zeta = ctx.zeta(mp.dps - GUARD)
        lhs = cyclic_dilog(ctx, x, mp.dps - GUARD) ** p / cyclic_dilog(ctx.power(q), x, mp.dps - GUARD)
        rhs = mpmath.mpf(1)
        for t in range(1, p):
            rhs /= qpochhammer(x, zeta, t * q)
        return lhs / rhs ** m


def change_of_zeta_exponent(m: int, p: int) -> int:
    """E with change_of_zeta_quotient = (1 - x^m)^(m E)."""
    q = _inverse_mod(p, m)
    return p - 1 + sum((t * q) // m for t in range(1, p))


def vanishing_slope(m: int, p: int, x0, hs=(mpmath.mpf("1e-2"), mpmath.mpf("1e-3")), prec=None):
    """Log-log slope of |change_of_zeta_quotient| at x0 (1 + h) between two h."""
    with mp.workdps(_dps(prec)):
        x0 = mpmath.mpmathify(x0)
        h1, h2 = (mpmath.mpmathify(h) for h in hs)
        v1 = abs(change_of_zeta_quotient(m, p, x0 * (1 + h1), mp.dps - GUARD))
        v2 = abs(change_of_zeta_quotient(m, p, x0 * (1 + h2), mp.dps - GUARD))
        return mpmath.log(v1 / v2) / mpmath.log(h1 / h2)


def change_of_zeta3_sides(m: int, p: int, e_: int, x, prec=None):
    """The three expressions
    prod_{t<p} (x; zeta)_{tq} / (zeta^e x; zeta)_{tq},
    prod_{t<p} (x; zeta)_e / (zeta^{tq} x; zeta)_e  and
    (x; zeta)_e^p / (x; zeta^q)_{pe}, which coincide."""
    if p < 1 or math.gcd(p, m) != 1 or e_ < 0:
        raise NotCoprime(f"need p > 0 coprime to {m} and e >= 0")
    q = _inverse_mod(p, m)
    with mp.workdps(_dps(prec)):
        x = mpmath.mpmathify(x)
        zeta = e(Fraction(1, m))
        a = b = mpmath.mpf(1)
        for t in range(p):
            a *= qpochhammer(x, zeta, t * q) / qpochhammer(zeta ** e_ * x, zeta, t * q)
            b *= qpochhammer(x, zeta, e_) / qpochhammer(zeta ** (t * q) * x, zeta, e_)
        c = qpochhammer(x, zeta, e_) ** p / qpochhammer(x, zeta ** q, p * e_)
        return a, b, c
