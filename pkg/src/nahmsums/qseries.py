"""Exact truncated q-series and numerical evaluation of Nahm sums.

Exact expansions use numpy object arrays of Python integers/Fractions, so
coefficients never overflow.  Every Pochhammer update is a single O(L) pass:
dividing by (1 - q^s) is a strided cumulative sum.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import gmpy2
import mpmath
import numpy as np
from mpmath import mp

from . import lattice
from .errors import Divergent, InvalidFactor, PrecisionUnreachable
from .model import (CongruenceConstraint, NahmData, as_fraction, exponent_denominator,
                    fraction_str, is_positive_definite, lcm_denominators, nahm_from_json,
                    quadratic_form, validate)
from .specialfn import GUARD, qpochhammer, to_mpf

# --- the series type --------------------------------------------------------------


class QSeries:
    """sum_k coeffs[k] q^(offset + k/den), exact for exponents <= ``order``."""

    __slots__ = ("den", "offset", "coeffs")

    def __init__(self, den: int, offset, coeffs):
        if den < 1:
            raise ValueError("den must be positive")
        self.den = int(den)
        self.offset = Fraction(offset)
        self.coeffs = np.asarray(coeffs, dtype=object).copy()
        if (self.offset * self.den).denominator != 1:
            raise ValueError("offset must lie on the exponent grid (1/den)Z")

    @classmethod
    def truncated(cls, den: int, offset, order) -> "QSeries":
        """Zero series known up to ``order``."""
        L = math.floor((Fraction(order) - Fraction(offset)) * den) + 1
        return cls(den, offset, np.zeros(max(L, 0), dtype=object))

    @classmethod
    def one(cls, order, den: int = 1) -> "QSeries":
        s = cls.truncated(den, 0, order)
        if len(s.coeffs):
            s.coeffs[0] = 1
        return s

    @property
    def order(self) -> Fraction:
        """Largest exponent whose coefficient is known exactly."""
        return self.offset + Fraction(len(self.coeffs) - 1, self.den)

    def exponents(self):
        return [self.offset + Fraction(k, self.den) for k in range(len(self.coeffs))]

    def coefficient(self, x) -> Fraction | int:
        x = Fraction(x)
        if x > self.order:
            raise ValueError(f"q^{x} lies beyond the truncation order {self.order}")
        k = (x - self.offset) * self.den
        if k.denominator != 1 or k < 0:
            return 0
        return self.coeffs[int(k)]

    def nonzero(self) -> dict[Fraction, Fraction | int]:
        return {x: c for x, c in zip(self.exponents(), self.coeffs) if c != 0}

    def rescale(self, den: int) -> "QSeries":
        if den % self.den:
            raise ValueError("new granularity must be a multiple of the old one")
        f = den // self.den
        out = np.zeros((len(self.coeffs) - 1) * f + 1 if len(self.coeffs) else 0, dtype=object)
        out[::f] = self.coeffs
        return QSeries(den, self.offset, out)

    def truncate(self, order) -> "QSeries":
        L = math.floor((Fraction(order) - self.offset) * self.den) + 1
        return QSeries(self.den, self.offset, self.coeffs[:max(L, 0)])

    def shift(self, x) -> "QSeries":
        """Multiply by q^x."""
        x = Fraction(x)
        den = math.lcm(self.den, x.denominator, (self.offset + x).denominator)
        s = self.rescale(den) if den != self.den else self
        return QSeries(den, s.offset + x, s.coeffs)

    def _aligned(self, other: "QSeries"):
        den = math.lcm(self.den, other.den)
        a = self.rescale(den) if den != self.den else self
        b = other.rescale(den) if den != other.den else other
        if ((a.offset - b.offset) * den).denominator != 1:
            raise ValueError("series live on incompatible exponent grids")
        return a, b, den

    def __add__(self, other: "QSeries") -> "QSeries":
        a, b, den = self._aligned(other)
        order = min(a.order, b.order)
        lo = min(a.offset, b.offset)
        out = QSeries.truncated(den, lo, order)
        for s in (a, b):
            start = int((s.offset - lo) * den)
            n = max(0, min(len(s.coeffs), len(out.coeffs) - start))
            out.coeffs[start:start + n] += s.coeffs[:n]
        return out

    def __neg__(self):
        return QSeries(self.den, self.offset, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return QSeries(self.den, self.offset, self.coeffs * other)
        a, b, den = self._aligned(other)
        order = min(a.order + b.offset, b.order + a.offset)
        out = QSeries.truncated(den, a.offset + b.offset, order)
        L = len(out.coeffs)
        if L and len(a.coeffs) and len(b.coeffs):
            prod = np.convolve(a.coeffs[:L], b.coeffs[:L])
            out.coeffs[:] = prod[:L]
        return out

    __rmul__ = __mul__

    def evaluate(self, q=None, *, tau=None, prec=None):
        """Numeric value of the truncated polynomial at q = e(tau)."""
        with mp.workdps((prec or mp.dps) + GUARD):
            if tau is None:
                tau = mpmath.log(mpmath.mpmathify(q)) / (2j * mpmath.pi)
            total = 0
            for x, c in zip(self.exponents(), self.coeffs):
                if c:
                    total += to_mpf(Fraction(c)) * mpmath.exp(2j * mpmath.pi * tau * to_mpf(x))
            return total

    def __repr__(self):
        terms = [f"{c}*q^{x}" for x, c in list(self.nonzero().items())[:8]]
        return f"QSeries({' + '.join(terms) or '0'} + O(q^{self.order + Fraction(1, self.den)}))"


# --- O(L) Pochhammer primitives on coefficient arrays ------------------------------

def _mul_one_minus(arr: np.ndarray, s: int, sign: int = 1) -> np.ndarray:
    """arr * (1 - sign q^s) in grid units."""
    out = arr.copy()
    if s < len(arr):
        out[s:] -= sign * arr[:len(arr) - s]
    return out


def _div_one_minus(arr: np.ndarray, s: int, sign: int = 1) -> np.ndarray:
    """arr / (1 - sign q^s) in grid units, s >= 1."""
    L = len(arr)
    if s >= L:
        return arr.copy()
    rows = -(-L // s)
    buf = np.zeros(rows * s, dtype=object)
    buf[:L] = arr
    buf = buf.reshape(rows, s)
    if sign == 1:
        buf = np.cumsum(buf, axis=0)
    else:
        alt = np.array([(-1) ** r for r in range(rows)], dtype=object).reshape(rows, 1)
        buf = np.cumsum(buf * alt, axis=0) * alt
    return buf.reshape(-1)[:L]


# --- Nahm sums --------------------------------------------------------------------

def nahm_series(data: NahmData, constraints: Sequence[CongruenceConstraint] = (),
                order=20, lower: Sequence[int] | None = None) -> QSeries:
    """Exact expansion of the Nahm sum (optionally restricted) up to q^order."""
    validate(data)
    order = Fraction(order)
    den = exponent_denominator(data, include_c=True)
    pts = sorted(lattice.points(data, order, constraints, lower))
    if not pts:
        return QSeries.truncated(den, order + Fraction(1, den), order)
    Qs = {n: quadratic_form(data, n) for n in pts}
    offset = min(Qs.values())
    out = QSeries.truncated(den, offset, order)
    L = len(out.coeffs)
    # 1/(q^d;q^d)_n per coordinate, grown incrementally and cached
    cache: list[list[np.ndarray]] = []
    for i in range(data.N):
        base = np.zeros(L, dtype=object)
        base[0] = 1
        cache.append([base])

    def inv_poch(i: int, n: int) -> np.ndarray:
        lst = cache[i]
        while len(lst) <= n:
            k = len(lst)
            lst.append(_div_one_minus(lst[-1], data.d[i] * k * den))
        return lst[n]

    for n in pts:
        start = int((Qs[n] - offset) * den)
        length = L - start
        term = inv_poch(0, n[0])[:length]
        for i in range(1, data.N):
            term = np.convolve(term, inv_poch(i, n[i])[:length])[:length]
        out.coeffs[start:] += term
    return out


# --- product sides ----------------------------------------------------------------

@dataclass(frozen=True)
class ProductFactor:
    """(sign * q^a; q^M)_inf ** e."""
    sign: int
    a: Fraction
    M: Fraction
    e: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise InvalidFactor("sign must be +1 or -1")
        if self.M <= 0:
            raise InvalidFactor("step M must be positive")
        if self.e == 0:
            raise InvalidFactor("exponent e must be nonzero")
        if self.a < 0 or (self.a == 0 and self.sign == 1 and self.e < 0):
            raise InvalidFactor(f"factor ({'-' if self.sign < 0 else ''}q^{self.a}; q^{self.M}) "
                                f"does not define a formal power series")

    @classmethod
    def parse(cls, obj) -> "ProductFactor":
        if isinstance(obj, dict):
            return cls(int(obj.get("sign", 1)), as_fraction(obj["a"]), as_fraction(obj["M"]),
                       int(obj.get("e", 1)))
        sign, a, M, e = obj
        return cls(int(sign), as_fraction(a), as_fraction(M), int(e))

    def to_json(self) -> dict:
        return {"sign": self.sign, "a": fraction_str(self.a), "M": fraction_str(self.M), "e": self.e}


@dataclass(frozen=True)
class ProductSide:
    factors: tuple[ProductFactor, ...] = ()

    @classmethod
    def parse(cls, items) -> "ProductSide":
        return cls(tuple(ProductFactor.parse(it) for it in items))

    @classmethod
    def simple(cls, M, residues, e=-1, sign=1) -> "ProductSide":
        """prod_r (sign q^r; q^M)_inf^e for r in residues."""
        return cls(tuple(ProductFactor(sign, Fraction(r), Fraction(M), e) for r in residues))

    def __mul__(self, other: "ProductSide") -> "ProductSide":
        return ProductSide(self.factors + other.factors)


def product_series(p: ProductSide, order) -> QSeries:
    """Exact expansion of prod (sign q^a; q^M)_inf^e up to q^order."""
    order = Fraction(order)
    den = lcm_denominators([f.a for f in p.factors] + [f.M for f in p.factors])
    out = QSeries.one(order, den)
    arr = out.coeffs
    for f in p.factors:
        if f.a == 0:
            # the i = 0 factor (1 - sign) is a constant
            if f.sign == 1:
                arr = arr * 0
            else:
                arr = arr * (Fraction(2) ** f.e if f.e < 0 else 2 ** f.e)
            first = f.M
        else:
            first = f.a
        x = first
        while x <= order:
            s = int(x * den)
            for _ in range(abs(f.e)):
                arr = _mul_one_minus(arr, s, f.sign) if f.e > 0 else _div_one_minus(arr, s, f.sign)
            x += f.M
    return QSeries(den, 0, arr)


def product_numeric(p: ProductSide, q=None, *, tau=None, prec=30):
    with mp.workdps(prec + GUARD):
        if tau is None:
            tau = mpmath.log(mpmath.mpmathify(q)) / (2j * mpmath.pi)
        qq = mpmath.exp(2j * mpmath.pi * tau)
        if abs(qq) >= 1:
            raise Divergent("infinite products need |q| < 1")
        out = mpmath.mpf(1)
        for f in p.factors:
            x = f.sign * mpmath.exp(2j * mpmath.pi * tau * to_mpf(f.a))
            step = mpmath.exp(2j * mpmath.pi * tau * to_mpf(f.M))
            out *= qpochhammer(x, step, mpmath.inf, prec + GUARD) ** f.e
        return out


# --- single hypergeometric sums ---------------------------------------------------

@dataclass(frozen=True)
class SingleSum:
    """sum_{n >= start} q^(quad n^2 + lin n + const) / (q^base; q^base)_(mult n + shift)."""
    quad: Fraction
    lin: Fraction = Fraction(0)
    const: Fraction = Fraction(0)
    mult: int = 1
    shift: int = 0
    base: int = 1
    start: int = 0

    @classmethod
    def parse(cls, obj: dict) -> "SingleSum":
        return cls(as_fraction(obj["quad"]), as_fraction(obj.get("lin", 0)),
                   as_fraction(obj.get("const", 0)), int(obj.get("mult", 1)),
                   int(obj.get("shift", 0)), int(obj.get("base", 1)), int(obj.get("start", 0)))

    def exponent(self, n: int) -> Fraction:
        return self.quad * n * n + self.lin * n + self.const


def single_sum_series(s: SingleSum, order) -> QSeries:
    if s.quad <= 0:
        raise InvalidFactor("single sums need a positive quadratic coefficient")
    order = Fraction(order)
    den = lcm_denominators([s.quad, s.lin, s.const, s.quad + s.lin])
    ns = []
    n = s.start
    # exponent is eventually increasing; stop once past the vertex and above order
    vertex = -s.lin / (2 * s.quad)
    while n <= vertex or s.exponent(n) <= order:
        if s.exponent(n) <= order:
            ns.append(n)
        n += 1
    if not ns:
        return QSeries.truncated(den, order + Fraction(1, den), order)
    offset = min(s.exponent(n) for n in ns)
    out = QSeries.truncated(den, offset, order)
    L = len(out.coeffs)
    poch = np.zeros(L, dtype=object)
    poch[0] = 1
    j = 0
    for n in ns:
        target = s.mult * n + s.shift
        while j < target:
            j += 1
            poch = _div_one_minus(poch, s.base * j * den)
        start = int((s.exponent(n) - offset) * den)
        out.coeffs[start:] += poch[:L - start]
    return out


# --- identity verification ------------------------------------------------------

@dataclass
class IdentityReport:
    verified: bool
    order: Fraction
    mismatch: tuple[Fraction, object, object] | None = None
    name: str = ""

    def __str__(self):
        if self.verified:
            return f"{self.name + ': ' if self.name else ''}verified to q^{self.order}"
        x, l, r = self.mismatch
        return (f"{self.name + ': ' if self.name else ''}mismatch at q^{x}: "
                f"lhs {l} != rhs {r}")


def verify_identity(lhs: QSeries, rhs: QSeries, order=None, name: str = "") -> IdentityReport:
    """Exact coefficient comparison up to the common truncation order."""
    den = math.lcm(lhs.den, rhs.den)
    top = min(lhs.order, rhs.order)
    if order is not None:
        top = min(top, Fraction(order))
    lo = min(lhs.offset, rhs.offset)
    a = lhs.rescale(den) if den != lhs.den else lhs
    b = rhs.rescale(den) if den != rhs.den else rhs
    x = lo
    step = Fraction(1, den)
    while x <= top:
        ca, cb = a.coefficient(x), b.coefficient(x)
        if ca != cb:
            return IdentityReport(False, top, (x, ca, cb), name)
        x += step
    return IdentityReport(True, top, None, name)


@dataclass
class Side:
    kind: str                     # "nahm", "product" or "single"
    payload: object
    constraints: tuple[CongruenceConstraint, ...] = ()
    lower: tuple[int, ...] | None = None
    shift: Fraction = Fraction(0)

    @classmethod
    def parse(cls, obj: dict) -> "Side":
        shift = as_fraction(obj.get("shift", 0))
        if "nahm" in obj:
            data, cons = nahm_from_json(obj["nahm"])
            lower = obj["nahm"].get("lower")
            return cls("nahm", data, cons, tuple(lower) if lower else None, shift)
        if "product" in obj:
            return cls("product", ProductSide.parse(obj["product"]), shift=shift)
        if "single" in obj:
            return cls("single", SingleSum.parse(obj["single"]), shift=shift)
        raise ValueError(f"unknown identity side {sorted(obj)}")

    def series(self, order) -> QSeries:
        # expand far enough that the shifted series still reaches `order`
        inner = Fraction(order) - self.shift
        if self.kind == "nahm":
            s = nahm_series(self.payload, self.constraints, inner, self.lower)
        elif self.kind == "product":
            s = product_series(self.payload, inner)
        else:
            s = single_sum_series(self.payload, inner)
        return s.shift(self.shift) if self.shift else s


@dataclass
class Identity:
    name: str
    order: Fraction
    sides: list[Side] = field(default_factory=list)

    @classmethod
    def from_json(cls, obj: dict) -> "Identity":
        if "sides" in obj:
            sides = [Side.parse(s) for s in obj["sides"]]
        else:
            sides = [Side.parse({"nahm": obj["nahm"]}), Side.parse({"product": obj["product"]})]
        return cls(obj.get("name", ""), as_fraction(obj.get("order", 50)), sides)

    def verify(self, order=None) -> list[IdentityReport]:
        """Compare every side with the first one."""
        K = Fraction(order) if order is not None else self.order
        series = [s.series(K) for s in self.sides]
        return [verify_identity(series[0], s, K, f"{self.name} [side 1 = side {i + 2}]")
                for i, s in enumerate(series[1:])]


def load_identity(path: str | Path) -> Identity:
    with open(path) as fh:
        return Identity.from_json(json.load(fh))


def bundled_identities() -> list[Path]:
    root = Path(__file__).parent / "data" / "identities"
    return sorted(root.glob("*.json"))


# --- numerical evaluation ---------------------------------------------------------

@dataclass
class EvalResult:
    value: object                 # mpf or mpc
    truncation_bound: object      # rigorous bound on the omitted tail
    terms: int = 0
    dps: int = 0


def certified_lambda_min(M) -> Fraction:
    """A rational 0 < lam <= smallest eigenvalue of the symmetric PD matrix M."""
    ev = min(np.linalg.eigvalsh(np.array([[float(x) for x in row] for row in M])))
    lam = Fraction(max(ev, 1e-12) * (1 - 1e-6)).limit_denominator(10 ** 12)
    N = len(M)
    while True:
        shifted = [[M[i][j] - (lam if i == j else 0) for j in range(N)] for i in range(N)]
        if lam > 0 and is_positive_definite(shifted):
            return lam
        lam /= 2


def _gaussian_row_sum(r, theta, lam, beta):
    """Upper bound for sum_{k>=0} r^(theta (lam/2 k^2 + beta k)), beta <= 0."""
    lr = -mpmath.log(r) * theta          # > 0
    total = mpmath.mpf(0)
    k = 0
    vertex = -float(beta) / float(lam)
    while True:
        expo = lr * (to_mpf(lam) / 2 * k * k + to_mpf(beta) * k)
        term = mpmath.exp(-expo)
        total += term
        if k > vertex + 1:
            # consecutive ratio is decreasing beyond the vertex
            ratio = mpmath.exp(-lr * (to_mpf(lam) * (k + mpmath.mpf(1) / 2) + to_mpf(beta)))
            if ratio < 1 and term * ratio / (1 - ratio) < total * mpmath.mpf(10) ** -20:
                return total + term * ratio / (1 - ratio)
        k += 1


def _log_inv_poch(tau, d: int, nmax: int) -> list[float]:
    """log |1/(q^d; q^d)_n| for n = 0..nmax in double precision, q = e(tau)."""
    qd = cmath.exp(2j * math.pi * complex(tau) * d)
    out = [0.0]
    x = qd
    for _ in range(nmax):
        out.append(out[-1] - math.log(abs(1 - x)))
        x *= qd
    return out


def log_inv_poch_sup(tau, d: int) -> float:
    """Upper bound for log sup_n |1/(q^d; q^d)_n|.

    Exact maximum over n <= J, times prod_{j > J} 1/(1 - |q|^(dj)) for the rest;
    J is chosen so that |q|^(dJ) < e^-50.  A small margin absorbs rounding.
    """
    lr = 2 * math.pi * float(mpmath.im(tau)) * d
    J = int(50 / lr) + 2
    logs = _log_inv_poch(tau, d, J)
    rJ = math.exp(-lr * (J + 1))
    tail = rJ / ((1 - rJ) * -math.expm1(-lr))
    return max(max(logs), logs[-1]) + 2 * tail + 1e-6 * (1 + abs(max(logs)))


def tail_parameters(data: NahmData, tau, atol, theta=0.25):
    """Cutoff T with sum_{Q(n) > T} |term| < atol, and the resulting bound.

    |q^Q(n) / prod (q^d;q^d)_n| <= P r^Q(n) with r = |q| and P the product of
    the sup bounds from :func:`log_inv_poch_sup`.  For Q(n) > T we split
    r^Q <= r^((1-theta) T) r^(theta Q); the remaining full-lattice sum factorizes
    through Q(n) - c >= sum_i lam/2 n_i^2 + min(b_i,0) n_i with lam a certified
    lower bound for the spectrum of AD.
    """
    with mp.workdps(30):
        tau = mpmath.mpmathify(tau)
        r = mpmath.exp(-2 * mpmath.pi * mpmath.im(tau))
        lam = certified_lambda_min(data.AD)
        logP = mpmath.mpf(sum(log_inv_poch_sup(tau, di) for di in data.d))
        logS = sum(mpmath.log(_gaussian_row_sum(r, theta, lam, min(bi, Fraction(0))))
                   for bi in data.b)
        logB = logP + logS + theta * to_mpf(data.c) * mpmath.log(r) + mpmath.mpf("1e-6")
        lr = -mpmath.log(r)
        T = (logB - mpmath.log(atol)) / ((1 - theta) * lr)
        T = max(T, to_mpf(data.c))
        Tq = Fraction(int(mpmath.ceil(T)))
        bound = mpmath.exp(logB - (1 - theta) * to_mpf(Tq) * lr)
        return Tq, bound


def _resolve_tau(q, tau):
    if tau is not None:
        return mpmath.mpmathify(tau)
    q = mpmath.mpmathify(q)
    return mpmath.log(q) / (2j * mpmath.pi)


def eval_numeric(data: NahmData, constraints: Sequence[CongruenceConstraint] = (), q=None, *,
                 tau=None, prec: int = 30, atol=None, lower: Sequence[int] | None = None,
                 max_terms: int = 20_000_000, theta: float = 0.25) -> EvalResult:
    """f_Q at q = e(tau) with a rigorous bound on the truncated tail.

    q^x means exp(2 pi i tau x); pass ``tau`` directly for points where the
    principal logarithm of q is not the intended branch.  The tail bound is
    absolute: below ``atol`` (default 10^-prec).
    """
    validate(data)
    if q is not None and tau is None and mpmath.mpmathify(q) == 0:
        return _eval_at_zero(data, constraints, lower)
    with mp.workdps(40):
        tau0 = _resolve_tau(q, tau)
        if mpmath.im(tau0) <= 0:
            raise Divergent("need Im tau > 0, i.e. |q| < 1")
        r = mpmath.exp(-2 * mpmath.pi * mpmath.im(tau0))
        atol_mp = mpmath.mpf(10) ** (-prec) if atol is None else mpmath.mpf(atol)
        T, bound = tail_parameters(data, tau0, atol_mp, theta)
    N = data.N
    _, rules = lattice.coordinate_rules(N, constraints, lower)
    AD = data.AD
    # pass 1: exact membership, collect runs, float magnitude estimate
    runs = []
    count = 0
    maxlog = -math.inf
    lr = float(-mpmath.log(r))
    logpoch = [[0.0] for _ in range(N)]

    def lp(i, n):
        tab = logpoch[i]
        if len(tab) <= n:
            logpoch[i] = tab = _log_inv_poch(tau0, data.d[i], max(n, 2 * len(tab)))
        return tab[n]

    # the form scaled by S is integral, which keeps this pass off Fractions
    S = 2 * exponent_denominator(data, include_c=True)
    ADs = [[int(x * S) for x in row] for row in AD]
    bs = [int(x * S) for x in data.b]
    cs = int(data.c * S)
    Ts = math.floor(T * S)

    def q_scaled(n):
        quad = sum(ADs[i][j] * n[i] * n[j] for i in range(N) for j in range(N))
        return quad // 2 + sum(bs[i] * n[i] for i in range(N)) + cs

    for prefix, lo, hi in lattice.runs(data, T, constraints, lower):
        Q = Qlo = q_scaled(prefix + (lo,))
        gS = ADs[N - 1][N - 1] // 2 + bs[N - 1] + sum(ADs[N - 1][j] * prefix[j] for j in range(N - 1))
        stepS = ADs[N - 1][N - 1]
        k = lo
        first = last = None
        Qfirst = None
        while k <= hi:
            if Q <= Ts:
                if first is None:
                    first, Qfirst = k, Q
                last = k
            elif first is not None:
                break
            Q += gS + stepS * k
            k += 1
        if first is None:
            continue
        base_log = sum(lp(j, prefix[j]) for j in range(N - 1))
        # convex in k: the largest term of the run sits at one of its ends or
        # near the real maximiser; sample the ends and the midpoint for the estimate
        for kk in {first, last, (first + last) // 2}:
            Qk = (Qlo + gS * (kk - lo) + stepS * (kk * (kk - 1) - lo * (lo - 1)) // 2) / S
            maxlog = max(maxlog, -lr * Qk + base_log + lp(N - 1, kk))
        Qfirst, g, step = Fraction(Qfirst, S), Fraction(gS, S), Fraction(stepS, S)
        runs.append((prefix, first, last, Qfirst, g, step))
        count += last - first + 1
        if count > max_terms:
            raise PrecisionUnreachable(f"more than {max_terms} lattice points needed")
    log10_max = maxlog / math.log(10) if runs else 0.0
    dps = int(-mpmath.log10(atol_mp) + max(log10_max, 0) + math.log10(count + 1)) + GUARD + 5
    with mp.workdps(dps):
        tau = _resolve_tau(q, tau)
        real = mpmath.re(tau) == 0
        two_pi_i_tau = 2j * mpmath.pi * tau
        if real:
            two_pi_i_tau = -2 * mpmath.pi * mpmath.im(tau)

        def qpow(x: Fraction):
            return mpmath.exp(two_pi_i_tau * to_mpf(x))

        maxn = [0] * N
        for prefix, first, last, *_ in runs:
            for j in range(N - 1):
                maxn[j] = max(maxn[j], prefix[j])
            maxn[N - 1] = max(maxn[N - 1], last)
        inv = []
        for i in range(N):
            qd = qpow(Fraction(data.d[i]))
            tab = [mpmath.mpf(1)]
            x = qd
            for _ in range(maxn[i]):
                tab.append(tab[-1] / (1 - x))
                x *= qd
            inv.append(tab)
        last_rules = rules[N - 1]
        if real:
            # all terms are real: accumulate in gmpy2 at the same binary precision
            with gmpy2.context(gmpy2.get_context(), precision=mp.prec):
                inv_g = [[_to_gmpy(v) for v in tab] for tab in inv]
                # every exponent lies in (1/S)Z, so q^x is an exact integer power
                base = _to_gmpy(qpow(Fraction(1, S)))
                total = _accumulate(runs, inv_g, last_rules, N,
                                    lambda x: base ** int(x * S), gmpy2.mpfr(1), gmpy2.mpfr(0))
                total = mpmath.mpf(tuple(int(v) for v in total.as_mantissa_exp()))
        else:
            total = _accumulate(runs, inv, last_rules, N, qpow, mpmath.mpf(1), mpmath.mpf(0))
        return EvalResult(+total, bound, count, dps)


def _to_gmpy(x):
    sign, man, exp, _ = x._mpf_
    v = gmpy2.mul_2exp(gmpy2.mpfr(man), exp)
    return -v if sign else v


def _accumulate(runs, inv, last_rules, N, qpow, one, zero):
    """sum over runs of prod_j inv[j][n_j] q^Q(n), with q^Q advanced by ratios."""
    total = zero
    for prefix, first, last, Qfirst, g, step in runs:
        pre = one
        for j in range(N - 1):
            pre *= inv[j][prefix[j]]
        qQ = qpow(Qfirst)
        ratio = qpow(g + step * first)
        rstep = qpow(step)
        run = zero
        tab = inv[N - 1]
        for k in range(first, last + 1):
            if not last_rules or all(con.admits_value(k) for con in last_rules):
                run += qQ * tab[k]
            qQ *= ratio
            ratio *= rstep
        total += pre * run
    return total


def _eval_at_zero(data, constraints, lower):
    from .lattice import points
    if any(True for _ in points(data, Fraction(-1, 10 ** 9), constraints, lower)):
        raise Divergent("negative exponents: f_Q has a pole at q = 0")
    value = sum(1 for n in points(data, 0, constraints, lower) if quadratic_form(data, n) == 0)
    return EvalResult(mpmath.mpf(value), mpmath.mpf(0), value, mp.dps)


def single_sum_numeric(s: SingleSum, q=None, *, tau=None, prec=30):
    """Direct summation until terms drop below 10^-(prec + GUARD) of the partial sum."""
    with mp.workdps(prec + GUARD):
        tau = _resolve_tau(q, tau)
        two_pi_i_tau = 2j * mpmath.pi * tau
        qb = mpmath.exp(two_pi_i_tau * s.base)
        total = 0
        poch = mpmath.mpf(1)
        j = 0
        n = s.start
        eps = mpmath.mpf(10) ** (-(prec + GUARD))
        while True:
            target = s.mult * n + s.shift
            while j < target:
                j += 1
                poch /= 1 - qb ** j
            term = mpmath.exp(two_pi_i_tau * to_mpf(s.exponent(n))) * poch
            total += term
            if n > -s.lin / (2 * s.quad) + 2 and abs(term) < eps * max(abs(total), 1):
                return total
            n += 1
