"""Exact data model for Nahm data Q = (A, b, c, d).

All entries are :class:`fractions.Fraction`; matrices are stored dense as
tuples of tuples.  Objects are immutable once validated.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (AsymmetricProduct, DimensionMismatch, NotPositiveDefinite,
                     SingularMatrix)

Rational = Fraction
Matrix = tuple[tuple[Fraction, ...], ...]


def as_fraction(x) -> Fraction:
    """Parse an int, Fraction or ``"p/q"`` string.  Floats are rejected."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def fraction_str(x: Fraction) -> str | int:
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def lcm_denominators(values: Iterable[Fraction]) -> int:
    return reduce(math.lcm, (Fraction(v).denominator for v in values), 1)


# --- small exact linear algebra -------------------------------------------------

def mat_mul(X: Sequence[Sequence[Fraction]], Y: Sequence[Sequence[Fraction]]) -> Matrix:
    return tuple(tuple(sum((X[i][k] * Y[k][j] for k in range(len(Y))), Fraction(0))
                       for j in range(len(Y[0]))) for i in range(len(X)))


def mat_vec(X: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> tuple[Fraction, ...]:
    return tuple(sum((X[i][k] * v[k] for k in range(len(v))), Fraction(0)) for i in range(len(X)))


def transpose(X: Sequence[Sequence[Fraction]]) -> Matrix:
    return tuple(zip(*X))


def det(X: Sequence[Sequence[Fraction]]) -> Fraction:
    M = [list(map(Fraction, row)) for row in X]
    n = len(M)
    out = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            out = -out
        out *= M[col][col]
        for r in range(col + 1, n):
            f = M[r][col] / M[col][col]
            if f:
                for j in range(col, n):
                    M[r][j] -= f * M[col][j]
    return out


def inverse(X: Sequence[Sequence[Fraction]]) -> Matrix:
    n = len(X)
    M = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(X)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            raise SingularMatrix("matrix is singular")
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [v / p for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return tuple(tuple(row[n:]) for row in M)


def leading_minors(X: Sequence[Sequence[Fraction]]) -> list[Fraction]:
    return [det([row[:k] for row in X[:k]]) for k in range(1, len(X) + 1)]


def is_positive_definite(X: Sequence[Sequence[Fraction]]) -> bool:
    """Sylvester's criterion in exact arithmetic (X assumed symmetric)."""
    return all(m > 0 for m in leading_minors(X))


# --- domain types -------------------------------------------------------------

@dataclass(frozen=True)
class CongruenceConstraint:
    """Restrict the summation to ``n_index = residue (mod modulus)``; index is 1-based."""
    index: int
    residue: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("modulus must be positive")
        if not 0 <= self.residue < self.modulus:
            raise ValueError("residue must lie in [0, modulus)")
        if self.index < 1:
            raise ValueError("constraint index is 1-based")

    def admits(self, n: Sequence[int]) -> bool:
        return self.admits_value(n[self.index - 1])

    def admits_value(self, k: int) -> bool:
        return k % self.modulus == self.residue


@dataclass(frozen=True)
class NahmData:
    """The quadruple (A, b, c, d).  Use :meth:`make` to build from loose input."""
    A: Matrix
    b: tuple[Fraction, ...]
    c: Fraction
    d: tuple[int, ...]
    _AD: Matrix = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        N = len(self.d)
        if len(self.A) != N or any(len(row) != N for row in self.A) or len(self.b) != N:
            raise DimensionMismatch("A must be N x N and b, d of length N")
        if any(int(x) != x or x <= 0 for x in self.d):
            raise ValueError("d must consist of positive integers")
        AD = tuple(tuple(self.A[i][j] * self.d[j] for j in range(N)) for i in range(N))
        object.__setattr__(self, "_AD", AD)

    @classmethod
    def make(cls, A, b=None, c=0, d=None) -> "NahmData":
        A = tuple(tuple(as_fraction(x) for x in row) for row in A)
        N = len(A)
        b = tuple(as_fraction(x) for x in (b if b is not None else [0] * N))
        d = tuple(int(x) for x in (d if d is not None else [1] * N))
        return cls(A, b, as_fraction(c), d)

    @property
    def N(self) -> int:
        return len(self.d)

    @property
    def AD(self) -> Matrix:
        return self._AD

    def replace(self, **kw) -> "NahmData":
        vals = dict(A=self.A, b=self.b, c=self.c, d=self.d)
        vals.update(kw)
        return NahmData.make(**vals)

    def to_json(self) -> dict:
        return {"A": [[fraction_str(x) for x in row] for row in self.A],
                "b": [fraction_str(x) for x in self.b],
                "c": fraction_str(self.c),
                "d": list(self.d)}

    def __str__(self):
        A = "[" + "; ".join(" ".join(str(x) for x in row) for row in self.A) + "]"
        return f"Q(A={A}, b=({', '.join(map(str, self.b))}), c={self.c}, d={self.d})"


def validate(data: NahmData) -> NahmData:
    """Return ``data`` unchanged if AD is symmetric positive definite."""
    AD = data.AD
    N = data.N
    for i in range(N):
        for j in range(i + 1, N):
            if AD[i][j] != AD[j][i]:
                raise AsymmetricProduct(f"(AD)[{i}][{j}] = {AD[i][j]} != {AD[j][i]}")
    minors = leading_minors(AD)
    if any(m <= 0 for m in minors):
        raise NotPositiveDefinite(f"leading principal minors of AD: {minors}")
    return data


def quadratic_form(data: NahmData, n: Sequence[int]) -> Fraction:
    """Q(n) = 1/2 n^T AD n + n^T b + c, exactly."""
    if len(n) != data.N:
        raise DimensionMismatch(f"expected a vector of length {data.N}, got {len(n)}")
    AD = data.AD
    N = data.N
    quad = sum((AD[i][j] * n[i] * n[j] for i in range(N) for j in range(N)), Fraction(0))
    return quad / 2 + sum((data.b[i] * n[i] for i in range(N)), Fraction(0)) + data.c


def _satisfies_strong(data: NahmData, delta: int) -> bool:
    AD = data.AD
    for i in range(data.N):
        if any((delta * x).denominator != 1 for x in AD[i]):
            return False
        if (Fraction(delta * delta, 2) * AD[i][i] + delta * data.b[i]).denominator != 1:
            return False
    return True


def strong_denominator(data: NahmData) -> int:
    """Smallest delta with Q(k + delta e_i) - Q(k) integral for every k and i."""
    bound = 2 * lcm_denominators([x for row in data.AD for x in row] + list(data.b))
    for delta in range(1, bound + 1):
        if _satisfies_strong(data, delta):
            return delta
    raise AssertionError("unreachable: 2*lcm of denominators always works")


def strong_denominator_strict(data: NahmData) -> int:
    """Smallest strong denominator delta for which delta*b_i/d_i and delta*A_ij/d_i are integers."""
    vals = [data.b[i] / data.d[i] for i in range(data.N)]
    vals += [data.A[i][j] / data.d[i] for i in range(data.N) for j in range(data.N)]
    step = lcm_denominators(vals)
    delta = step
    while not _satisfies_strong(data, delta):
        delta += step
    return delta


def exponent_denominator(data: NahmData, include_c: bool = False) -> int:
    """lcm of denominators of all Q(n) - Q(0) (and of c itself when requested).

    The differences Q(n) - c generate the group spanned by (AD)_ij and
    1/2 (AD)_ii + b_i, so this is exact rather than a bound.
    """
    AD = data.AD
    gens = [x for row in AD for x in row]
    gens += [AD[i][i] / 2 + data.b[i] for i in range(data.N)]
    if include_c:
        gens.append(data.c)
    return lcm_denominators(gens)


def dual_data(data: NahmData) -> NahmData:
    """(A^-1, A^-1 b, 1/2 b^T (AD)^-1 b - tr D / 24 - c, d)."""
    Ainv = inverse(data.A)
    ADinv = inverse(data.AD)
    b = data.b
    quad = sum((b[i] * ADinv[i][j] * b[j] for i in range(data.N) for j in range(data.N)),
               Fraction(0))
    c_star = quad / 2 - Fraction(sum(data.d), 24) - data.c
    return NahmData(Ainv, mat_vec(Ainv, b), c_star, data.d)


# --- JSON ---------------------------------------------------------------------

def constraints_from_json(items) -> tuple[CongruenceConstraint, ...]:
    return tuple(CongruenceConstraint(int(it["i"]), int(it["r"]), int(it["s"])) for it in items or ())


def constraints_to_json(constraints: Sequence[CongruenceConstraint]) -> list[dict]:
    return [{"i": c.index, "r": c.residue, "s": c.modulus} for c in constraints]


def nahm_from_json(obj: dict) -> tuple[NahmData, tuple[CongruenceConstraint, ...]]:
    """Parse the NahmData schema; returns the data and its optional constraints."""
    data = NahmData.make(obj["A"], obj.get("b"), obj.get("c", 0), obj.get("d"))
    return data, constraints_from_json(obj.get("constraints"))


def nahm_to_json(data: NahmData, constraints: Sequence[CongruenceConstraint] = ()) -> dict:
    out = data.to_json()
    if constraints:
        out["constraints"] = constraints_to_json(constraints)
    return out


def load_nahm(path: str | Path) -> tuple[NahmData, tuple[CongruenceConstraint, ...]]:
    with open(path) as fh:
        return nahm_from_json(json.load(fh))
