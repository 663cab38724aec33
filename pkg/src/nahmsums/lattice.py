"""Enumeration of the lattice points {n in N^N : Q(n) <= T}.

Per-coordinate bounds come from Schur complements of AD: for a fixed prefix
(n_1..n_j) the minimum of Q over real values of the remaining coordinates is
a quadratic in the prefix, which gives a tight interval for n_j.  Intervals
are computed in floating point and padded by one; the final membership test
is exact.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterator, Sequence

from .model import CongruenceConstraint, NahmData, inverse


class _Level:
    __slots__ = ("half_diag", "cross", "lin", "const_quad", "const_lin", "const")

    def __init__(self, S, ell, kappa, j):
        # Q_j(p) = 1/2 p^T S p + ell^T p + kappa, p = (n_1..n_j); viewed as a
        # quadratic in p_j with the earlier coordinates fixed.
        self.half_diag = float(S[j][j]) / 2
        self.cross = [float(S[j][k]) for k in range(j)]
        self.lin = float(ell[j])
        self.const_quad = [[float(S[a][b]) for b in range(j)] for a in range(j)]
        self.const_lin = [float(ell[a]) for a in range(j)]
        self.const = float(kappa)


def _schur_levels(data: NahmData) -> list[_Level]:
    N = data.N
    M = data.AD
    b = data.b
    levels = []
    for j in range(N):
        p = list(range(j + 1))
        y = list(range(j + 1, N))
        if y:
            Myy_inv = inverse([[M[r][s] for s in y] for r in y])
            Mpy = [[M[r][s] for s in y] for r in p]
            # S = Mpp - Mpy Myy^-1 Myp ; ell = b_p - Mpy Myy^-1 b_y ; kappa = c - 1/2 b_y^T Myy^-1 b_y
            W = [[sum((Mpy[r][k] * Myy_inv[k][s] for k in range(len(y))), Fraction(0))
                  for s in range(len(y))] for r in range(len(p))]
            S = [[M[p[r]][p[s]] - sum((W[r][k] * M[y[k]][p[s]] for k in range(len(y))), Fraction(0))
                  for s in range(len(p))] for r in range(len(p))]
            ell = [b[p[r]] - sum((W[r][k] * b[y[k]] for k in range(len(y))), Fraction(0))
                   for r in range(len(p))]
            by = [b[s] for s in y]
            kappa = data.c - sum((by[r] * Myy_inv[r][s] * by[s] for r in range(len(y))
                                  for s in range(len(y))), Fraction(0)) / 2
        else:
            S = [[M[r][s] for s in p] for r in p]
            ell = [b[r] for r in p]
            kappa = data.c
        levels.append(_Level(S, ell, kappa, j))
    return levels


def _interval(level: _Level, prefix: Sequence[int], T: float) -> tuple[float, float] | None:
    j = len(prefix)
    a = level.half_diag
    beta = level.lin + sum(level.cross[k] * prefix[k] for k in range(j))
    gamma = level.const - T
    for r in range(j):
        gamma += level.const_lin[r] * prefix[r]
        for s in range(j):
            gamma += level.const_quad[r][s] * prefix[r] * prefix[s] / 2
    disc = beta * beta - 4 * a * gamma
    if disc < 0:
        # padding absorbs rounding: allow a near-tangent interval
        if disc > -1e-9 * (1 + beta * beta + abs(4 * a * gamma)):
            disc = 0.0
        else:
            return None
    root = math.sqrt(disc)
    return (-beta - root) / (2 * a), (-beta + root) / (2 * a)


def coordinate_rules(N: int, constraints: Sequence[CongruenceConstraint],
                     lower: Sequence[int] | None):
    lows = list(lower) if lower is not None else [0] * N
    rules: list[list[CongruenceConstraint]] = [[] for _ in range(N)]
    for con in constraints:
        if con.index > N:
            raise ValueError(f"constraint index {con.index} exceeds rank {N}")
        rules[con.index - 1].append(con)
    return lows, rules


def runs(data: NahmData, T, constraints: Sequence[CongruenceConstraint] = (),
         lower: Sequence[int] | None = None) -> Iterator[tuple[tuple[int, ...], int, int]]:
    """Yield (prefix, lo, hi): every admissible n = prefix + (k,) with lo <= k <= hi
    satisfies the lower bounds; membership Q(n) <= T still has to be checked
    exactly by the caller (the interval is padded) together with congruences on
    the last coordinate.

    Prefixes already satisfy their congruence constraints.
    """
    N = data.N
    levels = _schur_levels(data)
    lows, rules = coordinate_rules(N, constraints, lower)
    Tf = float(T)

    def rec(prefix: list[int]):
        j = len(prefix)
        iv = _interval(levels[j], prefix, Tf)
        if iv is None:
            return
        lo = max(lows[j], math.floor(iv[0]) - 1)
        hi = math.ceil(iv[1]) + 1
        if hi < lo:
            return
        if j == N - 1:
            yield tuple(prefix), lo, hi
            return
        for k in range(lo, hi + 1):
            if all(con.admits_value(k) for con in rules[j]):
                prefix.append(k)
                yield from rec(prefix)
                prefix.pop()

    yield from rec([])


def points(data: NahmData, T, constraints: Sequence[CongruenceConstraint] = (),
           lower: Sequence[int] | None = None) -> Iterator[tuple[int, ...]]:
    """All admissible n with Q(n) <= T (exact test)."""
    from .model import quadratic_form
    T = Fraction(T)
    N = data.N
    _, rules = coordinate_rules(N, constraints, lower)
    for prefix, lo, hi in runs(data, T, constraints, lower):
        for k in range(lo, hi + 1):
            if all(con.admits_value(k) for con in rules[N - 1]):
                n = prefix + (k,)
                if quadratic_form(data, n) <= T:
                    yield n
