"""Asymptotic expansions near roots of unity.

Near q = e(alpha) with alpha = a/m, f(e(alpha + i eps/(2 pi m))) behaves like
e^(Lambda/(m eps)) times a power series in eps.  We compare the truncated
series with the Nahm sum evaluated numerically, recover c from the vanishing
of the eps^1 term, and watch the error fall like eps^(K+1).
"""
from fractions import Fraction

from mpmath import nstr

from nahmsums.asymptotics import determine_c, predict_radial
from nahmsums.model import NahmData

rr = NahmData.make([[2]], [0], Fraction(-1, 60))

print("Radial limits of q^(-1/60) sum q^(n^2)/(q;q)_n, K = 2")
for alpha in (0, Fraction(1, 3), Fraction(1, 5)):
    rep = predict_radial(rr, alpha, [Fraction(1, 40), Fraction(1, 80)], 2, 40)
    print(f"  alpha = {alpha}: relative errors {[nstr(x, 3) for x in rep.rel_errors]}")

print("\nWith c = 0 the eps-series no longer collapses; the error order is K + 1:")
for K in (1, 2, 3):
    rep = predict_radial(rr.replace(c=0), 0, [Fraction(1, 30), Fraction(1, 60), Fraction(1, 120)], K, 40)
    print(f"  K = {K}: orders {[nstr(x, 4) for x in rep.orders]}")

print("\nThe shift c for which the eps^1 coefficient vanishes:")
for b in ((0, 0), (1, 3), (2, 3)):
    est = determine_c(NahmData.make([[2, 1], [3, 2]], b, 0, [1, 3]), 3, 40)
    print(f"  Kanade-Russell b = {b}: c = {nstr(est.c_est, 20)}, "
          f"next coefficients {[nstr(x, 3) for x in est.shifted[2:]]}")
