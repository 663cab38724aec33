from fractions import Fraction

import mpmath
import pytest
from mpmath import mp

from nahmsums.asymptotics import (FormalSeries, I_series, S_series, asymptotic_expansion,
                                  compute_u, determine_c, predict_radial, tilde_A, u_power)
from nahmsums.errors import NotCoprime
from nahmsums.model import NahmData
from nahmsums.solver import solve_nahm
from nahmsums.specialfn import RootOfUnityContext

RR = NahmData.make([[2]], [0], Fraction(-1, 60))
RR0 = NahmData.make([[2]])
KR = NahmData.make([[2, 1], [3, 2]], [0, 0], Fraction(-1, 18), [1, 3])
# RR radial limit e^(-Lambda/eps) f(e^-eps) -> a0 (1 - eps/60 + ...), tools/oracles.py
RR_A0 = "0.85065080835203993217"


def test_formal_series_exp_log():
    s = FormalSeries(3, [0, 0, mpmath.mpf(2)])
    ex = s.exp()
    assert abs(ex.c[4] - 2) < 1e-30
    assert abs(ex.c[6] - mpmath.mpf(4) / 3) < 1e-30


def test_tilde_A_rr():
    sol = solve_nahm(RR0, 40)
    with mp.workdps(40):
        assert abs(tilde_A(RR0, sol)[0, 0] - (5 + mpmath.sqrt(5)) / 2) < mpmath.mpf(10) ** -35


def test_alpha_zero_leading_term_and_eps_coefficient():
    exp_ = asymptotic_expansion(RR0, 0, 3, 40)
    with mp.workdps(40):
        assert abs(exp_.prefactor * exp_.S.c[0] - mpmath.mpf(RR_A0)) < mpmath.mpf(10) ** -19
        assert abs(exp_.S.c[2] / exp_.S.c[0] + mpmath.mpf(1) / 60) < mpmath.mpf(10) ** -30


def test_determine_c_rr():
    est = determine_c(RR0, 3, 40)
    with mp.workdps(40):
        assert abs(est.c_est + mpmath.mpf(1) / 60) < mpmath.mpf(10) ** -20
        assert max(abs(x) for x in est.shifted[2:]) < mpmath.mpf(10) ** -10


@pytest.mark.parametrize("b,c", [((0, 0), Fraction(-1, 18)), ((1, 3), Fraction(5, 18)),
                                 ((2, 3), Fraction(11, 18))])
def test_determine_c_kr(b, c):
    est = determine_c(NahmData.make([[2, 1], [3, 2]], b, 0, [1, 3]), 3, 40)
    with mp.workdps(40):
        assert abs(est.c_est - mpmath.mpf(c.numerator) / c.denominator) < mpmath.mpf(10) ** -15


def test_non_modular_b_leaves_eps2_term():
    est = determine_c(NahmData.make([[2, 1], [3, 2]], [1, 2], 0, [1, 3]), 3, 40)
    assert abs(est.shifted[2]) > 1e-3


def test_radial_rr_alpha_zero():
    rep = predict_radial(RR, 0, [Fraction(1, 60)], 3, 40)
    assert rep.rel_errors[0] < 1e-8


def test_truncation_order_when_c_is_off():
    rep = predict_radial(RR0, 0, [Fraction(1, 30), Fraction(1, 60), Fraction(1, 120)], 2, 40)
    for order in rep.orders:
        assert abs(order - 3) < 0.3


@pytest.mark.parametrize("data,alpha", [(RR, Fraction(1, 3)), (RR, Fraction(1, 5)), (KR, Fraction(1, 5))])
def test_radial_roots_of_unity(data, alpha):
    rep = predict_radial(data, alpha, [Fraction(1, 80)], 2, 40)
    assert rep.rel_errors[0] < 1e-6


def test_rr_alpha_third_constant_nonzero():
    exp_ = asymptotic_expansion(RR, Fraction(1, 3), 2, 30)
    assert abs(exp_.S.c[0]) > 1e-5


def test_half_integer_coefficients_vanish():
    sol = solve_nahm(KR, 30)
    ctx = RootOfUnityContext(5, 1)
    I = I_series(KR, ctx, sol, [2, 3], 3, 30)
    assert max(abs(I.c[h]) for h in (1, 3, 5)) < mpmath.mpf(10) ** -20


def test_S_at_m1_is_I0():
    sol = solve_nahm(KR, 30)
    ctx = RootOfUnityContext(1, 0)
    S, _ = S_series(KR, ctx, sol, 3, 30)
    I = I_series(KR, ctx, sol, [0, 0], 3, 30)
    assert max(abs(a - b) for a, b in zip(S.c, I.c)) < mpmath.mpf(10) ** -20


@pytest.mark.parametrize("m", [3, 7, 11])
def test_u_two_forms(m):
    sol = solve_nahm(RR0, 40)
    u, u_alt = compute_u(RR0, RootOfUnityContext(m, 1), sol)
    assert abs(u - u_alt) < mpmath.mpf(10) ** -25 * abs(u)


def test_u_power_galois_invariance():
    sol = solve_nahm(RR0, 40)
    ctx = RootOfUnityContext(5, 1)
    base = u_power(RR0, ctx, sol)
    for e_ in range(1, 5):
        assert abs(u_power(RR0, ctx, sol, [e_]) - base) < mpmath.mpf(10) ** -25 * abs(base)


def test_coprimality_enforced():
    # Q(k) = k^2/2 has denominator 2, so m = 2 is excluded
    with pytest.raises(NotCoprime):
        asymptotic_expansion(NahmData.make([[1]]), Fraction(1, 2), 2, 30)
