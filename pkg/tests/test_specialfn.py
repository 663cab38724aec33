import math
import random
from fractions import Fraction

import mpmath
import pytest
from mpmath import mp

from nahmsums.errors import NotCoprime
from nahmsums.model import NahmData
from nahmsums.specialfn import (RootOfUnityContext, bernoulli_number, bernoulli_poly,
                                change_of_zeta3_sides, change_of_zeta_exponent,
                                change_of_zeta_quotient, change_of_zeta_sides, chi_factor,
                                cyclic_dilog, dedekind_sum, dilog, e, gauss_sum,
                                polylog_nonpositive, qpochhammer, rogers_L, saw,
                                shift_identity_sides, vanishing_slope)

# oracle values from tools/oracles.py
LI2_HALF = "0.58224052646501250590265632015968010874419847480613"
QQ_INF_HALF = "0.28878809508660242128"


def test_bernoulli_values():
    assert bernoulli_number(1) == Fraction(-1, 2)
    assert bernoulli_poly(2, Fraction(0)) == Fraction(1, 6)
    assert bernoulli_poly(3, Fraction(1, 2)) == 0


@pytest.mark.parametrize("r", range(13))
def test_bernoulli_symmetry(r):
    for x in (Fraction(1, 3), Fraction(-7, 5), Fraction(11, 4)):
        assert bernoulli_poly(r, 1 - x) == (-1) ** r * bernoulli_poly(r, x)


def test_polylog_nonpositive():
    assert polylog_nonpositive(-1, Fraction(1, 2)) == 2
    with mp.workdps(30):
        assert abs(polylog_nonpositive(0, mpmath.mpf("0.3")) - mpmath.mpf(3) / 7) < 1e-28


def test_dilog_values():
    with mp.workdps(50):
        assert abs(dilog(mpmath.mpf(1) / 2, 50) - mpmath.mpf(LI2_HALF)) < mpmath.mpf(10) ** -48
        assert abs(dilog(1, 50) - mpmath.pi ** 2 / 6) < mpmath.mpf(10) ** -48
        for w in (mpmath.mpf("-3.5"), mpmath.mpf("0.97"), mpmath.mpc("0.4", "0.8")):
            assert abs(dilog(w, 50) - mpmath.polylog(2, w)) < mpmath.mpf(10) ** -45


def test_rogers_L_golden():
    with mp.workdps(50):
        z = (mpmath.sqrt(5) - 1) / 2
        assert abs(rogers_L(z, 50) + mpmath.pi ** 2 / 15) < mpmath.mpf(10) ** -45


def test_saw_and_dedekind():
    assert saw(Fraction(1, 5)) == Fraction(-3, 10)
    assert saw(Fraction(3)) == 0
    assert dedekind_sum(2, 5) == 0
    for m in range(1, 51):
        assert dedekind_sum(1, m) == Fraction((m - 1) * (m - 2), 12 * m)


def test_dedekind_reciprocity():
    for p in range(1, 41):
        for q in range(1, 41):
            if math.gcd(p, q) == 1:
                lhs = dedekind_sum(p, q) + dedekind_sum(q, p)
                assert lhs == Fraction(-1, 4) + (Fraction(p, q) + Fraction(q, p) + Fraction(1, p * q)) / 12


def test_dedekind_requires_coprime():
    with pytest.raises(NotCoprime):
        dedekind_sum(2, 4)


def test_chi_and_gauss():
    with mp.workdps(30):
        assert abs(chi_factor((1,), Fraction(1, 5), 30) - e(Fraction(1, 10))) < 1e-25
        data = NahmData.make([[1]])
        assert abs(gauss_sum(data, Fraction(1, 3), 30)) < 1e-25
        assert abs(gauss_sum(data, 0, 30) - 1) < 1e-25


def test_qpochhammer_infinite():
    with mp.workdps(30):
        assert abs(qpochhammer(mpmath.mpf(1) / 2, mpmath.mpf(1) / 2, mpmath.inf) - mpmath.mpf(QQ_INF_HALF)) < 1e-19


def test_cyclic_dilog_trivial_cases():
    with mp.workdps(30):
        assert cyclic_dilog(RootOfUnityContext(1), mpmath.mpf("0.4")) == 1
        # m = 2: (1 + x)
        assert abs(cyclic_dilog(RootOfUnityContext(2, 1), mpmath.mpf("0.4")) - mpmath.mpf("1.4")) < 1e-25


def _rand_x(rng):
    r = 0.9 * math.sqrt(rng.random())
    a = 2 * math.pi * rng.random()
    return mpmath.mpc(r * math.cos(a), r * math.sin(a))


def test_shift_identity():
    rng = random.Random(1)
    with mp.workdps(50):
        for m in range(1, 14):
            lhs, rhs = shift_identity_sides(RootOfUnityContext(m, 1), _rand_x(rng), 50)
            assert abs(lhs / rhs - 1) < mpmath.mpf(10) ** -40


def test_change_of_zeta_exact():
    rng = random.Random(2)
    with mp.workdps(50):
        for m in range(1, 14):
            for p in range(1, 8):
                if math.gcd(p, m) == 1:
                    lhs, rhs = change_of_zeta_sides(m, p, _rand_x(rng), 50)
                    assert abs(lhs / rhs - 1) < mpmath.mpf(10) ** -40


def test_change_of_zeta_quotient_is_power():
    with mp.workdps(50):
        x = mpmath.mpc("0.3", "0.1")
        for m, p in ((5, 2), (7, 3), (9, 4)):
            E = change_of_zeta_exponent(m, p)
            val = change_of_zeta_quotient(m, p, x, 50)
            assert abs(val / (1 - x ** m) ** (m * E) - 1) < mpmath.mpf(10) ** -40


def test_vanishing_slope_at_roots():
    with mp.workdps(50):
        for m, p in ((5, 2), (7, 3), (13, 2)):
            for s in range(m):
                x0 = mpmath.expjpi(mpmath.mpf(2 * s) / m)
                assert vanishing_slope(m, p, x0, prec=50) >= m - 0.2


def test_change_of_zeta3():
    rng = random.Random(3)
    with mp.workdps(50):
        for m, p, e_ in ((5, 2, 1), (5, 3, 2), (7, 4, 3), (6, 5, 0)):
            a, b, c = change_of_zeta3_sides(m, p, e_, _rand_x(rng), 50)
            assert abs(a / c - 1) < mpmath.mpf(10) ** -40
            assert abs(b / c - 1) < mpmath.mpf(10) ** -40


def test_root_context():
    ctx = RootOfUnityContext.from_alpha(Fraction(2, 5))
    assert (ctx.m, ctx.a) == (5, 2)
    with pytest.raises(NotCoprime):
        RootOfUnityContext(6, 2)
    with mp.workdps(30):
        assert abs(ctx.zeta(30) ** 5 - 1) < 1e-25
