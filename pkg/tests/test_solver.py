from fractions import Fraction

import mpmath
import pytest
from mpmath import mp

from nahmsums.errors import NotPositiveDefinite
from nahmsums.model import NahmData, dual_data
from nahmsums.solver import detect_rational, nahm_residual, solve_nahm

RR = NahmData.make([[2]])
KR = NahmData.make([[2, 1], [3, 2]], [0, 0], 0, [1, 3])
# oracle values from tools/oracles.py
GOLDEN = "0.618033988749894848204586834366"
KR_Z = ("0.652703644666139302296566746461", "0.815207469095904627298647952428")


def test_rr_solution():
    sol = solve_nahm(RR, 60)
    with mp.workdps(60):
        assert abs(sol.z[0] - mpmath.mpf(GOLDEN)) < mpmath.mpf(10) ** -29
        assert abs(sol.Lambda - mpmath.pi ** 2 / 15) < mpmath.mpf(10) ** -55
        assert abs(sol.lam - mpmath.mpf(1) / 60) < mpmath.mpf(10) ** -40
        assert sol.residual < mpmath.mpf(10) ** -55


def test_kr_solution():
    sol = solve_nahm(KR, 60)
    with mp.workdps(60):
        for z, ref in zip(sol.z, KR_Z):
            assert abs(z - mpmath.mpf(ref)) < mpmath.mpf(10) ** -29
        assert abs(sol.lam - mpmath.mpf(1) / 54) < mpmath.mpf(10) ** -40


def test_kr_residual_at_high_precision():
    sol = solve_nahm(KR, 100)
    with mp.workdps(100):
        assert nahm_residual(KR, sol.z) < mpmath.mpf(10) ** -90


def test_lambda_of_A_one():
    # z = 1/2 and L(1/2) = -pi^2/12
    sol = solve_nahm(NahmData.make([[1]]), 40)
    with mp.workdps(40):
        assert detect_rational(sol.lam, 1000) == Fraction(1, 48)


def test_random_starts_agree():
    data = NahmData.make([[1, Fraction(1, 2)], [1, 1]], d=[1, 2])
    base = solve_nahm(data, 40).z
    for start in ([0.05, 0.9], [0.9, 0.05], [0.3, 0.3]):
        z = solve_nahm(data, 40, start=[mpmath.mpf(s) for s in start]).z
        assert max(abs(a - b) for a, b in zip(z, base)) < mpmath.mpf(10) ** -30


def test_dual_lambda_sum_rational():
    data = NahmData.make([[2, 1], [2, 2]], d=[1, 2])
    with mp.workdps(40):
        s = solve_nahm(data, 40).lam + solve_nahm(dual_data(data), 40).lam
        assert detect_rational(s, 1000) == Fraction(1, 16)


def test_detect_rational():
    with mp.workdps(60):
        x = mpmath.mpf("0.01666666666666666666666666666666666666666666666666666666666667")
        assert detect_rational(x, 1000) == Fraction(1, 60)
        assert detect_rational(mpmath.pi, 1000) is None


def test_solver_validates():
    with pytest.raises(NotPositiveDefinite):
        solve_nahm(NahmData.make([[1, 2], [2, 1]]))
