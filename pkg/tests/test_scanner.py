from fractions import Fraction

import mpmath
import pytest

from nahmsums.model import NahmData
from nahmsums.scanner import (b_grid, default_threshold, enumerate_candidates, perturbed_controls,
                              phi_float, phi_sample, quadratic_fit, scan, third_difference,
                              third_difference_test, write_csv)
from nahmsums.solver import solve_nahm

RR = NahmData.make([[2]])
BLOCK = NahmData.make([[1, Fraction(1, 2)], [1, 1]], [0, 0], 0, [1, 2])


def test_third_difference_kills_quadratics():
    assert third_difference([n * n + 3 * n + 7 for n in range(4)]) == 0
    assert third_difference([n ** 3 for n in range(4)]) == 6


def test_rr_is_candidate():
    d3, verdict = third_difference_test(RR, prec=60)
    assert verdict == "candidate"
    assert abs(d3) < 1e-40


def test_perturbed_kr_rejected():
    d3, verdict = third_difference_test(NahmData.make([[2, 1], [3, 2]], [1, 2], 0, [1, 3]), prec=60)
    assert verdict == "rejected"


def test_c_does_not_change_third_difference():
    Lam = solve_nahm(BLOCK, 40).Lambda
    base, _ = third_difference_test(BLOCK, prec=40, Lambda=Lam)
    for gamma in (Fraction(1, 7), Fraction(-5, 3)):
        d3, _ = third_difference_test(BLOCK.replace(c=gamma), prec=40, Lambda=Lam)
        assert abs(d3 - base) < 1e-30


def test_quadratic_fit_recovers_c():
    Lam = solve_nahm(BLOCK, 60).Lambda
    fit = quadratic_fit([phi_sample(BLOCK, N, (), 60, Lam) for N in (20, 21, 22)], Lam)
    assert abs(fit.const + mpmath.mpf(3) / 56) < 1e-9


def test_float_prescreen_agrees():
    Lam = solve_nahm(RR, 30).Lambda
    phis = phi_float(RR, [(Fraction(0),), (Fraction(1),)], [20, 21, 22, 23])
    for row in phis:
        assert abs(third_difference(row)) < 1e-9
    assert abs(phis[0][0] - float(phi_sample(RR, 20, (), 30, Lam).phi)) < 1e-8


def test_default_threshold():
    assert default_threshold(60) == Fraction(1, 10 ** 12)
    assert default_threshold(20) == Fraction(1, 10 ** 10)


def test_enumeration_contains_table_matrices():
    mats = {m.A for m in enumerate_candidates(2, (1, 2), 4)}
    for A in (((2, 1), (2, 2)), ((1, Fraction(1, 2)), (1, 1))):
        assert tuple(tuple(Fraction(x) for x in r) for r in A) in mats


def test_b_grid_size():
    assert len(b_grid(BLOCK, 2)) == 9 * 9


def test_small_scan_finds_block():
    recs = scan(2, (1, 2), 4, 1, None, 60, matrices=[BLOCK])
    found = {(r.data.b, r.c_est) for r in recs}
    assert ((Fraction(0), Fraction(0)), Fraction(-3, 56)) in found
    assert ((Fraction(0), Fraction(1)), Fraction(1, 56)) in found
    assert ((Fraction(1), Fraction(1)), Fraction(9, 56)) in found
    csv_text = write_csv(recs)
    assert csv_text.splitlines()[0] == "A,b,c_est,d,third_diff,lambda"


def test_controls_are_deterministic_and_rejected():
    a = perturbed_controls(5, seed=3)
    assert a == perturbed_controls(5, seed=3)
    for data in a:
        assert third_difference_test(data, prec=40)[1] == "rejected"


@pytest.mark.parametrize("b,c", [((0, 1), Fraction(1, 24)), ((-1, -1), Fraction(1, 24))])
def test_table_typo_row(b, c):
    # f(b=(-1,-1)) = 2 f(b=(0,1)), so both rows carry c = 1/24
    data = NahmData.make([[2, 1], [2, 2]], b, 0, [1, 2])
    recs = scan(2, (1, 2), 4, 1, None, 60, matrices=[data.replace(b=(0, 0))])
    assert any(r.data.b == tuple(Fraction(x) for x in b) and r.c_est == c for r in recs)
