from fractions import Fraction

import mpmath
import pytest
from mpmath import mp

from nahmsums.errors import Divergent, InvalidFactor
from nahmsums.model import CongruenceConstraint, NahmData
from nahmsums.qseries import (ProductFactor, ProductSide, QSeries, SingleSum, bundled_identities,
                              eval_numeric, load_identity, nahm_series, product_numeric,
                              product_series, single_sum_series, verify_identity)

RR = NahmData.make([[2]])
KR = NahmData.make([[2, 1], [3, 2]], [0, 0], 0, [1, 3])
# oracle values from tools/oracles.py
RR_AT_HALF = "2.1726687508496636560169136098593128206564369351096"
RR_COMPONENT_AT_I = "1.112476869863910982375310319586813840038"


def coeffs(series, n):
    return [series.coefficient(k) for k in range(n)]


def test_rr_coefficients():
    assert coeffs(nahm_series(RR, (), 6), 7) == [1, 1, 1, 1, 2, 2, 3]


def test_kr_coefficients():
    assert coeffs(nahm_series(KR, (), 8), 9) == [1, 1, 1, 2, 2, 2, 4, 4, 5]


def test_product_expansion():
    p = ProductSide.simple(6, (2, 3, 4, 6), e=1, sign=-1)
    assert coeffs(product_series(p, 8), 9) == [1, 0, 1, 1, 1, 1, 2, 1, 2]


def test_rr_product_side():
    p = ProductSide.simple(5, (1, 4))
    assert verify_identity(nahm_series(RR, (), 100), product_series(p, 100)).verified


def test_single_sum_matches_nahm_sum():
    s = SingleSum(Fraction(1))
    assert verify_identity(single_sum_series(s, 60), nahm_series(RR, (), 60)).verified


def test_series_with_c_offset():
    s = nahm_series(RR.replace(c=Fraction(-1, 60)), (), 10)
    assert s.offset == Fraction(-1, 60)
    assert s.coefficient(Fraction(59, 60)) == 1


def test_constraint_restricts_sum():
    even = nahm_series(RR, (CongruenceConstraint(1, 0, 2),), 30)
    odd = nahm_series(RR, (CongruenceConstraint(1, 1, 2),), 30)
    full = nahm_series(RR, (), 30)
    assert (even + odd).nonzero() == full.nonzero()
    assert even.coefficient(1) == 0


def test_numeric_rr_at_half():
    with mp.workdps(50):
        res = eval_numeric(RR, (), mpmath.mpf(1) / 2, prec=50)
        assert abs(res.value - mpmath.mpf(RR_AT_HALF)) < mpmath.mpf(10) ** -48
        prod = product_numeric(ProductSide.simple(5, (1, 4)), mpmath.mpf(1) / 2, prec=50)
        assert abs(res.value - prod) < mpmath.mpf(10) ** -48
        assert res.truncation_bound < mpmath.mpf(10) ** -50


def test_numeric_at_tau_i_with_prefactor():
    with mp.workdps(45):
        res = eval_numeric(RR.replace(c=Fraction(-1, 60)), (), tau=mpmath.mpc(0, 1), prec=45)
        assert abs(res.value - mpmath.mpf(RR_COMPONENT_AT_I)) < mpmath.mpf(10) ** -38


def test_series_vs_numeric():
    with mp.workdps(40):
        s = nahm_series(KR, (), 80)
        for q in ("0.1", "0.3"):
            q = mpmath.mpf(q)
            assert abs(s.evaluate(q, prec=40) / eval_numeric(KR, (), q, prec=40).value - 1) < 1e-25


def test_divergent_outside_disk():
    with pytest.raises(Divergent):
        eval_numeric(RR, (), mpmath.mpf("1.2"))


def test_invalid_product_factor():
    with pytest.raises(InvalidFactor):
        ProductFactor(1, Fraction(0), Fraction(1), -1)


def test_qseries_arithmetic():
    one = QSeries.one(5)
    x = QSeries(1, 0, [0, 1, 0, 0, 0, 0])
    prod = (one - x) * (one + x)
    assert prod.truncate(3).nonzero() == {Fraction(0): 1, Fraction(2): -1}


@pytest.mark.parametrize("path", bundled_identities(), ids=lambda p: p.stem)
def test_bundled_identity(path):
    for rep in load_identity(path).verify():
        assert rep.verified, str(rep)
