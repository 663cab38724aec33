from fractions import Fraction

import pytest

from nahmsums.errors import AsymmetricProduct, DimensionMismatch, NotPositiveDefinite
from nahmsums.model import (CongruenceConstraint, NahmData, as_fraction, dual_data,
                            exponent_denominator, nahm_from_json, nahm_to_json,
                            quadratic_form, strong_denominator, validate)


def test_as_fraction_forms():
    assert as_fraction("3/4") == Fraction(3, 4)
    assert as_fraction(2) == 2
    assert as_fraction("-1/40") == Fraction(-1, 40)


def test_validate_rejects_asymmetric_and_indefinite():
    with pytest.raises(AsymmetricProduct):
        validate(NahmData.make([[2, 1], [1, 2]], d=[1, 2]))
    with pytest.raises(NotPositiveDefinite):
        validate(NahmData.make([[1, 2], [2, 1]]))
    with pytest.raises(DimensionMismatch):
        NahmData.make([[1, 0], [0, 1]], [0], 0, [1, 1])


def test_quadratic_form_exact():
    data = NahmData.make([[2, 1], [3, 2]], [1, 3], Fraction(5, 18), [1, 3])
    # 1/2 n^T AD n + b.n + c with AD = [[2, 3], [3, 6]]
    assert quadratic_form(data, (1, 1)) == Fraction(7) + 4 + Fraction(5, 18)


def test_strong_denominator_oracles():
    # brute-force period search, tools/oracles.py
    assert strong_denominator(NahmData.make([[1]])) == 2
    assert strong_denominator(NahmData.make([[1, Fraction(1, 2)], [1, 1]], d=[1, 2])) == 2
    assert strong_denominator(NahmData.make([[2]])) == 1


def test_exponent_denominator_with_c():
    data = NahmData.make([[2]], [0], Fraction(-1, 60))
    assert exponent_denominator(data) == 1
    assert exponent_denominator(data, include_c=True) == 60


def test_dual_is_involution_and_keeps_pd():
    data = NahmData.make([[1, Fraction(1, 2)], [1, 1]], [0, 1], Fraction(1, 56), [1, 2])
    dv = dual_data(data)
    validate(dv)
    assert dual_data(dv) == data


def test_dual_of_rr():
    dv = dual_data(NahmData.make([[2]], [0], Fraction(-1, 60)))
    assert dv.A == ((Fraction(1, 2),),)
    assert dv.c == Fraction(1, 60) - Fraction(1, 24)


def test_constraint_validation():
    with pytest.raises(ValueError):
        CongruenceConstraint(1, 2, 2)
    assert CongruenceConstraint(1, 1, 2).admits((3, 0))


def test_json_round_trip():
    data = NahmData.make([[1, Fraction(1, 2)], [1, 1]], [0, 1], Fraction(1, 56), [1, 2])
    cons = (CongruenceConstraint(1, 1, 2),)
    assert nahm_from_json(nahm_to_json(data, cons)) == (data, cons)
