"""Rogers-Ramanujan and friends as exact q-series.

The sum over n of q^(n^2)/(q;q)_n is the simplest Nahm sum (A = [[2]]).  We
expand it exactly, compare it with the product 1/(q,q^4;q^5)_inf, and then
check every bundled identity to its stated order.
"""
from fractions import Fraction

from nahmsums.model import NahmData
from nahmsums.qseries import (ProductSide, bundled_identities, load_identity, nahm_series,
                              product_series, verify_identity)

rr = NahmData.make([[2]])
lhs = nahm_series(rr, (), 30)
print("sum q^(n^2)/(q;q)_n =", [lhs.coefficient(k) for k in range(15)], "...")

rhs = product_series(ProductSide.simple(5, (1, 4)), 30)
print("1/(q,q^4;q^5)_inf    =", [rhs.coefficient(k) for k in range(15)], "...")
print(verify_identity(lhs, rhs, 30, "Rogers-Ramanujan"))

# a Nahm sum with a shift c lives on a fractional exponent grid
shifted = nahm_series(rr.replace(c=Fraction(-1, 60)), (), 3)
print("q^(-1/60) f(q) starts at exponent", shifted.offset)

print("\nBundled identities:")
for path in bundled_identities():
    for rep in load_identity(path).verify():
        print("  ", rep)
