"""The third-difference search for modular Nahm sums.

phi(N) = N log f(e^(-1/N)) is a quadratic polynomial in N up to exponentially
small terms when q^c f is modular, and has a 1/N tail otherwise.  The third
difference separates the two cases by many orders of magnitude.
"""
import time

from mpmath import nstr

from nahmsums.model import NahmData
from nahmsums.scanner import default_threshold, perturbed_controls, scan, third_difference_test

for label, data in (("modular [[2,1],[2,2]], b=(0,1)", NahmData.make([[2, 1], [2, 2]], [0, 1], d=[1, 2])),
                    ("non-modular [[2,1],[2,2]], b=(1,0)", NahmData.make([[2, 1], [2, 2]], [1, 0], d=[1, 2]))):
    d3, verdict = third_difference_test(data, prec=60)
    print(f"{label}: third difference {nstr(d3, 3)} -> {verdict}")

print("\nRandom perturbations of table rows:")
for data in perturbed_controls(5, seed=1):
    d3, verdict = third_difference_test(data, prec=60)
    print(f"  {data}: {nstr(d3, 3)} -> {verdict}")

print(f"\nScanning rank 2, d=(1,2), height 4, threshold {float(default_threshold(60)):.0e} ...")
t0 = time.perf_counter()
recs = scan(2, (1, 2), 4, 2, None, 60)
print(f"{len(recs)} candidates in {time.perf_counter() - t0:.0f}s; a few of them:")
for r in recs[:10]:
    print(f"  {r.data}  c = {r.c_est}  lambda = {r.lam_rational}")
