"""Nahm's equation, the dilogarithm and the growth constant lambda.

For f_{A,b,c,d} the solution z of 1 - z_i = prod_j z_j^(A_ij) fixes the
exponential growth of f near q = 1: log f(e^-eps) ~ Lambda/eps with
Lambda = -sum L(z_i)/d_i.  For modular candidates lambda = Lambda/(4 pi^2)
is rational.
"""
from fractions import Fraction

from mpmath import mp, nstr

from nahmsums.model import NahmData
from nahmsums.solver import detect_rational, solve_nahm

examples = {
    "Rogers-Ramanujan [[2]]": NahmData.make([[2]]),
    "free sum [[1]]": NahmData.make([[1]]),
    "Kanade-Russell [[2,1],[3,2]], d=(1,3)": NahmData.make([[2, 1], [3, 2]], d=[1, 3]),
    "[[1,1/2],[1,1]], d=(1,2)": NahmData.make([[1, Fraction(1, 2)], [1, 1]], d=[1, 2]),
    "perturbed [[2,1/3],[1/3,2]]": NahmData.make([[2, Fraction(1, 3)], [Fraction(1, 3), 2]]),
}

for name, data in examples.items():
    sol = solve_nahm(data, 60)
    with mp.workdps(60):
        guess = detect_rational(sol.lam, 1000)
        print(f"{name}\n  z = {[nstr(x, 20) for x in sol.z]}\n  lambda = {nstr(sol.lam, 25)}"
              f"  ({'= ' + str(guess) if guess is not None else 'no small rational'})\n")
