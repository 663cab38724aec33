"""Independent oracle values for the test suite.

Uses only mpmath, fractions and brute force, never the package itself.
The printed values are frozen into tests/.
"""
from fractions import Fraction
from itertools import product

import mpmath
from mpmath import mp

mp.dps = 60


def brute_period(Q, N, top=12):
    for delta in range(1, top):
        ok = all((Q([k[i] + (delta if i == j else 0) for i in range(N)]) - Q(k)).denominator == 1
                 for k in product(range(2 * delta), repeat=N) for j in range(N))
        if ok:
            return delta


def partitions_14mod5(n):
    parts = [p for p in range(1, n + 1) if p % 5 in (1, 4)]
    ways = [1] + [0] * n
    for p in parts:
        for s in range(p, n + 1):
            ways[s] += ways[s - p]
    return ways


def kr_double_sum(order):
    # sum q^(n1^2 + 3 n1 n2 + 3 n2^2) / ((q;q)_n1 (q^3;q^3)_n2), brute force
    def inv_poch(d, n):
        c = [1] + [0] * order
        for j in range(1, n + 1):
            for s in range(d * j, order + 1):
                c[s] += c[s - d * j]
        return c
    total = [0] * (order + 1)
    for n1 in range(order + 1):
        for n2 in range(order + 1):
            e = n1 * n1 + 3 * n1 * n2 + 3 * n2 * n2
            if e > order:
                continue
            a, b = inv_poch(1, n1), inv_poch(3, n2)
            for i in range(order + 1 - e):
                for j in range(order + 1 - e - i):
                    total[e + i + j] += a[i] * b[j]
    return total


def product_6(order):
    c = [1] + [0] * order
    for r in (2, 3, 4, 6):
        for k in range(r, order + 1, 6):
            for s in range(order, k - 1, -1):
                c[s] += c[s - k]
    return c


def main():
    print("period [[1,1/2],[1,1]] d=(1,2):",
          brute_period(lambda k: Fraction(k[0] ** 2, 2) + k[0] * k[1] + k[1] ** 2, 2))
    print("period [[1]]:", brute_period(lambda k: Fraction(k[0] ** 2, 2), 1))
    print("(q;q)_inf(1/2):", mpmath.nstr(mpmath.nprod(lambda n: 1 - mpmath.mpf(2) ** -n, [1, mpmath.inf]), 20))
    pent = mpmath.nsum(lambda k: (-1) ** int(k) * mpmath.mpf(2) ** (-k * (3 * k - 1) / 2), [-mpmath.inf, mpmath.inf])
    print("pentagonal check:", mpmath.nstr(pent, 20))
    print("RR coefficients:", partitions_14mod5(6))
    print("KR b=0 coefficients:", kr_double_sum(8))
    print("(-q^2,-q^3,-q^4,-q^6;q^6):", product_6(8))
    q = mpmath.mpf(1) / 2
    rr_sum = mpmath.nsum(lambda n: q ** (n * n) / mpmath.qp(q, q, n), [0, mpmath.inf])
    rr_prod = 1 / (mpmath.qp(q, q ** 5) * mpmath.qp(q ** 4, q ** 5))
    print("RR at 1/2:", mpmath.nstr(rr_sum, 50), mpmath.nstr(rr_sum - rr_prod, 3))
    z = mpmath.findroot(lambda z: z * z + z - 1, 0.6)
    print("golden z:", mpmath.nstr(z, 30))
    L = lambda z: mpmath.polylog(2, z) + mpmath.log(z) * mpmath.log(1 - z) / 2 - mpmath.pi ** 2 / 6
    print("L(z) + pi^2/15:", mpmath.nstr(L(z) + mpmath.pi ** 2 / 15, 3))
    print("lambda [[1]]:", mpmath.identify(-L(mpmath.mpf(1) / 2) / (4 * mpmath.pi ** 2)))
    z1, z2 = mpmath.findroot([lambda a, b: 1 - a - a * a * b, lambda a, b: 1 - b - a ** 3 * b * b], (0.5, 0.5))
    Lam = -L(z1) - L(z2) / 3
    print("KR z:", mpmath.nstr(z1, 30), mpmath.nstr(z2, 30), "lambda - 1/54:",
          mpmath.nstr(Lam / (4 * mpmath.pi ** 2) - mpmath.mpf(1) / 54, 3))
    print("det A~ RR:", mpmath.nstr(2 + z / (1 - z), 30), mpmath.nstr((5 + mpmath.sqrt(5)) / 2, 30))
    qq = mpmath.exp(-2 * mpmath.pi)
    f = mpmath.nsum(lambda n: qq ** (n * n) / mpmath.qp(qq, qq, n), [0, mpmath.inf])
    print("RR component at tau=i:", mpmath.nstr(qq ** (-mpmath.mpf(1) / 60) * f, 40))
    print("Li2(1/2):", mpmath.nstr(mpmath.nsum(lambda k: mpmath.mpf(2) ** -k / k ** 2, [1, mpmath.inf]), 50))
    print("Li_{-1}(1/2):", mpmath.nsum(lambda k: k * mpmath.mpf(2) ** -k, [1, mpmath.inf]))
    # eps^1 coefficient of e^(-Lambda/eps) f(e^-eps) for RR, by Richardson on three eps
    Lam_rr = mpmath.pi ** 2 / 15
    def g(eps):
        x = mpmath.exp(-eps)
        return mpmath.exp(-Lam_rr / eps) * mpmath.nsum(lambda n: x ** (n * n) / mpmath.qp(x, x, n), [0, mpmath.inf])
    vals = [(mpmath.mpf(1) / n, g(mpmath.mpf(1) / n)) for n in (40, 50, 60, 70, 80)]
    # fit g = a0 (1 + a1 eps + a2 eps^2 + ...) by polynomial interpolation in eps
    xs = [v[0] for v in vals]
    ys = [v[1] for v in vals]
    M = mpmath.matrix([[x ** j for j in range(5)] for x in xs])
    c = mpmath.lu_solve(M, mpmath.matrix(ys))
    print("RR radial a0, a1/a0:", mpmath.nstr(c[0], 20), mpmath.nstr(c[1] / c[0], 12))


if __name__ == "__main__":
    main()
