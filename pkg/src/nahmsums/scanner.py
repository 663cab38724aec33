"""Numerical modularity detection for Nahm sums and the candidate search.

For a modular q^c f the function phi(N) = N log f(e^(-1/N)) is a quadratic
polynomial in N up to exponentially small corrections, so its third
difference vanishes to working precision.  Non-modular sums keep power
corrections in 1/N and fail the test.

The search enumerates symmetrizable matrices of bounded height, keeps those
whose lambda is rational, prescreens every b on a rational grid with a
double-precision evaluation of phi, and confirms survivors with certified
multiprecision sums.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import mpmath
import numpy as np
from mpmath import mp

from .errors import NahmError
from .model import CongruenceConstraint, NahmData, fraction_str, is_positive_definite, validate
from .qseries import eval_numeric
from .solver import detect_rational, solve_nahm
from .specialfn import GUARD, to_mpf

DEFAULT_N_BASE = 20
# float-precision phi resolves Delta^3 to about 1e-11; the prescreen keeps
# everything below this level for the multiprecision check
PRESCREEN_LEVEL = 1e-8


def default_threshold(prec: int) -> Fraction:
    """10^-min(12, prec/2).

    Modular sums have |Delta^3 phi| at or below about 1e-16 at N = 20 (the
    tail is exponentially small), non-modular ones follow a power law and sit
    at 1e-9 .. 1e-5 with rare dips toward 1e-12.  The value does not tighten
    with prec because the non-modular third differences do not depend on it.
    """
    return Fraction(1, 10 ** min(12, prec // 2))


@dataclass(frozen=True)
class PhiSample:
    N_val: int
    phi: object             # N log f(e^(-1/N))


@dataclass(frozen=True)
class QuadraticFit:
    linear: object
    const: object
    residual: object


@dataclass
class ScanRecord:
    data: NahmData
    third_diff: object
    lam: object
    lam_rational: Fraction | None
    c_est: Fraction | None = None
    verdict: str = "rejected"
    fit: QuadraticFit | None = None
    error: str | None = None

    def row(self) -> dict:
        A = ";".join(",".join(str(fraction_str(x)) for x in r) for r in self.data.A)
        return {"A": A,
                "b": ",".join(str(fraction_str(x)) for x in self.data.b),
                "c_est": "" if self.c_est is None else str(self.c_est),
                "d": ",".join(str(x) for x in self.data.d),
                "third_diff": mpmath.nstr(self.third_diff, 5) if self.third_diff is not None else "",
                "lambda": str(self.lam_rational) if self.lam_rational is not None
                else mpmath.nstr(self.lam, 20)}


CSV_COLUMNS = ("A", "b", "c_est", "d", "third_diff", "lambda")


# --- phi and the third difference ------------------------------------------

def _as_mpf(x):
    return to_mpf(x) if isinstance(x, Fraction) else mpmath.mpf(x)


def phi_sample(data: NahmData, N_val: int, constraints: Sequence[CongruenceConstraint] = (),
               prec: int = 60, Lambda=None) -> PhiSample:
    """phi(N) with the sum certified to relative accuracy about 10^-prec."""
    with mp.workdps(prec + GUARD):
        eps = mpmath.mpf(1) / N_val
        if Lambda is None:
            Lambda = solve_nahm(data, prec).Lambda
        # f(e^-eps) is of size e^(Lambda/eps) up to a modest factor
        atol = mpmath.mpf(10) ** (-prec) * mpmath.exp(mpmath.mpf(Lambda) / eps)
        res = eval_numeric(data, constraints, mpmath.exp(-eps), prec=prec, atol=atol)
        return PhiSample(N_val, N_val * mpmath.log(res.value))


def third_difference(values: Sequence) -> object:
    p0, p1, p2, p3 = values
    return p3 - 3 * p2 + 3 * p1 - p0


def third_difference_test(data: NahmData, constraints: Sequence[CongruenceConstraint] = (),
                          N_base: int = DEFAULT_N_BASE, prec: int = 60,
                          threshold=None, Lambda=None):
    """(Delta^3 phi at N_base..N_base+3, verdict) with verdict 'candidate' or 'rejected'."""
    validate(data)
    if threshold is None:
        threshold = default_threshold(prec)
    if Lambda is None:
        Lambda = solve_nahm(data, prec).Lambda
    samples = [phi_sample(data, N_base + k, constraints, prec, Lambda) for k in range(4)]
    with mp.workdps(prec + GUARD):
        d3 = third_difference([s.phi for s in samples])
        verdict = "candidate" if abs(d3) < _as_mpf(threshold) else "rejected"
        return +d3, verdict


def quadratic_fit(samples: Sequence[PhiSample], Lambda, sigma: int = 1) -> QuadraticFit:
    """Least-squares line through phi(N) - sigma*Lambda*N^2.

    For a modular q^c f the constant term is c and the residual is tiny.
    """
    xs = [mpmath.mpf(s.N_val) for s in samples]
    ys = [s.phi - sigma * Lambda * x ** 2 for s, x in zip(samples, xs)]
    n = len(xs)
    sx, sy = sum(xs), sum(ys)
    sxx = sum(x * x for x in xs)
    sxy = sum(x * y for x, y in zip(xs, ys))
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx)
    const = (sy - slope * sx) / n
    res = max(abs(y - slope * x - const) for x, y in zip(xs, ys))
    return QuadraticFit(slope, const, res)


# --- double-precision prescreen --------------------------------------------

def _log_inv_poch_real(eps: float, d: int, n: int) -> np.ndarray:
    """log 1/(r^d;r^d)_k for k = 0..n-1, r = e^-eps."""
    k = np.arange(1, n, dtype=float)
    return np.concatenate([[0.0], np.cumsum(-np.log1p(-np.exp(-eps * d * k)))])


def _box_terms(data: NahmData, eps: float, size: int):
    """b-independent log-terms on {0..size-1}^N and the coordinate grids."""
    N = data.N
    AD = np.array([[float(x) for x in row] for row in data.AD])
    grids = np.meshgrid(*[np.arange(size, dtype=float)] * N, indexing="ij")
    n = np.stack([g.ravel() for g in grids])                    # N x size^N
    quad = 0.5 * np.einsum("ik,ij,jk->k", n, AD, n)
    logp = sum(_log_inv_poch_real(eps, data.d[i], size)[n[i].astype(int)] for i in range(N))
    return -eps * quad + logp, n


def phi_float(data: NahmData, b_list: Sequence[Sequence[Fraction]], N_vals: Sequence[int],
              margin: float = 45.0) -> np.ndarray:
    """phi(N) in double precision for every b in b_list (c taken as 0).

    The box grows until each b's boundary terms are below e^-margin times its
    largest term; every term is positive, so the log-sum-exp is accurate to a
    few ulps of log f.
    """
    B = np.array([[float(x) for x in b] for b in b_list])      # nb x N
    out = np.empty((len(b_list), len(N_vals)))
    for col, Nv in enumerate(N_vals):
        eps = 1.0 / Nv
        size = 32
        while True:
            base, n = _box_terms(data, eps, size)
            logs = base[None, :] - eps * (B @ n)                # nb x points
            top = logs.max(axis=1)
            shell = (n == size - 1).any(axis=0)
            if (logs[:, shell].max(axis=1) < top - margin).all():
                break
            size *= 2
            if size ** data.N > 5 * 10 ** 7:
                raise NahmError("prescreen box too large")
        lse = top + np.log(np.exp(logs - top[:, None]).sum(axis=1))
        out[:, col] = Nv * lse
    return out


# --- enumeration -----------------------------------------------------------

def height_values(height: int) -> list[Fraction]:
    """All p/q with |p| <= height and 1 <= q <= height, sorted."""
    return sorted({Fraction(p, q) for q in range(1, height + 1) for p in range(-height, height + 1)})


def _canonical(A: tuple, d: tuple) -> tuple:
    N = len(d)
    best = A
    for perm in itertools.permutations(range(N)):
        if any(d[perm[i]] != d[i] for i in range(N)):
            continue
        P = tuple(tuple(A[perm[i]][perm[j]] for j in range(N)) for i in range(N))
        best = min(best, P)
    return best


def enumerate_candidates(rank: int, d: Sequence[int], height: int) -> Iterator[NahmData]:
    """Symmetrizable A of the given height with AD positive definite.

    Off-diagonal pairs are tied by A_ji = A_ij d_j / d_i and both must have
    height at most ``height``.  Matrices equal up to a permutation preserving d
    are reported once.
    """
    if rank not in (2, 3):
        raise ValueError("rank must be 2 or 3")
    d = tuple(int(x) for x in d)
    if len(d) != rank:
        raise ValueError("len(d) must equal rank")
    vals = height_values(height)
    valset = set(vals)
    pos = [v for v in vals if v > 0]
    pairs = [(i, j) for i in range(rank) for j in range(i + 1, rank)]
    off_choices = [[v for v in vals if v * d[j] / d[i] in valset] for i, j in pairs]
    seen = set()
    for diag in itertools.product(pos, repeat=rank):
        for off in itertools.product(*off_choices):
            A = [[Fraction(0)] * rank for _ in range(rank)]
            for i in range(rank):
                A[i][i] = diag[i]
            for (i, j), v in zip(pairs, off):
                A[i][j] = v
                A[j][i] = v * d[j] / d[i]
            key = tuple(tuple(r) for r in A)
            AD = [[A[i][j] * d[j] for j in range(rank)] for i in range(rank)]
            if not is_positive_definite(AD):
                continue
            canon = _canonical(key, d)
            if canon in seen:
                continue
            seen.add(canon)
            yield NahmData.make([list(r) for r in canon], [0] * rank, 0, d)


def b_grid(data: NahmData, b_height: int, den: int | None = None) -> list[tuple[Fraction, ...]]:
    """b with entries k/den, |k/den| <= b_height; den defaults to lcm(2, d)."""
    if den is None:
        den = math.lcm(2, *data.d)
    vals = [Fraction(k, den) for k in range(-b_height * den, b_height * den + 1)]
    return list(itertools.product(vals, repeat=data.N))


# --- the scan --------------------------------------------------------------

def _scan_matrix(args) -> list[ScanRecord]:
    (data, b_height, b_den, threshold, prec, N_base, K, lam_den, c_prec) = args
    records: list[ScanRecord] = []
    try:
        sol = solve_nahm(data, prec)
    except NahmError as exc:
        return [ScanRecord(data, None, None, None, error=f"solve: {exc}")]
    with mp.workdps(prec):
        lam_q = detect_rational(sol.lam, max_den=lam_den, tol=mpmath.mpf(10) ** (-(prec // 2)))
    if lam_q is None:
        return records
    grid = b_grid(data, b_height, b_den)
    N_vals = [N_base + k for k in range(4)]
    try:
        phis = phi_float(data, grid, N_vals)
    except NahmError as exc:
        return [ScanRecord(data, None, sol.lam, lam_q, error=f"prescreen: {exc}")]
    d3 = phis[:, 3] - 3 * phis[:, 2] + 3 * phis[:, 1] - phis[:, 0]
    keep = np.abs(d3) < max(float(_as_mpf(threshold)), PRESCREEN_LEVEL)
    for b, ok in zip(grid, keep):
        if not ok:
            continue
        cand = data.replace(b=b)
        rec = ScanRecord(cand, None, sol.lam, lam_q)
        try:
            samples = [phi_sample(cand, Nv, (), prec, sol.Lambda) for Nv in N_vals]
            with mp.workdps(prec + GUARD):
                rec.third_diff = third_difference([s.phi for s in samples])
                if abs(rec.third_diff) < _as_mpf(threshold):
                    rec.verdict = "candidate"
                    rec.fit = quadratic_fit(samples[:3], sol.Lambda)
            if rec.verdict == "candidate":
                rec.c_est = _estimate_c(cand, rec.fit, K, c_prec, sol)
        except NahmError as exc:
            rec.error = str(exc)
        records.append(rec)
    return records


def _estimate_c(data: NahmData, fit: QuadraticFit, K: int, prec: int, sol) -> Fraction | None:
    """c from the vanishing eps^1 coefficient of the asymptotic series.

    Falls back to the constant term of the quadratic fit when the series value
    has no small-denominator rational reconstruction.
    """
    from .asymptotics import determine_c
    if sol.prec != prec:
        sol = solve_nahm(data, prec)
    est = determine_c(data, K=K, prec=prec, sol=sol)
    with mp.workdps(prec):
        c = detect_rational(est.c_est, max_den=10 ** 4, tol=mpmath.mpf(10) ** (-(prec // 2)))
    if c is None:
        c = detect_rational(fit.const, max_den=10 ** 4, tol=mpmath.mpf(10) ** -20)
    return c


def scan(rank: int, d: Sequence[int], height: int, b_height: int,
         threshold=None, prec: int = 60, *, N_base: int = DEFAULT_N_BASE,
         b_den: int | None = None, K: int = 3, lam_den: int = 1000, c_prec: int = 40,
         workers: int = 1, matrices: Iterable[NahmData] | None = None,
         only_candidates: bool = True) -> list[ScanRecord]:
    """Run the two-step detector over all candidates; records in canonical order."""
    if threshold is None:
        threshold = default_threshold(prec)
    mats = list(matrices) if matrices is not None else list(enumerate_candidates(rank, d, height))
    jobs = [(m, b_height, b_den, threshold, prec, N_base, K, lam_den, c_prec) for m in mats]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_scan_matrix, jobs))
    else:
        results = [_scan_matrix(j) for j in jobs]
    out = [r for rs in results for r in rs]
    if only_candidates:
        out = [r for r in out if r.verdict == "candidate" or r.error]
    return out


def write_csv(records: Sequence[ScanRecord], fh=None) -> str:
    buf = fh if fh is not None else io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in records:
        if r.error is None:
            w.writerow(r.row())
    return buf.getvalue() if fh is None else ""


# --- negative controls -----------------------------------------------------

def perturbed_controls(n: int = 100, seed: int = 0) -> list[NahmData]:
    """Random perturbations of modular table rows that leave the modular locus.

    Each control moves one entry of A (keeping AD symmetric positive definite)
    or of b by a random nonzero rational step, and is kept only if its lambda
    is not a rational number of small denominator.
    """
    rng = random.Random(seed)
    bases = [NahmData.make([[2, 1], [2, 2]], [0, 0], 0, [1, 2]),
             NahmData.make([[1, Fraction(1, 2)], [1, 1]], [0, 0], 0, [1, 2]),
             NahmData.make([[2, 1], [3, 2]], [0, 0], 0, [1, 3]),
             NahmData.make([[4, 2], [6, 4]], [0, 0], 0, [1, 3]),
             NahmData.make([[3, 2], [4, 4]], [Fraction(-1, 2), 0], 0, [1, 2]),
             NahmData.make([[2]], [0], 0, [1])]
    steps = [Fraction(s, q) for q in (3, 5, 7) for s in (-2, -1, 1, 2)]
    out = []
    while len(out) < n:
        base = rng.choice(bases)
        N = base.N
        A = [list(r) for r in base.A]
        i, j = rng.randrange(N), rng.randrange(N)
        s = rng.choice(steps)
        A[i][j] += s
        if i != j:
            A[j][i] += s * base.d[j] / base.d[i]
        AD = [[A[r][k] * base.d[k] for k in range(N)] for r in range(N)]
        if not is_positive_definite(AD):
            continue
        b = list(base.b)
        b[rng.randrange(N)] += rng.choice(steps)
        cand = NahmData.make(A, b, 0, base.d)
        with mp.workdps(40):
            lam = solve_nahm(cand, 40).lam
            if detect_rational(lam, max_den=1000, tol=mpmath.mpf(10) ** -20) is not None:
                continue
        out.append(cand)
    return out
