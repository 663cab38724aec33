"""Invariant and property suite behind ``nahmsums selftest``.

Each check returns ``(ok, detail)``.  Randomness comes from one seeded
``random.Random`` so a run is reproducible; ``quick`` trims the table-wide
checks to a sample of rows.
"""
from __future__ import annotations

import contextlib
import io
import itertools
import json
import math
import random
import time
from fractions import Fraction
from pathlib import Path

import mpmath
from mpmath import mp

from . import asymptotics as asy
from .errors import InconsistentExponents
from .model import (CongruenceConstraint, NahmData, dual_data, quadratic_form,
                    strong_denominator, validate)
from .qseries import bundled_identities, eval_numeric, load_identity, nahm_series
from .scanner import third_difference_test
from .solver import detect_rational, solve_nahm
from .specialfn import (RootOfUnityContext, bernoulli_poly, change_of_zeta3_sides,
                        change_of_zeta_sides, chi_factor, dedekind_sum, gauss_sum,
                        shift_identity_sides, vanishing_slope)
from .transforms import PRESETS, Component, Term, VectorSystem, composition_defect, \
    exponent_class, load_preset, verify_S, verify_T

TABLE_DIR = Path(__file__).parent / "data" / "tables"
TABLES = ("rank2_left", "rank2_right", "rank3_112", "rank3_221")
P = 50


def table_rows(names=TABLES) -> list[tuple[str, NahmData]]:
    """(table name, data) for every bundled table row, c included."""
    out = []
    for name in names:
        for r in json.loads((TABLE_DIR / f"{name}.json").read_text()):
            out.append((name, NahmData.make(r["A"], r["b"], r["c"], r["d"])))
    return out


def distinct_matrices(rows) -> list[NahmData]:
    seen, out = set(), []
    for _, data in rows:
        key = (data.A, data.d)
        if key not in seen:
            seen.add(key)
            out.append(data.replace(b=[0] * data.N, c=0))
    return out


def _rand_x(rng, r=0.9):
    rad = r * math.sqrt(rng.random())
    ang = 2 * math.pi * rng.random()
    return mpmath.mpc(rad * math.cos(ang), rad * math.sin(ang))


def _tol(prec=P):
    return mpmath.mpf(10) ** (-(prec - 10))


# --- model ------------------------------------------------------------------

def check_periodicity(rng, quick):
    rows = table_rows()
    bad = 0
    for _, data in rows[:: 4 if quick else 1]:
        delta = strong_denominator(data)
        q0 = quadratic_form(data, [0] * data.N)
        for k in itertools.product(range(2 * delta), repeat=data.N):
            qk = quadratic_form(data, k)
            if (2 * delta * delta) % (qk - q0).denominator:
                bad += 1
            for i in range(data.N):
                k2 = list(k)
                k2[i] += delta
                if (quadratic_form(data, k2) - qk).denominator != 1:
                    bad += 1
    return bad == 0, f"{bad} violations"


def check_dual(rng, quick):
    bad = 0
    for _, data in table_rows():
        dv = dual_data(data)
        validate(dv)
        if dual_data(dv) != data:
            bad += 1
    return bad == 0, f"{bad} rows fail the involution or PD test"


# --- specialfn --------------------------------------------------------------

def check_shift_identity(rng, quick):
    worst = mpmath.mpf(0)
    with mp.workdps(P):
        for m in range(1, 14):
            ctx = RootOfUnityContext(m, 1)
            for _ in range(3):
                lhs, rhs = shift_identity_sides(ctx, _rand_x(rng), P)
                worst = max(worst, abs(lhs - rhs) / abs(rhs))
    return worst < _tol(), f"max rel err {mpmath.nstr(worst, 3)}"


def _coprime_pairs(mmax=13, pmax=7):
    return [(m, p) for m in range(1, mmax + 1) for p in range(1, pmax + 1) if math.gcd(m, p) == 1]


def check_change_of_zeta(rng, quick):
    worst = mpmath.mpf(0)
    with mp.workdps(P):
        for m, p in _coprime_pairs():
            lhs, rhs = change_of_zeta_sides(m, p, _rand_x(rng), P)
            worst = max(worst, abs(lhs / rhs - 1))
    return worst < _tol(), f"max rel err {mpmath.nstr(worst, 3)}"


def check_congruence_slope(rng, quick):
    worst, where = mpmath.inf, None
    with mp.workdps(P):
        for m, p in _coprime_pairs():
            if not 1 < p < m:
                continue
            for s in range(m):
                x0 = mpmath.expjpi(mpmath.mpf(2 * s) / m)
                sl = vanishing_slope(m, p, x0, prec=P)
                if sl - m < worst:
                    worst, where = sl - m, (m, p, s)
    return worst >= -0.2, f"min slope - m = {mpmath.nstr(worst, 4)} at (m, p, root) = {where}"


def check_change_of_zeta3(rng, quick):
    worst = mpmath.mpf(0)
    with mp.workdps(P):
        for m in range(2, 8):
            for p in range(1, m):
                if math.gcd(p, m) != 1:
                    continue
                e_ = rng.randrange(0, 4)
                a, b, c = change_of_zeta3_sides(m, p, e_, _rand_x(rng), P)
                worst = max(worst, abs(a - c) / abs(c), abs(b - c) / abs(c))
    return worst < _tol(), f"max rel err {mpmath.nstr(worst, 3)}"


def check_dedekind(rng, quick):
    bad = 0
    for p in range(1, 41):
        for q in range(1, 41):
            if math.gcd(p, q) != 1:
                continue
            lhs = dedekind_sum(p, q) + dedekind_sum(q, p)
            rhs = Fraction(-1, 4) + (Fraction(p, q) + Fraction(q, p) + Fraction(1, p * q)) / 12
            bad += lhs != rhs
        if dedekind_sum(1, p) != Fraction((p - 1) * (p - 2), 12 * p):
            bad += 1
    return bad == 0, f"{bad} failures of reciprocity or s(1, m)"


def check_bernoulli(rng, quick):
    bad = 0
    for r in range(13):
        for _ in range(5):
            x = Fraction(rng.randrange(-50, 50), rng.randrange(1, 30))
            bad += bernoulli_poly(r, 1 - x) != (-1) ** r * bernoulli_poly(r, x)
    return bad == 0, f"{bad} failures"


# --- qseries ----------------------------------------------------------------

SAMPLE_DATA = (
    NahmData.make([[2]], [0], Fraction(-1, 60)),
    NahmData.make([[2]], [1], Fraction(11, 60)),
    NahmData.make([[1, Fraction(1, 2)], [1, 1]], [0, 0], Fraction(-3, 56), [1, 2]),
    NahmData.make([[1, 1, 0], [1, 2, 1], [0, 2, 4]], [0, 0, 0], 0, [1, 1, 2]),
)


def check_series_numeric(rng, quick):
    worst = mpmath.mpf(0)
    with mp.workdps(40):
        for data in SAMPLE_DATA:
            s = nahm_series(data, (), 80)
            for q in ("0.1", "0.3"):
                q = mpmath.mpf(q)
                res = eval_numeric(data, (), q, prec=40)
                worst = max(worst, abs(s.evaluate(q, prec=40) - res.value) / abs(res.value))
    # the series tail beyond q^80 is below 1e-30 at q = 0.3 for these growth rates
    return worst < mpmath.mpf(10) ** -25, f"max rel diff {mpmath.nstr(worst, 3)}"


def check_splitting(rng, quick):
    bad = 0
    for data in SAMPLE_DATA:
        full = nahm_series(data, (), 30)
        for s in (2, 3):
            parts = [nahm_series(data, (CongruenceConstraint(1, r, s),), 30) for r in range(s)]
            total = parts[0]
            for part in parts[1:]:
                total = total + part
            if full.nonzero() != total.truncate(full.order).nonzero():
                bad += 1
    return bad == 0, f"{bad} splittings differ"


def check_identities(rng, quick):
    bad, n = [], 0
    for path in bundled_identities():
        for rep in load_identity(path).verify(None):
            n += 1
            if not rep.verified:
                bad.append(path.stem)
    return not bad, f"{n - len(bad)}/{n} verified" + (f"; failing {bad}" if bad else "")


# --- solver -----------------------------------------------------------------

def check_uniqueness(rng, quick):
    mats = distinct_matrices(table_rows())
    starts = 5 if quick else 20
    prec = 30
    worst = mpmath.mpf(0)
    for data in mats:
        sols = []
        for _ in range(starts):
            z0 = [mpmath.mpf(rng.uniform(0.02, 0.98)) for _ in range(data.N)]
            sols.append(solve_nahm(data, prec, start=z0).z)
        with mp.workdps(prec):
            for a, b in itertools.combinations(sols, 2):
                worst = max(worst, max(abs(x - y) for x, y in zip(a, b)))
    ok = worst < mpmath.mpf(10) ** -(prec - 10)
    return ok, f"{len(mats)} matrices x {starts} starts, max distance {mpmath.nstr(worst, 3)}"


def check_lambda_positive(rng, quick):
    mats = distinct_matrices(table_rows())
    lams = [solve_nahm(d, 30).Lambda for d in mats]
    return all(x > 0 for x in lams), f"min Lambda {mpmath.nstr(min(lams), 6)}"


def check_duality_lambda(rng, quick):
    """Observation only: lambda(Q) + lambda(Q dual) for the rank-2 rows."""
    notes = []
    for data in distinct_matrices(table_rows(("rank2_left",))):
        s = solve_nahm(data, 40).lam + solve_nahm(dual_data(data), 40).lam
        with mp.workdps(40):
            notes.append(str(detect_rational(s, 1000)))
    return True, "sums: " + ", ".join(notes)


# --- asymptotics ------------------------------------------------------------

ASY_CASES = (
    (NahmData.make([[2]], [0], Fraction(-1, 60)), (1, 2, 3)),
    (NahmData.make([[1, Fraction(1, 2)], [1, 1]], [0, 1], Fraction(1, 56), [1, 2]), (1, 3)),
    (NahmData.make([[2, 1], [1, 1]], [0, 0], 0), (1, 3)),
)


def _asy_setup(data, m, prec=30):
    sol = solve_nahm(data, prec)
    ctx = RootOfUnityContext(m, 1)
    return sol, ctx


def check_tilde_AD(rng, quick):
    bad = 0
    for _, data in table_rows()[:: 6 if quick else 1]:
        sol = solve_nahm(data, 30)
        with mp.workdps(40):
            At = asy.tilde_A(data, sol)
            N = data.N
            M = mpmath.matrix(N, N)
            for i in range(N):
                for j in range(N):
                    M[i, j] = At[i, j] * data.d[j]
            sym = max(abs(M[i, j] - M[j, i]) for i in range(N) for j in range(N))
            eig = mpmath.eigsy((M + M.T) / 2)[0]
            bad += sym > mpmath.mpf(10) ** -25 or min(eig) <= 0
    return bad == 0, f"{bad} failures"


def check_half_integer(rng, quick):
    worst = mpmath.mpf(0)
    for data, ms in ASY_CASES:
        for m in ms:
            sol, ctx = _asy_setup(data, m)
            for _ in range(3):
                k = [rng.randrange(m) for _ in range(data.N)]
                I = asy.I_series(data, ctx, sol, k, 3, 30)
                worst = max(worst, max(abs(I.c[h]) for h in range(1, len(I.c), 2)))
    return worst < _tol(30), f"max |odd coefficient| {mpmath.nstr(worst, 3)}"


def check_S_m1(rng, quick):
    worst = mpmath.mpf(0)
    for data, _ in ASY_CASES:
        sol, ctx = _asy_setup(data, 1)
        S, _ = asy.S_series(data, ctx, sol, 3, 30)
        I = asy.I_series(data, ctx, sol, [0] * data.N, 3, 30)
        worst = max(worst, max(abs(a - b) for a, b in zip(S.c, I.c)))
    return worst < _tol(30), f"max diff {mpmath.nstr(worst, 3)}"


def check_u_forms(rng, quick):
    worst = mpmath.mpf(0)
    for data, ms in ASY_CASES:
        for m in ms:
            sol, ctx = _asy_setup(data, m)
            u, u_alt = asy.compute_u(data, ctx, sol)
            worst = max(worst, abs(u - u_alt) / abs(u))
    return worst < _tol(30), f"max rel diff {mpmath.nstr(worst, 3)}"


def check_u_power(rng, quick):
    worst = mpmath.mpf(0)
    reps = 5 if quick else 30
    for data, ms in ASY_CASES:
        for m in ms:
            if m == 1:
                continue
            sol, ctx = _asy_setup(data, m)
            base = asy.u_power(data, ctx, sol)
            for _ in range(reps):
                tw = [rng.randrange(m) for _ in range(data.N)]
                worst = max(worst, abs(asy.u_power(data, ctx, sol, tw) - base) / abs(base))
    return worst < _tol(30), f"max rel diff {mpmath.nstr(worst, 3)}"


def check_k_shift(rng, quick):
    worst = mpmath.mpf(0)
    for data, ms in ASY_CASES:
        data0 = data.replace(c=0)
        for m in ms:
            sol, ctx = _asy_setup(data, m)
            with mp.workdps(40):
                theta = [z ** (mpmath.mpf(1) / m) for z in sol.z]
                zetas = [ctx.power(di).zeta(30) for di in data.d]
                for k in itertools.product(range(m), repeat=data.N):
                    a = asy._k_summand(data0, ctx, theta, zetas, k)
                    for i in range(data.N):
                        k2 = list(k)
                        k2[i] += m
                        b = asy._k_summand(data0, ctx, theta, zetas, k2)
                        worst = max(worst, abs(a - b) / max(abs(a), mpmath.mpf(10) ** -30))
    return worst < _tol(30), f"max rel diff {mpmath.nstr(worst, 3)}"


def check_units(rng, quick):
    worst = mpmath.mpf(0)
    with mp.workdps(30):
        for d in ((1,), (1, 2), (1, 3), (2, 2, 1), (1, 1, 2)):
            for m in range(1, 12):
                for a in range(m):
                    if math.gcd(a, m) == 1:
                        worst = max(worst, abs(abs(chi_factor(d, Fraction(a, m), 30)) - 1))
        for _, data in table_rows()[::10]:
            worst = max(worst, abs(gauss_sum(data, 0, 30) - 1))
    return worst < _tol(30), f"max deviation {mpmath.nstr(worst, 3)}"


# --- scanner ----------------------------------------------------------------

def check_c_independence(rng, quick):
    worst = mpmath.mpf(0)
    for data in SAMPLE_DATA[:3]:
        sol = solve_nahm(data, 40)
        base, _ = third_difference_test(data.replace(c=0), prec=40, Lambda=sol.Lambda)
        for gamma in (Fraction(1, 7), Fraction(-5, 3)):
            d3, _ = third_difference_test(data.replace(c=gamma), prec=40, Lambda=sol.Lambda)
            worst = max(worst, abs(d3 - base))
    return worst < mpmath.mpf(10) ** -30, f"max |change| {mpmath.nstr(worst, 3)}"


def _table_sample(quick):
    rows = table_rows()
    return rows[:: 8 if quick else 1]


def check_table_rows(rng, quick):
    failed, n = [], 0
    cache: dict = {}
    for name, data in _table_sample(quick):
        key = (data.A, data.d)
        if key not in cache:
            cache[key] = solve_nahm(data, 60).Lambda
        n += 1
        _, verdict = third_difference_test(data, prec=60, threshold=Fraction(1, 10 ** 6),
                                           Lambda=cache[key])
        if verdict != "candidate":
            failed.append(f"{name}:{data}")
    return not failed, f"{n - len(failed)}/{n} rows pass" + (f"; failing {failed}" if failed else "")


def check_monotone_precision(rng, quick):
    flips, n = [], 0
    rows = table_rows()[:: 16 if quick else 4]
    for name, data in rows:
        Lam = solve_nahm(data, 60).Lambda
        verdicts = [third_difference_test(data, prec=p, Lambda=Lam)[1] for p in (40, 60)]
        n += 1
        if verdicts[0] == "candidate" and verdicts[1] != "candidate":
            flips.append(f"{name}:{data}")
    return not flips, f"{n} rows, {len(flips)} flips" + (f": {flips}" if flips else "")


# --- transforms -------------------------------------------------------------

def check_S_composition(rng, quick):
    worst = mpmath.mpf(0)
    with mp.workdps(P):
        for name in PRESETS:
            worst = max(worst, composition_defect(load_preset(name)))
    return worst < mpmath.mpf(10) ** -30, f"max |M - I| {mpmath.nstr(worst, 3)}"


def check_T_exact(rng, quick):
    bad = []
    for name in PRESETS:
        for sys in load_preset(name).systems.values():
            if not verify_T(sys).matches:
                bad.append(f"{name}:{sys.name}")
    # mixing exponent classes in one component must raise
    f0 = Term(NahmData.make([[2]], [0], 0))
    f1 = Term(NahmData.make([[2]], [1], 0), power=Fraction(1, 3))
    try:
        exponent_class(Component(Fraction(0), (f0, f1)))
        bad.append("inconsistent component accepted")
    except InconsistentExponents:
        pass
    return not bad, "all presets consistent" if not bad else f"failing {bad}"


def check_S_convergence(rng, quick):
    preset = load_preset("rr")
    rel = preset.relations[0]
    errs = []
    for prec in (15, 30):
        rep = verify_S(preset, rel, (1.0,), prec)
        errs.append(rep.max_error)
    return errs[1] < errs[0], "errors " + ", ".join(mpmath.nstr(x, 3) for x in errs)


# --- cli --------------------------------------------------------------------

def check_cli_determinism(rng, quick):
    from .cli import main
    spec = json.dumps({"A": [[2]], "b": [0], "c": "-1/60", "d": [1]})
    cmds = (["eval", "--spec", spec, "--q", "0.2", "--prec", "30"],
            ["coeffs", "--spec", spec, "--order", "20"],
            ["solve", "--spec", spec, "--prec", "30"])
    bad = 0
    for argv in cmds:
        outs = []
        for _ in range(2):
            buf = io.StringIO()
            with contextlib.redirect_stdout(buf):
                main(argv)
            outs.append(buf.getvalue().encode())
        bad += outs[0] != outs[1]
    return bad == 0, f"{bad} of {len(cmds)} commands differ between runs"


CHECKS = (
    ("model", "Q periodicity and denominators", check_periodicity),
    ("model", "dual involution preserves PD", check_dual),
    ("specialfn", "cyclic dilog shift identity", check_shift_identity),
    ("specialfn", "change of zeta, exact form", check_change_of_zeta),
    ("specialfn", "change of zeta, congruence order", check_congruence_slope),
    ("specialfn", "change of zeta, Pochhammer form", check_change_of_zeta3),
    ("specialfn", "Dedekind reciprocity", check_dedekind),
    ("specialfn", "Bernoulli symmetry", check_bernoulli),
    ("qseries", "series vs numeric", check_series_numeric),
    ("qseries", "residue splitting", check_splitting),
    ("qseries", "bundled identities", check_identities),
    ("solver", "uniqueness from random starts", check_uniqueness),
    ("solver", "Lambda > 0", check_lambda_positive),
    ("solver", "duality observation", check_duality_lambda),
    ("asymptotics", "A~D symmetric positive definite", check_tilde_AD),
    ("asymptotics", "half-integer coefficients vanish", check_half_integer),
    ("asymptotics", "S at m = 1 equals I(0)", check_S_m1),
    ("asymptotics", "two forms of u", check_u_forms),
    ("asymptotics", "u^m Galois invariance", check_u_power),
    ("asymptotics", "k-summand periodic mod m", check_k_shift),
    ("asymptotics", "|chi| = 1 and G(Q, 0) = 1", check_units),
    ("scanner", "c-independence", check_c_independence),
    ("scanner", "table rows pass", check_table_rows),
    ("scanner", "monotone in precision", check_monotone_precision),
    ("transforms", "S compositions", check_S_composition),
    ("transforms", "T exact", check_T_exact),
    ("transforms", "S error shrinks with precision", check_S_convergence),
    ("cli", "byte determinism", check_cli_determinism),
)


def run(seed: int = 0, quick: bool = False, verbose: bool = True) -> int:
    """Run every check; 0 if all pass, 1 otherwise."""
    rng = random.Random(seed)
    failed = 0
    for module, name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            ok, detail = fn(rng, quick)
        except Exception as exc:  # a crash is a failure, not an abort
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        failed += not ok
        if verbose:
            dt = time.perf_counter() - t0
            print(f"{'PASS' if ok else 'FAIL'} [{module}] {name}: {detail} ({dt:.1f}s)", flush=True)
    if verbose:
        print(f"{len(CHECKS) - failed}/{len(CHECKS)} checks passed")
    return 0 if failed == 0 else 1
