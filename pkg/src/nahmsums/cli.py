"""Command-line entry point: ``nahmsums <subcommand> ...``.

Every JSON document printed carries ``"schema": 1``.  Exit status is 0 on
success, 1 when a verification fails and 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import mpmath
from mpmath import mp

from . import __version__
from .errors import NahmError
from .model import as_fraction, nahm_from_json

SCHEMA = 1

SCHEMA_HELP = """\
NahmData JSON:
  {"A": [[num or "p/q", ...], ...], "b": [...], "c": "p/q", "d": [ints],
   "constraints": [{"i": index (1-based), "r": residue, "s": modulus}, ...]}
--spec accepts a file path or an inline JSON object.
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n\n{SCHEMA_HELP}")
        sys.exit(2)


def _load_spec(text: str):
    if text.lstrip().startswith("{"):
        obj = json.loads(text)
    else:
        obj = json.loads(Path(text).read_text())
    return nahm_from_json(obj)


def _floats(text: str) -> list:
    return [mpmath.mpmathify(as_fraction(x.strip())) if "/" in x else mpmath.mpf(x.strip())
            for x in text.split(",") if x.strip()]


def _fractions(text: str) -> list[Fraction]:
    return [as_fraction(x.strip()) for x in text.split(",") if x.strip()]


def _emit(obj: dict) -> None:
    out = {"schema": SCHEMA}
    out.update(obj)
    sys.stdout.write(json.dumps(out, indent=2, sort_keys=False) + "\n")


def _nstr(x, digits):
    return mpmath.nstr(x, digits)


# --- subcommands -------------------------------------------------------------

def cmd_eval(args) -> int:
    from .qseries import eval_numeric
    data, cons = _load_spec(args.spec)
    with mp.workdps(args.prec + 10):
        if args.tau is not None:
            tau = mpmath.mpmathify(args.tau)
            if "j" not in args.tau:
                tau = mpmath.mpc(0, tau)
            res = eval_numeric(data, cons, tau=tau, prec=args.prec)
        else:
            q = mpmath.mpmathify(as_fraction(args.q)) if "/" in args.q else mpmath.mpf(args.q)
            res = eval_numeric(data, cons, q, prec=args.prec)
        _emit({"data": data.to_json(), "value": _nstr(res.value, args.prec),
               "truncation_bound": _nstr(res.truncation_bound, 5), "terms": res.terms})
    return 0


def cmd_coeffs(args) -> int:
    from .qseries import nahm_series
    data, cons = _load_spec(args.spec)
    s = nahm_series(data, cons, as_fraction(args.order))
    coeffs = {str(x): str(c) for x, c in s.nonzero().items()}
    _emit({"data": data.to_json(), "order": str(s.order), "denominator": s.den,
           "coefficients": coeffs})
    return 0


def cmd_identity(args) -> int:
    from .qseries import bundled_identities, load_identity
    paths = []
    if args.all:
        paths = bundled_identities()
    if args.file:
        p = Path(args.file)
        if not p.exists():
            cand = [b for b in bundled_identities() if b.stem == args.file]
            if not cand:
                raise SystemExit(f"no identity file or bundled identity named {args.file!r}")
            p = cand[0]
        paths.append(p)
    if not paths:
        raise _UsageError("identity: give --file or --all")
    ok = True
    for p in paths:
        ident = load_identity(p)
        for rep in ident.verify(args.order):
            print(rep)
            ok &= rep.verified
    return 0 if ok else 1


def cmd_solve(args) -> int:
    from .solver import detect_rational, solve_nahm
    data, _ = _load_spec(args.spec)
    sol = solve_nahm(data, args.prec)
    with mp.workdps(args.prec):
        lam_q = detect_rational(sol.lam, max_den=args.max_den)
        out = sol.as_json(args.digits)
    out["lambda_rational"] = None if lam_q is None else str(lam_q)
    out["iterations"] = sol.iterations
    _emit({"data": data.to_json(), **out})
    return 0


def cmd_asympt(args) -> int:
    from .asymptotics import asymptotic_expansion, predict_radial
    data, _ = _load_spec(args.spec)
    alpha = as_fraction(args.alpha)
    eps = _fractions(args.eps)
    exp_ = asymptotic_expansion(data, alpha, args.order, args.prec)
    rep = predict_radial(data, alpha, eps, args.order, args.prec)
    with mp.workdps(args.prec):
        S = [_nstr(c, 20) for c in exp_.S.c]
        out = {"data": data.to_json(), "alpha": str(alpha), "K": args.order,
               "Lambda": _nstr(exp_.Lambda, 30),
               "prefactor": _nstr(exp_.prefactor, 30),
               "S_coeffs": S,
               "branch_warning": exp_.branch_warning,
               "radial": rep.as_json()}
    _emit(out)
    if args.tol is not None:
        ok = all(x < mpmath.mpf(args.tol) for x in rep.rel_errors)
        return 0 if ok else 1
    return 0


def cmd_scan(args) -> int:
    from .scanner import scan, write_csv
    d = [int(x) for x in args.d.split(",")]
    if len(d) != args.rank:
        raise _UsageError("--d must have --rank entries")
    thr = None if args.threshold is None else as_fraction(args.threshold)
    recs = scan(args.rank, d, args.height, args.b_height, thr, args.prec,
                N_base=args.n_base, b_den=args.b_den, K=args.order, workers=args.threads)
    if args.out and args.out != "-":
        with open(args.out, "w", newline="") as fh:
            write_csv(recs, fh)
        print(f"{sum(1 for r in recs if r.error is None)} candidates written to {args.out}")
    else:
        sys.stdout.write(write_csv(recs))
    for r in recs:
        if r.error:
            print(f"error: {r.data}: {r.error}", file=sys.stderr)
    return 0


def cmd_verify_transform(args) -> int:
    from .transforms import verify_preset
    taus = _floats(args.tau)
    rep = verify_preset(args.preset, taus, args.prec)
    err = rep.pop("_max_error")
    tol = mpmath.mpf(args.tol) if args.tol is not None else mpmath.mpf(10) ** (-(args.prec // 5))
    rep["tolerance"] = _nstr(tol, 3)
    rep["verified"] = bool(rep["T_ok"] and err < tol)
    _emit(rep)
    return 0 if rep["verified"] else 1


def cmd_selftest(args) -> int:
    from .selftest import run
    return run(seed=args.seed, quick=args.quick, verbose=not args.quiet)


class _UsageError(Exception):
    pass


# --- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nahmsums", description="Nahm sums: evaluation, identities, asymptotics, "
                "modularity scans and transformation checks.", epilog=SCHEMA_HELP,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=f"nahmsums {__version__}")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def common(sp, prec=60):
        sp.add_argument("--prec", type=int, default=prec, help="decimal digits (default %(default)s)")
        return sp

    sp = common(sub.add_parser("eval", help="evaluate f_Q(q) with a certified tail"))
    sp.add_argument("--spec", required=True)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--q", help="real q in (-1, 1), decimal or p/q")
    g.add_argument("--tau", help="Im tau (q = e^(2 pi i tau)) or a complex 'x+yj'")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("coeffs", help="exact q-expansion coefficients")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--order", default="50", help="truncation order (rational)")
    sp.set_defaults(func=cmd_coeffs)

    sp = sub.add_parser("identity", help="verify identity files coefficientwise")
    sp.add_argument("--file", help="identity JSON or the name of a bundled identity")
    sp.add_argument("--all", action="store_true", help="every bundled identity")
    sp.add_argument("--order", type=int, default=None, help="override the file's order")
    sp.set_defaults(func=cmd_identity)

    sp = common(sub.add_parser("solve", help="solve Nahm's equation, Lambda and lambda"))
    sp.add_argument("--spec", required=True)
    sp.add_argument("--max-den", type=int, default=1000)
    sp.add_argument("--digits", type=int, default=30)
    sp.set_defaults(func=cmd_solve)

    sp = common(sub.add_parser("asympt", help="asymptotic expansion at a root of unity"), 40)
    sp.add_argument("--spec", required=True)
    sp.add_argument("--alpha", default="0")
    sp.add_argument("--order", type=int, default=3, help="series order K")
    sp.add_argument("--eps", default="1/40,1/60,1/80")
    sp.add_argument("--tol", default=None, help="exit 1 if a relative error exceeds this")
    sp.set_defaults(func=cmd_asympt)

    sp = common(sub.add_parser("scan", help="third-difference search for modular candidates"))
    sp.add_argument("--rank", type=int, required=True, choices=(2, 3))
    sp.add_argument("--d", required=True, help="symmetrizer, e.g. 1,2")
    sp.add_argument("--height", type=int, default=4)
    sp.add_argument("--b-height", type=int, default=2)
    sp.add_argument("--b-den", type=int, default=None, help="b grid denominator (default lcm(2, d))")
    sp.add_argument("--threshold", default=None, help="default 10^-min(12, prec/2)")
    sp.add_argument("--n-base", type=int, default=20)
    sp.add_argument("--order", type=int, default=3, help="series order K for c estimates")
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_scan)

    sp = common(sub.add_parser("verify-transform", help="T and S checks for a vector system"))
    sp.add_argument("--preset", required=True, help="rr, kr, b2inv, dualpair or a JSON path")
    sp.add_argument("--tau", default="0.8,1.0,1.3", help="imaginary parts of the sample points")
    sp.add_argument("--tol", default=None, help="default 10^(-prec/5)")
    sp.set_defaults(func=cmd_verify_transform)

    sp = sub.add_parser("selftest", help="run the invariant and property suite")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--quick", action="store_true", help="skip the slow table-wide checks")
    sp.add_argument("--quiet", action="store_true")
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "prec", 20) < 20:
        parser.error("--prec must be at least 20")
    if args.cmd in ("asympt", "scan") and args.order < 1:
        parser.error("--order must be at least 1")
    try:
        return args.func(args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"nahmsums: error: {exc}\n\n{SCHEMA_HELP}")
        return 2
    except (json.JSONDecodeError, FileNotFoundError, KeyError, ValueError) as exc:
        sys.stderr.write(f"nahmsums: invalid input: {exc}\n\n{SCHEMA_HELP}")
        return 2
    except NahmError as exc:
        sys.stderr.write(f"nahmsums: {type(exc).__name__}: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
