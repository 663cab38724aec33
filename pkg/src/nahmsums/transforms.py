"""Numerical checks of vector-valued modular transformation laws.

A vector system is a list of components q^c_j * sum_t q^(p_t) f_t(q), where
each f_t is a (possibly congruence-restricted) Nahm sum.  Two laws are
checked: T-consistency, which is exact (every exponent of a component lies
in one class modulo 1), and an S-relation

    lhs(-1/tau) = scale * S * rhs(tau / k),

sampled on the imaginary axis.  Systems and relations ship as JSON presets
with exact rationals and symbolic matrix entries a1, -a4, ... standing for
alpha_k = sqrt(coef_sq) * sin(k pi / n)^power.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import mpmath
from mpmath import mp

from .errors import InconsistentExponents
from .lattice import points
from .model import CongruenceConstraint, NahmData, as_fraction, constraints_from_json, quadratic_form
from .qseries import eval_numeric
from .specialfn import GUARD, to_mpf

PRESETS = ("rr", "kr", "b2inv", "dualpair")
PRESET_DIR = Path(__file__).parent / "data" / "presets"


@dataclass(frozen=True)
class Term:
    data: NahmData
    constraints: tuple[CongruenceConstraint, ...] = ()
    power: Fraction = Fraction(0)
    coef: Fraction = Fraction(1)


@dataclass(frozen=True)
class Component:
    c: Fraction
    terms: tuple[Term, ...]


@dataclass(frozen=True)
class VectorSystem:
    name: str
    components: tuple[Component, ...]
    T: tuple[Fraction, ...] | None = None        # declared multipliers e(T_j)

    @classmethod
    def from_json(cls, name: str, obj: dict) -> "VectorSystem":
        comps = []
        for comp in obj["components"]:
            terms = []
            for t in comp["terms"]:
                data = NahmData.make(t.get("A", obj.get("A")), t["b"], 0, t.get("d", obj.get("d")))
                terms.append(Term(data, constraints_from_json(t.get("constraints")),
                                  as_fraction(t.get("power", 0)), as_fraction(t.get("coef", 1))))
            comps.append(Component(as_fraction(comp["c"]), tuple(terms)))
        T = tuple(as_fraction(x) for x in obj["T"]) if "T" in obj else None
        return cls(name, tuple(comps), T)


@dataclass(frozen=True)
class Relation:
    """lhs(-1/tau) = scale * S * rhs(tau / k)."""
    lhs: str
    rhs: str
    k: int
    scale: Fraction
    alpha: dict
    S_symbolic: tuple[tuple[str, ...], ...]

    @classmethod
    def from_json(cls, obj: dict) -> "Relation":
        return cls(obj["lhs"], obj["rhs"], int(obj["k"]), as_fraction(obj.get("scale", 1)),
                   dict(obj["alpha"]), tuple(tuple(r) for r in obj["S"]))

    def alpha_value(self, j: int):
        a = self.alpha
        return mpmath.sqrt(to_mpf(as_fraction(a["coef_sq"]))) * \
            mpmath.sin(j * mpmath.pi / int(a["n"])) ** int(a.get("power", 1))

    def S(self) -> mpmath.matrix:
        """The numeric matrix at the current working precision."""
        n = len(self.S_symbolic)
        M = mpmath.matrix(n, n)
        for i, row in enumerate(self.S_symbolic):
            for j, entry in enumerate(row):
                M[i, j] = _entry_value(entry, self.alpha_value)
        return M


def _entry_value(entry: str, alpha):
    s = entry.strip()
    sign = 1
    if s.startswith("-"):
        sign, s = -1, s[1:]
    if s.startswith("a"):
        return sign * alpha(int(s[1:]))
    return sign * to_mpf(as_fraction(s))


@dataclass(frozen=True)
class Preset:
    name: str
    systems: dict
    relations: tuple[Relation, ...]


def load_preset(name_or_path: str | Path) -> Preset:
    p = Path(name_or_path)
    if p.suffix == ".json" and p.exists():
        obj = json.loads(p.read_text())
    else:
        obj = json.loads((PRESET_DIR / f"{name_or_path}.json").read_text())
    systems = {k: VectorSystem.from_json(k, v) for k, v in obj["systems"].items()}
    return Preset(obj.get("name", p.stem), systems, tuple(Relation.from_json(r) for r in obj["relations"]))


# --- evaluation -------------------------------------------------------------

def eval_component(sys: VectorSystem, j: int, tau, prec: int = 60):
    """q^c_j * sum_t coef_t q^(p_t) f_t(q) at q = e(tau), tau = i t."""
    tau = mpmath.mpmathify(tau)
    comp = sys.components[j]
    with mp.workdps(prec + GUARD):
        total = mpmath.mpf(0)
        for t in comp.terms:
            # the prefactor q^(c + p) exceeds 1 only mildly for the sampled tau
            res = eval_numeric(t.data, t.constraints, tau=tau, prec=prec + 5)
            total += to_mpf(t.coef) * _qpow(tau, t.power) * res.value
        out = _qpow(tau, comp.c) * total
    with mp.workdps(prec):
        return +out


def _qpow(tau, x: Fraction):
    if x == 0:
        return mpmath.mpf(1)
    v = mpmath.exp(2j * mpmath.pi * tau * to_mpf(x))
    return mpmath.re(v) if mpmath.re(tau) == 0 else v


def eval_vector(sys: VectorSystem, tau, prec: int = 60) -> list:
    return [eval_component(sys, j, tau, prec) for j in range(len(sys.components))]


# --- T ----------------------------------------------------------------------

@dataclass(frozen=True)
class TReport:
    system: str
    multipliers: tuple[Fraction, ...]       # exponent classes in [0, 1)
    declared: tuple[Fraction, ...] | None
    matches: bool

    def as_json(self) -> dict:
        return {"system": self.system,
                "multipliers": [str(x) for x in self.multipliers],
                "declared": None if self.declared is None else [str(x % 1) for x in self.declared],
                "matches": self.matches}


def exponent_class(comp: Component, bound: int = 30) -> Fraction:
    """The common class of c + p + Q(n) modulo 1 over the admitted lattice points."""
    cls = None
    for t in comp.terms:
        for n in points(t.data, Fraction(bound), t.constraints):
            x = (comp.c + t.power + quadratic_form(t.data, n)) % 1
            if cls is None:
                cls = x
            elif x != cls:
                raise InconsistentExponents(f"exponents {cls} and {x} differ modulo 1 at n = {n}")
    if cls is None:
        raise InconsistentExponents("no lattice points below the bound")
    return cls


def verify_T(sys: VectorSystem, bound: int = 30) -> TReport:
    """Exact T-check: each component is an eigenvector of tau -> tau + 1."""
    mult = tuple(exponent_class(c, bound) for c in sys.components)
    matches = sys.T is None or all(m == t % 1 for m, t in zip(mult, sys.T))
    return TReport(sys.name, mult, sys.T, matches)


# --- S ----------------------------------------------------------------------

@dataclass
class TransformReport:
    relation: str
    taus: list
    abs_errors: list = field(default_factory=list)      # per tau, per component
    rel_errors: list = field(default_factory=list)
    max_error: object = None
    orthogonality: object = None                        # max |S S^T - I| entry

    def as_json(self) -> dict:
        f = lambda x: mpmath.nstr(x, 5)  # noqa: E731
        return {"relation": self.relation,
                "tau": [mpmath.nstr(t, 10) for t in self.taus],
                "abs_errors": [[f(x) for x in row] for row in self.abs_errors],
                "rel_errors": [[f(x) for x in row] for row in self.rel_errors],
                "max_error": f(self.max_error),
                "S_orthogonality": f(self.orthogonality)}


def s_orthogonality(rel: Relation):
    """max |S S^T - I|; the sine-form matrices are orthogonal."""
    S = rel.S()
    n = S.rows
    P = S * S.T
    return max(abs(P[i, j] - (1 if i == j else 0)) for i in range(n) for j in range(n))


def verify_S(preset: Preset, rel: Relation, taus: Sequence = (0.8, 1.0, 1.3), prec: int = 60,
             ) -> TransformReport:
    """max_j |lhs_j(-1/tau) - scale (S rhs(tau/k))_j| over tau = i*t for t in ``taus``.

    ``taus`` holds the imaginary parts (or full purely imaginary values).
    """
    lhs, rhs = preset.systems[rel.lhs], preset.systems[rel.rhs]
    rep = TransformReport(f"{rel.lhs}(-1/tau) = {rel.scale} S {rel.rhs}(tau/{rel.k})", [])
    with mp.workdps(prec + GUARD):
        S = rel.S()
        worst = mpmath.mpf(0)
        for t in taus:
            t = mpmath.mpmathify(t)
            tau = t if mpmath.im(t) > 0 else mpmath.mpc(0, t)
            rep.taus.append(tau)
            left = eval_vector(lhs, -1 / tau, prec + 5)
            right_in = eval_vector(rhs, tau / rel.k, prec + 5)
            right = S * mpmath.matrix(right_in) * to_mpf(rel.scale)
            ab = [abs(left[i] - right[i]) for i in range(len(left))]
            rl = [a / abs(left[i]) for i, a in enumerate(ab)]
            rep.abs_errors.append(ab)
            rep.rel_errors.append(rl)
            worst = max(worst, max(ab))
        rep.max_error = worst
        rep.orthogonality = s_orthogonality(rel)
    return rep


def verify_preset(name: str, taus: Sequence = (0.8, 1.0, 1.3), prec: int = 60) -> dict:
    """T and S reports for every system and relation of a preset."""
    preset = load_preset(name)
    t_reports = [verify_T(s) for s in preset.systems.values()]
    s_reports = [verify_S(preset, r, taus, prec) for r in preset.relations]
    with mp.workdps(prec):
        max_err = max(r.max_error for r in s_reports)
    return {"preset": preset.name,
            "T": [r.as_json() for r in t_reports],
            "S": [r.as_json() for r in s_reports],
            "max_error": mpmath.nstr(max_err, 5),
            "_max_error": max_err,
            "T_ok": all(r.matches for r in t_reports)}


def composition_defect(preset: Preset):
    """max |M - I| over the matrix compositions of a preset.

    A relation from a system to itself must have S S^T = I; a pair of
    relations g -> h and h -> g must compose to the identity,
    scale * scale' * S S' = I.
    """
    worst = mpmath.mpf(0)
    for r in preset.relations:
        if r.lhs == r.rhs:
            worst = max(worst, s_orthogonality(r))
            continue
        for r2 in preset.relations:
            if (r2.lhs, r2.rhs) == (r.rhs, r.lhs):
                M = r.S() * r2.S() * to_mpf(r.scale * r2.scale)
                n = M.rows
                worst = max(worst, max(abs(M[i, j] - (1 if i == j else 0))
                                       for i in range(n) for j in range(n)))
    return worst
