"""Observable families, operational equivalences and the built-in scenarios.

An operational equivalence is a convex decomposition of the maximally mixed
state I/2 into projectors (I + alpha*A_t)/2 of one party's observables. The
same decomposition can be read on the preparation side (mixtures of pure
states) or the measurement side (a coarse-grained POVM), hence the ``side``
tag.

In JSON, observable indices in equivalence terms are 1-based.
"""
from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import (IDENTITY2, BlochVector, QubitObservable, anticorrelated_partner,
                      correlated_partner, observable_from_bloch)
from .errors import InvalidN, NonUnitBloch, ParseError, UnknownKind, ValidationError
from .exact import frac, frac_str

SIDES = ("preparation", "measurement")
PARTIES = ("alice", "bob")
GAMES = ("equality", "sum5")
STATES = ("phi_plus", "phi_minus", "psi_plus", "psi_minus")
BUILTIN_NAMES = ("33", "nn:<odd n>", "43", "34", "44")


@dataclass(frozen=True)
class Term:
    index: int  # 0-based observable index
    sign: int
    coeff: Fraction


@dataclass(frozen=True)
class OperationalEquivalence:
    side: str
    party: str
    terms: tuple[Term, ...]
    target: str = "half_identity"
    label: str = ""

    def __post_init__(self):
        if self.side not in SIDES:
            raise ValidationError(f"side must be one of {SIDES}, got {self.side!r}")
        if self.party not in PARTIES:
            raise ValidationError(f"party must be one of {PARTIES}, got {self.party!r}")
        if self.target != "half_identity":
            raise ValidationError(f"unsupported target {self.target!r}")
        if not self.terms:
            raise ValidationError("equivalence has no terms")
        for t in self.terms:
            if t.sign not in (1, -1):
                raise ValidationError(f"term sign must be +1 or -1, got {t.sign!r}")
            if t.coeff <= 0:
                raise ValidationError(f"term coefficient must be positive, got {t.coeff}")
        total = sum(t.coeff for t in self.terms)
        if total != 1:
            raise ValidationError(f"coefficients sum to {total}, not 1")

    @property
    def is_trivial(self) -> bool:
        """True for the (rho_t^+ + rho_t^-)/2 decomposition of one observable."""
        return (len(self.terms) == 2 and self.terms[0].index == self.terms[1].index
                and self.terms[0].sign != self.terms[1].sign)

    def bloch_weights(self, n: int) -> list[Fraction]:
        """w with sum_t w_t a_t = 0 required by this decomposition."""
        w = [Fraction(0)] * n
        for t in self.terms:
            w[t.index] += t.coeff * t.sign
        return w


@dataclass(frozen=True)
class ObservableFamily:
    name: str
    observables: tuple[QubitObservable, ...]
    params: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.observables)

    def __iter__(self):
        return iter(self.observables)

    def __getitem__(self, i) -> QubitObservable:
        return self.observables[i]

    @property
    def blochs(self) -> list[BlochVector]:
        return [o.bloch for o in self.observables]


@dataclass(frozen=True)
class Relation:
    """sum_t coeffs[t] * O_t = 0 over one party's observables."""

    party: str
    coeffs: tuple[int, ...]


@dataclass(frozen=True)
class OperationalScenario:
    name: str
    alice: ObservableFamily
    bob: ObservableFamily
    equivalences: tuple[OperationalEquivalence, ...] = ()
    relations: tuple[Relation, ...] = ()
    game: str = "equality"
    state: str = "phi_plus"

    def __post_init__(self):
        if self.game not in GAMES:
            raise ValidationError(f"game must be one of {GAMES}, got {self.game!r}")
        if self.state not in STATES:
            raise ValidationError(f"state must be one of {STATES}, got {self.state!r}")
        for eq in self.equivalences:
            n = len(self.family(eq.party))
            for t in eq.terms:
                if not 0 <= t.index < n:
                    raise ValidationError(
                        f"equivalence {eq.label or '?'} refers to {eq.party} observable "
                        f"{t.index + 1} but only {n} exist")
        for rel in self.relations:
            if rel.party not in PARTIES:
                raise ValidationError(f"relation party {rel.party!r} is unknown")
            if len(rel.coeffs) != len(self.family(rel.party)):
                raise ValidationError(
                    f"relation {list(rel.coeffs)} does not match {rel.party}'s "
                    f"{len(self.family(rel.party))} observables")

    def family(self, party: str) -> ObservableFamily:
        if party == "alice":
            return self.alice
        if party == "bob":
            return self.bob
        raise ValueError(f"unknown party {party!r}")

    def equivalences_for(self, side: str, party: str) -> list[OperationalEquivalence]:
        return [e for e in self.equivalences if e.side == side and e.party == party]

    def relations_for(self, party: str) -> list[tuple[int, ...]]:
        return [r.coeffs for r in self.relations if r.party == party]


# -- families ---------------------------------------------------------------

def _snap(v: float) -> float:
    # cos/sin of multiples of pi leave ~1e-16 residue that should be zero
    return 0.0 if abs(v) < 1e-15 else v


def odd_n_family(n: int) -> ObservableFamily:
    """n observables summing to zero: sigma_z plus n-1 at equal tilt below the equator.

    Members 2..n share z-component -1/(n-1) and spread their transverse parts
    at equally spaced azimuths, which makes the total Bloch sum vanish.
    """
    if not isinstance(n, int) or n < 3 or n % 2 == 0:
        raise InvalidN(f"n must be an odd integer >= 3, got {n!r}")
    z = -1.0 / (n - 1)
    r = math.sqrt(1.0 - z * z)
    obs = [QubitObservable(BlochVector(0.0, 0.0, 1.0))]
    for k in range(n - 1):
        phi = 2 * math.pi * k / (n - 1)
        v = BlochVector(_snap(r * math.cos(phi)), _snap(r * math.sin(phi)), z)
        obs.append(observable_from_bloch(v))
    return ObservableFamily(f"odd_n:{n}", tuple(obs), {"n": n, "transverse": r})


def trine_family() -> ObservableFamily:
    h = math.sqrt(3) / 2
    obs = (QubitObservable(BlochVector(0.0, 0.0, 1.0)),
           QubitObservable(BlochVector(h, 0.0, -0.5)),
           QubitObservable(BlochVector(-h, 0.0, -0.5)))
    return ObservableFamily("trine", obs, {"n": 3})


def sic_family() -> ObservableFamily:
    """Tetrahedral axes; A1 - A2 - A3 - A4 = 0."""
    s = 1 / math.sqrt(3)
    axes = ((1, 1, 1), (1, 1, -1), (1, -1, 1), (-1, 1, 1))
    return ObservableFamily(
        "sic", tuple(QubitObservable(BlochVector(s * x, s * y, s * z)) for x, y, z in axes))


def mub_family() -> ObservableFamily:
    return ObservableFamily("mub", (QubitObservable(BlochVector(1.0, 0.0, 0.0)),
                                    QubitObservable(BlochVector(0.0, 1.0, 0.0)),
                                    QubitObservable(BlochVector(0.0, 0.0, 1.0))))


def _mapped(family: ObservableFamily, fn, name: str) -> ObservableFamily:
    return ObservableFamily(name, tuple(fn(o) for o in family), dict(family.params))


# -- equivalences -----------------------------------------------------------

def trivial_equivalences(side: str, party: str, n: int) -> list[OperationalEquivalence]:
    half = Fraction(1, 2)
    return [OperationalEquivalence(side, party, (Term(t, 1, half), Term(t, -1, half)),
                                   label=f"trivial:{t + 1}")
            for t in range(n)]


def equivalences_from_relation(side: str, party: str,
                               signs: Sequence[int]) -> list[OperationalEquivalence]:
    """Both I/2 decompositions implied by sum_t s_t O_t = 0 with s_t in {-1, 0, 1}."""
    support = [t for t, s in enumerate(signs) if s]
    if not support or any(abs(signs[t]) != 1 for t in support):
        raise ValueError(f"relation {list(signs)} must have entries in {{-1, 0, 1}}")
    w = Fraction(1, len(support))
    out = []
    for flip, tag in ((1, "+"), (-1, "-")):
        terms = tuple(Term(t, flip * signs[t], w) for t in support)
        out.append(OperationalEquivalence(side, party, terms, label=f"nontrivial:{tag}"))
    return out


def _party_equivalences(side, party, n, relation=None):
    eqs = trivial_equivalences(side, party, n)
    if relation is not None:
        eqs += equivalences_from_relation(side, party, relation)
    return eqs


def _zero_sum_scenario(name: str, alice: ObservableFamily) -> OperationalScenario:
    n = len(alice)
    ones = (1,) * n
    bob = _mapped(alice, lambda o: anticorrelated_partner(o, "phi_plus"), f"{alice.name}:partner")
    eqs = (_party_equivalences("preparation", "alice", n, ones)
           + _party_equivalences("measurement", "alice", n, ones)
           + _party_equivalences("measurement", "bob", n, ones))
    return OperationalScenario(name, alice, bob, tuple(eqs), (Relation("bob", ones),),
                               game="equality", state="phi_plus")


def builtin_scenario(name: str) -> OperationalScenario:
    """Look up "33", "nn:<odd n>", "43", "34" or "44"."""
    tetra = (1, -1, -1, -1)
    if name == "33":
        return _zero_sum_scenario("33", trine_family())
    if name.startswith("nn:"):
        try:
            n = int(name[3:])
        except ValueError:
            raise InvalidN(f"cannot read n from {name!r}") from None
        return _zero_sum_scenario(f"nn:{n}", odd_n_family(n))
    if name == "43":
        alice = sic_family()
        bob = _mapped(mub_family(), lambda o: correlated_partner(o, "phi_plus"), "mub")
        eqs = (_party_equivalences("preparation", "alice", 4, tetra)
               + _party_equivalences("measurement", "alice", 4, tetra)
               + _party_equivalences("measurement", "bob", 3))
        return OperationalScenario("43", alice, bob, tuple(eqs), (Relation("alice", tetra),),
                                   game="sum5", state="phi_plus")
    if name == "34":
        alice = _mapped(mub_family(), lambda o: correlated_partner(o, "phi_plus"), "mub")
        bob = sic_family()
        eqs = (_party_equivalences("preparation", "alice", 3)
               + _party_equivalences("measurement", "alice", 3)
               + _party_equivalences("measurement", "bob", 4, tetra))
        return OperationalScenario("34", alice, bob, tuple(eqs), (Relation("bob", tetra),),
                                   game="sum5", state="phi_plus")
    if name == "44":
        sic = sic_family()
        eqs = (_party_equivalences("preparation", "alice", 4, tetra)
               + _party_equivalences("measurement", "alice", 4, tetra)
               + _party_equivalences("measurement", "bob", 4, tetra))
        return OperationalScenario("44", sic, sic, tuple(eqs),
                                   (Relation("alice", tetra), Relation("bob", tetra)),
                                   game="equality", state="psi_minus")
    raise UnknownKind(f"unknown scenario {name!r}; built-ins are {', '.join(BUILTIN_NAMES)}")


def catalog_names() -> list[str]:
    return ["33"] + [f"nn:{n}" for n in (3, 5, 7, 9, 11)] + ["43", "34", "44"]


def resolve_scenario(ref: str, tol: float = 1e-9) -> OperationalScenario:
    """A built-in id, or a path to a scenario JSON file."""
    if os.path.isfile(ref):
        with open(ref, encoding="utf-8") as fh:
            return scenario_from_json(fh.read(), tol=tol)
    return builtin_scenario(ref)


# -- verification -----------------------------------------------------------

@dataclass
class EquivalenceCheck:
    label: str
    side: str
    party: str
    residual: float
    passed: bool


@dataclass
class EquivalenceReport:
    max_residual: float
    per_constraint: list[EquivalenceCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.per_constraint)


def equivalence_residual(eq: OperationalEquivalence, family: ObservableFamily) -> float:
    """Max-entry norm of sum coeff*(I + alpha*A)/2 - I/2."""
    m = -0.5 * IDENTITY2
    for t in eq.terms:
        m = m + float(t.coeff) * 0.5 * (IDENTITY2 + t.sign * family[t.index].matrix)
    return float(np.max(np.abs(m)))


def verify_equivalences(s: OperationalScenario, tol: float = 1e-12) -> EquivalenceReport:
    checks = []
    for eq in s.equivalences:
        r = equivalence_residual(eq, s.family(eq.party))
        checks.append(EquivalenceCheck(eq.label, eq.side, eq.party, r, r <= tol))
    return EquivalenceReport(max((c.residual for c in checks), default=0.0), checks)


def relation_residual(coeffs: Sequence[int], family: ObservableFamily) -> float:
    v = sum((c * b.as_array() for c, b in zip(coeffs, family.blochs)), np.zeros(3))
    return float(np.linalg.norm(v))


def discover_relations(family: ObservableFamily, tol: float = 1e-10) -> list[tuple[int, ...]]:
    """Every s in {-1,0,1}^n, up to global sign, with |sum_t s_t a_t| <= tol.

    Smallest supports come first; ties keep lexicographic order.
    """
    n = len(family)
    if n > 8:
        raise ValueError(f"family of {n} observables is too large to scan")
    found = []
    for s in itertools.product((0, 1, -1), repeat=n):
        nz = [v for v in s if v]
        if not nz or nz[0] < 0:
            continue
        if relation_residual(s, family) <= tol:
            found.append(s)
    found.sort(key=lambda s: sum(map(abs, s)))
    return found


# -- JSON -------------------------------------------------------------------

def _family_to_dict(f: ObservableFamily) -> dict:
    return {"name": f.name, "observables": [{"bloch": list(o.bloch)} for o in f]}


def scenario_to_dict(s: OperationalScenario) -> dict:
    return {
        "name": s.name,
        "game": s.game,
        "state": s.state,
        "alice": _family_to_dict(s.alice),
        "bob": _family_to_dict(s.bob),
        "equivalences": [
            {"side": e.side, "party": e.party, "label": e.label,
             "terms": [{"index": t.index + 1, "sign": t.sign, "coeff": frac_str(t.coeff)}
                       for t in e.terms]}
            for e in s.equivalences],
        "relations": [{"party": r.party, "coeffs": list(r.coeffs)} for r in s.relations],
    }


def scenario_to_json(s: OperationalScenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2, ensure_ascii=False)


def _need(obj, key, kind, where):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"missing field {key!r}", where)
    val = obj[key]
    if not isinstance(val, kind) or isinstance(val, bool) and kind is not bool:
        raise ParseError(f"field {key!r} has type {type(val).__name__}", f"{where}.{key}")
    return val


def _family_from(obj, where) -> ObservableFamily:
    items = _need(obj, "observables", list, where)
    obs = []
    for i, item in enumerate(items):
        path = f"{where}.observables[{i}]"
        vec = _need(item, "bloch", list, path)
        if len(vec) != 3 or not all(isinstance(c, (int, float)) and not isinstance(c, bool)
                                    for c in vec):
            raise ParseError("bloch must be three numbers", f"{path}.bloch")
        try:
            obs.append(observable_from_bloch(vec))
        except (NonUnitBloch, ValueError) as exc:
            raise ValidationError(f"{path}: {exc}") from None
    name = obj.get("name", where)
    return ObservableFamily(str(name), tuple(obs))


def scenario_from_json(text: str, tol: float = 1e-9) -> OperationalScenario:
    """Parse and validate a scenario; equivalences and relations must hold within ``tol``."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    if not isinstance(data, dict):
        raise ParseError("top level must be an object", "$")
    name = _need(data, "name", str, "$")
    alice = _family_from(_need(data, "alice", dict, "$"), "alice")
    bob = _family_from(_need(data, "bob", dict, "$"), "bob")

    eqs = []
    for i, e in enumerate(data.get("equivalences", [])):
        path = f"equivalences[{i}]"
        side = _need(e, "side", str, path)
        party = _need(e, "party", str, path)
        terms = []
        for k, t in enumerate(_need(e, "terms", list, path)):
            tp = f"{path}.terms[{k}]"
            idx = _need(t, "index", int, tp)
            sign = _need(t, "sign", int, tp)
            raw = _need(t, "coeff", (str, int), tp)
            try:
                coeff = frac(raw)
            except (ValueError, ZeroDivisionError):
                raise ParseError(f"cannot read rational {raw!r}", f"{tp}.coeff") from None
            terms.append(Term(idx - 1, sign, coeff))
        eqs.append(OperationalEquivalence(side, party, tuple(terms), label=e.get("label", "")))

    rels = []
    for i, r in enumerate(data.get("relations", [])):
        path = f"relations[{i}]"
        if isinstance(r, list):
            party, coeffs = "alice", r
        else:
            party = _need(r, "party", str, path)
            coeffs = _need(r, "coeffs", list, path)
        if not all(isinstance(c, int) and not isinstance(c, bool) for c in coeffs):
            raise ParseError("relation coefficients must be integers", path)
        rels.append(Relation(party, tuple(coeffs)))

    s = OperationalScenario(name, alice, bob, tuple(eqs), tuple(rels),
                            game=data.get("game", "equality"),
                            state=data.get("state", "phi_plus"))
    report = verify_equivalences(s, tol)
    if not report.passed:
        bad = [c.label or "?" for c in report.per_constraint if not c.passed]
        raise ValidationError(f"equivalences fail at tol {tol:g}: {bad} "
                              f"(max residual {report.max_residual:.3g})")
    for r in s.relations:
        res = relation_residual(r.coeffs, s.family(r.party))
        if res > tol:
            raise ValidationError(f"relation {list(r.coeffs)} on {r.party} has residual {res:.3g}")
    return s
