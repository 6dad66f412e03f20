"""Exact feasibility of noncontextual ontological models over sign cells.

The ontic space for n dichotomic measurements is the set of sign patterns
lambda in {+,-}^n. A pure state rho_t^alpha may only put weight on cells with
lambda_t = alpha, which encodes mu(lambda|rho_t^+) mu(lambda|rho_t^-) = 0.
Any model whose supports separate orthogonal pairs coarse-grains onto these
cells; that coarse-graining is an assumption of this module, not a theorem.

Preparation side: one distribution per pure state, shared by every procedure,
and a single nu(lambda) equal to every listed decomposition of I/2.

Measurement side: per cell, response xi_t = xi(+|t, lambda) in [0, 1] with
xi(-|t, lambda) = 1 - xi_t, and every listed POVM decomposition of I/2 must
respond with 1/2. The constraints do not depend on the cell, so one cell
decides the whole question.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import DimensionMismatch, NoEquivalences, TooLarge
from .exact import frac, frac_str, solve_lp, verify_farkas
from .scenarios import OperationalEquivalence, OperationalScenario

HALF = Fraction(1, 2)
MAX_MEASUREMENTS = 12


def sign_label(cell: Sequence[int]) -> str:
    return "".join("+" if v > 0 else "-" for v in cell)


@dataclass(frozen=True)
class OnticSpace:
    n: int
    cells: tuple[tuple[int, ...], ...]

    def __len__(self):
        return len(self.cells)

    def support(self, t: int, alpha: int) -> list[int]:
        """Indices of cells where measurement t reads alpha."""
        return [i for i, c in enumerate(self.cells) if c[t] == alpha]


def build_assignment_space(n: int) -> OnticSpace:
    """All 2^n sign patterns in binary order with + as 0, first position most significant."""
    if n < 1:
        raise ValueError(f"need at least one measurement, got {n}")
    if n > MAX_MEASUREMENTS:
        raise TooLarge(f"{n} measurements exceed the limit of {MAX_MEASUREMENTS}")
    return OnticSpace(n, tuple(itertools.product((1, -1), repeat=n)))


@dataclass
class FeasibilityProblem:
    scenario: str
    side: str
    mode: str
    party: str
    variables: list[str]
    a_eq: list[list[Fraction]]
    b_eq: list[Fraction]
    eq_names: list[str]
    a_ub: list[list[Fraction]] = field(default_factory=list)
    b_ub: list[Fraction] = field(default_factory=list)
    ub_names: list[str] = field(default_factory=list)

    def violations(self, x: Sequence[Fraction]) -> list[str]:
        """Names of rows that ``x`` breaks, evaluated exactly."""
        bad = [f"{v} >= 0" for v, xi in zip(self.variables, x) if xi < 0]
        for row, b, name in zip(self.a_eq, self.b_eq, self.eq_names):
            if sum((r * xi for r, xi in zip(row, x) if r), Fraction(0)) != b:
                bad.append(name)
        for row, b, name in zip(self.a_ub, self.b_ub, self.ub_names):
            if sum((r * xi for r, xi in zip(row, x) if r), Fraction(0)) > b:
                bad.append(name)
        return bad


@dataclass
class FeasibilityVerdict:
    status: str  # "feasible" or "infeasible"
    problem: FeasibilityProblem
    witness: dict[str, Fraction] | None = None
    # Farkas multipliers (LP) or an exhaustive refutation table (deterministic scan)
    certificate: dict | None = None

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"

    def verify(self) -> bool:
        """Re-check the witness or certificate in exact arithmetic."""
        p = self.problem
        if self.feasible:
            if self.witness is None:
                return False
            x = [frac(self.witness[v]) for v in p.variables]
            if p.mode == "deterministic" and any(v not in (0, 1) for v in x):
                return False
            return not p.violations(x)
        cert = self.certificate or {}
        if cert.get("kind") == "farkas":
            return verify_farkas(cert, p.a_eq, p.b_eq, p.a_ub, p.b_ub)
        if cert.get("kind") == "exhaustive":
            seen = set()
            for entry in cert["refutations"]:
                x = tuple(Fraction(v) for v in entry["assignment"])
                if entry["violated"] not in p.violations(list(x)):
                    return False
                seen.add(x)
            return seen == set(itertools.product((Fraction(0), Fraction(1)),
                                                 repeat=len(p.variables)))
        return False

    def to_dict(self) -> dict:
        out = {"status": self.status, "scenario": self.problem.scenario,
               "side": self.problem.side, "mode": self.problem.mode,
               "party": self.problem.party}
        if self.witness is not None:
            out["witness"] = {k: frac_str(v) for k, v in self.witness.items() if v != 0}
        if self.certificate is not None:
            cert = self.certificate
            if cert["kind"] == "farkas":
                names = self.problem.eq_names + self.problem.ub_names
                mults = list(cert["eq"]) + list(cert["ub"])
                out["certificate"] = [{"row": name, "multiplier": frac_str(m)}
                                      for name, m in zip(names, mults) if m != 0]
            else:
                out["certificate"] = [
                    {"assignment": [int(v) for v in e["assignment"]], "violated": e["violated"]}
                    for e in cert["refutations"]]
        return out


def _var_index(names: list[str]) -> dict[str, int]:
    return {v: i for i, v in enumerate(names)}


def _state_label(t: int, alpha: int) -> str:
    return f"{t + 1}{'+' if alpha > 0 else '-'}"


def compile_preparation(s: OperationalScenario, party: str = "alice") -> FeasibilityProblem:
    eqs = s.equivalences_for("preparation", party)
    if not eqs:
        raise NoEquivalences(f"scenario {s.name!r} has no preparation equivalences for {party}")
    n = len(s.family(party))
    space = build_assignment_space(n)
    names = []
    for t in range(n):
        for alpha in (1, -1):
            names += [f"mu[{_state_label(t, alpha)}]({sign_label(space.cells[i])})"
                      for i in space.support(t, alpha)]
    names += [f"nu({sign_label(c)})" for c in space.cells]
    index = _var_index(names)
    width = len(names)

    a_eq, b_eq, eq_names = [], [], []
    for t in range(n):
        for alpha in (1, -1):
            row = [Fraction(0)] * width
            for i in space.support(t, alpha):
                row[index[f"mu[{_state_label(t, alpha)}]({sign_label(space.cells[i])})"]] = Fraction(1)
            a_eq.append(row)
            b_eq.append(Fraction(1))
            eq_names.append(f"normalize mu[{_state_label(t, alpha)}]")
    for k, eq in enumerate(eqs):
        for cell in space.cells:
            lab = sign_label(cell)
            row = [Fraction(0)] * width
            row[index[f"nu({lab})"]] = Fraction(1)
            for term in eq.terms:
                # outside the support the distribution is identically zero
                if cell[term.index] == term.sign:
                    row[index[f"mu[{_state_label(term.index, term.sign)}]({lab})"]] -= term.coeff
            a_eq.append(row)
            b_eq.append(Fraction(0))
            eq_names.append(f"{eq.label or f'equivalence {k + 1}'} at {lab}")
    return FeasibilityProblem(s.name, "preparation", "indeterministic", party,
                              names, a_eq, b_eq, eq_names)


def response_rows(eqs: Sequence[OperationalEquivalence], n: int):
    """Linear rows over xi_1..xi_n for each POVM decomposition of I/2.

    sum coeff * xi(alpha|t) = 1/2 with xi(-|t) = 1 - xi_t. Decompositions that
    reduce to 0 = 0 (the trivial ones) are dropped.
    """
    rows, rhs, names = [], [], []
    for k, eq in enumerate(eqs):
        row = [Fraction(0)] * n
        b = HALF
        for term in eq.terms:
            if term.sign > 0:
                row[term.index] += term.coeff
            else:
                row[term.index] -= term.coeff
                b -= term.coeff
        if not any(row) and b == 0:
            continue
        rows.append(row)
        rhs.append(b)
        names.append(eq.label or f"equivalence {k + 1}")
    return rows, rhs, names


def _default_measurement_party(s: OperationalScenario) -> str:
    for party in ("alice", "bob"):
        if any(not e.is_trivial for e in s.equivalences_for("measurement", party)):
            return party
    for party in ("alice", "bob"):
        if s.equivalences_for("measurement", party):
            return party
    raise NoEquivalences(f"scenario {s.name!r} has no measurement equivalences")


def compile_measurement(s: OperationalScenario, mode: str = "indeterministic",
                        party: str | None = None) -> FeasibilityProblem:
    if mode not in ("deterministic", "indeterministic"):
        raise ValueError(f"unknown mode {mode!r}")
    party = party or _default_measurement_party(s)
    eqs = s.equivalences_for("measurement", party)
    if not eqs:
        raise NoEquivalences(f"scenario {s.name!r} has no measurement equivalences for {party}")
    n = len(s.family(party))
    names = [f"xi[{t + 1}]" for t in range(n)]
    a_eq, b_eq, eq_names = response_rows(eqs, n)
    a_ub = [[Fraction(int(k == t)) for k in range(n)] for t in range(n)]
    return FeasibilityProblem(s.name, "measurement", mode, party, names, a_eq, b_eq, eq_names,
                              a_ub, [Fraction(1)] * n, [f"xi[{t + 1}] <= 1" for t in range(n)])


def _decide_lp(problem: FeasibilityProblem) -> FeasibilityVerdict:
    res = solve_lp(None, problem.a_eq, problem.b_eq, problem.a_ub, problem.b_ub,
                   n=len(problem.variables))
    if res.status == "optimal":
        return FeasibilityVerdict("feasible", problem, witness=dict(zip(problem.variables, res.x)))
    cert = dict(res.certificate)
    cert["kind"] = "farkas"
    return FeasibilityVerdict("infeasible", problem, certificate=cert)


def preparation_feasibility(s: OperationalScenario, party: str = "alice") -> FeasibilityVerdict:
    """Can pure-state and mixed-state preparation noncontextuality hold together?"""
    return _decide_lp(compile_preparation(s, party))


def measurement_feasibility(s: OperationalScenario, mode: str = "indeterministic",
                            party: str | None = None) -> FeasibilityVerdict:
    problem = compile_measurement(s, mode, party)
    if mode == "indeterministic":
        return _decide_lp(problem)
    refutations = []
    for bits in itertools.product((0, 1), repeat=len(problem.variables)):
        x = [Fraction(b) for b in bits]
        bad = problem.violations(x)
        if not bad:
            return FeasibilityVerdict("feasible", problem, witness=dict(zip(problem.variables, x)))
        refutations.append({"assignment": bits, "violated": bad[0]})
    return FeasibilityVerdict("infeasible", problem,
                              certificate={"kind": "exhaustive", "refutations": refutations})


# -- ontological models and the Born rule -----------------------------------

@dataclass
class OntologicalModel:
    """Epistemic states mu[(t, alpha)] and responses xi[t] (probability of +), per cell."""

    space: OnticSpace
    mu: dict[tuple[int, int], tuple[Fraction, ...]]
    xi: tuple[tuple[Fraction, ...], ...]

    def predict(self, t: int, alpha: int, t_meas: int, beta: int) -> Fraction:
        w = self.mu[(t, alpha)]
        resp = self.xi[t_meas]
        return sum((wi * (r if beta > 0 else 1 - r) for wi, r in zip(w, resp) if wi),
                   Fraction(0))


def uniform_model(n: int, response=HALF) -> OntologicalModel:
    space = build_assignment_space(n)
    w = tuple([Fraction(1, len(space))] * len(space))
    mu = {(t, a): w for t in range(n) for a in (1, -1)}
    return OntologicalModel(space, mu, tuple(tuple([frac(response)] * len(space))
                                             for _ in range(n)))


def born_rule_residual(model: OntologicalModel, s: OperationalScenario, party: str = "alice",
                       pairs: Sequence[tuple[int, int, int, int]] | None = None) -> float:
    """max |sum_lambda mu(lambda) xi(lambda) - Tr[rho P]| over preparation/effect pairs.

    ``pairs`` restricts the comparison to (t, alpha, t', beta) tuples meaning
    the state rho_t^alpha measured with the effect P_t'^beta.
    """
    family = s.family(party)
    n = len(family)
    if model.space.n != n or len(model.xi) != n:
        raise DimensionMismatch(f"model has {model.space.n} measurements, scenario {n}")
    if set(model.mu) != {(t, a) for t in range(n) for a in (1, -1)}:
        raise DimensionMismatch("model must give a distribution for every pure state")
    if any(len(w) != len(model.space) for w in model.mu.values()) or \
            any(len(r) != len(model.space) for r in model.xi):
        raise DimensionMismatch("per-cell tables do not match the ontic space")
    if pairs is None:
        pairs = [(t, a, u, b) for t in range(n) for a in (1, -1)
                 for u in range(n) for b in (1, -1)]
    worst = 0.0
    for t, a, u, b in pairs:
        quantum = 0.5 * (1 + a * b * family[t].bloch.dot(family[u].bloch))
        worst = max(worst, abs(float(model.predict(t, a, u, b)) - quantum))
    return worst


def predictability_model(s: OperationalScenario, party: str = "alice"):
    """Noncontextual model maximizing the average perfect-correlation score.

    Imposes the trivial preparation equivalences (one nu for every t) and the
    party's measurement equivalences; solved by exact LPs per cell and then
    over nu. Returns ``(model, score)``.
    """
    eqs = s.equivalences_for("measurement", party)
    if not eqs:
        raise NoEquivalences(f"scenario {s.name!r} has no measurement equivalences for {party}")
    n = len(s.family(party))
    space = build_assignment_space(n)
    a_eq, b_eq, _ = response_rows(eqs, n)
    a_ub = [[Fraction(int(k == t)) for k in range(n)] for t in range(n)]
    b_ub = [Fraction(1)] * n
    cell_xi, cell_score = [], []
    for cell in space.cells:
        c = [Fraction(v) for v in cell]
        res = solve_lp(c, a_eq, b_eq, a_ub, b_ub, maximize=True)
        if res.status != "optimal":
            raise NoEquivalences(f"measurement constraints of {s.name!r} are infeasible")
        const = sum(1 for v in cell if v < 0)
        cell_xi.append(res.x)
        cell_score.append((res.value + const) / n)

    # nu must give each measurement's + region probability 1/2 so every mu normalizes
    m = len(space)
    rows = [[Fraction(1)] * m] + [[Fraction(int(cell[t] > 0)) for cell in space.cells]
                                  for t in range(n)]
    res = solve_lp(cell_score, rows, [Fraction(1)] + [HALF] * n, maximize=True)
    nu = res.x
    mu = {(t, a): tuple(2 * nu[i] if space.cells[i][t] == a else Fraction(0) for i in range(m))
          for t in range(n) for a in (1, -1)}
    xi = tuple(tuple(cell_xi[i][t] for i in range(m)) for t in range(n))
    return OntologicalModel(space, mu, xi), res.value
