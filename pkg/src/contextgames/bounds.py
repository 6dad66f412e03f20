"""Local, constrained (noncontextual) and quantum tiers of Bell expressions.

Local and constrained bounds are exact rationals. The constrained bound is a
bilinear maximum over two polytopes; for a fixed vertex on one side the other
side is a linear program, so vertex enumeration plus an exact LP per vertex
gives the global maximum.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .algebra import (PAULIS, QubitObservable, TwoQubitState, bell_operator, expectation,
                      max_eigenvalue_hermitian, maximally_entangled_state, observable_from_bloch,
                      partial_trace_a, partial_trace_b, random_unit_bloch)
from .errors import DimensionMismatch, EmptyPolytope, NoEquivalences, TooLarge
from .exact import box_vertices, frac_str, solve_lp
from .games import (BellExpression, GameSpec, QuantumStrategy, WindowVerdict,
                    bell_of_game, classify_probability, success_from_bell)
from .ontology import response_rows
from .scenarios import OperationalScenario

MAX_LOCAL_SETTINGS = 24
SEESAW_TOL = 1e-12
SEESAW_MAX_ITER = 500
# slack for float round-off in the monotonicity check
MONOTONE_SLACK = 1e-10


@dataclass(frozen=True)
class StrategyPolytope:
    """The box [-1, 1]^n cut by homogeneous integer relations sum_k r_k v_k = 0."""

    dim: int
    relations: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("polytope dimension must be at least 1")
        rels = tuple(tuple(int(v) for v in r) for r in self.relations)
        if any(len(r) != self.dim for r in rels):
            raise DimensionMismatch(f"relation length does not match dimension {self.dim}")
        object.__setattr__(self, "relations", rels)

    @property
    def is_box(self) -> bool:
        return not self.relations

    @cached_property
    def vertices(self) -> list[tuple[Fraction, ...]]:
        return box_vertices([-1] * self.dim, [1] * self.dim, self.relations,
                            [0] * len(self.relations))

    def contains(self, v: Sequence[Fraction]) -> bool:
        return (len(v) == self.dim and all(-1 <= x <= 1 for x in v)
                and all(sum(r * x for r, x in zip(rel, v)) == 0 for rel in self.relations))


def polytope_for(s: OperationalScenario, party: str) -> StrategyPolytope:
    return StrategyPolytope(len(s.family(party)),
                            tuple(s.relations_for(party)))


def local_bound(expr: BellExpression):
    """max a^T M b over sign vectors; returns ``(value, (a, b))``.

    The smaller side is enumerated and the other side answers with signs of
    the induced linear form (+1 on zero). Ties keep the first maximizer found.
    """
    n_a, n_b = expr.shape
    if n_a + n_b > MAX_LOCAL_SETTINGS:
        raise TooLarge(f"{n_a}+{n_b} settings exceed {MAX_LOCAL_SETTINGS}")
    m = expr.coefficients
    cols = list(zip(*m))
    best = None
    if n_a <= n_b:
        for a in itertools.product((1, -1), repeat=n_a):
            form = [sum(ai * c for ai, c in zip(a, col)) for col in cols]
            b = tuple(1 if f >= 0 else -1 for f in form)
            val = sum(abs(f) for f in form)
            if best is None or val > best[0]:
                best = (val, a, b)
    else:
        for b in itertools.product((1, -1), repeat=n_b):
            form = [sum(bi * c for bi, c in zip(b, row)) for row in m]
            a = tuple(1 if f >= 0 else -1 for f in form)
            val = sum(abs(f) for f in form)
            if best is None or val > best[0]:
                best = (val, a, b)
    return Fraction(best[0]), (best[1], best[2])


def _best_response(form: Sequence[Fraction], poly: StrategyPolytope):
    """Maximize form . v over the polytope; returns ``(value, v)``."""
    if poly.is_box:
        v = tuple(Fraction(1) if f >= 0 else Fraction(-1) for f in form)
        return sum(abs(f) for f in form), v
    # shift v = u - 1 so that u lies in [0, 2] with nonnegative variables
    n = poly.dim
    a_eq = [list(r) for r in poly.relations]
    b_eq = [sum(r) for r in poly.relations]
    a_ub = [[int(i == k) for i in range(n)] for k in range(n)]
    res = solve_lp(list(form), a_eq, b_eq, a_ub, [2] * n, maximize=True)
    if res.status != "optimal":
        raise EmptyPolytope("constrained polytope has no points")
    v = tuple(u - 1 for u in res.x)
    return res.value - sum(form), v


def constrained_bound(expr: BellExpression, poly_a: StrategyPolytope, poly_b: StrategyPolytope):
    """max a^T M b over a in poly_a, b in poly_b; returns ``(value, (a, b))``.

    Vertices of the side carrying relations are enumerated (Alice when both
    or neither do, unless Bob is the smaller box) and the other side is
    solved exactly.
    """
    n_a, n_b = expr.shape
    if poly_a.dim != n_a or poly_b.dim != n_b:
        raise DimensionMismatch(f"polytopes {poly_a.dim}x{poly_b.dim} vs expression {n_a}x{n_b}")
    m = [[Fraction(v) for v in row] for row in expr.coefficients]
    enumerate_alice = not poly_a.is_box or (poly_b.is_box and n_a <= n_b)
    if enumerate_alice:
        outer, inner, mat = poly_a, poly_b, m
    else:
        outer, inner, mat = poly_b, poly_a, [list(col) for col in zip(*m)]
    verts = outer.vertices
    if not verts:
        raise EmptyPolytope("constrained polytope has no vertices")
    # scale the coefficients to integers once; each vertex then contracts as
    # integer numerators over a common denominator
    mscale = math.lcm(*(x.denominator for row in mat for x in row))
    imat = [[int(x * mscale) for x in row] for row in mat]
    best = None
    for v in verts:
        den = math.lcm(*(Fraction(vi).denominator for vi in v))
        nums = [int(vi * den) for vi in v]
        form = [Fraction(sum(q * row[k] for q, row in zip(nums, imat) if q), den * mscale)
                for k in range(inner.dim)]
        val, w = _best_response(form, inner)
        if best is None or val > best[0]:
            best = (val, v, w)
    val, v, w = best
    a, b = (v, w) if enumerate_alice else (w, v)
    return val, (a, b)


def quantum_value_at(expr: BellExpression, alice: Sequence[QubitObservable],
                     bob: Sequence[QubitObservable], state: TwoQubitState) -> float:
    return expectation(state, bell_operator(expr, alice, bob))


def preset_strategy(s: OperationalScenario) -> QuantumStrategy:
    """The scenario's own families on its preset maximally entangled state."""
    return QuantumStrategy(tuple(s.alice.observables), tuple(s.bob.observables),
                           maximally_entangled_state(s.state))


# -- seesaw -----------------------------------------------------------------

@dataclass
class SeesawResult:
    value: float
    alice: tuple[QubitObservable, ...]
    bob: tuple[QubitObservable, ...]
    state: TwoQubitState
    runs: list[float]       # final value of every restart
    history: list[float]    # value sequence of the best restart


def _sigma(v) -> np.ndarray:
    return v[0] * PAULIS[0] + v[1] * PAULIS[1] + v[2] * PAULIS[2]


def _combine(coeffs, bloch: np.ndarray) -> np.ndarray:
    """sum_k coeffs[k] (bloch[k] . sigma)"""
    return _sigma(np.asarray(coeffs, dtype=float) @ bloch)


def _align(reduced: np.ndarray, previous: np.ndarray) -> np.ndarray:
    r = np.array([np.trace(reduced @ p).real for p in PAULIS])
    norm = np.linalg.norm(r)
    return previous if norm < 1e-14 else r / norm


# kron(sigma_i, sigma_j) for i, j in x, y, z
_PAULI_PAIRS = np.array([[np.kron(p, q) for q in PAULIS] for p in PAULIS])


def _operator(m: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """sum_xy M_xy (a_x . sigma) (x) (b_y . sigma) via the 3x3 correlation a^T M b."""
    return np.einsum("ij,ijkl->kl", a.T @ m @ b, _PAULI_PAIRS)


def _seesaw_run(m: np.ndarray, a: np.ndarray, b: np.ndarray, max_iter: int, tol: float):
    eye = np.eye(2, dtype=complex)
    history = []
    value = -math.inf
    rho = None
    for _ in range(max_iter):
        _, vec = max_eigenvalue_hermitian(_operator(m, a, b))
        rho = np.outer(vec, vec.conj())
        for x in range(m.shape[0]):
            c = _combine(m[x], b)
            a[x] = _align(partial_trace_b(np.kron(eye, c) @ rho), a[x])
        for y in range(m.shape[1]):
            d = _combine(m[:, y], a)
            b[y] = _align(partial_trace_a(np.kron(d, eye) @ rho), b[y])
        new = float(np.trace(rho @ _operator(m, a, b)).real)
        assert new >= value - MONOTONE_SLACK, f"seesaw value decreased: {value} -> {new}"
        history.append(new)
        done = new - value < tol
        value = new
        if done:
            break
    return value, a, b, rho, history


def quantum_seesaw(expr: BellExpression, restarts: int = 20, seed: int = 0,
                   max_iter: int = SEESAW_MAX_ITER, tol: float = SEESAW_TOL) -> SeesawResult:
    """Alternating ascent over state and settings, best of ``restarts`` random starts."""
    if restarts < 1:
        raise ValueError("need at least one restart")
    m = expr.as_array()
    n_a, n_b = expr.shape
    rng = np.random.default_rng(seed)
    best = None
    runs = []
    for _ in range(restarts):
        a = np.array([random_unit_bloch(rng).as_array() for _ in range(n_a)])
        b = np.array([random_unit_bloch(rng).as_array() for _ in range(n_b)])
        out = _seesaw_run(m, a, b, max_iter, tol)
        runs.append(out[0])
        if best is None or out[0] > best[0]:
            best = out
    value, a, b, rho, history = best
    return SeesawResult(value,
                        tuple(observable_from_bloch(v) for v in a),
                        tuple(observable_from_bloch(v) for v in b),
                        TwoQubitState(rho, "seesaw"), runs, history)


# -- perfect-correlation score ----------------------------------------------

def delta_quantum(s: OperationalScenario, pairing: Sequence[int] | None = None,
                  party: str = "alice") -> float:
    """(1/2n) sum_t sum_alpha Tr[rho_t^alpha P_pi(t)^alpha] with pi the identity by default."""
    family = s.family(party)
    n = len(family)
    pairing = list(range(n)) if pairing is None else list(pairing)
    if len(pairing) != n:
        raise DimensionMismatch(f"pairing has {len(pairing)} entries for {n} measurements")
    total = 0.0
    for t, u in enumerate(pairing):
        overlap = family[t].bloch.dot(family[u].bloch)
        # Tr[rho^+ P^+] + Tr[rho^- P^-] = 1 + a_t . a_u
        total += 1 + overlap
    return total / (2 * n)


@dataclass
class UncBoundCertificate:
    eta: tuple[Fraction, ...]   # max(xi_t, 1 - xi_t) at the attaining vertex
    xi: tuple[Fraction, ...]    # the response vertex itself

    def to_dict(self) -> dict:
        return {"eta": [frac_str(v) for v in self.eta], "xi": [frac_str(v) for v in self.xi]}


def delta_unc_bound(s: OperationalScenario, party: str = "alice"):
    """Exact max of (1/n) sum_t max(xi_t, 1 - xi_t) over noncontextual responses."""
    eqs = s.equivalences_for("measurement", party)
    if not eqs:
        raise NoEquivalences(f"scenario {s.name!r} has no measurement equivalences for {party}")
    n = len(s.family(party))
    rows, rhs, _ = response_rows(eqs, n)
    verts = box_vertices([0] * n, [1] * n, rows, rhs)
    if not verts:
        raise EmptyPolytope(f"measurement constraints of {s.name!r} admit no response")
    best = None
    for xi in verts:
        eta = tuple(max(v, 1 - v) for v in xi)
        val = sum(eta) / n
        if best is None or val > best[0]:
            best = (val, UncBoundCertificate(eta, xi))
    return best


# -- reports ----------------------------------------------------------------

def unc_label(s: OperationalScenario) -> str:
    """Constraints only on Alice's side are preparation-derived ("pnc")."""
    if s.relations_for("alice") and not s.relations_for("bob"):
        return "pnc"
    return "unc"


@dataclass
class BoundReport:
    scenario: str
    expr: BellExpression
    game: GameSpec
    local: Fraction
    local_argmax: tuple
    unc: Fraction
    unc_argmax: tuple
    unc_label: str
    quantum: float
    strategy: QuantumStrategy
    state_label: str
    seesaw: SeesawResult | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def p_local(self) -> Fraction:
        return success_from_bell(self.game, self.local)

    @property
    def p_unc(self) -> Fraction:
        return success_from_bell(self.game, self.unc)

    @property
    def p_quantum(self) -> float:
        return float(success_from_bell(self.game, self.quantum))

    @property
    def window(self) -> WindowVerdict:
        return classify_probability(self.p_quantum, self.p_unc, self.p_local)

    def to_dict(self) -> dict:
        def bloch(obs):
            return [obs.bloch.x, obs.bloch.y, obs.bloch.z]

        out = {
            "expr": self.expr.name,
            "scenario": self.scenario,
            "local": frac_str(self.local),
            "local_argmax": {"a": list(self.local_argmax[0]), "b": list(self.local_argmax[1])},
            "unc": frac_str(self.unc),
            "unc_label": self.unc_label,
            "unc_argmax": {"a": [frac_str(v) for v in self.unc_argmax[0]],
                           "b": [frac_str(v) for v in self.unc_argmax[1]]},
            "quantum": self.quantum,
            "settings": {"alice": [bloch(o) for o in self.strategy.alice],
                         "bob": [bloch(o) for o in self.strategy.bob]},
            "state": self.state_label,
        }
        if self.seesaw is not None:
            out["seesaw"] = {"value": self.seesaw.value, "restarts": len(self.seesaw.runs),
                             "alice": [bloch(o) for o in self.seesaw.alice],
                             "bob": [bloch(o) for o in self.seesaw.bob]}
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def bound_report(s: OperationalScenario, restarts: int = 0, seed: int = 0) -> BoundReport:
    """All three tiers for the scenario's game; a seesaw runs when ``restarts`` > 0."""
    game = GameSpec(len(s.alice), len(s.bob), s.game)
    expr = bell_of_game(game)
    local, local_arg = local_bound(expr)
    unc, unc_arg = constrained_bound(expr, polytope_for(s, "alice"), polytope_for(s, "bob"))
    strat = preset_strategy(s)
    quantum = quantum_value_at(expr, strat.alice, strat.bob, strat.state)
    seesaw = quantum_seesaw(expr, restarts, seed) if restarts > 0 else None
    notes = []
    if seesaw is not None and seesaw.value > quantum + 1e-8:
        notes.append(f"seesaw value {seesaw.value!r} exceeds the preset-strategy value")
    return BoundReport(s.name, expr, game, local, local_arg, unc, unc_arg, unc_label(s),
                       quantum, strat, s.state, seesaw, notes)
