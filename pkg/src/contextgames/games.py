"""Two-party communication games with binary outputs and their Bell expressions.

With outputs a, b in {-1, +1} and a win rule that fixes the parity ab for each
input pair, P(a, b|x, y) = (1 + a<A_x> + b<B_y> + ab<A_x B_y>)/4 makes the
average success probability depend only on the correlators:

    P_win = 1/2 + beta / (2 n_x n_y),   beta = sum_xy M_xy <A_x B_y>

where M_xy = +1 if the win needs a = b and -1 if it needs a != b.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import (QubitObservable, TwoQubitState, bell_operator, expectation,
                      projector_of)
from .errors import DimensionMismatch, OutOfRange

PREDICATES = ("equality", "sum5")
TIERS = ("classical", "contextual_not_nonlocal", "nonlocal")
WINDOW_MARGIN = 1e-9


@dataclass(frozen=True)
class BellExpression:
    name: str
    coefficients: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.coefficients)
        if not rows or not rows[0] or any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("coefficient matrix must be a non-empty rectangle")
        object.__setattr__(self, "coefficients", rows)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.coefficients), len(self.coefficients[0])

    def as_array(self) -> np.ndarray:
        return np.array(self.coefficients, dtype=float)

    def value(self, a: Sequence, b: Sequence):
        """a^T M b for scalar (classical) strategies; exact on Fractions."""
        return sum(m * a[x] * b[y] for x, row in enumerate(self.coefficients)
                   for y, m in enumerate(row) if m)

    def transpose(self, name: str | None = None) -> "BellExpression":
        return BellExpression(name or f"{self.name}^T", tuple(zip(*self.coefficients)))


@dataclass(frozen=True)
class GameSpec:
    """Inputs x in 1..n_x and y in 1..n_y; outputs a, b in {-1, +1}.

    equality: win iff (x = y and a != b) or (x != y and a = b)
    sum5:     win iff (x + y = 5 and a != b) or (x + y != 5 and a = b)
    """

    n_x: int
    n_y: int
    predicate: str = "equality"

    def __post_init__(self):
        if self.predicate not in PREDICATES:
            raise ValueError(f"unknown predicate {self.predicate!r}")
        if self.n_x < 1 or self.n_y < 1:
            raise ValueError("input alphabets must be non-empty")

    def must_differ(self, x: int, y: int) -> bool:
        if self.predicate == "equality":
            return x == y
        return x + y == 5

    def wins(self, x: int, y: int, a: int, b: int) -> bool:
        return (a != b) == self.must_differ(x, y)

    @property
    def name(self) -> str:
        return f"{self.predicate}_{self.n_x}x{self.n_y}"


@dataclass(frozen=True, eq=False)
class QuantumStrategy:
    alice: tuple[QubitObservable, ...]
    bob: tuple[QubitObservable, ...]
    state: TwoQubitState


def bell_of_game(g: GameSpec) -> BellExpression:
    coeffs = tuple(tuple(-1 if g.must_differ(x, y) else 1 for y in range(1, g.n_y + 1))
                   for x in range(1, g.n_x + 1))
    return BellExpression(f"beta_{g.n_x}{g.n_y}" if g.n_x < 10 and g.n_y < 10
                          else f"beta_{g.n_x}_{g.n_y}", coeffs)


def game_for(n_x: int, n_y: int, predicate: str) -> GameSpec:
    return GameSpec(n_x, n_y, predicate)


def _check(g: GameSpec, strat: QuantumStrategy) -> None:
    if len(strat.alice) != g.n_x or len(strat.bob) != g.n_y:
        raise DimensionMismatch(
            f"strategy has {len(strat.alice)}x{len(strat.bob)} settings, game needs "
            f"{g.n_x}x{g.n_y}")


def _projector_stack(settings: Sequence[QubitObservable]) -> np.ndarray:
    # [setting, outcome (+1 then -1), 2, 2]
    return np.array([[projector_of(o, a).matrix for a in (1, -1)] for o in settings])


def _joint_table(state: TwoQubitState, pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
    # Tr[rho (Pa x Pb)] with rho indexed as [i k, j l] = rho4[i, k, j, l]
    rho4 = state.matrix.reshape(2, 2, 2, 2)
    return np.einsum("ikjl,xaji,yblk->xyab", rho4, pa, pb).real


def outcome_distribution(strat: QuantumStrategy, x: int, y: int) -> dict[tuple[int, int], float]:
    """P(a, b|x, y) from projector products; x and y are 1-based."""
    pa = _projector_stack([strat.alice[x - 1]])
    pb = _projector_stack([strat.bob[y - 1]])
    probs = _joint_table(strat.state, pa, pb)[0, 0]
    return {(a, b): float(probs[i, j])
            for i, a in enumerate((1, -1)) for j, b in enumerate((1, -1))}


def success_probability(g: GameSpec, strat: QuantumStrategy) -> float:
    _check(g, strat)
    table = _joint_table(strat.state, _projector_stack(strat.alice), _projector_stack(strat.bob))
    total = 0.0
    for x in range(g.n_x):
        for y in range(g.n_y):
            # equal outputs sit on the diagonal of the 2x2 outcome block
            same = table[x, y, 0, 0] + table[x, y, 1, 1]
            total += 1.0 - same if g.must_differ(x + 1, y + 1) else same
    return total / (g.n_x * g.n_y)


def success_from_bell(g: GameSpec, beta):
    """1/2 + beta/(2 n_x n_y); exact when beta is an int or Fraction."""
    bound = g.n_x * g.n_y
    if abs(beta) > bound + 1e-12:
        raise OutOfRange(f"Bell value {beta} outside [-{bound}, {bound}]")
    if isinstance(beta, (int, Fraction)):
        return Fraction(1, 2) + Fraction(beta) / (2 * bound)
    return 0.5 + float(beta) / (2 * bound)


def quantum_bell_value(g: GameSpec, strat: QuantumStrategy) -> float:
    _check(g, strat)
    return expectation(strat.state, bell_operator(bell_of_game(g), strat.alice, strat.bob))


@dataclass
class WindowVerdict:
    tier: str
    p: float
    p_unc: float
    p_local: float
    margin_unc: float    # p - p_unc
    margin_local: float  # p - p_local
    boundary: bool       # p lies within WINDOW_MARGIN of a threshold


def classify_probability(p: float, p_unc, p_local, margin: float = WINDOW_MARGIN) -> WindowVerdict:
    """Strictly exceeding a threshold (by more than ``margin``) moves up a tier."""
    p_unc, p_local = float(p_unc), float(p_local)
    if p > p_local + margin:
        tier = "nonlocal"
    elif p > p_unc + margin:
        tier = "contextual_not_nonlocal"
    else:
        tier = "classical"
    boundary = abs(p - p_unc) <= margin or abs(p - p_local) <= margin
    return WindowVerdict(tier, p, p_unc, p_local, p - p_unc, p - p_local, boundary)


def classify_window(g: GameSpec, strat: QuantumStrategy, bounds) -> WindowVerdict:
    """Place the strategy's success probability against a bound report's thresholds."""
    p = success_probability(g, strat)
    return classify_probability(p, success_from_bell(g, bounds.unc),
                                success_from_bell(g, bounds.local))


@dataclass
class GameReport:
    game: str
    p_quantum: float
    p_local: Fraction
    p_unc: Fraction
    window: WindowVerdict

    def to_dict(self) -> dict:
        return {"game": self.game, "p_quantum": self.p_quantum,
                "p_local": float(self.p_local), "p_unc": float(self.p_unc),
                "window": self.window.tier, "boundary": self.window.boundary}
