import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from contextgames.algebra import (TwoQubitState, expectation,
                                  maximally_entangled_state, random_observable,
                                  random_pure_state, tensor_product)
from contextgames.bounds import bound_report, preset_strategy
from contextgames.errors import DimensionMismatch, OutOfRange
from contextgames.games import (TIERS, GameReport, GameSpec, QuantumStrategy, bell_of_game,
                                classify_probability, classify_window, outcome_distribution,
                                quantum_bell_value, success_from_bell, success_probability)
from contextgames.scenarios import builtin_scenario

F = Fraction
SHAPES = [(3, 3, "equality"), (5, 5, "equality"), (4, 3, "sum5"), (3, 4, "sum5"),
          (4, 4, "equality")]


def random_strategy(rng, n_x, n_y):
    return QuantumStrategy(tuple(random_observable(rng) for _ in range(n_x)),
                           tuple(random_observable(rng) for _ in range(n_y)),
                           random_pure_state(rng))


def test_equality_matrix():
    m = bell_of_game(GameSpec(3, 3)).coefficients
    assert m == ((-1, 1, 1), (1, -1, 1), (1, 1, -1))


def test_sum5_matrices():
    m43 = bell_of_game(GameSpec(4, 3, "sum5"))
    minus = {(x + 1, y + 1) for x, row in enumerate(m43.coefficients)
             for y, v in enumerate(row) if v == -1}
    assert minus == {(4, 1), (3, 2), (2, 3)}
    m34 = bell_of_game(GameSpec(3, 4, "sum5"))
    assert m34.coefficients == m43.transpose().coefficients
    assert m34.name == "beta_34"


def test_game_validation():
    with pytest.raises(ValueError):
        GameSpec(3, 3, "parity")
    with pytest.raises(ValueError):
        GameSpec(0, 3)


def test_predicate_is_total():
    for n_x, n_y, pred in SHAPES:
        g = GameSpec(n_x, n_y, pred)
        for x in range(1, n_x + 1):
            for y in range(1, n_y + 1):
                wins = [(a, b) for a in (1, -1) for b in (1, -1) if g.wins(x, y, a, b)]
                # exactly one parity wins: two of the four output pairs
                assert len(wins) == 2 and len({a * b for a, b in wins}) == 1


def test_trine_success_probability():
    s = builtin_scenario("33")
    p = success_probability(GameSpec(3, 3), preset_strategy(s))
    assert p == pytest.approx(5 / 6, abs=1e-12)


def test_four_three_success_probability():
    s = builtin_scenario("43")
    p = success_probability(GameSpec(4, 3, "sum5"), preset_strategy(s))
    assert p == pytest.approx((1 + 1 / math.sqrt(3)) / 2, abs=1e-12)


def test_mixed_state_gives_half(rng):
    mixed = TwoQubitState(np.eye(4) / 4)
    for n_x, n_y, pred in SHAPES:
        strat = random_strategy(rng, n_x, n_y)
        strat = QuantumStrategy(strat.alice, strat.bob, mixed)
        assert success_probability(GameSpec(n_x, n_y, pred), strat) == \
            pytest.approx(0.5, abs=1e-15)


def test_dimension_mismatch(rng):
    strat = random_strategy(rng, 3, 3)
    with pytest.raises(DimensionMismatch):
        success_probability(GameSpec(4, 3, "sum5"), strat)


def test_success_from_bell_examples():
    assert success_from_bell(GameSpec(3, 3), 4) == F(13, 18)
    for n in (3, 5, 7):
        g = GameSpec(n, n)
        assert success_from_bell(g, 2 * n) == F(1, 2) + F(1, n)
        assert success_from_bell(g, 2 * n - 2) == F(1, 2) + F(1, n) - F(1, n * n)
    assert isinstance(success_from_bell(GameSpec(3, 3), 4.5), float)
    with pytest.raises(OutOfRange):
        success_from_bell(GameSpec(3, 3), 10)


def test_moment_identity_and_decomposition(rng):
    for n_x, n_y, pred in SHAPES:
        g = GameSpec(n_x, n_y, pred)
        for _ in range(40):
            strat = random_strategy(rng, n_x, n_y)
            beta = quantum_bell_value(g, strat)
            assert abs(success_probability(g, strat) - success_from_bell(g, beta)) <= 1e-12
            x, y = int(rng.integers(1, n_x + 1)), int(rng.integers(1, n_y + 1))
            dist = outcome_distribution(strat, x, y)
            assert abs(sum(dist.values()) - 1) <= 1e-12
            ax, by = strat.alice[x - 1], strat.bob[y - 1]
            rho = strat.state
            ma = expectation(rho, tensor_product(ax, np.eye(2)))
            mb = expectation(rho, tensor_product(np.eye(2), by))
            corr = expectation(rho, tensor_product(ax, by))
            for (a, b), p in dist.items():
                assert abs(p - (1 + a * ma + b * mb + a * b * corr) / 4) <= 1e-12


@pytest.mark.parametrize("p,tier", [(0.75, "contextual_not_nonlocal"),
                                    (0.8333, "nonlocal"), (0.70, "classical")])
def test_window_examples(p, tier):
    v = classify_probability(p, F(13, 18), F(7, 9))
    assert v.tier == tier and not v.boundary


def test_window_boundary_flag():
    v = classify_probability(13 / 18, F(13, 18), F(7, 9))
    assert v.tier == "classical" and v.boundary
    v = classify_probability(13 / 18 + 1e-6, F(13, 18), F(7, 9))
    assert v.tier == "contextual_not_nonlocal" and not v.boundary


@given(st.floats(0, 1), st.floats(0, 1))
def test_window_is_monotone(p, q):
    lo, hi = sorted((p, q))
    a = classify_probability(lo, F(13, 18), F(7, 9))
    b = classify_probability(hi, F(13, 18), F(7, 9))
    assert TIERS.index(a.tier) <= TIERS.index(b.tier)


def test_classify_window_against_report():
    s = builtin_scenario("33")
    rep = bound_report(s)
    v = classify_window(GameSpec(3, 3), preset_strategy(s), rep)
    assert v.tier == "nonlocal"
    assert v.margin_local == pytest.approx(5 / 6 - 7 / 9, abs=1e-12)


def test_four_four_window_is_classical_on_the_boundary():
    s = builtin_scenario("44")
    rep = bound_report(s)
    v = classify_window(GameSpec(4, 4), preset_strategy(s), rep)
    assert v.tier == "classical" and v.boundary


def test_game_report_json():
    rep = bound_report(builtin_scenario("43"))
    gr = GameReport("43", rep.p_quantum, rep.p_local, rep.p_unc, rep.window).to_dict()
    assert gr["game"] == "43" and gr["window"] == "nonlocal"
    assert 0 <= gr["p_unc"] <= gr["p_local"] <= 1


def test_single_qubit_maximally_mixed_marginals():
    phi = maximally_entangled_state("phi_plus")
    preset = preset_strategy(builtin_scenario("33"))
    strat = QuantumStrategy(preset.alice, preset.bob, phi)
    dist = outcome_distribution(strat, 1, 2)
    assert sum(p for (a, _), p in dist.items() if a == 1) == pytest.approx(0.5, abs=1e-15)


def test_public_surface():
    import contextgames
    for name in ("local_bound", "constrained_bound", "quantum_seesaw",
                 "preparation_feasibility", "bell_of_game", "scenario_from_json"):
        assert hasattr(contextgames, name)
