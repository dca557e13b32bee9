from __future__ import annotations

import pytest
from hypothesis import given

from lazyimprove.convertibility import lazy_targets
from lazyimprove.game_model import (
    CyclicPreferenceError,
    GameInstance,
    GameTree,
    Leaf,
    PreferenceRelation,
    induced_play,
)
from lazyimprove.generators import fixture, linear_family
from lazyimprove.measures import eq_indicator, game_avoided, potential, potentials, profile_avoided

from conftest import random_games


def test_worked_example_game_level_counts() -> None:
    fx = fixture("avoided-outcomes-worked")
    assert game_avoided(fx.instance.tree) == {"a": 5, "b": 3}


def test_worked_example_profile_table() -> None:
    fx = fixture("avoided-outcomes-worked")
    tab = profile_avoided(fx.instance.tree, fx.profiles[0])
    assert tab.row("a") == {"x": 1, "y": 0, "z": 1, "t": 3}
    assert tab.row("b") == {"x": 0, "y": 2, "z": 1, "t": 0}
    assert tab.game_delta == {"a": 5, "b": 3}


def test_worked_example_potential() -> None:
    # heights y=1 z=2 x=3 t=4: 2*1 + 0*0 + 1*1 + 3*3
    fx = fixture("avoided-outcomes-worked")
    pv = potential(fx.instance, fx.profiles[0], "a")
    assert pv.value == 12
    assert pv.bound == 15


def test_single_leaf_tables_are_zero() -> None:
    tree = GameTree(Leaf("x"))
    s = next(tree.all_profiles())
    assert game_avoided(tree, ["a"]) == {"a": 0}
    assert profile_avoided(tree, s, ["a"]).row("a") == {"x": 0}


@pytest.mark.parametrize("n", range(6))
def test_linear_family_counts(n: int) -> None:
    g, s0 = linear_family(n)
    assert game_avoided(g.tree) == {"a": n, "b": n + 1}
    assert g.height("a") == g.height("b") == 2


def test_potential_refuses_cyclic_player() -> None:
    tree = GameTree(Leaf("x"))
    cyc = PreferenceRelation("n", frozenset({("x", "y"), ("y", "x")}))
    g = GameInstance(tree, ("n",), ("x", "y"), {"n": cyc})
    with pytest.raises(CyclicPreferenceError):
        potential(g, next(tree.all_profiles()), "n")


def test_eq_indicator() -> None:
    assert eq_indicator("x", "x") == 1 and eq_indicator("x", "y") == 0


@given(random_games())
def test_avoided_counts_sum_to_leaves_minus_one(game) -> None:
    g, _ = game
    assert 1 + sum(game_avoided(g.tree, g.players).values()) == g.tree.leaf_count


@given(random_games())
def test_profile_rows_sum_to_game_counts(game) -> None:
    g, s0 = game
    avoided = game_avoided(g.tree, g.players)
    tab = profile_avoided(g.tree, s0, g.players)
    assert all(tab.row_sum(a) == avoided[a] for a in g.players)


@given(random_games())
def test_lazy_conversion_conservation(game) -> None:
    g, s = game
    tree = g.tree
    tab = profile_avoided(tree, s, g.players)
    v_s = induced_play(tree, s).outcome
    for a in g.players:
        for m in lazy_targets(tree, s, a):
            new = profile_avoided(tree, m.target, g.players)
            for o in g.outcomes:
                for b in g.players:
                    if b != a:
                        assert new.get(b, o) == tab.get(b, o)
                assert (tab.get(a, o) + eq_indicator(v_s, o)
                        == new.get(a, o) + eq_indicator(m.target_outcome, o))


@given(random_games())
def test_potential_within_bounds_and_descends(game) -> None:
    g, s = game
    before = potentials(g, s)
    for a in g.players:
        pref = g.preference(a)
        pv = potential(g, s, a)
        assert 0 <= pv.value <= pv.bound
        for m in lazy_targets(g.tree, s, a):
            after = potentials(g, m.target)
            if pref.is_improvement(induced_play(g.tree, s).outcome, m.target_outcome):
                gap = pref.outcome_height(m.target_outcome) - pref.outcome_height(
                    induced_play(g.tree, s).outcome)
                assert before[a] - after[a] == gap > 0
            for b in g.players:
                if b != a:
                    assert after[b] == before[b]
