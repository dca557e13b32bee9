from __future__ import annotations

from hypothesis import given

from lazyimprove.convertibility import (
    can_convert,
    can_lazily_convert,
    full_conversions,
    full_improvements,
    is_nash,
    lazy_improvements,
    lazy_targets,
    reachable_leaves,
)
from lazyimprove.game_model import induced_play
from lazyimprove.generators import fixture
from lazyimprove.oracles import brute_force_lazy_conversions, brute_force_nash

from conftest import random_games


def test_lazy_demo_targets_are_exactly_the_listed_profiles() -> None:
    fx = fixture("lazy-conv-demo")
    tree = fx.instance.tree
    start = fx.profiles[0]
    assert brute_force_lazy_conversions(tree, start, "a") == set(fx.profiles)
    assert {m.target for m in lazy_targets(tree, start, "a")} == set(fx.profiles)
    # full conversion reaches every profile of the one-player game
    assert set(full_conversions(tree, start, "a")) == set(tree.all_profiles())


def test_lazy_demo_two_middle_but_not_right() -> None:
    fx = fixture("lazy-conv-demo-2")
    tree = fx.instance.tree
    first, middle, right = fx.profiles
    assert can_lazily_convert(tree, first, middle, "a")
    assert not can_lazily_convert(tree, first, right, "a")
    assert can_convert(tree, first, right, "a")


def test_lazy_conversion_rejects_other_players_vertices(two_level_game) -> None:
    tree = two_level_game.tree
    s = tree.profile({0: 0, 1: 0, 4: 0})
    t = tree.profile({0: 0, 1: 1, 4: 0})
    assert not can_lazily_convert(tree, s, t, "a")
    assert can_lazily_convert(tree, s, t, "b")


def test_off_play_change_is_not_lazy(two_level_game) -> None:
    tree = two_level_game.tree
    s = tree.profile({0: 0, 1: 0, 4: 0})
    t = tree.profile({0: 0, 1: 0, 4: 1})
    assert can_convert(tree, s, t, "b")
    assert not can_lazily_convert(tree, s, t, "b")


def test_identity_is_a_lazy_conversion(two_level_game) -> None:
    tree = two_level_game.tree
    s = tree.leftmost_profile()
    assert can_lazily_convert(tree, s, s, "a") and can_lazily_convert(tree, s, s, "b")


def test_unreachable_example_steps_are_improvements() -> None:
    fx = fixture("unreachable-ne")
    g = fx.instance
    for s, t in zip(fx.profiles, fx.profiles[1:]):
        assert any(t in {m.target for m in full_improvements(g, s, a)} for a in g.players)
    assert is_nash(g, fx.profiles[-1])


def test_cycle_game_profiles_form_a_full_improvement_cycle() -> None:
    fx = fixture("cycle-1-0")
    g = fx.instance
    ring = list(fx.profiles) + [fx.profiles[0]]
    for s, t in zip(ring, ring[1:]):
        assert any(t in {m.target for m in full_improvements(g, s, a)} for a in g.players)


@given(random_games())
def test_lazy_targets_match_brute_force(game) -> None:
    g, s0 = game
    tree = g.tree
    for a in g.players:
        moves = lazy_targets(tree, s0, a)
        assert {m.target for m in moves} == brute_force_lazy_conversions(tree, s0, a)
        # one lazy target per reachable leaf
        leaves = [m.target_leaf for m in moves]
        assert len(leaves) == len(set(leaves)) == len(reachable_leaves(tree, s0, a))
        # every full conversion lands on a leaf that some lazy conversion reaches
        full_leaves = {induced_play(tree, t).leaf for t in full_conversions(tree, s0, a)}
        assert full_leaves == set(leaves)


@given(random_games())
def test_lazy_moves_change_only_own_vertices_on_new_play(game) -> None:
    g, s0 = game
    tree = g.tree
    for a in g.players:
        for m in lazy_targets(tree, s0, a):
            on_play = set(m.target_play.path)
            for v in m.changed_vertices:
                assert tree.owner[v] == a and v in on_play
            assert m.changed_vertices == s0.diff(m.target)


@given(random_games())
def test_nash_iff_no_lazy_improvement(game) -> None:
    g, _ = game
    nash = brute_force_nash(g)
    for s in g.tree.all_profiles():
        no_lazy = not any(lazy_improvements(g, s, a) for a in g.players)
        no_full = not any(full_improvements(g, s, a) for a in g.players)
        assert (s in nash) == no_lazy == no_full == is_nash(g, s)
