from __future__ import annotations

import random

import pytest
from hypothesis import given

from lazyimprove.convertibility import is_nash, lazy_improvements
from lazyimprove.dynamics import FixedScript, global_step_bound, run_lazy
from lazyimprove.game_model import GameError, GameInstance, GameTree, Leaf, is_ok, validate_instance
from lazyimprove.generators import (
    FIXTURES,
    GeneratorParams,
    fixture,
    generate_random,
    linear_family,
    quadratic_family,
)
from lazyimprove.measures import game_avoided, profile_avoided
from lazyimprove.oracles import (
    CapExceeded,
    avoid_play_counterexamples,
    brute_force_nash,
    conformance_report,
    lazy_reachable,
    longest_lazy_sequence,
    random_walk_avoid_play_check,
)

from conftest import random_games

# Longest lazy improvement sequences of linear_family(n), n = 0..6, found by
# exhaustive search; cross-checked below by an unmemoized search for n <= 3.
LINEAR_LONGEST = [1, 3, 5, 7, 9, 11, 13]


def _naive_longest(g, s) -> int:
    best = 0
    for a in g.players:
        for m in lazy_improvements(g, s, a):
            best = max(best, 1 + _naive_longest(g, m.target))
    return best


def test_depth_zero_gives_single_leaf() -> None:
    g, s0 = generate_random(GeneratorParams(seed=9, max_depth=0))
    assert g.tree.leaf_count == 1 and len(g.tree.internal) == 0


def test_generation_is_deterministic() -> None:
    p = GeneratorParams(seed=42, players=3, max_leaves=12, preference_mode="acyclic")
    assert generate_random(p) == generate_random(p)


def test_bad_params_rejected() -> None:
    with pytest.raises(ValueError):
        GeneratorParams(players=0)
    with pytest.raises(ValueError):
        GeneratorParams(preference_mode="weird")
    with pytest.raises(ValueError):
        GeneratorParams(players=2, preference_mode=("total",))


def test_thousand_seeds_validate() -> None:
    for seed in range(1000):
        g, s0 = generate_random(GeneratorParams(seed=seed, players=1 + seed % 3, max_leaves=10,
                                                preference_mode=("total", "acyclic")[seed % 2]))
        assert g.tree.leaf_count <= 10
        assert is_ok(validate_instance(g, [s0]))
        avoided = game_avoided(g.tree, g.players)
        assert 1 + sum(avoided.values()) == g.tree.leaf_count
        tab = profile_avoided(g.tree, s0, g.players)
        assert all(tab.row_sum(a) == avoided[a] for a in g.players)


def test_full_relation_player_is_cyclic() -> None:
    g, _ = generate_random(GeneratorParams(seed=1, players=2, preference_mode=("total", "full")))
    assert g.acyclic_players == ("a",)


@pytest.mark.parametrize("n", range(7))
def test_linear_family_longest_sequence(n: int) -> None:
    g, s0 = linear_family(n)
    length, script = longest_lazy_sequence(g, s0)
    assert length == LINEAR_LONGEST[n] == len(script)
    trace = run_lazy(g, s0, FixedScript(tuple(script)))
    assert trace.terminal == "nash"


@pytest.mark.parametrize("n", range(4))
def test_linear_longest_matches_unmemoized_search(n: int) -> None:
    g, s0 = linear_family(n)
    assert _naive_longest(g, s0) == LINEAR_LONGEST[n]


@pytest.mark.parametrize("n", range(5))
def test_quadratic_family_is_tight(n: int) -> None:
    g, s0, script = quadratic_family(n)
    length, _ = longest_lazy_sequence(g, s0)
    assert length == len(script.steps) == (n + 2) * (n + 3) // 2 - 2


def test_quadratic_longest_matches_unmemoized_search() -> None:
    g, s0, _ = quadratic_family(2)
    assert _naive_longest(g, s0) == 8


def test_nash_start_has_no_sequence() -> None:
    g, s0, script = quadratic_family(2)
    final = run_lazy(g, s0, script).final
    assert longest_lazy_sequence(g, final) == (0, [])


def test_single_leaf_nash_set() -> None:
    tree = GameTree(Leaf("x"))
    g = GameInstance(tree, ("a",), ("x",), {})
    assert brute_force_nash(g) == {next(tree.all_profiles())}


def test_enumeration_cap() -> None:
    g, _ = generate_random(GeneratorParams(seed=2, max_leaves=10))
    with pytest.raises(CapExceeded):
        brute_force_nash(g, cap=1)


@pytest.mark.parametrize("name", FIXTURES)
def test_fixtures_conform(name: str) -> None:
    fx = fixture(name)
    report = conformance_report(fx.instance)
    assert report.passed, [c for c in report.checks if not c.passed]
    assert avoid_play_counterexamples(fx.instance) == []


def test_cycle_fixture_nash_set_matches_terminal_set() -> None:
    fx = fixture("cycle-1-0")
    g = fx.instance
    nash = brute_force_nash(g)
    assert nash == {s for s in g.tree.all_profiles() if is_nash(g, s)}
    assert not set(fx.profiles) & nash


def test_unreachable_fixture() -> None:
    fx = fixture("unreachable-ne")
    reach = lazy_reachable(fx.instance, fx.profiles[0])
    assert fx.profiles[3] not in reach
    assert reach & brute_force_nash(fx.instance)


def test_unknown_fixture() -> None:
    with pytest.raises(GameError):
        fixture("no-such-game")


@given(random_games())
def test_random_nash_set_nonempty_and_longest_within_bound(game) -> None:
    g, s0 = game
    assert brute_force_nash(g)
    length, _ = longest_lazy_sequence(g, s0)
    assert length <= global_step_bound(g)


@given(random_games(max_leaves=6))
def test_random_avoid_play(game) -> None:
    g, s0 = game
    assert avoid_play_counterexamples(g) == []
    assert random_walk_avoid_play_check(g, s0, random.Random(0), 40) == []


def test_avoid_play_oracle_detects_planted_violation(monkeypatch) -> None:
    # Let b steer at a's vertex: the conversion graph then contains a walk that
    # leaves a play by a's move and returns to it by b's.
    import lazyimprove.oracles as orc
    from lazyimprove.convertibility import lazy_targets as real

    fx = fixture("avoided-outcomes-worked")
    g = fx.instance

    def leaky(tree, s, player):
        out = real(tree, s, player)
        if player == "b":
            out += [m.__class__("b", m.source, m.target, m.target_play, m.changed_vertices)
                    for m in real(tree, s, "a")]
        return out

    monkeypatch.setattr(orc, "lazy_targets", leaky)
    assert orc.avoid_play_counterexamples(g, max_len=2)
