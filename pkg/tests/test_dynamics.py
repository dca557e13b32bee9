from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from lazyimprove.convertibility import is_nash
from lazyimprove.dynamics import (
    AmbiguousBestResponse,
    BoundViolation,
    EngineError,
    FixedScript,
    RoundRobinBestMove,
    RoundRobinFirstMove,
    ScriptRejected,
    SeededRandom,
    global_step_bound,
    is_epsilon_nash,
    player_step_bounds,
    run_epsilon_lazy,
    run_full_improvement,
    run_lazy,
    run_lazy_with_nature,
    run_synchronous_best_response,
    run_synchronous_script,
)
from lazyimprove.game_model import GameInstance, GameTree, Leaf, Node, PreferenceRelation, total_order
from lazyimprove.generators import GeneratorParams, fixture, flat_cyclic_game, generate_random, quadratic_family
from lazyimprove.oracles import brute_force_nash

from conftest import random_games

SCHEDULERS = [RoundRobinFirstMove(), RoundRobinBestMove(), SeededRandom(0), SeededRandom(7)]


@pytest.mark.parametrize("n", range(5))
def test_quadratic_script_replays_to_nash(n: int) -> None:
    g, s0, script = quadratic_family(n)
    trace = run_lazy(g, s0, script)
    assert len(trace.steps) == (n + 2) * (n + 3) // 2 - 2
    assert trace.terminal == "nash"


def test_quadratic_potential_drops_every_step() -> None:
    g, s0, script = quadratic_family(3)
    trace = run_lazy(g, s0, script)
    for st_ in trace.steps:
        a = st_.mover
        assert st_.potential_after[a] < st_.potential_before[a]


def test_nash_start_takes_no_steps() -> None:
    g, s0, script = quadratic_family(2)
    final = run_lazy(g, s0, script).final
    trace = run_lazy(g, final)
    assert trace.steps == [] and trace.terminal == "nash"


def test_script_rejects_inadmissible_step() -> None:
    g, s0, _ = quadratic_family(1)
    with pytest.raises(ScriptRejected):
        run_lazy(g, s0, FixedScript((("b", 2),)))


def test_script_may_name_choices() -> None:
    g, s0, _ = quadratic_family(1)
    trace = run_lazy(g, s0, FixedScript((("a", {0: 1}),)))
    assert trace.terminal == "script-end" and len(trace.steps) == 1


def test_full_engine_cycles_on_cycle_fixture() -> None:
    fx = fixture("cycle-1-0")
    trace = run_full_improvement(fx.instance, fx.profiles[0])
    assert trace.terminal == "cycle"
    assert len(trace.cycle) == 4
    assert trace.cycle == list(fx.profiles)


@pytest.mark.parametrize("sched", SCHEDULERS, ids=lambda s: f"{s.name}")
def test_lazy_engine_settles_on_cycle_fixture(sched) -> None:
    fx = fixture("cycle-1-0")
    for s0 in fx.profiles:
        trace = run_lazy(fx.instance, s0, sched)
        assert trace.terminal == "nash" and is_nash(fx.instance, trace.final)


def test_nature_engine_requires_budget() -> None:
    g, s0 = flat_cyclic_game(3)
    with pytest.raises(EngineError):
        run_lazy(g, s0)


def test_nature_engine_runs_through_cycles() -> None:
    g, s0 = flat_cyclic_game(2)
    trace = run_lazy_with_nature(g, s0, RoundRobinFirstMove(), 20)
    assert trace.terminal == "budget"
    assert len(trace.steps) == 20
    assert trace.cycle is not None


def test_nature_engine_raises_on_bound_breach(monkeypatch) -> None:
    import lazyimprove.dynamics as dyn

    g, s0 = generate_random(GeneratorParams(seed=3, players=2, preference_mode=("total", "full")))
    monkeypatch.setattr(dyn, "player_step_bounds", lambda g_: {a: -1 for a in g_.acyclic_players})
    with pytest.raises(BoundViolation):
        dyn.run_lazy_with_nature(g, s0, RoundRobinFirstMove(), 50)


def test_sync_fixture_script_cycles() -> None:
    fx = fixture("sync-cycle")
    trace = run_synchronous_script(fx.instance, fx.profiles[0], fx.rounds)
    assert trace.terminal == "cycle"
    assert trace.cycle == list(fx.profiles)
    assert all(len(st_.movers) == 2 for st_ in trace.steps)


def test_sync_best_response_on_cycle_fixture_reaches_nash() -> None:
    fx = fixture("sync-cycle")
    trace = run_synchronous_best_response(fx.instance, fx.profiles[0])
    assert trace.terminal == "nash"
    assert len(trace.steps) <= 2 ** len(fx.instance.tree.internal)


def test_sync_best_response_reports_ambiguity() -> None:
    tree = GameTree(Node("a", (Leaf("x"), Leaf("y"), Leaf("z"))))
    rel = PreferenceRelation("a", frozenset({("x", "y"), ("x", "z")}))
    g = GameInstance(tree, ("a",), ("x", "y", "z"), {"a": rel})
    with pytest.raises(AmbiguousBestResponse):
        run_synchronous_best_response(g, tree.leftmost_profile())


def test_epsilon_needs_payoffs_and_positive_epsilon() -> None:
    g, s0, _ = quadratic_family(1)
    with pytest.raises(EngineError):
        run_epsilon_lazy(g, s0, Fraction(1, 2))
    gp, sp = generate_random(GeneratorParams(seed=1, payoff_range=4))
    with pytest.raises(EngineError):
        run_epsilon_lazy(gp, sp, 0)


def test_epsilon_threshold_is_strict() -> None:
    tree = GameTree(Node("a", (Leaf("x"), Leaf("y"))))
    payoffs = {"a": {1: Fraction(0), 2: Fraction(1)}}
    g = GameInstance(tree, ("a",), ("x", "y"), {"a": total_order("a", ["x", "y"])}, payoffs)
    s0 = tree.leftmost_profile()
    assert len(run_epsilon_lazy(g, s0, 1).steps) == 0
    assert is_epsilon_nash(g, s0, 1) and not is_epsilon_nash(g, s0, Fraction(99, 100))
    assert len(run_epsilon_lazy(g, s0, Fraction(1, 2)).steps) == 1


@given(random_games(), st.sampled_from(SCHEDULERS))
def test_lazy_runs_end_in_nash_within_bounds(game, sched) -> None:
    g, s0 = game
    trace = run_lazy(g, s0, sched)
    assert trace.terminal == "nash"
    assert trace.final in brute_force_nash(g)
    assert len(trace.steps) <= global_step_bound(g)
    for a, bound in player_step_bounds(g).items():
        assert trace.per_player_counts[a] <= bound


@given(random_games(modes=("total",)))
def test_sync_best_response_terminates(game) -> None:
    g, s0 = game
    trace = run_synchronous_best_response(g, s0)
    assert trace.terminal == "nash"
    assert len(trace.steps) <= 2 ** len(g.tree.internal)


@given(st.integers(0, 10**6), st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(1)]))
def test_epsilon_runs_end_epsilon_nash(seed, eps) -> None:
    g, s0 = generate_random(GeneratorParams(seed=seed, payoff_range=3, max_leaves=8))
    trace = run_epsilon_lazy(g, s0, eps, SeededRandom(seed))
    assert trace.terminal == "epsilon-nash"
    assert is_epsilon_nash(g, trace.final, eps)


@given(random_games(), st.integers(0, 1000))
def test_same_seed_same_trace(game, seed) -> None:
    g, s0 = game
    a = run_lazy(g, s0, SeededRandom(seed))
    b = run_lazy(g, s0, SeededRandom(seed))
    assert a.profiles == b.profiles and a.steps == b.steps


@given(random_games(), st.sampled_from(SCHEDULERS))
def test_trace_steps_chain_and_are_lazy_improvements(game, sched) -> None:
    from lazyimprove.convertibility import can_lazily_convert

    g, s0 = game
    trace = run_lazy(g, s0, sched)
    assert trace.profiles[0] == trace.start
    for st_, s, t in zip(trace.steps, trace.profiles, trace.profiles[1:]):
        assert s.with_changes(st_.changes) == t
        assert can_lazily_convert(g.tree, s, t, st_.mover)
        assert g.preference(st_.mover).is_improvement(st_.pre_outcome, st_.post_outcome)


@given(random_games(), st.sampled_from(SCHEDULERS))
def test_potentials_fall_only_at_own_steps(game, sched) -> None:
    g, s0 = game
    trace = run_lazy(g, s0, sched)
    for st_ in trace.steps:
        for a in g.players:
            if a == st_.mover:
                assert st_.potential_after[a] < st_.potential_before[a]
            else:
                assert st_.potential_after[a] == st_.potential_before[a]


@given(random_games())
def test_full_engine_steps_are_full_improvements(game) -> None:
    from lazyimprove.convertibility import can_convert

    g, s0 = game
    trace = run_full_improvement(g, s0)
    for st_, s, t in zip(trace.steps, trace.profiles, trace.profiles[1:]):
        assert can_convert(g.tree, s, t, st_.mover)
        assert g.preference(st_.mover).is_improvement(st_.pre_outcome, st_.post_outcome)
