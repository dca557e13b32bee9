"""Repeated play with beliefs about the aggregated opponents.

Each round every player lazily improves her own strategy against the
profile she believes in, the real game is played with everyone's actual
strategies, and each player overwrites her beliefs along the observed play.
Off-play beliefs are never touched, which makes every belief update a lazy
conversion by the opponents.
"""

from __future__ import annotations

import random
from collections.abc import Mapping
from dataclasses import dataclass

from .convertibility import has_lazy_improvement, lazy_improvements
from .dynamics import best_move, player_step_bounds
from .game_model import GameError, GameInstance, Play, StrategyProfile, induced_play


class NonConvergence(GameError):
    pass


class NotQuiescent(GameError):
    pass


@dataclass(frozen=True)
class BeliefState:
    """A player's own strategy plus her guess of everyone else's, as one full profile."""

    owner: str
    profile: StrategyProfile

    def own_strategy(self, g: GameInstance) -> dict[int, int]:
        return {v: self.profile[v] for v in g.tree.vertices_of(self.owner)}

    def believed_others(self, g: GameInstance) -> dict[int, int]:
        return {v: self.profile[v] for v in g.tree.internal if g.tree.owner[v] != self.owner}


@dataclass(frozen=True)
class RoundLog:
    round: int
    moves: dict[str, int | None]  # player -> target leaf of her improvement
    play: Play
    belief_diffs: dict[str, dict[int, tuple[int, int]]]
    beliefs: dict[str, StrategyProfile]

    @property
    def quiescent(self) -> bool:
        return all(m is None for m in self.moves.values()) and not any(self.belief_diffs.values())


def initial_states(
    g: GameInstance,
    own: StrategyProfile | None = None,
    beliefs: Mapping[str, StrategyProfile] | None = None,
) -> dict[str, BeliefState]:
    """Own strategies from ``own``, beliefs from ``beliefs[player]``; leftmost by default."""
    tree = g.tree
    own = tree.profile(own) if own is not None else tree.leftmost_profile()
    states = {}
    for a in g.players:
        base = beliefs.get(a) if beliefs else None
        base = tree.profile(base) if base is not None else tree.leftmost_profile()
        mine = {v: own[v] for v in tree.vertices_of(a)}
        states[a] = BeliefState(a, base.with_changes(mine))
    return states


def random_states(g: GameInstance, rng: random.Random) -> dict[str, BeliefState]:
    tree = g.tree

    def rand_profile() -> StrategyProfile:
        return tree.profile({v: rng.randrange(len(tree.children[v])) for v in tree.internal})

    return initial_states(g, rand_profile(), {a: rand_profile() for a in g.players})


def actual_profile(g: GameInstance, states: Mapping[str, BeliefState]) -> StrategyProfile:
    tree = g.tree
    choices = list(tree.leftmost_profile().choices)
    for v in tree.internal:
        choices[v] = states[tree.owner[v]].profile[v]
    return StrategyProfile(tuple(choices))


def _check_states(g: GameInstance, states: Mapping[str, BeliefState]) -> None:
    missing = [a for a in g.players if a not in states]
    if missing:
        raise GameError(f"no belief state for players {missing}")
    for a, st in states.items():
        if st.owner != a:
            raise GameError(f"belief state stored under {a} belongs to {st.owner}")


def play_round(
    g: GameInstance, states: Mapping[str, BeliefState], round_index: int = 0
) -> tuple[dict[str, BeliefState], RoundLog]:
    _check_states(g, states)
    tree = g.tree
    moved: dict[str, BeliefState] = {}
    moves: dict[str, int | None] = {}
    for a in g.players:
        st = states[a]
        options = lazy_improvements(g, st.profile, a)
        if options:
            m = best_move(g.preference(a), options)
            moved[a] = BeliefState(a, m.target)
            moves[a] = m.target_leaf
        else:
            moved[a] = st
            moves[a] = None

    truth = actual_profile(g, moved)
    play = induced_play(tree, truth)
    observed = [v for v in play.path if not tree.is_leaf(v)]
    new_states = {}
    diffs: dict[str, dict[int, tuple[int, int]]] = {}
    for a in g.players:
        prof = moved[a].profile
        diff = {v: (prof[v], truth[v]) for v in observed
                if tree.owner[v] != a and prof[v] != truth[v]}
        diffs[a] = diff
        new_states[a] = BeliefState(a, prof.with_changes({v: new for v, (_, new) in diff.items()}))
    log = RoundLog(round_index, moves, play, diffs,
                   {a: st.profile for a, st in new_states.items()})
    return new_states, log


def default_round_budget(g: GameInstance) -> int:
    own_moves = sum(player_step_bounds(g).values())
    return 2 * (own_moves + 1) + 1


def run_to_stability(
    g: GameInstance,
    initial: Mapping[str, BeliefState],
    max_rounds: int | None = None,
) -> tuple[dict[str, BeliefState], list[RoundLog]]:
    """Play rounds until one changes neither strategies nor beliefs."""
    if not g.all_acyclic:
        raise GameError("belief dynamics needs acyclic preferences")
    if max_rounds is None:
        max_rounds = default_round_budget(g)
    states = dict(initial)
    logs: list[RoundLog] = []
    for r in range(max_rounds):
        states, log = play_round(g, states, r)
        logs.append(log)
        if log.quiescent:
            return states, logs
    raise NonConvergence(f"no quiescent round within {max_rounds} rounds")


def assemble_equilibrium(g: GameInstance, states: Mapping[str, BeliefState]) -> StrategyProfile:
    """Combine stable strategies and beliefs into one profile.

    On the common play everyone uses her own strategy. A subgame left at an
    on-play vertex ``p`` is filled from the beliefs of ``p``'s owner.
    """
    _check_states(g, states)
    tree = g.tree
    truth = actual_profile(g, states)
    play = induced_play(tree, truth)
    for a in g.players:
        st = states[a]
        if induced_play(tree, st.profile).path != play.path:
            raise NotQuiescent(f"beliefs of {a} do not reproduce the actual play")
        if has_lazy_improvement(g, st.profile, a):
            raise NotQuiescent(f"{a} still has a lazy improvement")
    choices = list(truth.choices)
    for p in play.path:
        if tree.is_leaf(p):
            continue
        gatekeeper = states[tree.owner[p]].profile
        for j, c in enumerate(tree.children[p]):
            if j == truth[p]:
                continue
            for v in tree.subtree(c):
                if not tree.is_leaf(v):
                    choices[v] = gatekeeper[v]
    return StrategyProfile(tuple(choices))
