"""Avoided-outcome counts of games and profiles, and the per-player potential.

At a vertex owned by ``a`` with children ``g_0..g_n``, player ``a`` avoids
``n`` subgames. For a profile, the avoided subprofiles are counted by the
outcome they induce. The potential of ``a`` weights these counts by the
height of each outcome in ``a``'s preference.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .game_model import CyclicPreferenceError, GameInstance, GameTree, StrategyProfile


@dataclass(frozen=True)
class AvoidedOutcomeTable:
    players: tuple[str, ...]
    outcomes: tuple[str, ...]
    delta: dict[tuple[str, str], int]
    game_delta: dict[str, int]

    def get(self, player: str, outcome: str) -> int:
        return self.delta.get((player, outcome), 0)

    def row(self, player: str) -> dict[str, int]:
        return {o: self.get(player, o) for o in self.outcomes}

    def row_sum(self, player: str) -> int:
        return sum(n for (p, _), n in self.delta.items() if p == player)


@dataclass(frozen=True)
class PotentialValue:
    player: str
    value: int
    bound: int


def _players(tree: GameTree, players: Iterable[str] | None) -> tuple[str, ...]:
    if players is None:
        return tree.players
    return tuple(players)


def game_avoided(tree: GameTree, players: Iterable[str] | None = None) -> dict[str, int]:
    """Avoided-subgame count per player, folded bottom-up over the tree."""
    sub: list[Counter[str]] = [Counter() for _ in range(tree.size)]
    for v in reversed(range(tree.size)):
        owner = tree.owner[v]
        if owner is None:
            continue
        acc: Counter[str] = Counter()
        for w in tree.children[v]:
            acc.update(sub[w])
        acc[owner] += len(tree.children[v]) - 1
        sub[v] = acc
    root = sub[0]
    return {a: root.get(a, 0) for a in _players(tree, players)}


def profile_avoided(
    tree: GameTree, s: StrategyProfile, players: Iterable[str] | None = None
) -> AvoidedOutcomeTable:
    """Avoided outcomes of ``s`` per (player, outcome), folded bottom-up."""
    sub_outcome = tree.subprofile_outcomes(s)
    sub: list[Counter[tuple[str, str]]] = [Counter() for _ in range(tree.size)]
    for v in reversed(range(tree.size)):
        owner = tree.owner[v]
        if owner is None:
            continue
        acc: Counter[tuple[str, str]] = Counter()
        chosen = s.choices[v]
        for j, w in enumerate(tree.children[v]):
            acc.update(sub[w])
            if j != chosen:
                acc[(owner, sub_outcome[w])] += 1
        sub[v] = acc
    ps = _players(tree, players)
    return AvoidedOutcomeTable(
        players=ps,
        outcomes=tree.outcomes,
        delta={k: n for k, n in sorted(sub[0].items()) if n},
        game_delta=game_avoided(tree, ps),
    )


def potential(
    g: GameInstance,
    s: StrategyProfile,
    player: str,
    table: AvoidedOutcomeTable | None = None,
) -> PotentialValue:
    """Height-weighted avoided outcomes of ``player``; strictly drops at her lazy improvements."""
    pref = g.preference(player)
    if not pref.is_acyclic:
        raise CyclicPreferenceError(player, pref.cycle)
    if table is None:
        table = profile_avoided(g.tree, s, g.players)
    value = sum((pref.outcome_height(o) - 1) * n
                for (p, o), n in table.delta.items() if p == player)
    bound = (pref.height - 1) * table.game_delta.get(player, 0)
    if not 0 <= value <= bound:
        raise RuntimeError(f"potential {value} of {player} outside [0, {bound}]")
    return PotentialValue(player, value, bound)


def potentials(g: GameInstance, s: StrategyProfile) -> dict[str, int]:
    """Potential of every acyclic player at ``s``."""
    table = profile_avoided(g.tree, s, g.players)
    return {a: potential(g, s, a, table).value for a in g.acyclic_players}


def eq_indicator(x: str, y: str) -> int:
    return 1 if x == y else 0
