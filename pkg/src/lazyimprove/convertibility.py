"""Full and lazy convertibility between profiles, and the moves they allow.

A player lazily converts ``s`` into ``t`` when every choice that differs
belongs to her and lies on the play induced by ``t``. Once the target play
is fixed nothing else may change, so lazy moves of a player correspond
one-to-one to the leaves she can reach while everybody else keeps to ``s``.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterator
from dataclasses import dataclass

from .game_model import GameInstance, GameTree, Play, StrategyProfile, induced_play


@dataclass(frozen=True)
class Move:
    mover: str
    source: StrategyProfile
    target: StrategyProfile
    target_play: Play
    changed_vertices: frozenset[int]

    @property
    def target_leaf(self) -> int:
        return self.target_play.leaf

    @property
    def target_outcome(self) -> str:
        return self.target_play.outcome

    def changes(self) -> dict[int, int]:
        return {v: self.target[v] for v in sorted(self.changed_vertices)}


LazyMove = Move


def can_convert(tree: GameTree, s: StrategyProfile, t: StrategyProfile, player: str) -> bool:
    owner = tree.owner
    return all(c == d or owner[v] == player for v, (c, d) in enumerate(zip(s.choices, t.choices)))


def can_lazily_convert(tree: GameTree, s: StrategyProfile, t: StrategyProfile, player: str) -> bool:
    changed = s.diff(t)
    if not changed:
        return True
    if any(tree.owner[v] != player for v in changed):
        return False
    on_play = set(induced_play(tree, t).path)
    return changed <= on_play


def _lazy_paths(tree: GameTree, s: StrategyProfile, player: str) -> Iterator[tuple[int, list[int]]]:
    """Yield (leaf, root-to-leaf path) for every leaf ``player`` can steer to, in preorder."""
    owner, children, choices = tree.owner, tree.children, s.choices
    stack: list[tuple[int, list[int]]] = [(0, [0])]
    while stack:
        v, path = stack.pop()
        if owner[v] is None:
            yield v, path
        elif owner[v] == player:
            for w in reversed(children[v]):
                stack.append((w, path + [w]))
        else:
            w = children[v][choices[v]]
            stack.append((w, path + [w]))


def _move_along(tree: GameTree, s: StrategyProfile, player: str, path: list[int]) -> Move:
    changes = {}
    for u, w in zip(path, path[1:]):
        if tree.owner[u] == player:
            c = tree.children[u].index(w)
            if s.choices[u] != c:
                changes[u] = c
    target = s.with_changes(changes)
    play = Play(tuple(path), tree.outcome[path[-1]])
    return Move(player, s, target, play, frozenset(changes))


def lazy_targets(tree: GameTree, s: StrategyProfile, player: str) -> list[Move]:
    """All lazy conversions of ``s`` by ``player``, one per reachable leaf (identity included)."""
    return [_move_along(tree, s, player, path) for _, path in _lazy_paths(tree, s, player)]


def reachable_leaves(tree: GameTree, s: StrategyProfile, player: str) -> list[int]:
    return [leaf for leaf, _ in _lazy_paths(tree, s, player)]


def lazy_improvements(g: GameInstance, s: StrategyProfile, player: str) -> list[Move]:
    tree = g.tree
    pref = g.preference(player)
    current = induced_play(tree, s).outcome
    return [
        _move_along(tree, s, player, path)
        for leaf, path in _lazy_paths(tree, s, player)
        if pref.is_improvement(current, tree.outcome[leaf])
    ]


def has_lazy_improvement(g: GameInstance, s: StrategyProfile, player: str) -> bool:
    tree = g.tree
    pref = g.preference(player)
    current = induced_play(tree, s).outcome
    return any(pref.is_improvement(current, tree.outcome[leaf])
               for leaf, _ in _lazy_paths(tree, s, player))


def is_nash(g: GameInstance, s: StrategyProfile) -> bool:
    """True iff no player has a lazy improvement (equivalently, no improving deviation)."""
    return not any(has_lazy_improvement(g, s, a) for a in g.players)


def full_conversions(tree: GameTree, s: StrategyProfile, player: str) -> Iterator[StrategyProfile]:
    """Every profile ``player`` can reach by rewriting any of her own choices (``s`` included)."""
    mine = tree.vertices_of(player)
    ranges = [range(len(tree.children[v])) for v in mine]
    for combo in itertools.product(*ranges):
        yield s.with_changes(dict(zip(mine, combo)))


def full_improvements(g: GameInstance, s: StrategyProfile, player: str) -> list[Move]:
    """Improving unilateral deviations, in lexicographic order of the player's choices."""
    tree = g.tree
    pref = g.preference(player)
    current = induced_play(tree, s).outcome
    out = []
    for t in full_conversions(tree, s, player):
        play = induced_play(tree, t)
        if pref.is_improvement(current, play.outcome):
            out.append(Move(player, s, t, play, s.diff(t)))
    return out
