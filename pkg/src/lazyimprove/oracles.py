"""Exhaustive oracles used to cross-check the dynamics on small games."""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, field

from .convertibility import (
    can_lazily_convert,
    is_nash,
    lazy_improvements,
    lazy_targets,
)
from .game_model import GameError, GameInstance, GameTree, StrategyProfile, induced_play
from .measures import eq_indicator, game_avoided, potential, profile_avoided

DEFAULT_CAP = 2 ** 20


class CapExceeded(GameError):
    pass


def _check_cap(tree: GameTree, cap: int) -> None:
    n = tree.profile_count()
    if n > cap:
        raise CapExceeded(f"{n} profiles exceed the enumeration cap {cap}")


def brute_force_nash(g: GameInstance, cap: int = DEFAULT_CAP) -> set[StrategyProfile]:
    """All Nash equilibria, by checking every unilateral deviation of every profile.

    Profiles that differ only in player ``a``'s choices are exactly ``a``'s
    deviations, so grouping profiles by the choices of everyone else gives
    each player's deviation set directly.
    """
    tree = g.tree
    _check_cap(tree, cap)
    profiles = list(tree.all_profiles())
    outcome = {s: induced_play(tree, s).outcome for s in profiles}
    stable = set(profiles)
    for a in g.players:
        pref = g.preference(a)
        mine = set(tree.vertices_of(a))
        others = [v for v in tree.internal if v not in mine]
        groups: dict[tuple[int, ...], set[str]] = defaultdict(set)
        for s in profiles:
            groups[tuple(s[v] for v in others)].add(outcome[s])
        for s in profiles:
            reachable = groups[tuple(s[v] for v in others)]
            if any(pref.is_improvement(outcome[s], o) for o in reachable):
                stable.discard(s)
    return stable


def lazy_terminal_profiles(g: GameInstance, cap: int = DEFAULT_CAP) -> set[StrategyProfile]:
    _check_cap(g.tree, cap)
    return {s for s in g.tree.all_profiles() if is_nash(g, s)}


def brute_force_lazy_conversions(
    tree: GameTree, s: StrategyProfile, player: str, cap: int = DEFAULT_CAP
) -> set[StrategyProfile]:
    _check_cap(tree, cap)
    return {t for t in tree.all_profiles() if can_lazily_convert(tree, s, t, player)}


def lazy_improvement_graph(
    g: GameInstance, s0: StrategyProfile, cap: int = 100_000
) -> dict[StrategyProfile, list[tuple[str, int, StrategyProfile]]]:
    """Profiles lazily reachable from ``s0`` with their outgoing (player, leaf, target) edges."""
    graph: dict[StrategyProfile, list[tuple[str, int, StrategyProfile]]] = {}
    frontier = [s0]
    while frontier:
        s = frontier.pop()
        if s in graph:
            continue
        if len(graph) >= cap:
            raise CapExceeded(f"more than {cap} reachable profiles")
        edges = [(a, m.target_leaf, m.target) for a in g.players for m in lazy_improvements(g, s, a)]
        graph[s] = edges
        frontier.extend(t for _, _, t in edges if t not in graph)
    return graph


def lazy_reachable(g: GameInstance, s0: StrategyProfile, cap: int = 100_000) -> set[StrategyProfile]:
    return set(lazy_improvement_graph(g, s0, cap))


def longest_lazy_sequence(
    g: GameInstance, s0: StrategyProfile, cap: int = 100_000
) -> tuple[int, list[tuple[str, int]]]:
    """Length of the longest lazy improvement sequence from ``s0`` and a script realizing it.

    Memoized longest path in the improvement graph; raises on a cycle.
    """
    graph = lazy_improvement_graph(g, s0, cap)
    best: dict[StrategyProfile, tuple[int, tuple[str, int, StrategyProfile] | None]] = {}
    on_stack: set[StrategyProfile] = set()
    stack: list[tuple[StrategyProfile, int]] = [(s0, 0)]
    on_stack.add(s0)
    while stack:
        s, i = stack[-1]
        edges = graph[s]
        if i < len(edges):
            stack[-1] = (s, i + 1)
            t = edges[i][2]
            if t in on_stack:
                raise GameError("lazy improvement graph has a cycle")
            if t not in best:
                stack.append((t, 0))
                on_stack.add(t)
            continue
        length, choice = 0, None
        for edge in edges:
            cand = best[edge[2]][0] + 1
            if cand > length:
                length, choice = cand, edge
        best[s] = (length, choice)
        stack.pop()
        on_stack.discard(s)
    script = []
    s = s0
    while best[s][1] is not None:
        a, leaf, t = best[s][1]
        script.append((a, leaf))
        s = t
    return best[s0][0], script


# -- conversion graph checks ----------------------------------------------------

def _conversion_edges(g: GameInstance, cap: int):
    tree = g.tree
    _check_cap(tree, cap)
    profiles = list(tree.all_profiles())
    leaf = {s: induced_play(tree, s).leaf for s in profiles}
    edges = {
        s: [(a, m.target) for a in g.players for m in lazy_targets(tree, s, a) if m.changed_vertices]
        for s in profiles
    }
    return profiles, leaf, edges


def avoid_play_counterexamples(
    g: GameInstance, max_len: int | None = None, cap: int = 4096
) -> list[tuple[StrategyProfile, str, str]]:
    """Walks s ->a s0 -> ... -> sn ->b s' with play(s') = play(s) avoided in between, and a != b.

    ``max_len`` bounds the number of intermediate profiles s0..sn; None
    closes over walks of any length. Returns (s, a, b) for each violation.
    """
    profiles, leaf, edges = _conversion_edges(g, cap)
    bad = []
    for p in sorted(set(leaf.values())):
        outside = [s for s in profiles if leaf[s] != p]
        closers = {s: {a for a, t in edges[s] if leaf[t] == p} for s in outside}
        reach = {s: set(c) for s, c in closers.items()}  # intermediate walks of length 1
        depth = 1
        while max_len is None or depth < max_len:
            changed = False
            nxt = {}
            for s in outside:
                acc = set(closers[s])
                for _, t in edges[s]:
                    if leaf[t] != p:
                        acc |= reach[t]
                nxt[s] = acc
                changed |= acc != reach[s]
            reach = nxt
            depth += 1
            if not changed:
                break
        for s in profiles:
            if leaf[s] != p:
                continue
            for a, t in edges[s]:
                if leaf[t] != p:
                    bad.extend((s, a, b) for b in sorted(reach[t]) if b != a)
    return bad


def random_walk_avoid_play_check(
    g: GameInstance, s0: StrategyProfile, rng: random.Random, length: int
) -> list[tuple[int, int, str, str]]:
    """Random lazy-conversion walk; report (i, j, a, b) for each avoided-play violation."""
    tree = g.tree
    walk = [s0]
    movers: list[str] = []
    s = s0
    for _ in range(length):
        options = [(a, m.target) for a in g.players for m in lazy_targets(tree, s, a)
                   if m.changed_vertices]
        if not options:
            break
        a, s = options[rng.randrange(len(options))]
        walk.append(s)
        movers.append(a)
    plays = [induced_play(tree, t).leaf for t in walk]
    bad = []
    for i in range(len(walk)):
        for j in range(i + 2, len(walk)):
            if plays[j] == plays[i]:
                if all(plays[k] != plays[i] for k in range(i + 1, j)) and movers[i] != movers[j - 1]:
                    bad.append((i, j, movers[i], movers[j - 1]))
                break
    return bad


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ConformanceReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(CheckResult(name, passed, detail))


def conformance_report(g: GameInstance, cap: int = 4096) -> ConformanceReport:
    """Cross-check an instance exhaustively.

    * lazy-terminal profiles equal brute-force Nash equilibria;
    * avoided-game counts sum to leaves - 1;
    * avoided-profile rows sum to the avoided-game counts;
    * across every single lazy conversion, non-movers keep their avoided
      outcomes and the mover's shift by the play indicator;
    * every lazy improvement of an acyclic player lowers her potential by
      the height gap and leaves other acyclic players' potentials alone.
    """
    rep = ConformanceReport()
    tree = g.tree
    if tree.profile_count() > cap:
        rep.add("enumeration", False, f"{tree.profile_count()} profiles exceed cap {cap}")
        return rep

    nash = brute_force_nash(g, cap)
    terminal = lazy_terminal_profiles(g, cap)
    rep.add("terminal-equals-nash", nash == terminal,
            f"{len(nash)} Nash, {len(terminal)} lazy-terminal")

    avoided = game_avoided(tree, g.players)
    rep.add("avoided-sum-leaves", 1 + sum(avoided.values()) == tree.leaf_count,
            f"1 + {sum(avoided.values())} vs {tree.leaf_count} leaves")

    row_fail = same_fail = diff_fail = pot_fail = steps = 0
    tables = {}
    for s in tree.all_profiles():
        tab = profile_avoided(tree, s, g.players)
        tables[s] = tab
        if any(tab.row_sum(a) != avoided[a] for a in g.players):
            row_fail += 1
    rep.add("profile-rows-sum", row_fail == 0, f"{row_fail} profiles off")

    acyclic = g.acyclic_players
    for s, tab in tables.items():
        v_s = induced_play(tree, s).outcome
        pot_s = {a: potential(g, s, a, tab).value for a in acyclic}
        for a in g.players:
            for m in lazy_targets(tree, s, a):
                steps += 1
                t = m.target
                tab_t = tables[t]
                v_t = m.target_outcome
                for b in g.players:
                    for o in g.outcomes:
                        if b != a:
                            same_fail += tab.get(b, o) != tab_t.get(b, o)
                        else:
                            diff_fail += (tab.get(a, o) + eq_indicator(v_s, o)
                                          != tab_t.get(a, o) + eq_indicator(v_t, o))
                if a in acyclic and g.preference(a).is_improvement(v_s, v_t):
                    pref = g.preference(a)
                    drop = pot_s[a] - potential(g, t, a, tab_t).value
                    pot_fail += drop != pref.outcome_height(v_t) - pref.outcome_height(v_s)
                    pot_fail += any(potential(g, t, b, tab_t).value != pot_s[b]
                                    for b in acyclic if b != a)
    rep.add("lazy-same", same_fail == 0, f"{same_fail} mismatches over {steps} conversions")
    rep.add("lazy-diff", diff_fail == 0, f"{diff_fail} mismatches over {steps} conversions")
    rep.add("potential-descent", pot_fail == 0, f"{pot_fail} mismatches")
    return rep
