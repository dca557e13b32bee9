"""Finite sequential games: trees, preferences, strategy profiles and plays.

Vertex ids are assigned by a preorder traversal of the tree (root is 0,
children visited left to right), so they are stable across serialization.
A strategy profile stores one child index per internal vertex.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Union


@dataclass(frozen=True)
class Leaf:
    outcome: str


@dataclass(frozen=True)
class Node:
    player: str
    children: tuple[Tree, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.children, tuple):
            object.__setattr__(self, "children", tuple(self.children))


Tree = Union[Leaf, Node]


class GameError(ValueError):
    """Base class for malformed games, profiles and preferences."""


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    severity: str = "error"
    vertex: int | None = None
    player: str | None = None

    def __str__(self) -> str:
        where = []
        if self.vertex is not None:
            where.append(f"vertex {self.vertex}")
        if self.player is not None:
            where.append(f"player {self.player}")
        loc = f" ({', '.join(where)})" if where else ""
        return f"{self.severity}: {self.code}{loc}: {self.message}"


class InvalidProfileError(GameError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


class ReflexivePairError(GameError):
    pass


class CyclicPreferenceError(GameError):
    def __init__(self, player: str, cycle: list[str]):
        self.player = player
        self.cycle = cycle
        super().__init__(f"preference of {player} is cyclic: {' < '.join(cycle + cycle[:1])}")


@dataclass(frozen=True)
class Play:
    path: tuple[int, ...]
    outcome: str

    @property
    def leaf(self) -> int:
        return self.path[-1]


@dataclass(frozen=True)
class StrategyProfile:
    """Choice per internal vertex, stored densely over all vertex ids (-1 at leaves)."""

    choices: tuple[int, ...]

    def __getitem__(self, vertex: int) -> int:
        return self.choices[vertex]

    def __len__(self) -> int:
        return len(self.choices)

    def as_dict(self) -> dict[int, int]:
        return {v: c for v, c in enumerate(self.choices) if c >= 0}

    def with_changes(self, changes: Mapping[int, int]) -> StrategyProfile:
        if not changes:
            return self
        choices = list(self.choices)
        for v, c in changes.items():
            choices[v] = c
        return StrategyProfile(tuple(choices))

    def diff(self, other: StrategyProfile) -> frozenset[int]:
        return frozenset(v for v, (c, d) in enumerate(zip(self.choices, other.choices)) if c != d)

    def encode(self) -> str:
        return ",".join(str(c) for c in self.choices if c >= 0)


@dataclass(frozen=True)
class GameTree:
    root: Tree
    owner: tuple[str | None, ...] = field(init=False, repr=False, compare=False)
    children: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    outcome: tuple[str | None, ...] = field(init=False, repr=False, compare=False)
    parent: tuple[int | None, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        owner: list[str | None] = []
        children: list[list[int]] = []
        outcome: list[str | None] = []
        parent: list[int | None] = [None]
        # explicit stack keeps deep generated trees clear of the recursion limit
        stack: list[tuple[Tree, int | None]] = [(self.root, None)]
        while stack:
            node, par = stack.pop()
            vid = len(owner)
            if par is not None:
                children[par].append(vid)
                parent.append(par)
            children.append([])
            if isinstance(node, Leaf):
                owner.append(None)
                outcome.append(node.outcome)
            else:
                if not node.children:
                    raise GameError(f"internal vertex {vid} has no children")
                owner.append(node.player)
                outcome.append(None)
                for child in reversed(node.children):
                    stack.append((child, vid))
        object.__setattr__(self, "owner", tuple(owner))
        object.__setattr__(self, "children", tuple(tuple(c) for c in children))
        object.__setattr__(self, "outcome", tuple(outcome))
        object.__setattr__(self, "parent", tuple(parent))

    @property
    def size(self) -> int:
        return len(self.owner)

    @cached_property
    def internal(self) -> tuple[int, ...]:
        return tuple(v for v, p in enumerate(self.owner) if p is not None)

    @cached_property
    def leaves(self) -> tuple[int, ...]:
        return tuple(v for v, p in enumerate(self.owner) if p is None)

    @property
    def leaf_count(self) -> int:
        return len(self.leaves)

    @cached_property
    def players(self) -> tuple[str, ...]:
        return tuple(sorted({p for p in self.owner if p is not None}))

    @cached_property
    def outcomes(self) -> tuple[str, ...]:
        return tuple(sorted({o for o in self.outcome if o is not None}))

    def vertices_of(self, player: str) -> tuple[int, ...]:
        return self._vertices_by_player.get(player, ())

    @cached_property
    def _vertices_by_player(self) -> dict[str, tuple[int, ...]]:
        out: dict[str, list[int]] = {}
        for v in self.internal:
            out.setdefault(self.owner[v], []).append(v)
        return {p: tuple(vs) for p, vs in out.items()}

    def is_leaf(self, vertex: int) -> bool:
        return self.owner[vertex] is None

    def path_to(self, vertex: int) -> list[int]:
        path = [vertex]
        while self.parent[path[-1]] is not None:
            path.append(self.parent[path[-1]])
        path.reverse()
        return path

    def child_index(self, vertex: int) -> int:
        """Position of ``vertex`` among its parent's children."""
        par = self.parent[vertex]
        if par is None:
            raise GameError("the root has no parent")
        return self.children[par].index(vertex)

    def leaf_path(self, leaf: int) -> str:
        path = self.path_to(leaf)
        return ".".join(str(self.children[u].index(w)) for u, w in zip(path, path[1:]))

    def leaf_from_path(self, text: str) -> int:
        v = 0
        for part in filter(None, text.split(".")):
            kids = self.children[v]
            idx = int(part)
            if self.is_leaf(v) or not 0 <= idx < len(kids):
                raise GameError(f"leaf path {text!r} leaves the tree")
            v = kids[idx]
        if not self.is_leaf(v):
            raise GameError(f"leaf path {text!r} ends at internal vertex {v}")
        return v

    def subtree(self, vertex: int) -> list[int]:
        out, stack = [], [vertex]
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(reversed(self.children[v]))
        return out

    def profile(self, choices: Mapping[int, int] | StrategyProfile) -> StrategyProfile:
        """Build a validated profile from a vertex -> child-index mapping."""
        if isinstance(choices, StrategyProfile):
            choices = choices.as_dict()
        problems = profile_diagnostics(self, choices)
        if problems:
            raise InvalidProfileError(problems)
        dense = [-1] * self.size
        for v in self.internal:
            dense[v] = int(choices[v])
        return StrategyProfile(tuple(dense))

    def leftmost_profile(self) -> StrategyProfile:
        return StrategyProfile(tuple(-1 if p is None else 0 for p in self.owner))

    def all_profiles(self) -> Iterator[StrategyProfile]:
        internal = self.internal
        ranges = [range(len(self.children[v])) for v in internal]
        base = [-1] * self.size
        for combo in itertools.product(*ranges):
            for v, c in zip(internal, combo):
                base[v] = c
            yield StrategyProfile(tuple(base))

    def profile_count(self) -> int:
        n = 1
        for v in self.internal:
            n *= len(self.children[v])
        return n

    def subprofile_outcomes(self, s: StrategyProfile) -> list[str]:
        """Outcome induced by ``s`` inside the subtree of every vertex."""
        out: list[str] = [""] * self.size
        for v in reversed(range(self.size)):
            if self.owner[v] is None:
                out[v] = self.outcome[v]
            else:
                out[v] = out[self.children[v][s.choices[v]]]
        return out


def profile_diagnostics(tree: GameTree, choices: Mapping[int, int]) -> list[Diagnostic]:
    problems = []
    for v in tree.internal:
        if v not in choices:
            problems.append(Diagnostic("missing-choice", "no choice at internal vertex", vertex=v))
            continue
        c = choices[v]
        n = len(tree.children[v])
        if not isinstance(c, int) or isinstance(c, bool) or not 0 <= c < n:
            problems.append(Diagnostic(
                "bad-choice", f"choice {c!r} outside 0..{n - 1}", vertex=v))
    for v in choices:
        if not isinstance(v, int) or not 0 <= v < tree.size or tree.is_leaf(v):
            problems.append(Diagnostic(
                "unknown-vertex", f"{v!r} is not an internal vertex",
                vertex=v if isinstance(v, int) else None))
    return problems


def induced_play(tree: GameTree, s: StrategyProfile) -> Play:
    if len(s) != tree.size:
        raise InvalidProfileError([Diagnostic(
            "size-mismatch", f"profile covers {len(s)} vertices, tree has {tree.size}")])
    path = [0]
    v = 0
    children, choices = tree.children, s.choices
    while tree.owner[v] is not None:
        c = choices[v]
        kids = children[v]
        if not 0 <= c < len(kids):
            raise InvalidProfileError([Diagnostic(
                "bad-choice", f"choice {c} outside 0..{len(kids) - 1}", vertex=v)])
        v = kids[c]
        path.append(v)
    return Play(tuple(path), tree.outcome[v])


@dataclass(frozen=True)
class PreferenceRelation:
    """Strict preference of one player; ``(x, y)`` in ``pairs`` means x < y.

    Pairs are kept as given. No transitivity is assumed, so heights are
    longest paths in the raw relation graph.
    """

    player: str
    pairs: frozenset[tuple[str, str]]

    def __post_init__(self) -> None:
        pairs = frozenset((str(x), str(y)) for x, y in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        for x, y in pairs:
            if x == y:
                raise ReflexivePairError(
                    f"preference of {self.player} has reflexive pair ({x}, {x})")

    def is_improvement(self, old: str, new: str) -> bool:
        return (old, new) in self.pairs

    @cached_property
    def successors(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {}
        for x, y in sorted(self.pairs):
            out.setdefault(x, []).append(y)
        return {x: tuple(ys) for x, ys in out.items()}

    @cached_property
    def outcomes(self) -> tuple[str, ...]:
        return tuple(sorted({o for pair in self.pairs for o in pair}))

    @cached_property
    def cycle(self) -> list[str] | None:
        return detect_preference_cycle(self)

    @property
    def is_acyclic(self) -> bool:
        return self.cycle is None

    @cached_property
    def _heights(self) -> dict[str, int]:
        return preference_height(self)[1]

    @property
    def height(self) -> int:
        return max(self._heights.values(), default=1)

    def outcome_height(self, outcome: str) -> int:
        return self._heights.get(outcome, 1)


def total_order(player: str, worst_to_best: Iterable[str]) -> PreferenceRelation:
    """Strict total order with every implied pair listed."""
    seq = list(worst_to_best)
    return PreferenceRelation(player, frozenset(itertools.combinations(seq, 2)))


def detect_preference_cycle(p: PreferenceRelation) -> list[str] | None:
    """Return one cycle ``[x0, x1, ..., xk]`` with x0 < x1 < ... < xk < x0, or None."""
    succ = p.successors
    state: dict[str, int] = {}  # 1 = on stack, 2 = done
    for start in sorted(succ):
        if state.get(start):
            continue
        stack = [(start, iter(succ.get(start, ())))]
        path = [start]
        state[start] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                path.pop()
                state[node] = 2
            elif state.get(nxt) == 1:
                return path[path.index(nxt):]
            elif not state.get(nxt):
                state[nxt] = 1
                path.append(nxt)
                stack.append((nxt, iter(succ.get(nxt, ()))))
    return None


def preference_height(
    p: PreferenceRelation, outcomes: Iterable[str] = ()
) -> tuple[int, dict[str, int]]:
    """Longest chain cardinality overall and per chain maximum."""
    cycle = detect_preference_cycle(p)
    if cycle is not None:
        raise CyclicPreferenceError(p.player, cycle)
    preds: dict[str, list[str]] = {}
    for x, y in p.pairs:
        preds.setdefault(y, []).append(x)
    heights: dict[str, int] = {}

    def height(o: str) -> int:
        # iterative to survive long chains
        stack = [o]
        while stack:
            cur = stack[-1]
            if cur in heights:
                stack.pop()
                continue
            pending = [x for x in preds.get(cur, ()) if x not in heights]
            if pending:
                stack.extend(pending)
            else:
                heights[cur] = 1 + max((heights[x] for x in preds.get(cur, ())), default=0)
                stack.pop()
        return heights[o]

    universe = set(p.outcomes) | set(outcomes)
    per_outcome = {o: height(o) for o in sorted(universe)}
    return max(per_outcome.values(), default=1), per_outcome


@dataclass(frozen=True)
class GameInstance:
    tree: GameTree
    players: tuple[str, ...]
    outcomes: tuple[str, ...]
    preferences: Mapping[str, PreferenceRelation]
    payoffs: Mapping[str, Mapping[int, Fraction]] | None = None

    def outcome_of(self, s: StrategyProfile) -> str:
        return induced_play(self.tree, s).outcome

    def preference(self, player: str) -> PreferenceRelation:
        return self.preferences.get(player) or PreferenceRelation(player, frozenset())

    @cached_property
    def acyclic_players(self) -> tuple[str, ...]:
        return tuple(a for a in self.players if self.preference(a).is_acyclic)

    @property
    def all_acyclic(self) -> bool:
        return len(self.acyclic_players) == len(self.players)

    def height(self, player: str) -> int:
        return self.preference(player).height

    def payoff(self, player: str, leaf: int) -> Fraction:
        if self.payoffs is None:
            raise GameError("instance has no payoffs")
        return self.payoffs[player][leaf]


def payoff_preferences(
    tree: GameTree, players: Iterable[str], payoffs: Mapping[str, Mapping[int, Fraction]]
) -> dict[str, PreferenceRelation]:
    """Preferences over leaf outcomes induced by payoffs (x < y iff pay(x) < pay(y)).

    Requires payoffs to be a function of the outcome label.
    """
    prefs = {}
    for a in players:
        by_outcome: dict[str, Fraction] = {}
        for leaf in tree.leaves:
            o = tree.outcome[leaf]
            val = Fraction(payoffs[a][leaf])
            if by_outcome.setdefault(o, val) != val:
                raise GameError(f"payoff of {a} is not a function of outcome {o}")
        prefs[a] = PreferenceRelation(a, frozenset(
            (x, y) for x in by_outcome for y in by_outcome if by_outcome[x] < by_outcome[y]))
    return prefs


def tuple_outcome_preferences(players: list[str], outcomes: Iterable[str]) -> dict[str, PreferenceRelation]:
    """Outcomes written "n1,n2,...": the i-th player prefers larger i-th entries."""
    outs = list(outcomes)
    vals = {o: [Fraction(x) for x in o.split(",")] for o in outs}
    return {
        a: PreferenceRelation(a, frozenset(
            (x, y) for x in outs for y in outs if vals[x][i] < vals[y][i]))
        for i, a in enumerate(players)
    }


def validate_instance(
    g: GameInstance, profiles: Iterable[Mapping[int, int] | StrategyProfile] = ()
) -> list[Diagnostic]:
    """Check every invariant of an instance; returns diagnostics (empty means ok).

    Warnings (severity "warning") do not make an instance invalid.
    """
    out: list[Diagnostic] = []
    tree = g.tree
    known_players = set(g.players)
    for v in tree.internal:
        p = tree.owner[v]
        if p not in known_players:
            out.append(Diagnostic("unknown-player", f"owner {p} is not a listed player",
                                  vertex=v, player=p))
        if len(tree.children[v]) == 1:
            out.append(Diagnostic("single-child", "vertex has one child and is inert",
                                  severity="warning", vertex=v))
    known_outcomes = set(g.outcomes)
    for leaf in tree.leaves:
        if tree.outcome[leaf] not in known_outcomes:
            out.append(Diagnostic("unknown-outcome",
                                  f"leaf outcome {tree.outcome[leaf]} is not listed", vertex=leaf))
    for p in tree.players:
        if p not in g.preferences:
            out.append(Diagnostic("missing-preference", "vertex owner has no preference",
                                  player=p))
    for p, rel in g.preferences.items():
        if p not in known_players:
            out.append(Diagnostic("unknown-player", "preference for unlisted player", player=p))
        if rel.player != p:
            out.append(Diagnostic("preference-owner",
                                  f"relation stored under {p} belongs to {rel.player}", player=p))
        for o in rel.outcomes:
            if o not in known_outcomes:
                out.append(Diagnostic("unknown-outcome",
                                      f"preference mentions unlisted outcome {o}", player=p))
    if g.payoffs is not None:
        for p in g.players:
            table = g.payoffs.get(p)
            if table is None:
                out.append(Diagnostic("missing-payoffs", "no payoff table", player=p))
                continue
            for leaf in tree.leaves:
                if leaf not in table:
                    out.append(Diagnostic("missing-payoff", f"no payoff for {p}",
                                          vertex=leaf, player=p))
    for prof in profiles:
        choices = prof.as_dict() if isinstance(prof, StrategyProfile) else prof
        out.extend(profile_diagnostics(tree, choices))
    return out


def is_ok(diagnostics: Iterable[Diagnostic]) -> bool:
    return not any(d.severity == "error" for d in diagnostics)
