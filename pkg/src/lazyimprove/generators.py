"""Instance generators: seeded random games, the tight families, shipped fixtures."""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

from .dynamics import FixedScript
from .game_model import (
    GameError,
    GameInstance,
    GameTree,
    Leaf,
    Node,
    PreferenceRelation,
    StrategyProfile,
    Tree,
    payoff_preferences,
    total_order,
)
from .serialization import instance_from_json, profile_from_json

PREFERENCE_MODES = ("total", "acyclic", "full")


@dataclass(frozen=True)
class GeneratorParams:
    """Parameters of ``generate_random``.

    ``preference_mode`` is one of "total", "acyclic", "full" or a tuple with
    one mode per player. "full" is the relation of all distinct outcome
    pairs, a cyclic player standing for nature. With ``payoff_range`` set,
    every (player, outcome) gets a payoff ``k / payoff_denominator`` with
    integer ``k`` in ``0..payoff_range``, and preferences follow payoffs.
    """

    seed: int = 0
    players: int = 2
    max_depth: int = 3
    max_branching: int = 3
    outcomes: int = 4
    preference_mode: str | tuple[str, ...] = "total"
    max_leaves: int = 10
    payoff_range: int | None = None
    payoff_denominator: int = 1

    def __post_init__(self) -> None:
        if self.players < 1 or self.outcomes < 1 or self.max_leaves < 1:
            raise ValueError("players, outcomes and max_leaves must be positive")
        if self.payoff_denominator < 1:
            raise ValueError("payoff_denominator must be positive")
        if self.max_depth < 0 or self.max_branching < 2:
            raise ValueError("max_depth must be >= 0 and max_branching >= 2")
        for m in self.modes:
            if m not in PREFERENCE_MODES:
                raise ValueError(f"unknown preference mode {m!r}")
        if len(self.modes) != self.players:
            raise ValueError("one preference mode per player expected")

    @property
    def modes(self) -> tuple[str, ...]:
        if isinstance(self.preference_mode, str):
            return (self.preference_mode,) * self.players
        return tuple(self.preference_mode)

    @property
    def player_names(self) -> tuple[str, ...]:
        names = "abcdefghijklmnopqrstuvwxyz"
        if self.players <= len(names):
            return tuple(names[: self.players])
        return tuple(f"p{i}" for i in range(self.players))


def _random_tree(params: GeneratorParams, rng: random.Random, names, outcomes) -> Tree:
    def build(depth: int, budget: int, force: bool) -> Tree:
        if depth >= params.max_depth or budget < 2 or not (force or rng.random() < 0.7):
            return Leaf(rng.choice(outcomes))
        k = rng.randint(2, min(params.max_branching, budget))
        shares = [1] * k
        for _ in range(budget - k):
            shares[rng.randrange(k)] += 1
        kids = tuple(build(depth + 1, b, False) for b in shares)
        return Node(rng.choice(names), kids)

    return build(0, params.max_leaves, True)


def _random_relation(mode: str, player: str, outcomes: list[str], rng: random.Random):
    if mode == "full":
        return PreferenceRelation(player, frozenset(
            (x, y) for x in outcomes for y in outcomes if x != y))
    order = outcomes[:]
    rng.shuffle(order)
    if mode == "total":
        return total_order(player, order)
    return PreferenceRelation(player, frozenset(
        pair for pair in itertools.combinations(order, 2) if rng.random() < 0.5))


def generate_random(params: GeneratorParams) -> tuple[GameInstance, StrategyProfile]:
    """Random instance and start profile, fully determined by ``params``."""
    rng = random.Random(params.seed)
    names = list(params.player_names)
    outcomes = [f"o{i}" for i in range(params.outcomes)]
    tree = GameTree(_random_tree(params, rng, names, outcomes))
    payoffs = None
    if params.payoff_range is not None:
        table = {a: {o: Fraction(rng.randint(0, params.payoff_range), params.payoff_denominator)
                     for o in outcomes}
                 for a in names}
        payoffs = {a: {leaf: table[a][tree.outcome[leaf]] for leaf in tree.leaves}
                   for a in names}
        prefs = payoff_preferences(tree, names, payoffs)
    else:
        prefs = {a: _random_relation(m, a, outcomes, rng) for a, m in zip(names, params.modes)}
    g = GameInstance(tree, tuple(names), tuple(outcomes), prefs, payoffs)
    s0 = tree.profile({v: rng.randrange(len(tree.children[v])) for v in tree.internal})
    return g, s0


def _bracket_tree(outcome_names: list[str]) -> GameTree:
    return GameTree(Node("a", tuple(Node("b", (Leaf(x), Leaf("y"))) for x in outcome_names)))


def _family_start(tree: GameTree) -> StrategyProfile:
    return tree.leftmost_profile()


def linear_family(n: int) -> tuple[GameInstance, StrategyProfile]:
    """Root ``a`` over n+1 ``b``-vertices, each offering (x, y); y < x for a, x < y for b."""
    if n < 0:
        raise ValueError("n must be >= 0")
    tree = _bracket_tree(["x"] * (n + 1))
    prefs = {"a": total_order("a", ["y", "x"]), "b": total_order("b", ["x", "y"])}
    return GameInstance(tree, ("a", "b"), ("x", "y"), prefs), _family_start(tree)


def x_leaf(i: int) -> int:
    return 2 + 3 * i


def y_leaf(i: int) -> int:
    return 3 + 3 * i


def quadratic_script(n: int) -> list[tuple[str, int]]:
    """Walkthrough of (n+2)(n+3)/2 - 2 lazy improvements on ``quadratic_family(n)``."""
    steps: list[tuple[str, int]] = []
    for m in range(n, 0, -1):
        steps.extend(("a", x_leaf(i)) for i in range(1, m + 1))
        steps.append(("b", y_leaf(m)))
        steps.append(("a", x_leaf(0)))
    steps.append(("b", y_leaf(0)))
    return steps


def quadratic_family(n: int) -> tuple[GameInstance, StrategyProfile, FixedScript]:
    """Same tree as ``linear_family`` with y < x0 < ... < xn for a and every xi < y for b."""
    if n < 0:
        raise ValueError("n must be >= 0")
    xs = [f"x{i}" for i in range(n + 1)]
    tree = _bracket_tree(xs)
    prefs = {
        "a": total_order("a", ["y"] + xs),
        "b": PreferenceRelation("b", frozenset((x, "y") for x in xs)),
    }
    g = GameInstance(tree, ("a", "b"), tuple(xs + ["y"]), prefs)
    return g, _family_start(tree), FixedScript(tuple(quadratic_script(n)))


def flat_cyclic_game(n: int) -> tuple[GameInstance, StrategyProfile]:
    """``a`` picks among leaves x0..xn with the cyclic preference x0 < x1 < ... < xn < x0."""
    if n < 1:
        raise ValueError("a preference cycle needs n >= 1")
    xs = [f"x{i}" for i in range(n + 1)]
    tree = GameTree(Node("a", tuple(Leaf(x) for x in xs)))
    pairs = frozenset(zip(xs, xs[1:] + xs[:1]))
    g = GameInstance(tree, ("a",), tuple(xs), {"a": PreferenceRelation("a", pairs)})
    return g, tree.leftmost_profile()


@dataclass(frozen=True)
class Fixture:
    name: str
    instance: GameInstance
    profiles: tuple[StrategyProfile, ...]
    rounds: tuple[dict[str, int], ...] = ()
    description: str = ""


FIXTURES = (
    "avoided-outcomes-worked",
    "lazy-conv-demo",
    "lazy-conv-demo-2",
    "unreachable-ne",
    "cycle-1-0",
    "sync-cycle",
)


def fixture_document(name: str) -> dict:
    if name not in FIXTURES:
        raise GameError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}")
    text = resources.files("lazyimprove").joinpath("fixtures", f"{name}.json").read_text("utf-8")
    return json.loads(text)


def fixture(name: str) -> Fixture:
    doc = fixture_document(name)
    g = instance_from_json(doc["game"])
    profiles = tuple(profile_from_json(g.tree, p) for p in doc.get("profiles", []))
    rounds = tuple({p: int(leaf) for p, leaf in r.items()} for r in doc.get("rounds", []))
    return Fixture(name, g, profiles, rounds, doc.get("description", ""))
