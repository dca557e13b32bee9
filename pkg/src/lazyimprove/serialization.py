"""JSON game and profile documents (format version 1).

Game document::

    {"format": 1,
     "players": ["a", "b"],
     "outcomes": ["x", "y"],
     "tree": {"player": "a", "children": [{"outcome": "x"}, {"outcome": "y"}]},
     "preferences": {"a": [["y", "x"]], "b": [["x", "y"]]},
     "payoffs": {"a": {"0": "1", "1": "1/2"}, ...}}      # optional

Payoff tables are keyed by leaf path: child indices from the root joined
with ".", the empty string for a single-leaf game. Payoff values are
rationals written as strings ("3", "-1/2", "0.25").

Profile document: ``{"<vertex id>": <child index>, ...}``.
"""

from __future__ import annotations

import json
from collections.abc import Mapping
from fractions import Fraction
from pathlib import Path
from typing import Any

from .game_model import (
    Diagnostic,
    GameError,
    GameInstance,
    GameTree,
    Leaf,
    Node,
    PreferenceRelation,
    StrategyProfile,
    Tree,
    is_ok,
    validate_instance,
)

FORMAT_VERSION = 1


class InstanceValidationError(GameError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics if d.severity == "error"))


def tree_to_json(node: Tree) -> dict[str, Any]:
    if isinstance(node, Leaf):
        return {"outcome": node.outcome}
    return {"player": node.player, "children": [tree_to_json(c) for c in node.children]}


def _tree_from_json(obj: Any, problems: list[Diagnostic], counter: list[int]) -> Tree | None:
    vid = counter[0]
    counter[0] += 1
    if not isinstance(obj, Mapping):
        problems.append(Diagnostic("bad-node", "tree node must be an object", vertex=vid))
        return None
    if "outcome" in obj:
        if "children" in obj or "player" in obj:
            problems.append(Diagnostic("bad-node", "leaf carries player/children", vertex=vid))
        return Leaf(str(obj["outcome"]))
    player, children = obj.get("player"), obj.get("children")
    if player is None or not isinstance(children, list):
        problems.append(Diagnostic(
            "bad-node", "internal node needs 'player' and a 'children' list", vertex=vid))
        return None
    if not children:
        problems.append(Diagnostic("no-children", "internal vertex has no children", vertex=vid))
        return None
    kids = [_tree_from_json(c, problems, counter) for c in children]
    if any(k is None for k in kids):
        return None
    return Node(str(player), tuple(kids))


def validate_document(doc: Any) -> tuple[GameInstance | None, list[Diagnostic]]:
    """Validate a parsed game document; build the instance when it is sound."""
    problems: list[Diagnostic] = []
    if not isinstance(doc, Mapping):
        return None, [Diagnostic("bad-document", "game document must be a JSON object")]
    if doc.get("format", FORMAT_VERSION) != FORMAT_VERSION:
        problems.append(Diagnostic("format", f"unsupported format {doc.get('format')!r}"))
    players = doc.get("players")
    if not isinstance(players, list) or not players:
        problems.append(Diagnostic("players", "'players' must be a nonempty list"))
        players = []
    outcomes = doc.get("outcomes")
    if not isinstance(outcomes, list) or not outcomes:
        problems.append(Diagnostic("outcomes", "'outcomes' must be a nonempty list"))
        outcomes = []
    root = _tree_from_json(doc.get("tree"), problems, [0])

    prefs: dict[str, PreferenceRelation] = {}
    raw_prefs = doc.get("preferences", {})
    if not isinstance(raw_prefs, Mapping):
        problems.append(Diagnostic("preferences", "'preferences' must be an object"))
        raw_prefs = {}
    for p, pairs in raw_prefs.items():
        if not isinstance(pairs, list) or not all(
            isinstance(q, list) and len(q) == 2 for q in pairs
        ):
            problems.append(Diagnostic("preferences", "pairs must be [x, y] lists", player=p))
            continue
        reflexive = [x for x, y in pairs if x == y]
        for x in reflexive:
            problems.append(Diagnostic("reflexive-pair", f"reflexive pair ({x}, {x})", player=p))
        if not reflexive:
            prefs[str(p)] = PreferenceRelation(str(p), frozenset((str(x), str(y)) for x, y in pairs))

    if root is None or problems:
        return None, problems
    tree = GameTree(root)

    payoffs = None
    if doc.get("payoffs") is not None:
        payoffs = {}
        raw = doc["payoffs"]
        if not isinstance(raw, Mapping):
            return None, [Diagnostic("payoffs", "'payoffs' must be an object")]
        for p, table in raw.items():
            if not isinstance(table, Mapping):
                problems.append(Diagnostic("payoffs", "payoff table must be an object", player=p))
                continue
            parsed = {}
            for path, value in table.items():
                try:
                    parsed[tree.leaf_from_path(str(path))] = Fraction(str(value))
                except (GameError, ValueError, ZeroDivisionError) as exc:
                    problems.append(Diagnostic("payoffs", str(exc), player=p))
            payoffs[str(p)] = parsed
        if problems:
            return None, problems

    g = GameInstance(
        tree=tree,
        players=tuple(str(p) for p in players),
        outcomes=tuple(str(o) for o in outcomes),
        preferences=prefs,
        payoffs=payoffs,
    )
    problems.extend(validate_instance(g))
    return (g if is_ok(problems) else None), problems


def instance_from_json(doc: Any) -> GameInstance:
    g, problems = validate_document(doc)
    if g is None:
        raise InstanceValidationError(problems)
    return g


def instance_to_json(g: GameInstance) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "format": FORMAT_VERSION,
        "players": list(g.players),
        "outcomes": list(g.outcomes),
        "tree": tree_to_json(g.tree.root),
        "preferences": {
            p: [list(pair) for pair in sorted(rel.pairs)] for p, rel in sorted(g.preferences.items())
        },
    }
    if g.payoffs is not None:
        doc["payoffs"] = {
            p: {g.tree.leaf_path(leaf): str(val) for leaf, val in sorted(table.items())}
            for p, table in sorted(g.payoffs.items())
        }
    return doc


def profile_to_json(s: StrategyProfile) -> dict[str, int]:
    return {str(v): c for v, c in s.as_dict().items()}


def profile_from_json(tree: GameTree, obj: Mapping[str, Any]) -> StrategyProfile:
    try:
        choices = {int(k): v for k, v in obj.items()}
    except (TypeError, ValueError) as exc:
        raise GameError(f"profile keys must be vertex ids: {exc}") from None
    return tree.profile(choices)


def load_json(path: str | Path) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def load_instance(path: str | Path) -> GameInstance:
    return instance_from_json(load_json(path))


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))
