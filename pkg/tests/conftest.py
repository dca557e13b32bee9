from __future__ import annotations

import pytest
from hypothesis import settings, strategies as st

from lazyimprove.game_model import GameInstance, GameTree, Leaf, Node, total_order
from lazyimprove.generators import GeneratorParams, generate_random

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@st.composite
def random_games(draw, players=(1, 3), max_leaves=8, modes=("total", "acyclic")):
    """A generated instance and start profile, drawn through the seeded generator."""
    params = GeneratorParams(
        seed=draw(st.integers(0, 10**6)),
        players=draw(st.integers(*players)),
        max_depth=draw(st.integers(1, 4)),
        max_branching=draw(st.integers(2, 3)),
        outcomes=draw(st.integers(2, 5)),
        preference_mode=draw(st.sampled_from(modes)),
        max_leaves=draw(st.integers(2, max_leaves)),
    )
    return generate_random(params)


@pytest.fixture
def two_level_game() -> GameInstance:
    """a picks a b-vertex; each b-vertex offers two outcomes."""
    tree = GameTree(Node("a", (Node("b", (Leaf("w"), Leaf("x"))), Node("b", (Leaf("y"), Leaf("z"))))))
    prefs = {"a": total_order("a", ["w", "x", "y", "z"]), "b": total_order("b", ["z", "y", "x", "w"])}
    return GameInstance(tree, ("a", "b"), ("w", "x", "y", "z"), prefs)


def pytest_terminal_summary(terminalreporter) -> None:
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
