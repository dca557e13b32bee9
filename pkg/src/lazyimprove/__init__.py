"""Lazy improvement dynamics on finite sequential games."""

from .convertibility import (
    can_convert,
    can_lazily_convert,
    full_improvements,
    is_nash,
    lazy_improvements,
    lazy_targets,
)
from .game_model import (
    GameInstance,
    GameTree,
    Leaf,
    Node,
    PreferenceRelation,
    StrategyProfile,
    induced_play,
    total_order,
)
from .measures import game_avoided, potential, profile_avoided

__all__ = [
    "GameInstance", "GameTree", "Leaf", "Node", "PreferenceRelation", "StrategyProfile",
    "can_convert", "can_lazily_convert", "full_improvements", "game_avoided", "induced_play",
    "is_nash", "lazy_improvements", "lazy_targets", "potential", "profile_avoided", "total_order",
]
