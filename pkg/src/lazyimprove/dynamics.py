"""Improvement dynamics on sequential games.

Engines:

* ``run_lazy``: one lazy improvement per step, chosen by a scheduler.
* ``run_lazy_with_nature``: same, but keeps going through cycles caused by
  players with cyclic preferences and checks the per-player step bound.
* ``run_full_improvement``: unrestricted better response (may cycle).
* ``run_synchronous_best_response``: every improving player moves to a
  best lazy target at once.
* ``run_epsilon_lazy``: lazy moves that raise the mover's payoff by more
  than epsilon.
"""

from __future__ import annotations

import random
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .convertibility import (
    Move,
    full_conversions,
    full_improvements,
    is_nash,
    lazy_improvements,
    lazy_targets,
)
from .game_model import (
    GameError,
    GameInstance,
    PreferenceRelation,
    StrategyProfile,
    induced_play,
)
from .measures import game_avoided, potentials

MovesFor = Callable[[str], list[Move]]


class EngineError(GameError):
    pass


class ScriptRejected(EngineError):
    pass


class AmbiguousBestResponse(EngineError):
    def __init__(self, player: str, outcomes: list[str]):
        self.player = player
        self.outcomes = outcomes
        super().__init__(f"best response of {player} is ambiguous among incomparable "
                         f"outcomes {outcomes}")


class BoundViolation(RuntimeError):
    pass


# -- move selection -------------------------------------------------------

def maximal_moves(pref: PreferenceRelation, moves: Sequence[Move]) -> list[Move]:
    """Moves whose outcome no other candidate strictly beats."""
    outs = {m.target_outcome for m in moves}
    top = {o for o in outs if not any(pref.is_improvement(o, p) for p in outs)}
    return [m for m in moves if m.target_outcome in top]


def best_move(pref: PreferenceRelation, moves: Sequence[Move]) -> Move:
    """A maximal move, lowest target leaf first; falls back to the first move on cycles."""
    top = maximal_moves(pref, moves)
    return top[0] if top else moves[0]


class _Chooser:
    def pick(self, s: StrategyProfile, moves_for: MovesFor) -> Move | None:
        raise NotImplementedError


@dataclass(frozen=True)
class RoundRobinFirstMove:
    """Players take turns; the mover plays her first improving move (lowest leaf)."""

    name = "first"

    def chooser(self, g: GameInstance) -> _Chooser:
        return _RoundRobin(g, best=False)


@dataclass(frozen=True)
class RoundRobinBestMove:
    """Players take turns; the mover plays a preference-maximal improving move."""

    name = "best"

    def chooser(self, g: GameInstance) -> _Chooser:
        return _RoundRobin(g, best=True)


@dataclass(frozen=True)
class SeededRandom:
    seed: int = 0
    name = "random"

    def chooser(self, g: GameInstance) -> _Chooser:
        return _Random(g, self.seed)


ScriptTarget = Union[int, Mapping[int, int]]


@dataclass(frozen=True)
class FixedScript:
    """Replay ``(player, target)`` steps; a target is a leaf id or a full choice map."""

    steps: tuple[tuple[str, ScriptTarget], ...] = ()
    name = "script"

    def chooser(self, g: GameInstance) -> _Chooser:
        return _Script(self.steps)


Scheduler = Union[RoundRobinFirstMove, RoundRobinBestMove, SeededRandom, FixedScript]


class _RoundRobin(_Chooser):
    def __init__(self, g: GameInstance, best: bool):
        self.g = g
        self.best = best
        self.cursor = 0

    def pick(self, s, moves_for):
        players = self.g.players
        n = len(players)
        for k in range(n):
            idx = (self.cursor + k) % n
            moves = moves_for(players[idx])
            if moves:
                self.cursor = (idx + 1) % n
                if self.best:
                    return best_move(self.g.preference(players[idx]), moves)
                return moves[0]
        return None


class _Random(_Chooser):
    def __init__(self, g: GameInstance, seed: int):
        self.g = g
        self.rng = random.Random(seed)

    def pick(self, s, moves_for):
        options = [(a, ms) for a in self.g.players if (ms := moves_for(a))]
        if not options:
            return None
        _, moves = options[self.rng.randrange(len(options))]
        return moves[self.rng.randrange(len(moves))]


class _Script(_Chooser):
    def __init__(self, steps):
        self.steps = list(steps)
        self.pos = 0

    def pick(self, s, moves_for):
        if self.pos >= len(self.steps):
            return None
        player, target = self.steps[self.pos]
        moves = moves_for(player)
        for m in moves:
            if isinstance(target, Mapping):
                if all(m.target[v] == c for v, c in target.items()):
                    break
            elif m.target_leaf == target:
                break
        else:
            raise ScriptRejected(
                f"script step {self.pos}: {player} has no admissible move to {target!r}")
        self.pos += 1
        return m


# -- traces -----------------------------------------------------------------

@dataclass(frozen=True)
class Step:
    index: int
    movers: tuple[str, ...]
    pre_outcome: str
    post_outcome: str
    changes: dict[int, int]
    target_leaves: tuple[int, ...]
    potential_before: dict[str, int] = field(default_factory=dict)
    potential_after: dict[str, int] = field(default_factory=dict)

    @property
    def mover(self) -> str:
        return ",".join(self.movers)

    @property
    def changed_vertices(self) -> tuple[int, ...]:
        return tuple(sorted(self.changes))


@dataclass
class ImprovementTrace:
    engine: str
    scheduler: str
    start: StrategyProfile
    steps: list[Step]
    profiles: list[StrategyProfile]
    terminal: str  # "nash", "epsilon-nash", "cycle", "budget" or "script-end"
    per_player_counts: dict[str, int]
    cycle: list[StrategyProfile] | None = None

    @property
    def final(self) -> StrategyProfile:
        return self.profiles[-1]

    def __len__(self) -> int:
        return len(self.steps)


def _check_start(g: GameInstance, s0: StrategyProfile) -> StrategyProfile:
    return g.tree.profile(s0)


def global_step_bound(g: GameInstance) -> int:
    """(h - 1)(l - 1) with h the largest preference height; needs acyclic preferences."""
    h = max((g.height(a) for a in g.players), default=1)
    return (h - 1) * (g.tree.leaf_count - 1)


def player_step_bounds(g: GameInstance) -> dict[str, int]:
    """(h_a - 1) * avoided(g, a) for every acyclic player."""
    avoided = game_avoided(g.tree, g.players)
    return {a: (g.height(a) - 1) * avoided[a] for a in g.acyclic_players}


def _default_budget(g: GameInstance, max_steps: int | None) -> int:
    if max_steps is None:
        if not g.all_acyclic:
            raise EngineError("max_steps is required when some preference is cyclic")
        max_steps = global_step_bound(g) + 1
    if max_steps <= 0:
        raise EngineError("max_steps must be positive")
    return max_steps


def _run(
    g: GameInstance,
    s0: StrategyProfile,
    sched: Scheduler,
    max_steps: int,
    engine: str,
    moves: Callable[[GameInstance, StrategyProfile, str], list[Move]],
    terminal_test: Callable[[StrategyProfile], bool],
    *,
    stop_on_cycle: bool = True,
    track_potentials: bool = True,
) -> ImprovementTrace:
    s = _check_start(g, s0)
    chooser = sched.chooser(g)
    steps: list[Step] = []
    profiles = [s]
    seen = {s: 0}
    counts = {a: 0 for a in g.players}
    cycle = None
    terminal = None
    pot = potentials(g, s) if track_potentials else {}
    tree = g.tree
    while len(steps) < max_steps:
        cache: dict[str, list[Move]] = {}

        def moves_for(a: str) -> list[Move]:
            if a not in cache:
                cache[a] = moves(g, s, a)
            return cache[a]

        move = chooser.pick(s, moves_for)
        if move is None:
            break
        t = move.target
        new_pot = potentials(g, t) if track_potentials else {}
        steps.append(Step(
            index=len(steps),
            movers=(move.mover,),
            pre_outcome=induced_play(tree, s).outcome,
            post_outcome=move.target_outcome,
            changes=move.changes(),
            target_leaves=(move.target_leaf,),
            potential_before=pot,
            potential_after=new_pot,
        ))
        counts[move.mover] += 1
        profiles.append(t)
        s, pot = t, new_pot
        if cycle is None:
            if s in seen:
                cycle = profiles[seen[s]:-1]
                if stop_on_cycle:
                    terminal = "cycle"
                    break
            else:
                seen[s] = len(profiles) - 1
    if terminal is None:
        if terminal_test(s):
            terminal = "epsilon-nash" if engine == "epsilon" else "nash"
        elif isinstance(sched, FixedScript) and len(steps) < max_steps:
            terminal = "script-end"
        else:
            terminal = "budget"
    return ImprovementTrace(engine, sched.name, profiles[0], steps, profiles, terminal,
                            counts, cycle)


def run_lazy(
    g: GameInstance,
    s0: StrategyProfile,
    sched: Scheduler | None = None,
    max_steps: int | None = None,
    *,
    track_potentials: bool = True,
) -> ImprovementTrace:
    """Lazy better-response until no player can improve, a profile repeats, or budget runs out.

    Without an explicit budget (all preferences acyclic) the budget is one
    more than the global bound, so hitting it signals a bug rather than a
    slow run.
    """
    sched = sched or RoundRobinFirstMove()
    budget = _default_budget(g, max_steps)
    return _run(g, s0, sched, budget, "lazy", lazy_improvements, lambda s: is_nash(g, s),
                track_potentials=track_potentials and g.all_acyclic)


def run_lazy_with_nature(
    g: GameInstance,
    s0: StrategyProfile,
    sched: Scheduler,
    max_steps: int,
    *,
    track_potentials: bool = False,
) -> ImprovementTrace:
    """Lazy dynamics where some players may have cyclic preferences.

    Repeated profiles are recorded (first cycle only) but do not stop the
    run. Raises ``BoundViolation`` if an acyclic player moves more often
    than (h_a - 1) * avoided(g, a).
    """
    budget = _default_budget(g, max_steps)
    trace = _run(g, s0, sched, budget, "lazy", lazy_improvements, lambda s: is_nash(g, s),
                 stop_on_cycle=False, track_potentials=track_potentials)
    for a, bound in player_step_bounds(g).items():
        if trace.per_player_counts[a] > bound:
            raise BoundViolation(
                f"{a} made {trace.per_player_counts[a]} lazy improvements, bound is {bound}")
    return trace


def run_full_improvement(
    g: GameInstance,
    s0: StrategyProfile,
    sched: Scheduler | None = None,
    max_steps: int | None = None,
) -> ImprovementTrace:
    """Unrestricted better-response; the default budget is the profile count plus one."""
    sched = sched or RoundRobinFirstMove()
    if max_steps is None:
        max_steps = g.tree.profile_count() + 1
    if max_steps <= 0:
        raise EngineError("max_steps must be positive")
    return _run(g, s0, sched, max_steps, "full", full_improvements, lambda s: is_nash(g, s),
                track_potentials=False)


# -- epsilon-lazy -------------------------------------------------------------

def _as_epsilon(epsilon: Fraction | int | str) -> Fraction:
    eps = Fraction(epsilon)
    if eps <= 0:
        raise EngineError("epsilon must be positive")
    return eps


def epsilon_lazy_improvements(
    g: GameInstance, s: StrategyProfile, player: str, epsilon: Fraction
) -> list[Move]:
    if g.payoffs is None:
        raise EngineError("epsilon-lazy improvement needs payoffs")
    current = g.payoff(player, induced_play(g.tree, s).leaf)
    return [m for m in lazy_targets(g.tree, s, player)
            if g.payoff(player, m.target_leaf) - current > epsilon]


def is_epsilon_nash(g: GameInstance, s: StrategyProfile, epsilon: Fraction | int | str) -> bool:
    """No unilateral deviation (any rewrite of own choices) gains more than epsilon."""
    if g.payoffs is None:
        raise EngineError("epsilon-Nash needs payoffs")
    eps = Fraction(epsilon)
    tree = g.tree
    here = induced_play(tree, s).leaf
    for a in g.players:
        base = g.payoff(a, here)
        for t in full_conversions(tree, s, a):
            if g.payoff(a, induced_play(tree, t).leaf) - base > eps:
                return False
    return True


def payoff_step_bound(g: GameInstance) -> int:
    """(h - 1)(l - 1) with h the largest number of distinct payoff values of a player."""
    if g.payoffs is None:
        raise EngineError("instance has no payoffs")
    h = max((len(set(g.payoffs[a].values())) for a in g.players), default=1)
    return (h - 1) * (g.tree.leaf_count - 1)


def run_epsilon_lazy(
    g: GameInstance,
    s0: StrategyProfile,
    epsilon: Fraction | int | str,
    sched: Scheduler | None = None,
    max_steps: int | None = None,
) -> ImprovementTrace:
    if g.payoffs is None:
        raise EngineError("epsilon-lazy improvement needs payoffs")
    eps = _as_epsilon(epsilon)
    sched = sched or RoundRobinFirstMove()
    if max_steps is None:
        max_steps = payoff_step_bound(g) + 1
    if max_steps <= 0:
        raise EngineError("max_steps must be positive")

    def moves(g_: GameInstance, s: StrategyProfile, a: str) -> list[Move]:
        return epsilon_lazy_improvements(g_, s, a, eps)

    def terminal(s: StrategyProfile) -> bool:
        return not any(moves(g, s, a) for a in g.players)

    return _run(g, s0, sched, max_steps, "epsilon", moves, terminal, track_potentials=False)


# -- synchronous dynamics -----------------------------------------------------

def synchronous_best_move(g: GameInstance, s: StrategyProfile, player: str) -> Move | None:
    moves = lazy_improvements(g, s, player)
    if not moves:
        return None
    top = maximal_moves(g.preference(player), moves)
    outs = sorted({m.target_outcome for m in top})
    if len(outs) != 1:
        raise AmbiguousBestResponse(player, outs)
    return top[0]


def _sync_loop(
    g: GameInstance,
    s0: StrategyProfile,
    max_rounds: int,
    engine: str,
    round_moves: Callable[[int, StrategyProfile], list[Move] | None],
    scheduler: str,
) -> ImprovementTrace:
    s = _check_start(g, s0)
    tree = g.tree
    steps: list[Step] = []
    profiles = [s]
    seen = {s: 0}
    counts = {a: 0 for a in g.players}
    terminal = None
    cycle = None
    while len(steps) < max_rounds:
        moves = round_moves(len(steps), s)
        if moves is None:
            terminal = "script-end"
            break
        if not moves:
            break
        changes: dict[int, int] = {}
        for m in moves:
            changes.update(m.changes())
            counts[m.mover] += 1
        t = s.with_changes(changes)
        steps.append(Step(
            index=len(steps),
            movers=tuple(m.mover for m in moves),
            pre_outcome=induced_play(tree, s).outcome,
            post_outcome=induced_play(tree, t).outcome,
            changes=dict(sorted(changes.items())),
            target_leaves=tuple(m.target_leaf for m in moves),
        ))
        profiles.append(t)
        s = t
        if s in seen:
            cycle = profiles[seen[s]:-1]
            terminal = "cycle"
            break
        seen[s] = len(profiles) - 1
    if is_nash(g, s) and terminal != "cycle":
        terminal = "nash"
    elif terminal is None:
        terminal = "budget"
    return ImprovementTrace(engine, scheduler, profiles[0], steps, profiles, terminal,
                            counts, cycle)


def run_synchronous_best_response(
    g: GameInstance, s0: StrategyProfile, max_rounds: int | None = None
) -> ImprovementTrace:
    """All improving players switch to their best lazy target simultaneously each round.

    Each move is computed against the pre-round profile; moves of different
    players touch disjoint vertex sets and are merged. Requires acyclic
    preferences; a best response with several incomparable maximal outcomes
    raises ``AmbiguousBestResponse``.
    """
    if not g.all_acyclic:
        raise EngineError("synchronous best response needs acyclic preferences")
    if max_rounds is None:
        max_rounds = 2 ** len(g.tree.internal) + 1
    if max_rounds <= 0:
        raise EngineError("max_rounds must be positive")

    def round_moves(_: int, s: StrategyProfile) -> list[Move]:
        return [m for a in g.players if (m := synchronous_best_move(g, s, a)) is not None]

    return _sync_loop(g, s0, max_rounds, "sync-best", round_moves, "best")


def run_synchronous_script(
    g: GameInstance,
    s0: StrategyProfile,
    rounds: Sequence[Mapping[str, int]],
) -> ImprovementTrace:
    """Simultaneous lazy better-response following ``rounds`` of {player: target leaf}."""

    def round_moves(i: int, s: StrategyProfile) -> list[Move] | None:
        if i >= len(rounds):
            return None
        chosen = []
        for a, leaf in sorted(rounds[i].items()):
            match = [m for m in lazy_improvements(g, s, a) if m.target_leaf == leaf]
            if not match:
                raise ScriptRejected(f"round {i}: {a} cannot lazily improve to leaf {leaf}")
            chosen.append(match[0])
        return chosen

    return _sync_loop(g, s0, len(rounds) + 1, "sync-script", round_moves, "script")


def make_scheduler(kind: str, seed: int = 0, script: Sequence = ()) -> Scheduler:
    if kind == "first":
        return RoundRobinFirstMove()
    if kind == "best":
        return RoundRobinBestMove()
    if kind == "random":
        return SeededRandom(seed)
    if kind == "script":
        return FixedScript(tuple((p, t) for p, t in script))
    raise ValueError(f"unknown scheduler {kind!r}")
