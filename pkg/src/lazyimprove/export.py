"""Trace, summary and graph writers.

Traces are JSON lines: one header record, one record per step, one
terminal record. Keys are sorted and nothing time-dependent is written, so
identical runs give byte-identical files.
"""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable, Mapping
from typing import Any, TextIO

from .beliefs import RoundLog
from .convertibility import full_improvements, is_nash, lazy_improvements
from .dynamics import ImprovementTrace, is_epsilon_nash
from .game_model import GameInstance, StrategyProfile, induced_play
from .measures import game_avoided
from .serialization import dumps, profile_to_json

SUMMARY_FIELDS = [
    "instance", "engine", "scheduler", "seed", "steps", "terminal", "counts",
    "player_bounds", "global_bound", "within_bounds", "nash", "epsilon_nash",
]


def trace_records(trace: ImprovementTrace, header: Mapping[str, Any] | None = None):
    yield {
        "record": "header",
        "engine": trace.engine,
        "scheduler": trace.scheduler,
        "start": profile_to_json(trace.start),
        **(header or {}),
    }
    for st in trace.steps:
        yield {
            "record": "step",
            "index": st.index,
            "pre_profile": profile_to_json(trace.profiles[st.index]),
            "post_profile": profile_to_json(trace.profiles[st.index + 1]),
            "mover": st.mover,
            "movers": list(st.movers),
            "pre_outcome": st.pre_outcome,
            "post_outcome": st.post_outcome,
            "changed_vertices": list(st.changed_vertices),
            "changes": {str(v): c for v, c in st.changes.items()},
            "target_leaves": list(st.target_leaves),
            "potential_before": st.potential_before,
            "potential_after": st.potential_after,
        }
    yield {
        "record": "terminal",
        "terminal": trace.terminal,
        "steps": len(trace.steps),
        "final": profile_to_json(trace.final),
        "cycle": None if trace.cycle is None else [profile_to_json(p) for p in trace.cycle],
        "per_player_counts": trace.per_player_counts,
    }


def write_trace(fh: TextIO, trace: ImprovementTrace, header: Mapping[str, Any] | None = None) -> None:
    for rec in trace_records(trace, header):
        fh.write(dumps(rec) + "\n")


def write_rounds(fh: TextIO, logs: Iterable[RoundLog], dump_beliefs: bool = False) -> None:
    for log in logs:
        rec = {
            "record": "round",
            "round": log.round,
            "moves": log.moves,
            "play": list(log.play.path),
            "outcome": log.play.outcome,
            "belief_diffs": {a: {str(v): list(d) for v, d in diff.items()}
                             for a, diff in log.belief_diffs.items()},
        }
        if dump_beliefs:
            rec["beliefs"] = {a: profile_to_json(p) for a, p in log.beliefs.items()}
        fh.write(dumps(rec) + "\n")


def instance_bounds(g: GameInstance) -> tuple[dict[str, int], int | None]:
    """Per-player bounds (h_a - 1) * avoided(g, a) for acyclic players, and the global bound."""
    avoided = game_avoided(g.tree, g.players)
    per = {}
    for a in g.players:
        pref = g.preference(a)
        if pref.is_acyclic:
            per[a] = (pref.height - 1) * avoided[a]
    if len(per) < len(g.players):
        return per, None
    h = max(g.preference(a).height for a in g.players)
    return per, (h - 1) * (g.tree.leaf_count - 1)


def _kv(d: Mapping[str, Any]) -> str:
    return ";".join(f"{k}={v}" for k, v in sorted(d.items()))


def summary_row(
    instance_id: str,
    g: GameInstance,
    trace: ImprovementTrace,
    seed: int | None = None,
    epsilon=None,
) -> dict[str, Any]:
    per, glob = instance_bounds(g)
    within: bool | str = ""  # full better-response has no step bound
    if trace.engine in ("lazy", "epsilon"):
        within = all(trace.per_player_counts[a] <= b for a, b in per.items())
        if glob is not None:
            within = within and len(trace.steps) <= glob
    elif trace.engine.startswith("sync"):
        within = len(trace.steps) <= 2 ** len(g.tree.internal)
    return {
        "instance": instance_id,
        "engine": trace.engine,
        "scheduler": trace.scheduler,
        "seed": "" if seed is None else seed,
        "steps": len(trace.steps),
        "terminal": trace.terminal,
        "counts": _kv(trace.per_player_counts),
        "player_bounds": _kv(per),
        "global_bound": "" if glob is None else glob,
        "within_bounds": within,
        "nash": is_nash(g, trace.final),
        "epsilon_nash": "" if epsilon is None else is_epsilon_nash(g, trace.final, epsilon),
    }


def write_summary(fh: TextIO, rows: Iterable[Mapping[str, Any]]) -> None:
    writer = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)


def improvement_graph_dot(g: GameInstance, engine: str = "lazy", max_leaves: int = 10) -> str:
    """Graphviz rendering of the improvement relation over all profiles."""
    tree = g.tree
    if tree.leaf_count > max_leaves:
        raise ValueError(f"graph export is limited to {max_leaves} leaves")
    moves = lazy_improvements if engine == "lazy" else full_improvements
    out = io.StringIO()
    out.write("digraph improvement {\n  rankdir=LR;\n")

    def node(s: StrategyProfile) -> str:
        return f'"{s.encode()}"'

    for s in tree.all_profiles():
        shape = "doublecircle" if is_nash(g, s) else "ellipse"
        out.write(f'  {node(s)} [label="{s.encode()}\\n{induced_play(tree, s).outcome}", '
                  f"shape={shape}];\n")
    for s in tree.all_profiles():
        for a in g.players:
            for m in moves(g, s, a):
                out.write(f'  {node(s)} -> {node(m.target)} [label="{a}"];\n')
    out.write("}\n")
    return out.getvalue()
