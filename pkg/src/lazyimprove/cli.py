"""Command-line front end.

Exit codes: 0 ok, 2 validation (including unparsable JSON), 3 engine error,
4 oracle mismatch, 5 I/O.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

from . import beliefs as belief_mod
from .convertibility import is_nash
from .dynamics import (
    EngineError,
    FixedScript,
    make_scheduler,
    run_epsilon_lazy,
    run_full_improvement,
    run_lazy,
    run_lazy_with_nature,
    run_synchronous_best_response,
)
from .export import improvement_graph_dot, summary_row, write_rounds, write_summary, write_trace
from .game_model import Diagnostic, GameError, GameInstance, StrategyProfile, is_ok
from .generators import (
    GeneratorParams,
    fixture,
    flat_cyclic_game,
    generate_random,
    linear_family,
    quadratic_family,
)
from .measures import game_avoided, profile_avoided
from .oracles import avoid_play_counterexamples, conformance_report, longest_lazy_sequence
from .serialization import (
    InstanceValidationError,
    load_json,
    profile_from_json,
    validate_document,
)

EXIT_OK, EXIT_VALIDATION, EXIT_ENGINE, EXIT_ORACLE, EXIT_IO = 0, 2, 3, 4, 5
ENGINES = ("lazy", "full", "sync-best", "epsilon", "beliefs")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


@dataclass
class Source:
    ident: str
    instance: GameInstance
    start: StrategyProfile
    script: FixedScript | None = None
    profiles: tuple[StrategyProfile, ...] = ()
    family: tuple[str, int] | None = None


_PARAM_KEYS = {
    "seed": int, "players": int, "max_depth": int, "depth": int, "max_branching": int,
    "branching": int, "outcomes": int, "max_leaves": int, "leaves": int,
    "mode": str, "payoffs": int, "denominator": int,
}
_ALIASES = {"depth": "max_depth", "branching": "max_branching", "leaves": "max_leaves",
            "mode": "preference_mode", "payoffs": "payoff_range",
            "denominator": "payoff_denominator"}


def parse_generator(spec: str, seed_offset: int = 0) -> Source:
    """``quadratic:N``, ``linear:N``, ``flat-cyclic:N``, ``fixture:NAME`` or ``random:k=v,...``."""
    kind, _, arg = spec.partition(":")
    try:
        if kind in ("quadratic", "linear", "flat-cyclic"):
            n = int(arg)
            if kind == "quadratic":
                g, s0, script = quadratic_family(n)
                return Source(spec, g, s0, script, family=("quadratic", n))
            if kind == "linear":
                g, s0 = linear_family(n)
                return Source(spec, g, s0, family=("linear", n))
            g, s0 = flat_cyclic_game(n)
            return Source(spec, g, s0)
        if kind == "fixture":
            fx = fixture(arg)
            return Source(spec, fx.instance, fx.profiles[0], profiles=fx.profiles)
        if kind == "random":
            kwargs: dict[str, Any] = {}
            for item in filter(None, arg.split(",")):
                key, _, val = item.partition("=")
                if key not in _PARAM_KEYS:
                    raise ValueError(f"unknown generator key {key!r}")
                value = _PARAM_KEYS[key](val)
                key = _ALIASES.get(key, key)
                if key == "preference_mode" and "+" in value:
                    value = tuple(value.split("+"))
                kwargs[key] = value
            kwargs["seed"] = kwargs.get("seed", 0) + seed_offset
            params = GeneratorParams(**kwargs)
            g, s0 = generate_random(params)
            return Source(f"random:seed={params.seed}", g, s0)
    except (ValueError, GameError) as exc:
        raise CliError(EXIT_VALIDATION, f"bad generator spec {spec!r}: {exc}") from None
    raise CliError(EXIT_VALIDATION, f"unknown generator {kind!r}")


def _read_document(path: str) -> Any:
    try:
        return load_json(path)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_VALIDATION, f"parse error in {path}: {exc}") from None


def _game_document(doc: Any) -> tuple[Any, list]:
    """A bare game document, or a fixture document wrapping one under "game"."""
    if isinstance(doc, dict) and "game" in doc:
        return doc["game"], doc.get("profiles", [])
    return doc, []


def load_source(path: str | None, generate: str | None, profile_path: str | None = None,
                seed_offset: int = 0) -> Source:
    if (path is None) == (generate is None):
        raise CliError(EXIT_VALIDATION, "give exactly one of a game file or --generate")
    if generate is not None:
        src = parse_generator(generate, seed_offset)
    else:
        game_doc, raw_profiles = _game_document(_read_document(path))
        g, problems = validate_document(game_doc)
        if g is None:
            raise CliError(EXIT_VALIDATION, "\n".join(str(d) for d in problems))
        try:
            profiles = tuple(profile_from_json(g.tree, p) for p in raw_profiles)
        except GameError as exc:
            raise CliError(EXIT_VALIDATION, str(exc)) from None
        start = profiles[0] if profiles else g.tree.leftmost_profile()
        src = Source(Path(path).stem, g, start, profiles=profiles)
    if profile_path is not None:
        try:
            src.start = profile_from_json(src.instance.tree, _read_document(profile_path))
        except GameError as exc:
            raise CliError(EXIT_VALIDATION, str(exc)) from None
    return src


# -- validate -----------------------------------------------------------------

def _profile_problems(g: GameInstance, raw: Any, label: str) -> list[Diagnostic]:
    try:
        profile_from_json(g.tree, raw)
    except GameError as exc:
        found = getattr(exc, "diagnostics", None)
        return list(found) if found else [Diagnostic("bad-profile", f"{label}: {exc}")]
    except AttributeError:
        return [Diagnostic("bad-profile", f"{label}: profile must be a JSON object")]
    return []


def cmd_validate(args: argparse.Namespace) -> int:
    game_doc, raw_profiles = _game_document(_read_document(args.path))
    g, problems = validate_document(game_doc)
    if g is not None:
        for i, raw in enumerate(raw_profiles):
            problems += _profile_problems(g, raw, f"profile {i}")
        if args.profile:
            problems += _profile_problems(g, _read_document(args.profile), args.profile)
    for d in problems:
        print(d, file=sys.stderr)
    if g is None or not is_ok(problems):
        return EXIT_VALIDATION
    print("ok")
    return EXIT_OK


# -- run ----------------------------------------------------------------------

@dataclass
class RunConfig:
    path: str | None
    generate: str | None
    engine: str = "lazy"
    scheduler: str = "first"
    seed: int = 0
    epsilon: Fraction | None = None
    max_steps: int | None = None
    profile: str | None = None
    trace: str | None = None
    summary: str | None = None
    dot: str | None = None
    dump_beliefs: bool = False

    def __post_init__(self) -> None:
        if self.engine not in ENGINES:
            raise CliError(EXIT_VALIDATION, f"unknown engine {self.engine!r}")
        if (self.engine == "epsilon") != (self.epsilon is not None):
            raise CliError(EXIT_VALIDATION, "--epsilon is required for, and only for, --engine epsilon")


def execute(cfg: RunConfig, seed_offset: int = 0) -> dict[str, Any]:
    """Run one configuration; writes the trace file and returns the summary row."""
    src = load_source(cfg.path, cfg.generate, cfg.profile, seed_offset)
    g = src.instance
    seed = cfg.seed + seed_offset
    header = {"instance": src.ident, "seed": seed, "engine_config": cfg.engine}
    try:
        if cfg.scheduler == "script":
            if src.script is None:
                raise CliError(EXIT_VALIDATION, "this source has no script")
            sched = src.script
        else:
            sched = make_scheduler(cfg.scheduler, seed)
        if cfg.engine == "beliefs":
            states = belief_mod.initial_states(g, src.start)
            final, logs = belief_mod.run_to_stability(g, states, cfg.max_steps)
            eq = belief_mod.assemble_equilibrium(g, final)
            if cfg.trace:
                with open(cfg.trace, "w", encoding="utf-8") as fh:
                    write_rounds(fh, logs, cfg.dump_beliefs)
            return {"instance": src.ident, "engine": "beliefs", "scheduler": "best",
                    "seed": seed, "steps": len(logs), "terminal": "quiescent",
                    "counts": "", "player_bounds": "", "global_bound": "",
                    "within_bounds": True, "nash": is_nash(g, eq), "epsilon_nash": ""}
        if cfg.engine == "lazy":
            if g.all_acyclic:
                trace = run_lazy(g, src.start, sched, cfg.max_steps)
            else:
                if cfg.max_steps is None:
                    raise CliError(EXIT_VALIDATION, "--max-steps is required with cyclic preferences")
                trace = run_lazy_with_nature(g, src.start, sched, cfg.max_steps)
        elif cfg.engine == "full":
            trace = run_full_improvement(g, src.start, sched, cfg.max_steps)
        elif cfg.engine == "sync-best":
            trace = run_synchronous_best_response(g, src.start, cfg.max_steps)
        else:
            trace = run_epsilon_lazy(g, src.start, cfg.epsilon, sched, cfg.max_steps)
    except CliError:
        raise
    except (EngineError, GameError, RuntimeError) as exc:
        raise CliError(EXIT_ENGINE, f"engine error: {exc}") from None
    if cfg.trace:
        try:
            with open(cfg.trace, "w", encoding="utf-8") as fh:
                write_trace(fh, trace, header)
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot write trace: {exc}") from None
    if cfg.dot:
        try:
            Path(cfg.dot).write_text(improvement_graph_dot(
                g, "full" if cfg.engine == "full" else "lazy"), encoding="utf-8")
        except ValueError as exc:
            raise CliError(EXIT_VALIDATION, str(exc)) from None
    return summary_row(src.ident, g, trace, seed, cfg.epsilon)


def _execute_indexed(item: tuple[RunConfig, int]) -> dict[str, Any]:
    cfg, i = item
    return execute(cfg, i)


def cmd_run(args: argparse.Namespace) -> int:
    eps = Fraction(args.epsilon) if args.epsilon is not None else None
    base = RunConfig(
        path=args.path, generate=args.generate, engine=args.engine, scheduler=args.scheduler,
        seed=args.seed, epsilon=eps, max_steps=args.max_steps, profile=args.profile,
        trace=args.trace, summary=args.summary, dot=args.dot, dump_beliefs=args.dump_beliefs,
    )
    if args.batch:
        if args.trace:
            Path(args.trace).mkdir(parents=True, exist_ok=True)
        items = []
        for i in range(args.batch):
            cfg = RunConfig(**{**base.__dict__, "dot": None,
                               "trace": str(Path(args.trace) / f"run-{i:04d}.jsonl")
                               if args.trace else None})
            items.append((cfg, i))
        if args.workers > 1:
            with ProcessPoolExecutor(args.workers) as pool:
                rows = list(pool.map(_execute_indexed, items))
        else:
            rows = [_execute_indexed(it) for it in items]
    else:
        rows = [execute(base)]
    if args.summary:
        try:
            with open(args.summary, "w", encoding="utf-8", newline="") as fh:
                write_summary(fh, rows)
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot write summary: {exc}") from None
    if len(rows) == 1:
        for key, val in rows[0].items():
            print(f"{key}: {val}")
    else:
        bad = sum(1 for r in rows if r["within_bounds"] is False)
        print(f"runs: {len(rows)}  out of bounds: {bad}")
    return EXIT_OK


# -- measures -------------------------------------------------------------------

def measures_tables(g: GameInstance, s: StrategyProfile) -> dict[str, Any]:
    tab = profile_avoided(g.tree, s, g.players)
    return {
        "Delta": game_avoided(g.tree, g.players),
        "delta": {a: tab.row(a) for a in g.players},
        "outcomes": list(g.outcomes),
    }


def format_tables(tables: dict[str, Any]) -> str:
    outs = tables["outcomes"]
    players = list(tables["Delta"])
    w = max([len("delta(s,.,.)")] + [len(a) for a in players])
    lines = ["Delta(g,.)"]
    lines += [f"{a.ljust(w)} | {tables['Delta'][a]}" for a in players]
    lines.append("")
    cols = [max(len(o), 2) for o in outs]
    lines.append(" | ".join(["delta(s,.,.)".ljust(w)] + [o.rjust(c) for o, c in zip(outs, cols)]))
    for a in players:
        row = tables["delta"][a]
        lines.append(" | ".join([a.ljust(w)] + [str(row[o]).rjust(c) for o, c in zip(outs, cols)]))
    return "\n".join(lines)


def cmd_measures(args: argparse.Namespace) -> int:
    src = load_source(args.path, args.generate, args.profile)
    tables = measures_tables(src.instance, src.start)
    if args.json:
        print(json.dumps(tables, sort_keys=True))
    else:
        print(format_tables(tables))
    return EXIT_OK


# -- oracle ---------------------------------------------------------------------

def cmd_oracle(args: argparse.Namespace) -> int:
    src = load_source(args.path, args.generate, args.profile)
    g = src.instance
    rep = conformance_report(g, cap=args.cap)
    if g.tree.profile_count() <= args.cap:
        bad = avoid_play_counterexamples(g, max_len=args.walk_length, cap=args.cap)
        rep.add("avoid-play", not bad, f"{len(bad)} counterexamples")
    if src.family is not None and src.family[0] == "quadratic" and g.all_acyclic:
        n = src.family[1]
        length, _ = longest_lazy_sequence(g, src.start)
        expected = (n + 2) * (n + 3) // 2 - 2
        rep.add("quadratic-tightness", length == expected, f"longest {length}, formula {expected}")
    for c in rep.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}")
    return EXIT_OK if rep.passed else EXIT_ORACLE


# -- entry point ------------------------------------------------------------------

def _add_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("path", nargs="?", help="game JSON (bare game or fixture document)")
    p.add_argument("--generate", help="quadratic:N | linear:N | flat-cyclic:N | fixture:NAME | "
                                      "random:seed=S,players=P,leaves=L,depth=D,branching=B,"
                                      "outcomes=K,mode=total|acyclic|full[+...],payoffs=R,denominator=D")
    p.add_argument("--profile", help="start profile JSON {vertex: child}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lazyimprove",
                                     description="Lazy improvement dynamics on sequential games.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a game file")
    p.add_argument("path")
    p.add_argument("--profile")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="run an improvement engine")
    _add_source(p)
    p.add_argument("--engine", choices=ENGINES, default="lazy")
    p.add_argument("--scheduler", choices=("first", "best", "random", "script"), default="first")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon")
    p.add_argument("--max-steps", type=int)
    p.add_argument("--trace", help="JSON-lines trace (a directory with --batch)")
    p.add_argument("--summary", help="CSV summary")
    p.add_argument("--dot", help="Graphviz improvement graph (<= 10 leaves)")
    p.add_argument("--dump-beliefs", action="store_true",
                   help="with --engine beliefs, include every player's believed profile per round")
    p.add_argument("--batch", type=int, default=0, help="run N seeds (seed, seed+1, ...)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("measures", help="print avoided-outcome tables")
    _add_source(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_measures)

    p = sub.add_parser("oracle", help="exhaustive conformance checks")
    _add_source(p)
    p.add_argument("--cap", type=int, default=4096)
    p.add_argument("--walk-length", type=int, default=None,
                   help="bound on avoided-play walk length (default: unbounded)")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except InstanceValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
