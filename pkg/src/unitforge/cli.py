"""Command line entry point: ``unitforge <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .agents import IdleAgent, MCTSAgent, RandomAgent, RushAgent
from .balancelab import MODES, SKILLS, MatchupRound, MatchupSpec, emit_report, load_study_config, run_matchup, run_study
from .engine import ConfigError, run_game
from .evaluator import derive_seed, evaluate_unit
from .searchgen import hill_climb
from .unitspace import SearchBounds, UnitValidationError, load_unit, load_units_dir, save_unit, to_type_def

log = logging.getLogger("unitforge")

SCRIPTED = ("idle", "random", "rush")


class UsageError(Exception):
    """Bad invocation detected after parsing (exit status 2)."""


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="study config JSON (agent presets, engine overrides, thresholds)")
    p.add_argument("--iteration-scale", type=float, default=None,
                   help="multiply every preset's MCTS iteration budget (desk-scale runs)")
    p.add_argument("--jobs", type=int, default=None, help="parallel worker processes")
    p.add_argument("--decision-timeout", type=float, default=None,
                   help="seconds per agent decision before it is replaced by idling")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unitforge", description="Generate and evaluate RTS units by simulation.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("generate", help="hill-climb a new unit")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--games-per-round", type=int, default=10)
    p.add_argument("--max-iterations", type=int, default=None, help="cap on hill-climb iterations")
    p.add_argument("--skill", choices=SKILLS, default="medium", help="agents used for the fitness games")
    p.add_argument("--out", default="generated.json", help="unit file; the trace goes next to it")
    _add_common(p)

    p = sub.add_parser("evaluate", help="fitness of one unit file")
    p.add_argument("--unit", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--games-per-round", type=int, default=10)
    p.add_argument("--skill", choices=SKILLS, default="medium")
    p.add_argument("--out", default=None, help="report path (default: <unit stem>.fitness.json in the cwd)")
    _add_common(p)

    p = sub.add_parser("matchup", help="one skill match-up over one or more units")
    p.add_argument("--unit", action="append", required=True, help="unit file (repeatable)")
    p.add_argument("--p1", choices=SKILLS, required=True)
    p.add_argument("--p2", choices=SKILLS, required=True)
    p.add_argument("--mode", choices=MODES, default="shared")
    p.add_argument("--games", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write the cell results as JSON")
    _add_common(p)

    p = sub.add_parser("study", help="all skill match-ups in both access modes")
    p.add_argument("--units-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--games", type=int, default=None, help="games per unit per match-up round (default 100)")
    p.add_argument("--redo-threshold", type=float, default=None)
    p.add_argument("--skills", default=",".join(SKILLS), help="comma-separated skill tiers")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--event-logs", action="store_true", help="also dump every game's event log under OUT_DIR/events")
    _add_common(p)

    p = sub.add_parser("simulate", help="play one game and dump its event log")
    p.add_argument("--unit", default=None, help="optional unit file added to both players' options")
    p.add_argument("--p1", choices=SKILLS + SCRIPTED, default="weak")
    p.add_argument("--p2", choices=SKILLS + SCRIPTED, default="weak")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="event log path (default: stdout)")
    _add_common(p)

    p = sub.add_parser("validate", help="lint unit files")
    p.add_argument("paths", nargs="+")
    return parser


def _study_cfg(args: argparse.Namespace, **overrides):
    cfg = load_study_config(args.config)
    changes = {k: v for k, v in overrides.items() if v is not None}
    if getattr(args, "jobs", None) is not None:
        changes["jobs"] = args.jobs
    if getattr(args, "decision_timeout", None) is not None:
        changes["decision_timeout"] = args.decision_timeout
    if changes:
        cfg = replace(cfg, **changes)
    if getattr(args, "iteration_scale", None) is not None:
        cfg = cfg.scaled(args.iteration_scale)
    return cfg


def cmd_generate(args: argparse.Namespace) -> int:
    cfg = _study_cfg(args).eval_config(args.skill, args.games_per_round, args.seed)
    unit, trace = hill_climb(cfg, SearchBounds(), seed=args.seed, max_iterations=args.max_iterations)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_unit(unit, out)
    trace.write(out.with_suffix(".trace.json"))
    print(f"{unit.label()} fitness={unit.fitness:.4f} iterations={len(trace.iterations)} -> {out}")
    if trace.error:
        print(f"error: search aborted: {trace.error}", file=sys.stderr)
        return 1
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    path = Path(args.unit)
    unit = load_unit(path)
    cfg = _study_cfg(args).eval_config(args.skill, args.games_per_round, args.seed)
    report = evaluate_unit(unit, cfg)
    out = Path(args.out) if args.out else Path(f"{path.stem}.fitness.json")
    report.write(out)
    flags = f" flags={','.join(report.flags)}" if report.flags else ""
    print(f"{unit.label()} f1={report.f1:.4f} f2={report.f2:.4f} total={report.total:.4f}{flags} -> {out}")
    return 0


def _round_summary(rnd: MatchupRound) -> str:
    return (f"{rnd.p1} vs {rnd.p2} ({rnd.mode}): P1 win rate {rnd.mean_win_rate:.3f} "
            f"+/- {rnd.std_win_rate:.3f}, unit made in {rnd.avg_made:.2f} games on average")


def cmd_matchup(args: argparse.Namespace) -> int:
    units = [load_unit(p) for p in args.unit]
    cfg = _study_cfg(args)
    spec = MatchupSpec(args.p1, args.p2, args.mode, args.games, args.seed)
    cells = run_matchup(units, spec, cfg)
    rnd = MatchupRound(args.p1, args.p2, args.mode, cells)
    for c in cells:
        print(f"{c.unit}: P1 {c.p1_wins} / P2 {c.p2_wins} / draws {c.draws}; made P1 {c.p1_made}, P2 {c.p2_made}")
    print(_round_summary(rnd))
    if args.out:
        doc = [{k: v for k, v in vars(c).items() if k != "records"} | {"records": c.records} for c in cells]
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
    return 0


def cmd_study(args: argparse.Namespace) -> int:
    units = load_units_dir(args.units_dir)
    if not units:
        raise UsageError(f"no unit files in {args.units_dir}")
    skills = [s.strip() for s in args.skills.split(",") if s.strip()]
    unknown = [s for s in skills if s not in SKILLS]
    if unknown or not skills:
        raise UsageError(f"unknown skills {unknown}; choose from {','.join(SKILLS)}")
    cfg = _study_cfg(args, games=args.games, redo_threshold=args.redo_threshold, seed_base=args.seed)
    out = Path(args.out_dir)
    events = out / "events" if args.event_logs else None
    report = run_study(units, skills, cfg, event_log_dir=events)
    for rnd in report.rounds:
        print(_round_summary(rnd) + (" [redone]" if rnd.redone else "") + (" [low production]" if rnd.low_production else ""))
    for path in emit_report(report, out):
        print(f"wrote {path}")
    return 0


def _make_agent(kind: str, cfg, access, seed: int):
    if kind == "idle":
        return IdleAgent(access)
    if kind == "random":
        return RandomAgent(seed, access)
    if kind == "rush":
        return RushAgent("Light", access)
    return MCTSAgent(cfg.agent(kind), access=access, seed=seed)


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _study_cfg(args)
    game = cfg.game
    if args.unit:
        unit = load_unit(args.unit)
        game = game.with_unit_type(to_type_def(unit, cfg.type_name, cfg.produce_base, cfg.produce_per_cost))
    agents = [_make_agent(k, cfg, None, derive_seed(args.seed, p)) for p, k in enumerate((args.p1, args.p2))]
    result = run_game(game, agents[0], agents[1], args.seed, decision_timeout=cfg.decision_timeout)
    if args.out:
        result.write_events(args.out)
    else:
        for line in result.event_lines():
            print(line)
    winner = "draw" if result.winner is None else f"player {result.winner} wins"
    print(f"{winner} at tick {result.end_tick}; event hash {result.event_hash()}", file=sys.stderr)
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    status = 0
    for path in args.paths:
        try:
            unit = load_unit(path)
        except UnitValidationError as exc:
            status = 1
            for key, msg in exc.errors.items():
                print(f"{path}: {key}: {msg}", file=sys.stderr)
        except OSError as exc:
            status = 1
            print(f"{path}: {exc}", file=sys.stderr)
        else:
            print(f"{path}: ok ({unit.label()})")
    return status


COMMANDS = {
    "generate": cmd_generate,
    "evaluate": cmd_evaluate,
    "matchup": cmd_matchup,
    "study": cmd_study,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on unknown flags or subcommands
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"unitforge: error: {exc}", file=sys.stderr)
        return 2
    except (UnitValidationError, ConfigError, ValueError, OSError) as exc:
        print(f"unitforge: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
