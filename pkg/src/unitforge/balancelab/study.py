"""Skill-tier match-ups with and without exclusive access to a new unit."""

from __future__ import annotations

import itertools
import logging
import statistics
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Literal

from ..engine import GameResult
from ..evaluator import AgentFactory, base_access, derive_seed, play_games
from ..unitspace import GeneratedUnit, genome_key, to_type_def
from .config import MODES, StudyConfig

log = logging.getLogger(__name__)

Mode = Literal["exclusive", "shared"]


@dataclass(frozen=True)
class MatchupSpec:
    p1: str
    p2: str
    mode: Mode = "shared"
    games: int = 100
    seed_base: int = 0

    def __post_init__(self) -> None:
        if self.games < 1:
            raise ValueError("games per unit must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


@dataclass
class CellResult:
    """All games of one unit in one match-up round."""

    p1: str
    p2: str
    mode: str
    unit: str
    games: int = 0
    p1_wins: int = 0
    p2_wins: int = 0
    draws: int = 0
    p1_made: int = 0
    p2_made: int = 0
    made_games: int = 0
    p1_wins_when_built: int = 0
    p2_wins_when_built: int = 0
    alive_ticks_sum: int = 0
    records: list[dict] = field(default_factory=list)

    @property
    def p1_win_rate(self) -> float:
        return self.p1_wins / self.games

    @property
    def p1_loss_rate(self) -> float:
        return self.p2_wins / self.games

    @property
    def draw_rate(self) -> float:
        return self.draws / self.games

    @property
    def avg_alive_ticks(self) -> float:
        return self.alive_ticks_sum / self.made_games if self.made_games else 0.0

    def add(self, result: GameResult, p1_index: int, type_name: str, seed: int) -> None:
        st = result.stats(type_name)
        made1 = st.produced_by[p1_index] > 0
        made2 = st.produced_by[1 - p1_index] > 0
        self.games += 1
        if result.winner is None:
            self.draws += 1
            winner = None
        elif result.winner == p1_index:
            self.p1_wins += 1
            self.p1_wins_when_built += made1
            winner = "p1"
        else:
            self.p2_wins += 1
            self.p2_wins_when_built += made2
            winner = "p2"
        self.p1_made += made1
        self.p2_made += made2
        if made1 or made2:
            self.made_games += 1
            self.alive_ticks_sum += st.alive_interval_union
        self.records.append({
            "seed": seed,
            "p1Index": p1_index,
            "winner": winner,
            "madeP1": made1,
            "madeP2": made2,
            "aliveTicks": st.alive_interval_union,
            "ticks": result.end_tick,
        })


@dataclass
class MatchupRound:
    p1: str
    p2: str
    mode: str
    cells: list[CellResult]
    redone: bool = False
    low_production: bool = False

    @property
    def avg_made(self) -> float:
        return average_made(self.cells)

    @property
    def win_rates(self) -> list[float]:
        return [c.p1_win_rate for c in self.cells]

    @property
    def mean_win_rate(self) -> float:
        return statistics.fmean(self.win_rates)

    @property
    def std_win_rate(self) -> float:
        """Population standard deviation over the per-unit win rates."""
        return statistics.pstdev(self.win_rates)


@dataclass
class StudyReport:
    skills: list[str]
    units: list[str]
    games_per_unit: int
    rounds: list[MatchupRound] = field(default_factory=list)
    redo_log: list[dict] = field(default_factory=list)

    def round_for(self, p1: str, p2: str, mode: str) -> MatchupRound:
        for r in self.rounds:
            if (r.p1, r.p2, r.mode) == (p1, p2, mode):
                return r
        raise KeyError((p1, p2, mode))

    @property
    def cells(self) -> list[CellResult]:
        return [c for r in self.rounds for c in r.cells]


def average_made(cells: list[CellResult]) -> float:
    return statistics.fmean(c.made_games for c in cells)


def needs_redo(made_counts: list[float], threshold: float = 25.0) -> bool:
    """True iff the mean number of games in which the unit was built is strictly below ``threshold``."""
    return statistics.fmean(made_counts) < threshold


def run_matchup(
    units: list[GeneratedUnit],
    spec: MatchupSpec,
    cfg: StudyConfig | None = None,
    factories: tuple[AgentFactory, AgentFactory] | None = None,
    event_log_dir: str | Path | None = None,
) -> list[CellResult]:
    """Play ``spec.games`` games per unit. P1 may always build the unit; P2 only in shared mode.

    P1's corner alternates from game to game. ``factories`` (P1, P2) replace
    the preset UCT agents, e.g. with scripted ones. With ``event_log_dir``
    every game's event log is written there as line-delimited JSON.
    """
    events = event_log_dir is not None
    if not units:
        raise ValueError("at least one unit is required")
    cfg = cfg or StudyConfig()
    a1, a2 = cfg.agent(spec.p1), cfg.agent(spec.p2)
    cells: list[CellResult] = []
    for unit in units:
        utype = to_type_def(unit, cfg.type_name, cfg.produce_base, cfg.produce_per_cost)
        if not cfg.abilities:
            utype = replace(utype, ability=None)
        game = cfg.game.with_unit_type(utype)
        without = base_access(game, cfg.type_name)
        p2_access = None if spec.mode == "shared" else without
        key = genome_key(unit)
        jobs = []
        for i in range(spec.games):
            p1_index = i % 2
            seed = derive_seed(spec.seed_base, spec.p1, spec.p2, spec.mode, key, i)
            if p1_index == 0:
                jobs.append((game, (a1, a2), (None, p2_access), seed))
            else:
                jobs.append((game, (a2, a1), (p2_access, None), seed))
        label = f"{spec.p1} vs {spec.p2} ({spec.mode}) unit {unit.label()}"
        if factories is None:
            results = play_games(jobs, None, cfg.decision_timeout, cfg.jobs, label, events)
        else:
            results = []
            for i, job in enumerate(jobs):
                pair = factories if i % 2 == 0 else (factories[1], factories[0])
                results.extend(play_games([job], pair, cfg.decision_timeout, label=f"{label} game {i}",
                                          events=events))
        cell = CellResult(spec.p1, spec.p2, spec.mode, unit.label())
        for i, r in enumerate(results):
            cell.add(r, i % 2, cfg.type_name, jobs[i][3])
            if events:
                d = Path(event_log_dir)
                d.mkdir(parents=True, exist_ok=True)
                r.write_events(d / f"{spec.p1}-{spec.p2}-{spec.mode}-{key}-{spec.seed_base}-{i:03d}.jsonl")
        cells.append(cell)
    return cells


def run_study(
    units: list[GeneratedUnit],
    skills: list[str] | tuple[str, ...] = ("strong", "medium", "weak"),
    cfg: StudyConfig | None = None,
    factories: dict[str, AgentFactory] | None = None,
    event_log_dir: str | Path | None = None,
) -> StudyReport:
    """Every ordered skill pair in both access modes, with the redo rule.

    A match-up round whose average made-games count across units is below
    the threshold is replayed once with fresh seeds; if it is still below,
    the round is flagged ``low_production``. ``factories`` maps a skill
    name to a replacement agent factory.
    """
    if not units:
        raise ValueError("at least one unit is required")
    cfg = cfg or StudyConfig()
    report = StudyReport(list(skills), [u.label() for u in units], cfg.games)
    for p1, p2 in itertools.product(skills, repeat=2):
        for mode in MODES:
            pair = None if factories is None else (factories[p1], factories[p2])
            spec = MatchupSpec(p1, p2, mode, cfg.games, derive_seed(cfg.seed_base, p1, p2, mode))
            cells = run_matchup(units, spec, cfg, pair, event_log_dir)
            rnd = MatchupRound(p1, p2, mode, cells)
            if needs_redo([c.made_games for c in cells], cfg.redo_threshold):
                first = rnd.avg_made
                log.warning("%s vs %s (%s): unit made in %.2f games on average (< %g); redoing",
                            p1, p2, mode, first, cfg.redo_threshold)
                spec = MatchupSpec(p1, p2, mode, cfg.games, derive_seed(cfg.seed_base, p1, p2, mode, "redo"))
                cells = run_matchup(units, spec, cfg, pair, event_log_dir)
                rnd = MatchupRound(p1, p2, mode, cells, redone=True)
                rnd.low_production = needs_redo([c.made_games for c in cells], cfg.redo_threshold)
                report.redo_log.append({
                    "p1": p1, "p2": p2, "mode": mode,
                    "firstAvgMade": first, "redoAvgMade": rnd.avg_made,
                    "lowProduction": rnd.low_production,
                })
            report.rounds.append(rnd)
    return report
