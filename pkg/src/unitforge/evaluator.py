"""Simulation-based fitness of a generated unit.

Round one (utility): only one side may build the new unit. Every game in
which it was built contributes ``outcome * (1 + alive / game_length)`` with
outcome +1 / -1 / 0 for win / loss / draw; the sum is divided by the number
of such games.

Round two (balance): both sides may build it. The score is
``1 - |0.5 - wins_p1 / (made_p1 + made_p2)|``.
"""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Literal

from .agents import AgentConfig, MCTSAgent, skill_preset
from .engine import Agent, GameConfig, GameResult, default_config, run_game
from .unitspace import DEFAULT_TYPE_NAME, GeneratedUnit, genome_key, to_document, to_type_def

log = logging.getLogger(__name__)

Outcome = Literal["win", "loss", "draw"]
# (player index, access set, seed) -> agent
AgentFactory = Callable[[int, "frozenset[str] | None", int], Agent]


class MetricsError(ValueError):
    """Raw round metrics are internally inconsistent."""


class RoundError(RuntimeError):
    """A game inside an evaluation round failed; no partial metrics are kept."""


def derive_seed(*parts: object) -> int:
    """Stable 63-bit seed from arbitrary parts (independent of PYTHONHASHSEED)."""
    digest = hashlib.sha256("/".join(map(str, parts)).encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass(frozen=True)
class GameRecord:
    unit_made: bool
    outcome: Outcome
    alive_ticks: int
    game_ticks: int
    holder: int = 0
    seed: int = 0

    @property
    def sign(self) -> int:
        return {"win": 1, "loss": -1, "draw": 0}[self.outcome]


@dataclass
class RoundOneMetrics:
    games: list[GameRecord] = field(default_factory=list)

    @property
    def gamma(self) -> int:
        return sum(1 for g in self.games if g.unit_made)

    @property
    def low_confidence(self) -> bool:
        return self.gamma == 0

    def validate(self) -> None:
        for i, g in enumerate(self.games):
            if g.alive_ticks < 0 or g.game_ticks < 0:
                raise MetricsError(f"game {i}: negative tick counts")
            if g.alive_ticks > g.game_ticks:
                raise MetricsError(f"game {i}: alive time {g.alive_ticks} exceeds game length {g.game_ticks}")
            if g.unit_made and g.game_ticks == 0:
                raise MetricsError(f"game {i}: zero-length game with the unit made")


@dataclass
class RoundTwoMetrics:
    wins_p1: int = 0  # epsilon: P1 wins among games where someone built the unit
    made_p1: int = 0  # zeta
    made_p2: int = 0  # eta
    games: list[dict] = field(default_factory=list)

    @property
    def low_confidence(self) -> bool:
        return self.made_p1 + self.made_p2 == 0

    def validate(self) -> None:
        if min(self.wins_p1, self.made_p1, self.made_p2) < 0:
            raise MetricsError("round-two counts must be non-negative")
        if self.wins_p1 > self.made_p1 + self.made_p2:
            raise MetricsError("wins_p1 cannot exceed made_p1 + made_p2")


def fitness_round_one(m: RoundOneMetrics) -> float:
    """Utility score in [-2, 2]; 0.0 when the unit was never built."""
    m.validate()
    made = [g for g in m.games if g.unit_made]
    if not made:
        return 0.0
    total = 0.0
    for g in made:
        s = g.sign
        total += s + s * (g.alive_ticks / g.game_ticks)
    return total / len(made)


def fitness_round_two(m: RoundTwoMetrics) -> float:
    """Balance score in [0.5, 1]; 0.5 when neither side built the unit."""
    m.validate()
    denom = m.made_p1 + m.made_p2
    if denom == 0:
        return 0.5
    # 1 - |0.5 - e/d| rewritten over an integer numerator, so that e and d - e give bit-identical results
    return 1.0 - abs(denom - 2 * m.wins_p1) / (2 * denom)


@dataclass
class FitnessReport:
    unit: GeneratedUnit
    f1: float
    f2: float
    round_one: RoundOneMetrics
    round_two: RoundTwoMetrics
    seed_base: int = 0

    @property
    def total(self) -> float:
        return self.f1 + self.f2

    @property
    def flags(self) -> list[str]:
        out = []
        if self.round_one.low_confidence:
            out.append("round1_unit_never_made")
        if self.round_two.low_confidence:
            out.append("round2_unit_never_made")
        return out

    def to_dict(self) -> dict:
        return {
            "unit": to_document(self.unit),
            "genome": genome_key(self.unit),
            "seedBase": self.seed_base,
            "f1": self.f1,
            "f2": self.f2,
            "total": self.total,
            "flags": self.flags,
            "roundOne": {"gamma": self.round_one.gamma, "games": [asdict(g) for g in self.round_one.games]},
            "roundTwo": {
                "epsilon": self.round_two.wins_p1,
                "zeta": self.round_two.made_p1,
                "eta": self.round_two.made_p2,
                "games": self.round_two.games,
            },
        }

    def write(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


@dataclass(frozen=True)
class EvalConfig:
    games_per_round: int = 10
    agent: AgentConfig = field(default_factory=lambda: skill_preset("medium"))
    game: GameConfig = field(default_factory=default_config)
    seed_base: int = 0
    type_name: str = DEFAULT_TYPE_NAME
    produce_base: int = 60
    produce_per_cost: int = 20
    decision_timeout: float | None = None
    jobs: int = 1


def game_config_for(unit: GeneratedUnit, cfg: EvalConfig) -> GameConfig:
    utype = to_type_def(unit, cfg.type_name, cfg.produce_base, cfg.produce_per_cost)
    return cfg.game.with_unit_type(utype)


def base_access(game: GameConfig, new_type: str) -> frozenset[str]:
    return frozenset(name for name in game.unit_types if name != new_type)


def _mcts_factory(agent_cfg: AgentConfig) -> AgentFactory:
    def make(player: int, access: frozenset[str] | None, seed: int) -> Agent:
        return MCTSAgent(agent_cfg, access=access, seed=seed)
    return make


def _play(job: tuple) -> GameResult:
    game, agent_cfgs, accesses, seed, timeout, events = job
    agents = [MCTSAgent(agent_cfgs[p], access=accesses[p], seed=derive_seed(seed, p)) for p in (0, 1)]
    return run_game(game, agents[0], agents[1], seed, decision_timeout=timeout, record_events=events)


def play_games(
    jobs: list[tuple[GameConfig, tuple[AgentConfig, AgentConfig], tuple, int]],
    factories: tuple[AgentFactory, AgentFactory] | None = None,
    timeout: float | None = None,
    workers: int = 1,
    label: str = "games",
    events: bool = False,
) -> list[GameResult]:
    """Play independent games; results come back in job order.

    Each job is ``(game config, (agent cfg p0, agent cfg p1), (access p0, access p1), seed)``.
    Custom ``factories`` bypass the default UCT agents (and force serial play).
    Event logs are only kept when ``events`` is set.
    """
    results: list[GameResult] = []
    if factories is None and workers > 1:
        payload = [(g, cfgs, acc, seed, timeout, events) for g, cfgs, acc, seed in jobs]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_play, p) for p in payload]
            for i, fut in enumerate(futures):
                try:
                    results.append(fut.result())
                except Exception as exc:
                    raise RoundError(f"{label}: game {i} (seed {jobs[i][3]}) failed: {exc}") from exc
        return results
    for i, (game, cfgs, access, seed) in enumerate(jobs):
        try:
            if factories is None:
                results.append(_play((game, cfgs, access, seed, timeout, events)))
            else:
                a0 = factories[0](0, access[0], derive_seed(seed, 0))
                a1 = factories[1](1, access[1], derive_seed(seed, 1))
                results.append(run_game(game, a0, a1, seed, decision_timeout=timeout, record_events=events))
        except Exception as exc:
            raise RoundError(f"{label}: game {i} (seed {seed}) failed: {exc}") from exc
    return results


def run_round_one(
    unit: GeneratedUnit,
    games: int = 10,
    cfg: EvalConfig | None = None,
    seed_base: int | None = None,
    holder_factory: AgentFactory | None = None,
    other_factory: AgentFactory | None = None,
) -> RoundOneMetrics:
    """Utility round: only the holder may build the unit; the holder's corner alternates."""
    cfg = cfg or EvalConfig()
    if games < 1:
        raise ValueError("games must be >= 1")
    seed_base = cfg.seed_base if seed_base is None else seed_base
    game = game_config_for(unit, cfg)
    without = base_access(game, cfg.type_name)
    jobs = []
    for i in range(games):
        holder = i % 2
        access = (None, without) if holder == 0 else (without, None)
        jobs.append((game, (cfg.agent, cfg.agent), access, derive_seed(seed_base, "r1", i)))
    if holder_factory is not None or other_factory is not None:
        h = holder_factory or _mcts_factory(cfg.agent)
        o = other_factory or _mcts_factory(cfg.agent)
        results = []
        for i, job in enumerate(jobs):
            pair = (h, o) if i % 2 == 0 else (o, h)
            results.extend(play_games([job], pair, cfg.decision_timeout, label=f"round one game {i}"))
    else:
        results = play_games(jobs, None, cfg.decision_timeout, cfg.jobs, "round one")
    metrics = RoundOneMetrics()
    for i, r in enumerate(results):
        holder = i % 2
        st = r.stats(cfg.type_name)
        outcome: Outcome = "draw" if r.winner is None else ("win" if r.winner == holder else "loss")
        metrics.games.append(
            GameRecord(
                unit_made=st.produced_by[holder] > 0,
                outcome=outcome,
                alive_ticks=st.alive_union_by[holder],
                game_ticks=r.end_tick,
                holder=holder,
                seed=jobs[i][3],
            )
        )
    metrics.validate()
    return metrics


def run_round_two(
    unit: GeneratedUnit,
    games: int = 10,
    cfg: EvalConfig | None = None,
    seed_base: int | None = None,
    p1_factory: AgentFactory | None = None,
    p2_factory: AgentFactory | None = None,
) -> RoundTwoMetrics:
    """Balance round: both sides may build the unit. Player 1's corner alternates."""
    cfg = cfg or EvalConfig()
    if games < 1:
        raise ValueError("games must be >= 1")
    seed_base = cfg.seed_base if seed_base is None else seed_base
    game = game_config_for(unit, cfg)
    jobs = [(game, (cfg.agent, cfg.agent), (None, None), derive_seed(seed_base, "r2", i)) for i in range(games)]
    if p1_factory is not None or p2_factory is not None:
        f1 = p1_factory or _mcts_factory(cfg.agent)
        f2 = p2_factory or _mcts_factory(cfg.agent)
        results = []
        for i, job in enumerate(jobs):
            pair = (f1, f2) if i % 2 == 0 else (f2, f1)
            results.extend(play_games([job], pair, cfg.decision_timeout, label=f"round two game {i}"))
    else:
        results = play_games(jobs, None, cfg.decision_timeout, cfg.jobs, "round two")
    m = RoundTwoMetrics()
    for i, r in enumerate(results):
        p1 = i % 2  # player index playing the "player 1" role
        st = r.stats(cfg.type_name)
        made1 = st.produced_by[p1] > 0
        made2 = st.produced_by[1 - p1] > 0
        p1_won = r.winner == p1
        m.made_p1 += made1
        m.made_p2 += made2
        if p1_won and (made1 or made2):
            m.wins_p1 += 1
        m.games.append({
            "seed": jobs[i][3],
            "p1Index": p1,
            "madeP1": made1,
            "madeP2": made2,
            "winner": None if r.winner is None else ("p1" if p1_won else "p2"),
            "ticks": r.end_tick,
        })
    m.validate()
    return m


def evaluate_unit(unit: GeneratedUnit, cfg: EvalConfig | None = None) -> FitnessReport:
    """Both rounds plus the combined fitness; deterministic for a given ``cfg.seed_base``."""
    cfg = cfg or EvalConfig()
    r1 = run_round_one(unit, cfg.games_per_round, cfg)
    r2 = run_round_two(unit, cfg.games_per_round, cfg)
    report = FitnessReport(unit, fitness_round_one(r1), fitness_round_two(r2), r1, r2, cfg.seed_base)
    log.info("evaluated %s: f1=%.4f f2=%.4f total=%.4f", genome_key(unit), report.f1, report.f2, report.total)
    return report
