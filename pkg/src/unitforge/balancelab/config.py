"""Study configuration and its JSON overrides file."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..agents import PRESETS, AgentConfig, skill_preset
from ..engine import GameConfig, default_config, load_config
from ..evaluator import EvalConfig
from ..unitspace import DEFAULT_TYPE_NAME

SKILLS = ("strong", "medium", "weak")
MODES = ("exclusive", "shared")

_AGENT_KEYS = {
    "maxDepth": "max_depth",
    "maxIterations": "max_iterations",
    "explorationConstant": "exploration",
    "playoutHorizon": "playout_horizon",
    "decisionPeriod": "decision_period",
}


@dataclass(frozen=True)
class StudyConfig:
    games: int = 100
    redo_threshold: float = 25.0
    presets: dict[str, AgentConfig] = field(default_factory=lambda: {k: skill_preset(k) for k in PRESETS})
    game: GameConfig = field(default_factory=default_config)
    seed_base: int = 0
    jobs: int = 1
    type_name: str = DEFAULT_TYPE_NAME
    produce_base: int = 60
    produce_per_cost: int = 20
    abilities: bool = True
    decision_timeout: float | None = None

    def __post_init__(self) -> None:
        if self.games < 1:
            raise ValueError("games must be >= 1")
        if self.redo_threshold <= 0:
            raise ValueError("redo threshold must be > 0")

    def agent(self, skill: str) -> AgentConfig:
        try:
            return self.presets[skill]
        except KeyError:
            raise ValueError(f"unknown skill {skill!r}; known: {sorted(self.presets)}") from None

    def scaled(self, factor: float) -> StudyConfig:
        """Multiply every preset's iteration budget by ``factor``."""
        return replace(self, presets={k: v.scaled(factor) for k, v in self.presets.items()})

    def eval_config(self, skill: str = "medium", games_per_round: int = 10, seed_base: int | None = None) -> EvalConfig:
        return EvalConfig(
            games_per_round=games_per_round,
            agent=self.agent(skill),
            game=self.game,
            seed_base=self.seed_base if seed_base is None else seed_base,
            type_name=self.type_name,
            produce_base=self.produce_base,
            produce_per_cost=self.produce_per_cost,
            decision_timeout=self.decision_timeout,
            jobs=self.jobs,
        )


def load_study_config(path: str | Path | None = None, **overrides) -> StudyConfig:
    """Read a study config JSON file.

    Recognised keys: games, redoThreshold, seedBase, jobs, iterationScale,
    decisionTimeout, produceTimeBase, produceTimePerCost, gameConfig (path),
    engine (GameConfig field overrides such as maxTicks), presets (per skill
    agent overrides, e.g. ``{"weak": {"maxIterations": 50}}``).
    """
    doc: dict = {}
    base_dir = Path(".")
    if path is not None:
        doc = json.loads(Path(path).read_text())
        base_dir = Path(path).parent
    game = load_config(base_dir / doc["gameConfig"]) if "gameConfig" in doc else default_config()
    engine = doc.get("engine", {})
    if engine:
        merged = game.to_dict()
        merged.update(engine)
        game = GameConfig.from_dict(merged)
    presets = {k: skill_preset(k) for k in PRESETS}
    for skill, over in doc.get("presets", {}).items():
        base = presets.get(skill, AgentConfig())
        kwargs = {}
        for key, value in over.items():
            if key not in _AGENT_KEYS:
                raise ValueError(f"unknown agent setting {key!r} for preset {skill!r}")
            kwargs[_AGENT_KEYS[key]] = value
        presets[skill] = replace(base, **kwargs)
    cfg = StudyConfig(
        games=int(doc.get("games", 100)),
        redo_threshold=float(doc.get("redoThreshold", 25.0)),
        presets=presets,
        game=game,
        seed_base=int(doc.get("seedBase", 0)),
        jobs=int(doc.get("jobs", 1)),
        produce_base=int(doc.get("produceTimeBase", 60)),
        produce_per_cost=int(doc.get("produceTimePerCost", 20)),
        decision_timeout=doc.get("decisionTimeout"),
    )
    if "iterationScale" in doc:
        cfg = cfg.scaled(float(doc["iterationScale"]))
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg
