"""Deterministic tick-based 8x8 mini-RTS."""

from .game import (
    Agent,
    GameResult,
    PlayerAction,
    TypeStats,
    collect_type_stats,
    legal_actions,
    new_game,
    run_game,
    step,
)
from .state import EMPTY, NODE, GameOver, GameState, Rejection, Unit, geometry
from .types import (
    ATTACK,
    HARVEST,
    IDLE,
    IDLE_CMD,
    MOVE,
    PRODUCE,
    RETURN,
    Ability,
    Cause,
    Command,
    ConfigError,
    Effect,
    GameConfig,
    Placement,
    UnitTypeDef,
    default_config,
    load_config,
)
