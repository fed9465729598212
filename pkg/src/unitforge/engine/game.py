"""Game lifecycle: setup, legal moves, stepping and full matches."""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Protocol

from .state import GameOver, GameState, Rejection, Unit
from .types import Command, ConfigError, GameConfig

log = logging.getLogger(__name__)

PlayerAction = dict[int, Command]


class Agent(Protocol):
    """Anything that can pick orders for a player's free units."""

    access: frozenset[str] | None
    decision_period: int

    def choose_action(self, state: GameState, player: int) -> PlayerAction: ...


def new_game(config: GameConfig, seed: int = 0, record: bool = False) -> GameState:
    """Build the tick-0 state. The layout does not depend on ``seed``."""
    del seed  # seeds drive agents, never the layout
    config.validate()
    state = GameState(config)
    for x, y, amount in config.resource_nodes:
        state.add_node(x, y, amount)
    for p in config.placements:
        try:
            state.add_unit(config.unit_types[p.unit_type], p.owner, p.x, p.y)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if record:
        state.log = []
        state.fallen = []
    return state


def legal_actions(state: GameState, player: int) -> dict[int, list[Command]]:
    """Legal commands per free unit of ``player``."""
    if state.terminal:
        raise GameOver("no legal actions in a terminal state")
    return {u.id: state.commands_for(u) for u in state.free_units(player)}


def step(state: GameState, a0: PlayerAction, a1: PlayerAction) -> tuple[GameState, list[Rejection]]:
    """Pure version of :meth:`GameState.apply`: returns the successor and any rejections."""
    nxt = state.clone(record=True)
    rejections = nxt.apply(a0, a1)
    return nxt, rejections


@dataclass
class TypeStats:
    times_produced: int = 0
    produced_by: list[int] = field(default_factory=lambda: [0, 0])
    total_alive_ticks: int = 0
    alive_interval_union: int = 0
    alive_union_by: list[int] = field(default_factory=lambda: [0, 0])

    def to_dict(self) -> dict:
        return {
            "timesProduced": self.times_produced,
            "producedBy": list(self.produced_by),
            "totalAliveTicks": self.total_alive_ticks,
            "aliveIntervalUnion": self.alive_interval_union,
            "aliveUnionBy": list(self.alive_union_by),
        }


@dataclass
class GameResult:
    winner: int | None
    end_tick: int
    events: list[tuple]
    type_stats: dict[str, TypeStats]
    timeouts: int = 0

    @property
    def outcome(self) -> str:
        return "draw" if self.winner is None else f"win{self.winner}"

    def stats(self, type_name: str) -> TypeStats:
        return self.type_stats.get(type_name) or TypeStats()

    def event_lines(self) -> Iterable[str]:
        for tick, kind, ids, payload in self.events:
            yield json.dumps({"tick": tick, "event": kind, "units": list(ids), "payload": payload}, sort_keys=True)

    def event_hash(self) -> str:
        h = hashlib.sha256()
        for line in self.event_lines():
            h.update(line.encode())
            h.update(b"\n")
        return h.hexdigest()

    def write_events(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            for line in self.event_lines():
                fh.write(line + "\n")


def _union_length(intervals: list[tuple[int, int]]) -> int:
    total = 0
    cur_start = cur_end = None
    for start, end in sorted(intervals):
        if cur_end is None or start > cur_end:
            if cur_end is not None:
                total += cur_end - cur_start
            cur_start, cur_end = start, end
        else:
            cur_end = max(cur_end, end)
    if cur_end is not None:
        total += cur_end - cur_start
    return total


def collect_type_stats(state: GameState, initial_ids: set[int]) -> dict[str, TypeStats]:
    """Per-type production and alive-time stats from a recorded state."""
    end = state.tick
    everyone: list[Unit] = list(state.units.values()) + list(state.fallen or ())
    per_type: dict[str, list[Unit]] = {}
    for u in everyone:
        per_type.setdefault(u.utype.name, []).append(u)
    out: dict[str, TypeStats] = {}
    for name, members in per_type.items():
        ts = TypeStats()
        spans: list[tuple[int, int]] = []
        by_owner: list[list[tuple[int, int]]] = [[], []]
        for u in members:
            if u.id not in initial_ids:
                ts.times_produced += 1
                ts.produced_by[u.owner] += 1
            span = (u.born, u.died if u.died is not None else end)
            ts.total_alive_ticks += span[1] - span[0]
            spans.append(span)
            by_owner[u.owner].append(span)
        ts.alive_interval_union = _union_length(spans)
        ts.alive_union_by = [_union_length(by_owner[0]), _union_length(by_owner[1])]
        out[name] = ts
    return out


def run_game(
    config: GameConfig,
    agent0: Agent,
    agent1: Agent,
    seed: int = 0,
    *,
    decision_timeout: float | None = None,
    fast_forward: bool = True,
    on_tick: Callable[[GameState], None] | None = None,
    record_events: bool = True,
) -> GameResult:
    """Play one match to completion.

    Agents are consulted at ticks that are multiples of their decision period
    whenever they own free units. With ``fast_forward`` the loop jumps over
    ticks in which nothing can happen; ``on_tick`` sees every state the loop
    visits (every tick when fast-forwarding is off). Without
    ``record_events`` the result carries an empty event log.
    """
    state = new_game(config, seed, record=True)
    if not record_events:
        state.log = None
    state.access = [agent0.access, agent1.access]
    initial_ids = set(state.units)
    agents = (agent0, agent1)
    timeouts = 0
    while not state.terminal:
        actions: list[PlayerAction] = [{}, {}]
        for p, agent in enumerate(agents):
            if state.tick % agent.decision_period == 0 and state.free_units(p):
                started = time.perf_counter()
                act = agent.choose_action(state, p)
                if decision_timeout is not None and time.perf_counter() - started > decision_timeout:
                    timeouts += 1
                    log.warning("player %d exceeded %.3fs at tick %d; idling", p, decision_timeout, state.tick)
                    if state.log is not None:
                        state.log.append((state.tick, "timeout", (), {"player": p}))
                    act = {}
                actions[p] = act
        state.apply(actions[0], actions[1])
        if on_tick is not None:
            on_tick(state)
        if fast_forward and not state.terminal:
            target = state.next_event_tick()
            for p, agent in enumerate(agents):
                if state.free_units(p):
                    period = agent.decision_period
                    target = min(target, -(-state.tick // period) * period)
            if target > state.tick + 1:
                state.skip_to(target)
                if on_tick is not None:
                    on_tick(state)
    return GameResult(
        winner=state.winner,
        end_tick=state.tick,
        events=state.log or [],
        type_stats=collect_type_stats(state, initial_ids),
        timeouts=timeouts,
    )
