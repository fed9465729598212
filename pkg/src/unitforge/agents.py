"""Game-playing agents: UCT search of graded strength and scripted baselines.

The search handles simultaneous moves with an alternating approximation. A
tree ply assigns one command to one free unit; plies alternate between the
searching player's units and the opponent's. Once every free unit at the
current tick has an order, the buffered orders are applied jointly and the
state is fast-forwarded to the next tick where some unit is free again.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace
from typing import Literal

from .engine import (
    ATTACK,
    MOVE,
    PRODUCE,
    Command,
    GameOver,
    GameState,
    PlayerAction,
    Unit,
)

SkillLevel = Literal["strong", "medium", "weak"]


@dataclass(frozen=True)
class AgentConfig:
    max_depth: int = 5
    max_iterations: int = 500
    exploration: float = math.sqrt(2)
    playout_horizon: int = 100
    decision_period: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_depth < 1 or self.max_iterations < 1:
            raise ValueError("max_depth and max_iterations must be >= 1")
        if self.exploration <= 0 or self.playout_horizon < 1 or self.decision_period < 1:
            raise ValueError("exploration, playout_horizon and decision_period must be positive")

    def scaled(self, factor: float) -> AgentConfig:
        """Same depth, iteration budget multiplied by ``factor`` (at least 1)."""
        return replace(self, max_iterations=max(1, round(self.max_iterations * factor)))


PRESETS: dict[str, tuple[int, int]] = {
    "strong": (10, 1000),
    "medium": (5, 500),
    "weak": (2, 250),
}


def skill_preset(level: SkillLevel, **overrides) -> AgentConfig:
    try:
        depth, iterations = PRESETS[level]
    except KeyError:
        raise ValueError(f"unknown skill level {level!r}; expected one of {sorted(PRESETS)}") from None
    return AgentConfig(**{"max_depth": depth, "max_iterations": iterations, **overrides})


def evaluate_state(state: GameState, player: int) -> float:
    """Material balance in [-1, 1] from ``player``'s point of view.

    Material is the sum of hp * cost over a side's units plus its stockpile
    and carried resources. Terminal states score +1 / -1 / 0.
    """
    if state.terminal:
        if state.winner is None:
            return 0.0
        return 1.0 if state.winner == player else -1.0
    m = [float(state.resources[0]), float(state.resources[1])]
    for u in state.units.values():
        m[u.owner] += u.hp * u.utype.cost + u.carried
    total = m[0] + m[1]
    if total <= 0:
        return 0.0
    diff = (m[0] - m[1]) / total
    return diff if player == 0 else -diff


def _reserved(buffer: PlayerAction, state: GameState) -> int:
    types = state.config.unit_types
    return sum(types[c.unit_type].cost for c in buffer.values() if c.kind == PRODUCE)


def random_orders(state: GameState, player: int, rng: random.Random, units: list[Unit] | None = None,
                  reserved: int = 0) -> PlayerAction:
    """Uniform-random legal command for each free unit (the playout policy)."""
    orders: PlayerAction = {}
    types = state.config.unit_types
    rand = rng.random
    for u in state.free_units(player) if units is None else units:
        cmds = state.commands_for(u, reserved)
        cmd = cmds[int(rand() * len(cmds))]
        if cmd.kind == PRODUCE:
            reserved += types[cmd.unit_type].cost
        orders[u.id] = cmd
    return orders


def _fast_forward(state: GameState, limit: int | None = None) -> None:
    """Advance until some unit is free, the game ends, or ``limit`` is reached."""
    units = state.units
    while not state.terminal and all(u.action is not None for u in units.values()):
        target = state.next_event_tick()
        if limit is not None and target > limit:
            state.tick = max(state.tick, limit)
            return
        state.skip_to(target)


def _ply_queue(state: GameState, first: int) -> tuple[list[tuple[int, int]], tuple[PlayerAction, PlayerAction]]:
    """Decision plies for the free units, own and opponent interleaved, own first.

    Units with a single legal command are not decisions; they are returned
    as pre-filled buffers instead.
    """
    forced: tuple[PlayerAction, PlayerAction] = ({}, {})
    lists: list[list[int]] = [[], []]
    for p in (first, 1 - first):
        for u in state.free_units(p):
            cmds = state.commands_for(u)
            if len(cmds) == 1:
                forced[p][u.id] = cmds[0]
            else:
                lists[p].append(u.id)
    mine, theirs = lists[first], lists[1 - first]
    queue: list[tuple[int, int]] = []
    for i in range(max(len(mine), len(theirs))):
        if i < len(mine):
            queue.append((first, mine[i]))
        if i < len(theirs):
            queue.append((1 - first, theirs[i]))
    return queue, forced


def _next_decision(state: GameState, root_player: int, limit: int
                   ) -> tuple[list[tuple[int, int]], tuple[PlayerAction, PlayerAction]]:
    """Advance ``state`` in place past joint steps that need no decision.

    Stops at the first moment with a real choice, at game end, or once
    ``limit`` is reached (then the queue is empty and the node is a leaf).
    """
    while True:
        _fast_forward(state, limit)
        if state.terminal or state.tick >= limit:
            return [], ({}, {})
        queue, forced = _ply_queue(state, root_player)
        if queue:
            return queue, forced
        state.apply(forced[0], forced[1], trusted=True)


class _Node:
    __slots__ = ("state", "buffers", "queue", "depth", "parent", "command", "children", "untried",
                 "visits", "total", "limit")

    def __init__(self, state: GameState, buffers: tuple[PlayerAction, PlayerAction],
                 queue: list[tuple[int, int]], depth: int, parent: _Node | None, command: Command | None,
                 limit: int):
        self.state = state
        self.limit = limit
        self.buffers = buffers
        self.queue = queue
        self.depth = depth
        self.parent = parent
        self.command = command
        self.children: list[_Node] = []
        self.untried: list[Command] | None = None
        self.visits = 0
        self.total = 0.0

    @property
    def mover(self) -> int:
        return self.queue[0][0]

    def legal(self) -> list[Command]:
        if self.untried is None:
            player, uid = self.queue[0]
            u = self.state.units[uid]
            self.untried = self.state.commands_for(u, _reserved(self.buffers[player], self.state))
            self.untried.reverse()  # pop() then yields canonical order
        return self.untried

    def expand(self, root_player: int) -> _Node:
        cmd = self.untried.pop()
        player, uid = self.queue[0]
        buffers = (dict(self.buffers[0]), dict(self.buffers[1]))
        buffers[player][uid] = cmd
        rest = self.queue[1:]
        if rest:
            child = _Node(self.state, buffers, rest, self.depth + 1, self, cmd, self.limit)
        else:
            nxt = self.state.clone()
            nxt.apply(buffers[0], buffers[1], trusted=True)
            queue, forced = _next_decision(nxt, root_player, self.limit)
            child = _Node(nxt, forced, queue, self.depth + 1, self, cmd, self.limit)
        self.children.append(child)
        return child


def _rollout(state: GameState, end: int, rng: random.Random) -> None:
    """Uniform-random play until tick ``end`` or game over, jumping between events."""
    units = state.units
    rand = rng.random
    max_ticks = state.config.max_ticks
    while not state.terminal and state.tick < end:
        t = state.tick
        for u in units.values():
            if u.action is None:
                # _issue deducts production costs at once, so later units see the reduced stockpile
                cmds = state.commands_for(u)
                state._issue(u, cmds[int(rand() * len(cmds))], t)
        nxt = min(u.done for u in units.values())
        if nxt > end:
            state.tick = end
            return
        state.tick = min(nxt, max_ticks)
        state._resolve(state.tick)
        state._check_terminal()


def _playout(node: _Node, root_player: int, horizon: int, rng: random.Random) -> float:
    state = node.state
    if state.terminal:
        return evaluate_state(state, root_player)
    state = state.clone()
    if node.queue:
        buffers = (dict(node.buffers[0]), dict(node.buffers[1]))
        for player in (0, 1):
            pending = [state.units[uid] for p, uid in node.queue if p == player]
            buffers[player].update(
                random_orders(state, player, rng, pending, _reserved(buffers[player], state))
            )
        state.apply(buffers[0], buffers[1], trusted=True)
    _rollout(state, node.state.tick + horizon, rng)
    return evaluate_state(state, root_player)


def choose_action(state: GameState, player: int, cfg: AgentConfig, rng: random.Random) -> PlayerAction:
    """Pick orders for ``player``'s free units with UCT.

    Commands along the most-visited path of the current joint step become
    the orders; free units the tree did not reach get playout-policy orders.
    Units with a single legal command get it directly and use no tree ply.
    """
    if state.terminal:
        raise GameOver("cannot choose an action in a terminal state")
    free = state.free_units(player)
    if not free:
        return {}
    options = {u.id: state.commands_for(u) for u in free}
    if all(len(cmds) == 1 for cmds in options.values()):
        return {uid: cmds[0] for uid, cmds in options.items()}

    root_state = state.clone()
    limit = min(state.config.max_ticks, state.tick + cfg.max_depth * cfg.playout_horizon)
    queue, forced = _ply_queue(root_state, player)
    root = _Node(root_state, forced, queue, 0, None, None, limit)
    c = cfg.exploration
    for _ in range(cfg.max_iterations):
        node = root
        # selection
        while node.queue and node.depth < cfg.max_depth and not node.legal() and node.children:
            log_n = math.log(node.visits)
            sign = 1.0 if node.mover == player else -1.0
            best = None
            best_score = -math.inf
            for ch in node.children:
                score = sign * ch.total / ch.visits + c * math.sqrt(log_n / ch.visits)
                if score > best_score:
                    best, best_score = ch, score
            node = best
        # expansion
        if node.queue and node.depth < cfg.max_depth and node.legal():
            node = node.expand(player)
        value = _playout(node, player, cfg.playout_horizon, rng)
        while node is not None:
            node.visits += 1
            node.total += value
            node = node.parent

    orders: PlayerAction = dict(forced[player])
    node = root
    while node.children and node.state is root_state:
        best = node.children[0]
        for ch in node.children[1:]:
            if ch.visits > best.visits:
                best = ch
        if node.mover == player:
            orders[node.queue[0][1]] = best.command
        node = best
    rest = [u for u in free if u.id not in orders]
    if rest:
        reserved = sum(state.config.unit_types[cmd.unit_type].cost for cmd in orders.values() if cmd.kind == PRODUCE)
        orders.update(random_orders(state, player, rng, rest, reserved))
    return orders


class MCTSAgent:
    """UCT agent bound to one player for one game.

    ``access`` restricts which unit types the agent may produce (``None``
    means all types in the config).
    """

    def __init__(self, cfg: AgentConfig, access: frozenset[str] | None = None, seed: int | None = None):
        self.cfg = cfg
        self.access = access
        self.decision_period = cfg.decision_period
        self.rng = random.Random(cfg.seed if seed is None else seed)

    def choose_action(self, state: GameState, player: int) -> PlayerAction:
        return choose_action(state, player, self.cfg, self.rng)


class IdleAgent:
    """Never issues orders."""

    def __init__(self, access: frozenset[str] | None = None, decision_period: int = 10):
        self.access = access
        self.decision_period = decision_period

    def choose_action(self, state: GameState, player: int) -> PlayerAction:
        return {}


class RandomAgent:
    def __init__(self, seed: int = 0, access: frozenset[str] | None = None, decision_period: int = 10):
        self.rng = random.Random(seed)
        self.access = access
        self.decision_period = decision_period

    def choose_action(self, state: GameState, player: int) -> PlayerAction:
        return random_orders(state, player, self.rng)


def _step_toward(state: GameState, u: Unit, goal: Unit) -> Command | None:
    best = None
    best_d = max(abs(goal.x - u.x), abs(goal.y - u.y))
    for c in state.adj[u.y * state.config.width + u.x]:
        if state.grid[c] == -1:
            x, y = state.coords[c]
            d = max(abs(goal.x - x), abs(goal.y - y)) + abs(goal.x - x) + abs(goal.y - y)
            if best is None or d < best_d:
                best, best_d = Command(MOVE, c), d
    return best


class RushAgent:
    """Scripted aggressor: builds ``build`` at the army producer, attacks anything in range,
    otherwise walks toward the nearest enemy. Workers join the attack."""

    def __init__(self, build: str = "Light", access: frozenset[str] | None = None, decision_period: int = 10,
                 build_once: bool = False):
        self.build = build
        self.access = access
        self.decision_period = decision_period
        self.build_once = build_once
        self.built = 0

    def choose_action(self, state: GameState, player: int) -> PlayerAction:
        orders: PlayerAction = {}
        enemies = [v for v in state.units.values() if v.owner != player]
        reserved = 0
        for u in state.free_units(player):
            cmds = state.commands_for(u, reserved)
            attacks = [c for c in cmds if c.kind == ATTACK]
            if attacks:
                orders[u.id] = min(attacks, key=lambda c: state.units[c.target].hp)
                continue
            produce = [c for c in cmds if c.kind == PRODUCE and c.unit_type == self.build]
            if produce and not (self.build_once and self.built):
                orders[u.id] = produce[0]
                reserved += state.config.unit_types[self.build].cost
                self.built += 1
                continue
            if not u.utype.is_structure and enemies:
                goal = min(enemies, key=lambda v: (max(abs(v.x - u.x), abs(v.y - u.y)), v.id))
                mv = _step_toward(state, u, goal)
                if mv is not None:
                    orders[u.id] = mv
        return orders
