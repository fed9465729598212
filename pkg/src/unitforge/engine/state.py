"""Mutable simulation state and the per-tick rules.

Cells are addressed by flat index ``y * width + x``. The grid holds a unit id,
``EMPTY`` or ``NODE`` (resource node) per cell. Dict iteration order over
``units`` is ascending id, which is what makes every resolution pass
deterministic without sorting.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .types import (
    ATTACK,
    HARVEST,
    IDLE,
    IDLE_CMD,
    KIND_NAMES,
    MOVE,
    PRODUCE,
    RETURN,
    Cause,
    Command,
    Effect,
    GameConfig,
    UnitTypeDef,
)

EMPTY = -1
NODE = -2
HEAL_AMOUNT = 3


class GameOver(RuntimeError):
    """Raised when an operation requires a non-terminal state."""


@dataclass(frozen=True)
class Rejection:
    player: int
    unit_id: int
    command: Command
    reason: str


class Board:
    """Precomputed per-size lookup tables shared by every state of that size."""

    def __init__(self, width: int, height: int):
        n = width * height
        self.coords = tuple((i % width, i // width) for i in range(n))
        adj = []
        for x, y in self.coords:
            # fixed order: up, right, down, left
            cells = []
            for dx, dy in ((0, -1), (1, 0), (0, 1), (-1, 0)):
                nx, ny = x + dx, y + dy
                if 0 <= nx < width and 0 <= ny < height:
                    cells.append(ny * width + nx)
            adj.append(tuple(cells))
        self.adj = tuple(adj)
        self.dist = tuple(
            tuple(max(abs(ax - bx), abs(ay - by)) for bx, by in self.coords) for ax, ay in self.coords
        )
        self.move_cmd = tuple(Command(MOVE, c) for c in range(n))
        self.harvest_cmd = tuple(Command(HARVEST, c) for c in range(n))
        self.return_cmd = tuple(Command(RETURN, c) for c in range(n))
        self.produce_cmd: dict[tuple[int, str], Command] = {}
        self.attack_cmd: dict[int, Command] = {}


@lru_cache(maxsize=None)
def board(width: int, height: int) -> Board:
    return Board(width, height)


def geometry(width: int, height: int) -> tuple[tuple[tuple[int, ...], ...], tuple[tuple[int, int], ...]]:
    """Return (4-neighbour cell lists, cell -> (x, y)) for a board size."""
    b = board(width, height)
    return b.adj, b.coords


class Unit:
    __slots__ = (
        "id", "utype", "owner", "x", "y", "cell", "hp", "carried", "action", "done",
        "attacks", "boost", "penalty", "born", "died",
    )

    def __init__(self, uid: int, utype: UnitTypeDef, owner: int, x: int, y: int, cell: int, born: int = 0):
        self.id = uid
        self.utype = utype
        self.owner = owner
        self.x = x
        self.y = y
        self.cell = cell
        self.hp = utype.max_hp
        self.carried = 0
        self.action: Command | None = None
        self.done = -1
        self.attacks = 0
        self.boost = False
        self.penalty = False
        self.born = born
        self.died: int | None = None

    def copy(self) -> Unit:
        u = Unit.__new__(Unit)
        u.id = self.id
        u.utype = self.utype
        u.owner = self.owner
        u.x = self.x
        u.y = self.y
        u.cell = self.cell
        u.hp = self.hp
        u.carried = self.carried
        u.action = self.action
        u.done = self.done
        u.attacks = self.attacks
        u.boost = self.boost
        u.penalty = self.penalty
        u.born = self.born
        u.died = self.died
        return u

    @property
    def attack_time(self) -> int:
        t = self.utype.attack_time
        if self.penalty:
            t *= 2
        if self.boost:
            t = max(1, t // 2)
        return t

    @property
    def position(self) -> tuple[int, int]:
        return (self.x, self.y)

    def __repr__(self) -> str:
        return f"Unit({self.id}, {self.utype.name}, p{self.owner}, ({self.x},{self.y}), hp={self.hp})"


class GameState:
    """Full tick-indexed game state. Treat stored states as values: clone before mutating."""

    __slots__ = (
        "config", "tick", "units", "grid", "nodes", "resources", "spent", "granted", "lost",
        "initial_nodes", "initial_stock", "next_id", "terminal", "winner", "access", "log",
        "fallen", "adj", "coords", "board",
    )

    def __init__(self, config: GameConfig):
        self.config = config
        self.tick = 0
        self.units: dict[int, Unit] = {}
        self.grid = [EMPTY] * (config.width * config.height)
        self.nodes: dict[int, int] = {}
        self.resources = [config.start_resources, config.start_resources]
        self.spent = [0, 0]
        self.granted = [0, 0]
        self.lost = [0, 0]
        self.initial_nodes = 0
        self.initial_stock = 2 * config.start_resources
        self.next_id = 0
        self.terminal = False
        self.winner: int | None = None
        # per-player set of producible type names; None means unrestricted
        self.access: list[frozenset[str] | None] = [None, None]
        self.log: list[tuple] | None = None
        self.fallen: list[Unit] | None = None
        self.board = board(config.width, config.height)
        self.adj = self.board.adj
        self.coords = self.board.coords

    # -- construction helpers -------------------------------------------------

    def cell(self, x: int, y: int) -> int:
        return y * self.config.width + x

    def add_unit(self, utype: UnitTypeDef, owner: int, x: int, y: int) -> Unit:
        c = self.cell(x, y)
        if self.grid[c] != EMPTY:
            raise ValueError(f"cell ({x},{y}) is occupied")
        u = Unit(self.next_id, utype, owner, x, y, c, self.tick)
        self.next_id += 1
        self.units[u.id] = u
        self.grid[c] = u.id
        return u

    def add_node(self, x: int, y: int, amount: int) -> None:
        c = self.cell(x, y)
        if self.grid[c] != EMPTY:
            raise ValueError(f"cell ({x},{y}) is occupied")
        self.grid[c] = NODE
        self.nodes[c] = amount
        self.initial_nodes += amount

    def clone(self, record: bool = False) -> GameState:
        s = GameState.__new__(GameState)
        s.config = self.config
        s.tick = self.tick
        s.units = {uid: u.copy() for uid, u in self.units.items()}
        s.grid = self.grid[:]
        s.nodes = dict(self.nodes)
        s.resources = self.resources[:]
        s.spent = self.spent[:]
        s.granted = self.granted[:]
        s.lost = self.lost[:]
        s.initial_nodes = self.initial_nodes
        s.initial_stock = self.initial_stock
        s.next_id = self.next_id
        s.terminal = self.terminal
        s.winner = self.winner
        s.access = self.access[:]
        s.board = self.board
        s.adj = self.adj
        s.coords = self.coords
        s.log = list(self.log) if record and self.log is not None else None
        s.fallen = [u.copy() for u in self.fallen] if record and self.fallen is not None else None
        return s

    # -- queries ----------------------------------------------------------------

    def free_units(self, player: int) -> list[Unit]:
        return [u for u in self.units.values() if u.owner == player and u.action is None]

    def unit_count(self, player: int) -> int:
        return sum(1 for u in self.units.values() if u.owner == player)

    def carried(self, player: int) -> int:
        return sum(u.carried for u in self.units.values() if u.owner == player)

    def conservation_gap(self) -> int:
        """Zero iff resources are conserved: sources minus sinks."""
        sources = self.initial_nodes + self.initial_stock + sum(self.granted)
        sinks = (
            sum(self.nodes.values())
            + sum(u.carried for u in self.units.values())
            + sum(self.lost)
            + sum(self.resources)
            + sum(self.spent)
        )
        return sources - sinks

    def next_event_tick(self) -> int:
        """Earliest tick at which something can change without new orders."""
        best = self.config.max_ticks
        for u in self.units.values():
            if u.action is None:
                return self.tick + 1
            if u.done < best:
                best = u.done
        return max(best, self.tick + 1)

    def commands_for(self, u: Unit, reserved: int = 0) -> list[Command]:
        """Legal commands for a free unit, in canonical order (idle last).

        ``reserved`` is stockpile already committed by other orders this tick.
        """
        t = u.utype
        grid = self.grid
        units = self.units
        owner = u.owner
        b = self.board
        cmds: list[Command] = []
        if t.damage > 0:
            rng = t.attack_range
            row = b.dist[u.cell]
            cache = b.attack_cmd
            for v in units.values():
                if v.owner != owner and row[v.cell] <= rng:
                    cmd = cache.get(v.id)
                    if cmd is None:
                        cmd = cache[v.id] = Command(ATTACK, v.id)
                    cmds.append(cmd)
        adj = b.adj[u.cell]
        if t.can_harvest:
            if u.carried == 0:
                for c in adj:
                    if grid[c] == NODE:
                        cmds.append(b.harvest_cmd[c])
            else:
                for c in adj:
                    g = grid[c]
                    if g >= 0:
                        d = units[g]
                        if d.owner == owner and d.utype.stores_resources:
                            cmds.append(b.return_cmd[c])
        if t.produces:
            allowed = self.access[owner]
            budget = self.resources[owner] - reserved
            types = self.config.unit_types
            free_cells = [c for c in adj if grid[c] == EMPTY]
            if free_cells:
                cache = b.produce_cmd
                for name in t.produces:
                    if (allowed is None or name in allowed) and types[name].cost <= budget:
                        for c in free_cells:
                            cmd = cache.get((c, name))
                            if cmd is None:
                                cmd = cache[(c, name)] = Command(PRODUCE, c, name)
                            cmds.append(cmd)
        if not t.is_structure:
            mv = b.move_cmd
            for c in adj:
                if grid[c] == EMPTY:
                    cmds.append(mv[c])
        cmds.append(IDLE_CMD)
        return cmds

    def check_command(self, u: Unit, cmd: Command, reserved: int = 0) -> str | None:
        """Return a rejection reason, or None when ``cmd`` is legal for ``u``."""
        t = u.utype
        kind = cmd.kind
        if kind == IDLE:
            return None
        here = u.cell
        if kind == MOVE:
            if t.is_structure:
                return "structures cannot move"
            if cmd.target not in self.adj[here]:
                return "move target not adjacent"
            if self.grid[cmd.target] != EMPTY:
                return "move target occupied"
            return None
        if kind == ATTACK:
            v = self.units.get(cmd.target)
            if t.damage <= 0:
                return "unit cannot attack"
            if v is None or v.owner == u.owner:
                return "no enemy with that id"
            if self.board.dist[u.cell][v.cell] > t.attack_range:
                return "target out of range"
            return None
        if kind == HARVEST:
            if not t.can_harvest:
                return "unit cannot harvest"
            if u.carried:
                return "already carrying"
            if cmd.target not in self.adj[here] or self.grid[cmd.target] != NODE:
                return "no adjacent resource node there"
            return None
        if kind == RETURN:
            if not t.can_harvest or not u.carried:
                return "nothing to return"
            g = self.grid[cmd.target] if cmd.target in self.adj[here] else EMPTY
            if g < 0 or self.units[g].owner != u.owner or not self.units[g].utype.stores_resources:
                return "no adjacent own base there"
            return None
        if kind == PRODUCE:
            name = cmd.unit_type
            if name not in t.produces:
                return f"{t.name} cannot produce {name}"
            allowed = self.access[u.owner]
            if allowed is not None and name not in allowed:
                return f"player {u.owner} has no access to {name}"
            if self.config.unit_types[name].cost > self.resources[u.owner] - reserved:
                return "insufficient resources"
            if cmd.target not in self.adj[here] or self.grid[cmd.target] != EMPTY:
                return "production cell not free"
            return None
        return f"unknown command kind {kind}"

    # -- transition -------------------------------------------------------------

    def apply(self, a0: dict[int, Command] | None, a1: dict[int, Command] | None,
              trusted: bool = False) -> list[Rejection]:
        """Issue both players' orders at the current tick, then advance one tick.

        Illegal orders are rejected individually; the rest still apply.
        ``trusted`` skips validation for orders known to come from
        :meth:`commands_for` on this very state.
        """
        if self.terminal:
            raise GameOver("game is already over")
        rejections: list[Rejection] = []
        t = self.tick
        for player, act in ((0, a0), (1, a1)):
            if not act:
                continue
            if trusted:
                units = self.units
                for uid, cmd in act.items():
                    self._issue(units[uid], cmd, t)
                continue
            reserved = 0
            for uid in sorted(act):
                cmd = act[uid]
                u = self.units.get(uid)
                if u is None or u.owner != player:
                    reason = "not an own live unit"
                elif u.action is not None:
                    reason = "unit is busy"
                else:
                    reason = self.check_command(u, cmd)
                if reason is not None:
                    rejections.append(Rejection(player, uid, cmd, reason))
                    if self.log is not None:
                        self.log.append((t, "reject", (uid,), {"command": self.describe(cmd), "reason": reason}))
                    continue
                self._issue(u, cmd, t)
        self.tick = t + 1
        self._resolve(t + 1)
        self._check_terminal()
        return rejections

    def skip_to(self, target: int) -> None:
        """Advance with no new orders up to ``target`` (must be <= next_event_tick)."""
        target = min(target, self.config.max_ticks)
        if target - 1 > self.tick:
            self.tick = target - 1
        if self.tick < target and not self.terminal:
            self.apply(None, None)

    def _issue(self, u: Unit, cmd: Command, t: int) -> None:
        kind = cmd.kind
        cfg = self.config
        if kind == MOVE:
            dur = u.utype.move_time
        elif kind == ATTACK:
            dur = u.attack_time
        elif kind == HARVEST:
            dur = cfg.harvest_time
        elif kind == RETURN:
            dur = cfg.return_time
        elif kind == PRODUCE:
            ptype = cfg.unit_types[cmd.unit_type]
            dur = ptype.produce_time
            self.resources[u.owner] -= ptype.cost
            self.spent[u.owner] += ptype.cost
        else:
            dur = cfg.idle_time
        u.action = cmd
        u.done = t + dur
        if self.log is not None:
            self.log.append((t, "order", (u.id,), {"command": self.describe(cmd), "done": t + dur}))

    def _resolve(self, t: int) -> None:
        finishing = [u for u in self.units.values() if u.action is not None and u.done == t]
        if not finishing:
            return
        units = self.units
        log = self.log
        hits: list[tuple[Unit, Unit, int]] = []
        others: list[Unit] = []
        for u in finishing:
            cmd = u.action
            if cmd.kind == ATTACK:
                u.action = None
                v = units.get(cmd.target)
                if v is not None and self.board.dist[u.cell][v.cell] <= u.utype.attack_range:
                    hits.append((u, v, u.utype.damage))
                elif log is not None:
                    log.append((t, "miss", (u.id, cmd.target), {}))
            else:
                others.append(u)

        if hits:
            self._resolve_hits(hits, t)

        grid = self.grid
        for u in others:
            cmd = u.action
            u.action = None
            if u.id not in units:
                continue
            kind = cmd.kind
            if kind == MOVE:
                if grid[cmd.target] == EMPTY:
                    grid[u.cell] = EMPTY
                    grid[cmd.target] = u.id
                    u.cell = cmd.target
                    u.x, u.y = self.coords[cmd.target]
                    if log is not None:
                        log.append((t, "move", (u.id,), {"to": [u.x, u.y]}))
                elif log is not None:
                    log.append((t, "cancel", (u.id,), {"command": self.describe(cmd), "reason": "cell taken"}))
            elif kind == HARVEST:
                amount = self.nodes.get(cmd.target, 0)
                if amount > 0:
                    take = min(amount, self.config.harvest_amount)
                    amount -= take
                    u.carried += take
                    if amount:
                        self.nodes[cmd.target] = amount
                    else:
                        del self.nodes[cmd.target]
                        grid[cmd.target] = EMPTY
                    if log is not None:
                        log.append((t, "harvest", (u.id,), {"amount": take}))
            elif kind == RETURN:
                g = grid[cmd.target]
                if g >= 0 and units[g].owner == u.owner and units[g].utype.stores_resources:
                    self.resources[u.owner] += u.carried
                    if log is not None:
                        log.append((t, "return", (u.id, g), {"amount": u.carried}))
                    u.carried = 0
            elif kind == PRODUCE:
                ptype = self.config.unit_types[cmd.unit_type]
                if grid[cmd.target] == EMPTY:
                    x, y = self.coords[cmd.target]
                    nu = Unit(self.next_id, ptype, u.owner, x, y, cmd.target, t)
                    self.next_id += 1
                    units[nu.id] = nu
                    grid[cmd.target] = nu.id
                    if log is not None:
                        log.append((t, "produce", (u.id, nu.id), {"type": ptype.name, "at": [x, y]}))
                else:
                    self.resources[u.owner] += ptype.cost
                    self.spent[u.owner] -= ptype.cost
                    if log is not None:
                        log.append((t, "cancel", (u.id,), {"command": self.describe(cmd), "reason": "cell taken"}))

    def _resolve_hits(self, hits: list[tuple[Unit, Unit, int]], t: int) -> None:
        log = self.log
        killers: dict[int, Unit] = {}
        for a, v, dmg in hits:
            v.hp = max(0, v.hp - dmg)
            a.attacks += 1
            if v.hp == 0:
                killers.setdefault(v.id, a)
            if log is not None:
                log.append((t, "attack", (a.id, v.id), {"damage": dmg, "hp": v.hp}))
        dead = [v for v in dict.fromkeys(v for _, v, _ in hits) if v.hp == 0 and v.id in self.units]
        for v in dead:
            self._remove(v, t)
        for v in dead:
            ab = v.utype.ability
            if ab is not None and ab.cause == Cause.ON_DEATH:
                self._fire(v, Cause.ON_DEATH, killers[v.id], t)
        for a, v, _ in hits:
            ab = v.utype.ability
            if ab is not None and ab.cause == Cause.ON_DAMAGE_TAKEN and v.id in self.units:
                self._fire(v, Cause.ON_DAMAGE_TAKEN, a, t)
        for a, v, _ in hits:
            ab = a.utype.ability
            if ab is None or a.id not in self.units:
                continue
            if ab.cause == Cause.ON_DAMAGE_DEALT:
                self._fire(a, Cause.ON_DAMAGE_DEALT, v, t)
            elif ab.cause == Cause.ON_THIRD_ATTACK and a.attacks >= 3:
                a.attacks = 0
                self._fire(a, Cause.ON_THIRD_ATTACK, v, t)

    def _remove(self, v: Unit, t: int) -> None:
        v.died = t
        v.action = None
        del self.units[v.id]
        self.grid[v.cell] = EMPTY
        if v.carried:
            self.lost[v.owner] += v.carried
        if self.fallen is not None:
            self.fallen.append(v)
        if self.log is not None:
            self.log.append((t, "death", (v.id,), {"type": v.utype.name, "owner": v.owner}))

    def _ability_damage(self, src: Unit, target: Unit, amount: int, t: int) -> None:
        # Ability damage never triggers on-damage/on-deal hooks, only on-death.
        if target.id not in self.units or amount <= 0:
            return
        target.hp = max(0, target.hp - amount)
        if self.log is not None:
            self.log.append((t, "ability_damage", (src.id, target.id), {"damage": amount, "hp": target.hp}))
        if target.hp == 0:
            self._remove(target, t)
            ab = target.utype.ability
            if ab is not None and ab.cause == Cause.ON_DEATH:
                self._fire(target, Cause.ON_DEATH, src, t)

    def _fire(self, u: Unit, cause: Cause, other: Unit, t: int) -> None:
        """Apply ``u``'s ability effect. ``other`` is the killer/attacker (causes 1, 2) or target (3, 4)."""
        effect = u.utype.ability.effect
        log = self.log
        if log is not None:
            log.append((t, "ability", (u.id, other.id), {"cause": int(cause), "effect": int(effect)}))
        on_self = cause in (Cause.ON_DEATH, Cause.ON_DAMAGE_TAKEN)
        if effect == Effect.RETURN_RESOURCES:
            amount = u.utype.cost if on_self else other.utype.cost
            self.resources[u.owner] += amount
            self.granted[u.owner] += amount
            if log is not None:
                log.append((t, "grant", (u.id,), {"owner": u.owner, "amount": amount}))
        elif effect == Effect.COUNTER_OR_DOUBLE_ATTACK:
            self._ability_damage(u, other, u.utype.damage, t)
        elif effect == Effect.HEAL:
            if cause != Cause.ON_DEATH and u.id in self.units:
                u.hp = min(u.utype.max_hp, u.hp + HEAL_AMOUNT)
        elif effect == Effect.SPEED_CHANGE:
            if cause == Cause.ON_DEATH:
                if other.id in self.units:
                    other.penalty = True
            elif u.id in self.units:
                u.boost = True

    def _check_terminal(self) -> None:
        alive = [False, False]
        for u in self.units.values():
            alive[u.owner] = True
            if alive[0] and alive[1]:
                break
        if not alive[0] or not alive[1]:
            self.terminal = True
            self.winner = 0 if alive[0] else 1 if alive[1] else None
        elif self.tick >= self.config.max_ticks:
            self.terminal = True
            self.winner = None
        if self.terminal and self.log is not None:
            self.log.append((self.tick, "end", (), {"winner": self.winner}))

    # -- presentation -----------------------------------------------------------

    def describe(self, cmd: Command) -> dict:
        d: dict = {"kind": KIND_NAMES[cmd.kind]}
        if cmd.kind == ATTACK:
            d["target"] = cmd.target
        elif cmd.kind != IDLE:
            d["cell"] = list(self.coords[cmd.target])
        if cmd.unit_type is not None:
            d["type"] = cmd.unit_type
        return d
