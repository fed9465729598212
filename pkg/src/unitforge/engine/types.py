"""Static game definitions: unit types, abilities, commands and game configs."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import IntEnum
from importlib import resources
from pathlib import Path
from typing import NamedTuple


class ConfigError(ValueError):
    """Raised for malformed game configurations or unit tables."""


class Cause(IntEnum):
    ON_DEATH = 1
    ON_DAMAGE_TAKEN = 2
    ON_DAMAGE_DEALT = 3
    ON_THIRD_ATTACK = 4


class Effect(IntEnum):
    RETURN_RESOURCES = 1
    COUNTER_OR_DOUBLE_ATTACK = 2
    HEAL = 3
    SPEED_CHANGE = 4


@dataclass(frozen=True)
class Ability:
    cause: Cause
    effect: Effect


@dataclass(frozen=True)
class UnitTypeDef:
    name: str
    cost: int
    max_hp: int
    damage: int = 0
    attack_range: int = 1
    move_time: int = 1
    attack_time: int = 1
    produce_time: int = 1
    is_structure: bool = False
    can_harvest: bool = False
    stores_resources: bool = False
    produces: tuple[str, ...] = ()
    ability: Ability | None = None

    def __post_init__(self) -> None:
        for fname in ("cost", "max_hp", "attack_range", "move_time", "attack_time", "produce_time"):
            if getattr(self, fname) < 1:
                raise ConfigError(f"unit type {self.name!r}: {fname} must be >= 1")
        if self.damage < 0:
            raise ConfigError(f"unit type {self.name!r}: damage must be >= 0")

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "cost": self.cost,
            "maxHp": self.max_hp,
            "damage": self.damage,
            "attackRange": self.attack_range,
            "moveTime": self.move_time,
            "attackTime": self.attack_time,
            "produceTime": self.produce_time,
            "isStructure": self.is_structure,
            "canHarvest": self.can_harvest,
            "storesResources": self.stores_resources,
            "produces": list(self.produces),
        }
        if self.ability is not None:
            d["ability"] = {"cause": int(self.ability.cause), "effect": int(self.ability.effect)}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> UnitTypeDef:
        try:
            ability = d.get("ability")
            return cls(
                name=d["name"],
                cost=int(d["cost"]),
                max_hp=int(d["maxHp"]),
                damage=int(d.get("damage", 0)),
                attack_range=int(d.get("attackRange", 1)),
                move_time=int(d.get("moveTime", 1)),
                attack_time=int(d.get("attackTime", 1)),
                produce_time=int(d.get("produceTime", 1)),
                is_structure=bool(d.get("isStructure", False)),
                can_harvest=bool(d.get("canHarvest", False)),
                stores_resources=bool(d.get("storesResources", False)),
                produces=tuple(d.get("produces", ())),
                ability=Ability(Cause(ability["cause"]), Effect(ability["effect"])) if ability else None,
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad unit type entry {d!r}: {exc}") from exc


# Command kinds. Small ints keep tuple comparisons and hashing cheap.
IDLE, MOVE, ATTACK, HARVEST, RETURN, PRODUCE = range(6)
KIND_NAMES = ("idle", "move", "attack", "harvest", "return", "produce")


class Command(NamedTuple):
    """One unit order.

    ``target`` is a cell index for move/harvest/return/produce and a unit id
    for attack; ``unit_type`` is only set for produce.
    """

    kind: int
    target: int = -1
    unit_type: str | None = None


IDLE_CMD = Command(IDLE)


@dataclass(frozen=True)
class Placement:
    unit_type: str
    owner: int
    x: int
    y: int


@dataclass(frozen=True)
class GameConfig:
    unit_types: dict[str, UnitTypeDef]
    placements: tuple[Placement, ...]
    resource_nodes: tuple[tuple[int, int, int], ...]  # (x, y, amount)
    width: int = 8
    height: int = 8
    max_ticks: int = 3000
    start_resources: int = 5
    harvest_time: int = 20
    return_time: int = 10
    harvest_amount: int = 1
    idle_time: int = 10
    army_producer: str = "Barracks"

    def validate(self) -> None:
        seen: set[tuple[int, int]] = set()
        cells = [(p.x, p.y, f"{p.unit_type}@player{p.owner}") for p in self.placements]
        cells += [(x, y, "resource node") for x, y, _ in self.resource_nodes]
        for x, y, what in cells:
            if not (0 <= x < self.width and 0 <= y < self.height):
                raise ConfigError(f"{what} at ({x},{y}) is out of bounds")
            if (x, y) in seen:
                raise ConfigError(f"{what} at ({x},{y}) overlaps another placement")
            seen.add((x, y))
        for p in self.placements:
            if p.unit_type not in self.unit_types:
                raise ConfigError(f"placement references unknown unit type {p.unit_type!r}")
            if p.owner not in (0, 1):
                raise ConfigError(f"placement owner must be 0 or 1, got {p.owner}")
        for t in self.unit_types.values():
            for name in t.produces:
                if name not in self.unit_types:
                    raise ConfigError(f"{t.name} produces unknown type {name!r}")
        if self.max_ticks < 1 or self.start_resources < 0:
            raise ConfigError("max_ticks must be >= 1 and start_resources >= 0")
        for fname in ("harvest_time", "return_time", "harvest_amount", "idle_time"):
            if getattr(self, fname) < 1:
                raise ConfigError(f"{fname} must be >= 1")

    def with_unit_type(self, utype: UnitTypeDef) -> GameConfig:
        """Add (or replace) a type and make it buildable at the army producer."""
        types = dict(self.unit_types)
        types[utype.name] = utype
        producer = types.get(self.army_producer)
        if producer is None:
            raise ConfigError(f"no army producer {self.army_producer!r} in unit table")
        if utype.name not in producer.produces:
            types[self.army_producer] = replace(producer, produces=producer.produces + (utype.name,))
        return replace(self, unit_types=types)

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "maxTicks": self.max_ticks,
            "startResources": self.start_resources,
            "harvestTime": self.harvest_time,
            "returnTime": self.return_time,
            "harvestAmount": self.harvest_amount,
            "idleTime": self.idle_time,
            "armyProducer": self.army_producer,
            "unitTypes": [t.to_dict() for t in self.unit_types.values()],
            "placements": [
                {"type": p.unit_type, "owner": p.owner, "x": p.x, "y": p.y} for p in self.placements
            ],
            "resourceNodes": [{"x": x, "y": y, "amount": a} for x, y, a in self.resource_nodes],
        }

    @classmethod
    def from_dict(cls, d: dict) -> GameConfig:
        try:
            types = [UnitTypeDef.from_dict(t) for t in d["unitTypes"]]
            cfg = cls(
                unit_types={t.name: t for t in types},
                placements=tuple(
                    Placement(p["type"], int(p["owner"]), int(p["x"]), int(p["y"])) for p in d["placements"]
                ),
                resource_nodes=tuple(
                    (int(r["x"]), int(r["y"]), int(r["amount"])) for r in d.get("resourceNodes", ())
                ),
                width=int(d.get("width", 8)),
                height=int(d.get("height", 8)),
                max_ticks=int(d.get("maxTicks", 3000)),
                start_resources=int(d.get("startResources", 5)),
                harvest_time=int(d.get("harvestTime", 20)),
                return_time=int(d.get("returnTime", 10)),
                harvest_amount=int(d.get("harvestAmount", 1)),
                idle_time=int(d.get("idleTime", 10)),
                army_producer=d.get("armyProducer", "Barracks"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"malformed game config: {exc}") from exc
        cfg.validate()
        return cfg


def load_config(path: str | Path | None = None, **overrides) -> GameConfig:
    """Load a game config JSON file; ``None`` loads the bundled default."""
    if path is None:
        text = resources.files("unitforge.data").joinpath("default_config.json").read_text()
    else:
        text = Path(path).read_text()
    cfg = GameConfig.from_dict(json.loads(text))
    if overrides:
        cfg = replace(cfg, **overrides)
        cfg.validate()
    return cfg


def default_config(**overrides) -> GameConfig:
    return load_config(None, **overrides)
