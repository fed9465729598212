"""The generated-unit genome: sampling, neighbourhoods, codec and engine bridge."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any

from .engine import Ability, Cause, Effect, UnitTypeDef

STATS = ("cost", "hp", "damage", "range", "moveTime", "attackTime")
# document key -> attribute name
_ATTR = {
    "cost": "cost",
    "hp": "hp",
    "damage": "damage",
    "range": "attack_range",
    "moveTime": "move_time",
    "attackTime": "attack_time",
}
DEFAULT_TYPE_NAME = "NewUnit"


class UnitValidationError(ValueError):
    """A unit document failed validation. ``errors`` maps field -> message."""

    def __init__(self, errors: dict[str, str]):
        self.errors = errors
        super().__init__("; ".join(f"{k}: {v}" for k, v in errors.items()))


@dataclass(frozen=True)
class GeneratedUnit:
    cost: int
    hp: int
    damage: int
    attack_range: int
    move_time: int
    attack_time: int
    cause: Cause
    effect: Effect
    name: str | None = None
    fitness: float | None = None

    def __post_init__(self) -> None:
        bad = {k: "must be an integer >= 1" for k, a in _ATTR.items() if getattr(self, a) < 1}
        if bad:
            raise UnitValidationError(bad)
        object.__setattr__(self, "cause", Cause(self.cause))
        object.__setattr__(self, "effect", Effect(self.effect))

    @property
    def stats(self) -> tuple[int, ...]:
        return tuple(getattr(self, _ATTR[k]) for k in STATS)

    @property
    def genome(self) -> tuple[int, ...]:
        return self.stats + (int(self.cause), int(self.effect))

    def with_stat(self, key: str, value: int) -> GeneratedUnit:
        return replace(self, **{_ATTR[key]: value})

    def label(self) -> str:
        return self.name or genome_key(self)


@dataclass(frozen=True)
class SearchBounds:
    """Inclusive initialisation ranges; the search may drift above them."""

    cost: tuple[int, int] = (1, 3)
    hp: tuple[int, int] = (1, 4)
    damage: tuple[int, int] = (1, 4)
    range: tuple[int, int] = (1, 3)
    moveTime: tuple[int, int] = (5, 14)
    attackTime: tuple[int, int] = (3, 7)

    def __post_init__(self) -> None:
        for f in fields(self):
            lo, hi = getattr(self, f.name)
            if lo < 1 or lo > hi:
                raise ValueError(f"bad bounds for {f.name}: [{lo}, {hi}]")


def random_unit(bounds: SearchBounds = SearchBounds(), seed: int | random.Random = 0) -> GeneratedUnit:
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    values = {_ATTR[k]: rng.randint(*getattr(bounds, k)) for k in STATS}
    return GeneratedUnit(
        **values,
        cause=Cause(rng.randint(1, 4)),
        effect=Effect(rng.randint(1, 4)),
    )


def neighbors(unit: GeneratedUnit) -> list[GeneratedUnit]:
    """Single-gene edits in canonical order.

    Each stat +1 and -1 (never below 1), then every other cause, then every
    other effect. Name and fitness are dropped from the neighbours.
    """
    base = replace(unit, name=None, fitness=None)
    out: list[GeneratedUnit] = []
    for key in STATS:
        v = getattr(base, _ATTR[key])
        out.append(base.with_stat(key, v + 1))
        if v > 1:
            out.append(base.with_stat(key, v - 1))
    out.extend(replace(base, cause=c) for c in Cause if c != base.cause)
    out.extend(replace(base, effect=e) for e in Effect if e != base.effect)
    return out


def genome_key(unit: GeneratedUnit) -> str:
    """Canonical cache key, e.g. ``c3-h4-d2-r3-m13-a10-C1-E2``."""
    c, h, d, r, m, a, cause, effect = unit.genome
    return f"c{c}-h{h}-d{d}-r{r}-m{m}-a{a}-C{cause}-E{effect}"


def produce_time_for(cost: int, base: int = 60, per_cost: int = 20) -> int:
    return base + per_cost * cost


def to_type_def(
    unit: GeneratedUnit,
    name: str = DEFAULT_TYPE_NAME,
    produce_base: int = 60,
    produce_per_cost: int = 20,
) -> UnitTypeDef:
    """Engine unit type for a genome; built at the barracks."""
    return UnitTypeDef(
        name=name,
        cost=unit.cost,
        max_hp=unit.hp,
        damage=unit.damage,
        attack_range=unit.attack_range,
        move_time=unit.move_time,
        attack_time=unit.attack_time,
        produce_time=produce_time_for(unit.cost, produce_base, produce_per_cost),
        ability=Ability(unit.cause, unit.effect),
    )


# -- codec -----------------------------------------------------------------------

def to_document(unit: GeneratedUnit) -> dict[str, Any]:
    doc: dict[str, Any] = {}
    if unit.name is not None:
        doc["name"] = unit.name
    for key in STATS:
        doc[key] = getattr(unit, _ATTR[key])
    doc["cause"] = int(unit.cause)
    doc["effect"] = int(unit.effect)
    if unit.fitness is not None:
        doc["fitness"] = unit.fitness
    return doc


def dumps(unit: GeneratedUnit) -> str:
    return json.dumps(to_document(unit), indent=2) + "\n"


def _int_field(doc: dict, key: str, lo: int, hi: int | None, errors: dict[str, str]) -> int | None:
    if key not in doc:
        errors[key] = "missing"
        return None
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int):
        errors[key] = f"must be an integer, got {v!r}"
        return None
    if v < lo or (hi is not None and v > hi):
        errors[key] = f"must be >= {lo}" if hi is None else f"must be in {lo}..{hi}"
        return None
    return v


def from_document(doc: Any) -> GeneratedUnit:
    if not isinstance(doc, dict):
        raise UnitValidationError({"<document>": "expected a JSON object"})
    errors: dict[str, str] = {}
    values = {_ATTR[k]: _int_field(doc, k, 1, None, errors) for k in STATS}
    cause = _int_field(doc, "cause", 1, 4, errors)
    effect = _int_field(doc, "effect", 1, 4, errors)
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        errors["name"] = "must be a string"
    fitness = doc.get("fitness")
    if fitness is not None and (isinstance(fitness, bool) or not isinstance(fitness, (int, float))):
        errors["fitness"] = "must be a number"
    unknown = set(doc) - set(STATS) - {"cause", "effect", "name", "fitness"}
    for key in sorted(unknown):
        errors[key] = "unknown field"
    if errors:
        raise UnitValidationError(errors)
    return GeneratedUnit(
        **values,
        cause=Cause(cause),
        effect=Effect(effect),
        name=name,
        fitness=float(fitness) if fitness is not None else None,
    )


def loads(text: str) -> GeneratedUnit:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UnitValidationError({"<document>": f"invalid JSON: {exc}"}) from exc
    return from_document(doc)


def load_unit(path: str | Path) -> GeneratedUnit:
    return loads(Path(path).read_text())


def save_unit(unit: GeneratedUnit, path: str | Path) -> None:
    Path(path).write_text(dumps(unit))


def load_units_dir(directory: str | Path) -> list[GeneratedUnit]:
    """All unit files in a directory, sorted by filename.

    Fitness reports and search traces written next to units are skipped.
    """
    paths = sorted(Path(directory).glob("*.json"))
    return [load_unit(p) for p in paths if not p.name.endswith((".fitness.json", ".trace.json"))]
