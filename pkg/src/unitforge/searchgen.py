"""Greedy hill climbing over the unit genome."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Union

from .evaluator import EvalConfig, FitnessReport, derive_seed, evaluate_unit
from .unitspace import GeneratedUnit, SearchBounds, genome_key, neighbors, random_unit, to_document

log = logging.getLogger(__name__)

Evaluator = Callable[[GeneratedUnit], Union[float, FitnessReport]]


@dataclass
class Iteration:
    current: GeneratedUnit
    current_fitness: float
    neighbor_count: int
    evaluated: list[tuple[GeneratedUnit, float]]
    chosen: GeneratedUnit | None

    def to_dict(self) -> dict:
        return {
            "current": to_document(self.current),
            "currentFitness": self.current_fitness,
            "neighborCount": self.neighbor_count,
            "evaluated": [{"unit": to_document(u), "fitness": f} for u, f in self.evaluated],
            "chosen": None if self.chosen is None else to_document(self.chosen),
        }


@dataclass
class SearchTrace:
    iterations: list[Iteration] = field(default_factory=list)
    terminal_unit: GeneratedUnit | None = None
    evaluations: int = 0
    total_games: int = 0
    cap_hit: bool = False
    error: str | None = None

    @property
    def accepted_fitness(self) -> list[float]:
        return [it.current_fitness for it in self.iterations]

    def to_dict(self) -> dict:
        return {
            "iterations": [it.to_dict() for it in self.iterations],
            "terminalUnit": None if self.terminal_unit is None else to_document(self.terminal_unit),
            "evaluations": self.evaluations,
            "totalGamesSimulated": self.total_games,
            "capHit": self.cap_hit,
            "error": self.error,
        }

    def write(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


class CachedEvaluator:
    """Evaluates each distinct genome once per run."""

    def __init__(self, evaluate: Evaluator):
        self.evaluate = evaluate
        self.cache: dict[str, float] = {}
        self.calls = 0
        self.games = 0

    def __call__(self, unit: GeneratedUnit) -> float:
        key = genome_key(unit)
        if key not in self.cache:
            self.calls += 1
            result = self.evaluate(unit)
            if isinstance(result, FitnessReport):
                self.games += len(result.round_one.games) + len(result.round_two.games)
                result = result.total
            self.cache[key] = float(result)
        return self.cache[key]


def simulation_evaluator(cfg: EvalConfig) -> Evaluator:
    """Real fitness: each genome gets its own seed base derived from ``cfg.seed_base``."""
    def evaluate(unit: GeneratedUnit) -> FitnessReport:
        return evaluate_unit(unit, replace(cfg, seed_base=derive_seed(cfg.seed_base, genome_key(unit))))
    return evaluate


def hill_climb(
    evaluate: Evaluator | EvalConfig,
    bounds: SearchBounds = SearchBounds(),
    seed: int = 0,
    max_iterations: int | None = None,
    start: GeneratedUnit | None = None,
) -> tuple[GeneratedUnit, SearchTrace]:
    """Climb from a random unit to a local maximum of ``evaluate``.

    A neighbour replaces the current unit only if its fitness is strictly
    higher; among equals the first in canonical neighbour order wins. If
    the evaluator raises, the partial trace is returned with ``error`` set.
    Passing an :class:`EvalConfig` uses the simulation-based fitness.
    """
    if isinstance(evaluate, EvalConfig):
        evaluate = simulation_evaluator(evaluate)
    cached = CachedEvaluator(evaluate)
    trace = SearchTrace()
    current = start if start is not None else random_unit(bounds, seed)
    current_fit: float | None = None
    try:
        current_fit = cached(current)
        while True:
            if max_iterations is not None and len(trace.iterations) >= max_iterations:
                trace.cap_hit = True
                log.warning("hill climb stopped at iteration cap %d", max_iterations)
                break
            nbrs = neighbors(current)
            scored = [(n, cached(n)) for n in nbrs]
            best, best_fit = max(scored, key=lambda p: p[1])  # max keeps the first among ties
            chosen = best if best_fit > current_fit else None
            trace.iterations.append(Iteration(current, current_fit, len(nbrs), scored, chosen))
            log.info("iteration %d: %s fitness %.4f, best neighbour %.4f",
                     len(trace.iterations), genome_key(current), current_fit, best_fit)
            if chosen is None:
                break
            current, current_fit = chosen, best_fit
    except Exception as exc:  # evaluator failures abort the climb but keep the trace
        log.error("hill climb aborted: %s", exc)
        trace.error = f"{type(exc).__name__}: {exc}"
    trace.terminal_unit = replace(current, fitness=current_fit)
    trace.evaluations = cached.calls
    trace.total_games = cached.games
    return trace.terminal_unit, trace
