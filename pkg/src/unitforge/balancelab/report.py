"""Study outputs: long-form CSV and per-mode skill matrices as JSON."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

from .config import MODES
from .study import StudyReport

CSV_NAME = "cells.csv"
MATRIX_NAME = "matrix.json"
REPORT_NAME = "report.json"

CSV_COLUMNS = (
    "p1", "p2", "mode", "unit", "games", "p1_wins", "p2_wins", "draws",
    "p1_win_rate", "p1_loss_rate", "draw_rate", "p1_made", "p2_made", "made_games",
    "p1_wins_when_built", "p2_wins_when_built", "avg_alive_ticks", "redone", "low_production",
)


@dataclass
class ModeMatrix:
    mean: list[list[float]]
    std: list[list[float]]
    avg_made: list[list[float]]
    redone: list[list[bool]]
    low_production: list[list[bool]]


@dataclass
class StudyMatrix:
    """Skill x skill summary; rows are P1's skill, columns P2's."""

    skills: list[str]
    games_per_unit: int
    units: list[str]
    modes: dict[str, ModeMatrix]

    def to_dict(self) -> dict:
        return {
            "skills": self.skills,
            "rows": "p1",
            "columns": "p2",
            "value": "p1 win rate, mean and population std over units",
            "gamesPerUnit": self.games_per_unit,
            "units": self.units,
            "modes": {
                mode: {
                    "mean": m.mean,
                    "std": m.std,
                    "avgMade": m.avg_made,
                    "redone": m.redone,
                    "lowProduction": m.low_production,
                }
                for mode, m in self.modes.items()
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> StudyMatrix:
        n = len(d["skills"])
        modes = {}
        for mode, m in d["modes"].items():
            mm = ModeMatrix(m["mean"], m["std"], m["avgMade"], m["redone"], m["lowProduction"])
            for grid in (mm.mean, mm.std, mm.avg_made, mm.redone, mm.low_production):
                if len(grid) != n or any(len(row) != n for row in grid):
                    raise ValueError(f"matrix for mode {mode!r} is not {n}x{n}")
            modes[mode] = mm
        return cls(list(d["skills"]), int(d["gamesPerUnit"]), list(d["units"]), modes)


def study_matrix(report: StudyReport) -> StudyMatrix:
    skills = report.skills
    n = len(skills)
    modes = {}
    for mode in MODES:
        mm = ModeMatrix(
            [[0.0] * n for _ in range(n)],
            [[0.0] * n for _ in range(n)],
            [[0.0] * n for _ in range(n)],
            [[False] * n for _ in range(n)],
            [[False] * n for _ in range(n)],
        )
        for i, p1 in enumerate(skills):
            for j, p2 in enumerate(skills):
                r = report.round_for(p1, p2, mode)
                mm.mean[i][j] = r.mean_win_rate
                mm.std[i][j] = r.std_win_rate
                mm.avg_made[i][j] = r.avg_made
                mm.redone[i][j] = r.redone
                mm.low_production[i][j] = r.low_production
        modes[mode] = mm
    return StudyMatrix(list(skills), report.games_per_unit, list(report.units), modes)


def emit_report(report: StudyReport, out_dir: str | Path, formats: tuple[str, ...] = ("csv", "json")) -> list[Path]:
    """Write the long-form CSV and/or the matrix JSON; returns the written paths."""
    if not report.units or not report.rounds:
        raise ValueError("refusing to write an empty report (no units)")
    unknown = set(formats) - {"csv", "json"}
    if unknown:
        raise ValueError(f"unknown report formats: {sorted(unknown)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        path = out / CSV_NAME
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for r in report.rounds:
                for c in r.cells:
                    w.writerow([
                        c.p1, c.p2, c.mode, c.unit, c.games, c.p1_wins, c.p2_wins, c.draws,
                        f"{c.p1_win_rate:.6f}", f"{c.p1_loss_rate:.6f}", f"{c.draw_rate:.6f}",
                        c.p1_made, c.p2_made, c.made_games, c.p1_wins_when_built, c.p2_wins_when_built,
                        f"{c.avg_alive_ticks:.3f}", int(r.redone), int(r.low_production),
                    ])
        written.append(path)
    if "json" in formats:
        path = out / MATRIX_NAME
        path.write_text(json.dumps(study_matrix(report).to_dict(), indent=2) + "\n")
        written.append(path)
        path = out / REPORT_NAME
        path.write_text(json.dumps({"redoLog": report.redo_log, "units": report.units,
                                    "skills": report.skills, "gamesPerUnit": report.games_per_unit},
                                   indent=2) + "\n")
        written.append(path)
    return written


def load_matrix(path: str | Path) -> StudyMatrix:
    return StudyMatrix.from_dict(json.loads(Path(path).read_text()))
