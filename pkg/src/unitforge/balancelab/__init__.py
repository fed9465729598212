"""Skill-tier balance study, its reports, and the study config."""

from .config import MODES, SKILLS, StudyConfig, load_study_config
from .report import CSV_COLUMNS, CSV_NAME, MATRIX_NAME, REPORT_NAME, ModeMatrix, StudyMatrix, emit_report, load_matrix, study_matrix
from .study import CellResult, MatchupRound, MatchupSpec, StudyReport, average_made, needs_redo, run_matchup, run_study

__all__ = [
    "MODES", "SKILLS", "StudyConfig", "load_study_config",
    "CSV_COLUMNS", "CSV_NAME", "MATRIX_NAME", "REPORT_NAME", "ModeMatrix", "StudyMatrix",
    "emit_report", "load_matrix", "study_matrix",
    "CellResult", "MatchupRound", "MatchupSpec", "StudyReport", "average_made", "needs_redo",
    "run_matchup", "run_study",
]
