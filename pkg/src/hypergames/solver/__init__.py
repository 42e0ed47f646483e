"""Solvers: perfect-information parity, exists-forall prefixes, bounded profile search."""

from .bounded import SearchStats, bounded_profile_search
from .dispatch import MODES, SolveResult, solve
from .exists_forall import solve_exists_forall
from .verdict import DISPROVEN, GAME, PROVEN, SEMANTIC, UNKNOWN, Verdict
from .zielonka import ParityResult, solve_mpg_full_info, solve_parity, solve_two_player

__all__ = [
    "DISPROVEN",
    "GAME",
    "MODES",
    "PROVEN",
    "ParityResult",
    "SEMANTIC",
    "SearchStats",
    "SolveResult",
    "UNKNOWN",
    "Verdict",
    "bounded_profile_search",
    "solve",
    "solve_exists_forall",
    "solve_mpg_full_info",
    "solve_parity",
    "solve_two_player",
]
