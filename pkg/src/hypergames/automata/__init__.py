"""Automata pipeline: LTL bodies to Büchi to deterministic parity automata."""

from .build import intersect_dpa, ltl_to_dpa, union_dpa
from .dpa import (
    Dpa,
    bisim_quotient,
    collapse_trivial,
    complement_dpa,
    compress_colors,
    dpa_lasso_accepts,
    dpa_to_hoa,
    empty_states,
    hoa_to_dpa,
    reach_trim,
    universal_states,
)
from .ir import Ir, ir_is_cosafety, ir_is_safety, to_ir
from .nba import IndexedAp, Letter, Nba, all_letters, ir_to_nba, letter_id, ltl_to_nba
from .safra import STATE_CAP, determinize_nba_to_dpa

__all__ = [
    "Dpa",
    "IndexedAp",
    "Ir",
    "Letter",
    "Nba",
    "STATE_CAP",
    "all_letters",
    "bisim_quotient",
    "collapse_trivial",
    "complement_dpa",
    "compress_colors",
    "determinize_nba_to_dpa",
    "dpa_lasso_accepts",
    "dpa_to_hoa",
    "empty_states",
    "hoa_to_dpa",
    "intersect_dpa",
    "ir_is_cosafety",
    "ir_is_safety",
    "ir_to_nba",
    "letter_id",
    "ltl_to_dpa",
    "ltl_to_nba",
    "reach_trim",
    "to_ir",
    "union_dpa",
]
