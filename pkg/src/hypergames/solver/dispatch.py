"""Route selection by quantifier prefix shape, with certificate-ready witnesses."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..arena import MpgGame, TwoPlayerGame, build_mpg, build_two_player_game
from ..automata import Dpa, ltl_to_dpa
from ..certificate import StrategyProfile, check_profile
from ..errors import HypergamesError, ValidationError
from ..logic import HyperLtlFormula, indexed_aps, negate_hyperltl
from ..model import KripkeStructure
from .bounded import bounded_profile_search
from .exists_forall import solve_exists_forall
from .verdict import DISPROVEN, GAME, PROVEN, SEMANTIC, UNKNOWN, Verdict
from .zielonka import ParityResult, solve_two_player

MODES = ("auto", "zielonka", "exists-forall", "bounded")


@dataclass
class SolveResult:
    """Verdict plus the game and profile when a game-based route produced them."""

    verdict: Verdict
    game: MpgGame | None = None
    profile: StrategyProfile | None = None


def _quants(formula: HyperLtlFormula) -> list[str]:
    return [q for q, _ in formula.prefix]


def _is_exists_forall(quants: list[str]) -> bool:
    seen_forall = False
    for q in quants:
        if q == "forall":
            seen_forall = True
        elif seen_forall:
            return False
    return True


def _is_forall_exists(quants: list[str]) -> bool:
    seen_exists = False
    for q in quants:
        if q == "exists":
            seen_exists = True
        elif seen_exists:
            return False
    return True


def _body_dpa(formula: HyperLtlFormula) -> Dpa:
    return ltl_to_dpa(formula.body, alphabet_aps=sorted(indexed_aps(formula.body)))


def solve(
    ks: KripkeStructure,
    formula: HyperLtlFormula,
    mode: str = "auto",
    max_memory: int = 2,
    budget: int = 10_000_000,
    obs_mode: str = "hierarchical",
) -> SolveResult:
    """Decide or bound the property along the route the prefix shape admits."""
    if mode not in MODES:
        raise ValidationError(f"unknown mode {mode!r}")
    quants = _quants(formula)
    if not quants:
        raise ValidationError("quantifier prefix must not be empty")

    if mode == "zielonka":
        if quants != ["forall", "exists"]:
            raise ValidationError(
                "zielonka mode handles exactly one universal then one existential quantifier"
            )
        return _forall_exists_route(ks, formula, obs_mode, negation_fallback=False)
    if mode == "exists-forall":
        if _is_exists_forall(quants):
            return SolveResult(verdict=solve_exists_forall(ks, formula))
        if _is_forall_exists(quants):
            return _negation_route(ks, formula)
        raise ValidationError("exists-forall mode needs a one-alternation prefix")
    if mode == "bounded":
        return _bounded_route(ks, formula, max_memory, budget, obs_mode)

    if quants == ["forall", "exists"]:
        return _forall_exists_route(ks, formula, obs_mode, negation_fallback=True)
    if _is_exists_forall(quants):
        return SolveResult(verdict=solve_exists_forall(ks, formula))
    if _is_forall_exists(quants):
        return _negation_route(ks, formula)
    return _bounded_route(ks, formula, max_memory, budget, obs_mode)


def _negation_route(ks: KripkeStructure, formula: HyperLtlFormula) -> SolveResult:
    """Decide a forall*-exists* property exactly through its negation."""
    neg = negate_hyperltl(formula)
    inner = solve_exists_forall(ks, neg)
    if inner.status == PROVEN:
        verdict = Verdict(
            status=DISPROVEN,
            method="negation+exists-forall",
            guarantee=SEMANTIC,
            detail="negated property has a blind existential witness",
            witness=inner.witness,
            bounds=inner.bounds,
        )
    else:
        verdict = Verdict(
            status=PROVEN,
            method="negation+exists-forall",
            guarantee=SEMANTIC,
            detail="negated property has no blind existential witness",
            bounds=inner.bounds,
        )
    return SolveResult(verdict=verdict)


def _forall_exists_route(
    ks: KripkeStructure,
    formula: HyperLtlFormula,
    obs_mode: str,
    negation_fallback: bool,
) -> SolveResult:
    dpa = _body_dpa(formula)
    var1, var2 = (var for _, var in formula.prefix)
    tp = build_two_player_game(ks, dpa, var1, var2)
    res = solve_two_player(tp)
    if res.win_even[tp.v_init]:
        mpg = build_mpg(ks, formula, dpa, obs_mode)
        profile = _verifier_profile(ks, tp, res, mpg, dpa)
        report = check_profile(mpg, profile)
        if not report.ok:
            raise HypergamesError(
                "internal: converted verifier profile failed validation: "
                + "; ".join(report.errors + report.diagnostics)
            )
        verdict = Verdict(
            status=PROVEN,
            method="forall-exists-game",
            guarantee=GAME,
            detail="verifier wins the stepwise response game",
            witness=profile,
        )
        return SolveResult(verdict=verdict, game=mpg, profile=profile)
    if not negation_fallback:
        verdict = Verdict(
            status=UNKNOWN,
            method="forall-exists-game",
            guarantee=GAME,
            detail="refuter wins the stepwise response game; property may still hold",
        )
        return SolveResult(verdict=verdict)
    return _negation_route(ks, formula)


def _bounded_route(
    ks: KripkeStructure,
    formula: HyperLtlFormula,
    max_memory: int,
    budget: int,
    obs_mode: str,
) -> SolveResult:
    dpa = _body_dpa(formula)
    mpg = build_mpg(ks, formula, dpa, obs_mode)
    profile, stats = bounded_profile_search(mpg, max_memory=max_memory, budget=budget, ks=ks)
    bounds = {
        "max_memory": max_memory,
        "budget": budget,
        "evaluations": stats.evaluations,
        "assignments": stats.assignments,
    }
    if profile is not None:
        report = check_profile(mpg, profile)
        if not report.ok:
            raise HypergamesError(
                "internal: searched profile failed validation: "
                + "; ".join(report.errors + report.diagnostics)
            )
        verdict = Verdict(
            status=PROVEN,
            method="bounded-search",
            guarantee=GAME,
            detail=stats.reason,
            witness=profile,
            bounds=bounds,
        )
        return SolveResult(verdict=verdict, game=mpg, profile=profile)
    verdict = Verdict(
        status=UNKNOWN,
        method="bounded-search",
        guarantee=GAME,
        detail=stats.reason,
        bounds=bounds,
    )
    return SolveResult(verdict=verdict, game=mpg)


def _verifier_profile(
    ks: KripkeStructure,
    tp: TwoPlayerGame,
    res: ParityResult,
    mpg: MpgGame,
    dpa: Dpa,
) -> StrategyProfile:
    """Memory (automaton state, previous first-copy state) realizes the positional
    two-player strategy inside the hierarchical game."""
    vid = {vt: i for i, vt in enumerate(tp.vertices)}
    var1, _ = mpg.trace_vars

    def joint_letter(s1: str, s2: str) -> int:
        mask = 0
        for bit, (ap, var) in enumerate(dpa.aps):
            state = s1 if var == var1 else s2
            if ap in ks.labels[state]:
                mask |= 1 << bit
        return mask

    mem_name: dict[tuple[int, str], str] = {}

    def name_of(q: int, s1: str) -> str:
        key = (q, s1)
        if key not in mem_name:
            mem_name[key] = f"q{q}_{s1}"
        return mem_name[key]

    initial = (dpa.initial, ks.init)
    name_of(*initial)
    table: dict[tuple[str, tuple], tuple[str, str]] = {}

    # walk the game under the induced profile, opponents unconstrained
    start = (mpg.v_init, initial)
    seen = {start}
    stack = [start]
    while stack:
        v, mem = stack.pop()
        mover = int(mpg.turn[v]) + 1
        if mover == 2:
            q_mem, s1_prev = mem
            s1_cur = mpg.state_names[mpg.state_idx[v, 0]]
            s2_cur = mpg.state_names[mpg.state_idx[v, 1]]
            q_cur = dpa.delta[q_mem][joint_letter(s1_prev, s2_cur)]
            if int(mpg.q_idx[v]) != q_cur:
                raise HypergamesError(
                    "internal: memory reconstruction of the automaton state diverged"
                )
            tv = vid[(s1_cur, s2_cur, q_cur, 2)]
            d = int(res.strategy[tv])
            if d < 0:
                raise HypergamesError(
                    "internal: play under the converted profile left the winning region"
                )
            new_mem = (q_cur, s1_cur)
            name_of(*new_mem)
            obs = (2, (s1_cur, s2_cur))
            entry = (tp.directions[d], name_of(*new_mem))
            old = table.get((name_of(q_mem, s1_prev), obs))
            if old is not None and old != entry:
                raise HypergamesError("internal: inconsistent profile entry")
            table[(name_of(q_mem, s1_prev), obs)] = entry
            succ_v = int(mpg.succ[v, d])
            nxt = (succ_v, new_mem)
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
        else:
            for j in range(len(mpg.directions)):
                nxt = (int(mpg.succ[v, j]), mem)
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)

    # memory list with the initial state first, then discovery order
    ordered = [name_of(*initial)] + [
        n for k, n in mem_name.items() if n != name_of(*initial)
    ]
    memories = {2: tuple(dict.fromkeys(ordered))}
    return StrategyProfile(coalition=(2,), memories=memories, tables={2: table})
