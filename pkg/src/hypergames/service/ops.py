"""Check, oracle, and certify operations shared by the CLI and the HTTP app."""

from __future__ import annotations

from ..arena import build_mpg, game_hash
from ..automata import ltl_to_dpa
from ..certificate import Certificate, check_profile, parse_certificate, render_certificate
from ..errors import ValidationError
from ..logic import indexed_aps, parse_hyperltl, render_hyperltl
from ..model import Lasso, parse_ks, render_ks
from ..oracle import LassoBudget, oracle_check
from ..prophecy import apply_prophecy, parse_prophecy_family
from ..solver import solve
from ..solver.verdict import GAME, PROVEN


def _lasso_dict(lasso: Lasso) -> dict:
    return {"stem": list(lasso.stem), "loop": list(lasso.loop)}


def _witness_dict(witness) -> dict | None:
    if isinstance(witness, dict):
        return {var: _lasso_dict(l) for var, l in sorted(witness.items())}
    return None


def run_check(
    ks_text: str,
    formula_text: str,
    prophecy_text: str = "",
    mode: str = "auto",
    max_memory: int = 2,
    budget: int = 10_000_000,
    obs_mode: str = "hierarchical",
) -> dict:
    """Solve the property and, for game-level proofs, emit a checkable certificate."""
    ks = parse_ks(ks_text)
    f = parse_hyperltl(formula_text)
    if prophecy_text.strip():
        fam = parse_prophecy_family(prophecy_text, f)
        ks, f = apply_prophecy(ks, f, fam)
    result = solve(ks, f, mode=mode, max_memory=max_memory, budget=budget, obs_mode=obs_mode)
    v = result.verdict
    certificate = None
    if v.status == PROVEN and v.guarantee == GAME and result.profile is not None:
        cert = Certificate(
            profile=result.profile,
            game_hash=game_hash(result.game),
            obs_mode=result.game.obs_mode,
            formula_text=render_hyperltl(f),
            ks_text=render_ks(ks),
            prophecy_text=prophecy_text,
        )
        certificate = render_certificate(cert)
    return {
        "status": v.status,
        "method": v.method,
        "guarantee": v.guarantee,
        "detail": v.detail,
        "bounds": dict(v.bounds),
        "witness": _witness_dict(v.witness),
        "certificate": certificate,
    }


def run_oracle(ks_text: str, formula_text: str, stem: int, loop: int) -> dict:
    """Brute-force semantics over all lassos within the stated bounds."""
    ks = parse_ks(ks_text)
    f = parse_hyperltl(formula_text)
    budget = LassoBudget(stem_bound=stem, loop_bound=loop)
    holds = oracle_check(ks, f, budget)
    return {"holds": holds, "stem": stem, "loop": loop}


def run_certify(
    certificate_text: str,
    ks_text: str | None = None,
    formula_text: str | None = None,
    prophecy_text: str | None = None,
) -> dict:
    """Rebuild the game pinned by the certificate and check the profile against it.

    Without explicit texts the certificate's embedded system and formula are used
    as-is (any prophecy extension is already baked into them). With explicit texts
    the prophecy family (given, or else the embedded manifest) is applied first.
    A hash mismatch means the inputs do not describe the solved game, so the
    request is malformed rather than merely failing."""
    cert = parse_certificate(certificate_text)
    if ks_text is None and formula_text is None:
        ks = parse_ks(cert.ks_text)
        f = parse_hyperltl(cert.formula_text)
    else:
        if ks_text is None or formula_text is None:
            raise ValidationError("provide both the system and the formula, or neither")
        ks = parse_ks(ks_text)
        f = parse_hyperltl(formula_text)
        proph = cert.prophecy_text if prophecy_text is None else prophecy_text
        if proph.strip():
            fam = parse_prophecy_family(proph, f)
            ks, f = apply_prophecy(ks, f, fam)
    dpa = ltl_to_dpa(f.body, sorted(indexed_aps(f.body)))
    game = build_mpg(ks, f, dpa, obs_mode=cert.obs_mode)
    actual = game_hash(game)
    if actual != cert.game_hash:
        raise ValidationError(
            f"game hash mismatch: certificate says {cert.game_hash}, rebuilt game is {actual}"
        )
    report = check_profile(game, cert.profile)
    return {
        "ok": report.ok,
        "errors": list(report.errors),
        "diagnostics": list(report.diagnostics),
        "nodes": report.nodes,
        "edges": report.edges,
        "game_hash": actual,
    }
