"""Bounded lasso enumeration and brute-force HyperLTL evaluation (ground truth)."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError
from .logic import HyperLtlFormula, LassoEvaluator, Trace, indexed_aps, trace_vars
from .model import KripkeStructure, Lasso, lasso_trace


@dataclass(frozen=True)
class LassoBudget:
    """Bounds on |stem| and |loop| for the enumeration."""

    stem_bound: int
    loop_bound: int

    def __post_init__(self):
        if self.stem_bound < 1 or self.loop_bound < 1:
            raise ValidationError("lasso budget bounds must be >= 1", construct=self)


def canonical_trace(trace: Trace) -> Trace:
    """Unique presentation of an ultimately periodic trace: minimal stem, primitive loop."""
    stem, loop = list(trace[0]), list(trace[1])
    for period in range(1, len(loop) + 1):
        if len(loop) % period == 0 and loop == loop[:period] * (len(loop) // period):
            loop = loop[:period]
            break
    while stem and stem[-1] == loop[-1]:
        stem.pop()
        loop = [loop[-1]] + loop[:-1]
    return tuple(stem), tuple(loop)


def _successors(ks: KripkeStructure, s: str) -> list[str]:
    seen: list[str] = []
    for d in ks.directions:
        t = ks.trans[(s, d)]
        if t not in seen:
            seen.append(t)
    return seen


def enumerate_lassos(ks: KripkeStructure, budget: LassoBudget) -> list[Lasso]:
    """All lassos within the budget, deduplicated up to equal induced traces."""
    stems: list[tuple[str, ...]] = []
    frontier: list[tuple[str, ...]] = [(ks.init,)]
    for _ in range(budget.stem_bound):
        stems.extend(frontier)
        nxt = []
        for stem in frontier:
            for t in _successors(ks, stem[-1]):
                nxt.append(stem + (t,))
        frontier = nxt

    has_edge = {(s, t) for (s, _d), t in ks.trans.items()}

    def loops_from(anchor: str) -> list[tuple[str, ...]]:
        found: list[tuple[str, ...]] = []

        def extend(prefix: tuple[str, ...]) -> None:
            if (prefix[-1], prefix[0]) in has_edge:
                found.append(prefix)
            if len(prefix) < budget.loop_bound:
                for t in _successors(ks, prefix[-1]):
                    extend(prefix + (t,))

        for start in _successors(ks, anchor):
            extend((start,))
        return found

    loop_cache: dict[str, list[tuple[str, ...]]] = {}
    result: list[Lasso] = []
    seen_traces: set[Trace] = set()
    for stem in stems:
        anchor = stem[-1]
        if anchor not in loop_cache:
            loop_cache[anchor] = loops_from(anchor)
        for loop in loop_cache[anchor]:
            lasso = Lasso(stem=stem, loop=loop)
            canon = canonical_trace(lasso_trace(ks, lasso))
            if canon not in seen_traces:
                seen_traces.add(canon)
                result.append(lasso)
    return result


def oracle_check(ks: KripkeStructure, f: HyperLtlFormula, budget: LassoBudget) -> bool:
    """Quantifier semantics of f over the bounded lasso-trace set (approximation of K |= f)."""
    traces = [lasso_trace(ks, l) for l in enumerate_lassos(ks, budget)]
    used = trace_vars(f.body)
    engine = LassoEvaluator()
    assignment: dict[str, Trace] = {}

    # the body only reads each variable through its indexed propositions, so a
    # quantifier need only range over distinct projections onto that set
    reads: dict[str, frozenset[str]] = {v: frozenset() for v in used}
    for ap, var in indexed_aps(f.body):
        if var in reads:
            reads[var] |= {ap}
    choices: dict[str, list[Trace]] = {}
    for var in used:
        seen: dict[Trace, None] = {}
        for stem, loop in traces:
            pt = canonical_trace(
                (
                    tuple(letter & reads[var] for letter in stem),
                    tuple(letter & reads[var] for letter in loop),
                )
            )
            seen.setdefault(pt, None)
        choices[var] = list(seen)

    # a trace that settled the previous scan at this depth tends to settle the
    # next one, so start each scan where the last one stopped
    hints: dict[int, int] = {}

    def go(i: int) -> bool:
        if i == len(f.prefix):
            return engine.evaluate(f.body, assignment)
        quant, var = f.prefix[i]
        if var not in used:
            # vacuous quantifier still ranges over the trace set
            if not traces:
                return quant == "forall"
            return go(i + 1)
        pool = choices[var]
        start = hints.get(i, 0)
        for k in range(len(pool)):
            idx = (start + k) % len(pool)
            assignment[var] = pool[idx]
            value = go(i + 1)
            if (quant == "exists") == value:
                del assignment[var]
                hints[i] = idx
                return value
        assignment.pop(var, None)
        return quant == "forall"

    return go(0)
