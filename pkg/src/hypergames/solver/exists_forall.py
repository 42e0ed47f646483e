"""Exact decision procedure for exists*-forall* prefixes via automata emptiness.

The existential traces must be chosen blindly, so the property holds exactly
when some joint direction word for the existential copies is accepted by a
universal parity automaton that branches over every universal direction choice.
Emptiness of that language is decided by dualizing to a nondeterministic parity
automaton for the complement, translating to a Büchi automaton, determinizing,
complementing, and searching the result for an accepting lasso that uses only
letters encoding real directions."""

from __future__ import annotations

import itertools

from ..automata import (
    STATE_CAP,
    Dpa,
    Nba,
    complement_dpa,
    determinize_nba_to_dpa,
    dpa_lasso_accepts,
    ltl_to_dpa,
)
from ..automata.nba import Letter, reduce_nba, trim_nba
from ..errors import ValidationError
from ..logic import HyperLtlFormula, indexed_aps
from ..model import KripkeStructure, Lasso
from .verdict import DISPROVEN, PROVEN, SEMANTIC, Verdict


def split_exists_forall(formula: HyperLtlFormula) -> tuple[list[str], list[str]]:
    """Trace variables of an exists*-forall* prefix, or raise."""
    exist_vars: list[str] = []
    univ_vars: list[str] = []
    for quant, var in formula.prefix:
        if quant == "exists":
            if univ_vars:
                raise ValidationError(
                    "prefix is not exists*-forall*", construct=formula.prefix
                )
            exist_vars.append(var)
        else:
            univ_vars.append(var)
    return exist_vars, univ_vars


def _direction_word_aps(exist_vars: list[str], nbits: int) -> tuple[tuple[str, str], ...]:
    """Synthetic APs carrying the existential copies' direction choice bitwise."""
    return tuple((f"d{j}", var) for var in exist_vars for j in range(nbits))


def _decode_mask(mask: int, k: int, nbits: int, n_dirs: int) -> list[int] | None:
    """Direction index per existential copy, or None for padding patterns."""
    dirs = []
    for i in range(k):
        v = (mask >> (i * nbits)) & ((1 << nbits) - 1)
        if v >= n_dirs:
            return None
        dirs.append(v)
    return dirs


def _dual_npa(
    ks: KripkeStructure,
    exist_vars: list[str],
    univ_vars: list[str],
    dpa: Dpa,
) -> tuple[dict[tuple[int, int], tuple[int, ...]], list[int], list[list[int]]]:
    """Nondeterministic parity automaton accepting the direction words under which
    SOME universal choice falsifies the body (colors already shifted by one)."""
    states = ks.all_states()
    idx = {s: i for i, s in enumerate(states)}
    dirs = list(ks.directions)
    n_dirs = len(dirs)
    nbits = (n_dirs - 1).bit_length()
    k, m = len(exist_vars), len(univ_vars)
    kap = [[idx[ks.trans[(s, d)]] for d in dirs] for s in states]

    # which copy feeds each automaton AP: (True, i) existential, (False, j) universal
    feeds: list[tuple[bool, int, str]] = []
    for ap, var in dpa.aps:
        if var in exist_vars:
            feeds.append((True, exist_vars.index(var), ap))
        else:
            feeds.append((False, univ_vars.index(var), ap))

    def joint_mask(evec: tuple[int, ...], uvec: tuple[int, ...]) -> int:
        mask = 0
        for bit, (is_e, pos, ap) in enumerate(feeds):
            state = states[evec[pos] if is_e else uvec[pos]]
            if ap in ks.labels[state]:
                mask |= 1 << bit
        return mask

    univ_choices = [list(c) for c in itertools.product(range(n_dirs), repeat=m)]

    valid_masks = [
        mask
        for mask in range(1 << (k * nbits))
        if _decode_mask(mask, k, nbits, n_dirs) is not None
    ]

    init = (tuple([0] * k), tuple([0] * m), dpa.initial)
    intern: dict[tuple, int] = {init: 0}
    order = [init]
    trans: dict[tuple[int, int], tuple[int, ...]] = {}
    colors: list[int] = [dpa.colors[dpa.initial] + 1]
    frontier = [init]
    while frontier:
        nxt = []
        for key in frontier:
            evec, uvec, q = key
            sid = intern[key]
            letter = joint_mask(evec, uvec)
            q2 = dpa.delta[q][letter]
            for mask in valid_masks:
                ds = _decode_mask(mask, k, nbits, n_dirs)
                evec2 = tuple(kap[evec[i]][ds[i]] for i in range(k))
                targets = []
                for choice in univ_choices:
                    uvec2 = tuple(kap[uvec[j]][choice[j]] for j in range(m))
                    tkey = (evec2, uvec2, q2)
                    tid = intern.get(tkey)
                    if tid is None:
                        tid = len(order)
                        intern[tkey] = tid
                        order.append(tkey)
                        colors.append(dpa.colors[q2] + 1)
                        nxt.append(tkey)
                    targets.append(tid)
                trans[(sid, mask)] = tuple(targets)
        frontier = nxt
    return trans, colors, [valid_masks, [1 << (k * nbits), nbits]]


def _npa_to_nba(
    trans: dict[tuple[int, int], tuple[int, ...]],
    colors: list[int],
    aps: tuple[tuple[str, str], ...],
    valid_masks: list[int],
) -> Nba:
    """Büchi automaton for the parity automaton: guess the eventual minimal even
    color and check it recurs while nothing smaller appears."""
    n = len(colors)
    evens = sorted({c for c in colors if c % 2 == 0})
    phase_of = {c: i for i, c in enumerate(evens)}

    def phase(state: int, c: int) -> int:
        return n + phase_of[c] * n + state

    letters = {}
    for mask in valid_masks:
        letters[mask] = frozenset(ap for b, ap in enumerate(aps) if mask >> b & 1)

    delta: dict[tuple[int, Letter], frozenset[int]] = {}
    accepting = set()
    for (sid, mask), targets in trans.items():
        letter = letters[mask]
        base = set(targets)
        jumps = set()
        for t in targets:
            for c in evens:
                if colors[t] >= c:
                    jumps.add(phase(t, c))
        delta[(sid, letter)] = frozenset(base | jumps)
        for c in evens:
            in_phase = frozenset(phase(t, c) for t in targets if colors[t] >= c)
            if in_phase:
                delta[(phase(sid, c), letter)] = in_phase
    for s in range(n):
        c = colors[s]
        if c % 2 == 0:
            accepting.add(phase(s, c))
    return Nba(
        aps=aps,
        n_states=n + len(evens) * n,
        initial=frozenset({0}),
        accepting=frozenset(accepting),
        delta=delta,
    )


def _restricted_accepting_lasso(
    dpa: Dpa, valid_masks: list[int]
) -> tuple[list[int], list[int]] | None:
    """Accepting stem/loop letter masks using only valid letters, or None."""
    parent: dict[int, tuple[int, int] | None] = {dpa.initial: None}
    frontier = [dpa.initial]
    while frontier:
        nxt = []
        for s in frontier:
            for mask in valid_masks:
                t = dpa.delta[s][mask]
                if t not in parent:
                    parent[t] = (s, mask)
                    nxt.append(t)
        frontier = nxt
    reachable = sorted(parent)

    def stem_to(v: int) -> list[int]:
        masks = []
        while parent[v] is not None:
            v, mask = parent[v]
            masks.append(mask)
        return masks[::-1]

    for c in sorted({dpa.colors[s] for s in reachable if dpa.colors[s] % 2 == 0}):
        allowed = {s for s in reachable if dpa.colors[s] >= c}
        # iterative Tarjan-free SCC via Kosaraju on the restricted subgraph
        fwd = {s: [dpa.delta[s][m] for m in valid_masks] for s in allowed}
        fwd = {s: [t for t in ts if t in allowed] for s, ts in fwd.items()}
        comp = _scc_of(fwd)
        for s in allowed:
            if dpa.colors[s] != c:
                continue
            cid = comp[s]
            members = [t for t in allowed if comp[t] == cid]
            internal = len(members) > 1 or s in fwd[s]
            if not internal:
                continue
            loop = _cycle_through(dpa, valid_masks, set(members), s)
            return stem_to(s), loop
    return None


def _scc_of(fwd: dict[int, list[int]]) -> dict[int, int]:
    """Strongly connected component ids for an adjacency-dict graph."""
    order: list[int] = []
    seen: set[int] = set()
    for root in fwd:
        if root in seen:
            continue
        stack = [(root, iter(fwd[root]))]
        seen.add(root)
        while stack:
            node, it = stack[-1]
            advanced = False
            for t in it:
                if t not in seen:
                    seen.add(t)
                    stack.append((t, iter(fwd[t])))
                    advanced = True
                    break
            if not advanced:
                order.append(node)
                stack.pop()
    rev: dict[int, list[int]] = {s: [] for s in fwd}
    for s, ts in fwd.items():
        for t in ts:
            rev[t].append(s)
    comp: dict[int, int] = {}
    cid = 0
    for root in reversed(order):
        if root in comp:
            continue
        stack = [root]
        comp[root] = cid
        while stack:
            node = stack.pop()
            for t in rev[node]:
                if t not in comp:
                    comp[t] = cid
                    stack.append(t)
        cid += 1
    return comp


def _cycle_through(
    dpa: Dpa, valid_masks: list[int], members: set[int], start: int
) -> list[int]:
    """Letter masks of a cycle from start back to start inside members."""
    parent: dict[int, tuple[int, int]] = {}
    frontier = [start]
    found = False
    while frontier and not found:
        nxt = []
        for s in frontier:
            for mask in valid_masks:
                t = dpa.delta[s][mask]
                if t not in members:
                    continue
                if t == start:
                    parent[-1] = (s, mask)
                    found = True
                    break
                if t not in parent:
                    parent[t] = (s, mask)
                    nxt.append(t)
            if found:
                break
        frontier = nxt
    masks = []
    v: int = -1
    while True:
        s, mask = parent[v]
        masks.append(mask)
        if s == start:
            return masks[::-1]
        v = s


def _witness_lassos(
    ks: KripkeStructure,
    exist_vars: list[str],
    stem_masks: list[int],
    loop_masks: list[int],
    nbits: int,
) -> dict[str, Lasso]:
    """Decode a letter lasso into one ultimately periodic path per existential copy,
    pumping the loop until the joint state vector recurs at the loop boundary."""
    states = ks.all_states()
    idx = {s: i for i, s in enumerate(states)}
    dirs = list(ks.directions)
    kap = [[idx[ks.trans[(s, d)]] for d in dirs] for s in states]
    k = len(exist_vars)
    n_dirs = len(dirs)

    sim: list[tuple[int, ...]] = [tuple([0] * k)]

    def apply(mask: int) -> None:
        ds = _decode_mask(mask, k, nbits, n_dirs)
        cur = sim[-1]
        sim.append(tuple(kap[cur[i]][ds[i]] for i in range(k)))

    for mask in stem_masks:
        apply(mask)
    boundary_at = {sim[-1]: 0}
    reps = 0
    first = None
    while True:
        for mask in loop_masks:
            apply(mask)
        reps += 1
        joint = sim[-1]
        if joint in boundary_at:
            first = boundary_at[joint]
            break
        boundary_at[joint] = reps
    stem_len = len(stem_masks) + first * len(loop_masks)
    loop_len = (reps - first) * len(loop_masks)
    out = {}
    for i, var in enumerate(exist_vars):
        stem = (ks.init,) + tuple(states[sim[t][i]] for t in range(1, stem_len + 1))
        loop = tuple(states[sim[t][i]] for t in range(stem_len + 1, stem_len + loop_len + 1))
        out[var] = Lasso(stem=stem, loop=loop)
    return out


def solve_exists_forall(
    ks: KripkeStructure, formula: HyperLtlFormula, cap: int = STATE_CAP
) -> Verdict:
    """Decide an exists*-forall* property exactly; Proven verdicts carry one
    witness lasso per existential trace variable."""
    exist_vars, univ_vars = split_exists_forall(formula)
    body_aps = sorted(indexed_aps(formula.body))
    dpa = ltl_to_dpa(formula.body, alphabet_aps=body_aps, cap=cap)
    trans, colors, (valid_masks, (n_letters, nbits)) = _dual_npa(
        ks, exist_vars, univ_vars, dpa
    )
    syn_aps = _direction_word_aps(exist_vars, nbits)
    assert 1 << len(syn_aps) == n_letters
    nba = reduce_nba(trim_nba(_npa_to_nba(trans, colors, syn_aps, valid_masks)))
    det = determinize_nba_to_dpa(nba, cap=cap)
    comp = complement_dpa(det)
    bounds = {
        "npa_states": len(colors),
        "nba_states": nba.n_states,
        "dpa_states": comp.n_states,
    }
    found = _restricted_accepting_lasso(comp, valid_masks)
    if found is None:
        return Verdict(
            status=DISPROVEN,
            method="exists-forall",
            guarantee=SEMANTIC,
            detail="no blind existential witness exists",
            bounds=bounds,
        )
    stem_masks, loop_masks = found
    letters = {
        mask: frozenset(ap for b, ap in enumerate(syn_aps) if mask >> b & 1)
        for mask in valid_masks
    }
    assert dpa_lasso_accepts(
        comp, [letters[m] for m in stem_masks], [letters[m] for m in loop_masks]
    )
    witness = _witness_lassos(ks, exist_vars, stem_masks, loop_masks, nbits)
    return Verdict(
        status=PROVEN,
        method="exists-forall",
        guarantee=SEMANTIC,
        detail="blind existential witness found",
        witness=witness,
        bounds=bounds,
    )
