"""Compositional translation from LTL bodies to deterministic parity automata."""

from __future__ import annotations

from functools import reduce

from ..errors import ResourceLimitError, ValidationError
from ..logic import LtlBody, indexed_aps
from .dpa import (
    Dpa,
    bisim_quotient,
    collapse_trivial,
    complement_dpa,
    compress_colors,
    empty_states,
    reach_trim,
    universal_states,
)
from .ir import (
    IAnd,
    IBool,
    ILit,
    INext,
    IOr,
    IRelease,
    IUntil,
    Ir,
    distribute_ir,
    ir_is_cosafety,
    ir_is_safety,
    simplify_ir,
    to_ir,
)
from .nba import IndexedAp, Letter, all_letters, ir_to_nba
from .safra import STATE_CAP, determinize_nba_to_dpa

Dnf = frozenset  # frozenset of frozensets of Ir obligations, kept as a minimal antichain

TRUE_DNF: Dnf = frozenset({frozenset()})
FALSE_DNF: Dnf = frozenset()


def _dnf_norm(conjuncts: set[frozenset[Ir]]) -> Dnf:
    keep: list[frozenset[Ir]] = []
    for c in sorted(conjuncts, key=lambda x: (len(x), sorted(map(repr, x)))):
        if not any(k <= c for k in keep):
            keep.append(c)
    return frozenset(keep)


def _dnf_or(a: Dnf, b: Dnf) -> Dnf:
    return _dnf_norm(set(a) | set(b))


def _dnf_and(a: Dnf, b: Dnf) -> Dnf:
    return _dnf_norm({x | y for x in a for y in b})


def _progress(ir: Ir, letter: Letter, cache: dict) -> Dnf:
    """One-letter derivative of an obligation, as a DNF over next-step obligations."""
    key = (ir, letter)
    if key in cache:
        return cache[key]
    match ir:
        case IBool(value=v):
            out = TRUE_DNF if v else FALSE_DNF
        case ILit(ap=ap, var=var, neg=neg):
            out = TRUE_DNF if (((ap, var) in letter) != neg) else FALSE_DNF
        case IAnd(left=l, right=r):
            out = _dnf_and(_progress(l, letter, cache), _progress(r, letter, cache))
        case IOr(left=l, right=r):
            out = _dnf_or(_progress(l, letter, cache), _progress(r, letter, cache))
        case INext(sub=s):
            out = frozenset({frozenset({s})})
        case IUntil(left=l, right=r):
            out = _dnf_or(
                _progress(r, letter, cache),
                _dnf_and(_progress(l, letter, cache), frozenset({frozenset({ir})})),
            )
        case IRelease(left=l, right=r):
            out = _dnf_and(
                _progress(r, letter, cache),
                _dnf_or(_progress(l, letter, cache), frozenset({frozenset({ir})})),
            )
        case _:
            raise ValidationError("unknown internal node", construct=ir)
    cache[key] = out
    return out


def _progression_dpa(ir: Ir, aps: tuple[IndexedAp, ...], cosafety: bool, cap: int) -> Dpa:
    """Derivative automaton; sound alone for pure safety or pure cosafety obligations."""
    letters = all_letters(aps)
    cache: dict = {}

    def step(dnf: Dnf, letter: Letter) -> Dnf:
        out = FALSE_DNF
        for conj in dnf:
            acc = TRUE_DNF
            for member in conj:
                acc = _dnf_and(acc, _progress(member, letter, cache))
                if acc == FALSE_DNF:
                    break
            out = _dnf_or(out, acc)
        return out

    init: Dnf = frozenset({frozenset({ir})})
    index: dict[Dnf, int] = {init: 0}
    order: list[Dnf] = [init]
    delta: list[list[int]] = []
    frontier = [init]
    while frontier:
        upcoming = []
        for dnf in frontier:
            row = []
            for letter in letters:
                target = step(dnf, letter)
                if target not in index:
                    if len(index) >= cap:
                        raise ResourceLimitError(f"progression exceeded {cap} states", budget=cap)
                    index[target] = len(index)
                    order.append(target)
                    upcoming.append(target)
                row.append(index[target])
            delta.append(row)
        frontier = upcoming
    if cosafety:
        colors = [0 if dnf == TRUE_DNF else 1 for dnf in order]
    else:
        colors = [1 if dnf == FALSE_DNF else 0 for dnf in order]
    return Dpa(aps, len(order), 0, delta, colors)


def _const_dpa(aps: tuple[IndexedAp, ...], value: bool) -> Dpa:
    width = 1 << len(aps)
    return Dpa(aps, 1, 0, [[0] * width], [0 if value else 1])


def _prepend_init(dpa: Dpa) -> Dpa:
    """New initial state that consumes one letter and defers to the old automaton."""
    fresh = dpa.n_states
    odd = max(dpa.colors) + 1
    odd += odd % 2 == 0
    delta = [row[:] for row in dpa.delta] + [[dpa.initial] * dpa.n_letters()]
    return Dpa(dpa.aps, fresh + 1, fresh, delta, dpa.colors + [odd])


def union_dpa(parts: list[Dpa], cap: int = STATE_CAP) -> Dpa:
    """Language union of deterministic parity automata over one alphabet."""
    if not parts:
        raise ValidationError("union needs at least one automaton")
    if len(parts) == 1:
        return parts[0]
    aps = parts[0].aps
    if any(p.aps != aps for p in parts[1:]):
        raise ValidationError("alphabet mismatch in union")
    width = 1 << len(aps)
    empties = [empty_states(p) for p in parts]
    universals = [universal_states(p) for p in parts]
    pairs = [(i, e) for i, p in enumerate(parts) for e in sorted({c for c in p.colors if c % 2 == 0})]
    neutral = 2 * len(pairs) + 1

    def entry(i: int, state: int):
        if state in universals[i]:
            return "top"
        return -1 if state in empties[i] else state

    starts = [entry(i, p.initial) for i, p in enumerate(parts)]
    if any(s == "top" for s in starts):
        return _const_dpa(aps, True)
    if all(s == -1 for s in starts):
        return _const_dpa(aps, False)

    init_key = (tuple(starts), tuple(range(len(pairs))), neutral)
    index: dict = {init_key: 0}
    order = [init_key]
    delta: list[list[int]] = []
    colors: list[int] = []
    frontier = [init_key]

    def intern(key, upcoming: list) -> int:
        if key not in index:
            if len(index) >= cap:
                raise ResourceLimitError(f"union exceeded {cap} states", budget=cap)
            index[key] = len(index)
            order.append(key)
            upcoming.append(key)
        return index[key]

    while frontier:
        upcoming: list = []
        for key in frontier:
            if key == "TOP":
                delta.append([index["TOP"]] * width)
                colors.append(0)
                continue
            if key == "BOT":
                delta.append([index["BOT"]] * width)
                colors.append(1)
                continue
            comps, record, emitted = key
            colors.append(emitted)
            row = []
            for lid in range(width):
                hits_e: set[int] = set()
                hits_f: set[int] = set()
                succs: list = []
                to_top = False
                for i, cs in enumerate(comps):
                    if cs == -1:
                        succs.append(-1)
                        continue
                    t = parts[i].delta[cs][lid]
                    if t in universals[i]:
                        to_top = True
                        break
                    if t in empties[i]:
                        succs.append(-1)
                        continue
                    succs.append(t)
                    c = parts[i].colors[t]
                    for pi, (owner, e) in enumerate(pairs):
                        if owner == i:
                            if c < e:
                                hits_e.add(pi)
                            elif c == e:
                                hits_f.add(pi)
                if to_top:
                    row.append(intern("TOP", upcoming))
                    continue
                if all(s == -1 for s in succs):
                    row.append(intern("BOT", upcoming))
                    continue
                color = neutral
                for pos, pi in enumerate(record):
                    if pi in hits_e:
                        color = 2 * pos + 1
                        break
                    if pi in hits_f:
                        color = 2 * pos + 2
                        break
                survivors = tuple(pi for pi in record if pi not in hits_e)
                moved = tuple(pi for pi in record if pi in hits_e)
                row.append(intern((tuple(succs), survivors + moved, color), upcoming))
            delta.append(row)
        frontier = upcoming
    return Dpa(aps, len(order), 0, delta, colors)


def intersect_dpa(parts: list[Dpa], cap: int = STATE_CAP) -> Dpa:
    """Language intersection, built as the dual of the union."""
    return complement_dpa(union_dpa([complement_dpa(p) for p in parts], cap))


def _finish(dpa: Dpa) -> Dpa:
    return compress_colors(bisim_quotient(collapse_trivial(reach_trim(dpa))))


def _disjuncts(ir: Ir) -> list[Ir]:
    if isinstance(ir, IOr):
        return _disjuncts(ir.left) + _disjuncts(ir.right)
    return [ir]


def _conjuncts(ir: Ir) -> list[Ir]:
    if isinstance(ir, IAnd):
        return _conjuncts(ir.left) + _conjuncts(ir.right)
    return [ir]


def ltl_to_dpa(body: LtlBody, alphabet_aps: frozenset[IndexedAp] | None = None, cap: int = STATE_CAP) -> Dpa:
    """Deterministic min-even parity automaton accepting exactly the models of body."""
    used = indexed_aps(body)
    if alphabet_aps is None:
        alphabet_aps = used
    if not used <= frozenset(alphabet_aps):
        raise ValidationError("body mentions indexed APs outside the alphabet", construct=body)
    aps = tuple(sorted(alphabet_aps))
    root = simplify_ir(distribute_ir(to_ir(body)))
    memo: dict[Ir, Dpa] = {}

    def go(ir: Ir) -> Dpa:
        if ir in memo:
            return memo[ir]
        if isinstance(ir, IBool):
            out = _const_dpa(aps, ir.value)
        elif ir_is_safety(ir):
            out = _finish(_progression_dpa(ir, aps, cosafety=False, cap=cap))
        elif ir_is_cosafety(ir):
            out = _finish(_progression_dpa(ir, aps, cosafety=True, cap=cap))
        elif isinstance(ir, INext):
            out = _finish(_prepend_init(go(ir.sub)))
        elif isinstance(ir, IOr):
            out = _finish(union_dpa([go(part) for part in _disjuncts(ir)], cap))
        elif isinstance(ir, IAnd):
            out = _finish(intersect_dpa([go(part) for part in _conjuncts(ir)], cap))
        else:
            out = _finish(determinize_nba_to_dpa(ir_to_nba(ir, aps), cap))
        memo[ir] = out
        return out

    dpa = go(root)
    if ir_is_safety(root) and not set(dpa.colors) <= {0, 1}:
        raise ValidationError("safety body produced colors outside {0, 1}", construct=body)
    return dpa
