"""Nondeterministic Büchi automata: tableau construction and reductions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..errors import ValidationError
from ..logic import LtlBody, indexed_aps
from .ir import IAnd, IBool, ILit, INext, IOr, IRelease, IUntil, Ir, ir_untils, to_ir

IndexedAp = tuple[str, str]
Letter = frozenset[IndexedAp]


def all_letters(aps: tuple[IndexedAp, ...]) -> list[Letter]:
    """Every subset of the alphabet APs, indexed by bitmask over ap order."""
    out = []
    for mask in range(1 << len(aps)):
        out.append(frozenset(ap for i, ap in enumerate(aps) if mask >> i & 1))
    return out


def letter_id(aps: tuple[IndexedAp, ...], letter: Letter) -> int:
    """Bitmask index of a letter; rejects letters outside the alphabet."""
    mask = 0
    index = {ap: i for i, ap in enumerate(aps)}
    for ap in letter:
        if ap not in index:
            raise ValidationError(f"letter mentions {ap!r} outside the alphabet", construct=letter)
        mask |= 1 << index[ap]
    return mask


@dataclass
class Nba:
    """Büchi automaton; transitions may be nondeterministic and partial."""

    aps: tuple[IndexedAp, ...]
    n_states: int
    initial: frozenset[int]
    accepting: frozenset[int]
    delta: dict[tuple[int, Letter], frozenset[int]]

    def successors(self, state: int, letter: Letter) -> frozenset[int]:
        return self.delta.get((state, letter), frozenset())


_INIT = -1  # virtual predecessor marking initial tableau nodes


class _Node:
    __slots__ = ("incoming", "new", "old", "nxt")

    def __init__(self, incoming, new, old, nxt):
        self.incoming = set(incoming)
        self.new = set(new)
        self.old = set(old)
        self.nxt = set(nxt)


def _contradicts(lit: ILit, old: set[Ir]) -> bool:
    return ILit(lit.ap, lit.var, not lit.neg) in old


def _tableau(ir: Ir) -> list[_Node]:
    """Expansion of the tableau graph; returns the settled node list."""
    settled: list[_Node] = []
    stack = [_Node({_INIT}, {ir}, set(), set())]
    while stack:
        node = stack.pop()
        if not node.new:
            match = next(
                (s for s in settled if s.old == node.old and s.nxt == node.nxt), None
            )
            if match is not None:
                match.incoming |= node.incoming
                continue
            settled.append(node)
            stack.append(_Node({id(node)}, set(node.nxt), set(), set()))
            continue
        eta = min(node.new, key=repr)  # deterministic processing order
        node.new.discard(eta)
        match eta:
            case IBool(False):
                continue
            case IBool(True):
                node.old.add(eta)
                stack.append(node)
            case ILit(_, _, _):
                if _contradicts(eta, node.old):
                    continue
                node.old.add(eta)
                stack.append(node)
            case IAnd(a, b):
                node.old.add(eta)
                node.new |= {a, b} - node.old
                stack.append(node)
            case INext(s):
                node.old.add(eta)
                node.nxt.add(s)
                stack.append(node)
            case IOr(a, b):
                left = _Node(node.incoming, node.new | ({a} - node.old), node.old | {eta}, node.nxt)
                right = _Node(node.incoming, node.new | ({b} - node.old), node.old | {eta}, node.nxt)
                stack.append(left)
                stack.append(right)
            case IUntil(a, b):
                wait = _Node(
                    node.incoming, node.new | ({a} - node.old), node.old | {eta}, node.nxt | {eta}
                )
                done = _Node(node.incoming, node.new | ({b} - node.old), node.old | {eta}, node.nxt)
                stack.append(wait)
                stack.append(done)
            case IRelease(a, b):
                hold = _Node(
                    node.incoming, node.new | ({b} - node.old), node.old | {eta}, node.nxt | {eta}
                )
                close = _Node(
                    node.incoming, node.new | ({a, b} - node.old), node.old | {eta}, node.nxt
                )
                stack.append(hold)
                stack.append(close)
            case _:
                raise ValueError(f"unsupported IR construct: {eta}")
    return settled


def _node_letters(node: _Node, aps: tuple[IndexedAp, ...]) -> list[Letter]:
    """Letters consistent with the literal constraints accumulated in old."""
    pos = {(f.ap, f.var) for f in node.old if isinstance(f, ILit) and not f.neg}
    neg = {(f.ap, f.var) for f in node.old if isinstance(f, ILit) and f.neg}
    if pos & neg:
        return []
    free = [ap for ap in aps if ap not in pos and ap not in neg]
    out = []
    for extra in itertools.chain.from_iterable(
        itertools.combinations(free, r) for r in range(len(free) + 1)
    ):
        out.append(frozenset(pos) | frozenset(extra))
    return out


def ltl_to_nba(body: LtlBody, alphabet_aps: frozenset[IndexedAp] | None = None) -> Nba:
    """Tableau construction; accepts exactly the words over 2^aps satisfying body."""
    used = indexed_aps(body)
    if alphabet_aps is None:
        alphabet_aps = used
    if not used <= frozenset(alphabet_aps):
        raise ValidationError("body mentions indexed APs outside the alphabet", construct=body)
    aps = tuple(sorted(alphabet_aps))
    return ir_to_nba(to_ir(body), aps)


def ir_to_nba(ir: Ir, aps: tuple[IndexedAp, ...]) -> Nba:
    """Tableau construction on the internal form over a fixed alphabet."""
    gnba = _gnba_from_tableau(ir, aps)
    nba = degeneralize(*gnba)
    return reduce_nba(trim_nba(nba))


def _gnba_from_tableau(ir: Ir, aps: tuple[IndexedAp, ...]):
    nodes = _tableau(ir)
    index = {id(n): i for i, n in enumerate(nodes)}
    n_states = len(nodes)
    initial = frozenset(i for i, n in enumerate(nodes) if _INIT in n.incoming)
    successors: dict[int, set[int]] = {i: set() for i in range(n_states)}
    for i, node in enumerate(nodes):
        for src in node.incoming:
            if src != _INIT:
                successors[index[src]].add(i)
    # a node's literal constraints apply to the letter read while sitting on it
    delta: dict[tuple[int, Letter], set[int]] = {}
    for i, node in enumerate(nodes):
        for letter in _node_letters(node, aps):
            for j in successors[i]:
                delta.setdefault((i, letter), set()).add(j)
    untils = ir_untils(ir)
    acc_sets = [
        frozenset(i for i, n in enumerate(nodes) if u not in n.old or u.right in n.old)
        for u in untils
    ]
    frozen = {k: frozenset(v) for k, v in delta.items()}
    return Nba(aps, n_states, initial, frozenset(), frozen), acc_sets


def degeneralize(gnba: Nba, acc_sets: list[frozenset[int]]) -> Nba:
    """Counter construction turning generalized Büchi sets into one."""
    if not acc_sets:
        return Nba(gnba.aps, gnba.n_states, gnba.initial, frozenset(range(gnba.n_states)), gnba.delta)
    k = len(acc_sets)
    code = lambda q, i: q * k + (i - 1)
    delta: dict[tuple[int, Letter], frozenset[int]] = {}
    for (q, letter), targets in gnba.delta.items():
        for i in range(1, k + 1):
            j = i % k + 1 if q in acc_sets[i - 1] else i
            delta[(code(q, i), letter)] = frozenset(code(t, j) for t in targets)
    initial = frozenset(code(q, 1) for q in gnba.initial)
    accepting = frozenset(code(q, 1) for q in acc_sets[0])
    return Nba(gnba.aps, gnba.n_states * k, initial, accepting, delta)


def trim_nba(nba: Nba) -> Nba:
    """Keep states that are reachable and can still reach an accepting cycle."""
    reach = set(nba.initial)
    frontier = list(nba.initial)
    succ: dict[int, set[int]] = {}
    for (q, _), targets in nba.delta.items():
        succ.setdefault(q, set()).update(targets)
    while frontier:
        q = frontier.pop()
        for t in succ.get(q, ()):
            if t not in reach:
                reach.add(t)
                frontier.append(t)

    # Tarjan-free SCC via iterative Kosaraju on the reachable part
    order: list[int] = []
    seen: set[int] = set()
    for root in reach:
        if root in seen:
            continue
        stack = [(root, iter(sorted(succ.get(root, ()))))]
        seen.add(root)
        while stack:
            q, it = stack[-1]
            advanced = False
            for t in it:
                if t in reach and t not in seen:
                    seen.add(t)
                    stack.append((t, iter(sorted(succ.get(t, ())))))
                    advanced = True
                    break
            if not advanced:
                order.append(q)
                stack.pop()
    pred: dict[int, set[int]] = {}
    for q in reach:
        for t in succ.get(q, ()):
            if t in reach:
                pred.setdefault(t, set()).add(q)
    comp: dict[int, int] = {}
    for root in reversed(order):
        if root in comp:
            continue
        cid = len(set(comp.values()))
        stack2 = [root]
        comp[root] = cid
        while stack2:
            q = stack2.pop()
            for t in pred.get(q, ()):
                if t not in comp:
                    comp[t] = cid
                    stack2.append(t)

    live_components: set[int] = set()
    for q in reach:
        for t in succ.get(q, ()):
            if t in reach and comp[q] == comp[t]:
                # the component has an internal edge; live if it holds an accepting state
                live_components.add(comp[q])
    live_components = {
        c for c in live_components if any(comp[q] == c and q in nba.accepting for q in reach)
    }
    keep = {q for q in reach if comp[q] in live_components}
    changed = True
    while changed:
        changed = False
        for q in reach:
            if q not in keep and any(t in keep for t in succ.get(q, ())):
                keep.add(q)
                changed = True

    remap = {q: i for i, q in enumerate(sorted(keep))}
    delta = {}
    for (q, letter), targets in nba.delta.items():
        if q in remap:
            kept = frozenset(remap[t] for t in targets if t in remap)
            if kept:
                delta[(remap[q], letter)] = kept
    return Nba(
        nba.aps,
        len(remap),
        frozenset(remap[q] for q in nba.initial if q in remap),
        frozenset(remap[q] for q in nba.accepting if q in remap),
        delta,
    )


def reduce_nba(nba: Nba) -> Nba:
    """Quotient by direct-simulation equivalence."""
    if nba.n_states == 0:
        return nba
    letters = sorted({letter for (_, letter) in nba.delta}, key=sorted)
    n = nba.n_states
    sim = [[True] * n for _ in range(n)]
    for q in range(n):
        for r in range(n):
            if q in nba.accepting and r not in nba.accepting:
                sim[q][r] = False
    changed = True
    while changed:
        changed = False
        for q in range(n):
            for r in range(n):
                if not sim[q][r]:
                    continue
                ok = True
                for letter in letters:
                    for qt in nba.successors(q, letter):
                        if not any(sim[qt][rt] for rt in nba.successors(r, letter)):
                            ok = False
                            break
                    if not ok:
                        break
                if not ok:
                    sim[q][r] = False
                    changed = True
    rep: dict[int, int] = {}
    for q in range(n):
        for r in range(q):
            if sim[q][r] and sim[r][q]:
                rep[q] = rep.get(r, r)
                break
        else:
            rep[q] = q
    classes = sorted(set(rep.values()))
    remap = {c: i for i, c in enumerate(classes)}
    delta: dict[tuple[int, Letter], set[int]] = {}
    for (q, letter), targets in nba.delta.items():
        delta.setdefault((remap[rep[q]], letter), set()).update(remap[rep[t]] for t in targets)
    return Nba(
        nba.aps,
        len(classes),
        frozenset(remap[rep[q]] for q in nba.initial),
        frozenset(remap[rep[q]] for q in nba.accepting),
        {k: frozenset(v) for k, v in delta.items()},
    )
