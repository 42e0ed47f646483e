"""Safra-tree determinization of Büchi automata into parity automata."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ResourceLimitError
from .dpa import Dpa
from .nba import Nba, all_letters

STATE_CAP = 200_000


@dataclass
class _TreeNode:
    name: int
    label: set[int]
    children: list["_TreeNode"]


FrozenTree = tuple  # (name, frozenset(label), tuple of child FrozenTrees)


def _freeze(node: _TreeNode) -> FrozenTree:
    return (node.name, frozenset(node.label), tuple(_freeze(c) for c in node.children))


def _thaw(tree: FrozenTree) -> _TreeNode:
    name, label, children = tree
    return _TreeNode(name, set(label), [_thaw(c) for c in children])


def _names(node: _TreeNode, out: set[int]) -> None:
    out.add(node.name)
    for c in node.children:
        _names(c, out)


def _safra_step(
    tree: FrozenTree | None,
    letter_targets: dict[int, frozenset[int]],
    accepting: frozenset[int],
    max_names: int,
) -> tuple[FrozenTree | None, frozenset[int], frozenset[int]]:
    """One Safra update; returns (new tree, deleted names, marked names)."""
    if tree is None:
        return None, frozenset(), frozenset()
    root = _thaw(tree)
    used: set[int] = set()
    _names(root, used)

    # 1. branch accepting: youngest child gets label ∩ F, smallest free name
    free = iter(n for n in range(1, 2 * max_names + 1) if n not in used)
    spawned: set[int] = set()

    def spawn(node: _TreeNode) -> None:
        for c in list(node.children):
            spawn(c)
        hit = node.label & accepting
        if hit:
            name = next(free)
            spawned.add(name)
            node.children.append(_TreeNode(name, set(hit), []))

    spawn(root)

    # 2. powerset update of every label
    def update(node: _TreeNode) -> None:
        node.label = set().union(*(letter_targets.get(q, frozenset()) for q in node.label)) if node.label else set()
        for c in node.children:
            update(c)

    update(root)

    # 3. horizontal merge: drop states already owned by older siblings
    def strip(node: _TreeNode, banned: set[int]) -> None:
        node.label -= banned
        for c in node.children:
            strip(c, banned)

    def horizontal(node: _TreeNode) -> None:
        owned: set[int] = set()
        for c in node.children:
            strip(c, owned)
            owned |= c.label
        for c in node.children:
            horizontal(c)

    horizontal(root)

    # 4. remove empty nodes
    deleted: set[int] = set()

    def prune(node: _TreeNode) -> None:
        kept = []
        for c in node.children:
            if c.label:
                prune(c)
                kept.append(c)
            else:
                _names(c, deleted)
        node.children = kept

    if not root.label:
        _names(root, deleted)
        real_deleted = frozenset(n for n in deleted if n not in spawned)
        return None, real_deleted, frozenset()
    prune(root)

    # 5. vertical merge: a node owning exactly its children's union gets marked
    marked: set[int] = set()

    def vertical(node: _TreeNode) -> None:
        union: set[int] = set()
        for c in node.children:
            union |= c.label
        if node.children and union == node.label:
            for c in node.children:
                _names(c, deleted)
            node.children = []
            marked.add(node.name)
        else:
            for c in node.children:
                vertical(c)

    vertical(root)
    real_deleted = frozenset(n for n in deleted if n not in spawned)
    return _freeze(root), real_deleted, frozenset(marked)


def _record_color(record: tuple[int, ...], deleted: frozenset[int], marked: frozenset[int]) -> int:
    for pos, name in enumerate(record):
        if name in deleted:
            return 2 * pos + 1
        if name in marked:
            return 2 * pos + 2
    return 2 * len(record) + 1


def _record_update(
    record: tuple[int, ...], deleted: frozenset[int], tree: FrozenTree | None
) -> tuple[int, ...]:
    survivors = tuple(n for n in record if n not in deleted)
    if tree is None:
        return survivors
    present: set[int] = set()
    _names(_thaw(tree), present)
    created = sorted(present - set(survivors))
    return survivors + tuple(created)


def determinize_nba_to_dpa(nba: Nba, cap: int = STATE_CAP) -> Dpa:
    """Determinization; L(result) = L(nba), min-even parity acceptance."""
    letters = all_letters(nba.aps)
    max_names = max(nba.n_states, 1)
    per_letter: list[dict[int, frozenset[int]]] = []
    for letter in letters:
        per_letter.append({q: nba.successors(q, letter) for q in range(nba.n_states)})

    if nba.initial:
        tree0: FrozenTree | None = (1, frozenset(nba.initial), ())
        record0: tuple[int, ...] = (1,)
    else:
        tree0, record0 = None, ()
    init_key = (tree0, record0, 2 * len(record0) + 1)
    index: dict[tuple, int] = {init_key: 0}
    order = [init_key]
    delta: list[list[int]] = []
    frontier = [init_key]
    while frontier:
        nxt = []
        for key in frontier:
            tree, record, _ = key
            row = []
            for lid, _letter in enumerate(letters):
                new_tree, deleted, marked = _safra_step(tree, per_letter[lid], nba.accepting, max_names)
                color = _record_color(record, deleted, marked)
                new_record = _record_update(record, deleted, new_tree)
                new_key = (new_tree, new_record, color)
                if new_key not in index:
                    if len(index) >= cap:
                        raise ResourceLimitError(
                            f"determinization exceeded {cap} states", budget=cap
                        )
                    index[new_key] = len(index)
                    order.append(new_key)
                    nxt.append(new_key)
                row.append(index[new_key])
            delta.append(row)
        frontier = nxt
    colors = [key[2] for key in order]
    return Dpa(
        aps=nba.aps,
        n_states=len(order),
        initial=0,
        delta=delta,
        colors=colors,
    )
