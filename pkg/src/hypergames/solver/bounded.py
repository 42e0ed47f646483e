"""Bounded-memory search for winning coalition profiles in the hierarchical game.

The search walks memory vectors in (max, lexicographic) order and, per vector,
runs a conflict-directed backjumping search over reachable coalition decisions
(one (direction, next-memory) choice per observed memory/observation pair).
A partial assignment is refuted when play can leave the coalition's
full-information winning region or when the already-committed region contains
an odd-dominated cycle; both conditions survive any completion, and the
decisions implicated in a refutation steer the backjump."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ..arena import MpgGame, observation_class, observation_keys
from ..certificate import StrategyProfile
from ..model import KripkeStructure
from .zielonka import solve_mpg_full_info

WIN, LOSS, OPEN = "win", "loss", "open"


@dataclass
class SearchStats:
    """Counters and the reason the search stopped."""

    evaluations: int = 0
    assignments: int = 0
    backtracks: int = 0
    vectors_tried: int = 0
    reason: str = ""


class _BudgetExceeded(Exception):
    pass


def _memory_vectors(n_players: int, max_memory: int):
    vecs = itertools.product(range(1, max_memory + 1), repeat=n_players)
    return sorted(vecs, key=lambda v: (max(v), v)) if n_players else [()]


def _coalition_direction_reps(game: MpgGame, ks: KripkeStructure) -> dict[int, list[int]]:
    """Per coalition player: one direction per class of indistinguishable effects.

    Two directions are interchangeable for a player when, from every state of
    its copy, they reach states the automaton cannot tell apart through the
    propositions it reads on that copy.  Restricting the player's choices to
    class representatives shrinks the search space; found profiles stay
    winning verbatim, so the reduction keeps the method sound."""
    reps: dict[int, list[int]] = {}
    states = ks.all_states()
    for p in sorted(game.coalition):
        var = game.trace_vars[p - 1]
        read = frozenset(ap for ap, v in game.dpa.aps if v == var)
        block = {s: (ks.labels[s] & read,) for s in states}
        while True:
            sig = {
                s: (block[s][0], tuple(block[ks.trans[(s, d)]] for d in ks.directions))
                for s in states
            }
            ids: dict = {}
            for s in states:
                ids.setdefault(sig[s], len(ids))
            if len(ids) == len(set(block.values())):
                block = {s: (ids[sig[s]],) for s in states}
                break
            block = {s: (ids[sig[s]],) for s in states}
        classes: dict = {}
        chosen: list[int] = []
        for di, d in enumerate(ks.directions):
            key = tuple(block[ks.trans[(s, d)]] for s in states)
            if key not in classes:
                classes[key] = di
                chosen.append(di)
        reps[p] = chosen
    return reps


def _odd_cycle_component(
    nodes: np.ndarray, colors: np.ndarray, src: np.ndarray, dst: np.ndarray
) -> np.ndarray | None:
    """Nodes of some committed cycle whose minimum color is odd, or None."""
    if not len(src):
        return None
    order = np.argsort(nodes)
    nodes_sorted = nodes[order]
    colors_sorted = colors[order]
    spos = np.searchsorted(nodes_sorted, src)
    dpos = np.searchsorted(nodes_sorted, dst)
    for c in sorted({int(x) for x in colors_sorted if x % 2 == 1}):
        keep_node = colors_sorted >= c
        keep_edge = keep_node[spos] & keep_node[dpos]
        if not keep_edge.any():
            continue
        compact = np.cumsum(keep_node) - 1
        k = int(keep_node.sum())
        es, ed = compact[spos[keep_edge]], compact[dpos[keep_edge]]
        graph = csr_matrix((np.ones(len(es), dtype=np.int8), (es, ed)), shape=(k, k))
        n_comp, labels = connected_components(graph, directed=True, connection="strong")
        sizes = np.bincount(labels, minlength=n_comp)
        looped = np.zeros(n_comp, dtype=bool)
        self_rows = es == ed
        looped[labels[es[self_rows]]] = True
        cand = keep_node & (colors_sorted == c)
        labs = labels[compact[cand]]
        bad = labs[(sizes[labs] > 1) | looped[labs]]
        if len(bad):
            members = np.flatnonzero(keep_node)[labels == int(bad[0])]
            return nodes_sorted[members]
    return None


def bounded_profile_search(
    game: MpgGame,
    max_memory: int = 2,
    budget: int = 10_000_000,
    ks: KripkeStructure | None = None,
) -> tuple[StrategyProfile | None, SearchStats]:
    """Search for a winning coalition profile with per-player memory up to the bound."""
    stats = SearchStats()
    players = tuple(sorted(game.coalition))
    full = solve_mpg_full_info(game)
    if not full.win_even[game.v_init]:
        stats.reason = "coalition loses even under full information"
        return None, stats
    w_arr = full.win_even

    obs_ids = {p: observation_keys(game, p) for p in players}
    n_obs = {p: int(obs_ids[p].max()) + 1 for p in players}
    movers = game.turn + 1
    succ = np.asarray(game.succ, dtype=np.int64)
    colors = np.asarray(game.color, dtype=np.int64)
    n_dirs = len(game.directions)
    dir_choices = {p: list(range(n_dirs)) for p in players}
    if ks is not None:
        dir_choices = _coalition_direction_reps(game, ks)

    for mem_vec in _memory_vectors(len(players), max_memory):
        stats.vectors_tried += 1
        try:
            profile = _search_vector(
                game, players, list(mem_vec), obs_ids, n_obs, movers, succ,
                colors, n_dirs, dir_choices, w_arr, budget, stats,
            )
        except _BudgetExceeded:
            stats.reason = f"budget of {budget} evaluations exhausted"
            return None, stats
        if profile is not None:
            stats.reason = f"winning profile at memory vector {tuple(mem_vec)}"
            return profile, stats
    stats.reason = f"no profile with per-player memory up to {max_memory}"
    return None, stats


@dataclass
class _Decision:
    """One assigned table cell on the trail."""

    key: tuple[int, int, int]  # (player position, memory index, observation id)
    opt: int
    conflict: set[int] = field(default_factory=set)  # earlier trail positions


def _search_vector(
    game: MpgGame,
    players: tuple[int, ...],
    mem_sizes: list[int],
    obs_ids: dict[int, np.ndarray],
    n_obs: dict[int, int],
    movers: np.ndarray,
    succ: np.ndarray,
    colors: np.ndarray,
    n_dirs: int,
    dir_choices: dict[int, list[int]],
    w_arr: np.ndarray,
    budget: int,
    stats: SearchStats,
) -> StrategyProfile | None:
    m_total = 1
    for size in mem_sizes:
        m_total *= size
    strides = [1] * len(players)
    for j in range(len(players) - 2, -1, -1):
        strides[j] = strides[j + 1] * mem_sizes[j + 1]
    space = game.n_vertices * m_total
    stamp = np.zeros(space, dtype=np.int32)
    parent = np.full(space, -1, dtype=np.int64)
    gen = 0
    adir = [np.full((mem_sizes[j], n_obs[p]), -1, dtype=np.int64) for j, p in enumerate(players)]
    anxt = [np.full((mem_sizes[j], n_obs[p]), -1, dtype=np.int64) for j, p in enumerate(players)]
    init_code = np.int64(game.v_init) * m_total

    def key_of(code: int) -> tuple[int, int, int] | None:
        v = code // m_total
        p = int(movers[v])
        if p not in game.coalition:
            return None
        j = players.index(p)
        mem_j = (code % m_total // strides[j]) % mem_sizes[j]
        return (j, int(mem_j), int(obs_ids[p][v]))

    def path_keys(code: int) -> set[tuple[int, int, int]]:
        # keys of committed decisions along the first-discovery path, endpoint excluded
        out: set[tuple[int, int, int]] = set()
        code = int(parent[code])
        while code >= 0:
            k = key_of(code)
            if k is not None:
                out.add(k)
            code = int(parent[code])
        return out

    def evaluate():
        nonlocal gen
        gen += 1
        stamp[init_code] = gen
        parent[init_code] = -1
        frontier = np.array([init_code], dtype=np.int64)
        e_src: list[np.ndarray] = []
        e_dst: list[np.ndarray] = []
        node_blocks = [frontier]
        open_key: tuple[int, int, int] | None = None
        while len(frontier):
            stats.evaluations += len(frontier)
            if stats.evaluations > budget:
                raise _BudgetExceeded()
            vv = frontier // m_total
            outside = np.flatnonzero(~w_arr[vv])
            if len(outside):
                return LOSS, path_keys(int(frontier[outside[0]]))
            mcode = frontier % m_total
            mover = movers[vv]
            srcs: list[np.ndarray] = []
            dsts: list[np.ndarray] = []
            handled = np.zeros(len(frontier), dtype=bool)
            for j, p in enumerate(players):
                rows = np.flatnonzero(mover == p)
                if not len(rows):
                    continue
                handled[rows] = True
                mem_j = (mcode[rows] // strides[j]) % mem_sizes[j]
                obs = obs_ids[p][vv[rows]]
                chosen = adir[j][mem_j, obs]
                miss = chosen < 0
                if miss.any() and open_key is None:
                    # earliest BFS level wins; within it the smallest (j, mem, obs)
                    cand = np.flatnonzero(miss)
                    packed = mem_j[cand] * n_obs[p] + obs[cand]
                    best = int(packed.min())
                    open_key = (j, best // n_obs[p], best % n_obs[p])
                live = np.flatnonzero(~miss)
                if not len(live):
                    continue
                rows = rows[live]
                mem_j = mem_j[live]
                obs = obs[live]
                chosen = chosen[live]
                new_mem = mcode[rows] + (anxt[j][mem_j, obs] - mem_j) * strides[j]
                srcs.append(frontier[rows])
                dsts.append(succ[vv[rows], chosen] * m_total + new_mem)
            opp = np.flatnonzero(~handled)
            if len(opp):
                srcs.append(np.repeat(frontier[opp], n_dirs))
                dsts.append((succ[vv[opp]] * m_total + mcode[opp][:, None]).ravel())
            if not srcs:
                break
            src_arr = np.concatenate(srcs)
            dst_arr = np.concatenate(dsts)
            e_src.append(src_arr)
            e_dst.append(dst_arr)
            uniq, first = np.unique(dst_arr, return_index=True)
            new_rows = stamp[uniq] != gen
            fresh = uniq[new_rows]
            stamp[fresh] = gen
            parent[fresh] = src_arr[first[new_rows]]
            node_blocks.append(fresh)
            frontier = fresh
        nodes = np.concatenate(node_blocks)
        src_all = np.concatenate(e_src) if e_src else np.zeros(0, dtype=np.int64)
        dst_all = np.concatenate(e_dst) if e_dst else np.zeros(0, dtype=np.int64)
        cycle = _odd_cycle_component(nodes, colors[nodes // m_total], src_all, dst_all)
        if cycle is not None:
            conflict = path_keys(int(cycle.min()))
            for code in cycle.tolist():
                k = key_of(int(code))
                if k is not None:
                    conflict.add(k)
            return LOSS, conflict
        if open_key is not None:
            return OPEN, open_key
        return WIN, None

    options = [
        [(d, m) for d in dir_choices[p] for m in range(mem_sizes[j])]
        for j, p in enumerate(players)
    ]

    def set_cell(key: tuple[int, int, int], opt: int) -> None:
        j, mem_i, obs_i = key
        d, nm = options[j][opt]
        adir[j][mem_i, obs_i] = d
        anxt[j][mem_i, obs_i] = nm

    def clear_cell(key: tuple[int, int, int]) -> None:
        j, mem_i, obs_i = key
        adir[j][mem_i, obs_i] = -1
        anxt[j][mem_i, obs_i] = -1

    trail: list[_Decision] = []
    pos_of: dict[tuple[int, int, int], int] = {}
    while True:
        status, payload = evaluate()
        if status == WIN:
            return _build_profile(game, players, mem_sizes, obs_ids, adir, anxt)
        if status == OPEN:
            key = payload
            pos_of[key] = len(trail)
            trail.append(_Decision(key=key, opt=0))
            set_cell(key, 0)
            stats.assignments += 1
            continue
        # LOSS: jump to the most recent implicated decision, merging conflicts
        conflict = {pos_of[k] for k in payload if k in pos_of}
        while True:
            if not conflict:
                return None  # refuted independently of every decision taken
            t = max(conflict)
            for entry in trail[t + 1 :]:
                clear_cell(entry.key)
                del pos_of[entry.key]
            del trail[t + 1 :]
            entry = trail[t]
            entry.conflict |= conflict - {t}
            if entry.opt + 1 < len(options[entry.key[0]]):
                entry.opt += 1
                set_cell(entry.key, entry.opt)
                stats.assignments += 1
                break
            clear_cell(entry.key)
            del pos_of[entry.key]
            trail.pop()
            conflict = entry.conflict
            stats.backtracks += 1


def _build_profile(
    game: MpgGame,
    players: tuple[int, ...],
    mem_sizes: list[int],
    obs_ids: dict[int, np.ndarray],
    adir: list[np.ndarray],
    anxt: list[np.ndarray],
) -> StrategyProfile:
    """Profile from the assignment arrays, keyed by readable observation classes."""
    memories = {p: tuple(f"m{i}" for i in range(mem_sizes[j])) for j, p in enumerate(players)}
    rep_of: dict[int, dict[int, int]] = {}
    for p in players:
        uniq, first = np.unique(obs_ids[p], return_index=True)
        rep_of[p] = {int(u): int(v) for u, v in zip(uniq, first)}
    tables: dict[int, dict] = {}
    for j, p in enumerate(players):
        table = {}
        filled = np.argwhere(adir[j] >= 0)
        for mem_i, oid in filled:
            obs = observation_class(game, rep_of[p][int(oid)], p)
            key = (f"m{int(mem_i)}", obs)
            table[key] = (
                game.directions[int(adir[j][mem_i, oid])],
                f"m{int(anxt[j][mem_i, oid])}",
            )
        tables[p] = table
    return StrategyProfile(coalition=players, memories=memories, tables=tables)
