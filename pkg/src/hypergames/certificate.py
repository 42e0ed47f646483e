"""Strategy certificates: coalition profiles, text serialization, independent check.

The checker validates a profile against a game by exhaustive product traversal
and cycle analysis only; it deliberately shares no code with any solver."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .arena import MpgGame, observation_class, observation_keys
from .errors import ParseError, ResourceLimitError, ValidationError

CERT_HEADER = "hypergames-certificate v1"
PRODUCT_CAP = 64_000_000

ObsKey = tuple


@dataclass(frozen=True)
class StrategyProfile:
    """Finite-memory observation strategies for every coalition player.

    tables[p] maps (memory name, observation class) to (direction, next memory);
    memories[p][0] is the initial memory state."""

    coalition: tuple[int, ...]
    memories: dict[int, tuple[str, ...]]
    tables: dict[int, dict[tuple[str, ObsKey], tuple[str, str]]]


@dataclass(frozen=True)
class Certificate:
    """Self-contained checkable unit: profile plus the inputs that rebuild its game."""

    profile: StrategyProfile
    game_hash: str
    obs_mode: str
    formula_text: str
    ks_text: str
    prophecy_text: str = ""


@dataclass(frozen=True)
class CheckReport:
    """Outcome of an independent profile check."""

    ok: bool
    errors: tuple[str, ...]
    diagnostics: tuple[str, ...]
    nodes: int
    edges: int


def obs_to_text(obs: ObsKey) -> str:
    """Stable one-line rendering of an observation class."""
    if obs and obs[0] == "full":
        return "full " + " ".join(str(x) for x in obs[1])
    mover, names = obs
    tail = (" " + " ".join(names)) if names else ""
    return f"obs {mover}{tail}"


def obs_from_tokens(tokens: list[str]) -> ObsKey:
    """Inverse of obs_to_text on whitespace-split tokens."""
    if not tokens:
        raise ValueError("empty observation")
    if tokens[0] == "full":
        rest = tokens[1:]
        if len(rest) < 2:
            raise ValueError("full observation needs states, q, mover")
        return ("full", tuple(rest[:-2]) + (int(rest[-2]), int(rest[-1])))
    if tokens[0] == "obs":
        return (int(tokens[1]), tuple(tokens[2:]))
    raise ValueError(f"bad observation tag {tokens[0]!r}")


def render_certificate(cert: Certificate) -> str:
    """Deterministic text form of a certificate."""
    lines = [
        CERT_HEADER,
        f"game-hash: {cert.game_hash}",
        f"observation: {cert.obs_mode}",
        "coalition: " + " ".join(str(p) for p in sorted(cert.profile.coalition)),
        f"formula: {cert.formula_text.strip()}",
        "ks {",
        cert.ks_text.rstrip("\n"),
        "}",
    ]
    if cert.prophecy_text.strip():
        lines += ["prophecy {", cert.prophecy_text.rstrip("\n"), "}"]
    for p in sorted(cert.profile.coalition):
        mems = cert.profile.memories[p]
        lines.append(f"player {p} {{")
        lines.append("memory: " + " ".join(mems))
        mem_pos = {m: i for i, m in enumerate(mems)}
        entries = sorted(
            cert.profile.tables[p].items(),
            key=lambda kv: (mem_pos[kv[0][0]], obs_to_text(kv[0][1])),
        )
        for (mem, obs), (direction, nxt) in entries:
            lines.append(f"at {mem} {obs_to_text(obs)}: move {direction} next {nxt}")
        lines.append("}")
    return "\n".join(lines) + "\n"


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0]


def parse_certificate(text: str) -> Certificate:
    """Parse the text form; raises ParseError with a line number on malformed input."""
    lines = text.splitlines()
    pos = 0

    def fail(message: str, at: int) -> ParseError:
        return ParseError(message, at + 1, 1)

    def expect_prefix(prefix: str) -> str:
        nonlocal pos
        if pos >= len(lines) or not lines[pos].startswith(prefix):
            raise fail(f"expected line starting with {prefix!r}", pos)
        value = lines[pos][len(prefix) :].strip()
        pos += 1
        return value

    def block_body() -> str:
        # opening line already consumed; consume until brace depth returns to zero
        nonlocal pos
        depth = 1
        body: list[str] = []
        while pos < len(lines):
            stripped = _strip_comment(lines[pos])
            depth += stripped.count("{") - stripped.count("}")
            if depth <= 0:
                pos += 1
                return "\n".join(body) + ("\n" if body else "")
            body.append(lines[pos])
            pos += 1
        raise fail("unterminated block", len(lines) - 1)

    first = expect_prefix(CERT_HEADER)
    if first:
        raise fail("unexpected text after header", pos - 1)
    game_hash = expect_prefix("game-hash:")
    obs_mode = expect_prefix("observation:")
    if obs_mode not in ("hierarchical", "full"):
        raise fail(f"unknown observation mode {obs_mode!r}", pos - 1)
    coalition = tuple(int(t) for t in expect_prefix("coalition:").split())
    formula_text = expect_prefix("formula:")
    expect_prefix("ks {")
    ks_text = block_body()
    prophecy_text = ""
    if pos < len(lines) and lines[pos].startswith("prophecy {"):
        pos += 1
        prophecy_text = block_body()
    memories: dict[int, tuple[str, ...]] = {}
    tables: dict[int, dict[tuple[str, ObsKey], tuple[str, str]]] = {}
    while pos < len(lines):
        if not lines[pos].strip():
            pos += 1
            continue
        head = lines[pos].split()
        if len(head) != 3 or head[0] != "player" or head[2] != "{":
            raise fail("expected 'player <n> {'", pos)
        player = int(head[1])
        pos += 1
        mems = tuple(expect_prefix("memory:").split())
        if not mems or len(set(mems)) != len(mems):
            raise fail("memory list must be nonempty and duplicate-free", pos - 1)
        table: dict[tuple[str, ObsKey], tuple[str, str]] = {}
        while pos < len(lines) and lines[pos].strip() != "}":
            line = lines[pos].strip()
            if not line:
                pos += 1
                continue
            if ":" not in line:
                raise fail("expected 'at <mem> <obs>: move <dir> next <mem>'", pos)
            left, right = line.split(":", 1)
            lt = left.split()
            rt = right.split()
            if len(lt) < 3 or lt[0] != "at":
                raise fail("rule must start with 'at <mem>'", pos)
            if len(rt) != 4 or rt[0] != "move" or rt[2] != "next":
                raise fail("rule must end with 'move <dir> next <mem>'", pos)
            mem = lt[1]
            try:
                obs = obs_from_tokens(lt[2:])
            except ValueError as exc:
                raise fail(str(exc), pos) from exc
            if mem not in mems or rt[3] not in mems:
                raise fail(f"unknown memory state in rule", pos)
            key = (mem, obs)
            if key in table:
                raise fail("duplicate rule for this memory and observation", pos)
            table[key] = (rt[1], rt[3])
            pos += 1
        if pos >= len(lines):
            raise fail("unterminated player block", len(lines) - 1)
        pos += 1
        memories[player] = mems
        tables[player] = table
    if sorted(memories) != sorted(coalition):
        raise fail("player blocks must cover exactly the coalition", len(lines) - 1)
    profile = StrategyProfile(coalition=coalition, memories=memories, tables=tables)
    return Certificate(
        profile=profile,
        game_hash=game_hash,
        obs_mode=obs_mode,
        formula_text=formula_text,
        ks_text=ks_text,
        prophecy_text=prophecy_text,
    )


def _obs_id_maps(game: MpgGame, player: int) -> tuple[np.ndarray, dict[ObsKey, int]]:
    """Dense observation ids per vertex plus the class-key to id dictionary."""
    ids = observation_keys(game, player)
    key_to_id: dict[ObsKey, int] = {}
    if game.obs_mode == "full":
        for v in range(game.n_vertices):
            key_to_id[observation_class(game, v, player)] = v
        return ids, key_to_id
    cols = np.column_stack([game.turn] + [game.state_idx[:, p] for p in range(player)])
    _, first = np.unique(cols, axis=0, return_index=True)
    for rep in first:
        key_to_id[observation_class(game, int(rep), player)] = int(ids[rep])
    return ids, key_to_id


def check_profile(game: MpgGame, profile: StrategyProfile) -> CheckReport:
    """Independent validation: build the play product and reject odd-dominated cycles."""
    errors: list[str] = []
    if tuple(sorted(profile.coalition)) != tuple(sorted(game.coalition)):
        errors.append(
            f"profile coalition {sorted(profile.coalition)} does not match "
            f"game coalition {sorted(game.coalition)}"
        )
        return CheckReport(False, tuple(errors), (), 0, 0)
    players = tuple(sorted(profile.coalition))
    mem_sizes = [len(profile.memories[p]) for p in players]
    m_total = 1
    for size in mem_sizes:
        m_total *= size
    if game.n_vertices * m_total > PRODUCT_CAP:
        raise ResourceLimitError(
            f"profile product {game.n_vertices * m_total} exceeds {PRODUCT_CAP}",
            budget=PRODUCT_CAP,
        )
    strides = [1] * len(players)
    for j in range(len(players) - 2, -1, -1):
        strides[j] = strides[j + 1] * mem_sizes[j + 1]
    dir_index = {d: j for j, d in enumerate(game.directions)}

    # translate tables into dense lookup arrays, collecting structural errors
    obs_ids: dict[int, np.ndarray] = {}
    dir_tab: dict[int, np.ndarray] = {}
    nxt_tab: dict[int, np.ndarray] = {}
    for j, p in enumerate(players):
        ids, key_to_id = _obs_id_maps(game, p)
        obs_ids[p] = ids
        n_obs = int(ids.max()) + 1 if len(ids) else 0
        mems = profile.memories[p]
        mem_pos = {m: i for i, m in enumerate(mems)}
        dtab = np.full((len(mems), n_obs), -1, dtype=np.int64)
        ntab = np.full((len(mems), n_obs), -1, dtype=np.int64)
        for (mem, obs), (direction, nxt) in profile.tables[p].items():
            if mem not in mem_pos or nxt not in mem_pos:
                errors.append(f"player {p}: unknown memory state in rule at {mem!r}")
                continue
            if direction not in dir_index:
                errors.append(f"player {p}: unknown direction {direction!r}")
                continue
            oid = key_to_id.get(obs)
            if oid is None:
                errors.append(
                    f"player {p}: observation not present in this game: {obs_to_text(obs)}"
                )
                continue
            dtab[mem_pos[mem], oid] = dir_index[direction]
            ntab[mem_pos[mem], oid] = mem_pos[nxt]
        dir_tab[p] = dtab
        nxt_tab[p] = ntab

    n_dirs = len(game.directions)
    succ = np.asarray(game.succ, dtype=np.int64)
    movers = game.turn + 1

    init_code = np.int64(game.v_init) * m_total  # all memories start at index 0
    seen = np.zeros(game.n_vertices * m_total, dtype=bool)
    seen[init_code] = True
    node_blocks = [np.array([init_code], dtype=np.int64)]
    parent: dict[int, tuple[int, int]] = {}
    gap_keys: set[tuple[int, int, int]] = set()
    edge_src: list[np.ndarray] = []
    edge_dst: list[np.ndarray] = []
    edge_dir: list[np.ndarray] = []

    frontier = node_blocks[0]
    while len(frontier):
        vv = frontier // m_total
        mcode = frontier % m_total
        mover = movers[vv]
        srcs: list[np.ndarray] = []
        dsts: list[np.ndarray] = []
        dirs: list[np.ndarray] = []
        handled = np.zeros(len(frontier), dtype=bool)
        for j, p in enumerate(players):
            rows = np.flatnonzero(mover == p)
            if not len(rows):
                continue
            handled[rows] = True
            mem_j = (mcode[rows] // strides[j]) % mem_sizes[j]
            obs = obs_ids[p][vv[rows]]
            chosen = dir_tab[p][mem_j, obs]
            gaps = np.flatnonzero(chosen < 0)
            for g in gaps:
                gap_keys.add((p, int(mem_j[g]), int(obs[g])))
            live = np.flatnonzero(chosen >= 0)
            if not len(live):
                continue
            rows = rows[live]
            mem_j = mem_j[live]
            obs = obs[live]
            chosen = chosen[live]
            new_mem = mcode[rows] + (nxt_tab[p][mem_j, obs] - mem_j) * strides[j]
            dst = succ[vv[rows], chosen] * m_total + new_mem
            srcs.append(frontier[rows])
            dsts.append(dst)
            dirs.append(chosen)
        opp = np.flatnonzero(~handled)
        if len(opp):
            rep_src = np.repeat(frontier[opp], n_dirs)
            dst = (succ[vv[opp]] * m_total + mcode[opp][:, None]).ravel()
            srcs.append(rep_src)
            dsts.append(dst)
            dirs.append(np.tile(np.arange(n_dirs, dtype=np.int64), len(opp)))
        if not srcs:
            break
        src_arr = np.concatenate(srcs)
        dst_arr = np.concatenate(dsts)
        dir_arr = np.concatenate(dirs)
        edge_src.append(src_arr)
        edge_dst.append(dst_arr)
        edge_dir.append(dir_arr)
        uniq, first = np.unique(dst_arr, return_index=True)
        fresh_rows = first[~seen[uniq]]
        fresh = dst_arr[fresh_rows]
        for row in fresh_rows:
            parent[int(dst_arr[row])] = (int(src_arr[row]), int(dir_arr[row]))
        seen[fresh] = True
        node_blocks.append(fresh)
        frontier = fresh

    nodes = np.concatenate(node_blocks)
    nodes_sorted = np.sort(nodes)
    src_all = np.concatenate(edge_src) if edge_src else np.zeros(0, dtype=np.int64)
    dst_all = np.concatenate(edge_dst) if edge_dst else np.zeros(0, dtype=np.int64)
    dir_all = np.concatenate(edge_dir) if edge_dir else np.zeros(0, dtype=np.int64)

    for p, mem_i, oid in sorted(gap_keys):
        mem_name = profile.memories[p][mem_i]
        rep = int(np.flatnonzero(obs_ids[p] == oid)[0])
        obs = observation_class(game, rep, p)
        errors.append(
            f"player {p}: reachable decision not covered: memory {mem_name} "
            f"at {obs_to_text(obs)}"
        )

    node_colors = np.asarray(game.color, dtype=np.int64)[nodes_sorted // m_total]
    spos = np.searchsorted(nodes_sorted, src_all)
    dpos = np.searchsorted(nodes_sorted, dst_all)

    diagnostics: list[str] = []
    odd_colors = sorted({int(c) for c in node_colors if c % 2 == 1})
    for c in odd_colors:
        keep_node = node_colors >= c
        keep_edge = keep_node[spos] & keep_node[dpos]
        if not keep_edge.any():
            continue
        compact = np.cumsum(keep_node) - 1
        k = int(keep_node.sum())
        es, ed = compact[spos[keep_edge]], compact[dpos[keep_edge]]
        graph = csr_matrix(
            (np.ones(len(es), dtype=np.int8), (es, ed)), shape=(k, k)
        )
        n_comp, labels = connected_components(graph, directed=True, connection="strong")
        sizes = np.bincount(labels, minlength=n_comp)
        looped = np.zeros(n_comp, dtype=bool)
        self_rows = es == ed
        looped[labels[es[self_rows]]] = True
        cand = np.flatnonzero(keep_node & (node_colors == c))
        for idx in cand:
            lab = labels[compact[idx]]
            if sizes[lab] > 1 or looped[lab]:
                diagnostics.extend(
                    _losing_lasso(
                        game, profile, players, strides, mem_sizes, m_total,
                        parent, nodes_sorted, spos, dpos, dir_all, keep_edge,
                        compact, labels, lab, int(nodes_sorted[idx]), c,
                    )
                )
                break
        if diagnostics:
            break

    ok = not errors and not diagnostics
    return CheckReport(
        ok=ok,
        errors=tuple(errors),
        diagnostics=tuple(diagnostics),
        nodes=len(nodes),
        edges=len(src_all),
    )


def _node_text(
    game: MpgGame,
    players: tuple[int, ...],
    strides: list[int],
    mem_sizes: list[int],
    m_total: int,
    profile: StrategyProfile,
    code: int,
) -> str:
    v = code // m_total
    mcode = code % m_total
    mems = []
    for j, p in enumerate(players):
        mems.append(profile.memories[p][(mcode // strides[j]) % mem_sizes[j]])
    return f"{game.vertex_tuple(int(v))} mem[{' '.join(mems)}]"


def _losing_lasso(
    game: MpgGame,
    profile: StrategyProfile,
    players: tuple[int, ...],
    strides: list[int],
    mem_sizes: list[int],
    m_total: int,
    parent: dict[int, tuple[int, int]],
    nodes_sorted: np.ndarray,
    spos: np.ndarray,
    dpos: np.ndarray,
    dir_all: np.ndarray,
    keep_edge: np.ndarray,
    compact: np.ndarray,
    labels: np.ndarray,
    lab: int,
    start_code: int,
    c: int,
) -> list[str]:
    """Concrete witness play: stem from the start plus an odd-dominated loop."""
    # adjacency inside the violating component only
    rows = np.flatnonzero(keep_edge)
    in_comp = labels[compact[spos[rows]]] == lab
    rows = rows[in_comp]
    rows = rows[labels[compact[dpos[rows]]] == lab]
    adj: dict[int, list[tuple[int, int]]] = {}
    for r in rows:
        s = int(nodes_sorted[spos[r]])
        adj.setdefault(s, []).append((int(nodes_sorted[dpos[r]]), int(dir_all[r])))

    # BFS from start back to start within the component
    prev: dict[int, tuple[int, int]] = {}
    frontier = [start_code]
    closed = None
    while frontier and closed is None:
        nxt = []
        for s in frontier:
            for t, d in adj.get(s, ()):
                if t == start_code:
                    closed = (s, d)
                    break
                if t not in prev:
                    prev[t] = (s, d)
                    nxt.append(t)
            if closed:
                break
        frontier = nxt
    loop: list[tuple[int, int]] = []
    if closed is not None:
        s, d = closed
        loop.append((s, d))
        while s != start_code:
            s, d = prev[s]
            loop.append((s, d))
        loop.reverse()

    stem: list[tuple[int, int]] = []
    code = start_code
    while code in parent:
        pcode, d = parent[code]
        stem.append((pcode, d))
        code = pcode
    stem.reverse()

    def fmt(code: int) -> str:
        return _node_text(game, players, strides, mem_sizes, m_total, profile, code)

    out = [f"odd-dominated play found: minimum recurring color {c}"]
    for s, d in stem:
        out.append(f"  {fmt(s)} -{game.directions[d]}->")
    out.append(f"  enter loop at {fmt(start_code)}")
    for s, d in loop:
        out.append(f"  {fmt(s)} -{game.directions[d]}->")
    out.append(f"  back to {fmt(start_code)}")
    return out
