"""Game arenas: the direct two-player game and the n-player hierarchical game."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .automata.dpa import Dpa
from .errors import ResourceLimitError, ValidationError
from .logic import HyperLtlFormula, indexed_aps
from .model import KripkeStructure

CODE_SPACE_CAP = 60_000_000


@dataclass(frozen=True)
class TwoPlayerGame:
    """Direct game for a forall-exists prefix: refuter steers copy 1, verifier copy 2."""

    vertices: tuple[tuple[str, str, int, int], ...]  # (s1, s2, q, turn) with turn 1 or 2
    succ: tuple[dict[str, int], ...]
    color: tuple[int, ...]
    v_init: int
    directions: tuple[str, ...]


def build_two_player_game(
    ks: KripkeStructure, dpa: Dpa, universal_var: str, existential_var: str
) -> TwoPlayerGame:
    """Explicit dict construction; the refuter also advances the shared word automaton."""

    def joint_letter(s1: str, s2: str) -> frozenset:
        out = set()
        for ap, var in dpa.aps:
            here = s1 if var == universal_var else s2 if var == existential_var else None
            if here is None:
                raise ValidationError(f"automaton mentions foreign trace variable {var!r}")
            if ap in ks.labels[here]:
                out.add((ap, var))
        return frozenset(out)

    start = (ks.init, ks.init, dpa.initial, 1)
    index: dict[tuple, int] = {start: 0}
    order: list[tuple] = [start]
    succ: list[dict[str, int]] = []
    cursor = 0
    while cursor < len(order):
        s1, s2, q, turn = order[cursor]
        row: dict[str, int] = {}
        for d in ks.directions:
            if turn == 1:
                target = (
                    ks.trans[(s1, d)],
                    s2,
                    dpa.step(q, joint_letter(s1, s2)),
                    2,
                )
            else:
                target = (s1, ks.trans[(s2, d)], q, 1)
            if target not in index:
                index[target] = len(order)
                order.append(target)
            row[d] = index[target]
        succ.append(row)
        cursor += 1
    colors = tuple(dpa.colors[q] for (_, _, q, _) in order)
    return TwoPlayerGame(
        vertices=tuple(order),
        succ=tuple(succ),
        color=colors,
        v_init=0,
        directions=ks.directions,
    )


@dataclass(frozen=True)
class MpgGame:
    """Multiplayer parity game; player p steers copy p and player 1 also advances q."""

    n_players: int
    trace_vars: tuple[str, ...]
    coalition: frozenset[int]  # 1-based indices quantified existentially
    state_names: tuple[str, ...]  # index 0 is the initial state
    directions: tuple[str, ...]
    dpa: Dpa
    obs_mode: str  # "hierarchical" or "full"
    n_vertices: int
    v_init: int
    succ: np.ndarray  # (V, D) dense successor ids
    color: np.ndarray  # (V,) parity color of the q component
    turn: np.ndarray  # (V,) 0-based mover index
    state_idx: np.ndarray  # (V, n_players) copy states
    q_idx: np.ndarray  # (V,)

    def vertex_tuple(self, v: int) -> tuple:
        """Decoded vertex: copy state names, q index, and the 1-based mover."""
        names = tuple(self.state_names[s] for s in self.state_idx[v])
        return names + (int(self.q_idx[v]), int(self.turn[v]) + 1)


def build_mpg(
    ks: KripkeStructure,
    formula: HyperLtlFormula,
    dpa: Dpa,
    obs_mode: str = "hierarchical",
) -> MpgGame:
    """Vectorized reachable construction of the n-player game."""
    if obs_mode not in ("hierarchical", "full"):
        raise ValidationError(f"unknown observation mode {obs_mode!r}")
    prefix = formula.prefix
    n = len(prefix)
    if n == 0:
        raise ValidationError("quantifier prefix must not be empty")
    trace_vars = tuple(var for _, var in prefix)
    coalition = frozenset(i + 1 for i, (quant, _) in enumerate(prefix) if quant == "exists")
    for ap, var in dpa.aps:
        if var not in trace_vars:
            raise ValidationError(f"automaton mentions foreign trace variable {var!r}")

    names = ks.all_states()
    name_idx = {s: i for i, s in enumerate(names)}
    R = len(names)
    D = len(ks.directions)
    Q = dpa.n_states
    code_space = (R**n) * Q * n
    if code_space > CODE_SPACE_CAP:
        raise ResourceLimitError(
            f"game code space {code_space} exceeds {CODE_SPACE_CAP}", budget=CODE_SPACE_CAP
        )

    kappa = np.zeros((R, D), dtype=np.int64)
    for i, s in enumerate(names):
        for j, d in enumerate(ks.directions):
            kappa[i, j] = name_idx[ks.trans[(s, d)]]
    # per copy, the letter bits its current state contributes
    letter_bits = np.zeros((n, R), dtype=np.int64)
    for p, var in enumerate(trace_vars):
        for i, s in enumerate(names):
            mask = 0
            for bit, (ap, v) in enumerate(dpa.aps):
                if v == var and ap in ks.labels[s]:
                    mask |= 1 << bit
            letter_bits[p, i] = mask
    dpa_delta = np.array(dpa.delta, dtype=np.int64)
    dpa_colors = np.array(dpa.colors, dtype=np.int64)

    weights = np.array([R ** (n - 1 - p) for p in range(n)], dtype=np.int64)

    def encode(states: np.ndarray, q: np.ndarray, turn: np.ndarray) -> np.ndarray:
        return ((states @ weights) * Q + q) * n + turn

    def decode(codes: np.ndarray):
        turn = codes % n
        rest = codes // n
        q = rest % Q
        sv = rest // Q
        states = np.empty((len(codes), n), dtype=np.int64)
        for p in range(n - 1, -1, -1):
            states[:, p] = sv % R
            sv = sv // R
        return states, q, turn

    init_code = encode(
        np.zeros((1, n), dtype=np.int64), np.array([dpa.initial]), np.array([0])
    )
    seen = {int(init_code[0])}
    all_codes: list[np.ndarray] = []
    succ_blocks: list[np.ndarray] = []
    frontier = init_code
    while len(frontier):
        states, q, turn = decode(frontier)
        letters = np.zeros(len(frontier), dtype=np.int64)
        for p in range(n):
            letters |= letter_bits[p, states[:, p]]
        block = np.empty((len(frontier), D), dtype=np.int64)
        for j in range(D):
            new_states = states.copy()
            moved = kappa[states[np.arange(len(frontier)), turn], j]
            new_states[np.arange(len(frontier)), turn] = moved
            new_q = np.where(turn == 0, dpa_delta[q, letters], q)
            new_turn = (turn + 1) % n
            block[:, j] = encode(new_states, new_q, new_turn)
        all_codes.append(frontier)
        succ_blocks.append(block)
        fresh = [int(c) for c in np.unique(block) if int(c) not in seen]
        seen.update(fresh)
        frontier = np.array(fresh, dtype=np.int64)
    codes = np.concatenate(all_codes)
    raw_succ = np.concatenate(succ_blocks, axis=0)
    # concatenated rows follow discovery order, so row position is the dense id
    sort_perm = np.argsort(codes)
    succ = sort_perm[np.searchsorted(codes[sort_perm], raw_succ)]
    states, q, turn = decode(codes)
    return MpgGame(
        n_players=n,
        trace_vars=trace_vars,
        coalition=coalition,
        state_names=names,
        directions=ks.directions,
        dpa=dpa,
        obs_mode=obs_mode,
        n_vertices=len(codes),
        v_init=0,
        succ=succ,
        color=dpa_colors[q],
        turn=turn,
        state_idx=states,
        q_idx=q,
    )


def observation_keys(game: MpgGame, player: int) -> np.ndarray:
    """Dense id of the observation class of every vertex, for one 1-based player."""
    if not 1 <= player <= game.n_players:
        raise ValidationError(f"no player {player} in a {game.n_players}-player game")
    if game.obs_mode == "full":
        return np.arange(game.n_vertices, dtype=np.int64)
    cols = np.column_stack([game.turn] + [game.state_idx[:, p] for p in range(player)])
    _, inverse = np.unique(cols, axis=0, return_inverse=True)
    return inverse.astype(np.int64)


def observation_class(game: MpgGame, v: int, player: int) -> tuple:
    """Readable observation of vertex v for one player: mover and visible copies."""
    if not 1 <= player <= game.n_players:
        raise ValidationError(f"no player {player} in a {game.n_players}-player game")
    if game.obs_mode == "full":
        return ("full", game.vertex_tuple(v))
    visible = tuple(game.state_names[s] for s in game.state_idx[v, :player])
    return (int(game.turn[v]) + 1, visible)


def is_hierarchical(game: MpgGame) -> tuple[tuple[int, ...], tuple[int, int] | None]:
    """Order players coarsest observer first; witness a refinement failure if any."""
    keys = {p: observation_keys(game, p) for p in range(1, game.n_players + 1)}

    def refines(fine: int, coarse: int) -> bool:
        pairs = np.column_stack([keys[fine], keys[coarse]])
        n_pairs = len(np.unique(pairs, axis=0))
        n_fine = len(np.unique(keys[fine]))
        return n_pairs == n_fine

    order = sorted(range(1, game.n_players + 1), key=lambda p: (len(np.unique(keys[p])), p))
    for a, b in zip(order, order[1:]):
        if not refines(b, a):
            # find two vertices sharing b's class but split under a
            by_class: dict[int, int] = {}
            for v in range(game.n_vertices):
                k = int(keys[b][v])
                if k in by_class and keys[a][by_class[k]] != keys[a][v]:
                    return tuple(order), (by_class[k], v)
                by_class.setdefault(k, v)
    return tuple(order), None


def coalition_owner_mask(game: MpgGame) -> np.ndarray:
    """True where the vertex mover belongs to the existential coalition."""
    movers = game.turn + 1
    mask = np.zeros(game.n_vertices, dtype=bool)
    for p in game.coalition:
        mask |= movers == p
    return mask


def canonical_dump(game: MpgGame) -> str:
    """Human-readable listing in canonical vertex order; quadratic, for small games."""
    perm = sorted(
        range(game.n_vertices),
        key=lambda v: (tuple(int(s) for s in game.state_idx[v]), int(game.q_idx[v]), int(game.turn[v])),
    )
    inv = {v: i for i, v in enumerate(perm)}
    lines = [
        "mpg-format: 1",
        f"players: {game.n_players}",
        "vars: " + " ".join(game.trace_vars),
        "coalition: " + " ".join(str(p) for p in sorted(game.coalition)),
        "directions: " + " ".join(game.directions),
        "states: " + " ".join(game.state_names),
        "aps: " + " ".join(f"{ap}[{var}]" for ap, var in game.dpa.aps),
        f"observation: {game.obs_mode}",
        f"init: {inv[game.v_init]}",
    ]
    for v in perm:
        tup = game.vertex_tuple(v)
        lines.append(f"vertex {inv[v]} {tup}: color {int(game.color[v])}")
        for j, d in enumerate(game.directions):
            lines.append(f"  {d} -> {inv[int(game.succ[v, j])]}")
    return "\n".join(lines) + "\n"


def game_hash(game: MpgGame) -> str:
    """16-hex digest of the canonically ordered arena, streamed through blake2b."""
    order = np.lexsort(
        tuple([game.turn, game.q_idx] + [game.state_idx[:, p] for p in range(game.n_players - 1, -1, -1)])
    )
    inv = np.empty(game.n_vertices, dtype=np.int64)
    inv[order] = np.arange(game.n_vertices)
    header = "\n".join(
        [
            "mpg-format: 1",
            f"players: {game.n_players}",
            "vars: " + " ".join(game.trace_vars),
            "coalition: " + " ".join(str(p) for p in sorted(game.coalition)),
            "directions: " + " ".join(game.directions),
            "states: " + " ".join(game.state_names),
            "aps: " + " ".join(f"{ap}[{var}]" for ap, var in game.dpa.aps),
            f"observation: {game.obs_mode}",
            f"init: {int(inv[game.v_init])}",
        ]
    )
    h = hashlib.blake2b(digest_size=8)
    h.update(header.encode())
    for arr in (
        game.state_idx[order],
        game.q_idx[order],
        game.turn[order],
        game.color[order],
        inv[game.succ[order]],
    ):
        h.update(np.ascontiguousarray(arr, dtype=np.int64).tobytes())
    return h.hexdigest()
