"""Recursive attractor-based solver for min-even parity games."""

from __future__ import annotations

import sys
from dataclasses import dataclass

import numpy as np

from ..arena import MpgGame, TwoPlayerGame, coalition_owner_mask

EVEN = 0
ODD = 1


@dataclass(frozen=True)
class ParityResult:
    """Winning regions and positional strategies for both players."""

    win_even: np.ndarray
    strategy: np.ndarray

    def winner(self, v: int) -> int:
        return EVEN if self.win_even[v] else ODD


def _reverse_csr(succ: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """CSR of the reversed edge relation; parallel arrays give source and direction."""
    n, d = succ.shape
    flat = succ.ravel()
    order = np.argsort(flat, kind="stable")
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, flat + 1, 1)
    indptr = np.cumsum(indptr)
    src = (order // d).astype(np.int64)
    direction = (order % d).astype(np.int64)
    return indptr, src, direction


def solve_parity(succ: np.ndarray, owner_even: np.ndarray, colors: np.ndarray) -> ParityResult:
    """Solve the parity game with total successor table succ[v, d] (min color seen
    infinitely often even means the Even player wins).  strategy[v] holds a winning
    direction index for v's owner whenever that owner wins v, else -1."""
    n, d = succ.shape
    indptr, rev_src, rev_dir = _reverse_csr(succ)
    strategy = np.full(n, -1, dtype=np.int64)
    owner_of = np.where(owner_even, EVEN, ODD)

    def attract(mask: np.ndarray, base: np.ndarray, player: int) -> np.ndarray:
        """Subset of mask from which player forces a visit to base; records the
        pulling direction for player-owned vertices gained along the way."""
        attr = base.copy()
        # opponent vertices enter only once every in-mask successor is attracted
        remaining = np.zeros(n, dtype=np.int64)
        opp = mask & (owner_of != player)
        if opp.any():
            remaining[opp] = mask[succ[opp]].sum(axis=1)
        frontier = np.flatnonzero(base)
        while frontier.size:
            cnt = indptr[frontier + 1] - indptr[frontier]
            total = int(cnt.sum())
            if total == 0:
                break
            # concatenated reverse-edge ranges of the whole frontier
            offs = np.repeat(np.cumsum(cnt) - cnt, cnt)
            eidx = np.repeat(indptr[frontier], cnt) + (np.arange(total) - offs)
            vs = rev_src[eidx]
            ds = rev_dir[eidx]
            live = mask[vs] & ~attr[vs]
            vs = vs[live]
            ds = ds[live]
            mine = owner_of[vs] == player
            pv = vs[mine]
            if pv.size:
                new_p, first = np.unique(pv, return_index=True)
                attr[new_p] = True
                strategy[new_p] = ds[mine][first]
            else:
                new_p = pv
            ov = vs[~mine]
            if ov.size:
                cand, dec = np.unique(ov, return_counts=True)
                remaining[cand] -= dec
                new_o = cand[(remaining[cand] <= 0) & ~attr[cand]]
                attr[new_o] = True
            else:
                new_o = ov
            frontier = np.concatenate((new_p, new_o))
        return attr

    def rec(mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if not mask.any():
            empty = np.zeros(n, dtype=bool)
            return empty, empty.copy()
        c = int(colors[mask].min())
        j = c % 2
        targets = mask & (colors == c)
        attracted = attract(mask, targets, j)
        win = list(rec(mask & ~attracted))
        if not win[1 - j].any():
            # j controls everything: from targets stay inside mask arbitrarily
            rows = np.flatnonzero(targets & (owner_of == j))
            if rows.size:
                inside = mask[succ[rows]]
                has = inside.any(axis=1)
                strategy[rows[has]] = np.argmax(inside[has], axis=1)
            win[j] = mask.copy()
            return win[0], win[1]
        escape = attract(mask, win[1 - j], 1 - j)
        win2 = list(rec(mask & ~escape))
        win2[1 - j] = win2[1 - j] | escape
        return win2[0], win2[1]

    limit = sys.getrecursionlimit()
    if limit < n + 1000:
        sys.setrecursionlimit(n + 1000)
    try:
        win_even, _ = rec(np.ones(n, dtype=bool))
    finally:
        sys.setrecursionlimit(limit)
    return ParityResult(win_even=win_even, strategy=strategy)


def solve_two_player(game: TwoPlayerGame) -> ParityResult:
    """Solve the universal-vs-existential game; the verifier (turn 2) plays Even."""
    n = len(game.vertices)
    succ = np.array(
        [[game.succ[v][d] for d in game.directions] for v in range(n)], dtype=np.int64
    )
    owner_even = np.array([vert[3] == 2 for vert in game.vertices], dtype=bool)
    colors = np.array(game.color, dtype=np.int64)
    return solve_parity(succ, owner_even, colors)


def solve_mpg_full_info(game: MpgGame) -> ParityResult:
    """Relax the multiplayer game to perfect information, coalition vs the rest."""
    owner_even = coalition_owner_mask(game)
    colors = np.asarray(game.color, dtype=np.int64)
    return solve_parity(np.asarray(game.succ, dtype=np.int64), owner_even, colors)
