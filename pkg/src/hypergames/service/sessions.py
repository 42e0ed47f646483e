"""Interactive proof sessions: humans steer coalition copies under their own observation."""

from __future__ import annotations

import random
import threading
import uuid
from dataclasses import dataclass, field

from ..arena import MpgGame, build_mpg, observation_class
from ..automata import ltl_to_dpa
from ..certificate import StrategyProfile, obs_to_text, parse_certificate
from ..errors import ValidationError
from ..logic import indexed_aps, parse_hyperltl
from ..model import KripkeStructure, parse_ks
from ..prophecy import apply_prophecy, parse_prophecy_family
from ..solver.zielonka import solve_mpg_full_info

DEFAULT_HORIZON = 64


@dataclass
class TranscriptRow:
    """One decision: who moved, what they saw, where they went."""

    step: int
    player: int
    obs: str
    direction: str
    by: str  # "human", "engine", or "opponent"


class RandomPolicy:
    """Seeded uniform choice over directions."""

    kind = "random"

    def __init__(self, seed: int):
        self.rng = random.Random(seed)

    def choose(self, session: Session, player: int) -> str:
        return self.rng.choice(session.game.directions)


class AdversarialPolicy:
    """Spoiling moves from the perfect-information relaxation.

    Stronger than any observation-restricted opponent, so it is a demonstration
    aid only; verdicts always come from the solver."""

    kind = "adversarial"

    def __init__(self, game: MpgGame):
        self.strategy = solve_mpg_full_info(game).strategy

    def choose(self, session: Session, player: int) -> str:
        k = int(self.strategy[session.vertex])
        return session.game.directions[k if k >= 0 else 0]


class CertificatePolicy:
    """Replay of a parsed strategy profile; tracks one memory state per player."""

    kind = "certificate"

    def __init__(self, profile: StrategyProfile):
        self.profile = profile
        self.memory = {p: profile.memories[p][0] for p in profile.coalition}

    def choose(self, session: Session, player: int) -> str:
        if player not in self.memory:
            raise ValidationError(f"certificate holds no strategy for player {player}")
        mem = self.memory[player]
        obs = observation_class(session.game, session.vertex, player)
        entry = self.profile.tables[player].get((mem, obs))
        if entry is None:
            raise ValidationError(
                f"certificate has no rule at memory {mem} for {obs_to_text(obs)}"
            )
        direction, nxt = entry
        self.memory[player] = nxt
        return direction


@dataclass
class Session:
    """One play of the n-player game, advanced strictly serially."""

    sid: str
    ks: KripkeStructure
    game: MpgGame
    humans: frozenset[int]
    horizon: int
    prophecy_names: tuple[str, ...]
    opponent: RandomPolicy | AdversarialPolicy
    assist: RandomPolicy | CertificatePolicy | None
    vertex: int = 0
    step: int = 0
    closed: bool = False
    transcript: list[TranscriptRow] = field(default_factory=list)
    visited: list[int] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def mover(self) -> int:
        return int(self.game.turn[self.vertex]) + 1

    @property
    def round(self) -> int:
        return self.step // self.game.n_players


def _make_opponent(game: MpgGame, spec: dict) -> RandomPolicy | AdversarialPolicy:
    kind = spec.get("kind", "random")
    if kind == "random":
        return RandomPolicy(int(spec.get("seed", 0)))
    if kind == "adversarial":
        return AdversarialPolicy(game)
    raise ValidationError(f"unknown opponent policy {kind!r}")


def _make_assist(spec: dict | None) -> RandomPolicy | CertificatePolicy | None:
    if spec is None:
        return None
    kind = spec.get("kind")
    if kind == "random":
        return RandomPolicy(int(spec.get("seed", 0)))
    if kind == "certificate":
        text = spec.get("certificate", "")
        if not text.strip():
            raise ValidationError("certificate policy needs a certificate text")
        return CertificatePolicy(parse_certificate(text).profile)
    raise ValidationError(f"unknown assist policy {kind!r}")


def create_session(
    ks_text: str,
    formula_text: str,
    prophecy_text: str = "",
    human_players: tuple[int, ...] = (),
    opponent: dict | None = None,
    assist: dict | None = None,
    horizon: int = DEFAULT_HORIZON,
    obs_mode: str = "hierarchical",
) -> Session:
    """Parse inputs, build the arena, and advance to the first human turn."""
    if horizon < 1:
        raise ValidationError("horizon must be >= 1")
    ks = parse_ks(ks_text)
    f = parse_hyperltl(formula_text)
    names: tuple[str, ...] = ()
    if prophecy_text.strip():
        fam = parse_prophecy_family(prophecy_text, f)
        ks, f = apply_prophecy(ks, f, fam)
        names = fam.names
    dpa = ltl_to_dpa(f.body, sorted(indexed_aps(f.body)))
    game = build_mpg(ks, f, dpa, obs_mode=obs_mode)
    humans = frozenset(int(p) for p in human_players)
    outsiders = humans - game.coalition
    if outsiders:
        raise ValidationError(
            f"human players {sorted(outsiders)} are not in the coalition {sorted(game.coalition)}"
        )
    session = Session(
        sid=uuid.uuid4().hex[:12],
        ks=ks,
        game=game,
        humans=humans,
        horizon=horizon,
        prophecy_names=names,
        opponent=_make_opponent(game, opponent or {}),
        assist=_make_assist(assist),
    )
    session.visited.append(session.vertex)
    _run_automation(session)
    return session


def _advance(session: Session, player: int, direction: str, by: str) -> None:
    if direction not in session.game.directions:
        raise ValidationError(f"unknown direction {direction!r}")
    j = session.game.directions.index(direction)
    obs = observation_class(session.game, session.vertex, player)
    session.transcript.append(
        TranscriptRow(step=session.step, player=player, obs=obs_to_text(obs), direction=direction, by=by)
    )
    session.vertex = int(session.game.succ[session.vertex, j])
    session.visited.append(session.vertex)
    session.step += 1
    if session.step >= session.horizon:
        session.closed = True


def _run_automation(session: Session) -> None:
    """Let non-human players move until a human turn comes up or the play closes.

    Non-human coalition copies follow the assist policy when one is configured;
    everything else (and the coalition too, absent an assist) plays the opponent
    policy."""
    while not session.closed and session.mover not in session.humans:
        mover = session.mover
        if mover in session.game.coalition and session.assist is not None:
            direction = session.assist.choose(session, mover)
            _advance(session, mover, direction, by="engine")
        else:
            direction = session.opponent.choose(session, mover)
            _advance(session, mover, direction, by="opponent")


def apply_move(session: Session, player: int, direction: str) -> None:
    """One human decision followed by automated opponents."""
    if session.closed:
        raise ValidationError("session is closed")
    if player not in session.humans:
        raise PermissionError(f"player {player} is not a declared human player")
    if session.mover != player:
        raise PermissionError(f"it is player {session.mover}'s turn, not player {player}'s")
    _advance(session, player, direction, by="human")
    _run_automation(session)


def auto_move(session: Session, player: int) -> None:
    """Engine fills one human turn using the configured assist policy."""
    if session.closed:
        raise ValidationError("session is closed")
    if player not in session.humans:
        raise PermissionError(f"player {player} is not a declared human player")
    if session.mover != player:
        raise PermissionError(f"it is player {session.mover}'s turn, not player {player}'s")
    if session.assist is None:
        raise ValidationError("no assist policy configured")
    direction = session.assist.choose(session, player)
    _advance(session, player, direction, by="engine")
    _run_automation(session)


def view_payload(session: Session, player: int) -> dict:
    """Everything player p may see: its observation class and its own rows only."""
    if not 1 <= player <= session.game.n_players:
        raise ValidationError(f"no player {player} in a {session.game.n_players}-player game")
    if player not in session.humans:
        raise PermissionError(f"player {player} is not a declared human player")
    obs = observation_class(session.game, session.vertex, player)
    mover, copies = obs
    my_turn = not session.closed and mover == player
    visible = [{"copy": i + 1, "state": s} for i, s in enumerate(copies)]
    flags = {}
    for entry in visible:
        present = sorted(n for n in session.prophecy_names if n in session.ks.labels[entry["state"]])
        if present:
            flags[str(entry["copy"])] = present
    rows = [
        {"step": r.step, "obs": r.obs, "direction": r.direction, "by": r.by}
        for r in session.transcript
        if r.player == player
    ]
    return {
        "player": player,
        "round": session.round,
        "mover": mover,
        "copies": visible,
        "legal_directions": list(session.game.directions) if my_turn else [],
        "prophecies": flags,
        "own_transcript": rows,
        "closed": session.closed,
    }


def _cycle_summary(session: Session) -> dict:
    """Dominant color of the first vertex-repetition cycle, if one exists."""
    colors = session.game.color
    overall = min(int(colors[v]) for v in session.visited)
    first_at: dict[int, int] = {}
    for idx, v in enumerate(session.visited):
        if v in first_at:
            segment = session.visited[first_at[v] : idx]
            dominant = min(int(colors[u]) for u in segment)
            return {
                "cycle_found": True,
                "dominant_color": dominant,
                "winner": "coalition" if dominant % 2 == 0 else "opponents",
                "loop_length": len(segment),
            }
        first_at[v] = idx
    return {"cycle_found": False, "dominant_color": overall, "winner": None, "loop_length": 0}


def transcript_payload(session: Session, player: int | None) -> dict:
    """Scoped rows for a human; the full play (and outcome) only when nobody is human."""
    if player is not None:
        if not 1 <= player <= session.game.n_players:
            raise ValidationError(f"no player {player} in a {session.game.n_players}-player game")
        if player not in session.humans:
            raise PermissionError(f"player {player} is not a declared human player")
        rows = [
            {"step": r.step, "obs": r.obs, "direction": r.direction, "by": r.by}
            for r in session.transcript
            if r.player == player
        ]
        return {"session": session.sid, "player": player, "rows": rows, "closed": session.closed}
    if session.humans:
        raise PermissionError("full transcript is available only for fully automated sessions")
    rows = [
        {"step": r.step, "player": r.player, "obs": r.obs, "direction": r.direction, "by": r.by}
        for r in session.transcript
    ]
    out = {
        "session": session.sid,
        "rows": rows,
        "closed": session.closed,
        "final_vertex": list(session.game.vertex_tuple(session.vertex)),
        "dominant_color_so_far": min(int(session.game.color[v]) for v in session.visited),
    }
    if session.closed:
        out["outcome"] = _cycle_summary(session)
    return out


def session_summary(session: Session) -> dict:
    """Public facts fixed at creation time."""
    return {
        "id": session.sid,
        "players": session.game.n_players,
        "trace_vars": list(session.game.trace_vars),
        "coalition": sorted(session.game.coalition),
        "humans": sorted(session.humans),
        "directions": list(session.game.directions),
        "prophecies": list(session.prophecy_names),
        "horizon": session.horizon,
        "closed": session.closed,
    }


class SessionStore:
    """Process-local registry; per-session locks give the serialization contract."""

    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def add(self, session: Session) -> None:
        with self._lock:
            self._sessions[session.sid] = session

    def get(self, sid: str) -> Session:
        with self._lock:
            session = self._sessions.get(sid)
        if session is None:
            raise KeyError(sid)
        return session
