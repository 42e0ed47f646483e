"""Kripke structures with directed transitions, their text format, and lassos."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParseError, ValidationError

IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
IDENT_CHARS = IDENT_START | set("0123456789")


@dataclass(frozen=True)
class KripkeStructure:
    """Finite system with a dedicated initial state and a total transition map."""

    aps: tuple[str, ...]
    directions: tuple[str, ...]
    init: str
    states: tuple[str, ...]  # proper states; init is not a member
    labels: dict[str, frozenset[str]]  # total on states + init
    trans: dict[tuple[str, str], str]  # total on (states + init) x directions

    def all_states(self) -> tuple[str, ...]:
        """Initial state followed by the proper states, in declaration order."""
        return (self.init,) + self.states


@dataclass(frozen=True)
class Lasso:
    """Ultimately periodic path: finite stem from s_init plus a repeated loop."""

    stem: tuple[str, ...]
    loop: tuple[str, ...]


def step(ks: KripkeStructure, s: str, d: str) -> str:
    """Apply the transition map once."""
    if s != ks.init and s not in ks.labels:
        raise ValidationError(f"unknown state {s!r}", construct=s)
    if d not in ks.directions:
        raise ValidationError(f"unknown direction {d!r}", construct=d)
    return ks.trans[(s, d)]


def has_edge(ks: KripkeStructure, a: str, b: str) -> bool:
    """True when some direction leads from a to b."""
    return any(ks.trans[(a, d)] == b for d in ks.directions)


def validate_lasso(ks: KripkeStructure, lasso: Lasso) -> None:
    """Check stem origin, membership, and edge-connectedness of a lasso."""
    if not lasso.stem or lasso.stem[0] != ks.init:
        raise ValidationError("lasso stem must begin at the initial state", construct=lasso)
    if not lasso.loop:
        raise ValidationError("lasso loop must be nonempty", construct=lasso)
    known = set(ks.all_states())
    for s in lasso.stem + lasso.loop:
        if s not in known:
            raise ValidationError(f"unknown state {s!r} in lasso", construct=lasso)
    seq = list(lasso.stem) + list(lasso.loop) + [lasso.loop[0]]
    for a, b in zip(seq, seq[1:]):
        if not has_edge(ks, a, b):
            raise ValidationError(f"no direction leads from {a!r} to {b!r}", construct=lasso)


def lasso_trace(ks: KripkeStructure, lasso: Lasso) -> tuple[tuple[frozenset[str], ...], tuple[frozenset[str], ...]]:
    """Pointwise labels of a validated lasso: (stem labels, loop labels)."""
    validate_lasso(ks, lasso)
    return (
        tuple(ks.labels[s] for s in lasso.stem),
        tuple(ks.labels[s] for s in lasso.loop),
    )


class _Scanner:
    """Character scanner with 1-based line/column tracking and '#' comments."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.line, self.col)

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.pos < len(self.text) and self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def skip_ws(self) -> None:
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c == "#":
                while self.pos < len(self.text) and self.text[self.pos] != "\n":
                    self._advance()
            elif c.isspace():
                self._advance()
            else:
                return

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def try_punct(self, token: str) -> bool:
        self.skip_ws()
        if self.text.startswith(token, self.pos):
            self._advance(len(token))
            return True
        return False

    def expect_punct(self, token: str) -> None:
        if not self.try_punct(token):
            raise self.error(f"expected {token!r}")

    def try_ident(self) -> str | None:
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] not in IDENT_START:
            return None
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] in IDENT_CHARS:
            self._advance()
        return self.text[start : self.pos]

    def expect_ident(self, what: str = "identifier") -> str:
        name = self.try_ident()
        if name is None:
            raise self.error(f"expected {what}")
        return name


def _ident_list(sc: _Scanner) -> list[str]:
    names = [sc.expect_ident()]
    while sc.try_punct(","):
        names.append(sc.expect_ident())
    return names


def parse_ks(text: str) -> KripkeStructure:
    """Parse and validate the KS text format."""
    sc = _Scanner(text)
    aps: list[str] = []
    directions: list[str] = []
    seen_headers: set[str] = set()
    while True:
        save = (sc.pos, sc.line, sc.col)
        word = sc.try_ident()
        if word in ("aps", "directions"):
            if word in seen_headers:
                raise sc.error(f"duplicate {word} header")
            seen_headers.add(word)
            sc.expect_punct(":")
            names = _ident_list(sc)
            sc.expect_punct(";")
            if len(set(names)) != len(names):
                raise sc.error(f"duplicate name in {word} header")
            if word == "aps":
                aps = names
            else:
                directions = names
        else:
            sc.pos, sc.line, sc.col = save
            break
    if not directions:
        raise sc.error("missing nonempty directions header")

    states: list[str] = []
    init: str | None = None
    labels: dict[str, frozenset[str]] = {}
    trans: dict[tuple[str, str], str] = {}
    while not sc.at_end():
        word = sc.expect_ident("'state'")
        if word != "state":
            raise sc.error(f"expected 'state', found {word!r}")
        name = sc.expect_ident("state name")
        if name in labels:
            raise sc.error(f"duplicate state {name!r}")
        is_init = False
        save = (sc.pos, sc.line, sc.col)
        mark = sc.try_ident()
        if mark == "init":
            is_init = True
        elif mark is not None:
            raise sc.error(f"expected 'init' or '{{', found {mark!r}")
        else:
            sc.pos, sc.line, sc.col = save
        sc.expect_punct("{")
        state_labels: frozenset[str] | None = None
        out: dict[str, str] = {}
        while not sc.try_punct("}"):
            item = sc.expect_ident("'labels' or direction")
            if item == "labels":
                if state_labels is not None:
                    raise sc.error(f"duplicate labels item in state {name!r}")
                sc.expect_punct("{")
                if sc.try_punct("}"):
                    state_labels = frozenset()
                else:
                    members = _ident_list(sc)
                    sc.expect_punct("}")
                    for ap in members:
                        if ap not in aps:
                            raise sc.error(f"undeclared AP {ap!r}")
                    state_labels = frozenset(members)
                sc.expect_punct(";")
            else:
                if item not in directions:
                    raise sc.error(f"unknown direction {item!r}")
                if item in out:
                    raise sc.error(f"duplicate direction {item!r} in state {name!r}")
                sc.expect_punct("->")
                target = sc.expect_ident("target state")
                sc.expect_punct(";")
                out[item] = target
        if is_init:
            if init is not None:
                raise sc.error("more than one init state")
            init = name
        else:
            states.append(name)
        labels[name] = state_labels if state_labels is not None else frozenset()
        for d, target in out.items():
            trans[(name, d)] = target

    if init is None:
        raise ParseError("no init state declared", sc.line, sc.col)
    all_names = [init] + states
    for name in all_names:
        for d in directions:
            if (name, d) not in trans:
                raise ValidationError(
                    f"state {name!r} has no transition for direction {d!r}", construct=name
                )
    for (name, d), target in trans.items():
        if target == init:
            raise ValidationError(
                f"transition {name!r} -{d}-> targets the initial state", construct=(name, d)
            )
        if target not in labels:
            raise ValidationError(f"transition targets unknown state {target!r}", construct=target)

    reached = {init}
    frontier = [init]
    while frontier:
        s = frontier.pop()
        for d in directions:
            t = trans[(s, d)]
            if t not in reached:
                reached.add(t)
                frontier.append(t)
    unreachable = [s for s in states if s not in reached]
    if unreachable:
        raise ValidationError(f"unreachable states: {', '.join(unreachable)}", construct=unreachable)

    return KripkeStructure(
        aps=tuple(aps),
        directions=tuple(directions),
        init=init,
        states=tuple(states),
        labels=labels,
        trans=trans,
    )


def render_ks(ks: KripkeStructure) -> str:
    """Canonical text rendering; parse_ks(render_ks(ks)) reproduces ks."""
    lines = []
    if ks.aps:
        lines.append(f"aps: {', '.join(ks.aps)};")
    lines.append(f"directions: {', '.join(ks.directions)};")
    for name in ks.all_states():
        head = f"state {name} init {{" if name == ks.init else f"state {name} {{"
        lines.append(head)
        members = sorted(ks.labels[name], key=ks.aps.index)
        lines.append(f"  labels {{{', '.join(members)}}};")
        for d in ks.directions:
            lines.append(f"  {d} -> {ks.trans[(name, d)]};")
        lines.append("}")
    return "\n".join(lines) + "\n"
