"""Deterministic parity automata (min-even) and their supporting passes."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from ..errors import ParseError, ValidationError
from .nba import IndexedAp, Letter, letter_id


@dataclass(frozen=True)
class Dpa:
    """Deterministic total automaton; a run wins iff the least color repeating forever is even."""

    aps: tuple[IndexedAp, ...]
    n_states: int
    initial: int
    delta: list[list[int]]
    colors: list[int]

    def step(self, state: int, letter: Letter) -> int:
        return self.delta[state][letter_id(self.aps, letter)]

    def n_letters(self) -> int:
        return 1 << len(self.aps)


def dpa_lasso_accepts(dpa: Dpa, stem: Sequence[Letter], loop: Sequence[Letter]) -> bool:
    """Decide acceptance of the ultimately periodic word stem . loop^omega."""
    if not loop:
        raise ValidationError("lasso loop must be nonempty")
    state = dpa.initial
    for letter in stem:
        state = dpa.step(state, letter)
    seen: dict[tuple[int, int], int] = {}
    entered: list[int] = []
    t = 0
    while (state, t % len(loop)) not in seen:
        seen[(state, t % len(loop))] = t
        state = dpa.step(state, loop[t % len(loop)])
        entered.append(dpa.colors[state])
        t += 1
    start = seen[(state, t % len(loop))]
    return min(entered[start:t]) % 2 == 0


def complement_dpa(dpa: Dpa) -> Dpa:
    """Accepts exactly the words the input rejects."""
    return Dpa(
        aps=dpa.aps,
        n_states=dpa.n_states,
        initial=dpa.initial,
        delta=[row[:] for row in dpa.delta],
        colors=[c + 1 for c in dpa.colors],
    )


def compress_colors(dpa: Dpa) -> Dpa:
    """Renumber colors into the smallest parity-equivalent range."""
    distinct = sorted(set(dpa.colors))
    mapping: dict[int, int] = {}
    new = 0
    for pos, c in enumerate(distinct):
        if pos == 0:
            new = c % 2
        elif c % 2 != distinct[pos - 1] % 2:
            new += 1
        mapping[c] = new
    return Dpa(dpa.aps, dpa.n_states, dpa.initial, [row[:] for row in dpa.delta], [mapping[c] for c in dpa.colors])


def _scc_list(vertices: list[int], succ: dict[int, list[int]]) -> list[list[int]]:
    visited: set[int] = set()
    finish: list[int] = []
    for v0 in vertices:
        if v0 in visited:
            continue
        visited.add(v0)
        stack: list[tuple[int, Iterable[int]]] = [(v0, iter(succ[v0]))]
        while stack:
            v, it = stack[-1]
            advanced = False
            for w in it:
                if w not in visited:
                    visited.add(w)
                    stack.append((w, iter(succ[w])))
                    advanced = True
                    break
            if not advanced:
                finish.append(v)
                stack.pop()
    pred: dict[int, list[int]] = {v: [] for v in vertices}
    for v in vertices:
        for w in succ[v]:
            pred[w].append(v)
    comps: list[list[int]] = []
    assigned: set[int] = set()
    for v0 in reversed(finish):
        if v0 in assigned:
            continue
        comp = [v0]
        assigned.add(v0)
        stack2 = [v0]
        while stack2:
            v = stack2.pop()
            for w in pred[v]:
                if w not in assigned:
                    assigned.add(w)
                    comp.append(w)
                    stack2.append(w)
        comps.append(comp)
    return comps


def _backward_closure(dpa: Dpa, targets: set[int]) -> set[int]:
    preds: list[list[int]] = [[] for _ in range(dpa.n_states)]
    for q, row in enumerate(dpa.delta):
        for t in row:
            preds[t].append(q)
    out = set(targets)
    stack = list(targets)
    while stack:
        v = stack.pop()
        for p in preds[v]:
            if p not in out:
                out.add(p)
                stack.append(p)
    return out


def empty_states(dpa: Dpa) -> frozenset[int]:
    """States from which the automaton accepts no word at all."""
    core: set[int] = set()
    for c in sorted(set(dpa.colors)):
        if c % 2:
            continue
        sub = [q for q in range(dpa.n_states) if dpa.colors[q] >= c]
        inside = set(sub)
        succ = {q: [t for t in dpa.delta[q] if t in inside] for q in sub}
        for comp in _scc_list(sub, succ):
            nontrivial = len(comp) > 1 or comp[0] in succ[comp[0]]
            if nontrivial and any(dpa.colors[q] == c for q in comp):
                core.update(comp)
    nonempty = _backward_closure(dpa, core)
    return frozenset(q for q in range(dpa.n_states) if q not in nonempty)


def universal_states(dpa: Dpa) -> frozenset[int]:
    """States from which every word is accepted."""
    return empty_states(complement_dpa(dpa))


def reach_trim(dpa: Dpa) -> Dpa:
    """Drop states unreachable from the initial state."""
    seen = {dpa.initial}
    stack = [dpa.initial]
    while stack:
        q = stack.pop()
        for t in dpa.delta[q]:
            if t not in seen:
                seen.add(t)
                stack.append(t)
    if len(seen) == dpa.n_states:
        return dpa
    order = sorted(seen)
    remap = {q: i for i, q in enumerate(order)}
    delta = [[remap[t] for t in dpa.delta[q]] for q in order]
    colors = [dpa.colors[q] for q in order]
    return Dpa(dpa.aps, len(order), remap[dpa.initial], delta, colors)


def collapse_trivial(dpa: Dpa) -> Dpa:
    """Reroute states that reject everything or accept everything into shared sinks."""
    empty = empty_states(dpa)
    universal = universal_states(dpa)
    if not empty and not universal:
        return dpa
    keep = [q for q in range(dpa.n_states) if q not in empty and q not in universal]
    remap = {q: i for i, q in enumerate(keep)}
    n = len(keep)
    bot = top = -1
    if empty:
        bot = n
        n += 1
    if universal:
        top = n
        n += 1

    def target(t: int) -> int:
        if t in remap:
            return remap[t]
        return bot if t in empty else top

    width = dpa.n_letters()
    delta = [[target(t) for t in dpa.delta[q]] for q in keep]
    colors = [dpa.colors[q] for q in keep]
    if bot >= 0:
        delta.append([bot] * width)
        colors.append(1)
    if top >= 0:
        delta.append([top] * width)
        colors.append(0)
    return reach_trim(Dpa(dpa.aps, n, target(dpa.initial), delta, colors))


def bisim_quotient(dpa: Dpa) -> Dpa:
    """Merge states with equal color and letter-wise identical behavior, by partition refinement."""
    palette = {c: i for i, c in enumerate(sorted(set(dpa.colors)))}
    block = [palette[c] for c in dpa.colors]
    n_blocks = len(palette)
    while True:
        sigs: dict[tuple, int] = {}
        refined = []
        for q in range(dpa.n_states):
            sig = (block[q], tuple(block[t] for t in dpa.delta[q]))
            if sig not in sigs:
                sigs[sig] = len(sigs)
            refined.append(sigs[sig])
        block = refined
        if len(sigs) == n_blocks:
            break
        n_blocks = len(sigs)
    reps: list[int] = [-1] * n_blocks
    for q in range(dpa.n_states):
        if reps[block[q]] < 0:
            reps[block[q]] = q
    delta = [[block[t] for t in dpa.delta[reps[b]]] for b in range(n_blocks)]
    colors = [dpa.colors[reps[b]] for b in range(n_blocks)]
    return Dpa(dpa.aps, n_blocks, block[dpa.initial], delta, colors)


def _parity_formula(k: int) -> str:
    def nest(i: int) -> str:
        atom = f"Inf({i})" if i % 2 == 0 else f"Fin({i})"
        if i == k - 1:
            return atom
        rest = nest(i + 1)
        return f"{atom} | ({rest})" if i % 2 == 0 else f"{atom} & ({rest})"

    return nest(0)


def _letter_expr(mask: int, n_aps: int) -> str:
    if n_aps == 0:
        return "t"
    terms = []
    for i in range(n_aps):
        terms.append(str(i) if mask >> i & 1 else f"!{i}")
    return " & ".join(terms)


def dpa_to_hoa(dpa: Dpa, name: str | None = None) -> str:
    """Serialize into HOA v1 with state-based min-even parity acceptance."""
    k = max(dpa.colors) + 1 if dpa.colors else 1
    lines = ["HOA: v1"]
    if name:
        lines.append(f'name: "{name}"')
    lines.append(f"States: {dpa.n_states}")
    lines.append(f"Start: {dpa.initial}")
    names = " ".join(f'"{ap}[{var}]"' for ap, var in dpa.aps)
    lines.append(f"AP: {len(dpa.aps)} {names}".rstrip())
    lines.append(f"acc-name: parity min even {k}")
    lines.append(f"Acceptance: {k} {_parity_formula(k)}")
    lines.append("properties: trans-labels explicit-labels state-acc colored deterministic complete")
    lines.append("--BODY--")
    for q in range(dpa.n_states):
        lines.append(f"State: {q} {{{dpa.colors[q]}}}")
        for mask, t in enumerate(dpa.delta[q]):
            lines.append(f"[{_letter_expr(mask, len(dpa.aps))}] {t}")
    lines.append("--END--")
    return "\n".join(lines) + "\n"


class _LabelExpr:
    """Boolean formula over AP indices, evaluated against a letter bitmask."""

    def __init__(self, text: str, n_aps: int, line: int):
        self.tokens = re.findall(r"\d+|[tf!&|()]", text)
        if "".join(self.tokens).replace(" ", "") != text.replace(" ", ""):
            raise ParseError("bad label expression", line, 1)
        self.pos = 0
        self.n_aps = n_aps
        self.line = line
        self.masks = [mask for mask in range(1 << n_aps) if self._parse_or(mask, reset=True)]

    def _peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _parse_or(self, mask: int, reset: bool = False) -> bool:
        if reset:
            self.pos = 0
        value = self._parse_and(mask)
        while self._peek() == "|":
            self.pos += 1
            value = self._parse_and(mask) or value
        if reset and self.pos != len(self.tokens):
            raise ParseError("trailing tokens in label expression", self.line, 1)
        return value

    def _parse_and(self, mask: int) -> bool:
        value = self._parse_unary(mask)
        while self._peek() == "&":
            self.pos += 1
            value = self._parse_unary(mask) and value
        return value

    def _parse_unary(self, mask: int) -> bool:
        tok = self._peek()
        if tok is None:
            raise ParseError("unfinished label expression", self.line, 1)
        self.pos += 1
        if tok == "!":
            return not self._parse_unary(mask)
        if tok == "(":
            value = self._parse_or(mask)
            if self._peek() != ")":
                raise ParseError("unbalanced parentheses in label", self.line, 1)
            self.pos += 1
            return value
        if tok == "t":
            return True
        if tok == "f":
            return False
        if tok.isdigit():
            idx = int(tok)
            if idx >= self.n_aps:
                raise ParseError(f"AP index {idx} out of range", self.line, 1)
            return bool(mask >> idx & 1)
        raise ParseError(f"unexpected token {tok!r} in label", self.line, 1)


_AP_NAME = re.compile(r'^"(\w+)\[(\w+)\]"$')
_STATE_LINE = re.compile(r'^State:\s+(\d+)(?:\s+"[^"]*")?\s*\{(\d+)\}$')
_EDGE_LINE = re.compile(r"^\[(.*)\]\s+(\d+)$")


def hoa_to_dpa(text: str) -> Dpa:
    """Parse the HOA subset produced by dpa_to_hoa, checking determinism and totality."""
    lines = text.splitlines()
    n_states = initial = None
    aps: list[IndexedAp] = []
    saw_aps = False
    body_at = None
    for i, raw in enumerate(lines):
        line = raw.strip()
        num = i + 1
        if not line:
            continue
        if i == 0 or line.startswith("HOA:"):
            if line != "HOA: v1":
                raise ParseError("expected HOA: v1 header", num, 1)
            continue
        if line == "--BODY--":
            body_at = i + 1
            break
        key, _, rest = line.partition(":")
        rest = rest.strip()
        if key == "States":
            n_states = int(rest)
        elif key == "Start":
            if not rest.isdigit():
                raise ParseError("need a single initial state", num, 1)
            initial = int(rest)
        elif key == "AP":
            saw_aps = True
            parts = rest.split()
            for token in parts[1:]:
                m = _AP_NAME.match(token)
                if not m:
                    raise ParseError(f"unsupported AP name {token}", num, 1)
                aps.append((m.group(1), m.group(2)))
            if not parts or not parts[0].isdigit() or int(parts[0]) != len(aps):
                raise ParseError("AP count mismatch", num, 1)
        elif key == "acc-name":
            if not rest.startswith("parity min even"):
                raise ValidationError(f"unsupported acceptance {rest!r}")
    if body_at is None or n_states is None or initial is None or not saw_aps:
        raise ParseError("missing HOA header sections", len(lines), 1)
    width = 1 << len(aps)
    delta: list[list[int]] = [[-1] * width for _ in range(n_states)]
    colors = [-1] * n_states
    current = None
    for i in range(body_at, len(lines)):
        line = lines[i].strip()
        num = i + 1
        if not line:
            continue
        if line == "--END--":
            break
        state_m = _STATE_LINE.match(line)
        if state_m:
            current = int(state_m.group(1))
            if current >= n_states:
                raise ParseError("state index out of range", num, 1)
            colors[current] = int(state_m.group(2))
            continue
        edge_m = _EDGE_LINE.match(line)
        if edge_m and current is not None:
            target = int(edge_m.group(2))
            if target >= n_states:
                raise ParseError("edge target out of range", num, 1)
            for mask in _LabelExpr(edge_m.group(1), len(aps), num).masks:
                if delta[current][mask] != -1:
                    raise ValidationError(f"state {current} is nondeterministic on a letter")
                delta[current][mask] = target
            continue
        raise ParseError(f"unrecognized body line {line!r}", num, 1)
    for q in range(n_states):
        if colors[q] < 0:
            raise ValidationError(f"state {q} has no color")
        if any(t < 0 for t in delta[q]):
            raise ValidationError(f"state {q} is not total")
    if initial >= n_states:
        raise ValidationError("initial state out of range")
    return Dpa(tuple(aps), n_states, initial, delta, colors)
