"""Future-telling announcements: declaration files, system extension, formula rewriting."""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass

from .errors import ParseError, ValidationError
from .logic import (
    KEYWORDS,
    And,
    Atom,
    Const,
    Globally,
    HyperLtlFormula,
    Iff,
    Implies,
    LtlBody,
    Next,
    indexed_aps,
    parse_ltl_body,
    render_body,
    trace_vars,
)
from .model import IDENT_CHARS, IDENT_START, KripkeStructure


@dataclass(frozen=True)
class ProphecyEntry:
    """One announced future condition, carried by a fresh proposition on an odd-position trace."""

    index: int  # 1-based position in the quantifier prefix; always odd
    name: str  # announcement proposition, disjoint from the model's propositions
    body: LtlBody  # condition over traces quantified at positions 1..index


@dataclass(frozen=True)
class ProphecyFamily:
    """Ordered prophecy entries declared against one formula's prefix."""

    entries: tuple[ProphecyEntry, ...] = ()

    @property
    def names(self) -> tuple[str, ...]:
        """Announcement proposition names in declaration order."""
        return tuple(e.name for e in self.entries)


def alternates(f: HyperLtlFormula) -> bool:
    """True when the prefix is forall/exists strictly alternating, starting forall, ending exists."""
    if not f.prefix or len(f.prefix) % 2:
        return False
    return all(q == ("forall" if i % 2 == 0 else "exists") for i, (q, _) in enumerate(f.prefix))


def check_alternating(f: HyperLtlFormula) -> None:
    """Reject prefixes that are not in the strictly alternating shape."""
    if not alternates(f):
        raise ValidationError(
            "prefix must alternate forall/exists starting with forall and ending with exists; "
            "normalize with pad_alternating first",
            construct=f.prefix,
        )


def pad_alternating(f: HyperLtlFormula) -> tuple[HyperLtlFormula, tuple[str, ...]]:
    """Insert fresh vacuous quantifiers until the prefix strictly alternates; report the inserted names."""
    taken = {v for _, v in f.prefix}
    counter = 0

    def fresh() -> str:
        nonlocal counter
        while f"_pad{counter}" in taken:
            counter += 1
        counter += 1
        return f"_pad{counter - 1}"

    out: list[tuple[str, str]] = []
    added: list[str] = []
    expected = "forall"
    for quant, var in f.prefix:
        if quant != expected:
            name = fresh()
            out.append((expected, name))
            added.append(name)
            expected = "exists" if expected == "forall" else "forall"
        out.append((quant, var))
        expected = "exists" if expected == "forall" else "forall"
    if not out:
        a, b = fresh(), fresh()
        out = [("forall", a), ("exists", b)]
        added += [a, b]
    elif out[-1][0] == "forall":
        name = fresh()
        out.append(("exists", name))
        added.append(name)
    return HyperLtlFormula(prefix=tuple(out), body=f.body), tuple(added)


_ENTRY = re.compile(r"^\s*at\s+(\d+)\s*(?:as\s+(\S+)\s*)?:(.*)$")


def _valid_name(name: str) -> bool:
    return (
        bool(name)
        and name[0] in IDENT_START
        and all(c in IDENT_CHARS for c in name)
        and name not in KEYWORDS
    )


def parse_prophecy_family(text: str, f: HyperLtlFormula) -> ProphecyFamily:
    """Parse `at <odd-index> [as <name>]: <formula>` lines against f's prefix."""
    check_alternating(f)
    var_pos = {var: i + 1 for i, (_, var) in enumerate(f.prefix)}
    seen_names: set[str] = set()
    seen_aps = {ap for ap, _ in indexed_aps(f.body)}
    entries: list[ProphecyEntry] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        m = _ENTRY.match(line)
        if m is None:
            raise ParseError("expected 'at <odd-index> [as <name>]: <formula>'", lineno, 1)
        index = int(m.group(1))
        if index % 2 == 0 or not 1 <= index <= len(f.prefix):
            raise ParseError(
                f"prophecy index {index} does not name a universally quantified position",
                lineno,
                m.start(1) + 1,
            )
        name = m.group(2) if m.group(2) is not None else f"__p{len(entries)}"
        if not _valid_name(name):
            raise ParseError(f"invalid prophecy variable name {name!r}", lineno, 1)
        try:
            body = parse_ltl_body(m.group(3))
        except ParseError as e:
            raise ParseError(e.message, lineno, m.start(3) + e.col) from None
        for var in sorted(trace_vars(body)):
            if var not in var_pos:
                raise ParseError(f"unknown trace variable {var!r} in prophecy", lineno, 1)
            if var_pos[var] > index:
                raise ParseError(
                    f"prophecy at index {index} mentions {var!r}, quantified later at position {var_pos[var]}",
                    lineno,
                    1,
                )
        own_aps = {ap for ap, _ in indexed_aps(body)}
        if name in seen_names or name in seen_aps or name in own_aps:
            raise ParseError(f"prophecy variable {name!r} collides with another proposition", lineno, 1)
        if own_aps & seen_names:
            clash = sorted(own_aps & seen_names)[0]
            raise ParseError(f"prophecy variable {clash!r} used as a plain proposition", lineno, 1)
        seen_names.add(name)
        seen_aps |= own_aps
        entries.append(ProphecyEntry(index=index, name=name, body=body))
    return ProphecyFamily(entries=tuple(entries))


def render_prophecy_family(fam: ProphecyFamily) -> str:
    """Canonical declaration text, round-trippable by parse_prophecy_family."""
    return "".join(f"at {e.index} as {e.name}: {render_body(e.body)}\n" for e in fam.entries)


def extend_ks(ks: KripkeStructure, fam: ProphecyFamily) -> KripkeStructure:
    """Product of the system with all valuations of the announcement propositions."""
    names = fam.names
    if not names:
        return ks
    for n in names:
        if n in ks.aps:
            raise ValidationError(f"prophecy variable {n!r} collides with a model proposition", construct=n)
    n_bits = len(names)
    masks = range(1 << n_bits)

    def bits(m: int) -> str:
        return "".join("1" if m >> j & 1 else "0" for j in range(n_bits))

    # Grow the separator until the generated names are fresh in both namespaces.
    sep = "__"
    taken_states = set(ks.all_states())
    taken_dirs = set(ks.directions)
    while any(f"{s}{sep}{bits(m)}" in taken_states for s in ks.states for m in masks) or any(
        f"{d}{sep}{bits(m)}" in taken_dirs for d in ks.directions for m in masks
    ):
        sep += "_"

    def sname(s: str, m: int) -> str:
        return f"{s}{sep}{bits(m)}"

    def aset(m: int) -> frozenset[str]:
        return frozenset(names[j] for j in range(n_bits) if m >> j & 1)

    states = tuple(sname(s, m) for s in ks.states for m in masks)
    directions = tuple(f"{d}{sep}{bits(m)}" for d in ks.directions for m in masks)
    labels = {ks.init: ks.labels[ks.init]}
    for s in ks.states:
        for m in masks:
            labels[sname(s, m)] = ks.labels[s] | aset(m)
    trans: dict[tuple[str, str], str] = {}
    for d in ks.directions:
        for m in masks:
            dn = f"{d}{sep}{bits(m)}"
            # The chosen direction stamps its announcement bits onto the target state.
            trans[(ks.init, dn)] = sname(ks.trans[(ks.init, d)], m)
            for s in ks.states:
                for m2 in masks:
                    trans[(sname(s, m2), dn)] = sname(ks.trans[(s, d)], m)
    return KripkeStructure(
        aps=ks.aps + names,
        directions=directions,
        init=ks.init,
        states=states,
        labels=labels,
        trans=trans,
    )


def rewrite_formula(f: HyperLtlFormula, fam: ProphecyFamily) -> HyperLtlFormula:
    """Guard the body so it is owed only when every announcement is truthful from step one on."""
    check_alternating(f)
    terms: list[LtlBody] = []
    for e in fam.entries:
        if e.index % 2 == 0 or not 1 <= e.index <= len(f.prefix):
            raise ValidationError(
                f"prophecy index {e.index} does not name a universal position", construct=e
            )
        var = f.prefix[e.index - 1][1]
        terms.append(Iff(Atom(e.name, var), e.body))
    premise: LtlBody = functools.reduce(And, terms) if terms else Const(True)
    return HyperLtlFormula(prefix=f.prefix, body=Implies(Next(Globally(premise)), f.body))


def apply_prophecy(
    ks: KripkeStructure, f: HyperLtlFormula, fam: ProphecyFamily
) -> tuple[KripkeStructure, HyperLtlFormula]:
    """Extended system and rewritten formula in one step."""
    return extend_ks(ks, fam), rewrite_formula(f, fam)
