"""Prophecy declarations: parsing, prefix padding, system extension, rewriting."""

from __future__ import annotations

import pytest

from hypergames.errors import ParseError, ValidationError
from hypergames.logic import (
    And,
    Atom,
    Const,
    Globally,
    HyperLtlFormula,
    Iff,
    Implies,
    Next,
    parse_hyperltl,
    parse_ltl_body,
)
from hypergames.model import parse_ks
from hypergames.oracle import LassoBudget, oracle_check
from hypergames.prophecy import (
    ProphecyEntry,
    ProphecyFamily,
    alternates,
    apply_prophecy,
    check_alternating,
    extend_ks,
    pad_alternating,
    parse_prophecy_family,
    render_prophecy_family,
    rewrite_formula,
)

from conftest import read_fixture


def test_parse_single_entry(ex4):
    fam = parse_prophecy_family(read_fixture("ex5.proph"), ex4)
    assert [(e.index, e.name) for e in fam.entries] == [(1, "p")]
    assert fam.entries[0].body == Next(Atom("a", "p1"))
    assert fam.names == ("p",)


def test_parse_two_entries(ex6):
    fam = parse_prophecy_family(read_fixture("ex7.proph"), ex6)
    assert [(e.index, e.name) for e in fam.entries] == [(1, "p"), (3, "pp")]
    assert fam.entries[1].body == parse_ltl_body(
        "G ((a[p1] <-> a[p2]) && (a[p2] <-> a[p3]))"
    )


def test_parse_auto_names(ex6):
    fam = parse_prophecy_family("at 1: X a[p1]\nat 3: a[p3]\n", ex6)
    assert fam.names == ("__p0", "__p1")


def test_parse_comments_and_blanks(ex4):
    fam = parse_prophecy_family("\n# nothing yet\n\nat 1 as p: a[p1]  # trailing\n", ex4)
    assert fam.names == ("p",)
    assert fam.entries[0].body == Atom("a", "p1")


def test_parse_rejects_even_index(ex4):
    with pytest.raises(ParseError, match="does not name a universally quantified") as exc:
        parse_prophecy_family("at 2 as p: a[p1]", ex4)
    assert exc.value.line == 1


def test_parse_rejects_out_of_range_index(ex4):
    with pytest.raises(ParseError, match="does not name a universally quantified") as exc:
        parse_prophecy_family("# leading comment\nat 3 as p: a[p1]", ex4)
    assert exc.value.line == 2


def test_parse_rejects_future_variable(ex4):
    # a prophecy may only look at traces quantified at or before its position
    with pytest.raises(ParseError, match="quantified later at position 2"):
        parse_prophecy_family("at 1 as p: X a[p2]", ex4)


def test_parse_rejects_unknown_variable(ex4):
    with pytest.raises(ParseError, match="unknown trace variable 'p9'"):
        parse_prophecy_family("at 1 as p: a[p9]", ex4)


def test_parse_rejects_duplicate_name(ex6):
    with pytest.raises(ParseError, match="collides") as exc:
        parse_prophecy_family("at 1 as p: a[p1]\nat 3 as p: a[p3]", ex6)
    assert exc.value.line == 2


def test_parse_rejects_name_clashing_with_body_ap(ex4):
    with pytest.raises(ParseError, match="collides"):
        parse_prophecy_family("at 1 as a: X a[p1]", ex4)


def test_parse_rejects_prophecy_name_reused_as_proposition(ex6):
    with pytest.raises(ParseError, match="used as a plain proposition") as exc:
        parse_prophecy_family("at 1 as p: X a[p1]\nat 3 as pp: p[p1]", ex6)
    assert exc.value.line == 2


def test_parse_rejects_malformed_line(ex4):
    with pytest.raises(ParseError, match="expected 'at") as exc:
        parse_prophecy_family("prophecy 1: a[p1]", ex4)
    assert exc.value.line == 1


def test_parse_reports_inner_formula_errors(ex4):
    with pytest.raises(ParseError) as exc:
        parse_prophecy_family("at 1 as p: X (a[p1]", ex4)
    assert exc.value.line == 1


def test_parse_requires_alternating_prefix():
    f = parse_hyperltl("exists p1. forall p2. a[p1] <-> a[p2]")
    with pytest.raises(ValidationError, match="normalize with pad_alternating"):
        parse_prophecy_family("at 1 as p: a[p1]", f)


def test_render_parse_roundtrip(ex6):
    fam = parse_prophecy_family(read_fixture("ex7.proph"), ex6)
    assert parse_prophecy_family(render_prophecy_family(fam), ex6) == fam


def test_alternates_predicate(ex4, ex6, ex2):
    assert alternates(ex4) and alternates(ex6)
    assert not alternates(ex2)
    assert not alternates(HyperLtlFormula(prefix=(), body=Const(True)))
    check_alternating(ex4)


def test_pad_leaves_alternating_prefix_alone(ex4):
    padded, added = pad_alternating(ex4)
    assert padded == ex4 and added == ()


def test_pad_exists_start(ex2):
    padded, added = pad_alternating(ex2)
    assert added == ("_pad0", "_pad1")
    assert [q for q, _ in padded.prefix] == ["forall", "exists", "forall", "exists"]
    assert [v for _, v in padded.prefix] == ["_pad0", "p1", "p2", "_pad1"]


def test_pad_double_forall():
    f = parse_hyperltl("forall p1. forall p2. exists p3. a[p1]")
    padded, added = pad_alternating(f)
    assert [q for q, _ in padded.prefix] == ["forall", "exists", "forall", "exists"]
    assert added == ("_pad0",)
    assert [v for _, v in padded.prefix] == ["p1", "_pad0", "p2", "p3"]


def test_pad_trailing_forall():
    f = parse_hyperltl("forall p1. a[p1]")
    padded, added = pad_alternating(f)
    assert [v for _, v in padded.prefix] == ["p1", "_pad0"]
    assert added == ("_pad0",)


def test_pad_empty_prefix():
    padded, added = pad_alternating(HyperLtlFormula(prefix=(), body=Const(True)))
    assert [q for q, _ in padded.prefix] == ["forall", "exists"]
    assert added == ("_pad0", "_pad1")


def test_pad_skips_taken_names():
    f = parse_hyperltl("exists _pad0. G a[_pad0]")
    padded, added = pad_alternating(f)
    assert added == ("_pad1",)
    assert [v for _, v in padded.prefix] == ["_pad1", "_pad0"]


def test_pad_preserves_truth(fig1):
    budget = LassoBudget(stem_bound=3, loop_bound=2)
    for text in [
        "exists p1. forall p2. (X X X a[p1]) <-> (X X a[p2])",
        "forall p1. G (a[p1] -> F a[p1])",
        "exists p1. F a[p1]",
    ]:
        f = parse_hyperltl(text)
        padded, _ = pad_alternating(f)
        # vacuous quantifiers never change what the body says
        assert oracle_check(fig1, padded, budget) == oracle_check(fig1, f, budget)


def test_extend_ks_empty_family_is_identity(fig1):
    assert extend_ks(fig1, ProphecyFamily()) is fig1


def test_extend_ks_fig1_single_bit(fig1, ex4):
    fam = parse_prophecy_family(read_fixture("ex5.proph"), ex4)
    ks5 = extend_ks(fig1, fam)
    # state index runs over source states first, announcement masks second
    assert ks5.states == ("s_A__0", "s_A__1", "s_B__0", "s_B__1")
    assert ks5.directions == ("A__0", "A__1", "B__0", "B__1")
    assert ks5.aps == ("a", "p")
    assert ks5.init == "s_init"
    # the initial state keeps its bare label; extended states add their bits
    assert ks5.labels["s_init"] == frozenset()
    assert ks5.labels["s_A__1"] == frozenset({"p"})
    assert ks5.labels["s_B__1"] == frozenset({"a", "p"})
    assert ks5.labels["s_B__0"] == frozenset({"a"})
    # the chosen direction stamps its bits onto the target, not the source
    assert ks5.trans[("s_init", "A__1")] == "s_A__1"
    assert ks5.trans[("s_A__1", "B__0")] == "s_B__0"
    assert ks5.trans[("s_A__0", "B__1")] == "s_B__1"


def test_extend_ks_two_bits_order(fig1, ex6):
    fam = parse_prophecy_family(read_fixture("ex7.proph"), ex6)
    ks7 = extend_ks(fig1, fam)
    assert len(ks7.states) == 8 and len(ks7.directions) == 8
    # bit j of the suffix carries the j-th declared announcement
    assert ks7.labels["s_B__10"] == frozenset({"a", "p"})
    assert ks7.labels["s_B__01"] == frozenset({"a", "pp"})
    assert ks7.labels["s_A__11"] == frozenset({"p", "pp"})
    assert ks7.trans[("s_A__11", "B__01")] == "s_B__01"


def test_extend_ks_grows_separator_on_collision(ex4):
    ks = parse_ks(
        "aps: a;\ndirections: d;\n"
        "state s_init init { labels {}; d -> s; }\n"
        "state s { labels {}; d -> s__1; }\n"
        "state s__1 { labels {a}; d -> s; }\n"
    )
    fam = parse_prophecy_family("at 1 as p: a[p1]", ex4)
    ext = extend_ks(ks, fam)
    # "s" + "__" + "1" would collide with the existing state s__1
    assert "s___0" in ext.states and "s__1___1" in ext.states
    assert ext.directions == ("d___0", "d___1")


def test_extend_ks_rejects_model_proposition(fig1):
    fam = ProphecyFamily((ProphecyEntry(1, "a", Atom("a", "p1")),))
    with pytest.raises(ValidationError, match="collides with a model proposition"):
        extend_ks(fig1, fam)


def test_extension_projects_back(fig1, ex6):
    fam = parse_prophecy_family(read_fixture("ex7.proph"), ex6)
    ext = extend_ks(fig1, fam)
    drop = frozenset(fam.names)
    # every direction word of the extension follows an original word letter by letter
    for d1 in ext.directions:
        for d2 in ext.directions:
            s, t = "s_init", "s_init"
            for d in (d1, d2, d1):
                s = ext.trans[(s, d)]
                t = fig1.trans[(t, d.split("__")[0])]
                assert ext.labels[s] - drop == fig1.labels[t]


def test_extension_realizes_every_announcement(fig1, ex4):
    fam = parse_prophecy_family(read_fixture("ex5.proph"), ex4)
    ext = extend_ks(fig1, fam)
    # conversely each original move stays available under both announcements
    for (s, d), t in fig1.trans.items():
        if s == fig1.init:
            continue
        for m, bit in enumerate("01"):
            assert ext.trans[(f"{s}__{bit}", f"{d}__{bit}")] == f"{t}__{bit}"


def test_rewrite_formula_single(ex4):
    fam = parse_prophecy_family(read_fixture("ex5.proph"), ex4)
    out = rewrite_formula(ex4, fam)
    premise = Iff(Atom("p", "p1"), Next(Atom("a", "p1")))
    assert out.prefix == ex4.prefix
    assert out.body == Implies(Next(Globally(premise)), ex4.body)


def test_rewrite_formula_two_entries(ex6):
    fam = parse_prophecy_family(read_fixture("ex7.proph"), ex6)
    out = rewrite_formula(ex6, fam)
    t1 = Iff(Atom("p", "p1"), fam.entries[0].body)
    t2 = Iff(Atom("pp", "p3"), fam.entries[1].body)
    assert out.body == Implies(Next(Globally(And(t1, t2))), ex6.body)


def test_rewrite_formula_empty_family(ex4):
    out = rewrite_formula(ex4, ProphecyFamily())
    assert out.body == Implies(Next(Globally(Const(True))), ex4.body)


def test_rewrite_requires_alternating_prefix(ex2):
    with pytest.raises(ValidationError, match="normalize with pad_alternating"):
        rewrite_formula(ex2, ProphecyFamily())


def test_rewrite_rejects_stale_entry(ex4):
    fam = ProphecyFamily((ProphecyEntry(3, "p", Atom("a", "p1")),))
    with pytest.raises(ValidationError, match="does not name a universal position"):
        rewrite_formula(ex4, fam)


def test_apply_prophecy_bundles_both(fig1, ex4):
    fam = parse_prophecy_family(read_fixture("ex5.proph"), ex4)
    ks5, f5 = apply_prophecy(fig1, ex4, fam)
    assert ks5 == extend_ks(fig1, fam)
    assert f5 == rewrite_formula(ex4, fam)
