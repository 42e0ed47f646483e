"""Formula parsing, duality, and the reference lasso evaluator."""

from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypergames.errors import ParseError, ValidationError
from hypergames.logic import (
    And,
    Atom,
    Const,
    Eventually,
    Globally,
    HyperLtlFormula,
    Iff,
    Implies,
    Next,
    Not,
    Or,
    Until,
    eval_body_on_lassos,
    indexed_aps,
    negate_hyperltl,
    nnf,
    parse_hyperltl,
    parse_ltl_body,
    render_body,
    render_hyperltl,
    to_core,
)

E = frozenset()
A = frozenset({"a"})


def naive_eval(body, assignment, pos=0, bound=None):
    """Independent cross-check: positional recursion, exact via the periodicity window."""
    stem_len = max(len(stem) for stem, _ in assignment.values())
    lcm = 1
    for _, loop in assignment.values():
        lcm = lcm * len(loop) // math.gcd(lcm, len(loop))

    def letter(var, p):
        stem, loop = assignment[var]
        return stem[p] if p < len(stem) else loop[(p - len(stem)) % len(loop)]

    def at(body, pos):
        # positions past max(pos, stem) repeat with period lcm, so one full
        # period beyond both decides every unbounded operator exactly
        horizon = max(pos, stem_len) + lcm
        match body:
            case Atom(ap, var):
                return ap in letter(var, pos)
            case Const(v):
                return v
            case Not(sub):
                return not at(sub, pos)
            case And(a, b):
                return at(a, pos) and at(b, pos)
            case Or(a, b):
                return at(a, pos) or at(b, pos)
            case Implies(a, b):
                return (not at(a, pos)) or at(b, pos)
            case Iff(a, b):
                return at(a, pos) == at(b, pos)
            case Next(sub):
                return at(sub, pos + 1)
            case Until(a, b):
                for i in range(pos, horizon):
                    if at(b, i):
                        return True
                    if not at(a, i):
                        return False
                return False
            case Eventually(sub):
                return any(at(sub, i) for i in range(pos, horizon))
            case Globally(sub):
                return all(at(sub, i) for i in range(pos, horizon))
        raise AssertionError(body)

    return at(body, pos)


def test_parse_ex2_prefix(ex2):
    assert ex2.prefix == (("exists", "p1"), ("forall", "p2"))
    assert ex2.body == Iff(
        Next(Next(Next(Atom("a", "p1")))),
        Next(Next(Atom("a", "p2"))),
    )


def test_parse_od_formula():
    f = parse_hyperltl("forall p1. forall p2. (G (l[p1] <-> l[p2])) -> (G (o[p1] <-> o[p2]))")
    assert f.prefix == (("forall", "p1"), ("forall", "p2"))
    assert indexed_aps(f.body) == frozenset(
        {("l", "p1"), ("l", "p2"), ("o", "p1"), ("o", "p2")}
    )


def test_unbound_variable_rejected():
    with pytest.raises(ParseError, match="unbound trace variable 'p3'"):
        parse_hyperltl("forall p1. a[p3]")


def test_duplicate_variable_rejected():
    with pytest.raises(ParseError, match="duplicate trace variable"):
        parse_hyperltl("forall p1. exists p1. a[p1]")


def test_precedence():
    body = parse_ltl_body("a[x] && b[x] -> c[x] <-> d[x] || ! e[x]")
    assert body == Iff(
        Implies(And(Atom("a", "x"), Atom("b", "x")), Atom("c", "x")),
        Or(Atom("d", "x"), Not(Atom("e", "x"))),
    )
    assert parse_ltl_body("a[x] U b[x] && c[x]") == And(
        Until(Atom("a", "x"), Atom("b", "x")), Atom("c", "x")
    )
    assert parse_ltl_body("a[x] U b[x] U c[x]") == Until(
        Atom("a", "x"), Until(Atom("b", "x"), Atom("c", "x"))
    )
    assert parse_ltl_body("G F a[x]") == Globally(Eventually(Atom("a", "x")))


def test_comments_and_errors():
    f = parse_hyperltl("# leading comment\nforall p1. # inline\n  G a[p1]")
    assert f.body == Globally(Atom("a", "p1"))
    with pytest.raises(ParseError):
        parse_ltl_body("a[x] &&")
    with pytest.raises(ParseError):
        parse_ltl_body("(a[x]")


def test_negate_flips_quantifiers(ex4):
    neg = negate_hyperltl(ex4)
    assert neg.prefix == (("exists", "p1"), ("forall", "p2"))
    neg2 = negate_hyperltl(negate_hyperltl(HyperLtlFormula((("exists", "p"),), Atom("a", "p"))))
    assert neg2.prefix == (("exists", "p"),)


def test_negate_exists_exists():
    f = parse_hyperltl("exists p1. exists p2. a[p1] U a[p2]")
    neg = negate_hyperltl(f)
    assert neg.prefix == (("forall", "p1"), ("forall", "p2"))


def test_nnf_has_no_negated_compounds():
    def check(b):
        match b:
            case Not(sub):
                assert isinstance(sub, Atom)
            case And(x, y) | Or(x, y) | Until(x, y):
                check(x)
                check(y)
            case Next(s) | Eventually(s) | Globally(s):
                check(s)
            case Atom(_, _) | Const(_):
                pass
            case _:
                raise AssertionError(f"non-NNF node {b}")

    body = parse_ltl_body("!((a[x] U b[x]) <-> G (c[x] -> d[x]))")
    check(nnf(body))


def test_to_core_restricts_constructors():
    body = parse_ltl_body("(F a[x]) || (G b[x]) -> (c[x] <-> d[x])")
    core = to_core(body)

    def check(b):
        match b:
            case Atom(_, _) | Const(_):
                pass
            case Not(s) | Next(s):
                check(s)
            case And(x, y) | Until(x, y):
                check(x)
                check(y)
            case _:
                raise AssertionError(f"non-core node {b}")

    check(core)


def test_indexed_aps_examples(ex2):
    assert indexed_aps(ex2.body) == frozenset({("a", "p1"), ("a", "p2")})
    assert indexed_aps(Const(True)) == frozenset()


def test_eval_examples():
    assert eval_body_on_lassos(Globally(Atom("a", "p1")), {"p1": ((), (A,))}) is True
    assert eval_body_on_lassos(Eventually(Atom("a", "p1")), {"p1": ((), (E,))}) is False


def test_eval_ex2_shifted_traces(ex2):
    # a at position 3 on p1, a at position 2 on p2: X-chains line up
    assignment = {"p1": ((E, E, E), (A,)), "p2": ((E, E), (A,))}
    assert eval_body_on_lassos(ex2.body, assignment) is True


def test_eval_missing_variable():
    with pytest.raises(ValidationError, match="missing trace variable"):
        eval_body_on_lassos(Atom("a", "p1"), {})


def test_eval_mixed_stem_lengths():
    # until across differently-shaped lassos must join on the common frame
    body = Until(Atom("a", "p1"), Atom("b", "p2"))
    B = frozenset({"b"})
    assignment = {"p1": ((A, A, A), (A, E)), "p2": ((E,), (E, E, B))}
    # b first holds at position 3; a holds on p1 at positions 0..3
    assert eval_body_on_lassos(body, assignment) is True


BODY_LEAVES = [Atom("a", "p1"), Atom("a", "p2"), Atom("b", "p1"), Const(True), Const(False)]


def body_strategy():
    return st.recursive(
        st.sampled_from(BODY_LEAVES),
        lambda sub: st.one_of(
            st.builds(Not, sub),
            st.builds(Next, sub),
            st.builds(Eventually, sub),
            st.builds(Globally, sub),
            st.builds(And, sub, sub),
            st.builds(Or, sub, sub),
            st.builds(Implies, sub, sub),
            st.builds(Iff, sub, sub),
            st.builds(Until, sub, sub),
        ),
        max_leaves=8,
    )


def letters(draw_bits, aps=("a", "b")):
    return tuple(
        frozenset(ap for ap, bit in zip(aps, bits) if bit) for bits in draw_bits
    )


def trace_strategy():
    bit = st.tuples(st.booleans(), st.booleans())
    return st.tuples(
        st.lists(bit, min_size=0, max_size=3).map(tuple).map(letters),
        st.lists(bit, min_size=1, max_size=3).map(tuple).map(letters),
    )


@settings(max_examples=120, deadline=None)
@given(body_strategy(), trace_strategy(), trace_strategy())
def test_eval_matches_naive_unrolling(body, t1, t2):
    assignment = {"p1": t1, "p2": t2}
    assert eval_body_on_lassos(body, assignment) == naive_eval(body, assignment)


@settings(max_examples=80, deadline=None)
@given(body_strategy(), trace_strategy(), trace_strategy())
def test_negation_duality(body, t1, t2):
    from hypergames.logic import negate_body

    assignment = {"p1": t1, "p2": t2}
    assert eval_body_on_lassos(body, assignment) != eval_body_on_lassos(
        negate_body(body), assignment
    )
    assert eval_body_on_lassos(body, assignment) == eval_body_on_lassos(
        nnf(body), assignment
    )
    assert eval_body_on_lassos(body, assignment) == eval_body_on_lassos(
        to_core(body), assignment
    )


@settings(max_examples=60, deadline=None)
@given(body_strategy())
def test_render_parse_roundtrip(body):
    assert parse_ltl_body(render_body(body)) == body


def test_render_hyperltl_roundtrip(ex6):
    assert parse_hyperltl(render_hyperltl(ex6)) == ex6
