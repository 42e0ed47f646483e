"""HyperLTL abstract syntax, parsing, duality, and the lasso reference evaluator."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

from .errors import ParseError, ValidationError

# An ultimately periodic trace: (stem labels, loop labels); loop nonempty.
Trace = tuple[tuple[frozenset[str], ...], tuple[frozenset[str], ...]]


class LtlBody:
    """Base class for LTL body nodes over indexed atomic propositions."""

    __slots__ = ()


@dataclass(frozen=True)
class Atom(LtlBody):
    ap: str
    var: str


@dataclass(frozen=True)
class Const(LtlBody):
    value: bool


@dataclass(frozen=True)
class Not(LtlBody):
    sub: LtlBody


@dataclass(frozen=True)
class And(LtlBody):
    left: LtlBody
    right: LtlBody


@dataclass(frozen=True)
class Or(LtlBody):
    left: LtlBody
    right: LtlBody


@dataclass(frozen=True)
class Implies(LtlBody):
    left: LtlBody
    right: LtlBody


@dataclass(frozen=True)
class Iff(LtlBody):
    left: LtlBody
    right: LtlBody


@dataclass(frozen=True)
class Next(LtlBody):
    sub: LtlBody


@dataclass(frozen=True)
class Until(LtlBody):
    left: LtlBody
    right: LtlBody


@dataclass(frozen=True)
class Eventually(LtlBody):
    sub: LtlBody


@dataclass(frozen=True)
class Globally(LtlBody):
    sub: LtlBody


@dataclass(frozen=True)
class HyperLtlFormula:
    prefix: tuple[tuple[str, str], ...]  # (quantifier "forall"|"exists", trace var)
    body: LtlBody


KEYWORDS = {"forall", "exists", "true", "false", "X", "U", "F", "G"}


@functools.cache
def trace_vars(body: LtlBody) -> frozenset[str]:
    """Trace variables occurring in body."""
    match body:
        case Atom(_, var):
            return frozenset({var})
        case Const(_):
            return frozenset()
        case Not(sub) | Next(sub) | Eventually(sub) | Globally(sub):
            return trace_vars(sub)
        case And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) | Until(a, b):
            return trace_vars(a) | trace_vars(b)
    raise ValueError(f"unsupported LTL construct: {body}")


@functools.cache
def indexed_aps(body: LtlBody) -> frozenset[tuple[str, str]]:
    """The (ap, trace-var) pairs occurring in body."""
    match body:
        case Atom(ap, var):
            return frozenset({(ap, var)})
        case Const(_):
            return frozenset()
        case Not(sub) | Next(sub) | Eventually(sub) | Globally(sub):
            return indexed_aps(sub)
        case And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) | Until(a, b):
            return indexed_aps(a) | indexed_aps(b)
    raise ValueError(f"unsupported LTL construct: {body}")


def _push(body: LtlBody, neg: bool) -> LtlBody:
    match body:
        case Atom(_, _):
            return Not(body) if neg else body
        case Const(v):
            return Const(v != neg)
        case Not(sub):
            return _push(sub, not neg)
        case And(a, b):
            if neg:
                return Or(_push(a, True), _push(b, True))
            return And(_push(a, False), _push(b, False))
        case Or(a, b):
            if neg:
                return And(_push(a, True), _push(b, True))
            return Or(_push(a, False), _push(b, False))
        case Implies(a, b):
            if neg:
                return And(_push(a, False), _push(b, True))
            return Or(_push(a, True), _push(b, False))
        case Iff(a, b):
            if neg:
                return Or(
                    And(_push(a, False), _push(b, True)),
                    And(_push(a, True), _push(b, False)),
                )
            return Or(
                And(_push(a, False), _push(b, False)),
                And(_push(a, True), _push(b, True)),
            )
        case Next(sub):
            return Next(_push(sub, neg))
        case Eventually(sub):
            return Globally(_push(sub, True)) if neg else Eventually(_push(sub, False))
        case Globally(sub):
            return Eventually(_push(sub, True)) if neg else Globally(_push(sub, False))
        case Until(a, b):
            if not neg:
                return Until(_push(a, False), _push(b, False))
            # not (a U b)  ==  (!b U (!a && !b)) || G !b
            na, nb = _push(a, True), _push(b, True)
            return Or(Until(nb, And(na, nb)), Globally(nb))
    raise ValueError(f"unsupported LTL construct: {body}")


def nnf(body: LtlBody) -> LtlBody:
    """Negation normal form: ->/<-> expanded, negations pushed onto atoms."""
    return _push(body, False)


def negate_body(body: LtlBody) -> LtlBody:
    """Negation of body, in negation normal form."""
    return _push(body, True)


def negate_hyperltl(f: HyperLtlFormula) -> HyperLtlFormula:
    """Flip every quantifier and negate the body (pushed to NNF)."""
    flipped = tuple(
        ("exists" if q == "forall" else "forall", var) for q, var in f.prefix
    )
    return HyperLtlFormula(prefix=flipped, body=negate_body(f.body))


def to_core(body: LtlBody) -> LtlBody:
    """Rewrite derived operators into the core set {atom, not, and, next, until}."""
    match body:
        case Atom(_, _) | Const(_):
            return body
        case Not(sub):
            return Not(to_core(sub))
        case And(a, b):
            return And(to_core(a), to_core(b))
        case Or(a, b):
            return Not(And(Not(to_core(a)), Not(to_core(b))))
        case Implies(a, b):
            return Not(And(to_core(a), Not(to_core(b))))
        case Iff(a, b):
            ca, cb = to_core(a), to_core(b)
            return And(Not(And(ca, Not(cb))), Not(And(cb, Not(ca))))
        case Next(sub):
            return Next(to_core(sub))
        case Until(a, b):
            return Until(to_core(a), to_core(b))
        case Eventually(sub):
            return Until(Const(True), to_core(sub))
        case Globally(sub):
            return Not(Until(Const(True), Not(to_core(sub))))
    raise ValueError(f"unsupported LTL construct: {body}")


_UNARY = {"!": Not, "X": Next, "F": Eventually, "G": Globally}


class _FormulaParser:
    """Recursive-descent parser for the formula grammar."""

    def __init__(self, text: str):
        from .model import _Scanner

        self.sc = _Scanner(text)

    def parse(self) -> HyperLtlFormula:
        prefix: list[tuple[str, str]] = []
        while True:
            save = (self.sc.pos, self.sc.line, self.sc.col)
            word = self.sc.try_ident()
            if word in ("forall", "exists"):
                var = self.sc.expect_ident("trace variable")
                if var in KEYWORDS:
                    raise self.sc.error(f"reserved word {var!r} cannot name a trace variable")
                if any(v == var for _, v in prefix):
                    raise self.sc.error(f"duplicate trace variable {var!r}")
                self.sc.expect_punct(".")
                prefix.append((word, var))
            else:
                self.sc.pos, self.sc.line, self.sc.col = save
                break
        body = self._iff()
        if not self.sc.at_end():
            raise self.sc.error("trailing input after formula")
        bound = {v for _, v in prefix}
        for _, var in sorted(indexed_aps(body)):
            if var not in bound:
                raise self.sc.error(f"atom indexed by unbound trace variable {var!r}")
        return HyperLtlFormula(prefix=tuple(prefix), body=body)

    def _iff(self) -> LtlBody:
        left = self._implies()
        if self.sc.try_punct("<->"):
            return Iff(left, self._iff())
        return left

    def _implies(self) -> LtlBody:
        left = self._or()
        if self.sc.try_punct("->"):
            return Implies(left, self._implies())
        return left

    def _or(self) -> LtlBody:
        left = self._and()
        while self.sc.try_punct("||"):
            left = Or(left, self._and())
        return left

    def _and(self) -> LtlBody:
        left = self._until()
        while self.sc.try_punct("&&"):
            left = And(left, self._until())
        return left

    def _until(self) -> LtlBody:
        left = self._unary()
        save = (self.sc.pos, self.sc.line, self.sc.col)
        word = self.sc.try_ident()
        if word == "U":
            return Until(left, self._until())
        self.sc.pos, self.sc.line, self.sc.col = save
        return left

    def _unary(self) -> LtlBody:
        if self.sc.try_punct("!"):
            return Not(self._unary())
        save = (self.sc.pos, self.sc.line, self.sc.col)
        word = self.sc.try_ident()
        if word in ("X", "F", "G"):
            return _UNARY[word](self._unary())
        if word == "true":
            return Const(True)
        if word == "false":
            return Const(False)
        if word is not None and word not in KEYWORDS:
            self.sc.expect_punct("[")
            var = self.sc.expect_ident("trace variable")
            self.sc.expect_punct("]")
            return Atom(ap=word, var=var)
        self.sc.pos, self.sc.line, self.sc.col = save
        if self.sc.try_punct("("):
            inner = self._iff()
            self.sc.expect_punct(")")
            return inner
        raise self.sc.error("expected a formula")


def parse_hyperltl(text: str) -> HyperLtlFormula:
    """Parse a quantified formula in the text grammar."""
    return _FormulaParser(text).parse()


def parse_ltl_body(text: str) -> LtlBody:
    """Parse a quantifier-free body (trace variables left unchecked)."""
    parser = _FormulaParser(text)
    body = parser._iff()
    if not parser.sc.at_end():
        raise parser.sc.error("trailing input after formula")
    return body


def render_body(body: LtlBody) -> str:
    """Fully parenthesized rendering that parse_ltl_body maps back to body."""
    match body:
        case Atom(ap, var):
            return f"{ap}[{var}]"
        case Const(v):
            return "true" if v else "false"
        case Not(sub):
            return f"!{render_body(sub)}"
        case And(a, b):
            return f"({render_body(a)} && {render_body(b)})"
        case Or(a, b):
            return f"({render_body(a)} || {render_body(b)})"
        case Implies(a, b):
            return f"({render_body(a)} -> {render_body(b)})"
        case Iff(a, b):
            return f"({render_body(a)} <-> {render_body(b)})"
        case Next(sub):
            return f"X {render_body(sub)}" if isinstance(sub, (Atom, Const)) else f"X ({render_body(sub)})"
        case Until(a, b):
            return f"({render_body(a)} U {render_body(b)})"
        case Eventually(sub):
            return f"F {render_body(sub)}" if isinstance(sub, (Atom, Const)) else f"F ({render_body(sub)})"
        case Globally(sub):
            return f"G {render_body(sub)}" if isinstance(sub, (Atom, Const)) else f"G ({render_body(sub)})"
    raise ValueError(f"unsupported LTL construct: {body}")


def render_hyperltl(f: HyperLtlFormula) -> str:
    """Textual rendering of a quantified formula."""
    head = "".join(f"{q} {v}. " for q, v in f.prefix)
    return head + render_body(f.body)


def _trace_letter(trace: Trace, p: int) -> frozenset[str]:
    stem, loop = trace
    if p < len(stem):
        return stem[p]
    return loop[(p - len(stem)) % len(loop)]


def _expand(vec: list[bool], frame: tuple[int, int], target: tuple[int, int]) -> list[bool]:
    """Reinterpret an (S1,L1)-periodic vector in a coarser-compatible frame."""
    s1, l1 = frame
    s2, l2 = target
    if (s1, l1) == (s2, l2):
        return vec
    return [vec[p] if p < s1 else vec[s1 + (p - s1) % l1] for p in range(s2 + l2)]


class LassoEvaluator:
    """Exact LTL evaluation on ultimately periodic traces with per-node memoization."""

    # long quantifier sweeps reuse one evaluator; dropping the memo at this many
    # entries trades recomputation for bounded residency
    MEMO_CAP = 2_000_000

    def __init__(self):
        self._memo: dict = {}

    def evaluate(self, body: LtlBody, assignment: dict[str, Trace]) -> bool:
        """Truth of body at position 0 under the trace assignment."""
        for var in sorted(trace_vars(body)):
            if var not in assignment:
                raise ValidationError(f"missing trace variable {var!r}", construct=var)
        vec, _ = self._vec(body, assignment)
        return vec[0]

    def _vec(self, body: LtlBody, assignment: dict[str, Trace]) -> tuple[list[bool], tuple[int, int]]:
        key = (body, tuple(sorted((v, assignment[v]) for v in trace_vars(body))))
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        result = self._compute(body, assignment)
        if len(self._memo) >= self.MEMO_CAP:
            self._memo.clear()
        self._memo[key] = result
        return result

    def _join(self, parts: list[tuple[list[bool], tuple[int, int]]]) -> tuple[tuple[int, int], list[list[bool]]]:
        s = max((f[0] for _, f in parts), default=0)
        l = math.lcm(*(f[1] for _, f in parts)) if parts else 1
        return (s, l), [_expand(vec, f, (s, l)) for vec, f in parts]

    def _compute(self, body: LtlBody, assignment: dict[str, Trace]) -> tuple[list[bool], tuple[int, int]]:
        match body:
            case Atom(ap, var):
                stem, loop = assignment[var]
                frame = (len(stem), len(loop))
                vec = [ap in _trace_letter(assignment[var], p) for p in range(frame[0] + frame[1])]
                return vec, frame
            case Const(v):
                return [v], (0, 1)
            case Not(sub):
                vec, frame = self._vec(sub, assignment)
                return [not x for x in vec], frame
            case And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b):
                frame, (va, vb) = self._join([self._vec(a, assignment), self._vec(b, assignment)])
                match body:
                    case And(_, _):
                        vec = [x and y for x, y in zip(va, vb)]
                    case Or(_, _):
                        vec = [x or y for x, y in zip(va, vb)]
                    case Implies(_, _):
                        vec = [(not x) or y for x, y in zip(va, vb)]
                    case _:
                        vec = [x == y for x, y in zip(va, vb)]
                return vec, frame
            case Next(sub):
                vec, frame = self._vec(sub, assignment)
                s, l = frame
                n = s + l
                out = [vec[p + 1 if p < n - 1 else s] for p in range(n)]
                return out, frame
            case Until(a, b):
                frame, (va, vb) = self._join([self._vec(a, assignment), self._vec(b, assignment)])
                return self._lfp_until(va, vb, frame), frame
            case Eventually(sub):
                vec, frame = self._vec(sub, assignment)
                n = frame[0] + frame[1]
                return self._lfp_until([True] * n, vec, frame), frame
            case Globally(sub):
                vec, frame = self._vec(sub, assignment)
                s, l = frame
                n = s + l
                out = [True] * n
                changed = True
                while changed:
                    changed = False
                    for p in reversed(range(n)):
                        nv = vec[p] and out[p + 1 if p < n - 1 else s]
                        if nv != out[p]:
                            out[p] = nv
                            changed = True
                return out, frame
        raise ValueError(f"unsupported LTL construct: {body}")

    @staticmethod
    def _lfp_until(va: list[bool], vb: list[bool], frame: tuple[int, int]) -> list[bool]:
        s, l = frame
        n = s + l
        out = [False] * n
        changed = True
        while changed:
            changed = False
            for p in reversed(range(n)):
                nv = vb[p] or (va[p] and out[p + 1 if p < n - 1 else s])
                if nv != out[p]:
                    out[p] = nv
                    changed = True
        return out


def eval_body_on_lassos(body: LtlBody, assignment: dict[str, Trace]) -> bool:
    """Reference semantics of body at position 0 on ultimately periodic traces."""
    return LassoEvaluator().evaluate(body, assignment)
