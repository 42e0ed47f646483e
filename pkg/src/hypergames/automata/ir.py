"""Internal negation-normal form with release, used by the automata pipeline."""

from __future__ import annotations

from dataclasses import dataclass

from ..logic import And, Atom, Const, Eventually, Globally, Iff, Implies, LtlBody, Next, Not, Or, Until


class Ir:
    """Base class for NNF nodes; negation appears only on literals."""

    __slots__ = ()


@dataclass(frozen=True)
class ILit(Ir):
    ap: str
    var: str
    neg: bool


@dataclass(frozen=True)
class IBool(Ir):
    value: bool


@dataclass(frozen=True)
class IAnd(Ir):
    left: Ir
    right: Ir


@dataclass(frozen=True)
class IOr(Ir):
    left: Ir
    right: Ir


@dataclass(frozen=True)
class INext(Ir):
    sub: Ir


@dataclass(frozen=True)
class IUntil(Ir):
    left: Ir
    right: Ir


@dataclass(frozen=True)
class IRelease(Ir):
    left: Ir
    right: Ir


def to_ir(body: LtlBody) -> Ir:
    """Translate a public body into simplified internal NNF."""
    return simplify_ir(_convert(body, False))


def _convert(body: LtlBody, neg: bool) -> Ir:
    match body:
        case Atom(ap, var):
            return ILit(ap, var, neg)
        case Const(v):
            return IBool(v != neg)
        case Not(sub):
            return _convert(sub, not neg)
        case And(a, b):
            if neg:
                return IOr(_convert(a, True), _convert(b, True))
            return IAnd(_convert(a, False), _convert(b, False))
        case Or(a, b):
            if neg:
                return IAnd(_convert(a, True), _convert(b, True))
            return IOr(_convert(a, False), _convert(b, False))
        case Implies(a, b):
            if neg:
                return IAnd(_convert(a, False), _convert(b, True))
            return IOr(_convert(a, True), _convert(b, False))
        case Iff(a, b):
            if neg:
                return IOr(
                    IAnd(_convert(a, False), _convert(b, True)),
                    IAnd(_convert(a, True), _convert(b, False)),
                )
            return IOr(
                IAnd(_convert(a, False), _convert(b, False)),
                IAnd(_convert(a, True), _convert(b, True)),
            )
        case Next(sub):
            return INext(_convert(sub, neg))
        case Until(a, b):
            if neg:
                return IRelease(_convert(a, True), _convert(b, True))
            return IUntil(_convert(a, False), _convert(b, False))
        case Eventually(sub):
            if neg:
                return IRelease(IBool(False), _convert(sub, True))
            return IUntil(IBool(True), _convert(sub, False))
        case Globally(sub):
            if neg:
                return IUntil(IBool(True), _convert(sub, True))
            return IRelease(IBool(False), _convert(sub, False))
    raise ValueError(f"unsupported LTL construct: {body}")


def simplify_ir(ir: Ir) -> Ir:
    """Constant folding and idempotence, bottom-up."""
    match ir:
        case ILit(_, _, _) | IBool(_):
            return ir
        case IAnd(a, b):
            a, b = simplify_ir(a), simplify_ir(b)
            if a == IBool(False) or b == IBool(False):
                return IBool(False)
            if a == IBool(True):
                return b
            if b == IBool(True) or a == b:
                return a
            return IAnd(a, b)
        case IOr(a, b):
            a, b = simplify_ir(a), simplify_ir(b)
            if a == IBool(True) or b == IBool(True):
                return IBool(True)
            if a == IBool(False):
                return b
            if b == IBool(False) or a == b:
                return a
            return IOr(a, b)
        case INext(sub):
            sub = simplify_ir(sub)
            if isinstance(sub, IBool):
                return sub
            return INext(sub)
        case IUntil(a, b):
            a, b = simplify_ir(a), simplify_ir(b)
            if isinstance(b, IBool):
                return b
            if a == IBool(False):
                return b
            return IUntil(a, b)
        case IRelease(a, b):
            a, b = simplify_ir(a), simplify_ir(b)
            if isinstance(b, IBool):
                return b
            if a == IBool(True):
                return b
            return IRelease(a, b)
    raise ValueError(f"unsupported IR construct: {ir}")


def distribute_ir(ir: Ir) -> Ir:
    """Push disjunction out of eventualities and conjunction out of invariants."""
    memo: dict[Ir, Ir] = {}

    def go(node: Ir) -> Ir:
        if node in memo:
            return memo[node]
        match node:
            case ILit(_, _, _) | IBool(_):
                out = node
            case IAnd(a, b):
                out = IAnd(go(a), go(b))
            case IOr(a, b):
                out = IOr(go(a), go(b))
            case INext(sub):
                s = go(sub)
                if isinstance(s, IOr):
                    out = go(IOr(INext(s.left), INext(s.right)))
                elif isinstance(s, IAnd):
                    out = go(IAnd(INext(s.left), INext(s.right)))
                else:
                    out = INext(s)
            case IUntil(a, b):
                left, right = go(a), go(b)
                if isinstance(right, IOr):
                    out = go(IOr(IUntil(left, right.left), IUntil(left, right.right)))
                else:
                    out = IUntil(left, right)
            case IRelease(a, b):
                left, right = go(a), go(b)
                if isinstance(right, IAnd):
                    out = go(IAnd(IRelease(left, right.left), IRelease(left, right.right)))
                else:
                    out = IRelease(left, right)
            case _:
                raise ValueError(f"unsupported IR construct: {node}")
        memo[node] = out
        return out

    return go(ir)


def ir_untils(ir: Ir) -> list[Ir]:
    """All until subformulas, deterministic order (needed for acceptance sets)."""
    seen: list[Ir] = []

    def walk(node: Ir) -> None:
        match node:
            case ILit(_, _, _) | IBool(_):
                return
            case INext(sub):
                walk(sub)
            case IAnd(a, b) | IOr(a, b) | IRelease(a, b):
                walk(a)
                walk(b)
            case IUntil(a, b):
                if node not in seen:
                    seen.append(node)
                walk(a)
                walk(b)

    walk(ir)
    return seen


def ir_is_safety(ir: Ir) -> bool:
    """Syntactic safety: no until anywhere (release and next allowed)."""
    match ir:
        case ILit(_, _, _) | IBool(_):
            return True
        case INext(sub):
            return ir_is_safety(sub)
        case IAnd(a, b) | IOr(a, b) | IRelease(a, b):
            return ir_is_safety(a) and ir_is_safety(b)
        case IUntil(_, _):
            return False
    raise ValueError(f"unsupported IR construct: {ir}")


def ir_is_cosafety(ir: Ir) -> bool:
    """Syntactic co-safety: no release anywhere (until and next allowed)."""
    match ir:
        case ILit(_, _, _) | IBool(_):
            return True
        case INext(sub):
            return ir_is_cosafety(sub)
        case IAnd(a, b) | IOr(a, b) | IUntil(a, b):
            return ir_is_cosafety(a) and ir_is_cosafety(b)
        case IRelease(_, _):
            return False
    raise ValueError(f"unsupported IR construct: {ir}")
