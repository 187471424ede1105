"""Presburger arithmetic over the natural numbers, decided with z3.

Formulas are small immutable trees built from linear :class:`Term` values;
quantified and free variables range over ℕ. Closed sentences are decided by
quantifier elimination, purely existential ones by model search so that a
witness can be returned.
"""
import typing as T
from dataclasses import dataclass
from logging import getLogger

import z3

from meta_opacity.errors import OpacityError

logger = getLogger("meta_opacity")

Model = T.Dict[str, int]


@dataclass(frozen=True)
class Term:
    coefficients: T.Tuple[T.Tuple[str, int], ...] = ()
    constant: int = 0

    @classmethod
    def var(cls, name: str) -> "Term":
        return cls(((name, 1),))

    @classmethod
    def const(cls, value: int) -> "Term":
        return cls((), int(value))

    @classmethod
    def lift(cls, value: T.Union["Term", int]) -> "Term":
        return value if isinstance(value, Term) else cls.const(value)

    @classmethod
    def linear(cls, pairs: T.Iterable[T.Tuple[int, str]], constant: int = 0):
        total = cls.const(constant)
        for coefficient, name in pairs:
            total = total + coefficient * cls.var(name)
        return total

    def variables(self) -> T.FrozenSet[str]:
        return frozenset(name for name, _ in self.coefficients)

    def __add__(self, other: T.Union["Term", int]) -> "Term":
        other = Term.lift(other)
        merged = dict(self.coefficients)
        for name, k in other.coefficients:
            merged[name] = merged.get(name, 0) + k
        return Term(
            tuple(sorted((n, k) for n, k in merged.items() if k)),
            self.constant + other.constant,
        )

    __radd__ = __add__

    def __mul__(self, factor: int) -> "Term":
        if not factor:
            return Term()
        return Term(
            tuple((n, k * factor) for n, k in self.coefficients),
            self.constant * factor,
        )

    __rmul__ = __mul__

    def __neg__(self) -> "Term":
        return self * -1

    def __sub__(self, other: T.Union["Term", int]) -> "Term":
        return self + -Term.lift(other)

    def __rsub__(self, other: int) -> "Term":
        return Term.lift(other) - self

    def __str__(self) -> str:
        parts = [n if k == 1 else f"{k}*{n}" for n, k in self.coefficients]
        if self.constant or not parts:
            parts.append(str(self.constant))
        return " + ".join(parts)


class Formula:
    pass


@dataclass(frozen=True)
class Le(Formula):
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Eq(Formula):
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Divides(Formula):
    modulus: int
    term: Term


@dataclass(frozen=True)
class And(Formula):
    parts: T.Tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    parts: T.Tuple[Formula, ...]


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    names: T.Tuple[str, ...]
    body: Formula


@dataclass(frozen=True)
class ForAll(Formula):
    names: T.Tuple[str, ...]
    body: Formula


TRUE = And(())
FALSE = Or(())

Operand = T.Union[Term, int]


def le(lhs: Operand, rhs: Operand) -> Formula:
    return Le(Term.lift(lhs), Term.lift(rhs))


def lt(lhs: Operand, rhs: Operand) -> Formula:
    return Le(Term.lift(lhs) + 1, Term.lift(rhs))


def ge(lhs: Operand, rhs: Operand) -> Formula:
    return le(rhs, lhs)


def gt(lhs: Operand, rhs: Operand) -> Formula:
    return lt(rhs, lhs)


def eq(lhs: Operand, rhs: Operand) -> Formula:
    return Eq(Term.lift(lhs), Term.lift(rhs))


def conj(*parts: Formula) -> Formula:
    return parts[0] if len(parts) == 1 else And(parts)


def disj(*parts: Formula) -> Formula:
    return parts[0] if len(parts) == 1 else Or(parts)


def implies(premise: Formula, conclusion: Formula) -> Formula:
    return Or((Not(premise), conclusion))


def exists(names: T.Iterable[str], body: Formula) -> Formula:
    names = tuple(names)
    return Exists(names, body) if names else body


def forall(names: T.Iterable[str], body: Formula) -> Formula:
    names = tuple(names)
    return ForAll(names, body) if names else body


def free_variables(phi: Formula) -> T.FrozenSet[str]:
    if isinstance(phi, (Le, Eq)):
        return phi.lhs.variables() | phi.rhs.variables()
    if isinstance(phi, Divides):
        return phi.term.variables()
    if isinstance(phi, (And, Or)):
        return frozenset().union(*(free_variables(p) for p in phi.parts))
    if isinstance(phi, Not):
        return free_variables(phi.body)
    if isinstance(phi, (Exists, ForAll)):
        return free_variables(phi.body) - frozenset(phi.names)
    raise TypeError(f"not a formula: {phi!r}")


def is_quantifier_free(phi: Formula) -> bool:
    if isinstance(phi, (Exists, ForAll)):
        return False
    if isinstance(phi, (And, Or)):
        return all(is_quantifier_free(p) for p in phi.parts)
    if isinstance(phi, Not):
        return is_quantifier_free(phi.body)
    return True


def existential_prefix(phi: Formula) -> T.Tuple[T.Tuple[str, ...], Formula]:
    names: T.List[str] = []
    while isinstance(phi, Exists):
        names.extend(phi.names)
        phi = phi.body
    return tuple(names), phi


class _Translator:
    def __init__(self) -> None:
        self.symbols: T.Dict[str, z3.ArithRef] = {}

    def symbol(self, name: str) -> z3.ArithRef:
        if name not in self.symbols:
            self.symbols[name] = z3.Int(name)
        return self.symbols[name]

    def term(self, term: Term) -> z3.ArithRef:
        total = z3.IntVal(term.constant)
        for name, k in term.coefficients:
            total = total + k * self.symbol(name)
        return total

    def natural(self, names: T.Iterable[str]) -> z3.BoolRef:
        return z3.And([self.symbol(n) >= 0 for n in names])

    def formula(self, phi: Formula) -> z3.BoolRef:
        if isinstance(phi, Le):
            return self.term(phi.lhs) <= self.term(phi.rhs)
        if isinstance(phi, Eq):
            return self.term(phi.lhs) == self.term(phi.rhs)
        if isinstance(phi, Divides):
            return self.term(phi.term) % phi.modulus == 0
        if isinstance(phi, And):
            return z3.And([self.formula(p) for p in phi.parts])
        if isinstance(phi, Or):
            return z3.Or([self.formula(p) for p in phi.parts])
        if isinstance(phi, Not):
            return z3.Not(self.formula(phi.body))
        if isinstance(phi, Exists):
            bound = [self.symbol(n) for n in phi.names]
            body = z3.And(self.natural(phi.names), self.formula(phi.body))
            return z3.Exists(bound, body)
        if isinstance(phi, ForAll):
            bound = [self.symbol(n) for n in phi.names]
            body = z3.Implies(self.natural(phi.names), self.formula(phi.body))
            return z3.ForAll(bound, body)
        raise TypeError(f"not a formula: {phi!r}")


def _eliminate(expr: z3.BoolRef) -> z3.BoolRef:
    goal = z3.Goal()
    goal.add(expr)
    return z3.Then(z3.Tactic("qe"), z3.Tactic("simplify"))(goal).as_expr()


def _truth(expr: z3.BoolRef) -> bool:
    solver = z3.Solver()
    solver.add(expr)
    result = solver.check()
    if result == z3.unknown:
        raise OpacityError(f"solver gave up: {solver.reason_unknown()}")
    return result == z3.sat


def presburger_model(
    phi: Formula, minimize: T.Optional[T.Sequence[str]] = None
) -> T.Optional[Model]:
    """A model of ``phi`` over its free variables, or ``None``.

    The sum of the ``minimize`` variables (all free variables by default) is
    minimised, then each of them in turn, so models are reproducible.
    """
    names = sorted(free_variables(phi))
    translator = _Translator()
    optimizer = z3.Optimize()
    optimizer.add(translator.natural(names))
    optimizer.add(translator.formula(phi))
    targets = list(names if minimize is None else minimize)
    if targets:
        optimizer.minimize(z3.Sum([translator.symbol(n) for n in targets]))
        for name in targets:
            optimizer.minimize(translator.symbol(name))
    result = optimizer.check()
    if result == z3.unknown:
        raise OpacityError(f"solver gave up: {optimizer.reason_unknown()}")
    if result == z3.unsat:
        return None
    model = optimizer.model()
    return {
        n: model.eval(translator.symbol(n), model_completion=True).as_long()
        for n in names
    }


def presburger_decide(phi: Formula) -> T.Tuple[bool, T.Optional[Model]]:
    """Truth of a closed sentence, with a model of its outermost existential
    block when the sentence is purely existential."""
    free = free_variables(phi)
    if free:
        raise ValueError(f"sentence has free variables {sorted(free)}")
    names, matrix = existential_prefix(phi)
    if is_quantifier_free(matrix):
        model = presburger_model(matrix)
        return model is not None, model
    eliminated = _eliminate(_Translator().formula(phi))
    logger.debug("quantifier elimination left %s", eliminated)
    return _truth(eliminated), None
