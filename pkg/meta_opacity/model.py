"""Guarded multi-energy timed automata.

A model has clocks (real-valued, rate 1, resettable) and energy variables
(rational, rate given by the current location, updated by integer offsets
on edges). Guards and invariants are conjunctions of atoms ``var ~ c`` over
both kinds of variables.
"""
import dataclasses
import enum
import typing as T
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from meta_opacity.errors import Violation

Valuation = T.Mapping[str, Fraction]


class Relation(enum.Enum):
    LT = "<"
    LE = "<="
    GE = ">="
    GT = ">"

    def holds(self, value, bound) -> bool:
        if self is Relation.LT:
            return value < bound
        if self is Relation.LE:
            return value <= bound
        if self is Relation.GE:
            return value >= bound
        return value > bound

    @property
    def is_upper(self) -> bool:
        return self in (Relation.LT, Relation.LE)


class Atom(T.NamedTuple):
    var: str
    relation: Relation
    bound: int

    def holds(self, valuation: Valuation) -> bool:
        return self.relation.holds(valuation.get(self.var, 0), self.bound)

    def __str__(self) -> str:
        return f"{self.var}{self.relation.value}{self.bound}"


@dataclass(frozen=True)
class SimpleConstraint:
    """A conjunction of atoms; no atoms means ``true``."""

    atoms: T.Tuple[Atom, ...] = ()

    @classmethod
    def of(cls, *atoms: T.Tuple[str, str, int]) -> "SimpleConstraint":
        return cls(tuple(Atom(v, Relation(op), int(c)) for v, op, c in atoms))

    @property
    def is_true(self) -> bool:
        return not self.atoms

    def variables(self) -> T.FrozenSet[str]:
        return frozenset(a.var for a in self.atoms)

    def failing(self, valuation: Valuation) -> T.Optional[Atom]:
        for atom in self.atoms:
            if not atom.holds(valuation):
                return atom
        return None

    def holds(self, valuation: Valuation) -> bool:
        return self.failing(valuation) is None

    def restrict(self, names: T.Iterable[str]) -> "SimpleConstraint":
        keep = frozenset(names)
        return SimpleConstraint(tuple(a for a in self.atoms if a.var in keep))

    def without(self, names: T.Iterable[str]) -> "SimpleConstraint":
        drop = frozenset(names)
        return SimpleConstraint(tuple(a for a in self.atoms if a.var not in drop))

    def __and__(self, other: "SimpleConstraint") -> "SimpleConstraint":
        atoms = list(self.atoms)
        atoms.extend(a for a in other.atoms if a not in atoms)
        return SimpleConstraint(tuple(atoms))

    def __str__(self) -> str:
        return " && ".join(str(a) for a in self.atoms) if self.atoms else "true"


@dataclass(frozen=True)
class EnergyMap:
    """Sparse energy → integer map; absent entries are 0."""

    items: T.Tuple[T.Tuple[str, int], ...] = ()

    @classmethod
    def of(cls, mapping: T.Optional[T.Mapping[str, int]] = None, **kwargs: int):
        merged = dict(mapping or {}, **kwargs)
        return cls(tuple(sorted((k, int(v)) for k, v in merged.items() if v)))

    def get(self, name: str) -> int:
        for k, v in self.items:
            if k == name:
                return v
        return 0

    def as_dict(self) -> T.Dict[str, int]:
        return dict(self.items)

    def names(self) -> T.FrozenSet[str]:
        return frozenset(k for k, _ in self.items)

    def __bool__(self) -> bool:
        return bool(self.items)


class EnergyRateMap(EnergyMap):
    pass


class EnergyUpdateMap(EnergyMap):
    pass


@dataclass(frozen=True)
class Location:
    name: str
    invariant: SimpleConstraint = SimpleConstraint()
    rates: EnergyRateMap = EnergyRateMap()
    labels: T.FrozenSet[str] = frozenset()
    is_private: bool = False
    is_final: bool = False
    is_initial: bool = False


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    guard: SimpleConstraint = SimpleConstraint()
    action: T.Optional[str] = None
    resets: T.FrozenSet[str] = frozenset()
    updates: EnergyUpdateMap = EnergyUpdateMap()
    name: T.Optional[str] = None

    @property
    def label(self) -> str:
        return self.name or f"{self.source}->{self.target}"


@dataclass(frozen=True)
class GuardedMeta:
    actions: T.FrozenSet[str]
    clocks: T.Tuple[str, ...]
    energies: T.Tuple[str, ...]
    locations: T.Tuple[Location, ...]
    edges: T.Tuple[Edge, ...]

    @cached_property
    def _by_name(self) -> T.Dict[str, Location]:
        return {loc.name: loc for loc in self.locations}

    @cached_property
    def _outgoing(self) -> T.Dict[str, T.Tuple[Edge, ...]]:
        out: T.Dict[str, T.List[Edge]] = {loc.name: [] for loc in self.locations}
        for edge in self.edges:
            out.setdefault(edge.source, []).append(edge)
        return {k: tuple(v) for k, v in out.items()}

    def location(self, name: str) -> Location:
        return self._by_name[name]

    def has_location(self, name: str) -> bool:
        return name in self._by_name

    def edges_from(self, name: str) -> T.Tuple[Edge, ...]:
        return self._outgoing.get(name, ())

    @cached_property
    def initial(self) -> Location:
        for loc in self.locations:
            if loc.is_initial:
                return loc
        raise LookupError("model has no initial location")

    @property
    def private_names(self) -> T.FrozenSet[str]:
        return frozenset(loc.name for loc in self.locations if loc.is_private)

    @property
    def final_names(self) -> T.FrozenSet[str]:
        return frozenset(loc.name for loc in self.locations if loc.is_final)

    def edge_named(self, name: str) -> Edge:
        for edge in self.edges:
            if edge.label == name:
                return edge
        raise LookupError(f"no edge named {name}")

    def replace(self, **changes: T.Any) -> "GuardedMeta":
        return dataclasses.replace(self, **changes)

    def zero_valuation(self) -> T.Dict[str, Fraction]:
        zero = {c: Fraction(0) for c in self.clocks}
        zero.update({e: Fraction(0) for e in self.energies})
        return zero


def energy_atoms(meta: GuardedMeta) -> T.Iterator[Atom]:
    energies = frozenset(meta.energies)
    for loc in meta.locations:
        yield from (a for a in loc.invariant.atoms if a.var in energies)
    for edge in meta.edges:
        yield from (a for a in edge.guard.atoms if a.var in energies)


def max_energy_constant(meta: GuardedMeta) -> int:
    return max((a.bound for a in energy_atoms(meta)), default=0)


def guarded_energies(meta: GuardedMeta) -> T.Tuple[str, ...]:
    used = {a.var for a in energy_atoms(meta)}
    return tuple(e for e in meta.energies if e in used)


@dataclass(frozen=True)
class SubclassReport:
    is_guarded: bool
    is_discrete: bool
    is_positive: bool
    energy_count: int
    clock_count: int
    is_ta: bool
    is_eta: bool
    is_meta: bool
    is_integer_switching: T.Optional[bool] = None
    is_integer_execution_time: T.Optional[bool] = None

    @property
    def class_name(self) -> str:
        if self.is_ta:
            kind = "TA"
        elif self.energy_count == 1:
            kind = "ETA"
        else:
            kind = "META"
        words = [
            "discrete" if self.is_discrete else "",
            "positive" if self.is_positive and not self.is_ta else "",
            "guarded" if self.is_guarded else "",
            kind,
        ]
        return " ".join(w for w in words if w)

    def as_dict(self) -> T.Dict[str, T.Any]:
        data = dataclasses.asdict(self)
        data["class"] = self.class_name
        return data


def classify(meta: GuardedMeta) -> SubclassReport:
    rates = [v for loc in meta.locations for _, v in loc.rates.items]
    offsets = [v for edge in meta.edges for _, v in edge.updates.items]
    guarded = next(energy_atoms(meta), None) is not None
    count = len(meta.energies)
    return SubclassReport(
        is_guarded=guarded,
        is_discrete=all(r == 0 for r in rates),
        is_positive=all(v >= 0 for v in rates + offsets),
        energy_count=count,
        clock_count=len(meta.clocks),
        is_ta=count == 0,
        is_eta=count == 1 and not guarded,
        is_meta=not guarded,
    )


def validate(meta: GuardedMeta) -> T.List[Violation]:
    found: T.List[Violation] = []

    def report(code: str, message: str, path: str = "") -> None:
        found.append(Violation(code, message, path))

    clocks, energies = set(meta.clocks), set(meta.energies)
    for name in sorted(clocks & energies):
        report("duplicate-name", f"{name} declared as clock and energy")
    if len(clocks) != len(meta.clocks) or len(energies) != len(meta.energies):
        report("duplicate-name", "duplicate clock or energy declaration")

    names: T.Set[str] = set()
    for i, loc in enumerate(meta.locations):
        path = f"locations[{i}]"
        if loc.name in names:
            report("duplicate-name", f"duplicate location {loc.name}", path)
        names.add(loc.name)
        if loc.is_private and loc.is_final:
            report("private-final", f"location {loc.name} is private and final", path)
        for atom in loc.invariant.atoms:
            if atom.var not in clocks | energies:
                report(
                    "undeclared-variable",
                    f"undeclared variable {atom.var}",
                    f"{path}.invariant",
                )
        for energy in loc.rates.names() - energies:
            report(
                "undeclared-variable", f"undeclared energy {energy}", f"{path}.rates"
            )

    initials = [loc for loc in meta.locations if loc.is_initial]
    if len(initials) != 1:
        report("initial-count", f"expected one initial location, found {len(initials)}")
    if not any(loc.is_private for loc in meta.locations):
        report("empty-private", "empty private set")
    if not any(loc.is_final for loc in meta.locations):
        report("empty-final", "empty final set")

    finals = {loc.name for loc in meta.locations if loc.is_final}
    for i, edge in enumerate(meta.edges):
        path = f"edges[{i}]"
        for end in (edge.source, edge.target):
            if end not in names:
                report("undeclared-location", f"undeclared location {end}", path)
        if edge.source in finals:
            report("final-outgoing", "final location has outgoing edge", path)
        if edge.action is not None and edge.action not in meta.actions:
            report("undeclared-action", f"undeclared action {edge.action}", path)
        for atom in edge.guard.atoms:
            if atom.var not in clocks | energies:
                report(
                    "undeclared-variable",
                    f"undeclared variable {atom.var}",
                    f"{path}.guard",
                )
        for clock in sorted(edge.resets - clocks):
            report("undeclared-variable", f"undeclared clock {clock}", f"{path}.resets")
        for energy in sorted(edge.updates.names() - energies):
            report(
                "undeclared-variable", f"undeclared energy {energy}", f"{path}.updates"
            )

    if len(initials) == 1 and not initials[0].invariant.holds(meta.zero_valuation()):
        report("initial-invariant", "initial state outside invariant")
    return found
