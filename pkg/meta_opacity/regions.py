"""Clock regions and region automata.

A region is stored as the integer part of every clock (``None`` once the
clock exceeds its maximal constant) and the ordered partition of the
non-saturated clocks by fractional part; the first block holds the clocks
with zero fraction and may be empty.
"""
import math
import typing as T
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from logging import getLogger

from meta_opacity.errors import ResourceLimitError, UnsupportedClassError
from meta_opacity.model import Atom, Edge, GuardedMeta, Relation, SimpleConstraint
from meta_opacity.nfa import Nfa

logger = getLogger("meta_opacity")

MaxConstants = T.Mapping[str, int]


@dataclass(frozen=True)
class ClockRegion:
    clocks: T.Tuple[str, ...]
    ints: T.Tuple[T.Optional[int], ...]
    fractions: T.Tuple[T.FrozenSet[str], ...]

    def integer_part(self, clock: str) -> T.Optional[int]:
        return self.ints[self.clocks.index(clock)]

    def has_zero_fraction(self, clock: str) -> bool:
        return clock in self.fractions[0]

    @property
    def is_unbounded(self) -> bool:
        return all(n is None for n in self.ints)

    def satisfies_atom(self, atom: Atom) -> bool:
        if atom.var not in self.clocks:
            raise UnsupportedClassError(f"{atom.var} is not a clock of the region")
        n = self.integer_part(atom.var)
        if n is None:
            return not atom.relation.is_upper
        if self.has_zero_fraction(atom.var):
            return atom.relation.holds(n, atom.bound)
        if atom.relation in (Relation.LT, Relation.LE):
            return n + 1 <= atom.bound
        return n >= atom.bound

    def satisfies(self, constraint: SimpleConstraint) -> bool:
        return all(self.satisfies_atom(a) for a in constraint.atoms)

    def reset(self, clocks: T.Iterable[str]) -> "ClockRegion":
        zeroed = frozenset(clocks) & frozenset(self.clocks)
        if not zeroed:
            return self
        ints = tuple(0 if c in zeroed else n for c, n in zip(self.clocks, self.ints))
        rest = tuple(g - zeroed for g in self.fractions[1:])
        return ClockRegion(
            self.clocks,
            ints,
            (self.fractions[0] | zeroed, *(g for g in rest if g)),
        )

    def __str__(self) -> str:
        parts = []
        for clock, n in zip(self.clocks, self.ints):
            if n is None:
                parts.append(f"{clock}>max")
            elif clock in self.fractions[0]:
                parts.append(f"{clock}={n}")
            else:
                parts.append(f"{n}<{clock}<{n + 1}")
        groups = [sorted(g) for g in self.fractions[1:]]
        for group in groups:
            for a, b in zip(group, group[1:]):
                parts.append(f"frac({a})=frac({b})")
        for low, high in zip(groups, groups[1:]):
            parts.append(f"frac({low[0]})<frac({high[0]})")
        return ", ".join(parts) if parts else "true"

    __repr__ = __str__


def clock_region_of(
    valuation: T.Mapping[str, T.Union[int, Fraction]], max_consts: MaxConstants
) -> ClockRegion:
    clocks = tuple(max_consts)
    ints: T.List[T.Optional[int]] = []
    by_fraction: T.Dict[Fraction, T.Set[str]] = {}
    for clock in clocks:
        value = Fraction(valuation.get(clock, 0))
        if value < 0:
            raise ValueError(f"negative clock value for {clock}")
        if value > max_consts[clock]:
            ints.append(None)
            continue
        n = math.floor(value)
        ints.append(n)
        by_fraction.setdefault(value - n, set()).add(clock)
    zero = frozenset(by_fraction.pop(Fraction(0), set()))
    rest = tuple(frozenset(by_fraction[f]) for f in sorted(by_fraction))
    return ClockRegion(clocks, tuple(ints), (zero, *rest))


def time_successor(region: ClockRegion, max_consts: MaxConstants) -> ClockRegion:
    """The immediate time successor; the unbounded region is its own."""
    if region.is_unbounded:
        return region
    zero, rest = region.fractions[0], region.fractions[1:]
    ints = dict(zip(region.clocks, region.ints))
    if zero:
        moving = set()
        for clock in zero:
            if ints[clock] == max_consts[clock]:
                ints[clock] = None
            else:
                moving.add(clock)
        groups = (frozenset(moving), *rest) if moving else rest
        return ClockRegion(
            region.clocks,
            tuple(ints[c] for c in region.clocks),
            (frozenset(), *groups),
        )
    top = rest[-1]
    for clock in top:
        ints[clock] += 1
    return ClockRegion(
        region.clocks, tuple(ints[c] for c in region.clocks), (top, *rest[:-1])
    )


def time_successors(
    region: ClockRegion, max_consts: MaxConstants
) -> T.List[ClockRegion]:
    """The chain of time successors from ``region`` up to the unbounded one."""
    chain = [region]
    while not chain[-1].is_unbounded:
        chain.append(time_successor(chain[-1], max_consts))
    return chain


def max_constants(ta: GuardedMeta) -> T.Dict[str, int]:
    consts = {c: 0 for c in ta.clocks}
    constraints = [loc.invariant for loc in ta.locations]
    constraints.extend(edge.guard for edge in ta.edges)
    for constraint in constraints:
        for atom in constraint.atoms:
            if atom.var in consts:
                consts[atom.var] = max(consts[atom.var], atom.bound)
    return consts


class RegionState(T.NamedTuple):
    location: str
    region: ClockRegion

    def __str__(self) -> str:
        return f"{self.location}, {self.region}"

    def __repr__(self) -> str:
        return f"({self.location}: {self.region})"


@dataclass(frozen=True)
class RegionAutomaton:
    nfa: Nfa
    max_consts: T.Tuple[T.Tuple[str, int], ...]

    @property
    def states(self) -> T.FrozenSet[RegionState]:
        return self.nfa.states  # type: ignore


def _check_timed_automaton(ta: GuardedMeta) -> None:
    if ta.energies:
        raise UnsupportedClassError(
            "region automata need energy effects compiled into actions",
            "model still declares energy variables",
        )


def build_region_automaton(
    ta: GuardedMeta,
    max_states: int = 5000,
    label_of: T.Optional[T.Callable[[int, Edge], T.Optional[str]]] = None,
    alphabet: T.Optional[T.Iterable[str]] = None,
) -> RegionAutomaton:
    """Reachable part of the region automaton of a timed automaton.

    ``label_of`` maps an edge (with its index in the model) to the label of
    the discrete transitions it induces; by default its action.
    """
    _check_timed_automaton(ta)
    consts = max_constants(ta)
    indexed = {id(edge): i for i, edge in enumerate(ta.edges)}
    if label_of is None:

        def label_of(_index: int, edge: Edge) -> T.Optional[str]:
            return edge.action

    start = RegionState(ta.initial.name, clock_region_of({}, consts))
    seen = {start}
    todo = deque([start])
    transitions = []
    while todo:
        state = todo.popleft()
        location = ta.location(state.location)
        if location.is_final:
            continue
        moves = []
        delayed = time_successor(state.region, consts)
        if delayed.satisfies(location.invariant):
            moves.append((None, RegionState(state.location, delayed)))
        for edge in ta.edges_from(state.location):
            if not state.region.satisfies(edge.guard):
                continue
            region = state.region.reset(edge.resets)
            if not region.satisfies(ta.location(edge.target).invariant):
                continue
            label = label_of(indexed[id(edge)], edge)
            moves.append((label, RegionState(edge.target, region)))
        for label, nxt in moves:
            transitions.append((state, label, nxt))
            if nxt not in seen:
                if len(seen) >= max_states:
                    raise ResourceLimitError(
                        f"region automaton exceeded {max_states} states",
                        "max_states",
                        max_states,
                    )
                seen.add(nxt)
                todo.append(nxt)

    accepting = {s for s in seen if ta.location(s.location).is_final}
    if alphabet is None:
        alphabet = {t[1] for t in transitions if t[1] is not None} | set(ta.actions)
    nfa = Nfa.build(transitions, start, accepting, alphabet, seen)
    logger.debug(
        "region automaton: %d states, %d transitions",
        len(nfa.states),
        len(nfa.transitions),
    )
    return RegionAutomaton(nfa, tuple(consts.items()))
