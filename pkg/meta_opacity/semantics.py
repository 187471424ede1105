"""Concrete semantics with exact rational time and energy.

A step is a delay followed by a discrete transition. Every constraint atom
is affine in the elapsed time, so an invariant holds during a delay iff it
holds at both ends of it; the same argument covers energy non-negativity.
"""
import enum
import math
import typing as T
from dataclasses import dataclass
from fractions import Fraction
from logging import getLogger

from meta_opacity.errors import SemanticsError
from meta_opacity.model import Edge, GuardedMeta

logger = getLogger("meta_opacity")

Vector = T.Tuple[Fraction, ...]


def as_fraction(value: T.Union[int, str, Fraction]) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(str(value))


def fraction_str(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class ConcreteState:
    location: str
    clock_values: T.Tuple[T.Tuple[str, Fraction], ...]
    energy_values: T.Tuple[T.Tuple[str, Fraction], ...]

    @classmethod
    def make(
        cls,
        meta: GuardedMeta,
        location: str,
        clocks: T.Mapping[str, Fraction],
        energies: T.Mapping[str, Fraction],
    ) -> "ConcreteState":
        return cls(
            location,
            tuple((c, as_fraction(clocks.get(c, 0))) for c in meta.clocks),
            tuple((e, as_fraction(energies.get(e, 0))) for e in meta.energies),
        )

    def clocks(self) -> T.Dict[str, Fraction]:
        return dict(self.clock_values)

    def energies(self) -> T.Dict[str, Fraction]:
        return dict(self.energy_values)

    def valuation(self) -> T.Dict[str, Fraction]:
        merged = self.clocks()
        merged.update(self.energy_values)
        return merged

    @property
    def energy_vector(self) -> Vector:
        return tuple(v for _, v in self.energy_values)


class Step(T.NamedTuple):
    delay: Fraction
    edge: Edge
    state: ConcreteState


@dataclass(frozen=True)
class Run:
    initial: ConcreteState
    steps: T.Tuple[Step, ...] = ()

    @property
    def last(self) -> ConcreteState:
        return self.steps[-1].state if self.steps else self.initial

    @property
    def duration(self) -> Fraction:
        return sum((s.delay for s in self.steps), Fraction(0))

    def states(self) -> T.Iterator[ConcreteState]:
        yield self.initial
        for step in self.steps:
            yield step.state

    def extend(self, delay: Fraction, edge: Edge, state: ConcreteState) -> "Run":
        return Run(self.initial, (*self.steps, Step(delay, edge, state)))


def initial_state(meta: GuardedMeta) -> ConcreteState:
    return ConcreteState.make(meta, meta.initial.name, {}, {})


def _check_invariant(meta: GuardedMeta, location: str, valuation, when: str) -> None:
    atom = meta.location(location).invariant.failing(valuation)
    if atom is not None:
        raise SemanticsError(
            f"invariant {atom} of {location} violated {when}", "invariant", atom
        )


def _check_energies(energies: T.Mapping[str, Fraction], when: str) -> None:
    for name, value in energies.items():
        if value < 0:
            raise SemanticsError(
                f"energy {name} negative ({fraction_str(value)}) {when}",
                "negative-energy",
                name,
            )


def delay_successor(
    meta: GuardedMeta, state: ConcreteState, d: T.Union[int, str, Fraction]
) -> ConcreteState:
    d = as_fraction(d)
    if d < 0:
        raise SemanticsError(f"negative delay {fraction_str(d)}", "negative-delay")
    if d == 0:
        return state
    loc = meta.location(state.location)
    clocks = {c: v + d for c, v in state.clock_values}
    energies = {e: v + loc.rates.get(e) * d for e, v in state.energy_values}
    _check_energies(energies, "during delay")
    successor = ConcreteState.make(meta, state.location, clocks, energies)
    _check_invariant(meta, state.location, successor.valuation(), "during delay")
    return successor


def discrete_successor(
    meta: GuardedMeta, state: ConcreteState, edge: Edge
) -> ConcreteState:
    if edge.source != state.location:
        raise SemanticsError(
            f"edge {edge.label} does not leave {state.location}", "wrong-source"
        )
    atom = edge.guard.failing(state.valuation())
    if atom is not None:
        raise SemanticsError(f"guard {atom} unsatisfied", "guard", atom)
    clocks = {c: v for c, v in state.clock_values if c not in edge.resets}
    clocks.update((c, Fraction(0)) for c in edge.resets)
    energies = {e: v + edge.updates.get(e) for e, v in state.energy_values}
    _check_energies(energies, "after update")
    successor = ConcreteState.make(meta, edge.target, clocks, energies)
    _check_invariant(meta, edge.target, successor.valuation(), "on entry")
    return successor


def step(
    meta: GuardedMeta, state: ConcreteState, delay, edge: Edge
) -> ConcreteState:
    return discrete_successor(meta, delay_successor(meta, state, delay), edge)


def check_run(meta: GuardedMeta, run: Run) -> None:
    state = run.initial
    for i, s in enumerate(run.steps):
        try:
            expected = step(meta, state, s.delay, s.edge)
        except SemanticsError as e:
            raise SemanticsError(f"step {i}: {e}", e.code, e.atom, e) from e
        if expected != s.state:
            raise SemanticsError(f"step {i}: recorded state differs", "malformed-run")
        state = s.state


def replay(
    meta: GuardedMeta,
    script: T.Iterable[T.Tuple[T.Union[int, str, Fraction], T.Optional[str]]],
) -> Run:
    """Replay ``(delay, selector)`` pairs from the initial state.

    A selector is an edge name, an action name or ``None`` for a silent
    edge; it must designate exactly one enabled edge.
    """
    run = Run(initial_state(meta))
    for i, (delay, selector) in enumerate(script):
        delay = as_fraction(delay)
        state = delay_successor(meta, run.last, delay)
        candidates = [
            e
            for e in meta.edges_from(state.location)
            if e.action == selector or (selector is not None and selector == e.label)
        ]
        enabled: T.List[T.Tuple[Edge, ConcreteState]] = []
        first_error: T.Optional[SemanticsError] = None
        for edge in candidates:
            try:
                enabled.append((edge, discrete_successor(meta, state, edge)))
            except SemanticsError as e:
                first_error = first_error or e
        if not enabled:
            if first_error is not None:
                raise SemanticsError(
                    f"step {i}: {first_error}", first_error.code, first_error.atom
                )
            raise SemanticsError(
                f"step {i}: no edge {selector!r} leaves {state.location}", "no-edge"
            )
        if len(enabled) > 1:
            raise SemanticsError(
                f"step {i}: selector {selector!r} is ambiguous", "ambiguous"
            )
        edge, successor = enabled[0]
        run = run.extend(delay, edge, successor)
    return run


class RunStats(T.NamedTuple):
    duration: Fraction
    final_energies: Vector
    is_private: bool
    is_public: bool
    timed_word: T.Tuple[T.Tuple[Fraction, str], ...]


def run_stats(meta: GuardedMeta, run: Run) -> RunStats:
    location = run.initial.location
    now = Fraction(0)
    word: T.List[T.Tuple[Fraction, str]] = []
    for i, s in enumerate(run.steps):
        broken = s.edge.source != location or s.edge.target != s.state.location
        if s.delay < 0 or broken:
            raise SemanticsError(f"step {i} does not continue the run", "malformed-run")
        now += s.delay
        if s.edge.action is not None:
            word.append((now, s.edge.action))
        location = s.state.location
    visited = any(meta.location(st.location).is_private for st in run.states())
    final = meta.location(run.last.location).is_final
    return RunStats(
        duration=now,
        final_energies=run.last.energy_vector,
        is_private=final and visited,
        is_public=final and not visited,
        timed_word=tuple(word),
    )


def energy_level(run: Run, t: Fraction) -> Vector:
    """Valuation after the last event whose absolute time is at most ``t``."""
    level = run.initial.energy_vector
    now = Fraction(0)
    for s in run.steps:
        now += s.delay
        if now > t:
            break
        level = s.state.energy_vector
    return level


def energy_at(meta: GuardedMeta, run: Run, t: T.Union[int, str, Fraction]) -> Vector:
    """Continuous energy level at absolute time ``t``; frozen after the run."""
    t = as_fraction(t)
    state, since = run.initial, Fraction(0)
    now = Fraction(0)
    for s in run.steps:
        if now + s.delay > t:
            break
        now += s.delay
        state, since = s.state, now
    if t > run.duration:
        return state.energy_vector
    rates = meta.location(state.location).rates
    return tuple(v + rates.get(e) * (t - since) for e, v in state.energy_values)


class TraceKind(enum.Enum):
    DEO = "DEO"
    BDEO = "bDEO"


@dataclass(frozen=True)
class ObservationTrace:
    kind: TraceKind
    ticks: tuple
    degenerate: bool = False


def deo(run: Run) -> ObservationTrace:
    duration = run.duration
    if duration == 0:
        return ObservationTrace(TraceKind.DEO, (), degenerate=True)
    n = math.ceil(duration)
    return ObservationTrace(
        TraceKind.DEO, tuple(energy_level(run, Fraction(k)) for k in range(1, n + 1))
    )


def absolute_times(run: Run) -> T.List[T.Tuple[Fraction, Vector]]:
    now = Fraction(0)
    events = []
    for s in run.steps:
        now += s.delay
        events.append((now, s.state.energy_vector))
    return events


def destutter(
    events: T.Sequence[T.Tuple[Fraction, Vector]], start: T.Optional[Vector] = None
) -> T.List[T.Tuple[Fraction, Vector]]:
    kept: T.List[T.Tuple[Fraction, Vector]] = []
    previous = start
    for when, value in events:
        if value != previous:
            kept.append((when, value))
        previous = value
    return kept


def subsequence_in(
    events: T.Sequence[T.Tuple[Fraction, Vector]], tau: int
) -> T.Tuple[Vector, ...]:
    low = Fraction(-1 if tau == 1 else tau - 1)
    return tuple(v for when, v in events if low < when <= tau)


def bdeo(run: Run) -> ObservationTrace:
    events = destutter(absolute_times(run), run.initial.energy_vector)
    n = math.ceil(run.duration)
    return ObservationTrace(
        TraceKind.BDEO, tuple(subsequence_in(events, tau) for tau in range(1, n + 1))
    )


class ObservationKind(enum.Enum):
    EN = "EN"
    ET = "ET"
    ET_EN = "ET_EN"
    DE = "DE"
    BDE = "BDE"


def observe(kind: ObservationKind, run: Run) -> T.Hashable:
    if kind is ObservationKind.EN:
        return run.last.energy_vector
    if kind is ObservationKind.ET:
        return run.duration
    if kind is ObservationKind.ET_EN:
        return (run.duration, run.last.energy_vector)
    if kind is ObservationKind.DE:
        return deo(run).ticks
    return bdeo(run).ticks


def grid_delays(grid: Fraction, budget: Fraction) -> T.Iterator[Fraction]:
    k = 0
    while k * grid <= budget:
        yield k * grid
        k += 1


def enumerate_runs(
    meta: GuardedMeta,
    max_steps: int,
    delay_grid: T.Union[int, str, Fraction],
    horizon: T.Union[int, str, Fraction],
    prune_key: T.Optional[T.Callable[[Run], T.Hashable]] = None,
) -> T.Iterator[Run]:
    """Yield every run with delays on the grid, total duration within the
    horizon and at most ``max_steps`` steps, depth first.

    With ``prune_key``, a run whose key was already produced at the same
    depth is neither yielded nor extended.
    """
    grid, horizon = as_fraction(delay_grid), as_fraction(horizon)
    if grid <= 0:
        raise ValueError("delay grid must be positive")
    seen: T.Set[T.Hashable] = set()
    stack: T.List[T.Tuple[Run, Fraction]] = [(Run(initial_state(meta)), Fraction(0))]
    while stack:
        run, elapsed = stack.pop()
        if prune_key is not None:
            key = (len(run.steps), prune_key(run))
            if key in seen:
                continue
            seen.add(key)
        yield run
        if len(run.steps) >= max_steps:
            continue
        children: T.List[T.Tuple[Run, Fraction]] = []
        for d in grid_delays(grid, horizon - elapsed):
            try:
                waited = delay_successor(meta, run.last, d)
            except SemanticsError:
                # invariants are convex: longer delays fail as well
                break
            for edge in meta.edges_from(run.last.location):
                try:
                    nxt = discrete_successor(meta, waited, edge)
                except SemanticsError:
                    continue
                children.append((run.extend(d, edge, nxt), elapsed + d))
        stack.extend(reversed(children))
