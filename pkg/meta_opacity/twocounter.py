"""Encoding of deterministic two-counter machines as discrete guarded models.

A machine that tests a counter lands in the class with two energies, energy
guards and a single clock, for which the opacity problems are undecidable;
the deciders are expected to reject it. A machine that only increments has
no guard and stays in the decidable positive class.
"""
import typing as T
from dataclasses import dataclass

from meta_opacity.errors import ModelError
from meta_opacity.model import (
    Edge,
    EnergyUpdateMap,
    GuardedMeta,
    Location,
    SimpleConstraint,
)

CLOCK = "t"


class Inc(T.NamedTuple):
    counter: int
    source: str
    target: str


class DecOrZero(T.NamedTuple):
    counter: int
    source: str
    target_if_nonzero: str
    target_if_zero: str


Transition = T.Union[Inc, DecOrZero]


@dataclass(frozen=True)
class TwoCounterMachine:
    states: T.Tuple[str, ...]
    halt_state: str
    transitions: T.Tuple[Transition, ...] = ()
    private_states: T.FrozenSet[str] = frozenset()

    @property
    def initial(self) -> str:
        return self.states[0]


def _energy(counter: int) -> str:
    if counter not in (1, 2):
        raise ModelError(f"counter must be 1 or 2, got {counter}")
    return f"eta{counter}"


def encode_two_counter_machine(machine: TwoCounterMachine) -> GuardedMeta:
    sources = [tr.source for tr in machine.transitions]
    duplicated = sorted({s for s in sources if sources.count(s) > 1})
    if duplicated:
        raise ModelError(f"machine is not deterministic in states {duplicated}")
    if machine.halt_state not in machine.states:
        raise ModelError(f"halt state {machine.halt_state} is not a state")
    if machine.halt_state in sources:
        raise ModelError("halt state must not have transitions")

    frozen_clock = SimpleConstraint.of((CLOCK, "<=", 0), (CLOCK, ">=", 0))
    locations = tuple(
        Location(
            name=state,
            invariant=frozen_clock,
            is_initial=state == machine.initial,
            is_final=state == machine.halt_state,
            is_private=state in machine.private_states,
        )
        for state in machine.states
    )
    edges: T.List[Edge] = []
    for tr in machine.transitions:
        eta = _energy(tr.counter)
        if isinstance(tr, Inc):
            inc = EnergyUpdateMap.of({eta: 1})
            edges.append(Edge(source=tr.source, target=tr.target, updates=inc))
            continue
        edges.append(
            Edge(
                source=tr.source,
                target=tr.target_if_nonzero,
                guard=SimpleConstraint.of((eta, ">", 0)),
                updates=EnergyUpdateMap.of({eta: -1}),
            )
        )
        edges.append(
            Edge(
                source=tr.source,
                target=tr.target_if_zero,
                guard=SimpleConstraint.of((eta, "<=", 0), (eta, ">=", 0)),
            )
        )
    return GuardedMeta(
        actions=frozenset(),
        clocks=(CLOCK,),
        energies=("eta1", "eta2"),
        locations=locations,
        edges=tuple(edges),
    )
