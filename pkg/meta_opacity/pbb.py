"""Parikh-by-block automata.

A Parikh-by-block automaton abstracts a tick-instrumented automaton: its
edges are labelled with ``t`` (a time unit elapses) or ``f`` (the run
ends), and each edge carries the Parikh image of the updates performed
since the previous tick.
"""
import typing as T
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from logging import getLogger

from meta_opacity.errors import DimensionError, ResourceLimitError
from meta_opacity.nfa import Nfa, State, state_key
from meta_opacity.semilinear import (
    SemilinearSet,
    Vector,
    parikh_of_nfa,
    slset_intersection_witness,
)
from meta_opacity.transforms import FLUSH, TICK

logger = getLogger("meta_opacity")

END = "end"


class PbbEdge(T.NamedTuple):
    source: State
    label: str
    target: State
    image: SemilinearSet


@dataclass(frozen=True)
class PbbAutomaton:
    states: T.FrozenSet[State]
    initial: State
    accepting: T.FrozenSet[State]
    edges: T.Tuple[PbbEdge, ...]
    dim: int

    @cached_property
    def _outgoing(self) -> T.Dict[State, T.List[PbbEdge]]:
        out: T.Dict[State, T.List[PbbEdge]] = {}
        for e in self.edges:
            out.setdefault(e.source, []).append(e)
        return out

    def edges_from(self, state: State) -> T.List[PbbEdge]:
        return self._outgoing.get(state, [])

    def sorted_states(self) -> T.List[State]:
        return sorted(self.states, key=state_key)


class PathStep(T.NamedTuple):
    source: T.Tuple[State, State]
    label: str
    target: T.Tuple[State, State]
    vector: Vector


def parikh_by_block(
    nfa: Nfa,
    counted: T.Sequence[str],
    max_components: int = 2000,
    max_subsets: int = 2**16,
) -> PbbAutomaton:
    """Abstract ``nfa`` (over ``counted``, ``t`` and silent moves) into a
    Parikh-by-block automaton.

    States are the initial state and the targets of ticks. For a state
    ``p`` and a tick ``q -t-> q'``, the edge ``p -t-> q'`` carries the
    Parikh image of the tick-free words leading from ``p`` to ``q``; the
    edge ``p -f-> end`` carries the image of the tick-free words from ``p``
    to an accepting state. Edges with an empty image are not created.
    """
    dim = len(counted)
    ticks = [t for t in nfa.transitions if t.label == TICK]
    fragment = [t for t in nfa.transitions if t.label != TICK]
    alphabet = nfa.alphabet - {TICK}
    blocks = {nfa.initial} | {t.target for t in ticks}

    cache: T.Dict[T.Tuple[State, T.FrozenSet[State]], SemilinearSet] = {}

    def image(source: State, targets: T.FrozenSet[State]) -> SemilinearSet:
        key = (source, targets)
        if key not in cache:
            piece = Nfa.build(fragment, source, targets, alphabet, nfa.states)
            cache[key] = parikh_of_nfa(piece, counted, max_components, max_subsets)
        return cache[key]

    edges: T.List[PbbEdge] = []
    for p in sorted(blocks, key=state_key):
        for tick in ticks:
            found = image(p, frozenset([tick.source]))
            if not found.is_empty:
                edges.append(PbbEdge(p, TICK, tick.target, found))
        if nfa.accepting:
            found = image(p, nfa.accepting)
            if not found.is_empty:
                edges.append(PbbEdge(p, FLUSH, END, found))
    unique = tuple(dict.fromkeys(edges))
    logger.debug(
        "Parikh-by-block: %d blocks, %d edges from %d fragments",
        len(blocks),
        len(unique),
        len(cache),
    )
    return PbbAutomaton(
        states=frozenset(blocks | {END}),
        initial=nfa.initial,
        accepting=frozenset([END]),
        edges=unique,
        dim=dim,
    )


def pbb_product_check(
    p1: PbbAutomaton, p2: PbbAutomaton, max_states: int = 5000
) -> T.Tuple[bool, T.Optional[T.List[PathStep]]]:
    """Whether the synchronised product has an accepting path whose every
    edge pairs images with a common vector; the path is returned with one
    common vector per edge."""
    if p1.dim != p2.dim:
        raise DimensionError(f"dimension mismatch: {p1.dim} vs {p2.dim}")
    common: T.Dict[T.Tuple[PbbEdge, PbbEdge], T.Optional[Vector]] = {}
    start = (p1.initial, p2.initial)
    parent: T.Dict[T.Tuple[State, State], T.Optional[PathStep]] = {start: None}
    todo = deque([start])
    while todo:
        pair = todo.popleft()
        if pair[0] in p1.accepting and pair[1] in p2.accepting:
            path: T.List[PathStep] = []
            step = parent[pair]
            while step is not None:
                path.append(step)
                step = parent[step.source]
            path.reverse()
            return True, path
        for left in p1.edges_from(pair[0]):
            for right in p2.edges_from(pair[1]):
                if left.label != right.label:
                    continue
                if (left, right) not in common:
                    common[left, right] = slset_intersection_witness(
                        left.image, right.image
                    )
                vector = common[left, right]
                if vector is None:
                    continue
                nxt = (left.target, right.target)
                if nxt in parent:
                    continue
                if len(parent) >= max_states:
                    raise ResourceLimitError(
                        f"Parikh-by-block product exceeded {max_states} states",
                        "max_states",
                        max_states,
                    )
                parent[nxt] = PathStep(pair, left.label, nxt, vector)
                todo.append(nxt)
    logger.debug("Parikh-by-block product: %d pairs, no accepting path", len(parent))
    return False, None
