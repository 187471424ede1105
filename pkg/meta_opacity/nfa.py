import typing as T
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from logging import getLogger

import networkx as nx

from meta_opacity.errors import DimensionError, ResourceLimitError

logger = getLogger("meta_opacity")

State = T.Hashable
Word = T.Tuple[str, ...]


def state_key(state: State) -> str:
    return repr(state)


class Transition(T.NamedTuple):
    source: State
    label: T.Optional[str]
    target: State


@dataclass(frozen=True)
class Nfa:
    """Finite automaton; a ``None`` label is a silent move."""

    states: T.FrozenSet[State]
    alphabet: T.FrozenSet[str]
    transitions: T.Tuple[Transition, ...]
    initial: State
    accepting: T.FrozenSet[State]

    @classmethod
    def build(
        cls,
        transitions: T.Iterable[T.Tuple[State, T.Optional[str], State]],
        initial: State,
        accepting: T.Iterable[State],
        alphabet: T.Optional[T.Iterable[str]] = None,
        states: T.Iterable[State] = (),
    ) -> "Nfa":
        seen: T.Dict[Transition, None] = {}
        for t in transitions:
            seen.setdefault(Transition(*t), None)
        trans = tuple(seen)
        all_states = {initial, *states, *accepting}
        for t in trans:
            all_states.update((t.source, t.target))
        if alphabet is None:
            alphabet = {t.label for t in trans if t.label is not None}
        return cls(
            states=frozenset(all_states),
            alphabet=frozenset(alphabet),
            transitions=trans,
            initial=initial,
            accepting=frozenset(accepting),
        )

    @cached_property
    def _successors(self) -> T.Dict[State, T.List[T.Tuple[T.Optional[str], State]]]:
        out: T.Dict[State, T.List[T.Tuple[T.Optional[str], State]]] = {}
        for t in self.transitions:
            out.setdefault(t.source, []).append((t.label, t.target))
        return out

    def successors(self, state: State) -> T.List[T.Tuple[T.Optional[str], State]]:
        return self._successors.get(state, [])

    def sorted_states(self) -> T.List[State]:
        return sorted(self.states, key=state_key)

    @property
    def has_epsilon(self) -> bool:
        return any(t.label is None for t in self.transitions)

    def epsilon_closure(self, states: T.Iterable[State]) -> T.FrozenSet[State]:
        closure = set(states)
        todo = list(closure)
        while todo:
            state = todo.pop()
            for label, target in self.successors(state):
                if label is None and target not in closure:
                    closure.add(target)
                    todo.append(target)
        return frozenset(closure)

    def reachable(self) -> "Nfa":
        seen = {self.initial}
        todo = deque([self.initial])
        while todo:
            state = todo.popleft()
            for _, target in self.successors(state):
                if target not in seen:
                    seen.add(target)
                    todo.append(target)
        return Nfa.build(
            (t for t in self.transitions if t.source in seen),
            self.initial,
            self.accepting & seen,
            self.alphabet,
            seen,
        )

    def trim(self) -> "Nfa":
        """Keep the states that are reachable and co-reachable."""
        forward = self.reachable()
        backward: T.Dict[State, T.List[State]] = {}
        for t in forward.transitions:
            backward.setdefault(t.target, []).append(t.source)
        alive = set(forward.accepting)
        todo = list(alive)
        while todo:
            state = todo.pop()
            for source in backward.get(state, ()):
                if source not in alive:
                    alive.add(source)
                    todo.append(source)
        return Nfa.build(
            (t for t in forward.transitions if t.source in alive and t.target in alive),
            self.initial,
            forward.accepting,
            self.alphabet,
            {self.initial} | alive,
        )

    def remove_epsilon(self) -> "Nfa":
        if not self.has_epsilon:
            return self
        transitions = []
        accepting = set()
        for state in self.sorted_states():
            closure = self.epsilon_closure([state])
            if closure & self.accepting:
                accepting.add(state)
            for inner in sorted(closure, key=state_key):
                for label, target in self.successors(inner):
                    if label is not None:
                        transitions.append((state, label, target))
        result = Nfa.build(
            transitions, self.initial, accepting, self.alphabet, self.states
        )
        return result.reachable()

    def project(self, keep: T.Iterable[str]) -> "Nfa":
        """Silence every label outside ``keep``."""
        kept = frozenset(keep)
        transitions = [
            (t.source, t.label if t.label in kept else None, t.target)
            for t in self.transitions
        ]
        return Nfa.build(
            transitions,
            self.initial,
            self.accepting,
            kept,
            self.states,
        )

    def relabel(self, mapping: T.Mapping[T.Optional[str], T.Optional[str]]) -> "Nfa":
        transitions = [
            (t.source, mapping.get(t.label, t.label), t.target)
            for t in self.transitions
        ]
        alphabet = {mapping.get(a, a) for a in self.alphabet} - {None}
        return Nfa.build(
            transitions, self.initial, self.accepting, alphabet, self.states
        )

    def with_alphabet(self, alphabet: T.Iterable[str]) -> "Nfa":
        return Nfa.build(
            self.transitions, self.initial, self.accepting, alphabet, self.states
        )

    @property
    def is_deterministic(self) -> bool:
        if self.has_epsilon:
            return False
        seen = set()
        for t in self.transitions:
            if (t.source, t.label) in seen:
                return False
            seen.add((t.source, t.label))
        return True

    def determinize(self, max_subsets: int = 2**16, complete: bool = False) -> "Nfa":
        """Subset construction; states of the result are integers numbered
        in discovery order."""
        letters = sorted(self.alphabet)
        start = self.epsilon_closure([self.initial])
        ids: T.Dict[T.FrozenSet[State], int] = {start: 0}
        todo = deque([start])
        transitions = []
        accepting = set()
        while todo:
            subset = todo.popleft()
            if subset & self.accepting:
                accepting.add(ids[subset])
            moves: T.Dict[str, T.Set[State]] = {}
            for state in subset:
                for label, target in self.successors(state):
                    if label is not None:
                        moves.setdefault(label, set()).add(target)
            for letter in letters:
                if letter not in moves and not complete:
                    continue
                target = self.epsilon_closure(moves.get(letter, ()))
                if target not in ids:
                    if len(ids) >= max_subsets:
                        raise ResourceLimitError(
                            f"determinisation exceeded {max_subsets} subsets",
                            "max_subsets",
                            max_subsets,
                        )
                    ids[target] = len(ids)
                    todo.append(target)
                transitions.append((ids[subset], letter, ids[target]))
        logger.debug("determinised %d states into %d", len(self.states), len(ids))
        return Nfa.build(transitions, 0, accepting, self.alphabet, range(len(ids)))

    def complement(self, max_subsets: int = 2**16) -> "Nfa":
        dfa = self.determinize(max_subsets, complete=True)
        rejecting = dfa.states - dfa.accepting
        return Nfa.build(
            dfa.transitions, dfa.initial, rejecting, dfa.alphabet, dfa.states
        )

    def minimize(self, max_subsets: int = 2**16) -> "Nfa":
        """Minimal deterministic automaton for the same language, without a
        dead state."""
        dfa = self.determinize(max_subsets, complete=True)
        letters = sorted(dfa.alphabet)
        delta = {(t.source, t.label): t.target for t in dfa.transitions}
        order = sorted(dfa.states)
        block = {s: int(s in dfa.accepting) for s in order}
        while True:
            signatures = {
                s: (block[s], *(block[delta[s, a]] for a in letters)) for s in order
            }
            numbering: T.Dict[T.Tuple[int, ...], int] = {}
            for s in order:
                numbering.setdefault(signatures[s], len(numbering))
            refined = {s: numbering[signatures[s]] for s in order}
            if len(numbering) == len(set(block.values())):
                block = refined
                break
            block = refined
        transitions = {
            (block[s], a, block[delta[s, a]]) for s in order for a in letters
        }
        accepting = {block[s] for s in dfa.accepting}
        result = Nfa.build(
            sorted(transitions), block[dfa.initial], accepting, dfa.alphabet
        )
        return result.trim()

    def intersect(self, other: "Nfa") -> "Nfa":
        """Synchronised product; silent moves interleave."""
        start = (self.initial, other.initial)
        seen = {start}
        todo = deque([start])
        transitions = []
        while todo:
            pair = todo.popleft()
            left, right = pair
            moves = []
            for label, target in self.successors(left):
                if label is None:
                    moves.append((None, (target, right)))
                    continue
                for label2, target2 in other.successors(right):
                    if label2 == label:
                        moves.append((label, (target, target2)))
            for label2, target2 in other.successors(right):
                if label2 is None:
                    moves.append((None, (left, target2)))
            for label, nxt in moves:
                transitions.append((pair, label, nxt))
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        accepting = {
            p for p in seen if p[0] in self.accepting and p[1] in other.accepting
        }
        return Nfa.build(
            transitions, start, accepting, self.alphabet | other.alphabet, seen
        )

    def shortest_word(self) -> T.Optional[Word]:
        """A shortest accepted word, or ``None`` when the language is empty."""
        best: T.Dict[State, int] = {self.initial: 0}
        parent: T.Dict[State, T.Tuple[State, T.Optional[str]]] = {}
        todo: T.Deque[State] = deque([self.initial])
        done: T.Set[State] = set()
        while todo:
            state = todo.popleft()
            if state in done:
                continue
            done.add(state)
            if state in self.accepting:
                word: T.List[str] = []
                while state in parent:
                    state, label = parent[state]
                    if label is not None:
                        word.append(label)
                return tuple(reversed(word))
            for label, target in self.successors(state):
                cost = best[state] + (label is not None)
                if target not in best or cost < best[target]:
                    best[target] = cost
                    parent[target] = (state, label)
                    if label is None:
                        todo.appendleft(target)
                    else:
                        todo.append(target)
        return None

    def accepts(self, word: T.Sequence[str]) -> bool:
        current = self.epsilon_closure([self.initial])
        for letter in word:
            moved = {
                target
                for state in current
                for label, target in self.successors(state)
                if label == letter
            }
            current = self.epsilon_closure(moved)
        return bool(current & self.accepting)

    def words(self, max_length: int) -> T.Set[Word]:
        """All accepted words up to ``max_length`` letters."""
        free = self.remove_epsilon()
        found: T.Set[Word] = set()
        layer = {(free.initial, ())}
        for depth in range(max_length + 1):
            found.update(w for s, w in layer if s in free.accepting)
            if depth == max_length:
                break
            layer = {
                (target, (*word, label))
                for state, word in layer
                for label, target in free.successors(state)
            }
        return found

    def to_graph(self) -> nx.MultiDiGraph:
        graph = nx.MultiDiGraph()
        for state in self.sorted_states():
            graph.add_node(
                state, initial=state == self.initial, accepting=state in self.accepting
            )
        for t in self.transitions:
            graph.add_edge(t.source, t.target, label=t.label)
        return graph


def _same_alphabet(a: Nfa, b: Nfa) -> None:
    if a.alphabet != b.alphabet:
        raise DimensionError(
            f"alphabet mismatch: {sorted(a.alphabet)} vs {sorted(b.alphabet)}"
        )


def nfa_inclusion(
    a: Nfa, b: Nfa, max_subsets: int = 2**16
) -> T.Tuple[bool, T.Optional[Word]]:
    """Whether L(a) ⊆ L(b), with a shortest counterexample otherwise."""
    _same_alphabet(a, b)
    witness = a.intersect(b.complement(max_subsets)).shortest_word()
    return witness is None, witness


def nfa_intersect_emptiness(a: Nfa, b: Nfa) -> T.Tuple[bool, T.Optional[Word]]:
    """Whether L(a) ∩ L(b) is empty, with a shortest common word otherwise."""
    _same_alphabet(a, b)
    witness = a.intersect(b).shortest_word()
    return witness is None, witness
