"""Pushdown automata, context-free grammars and their Parikh images.

A PDA edge pops exactly one stack symbol and pushes a string written top
first; the initial stack is the bottom symbol alone and acceptance is by
final state. The energy constructions keep one stack symbol per energy
unit above a bottom marker, so a run that would take the energy below
zero has no move.
"""
import heapq
import itertools
import typing as T
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from logging import getLogger

from meta_opacity.errors import DimensionError, ResourceLimitError, UnsupportedClassError
from meta_opacity.nfa import Nfa, State, Word, state_key
from meta_opacity.semilinear import LinearSet, SemilinearSet, Vector, add, zero
from meta_opacity.transforms import (
    FLUSH,
    TICK,
    dec_label,
    inc_label,
    parse_marker,
    parse_unit,
)

logger = getLogger("meta_opacity")

BOTTOM = "⊥"
UNIT = "e"
DRAIN = "a"

Stack = T.Tuple[str, ...]


class PdaEdge(T.NamedTuple):
    source: State
    label: T.Optional[str]
    pop: str
    target: State
    push: Stack

    def __str__(self) -> str:
        return f"{self.label or 'ε'}, {self.pop}/{''.join(self.push) or 'ε'}"


@dataclass(frozen=True)
class Control:
    """A control state built by a construction from a state of its input."""

    tag: str
    inner: T.Hashable
    level: int = 0

    def __repr__(self) -> str:
        return f"{self.tag}({self.inner!r},{self.level})"


@dataclass(frozen=True)
class Pda:
    states: T.FrozenSet[State]
    alphabet: T.FrozenSet[str]
    stack_alphabet: T.FrozenSet[str]
    initial: State
    accepting: T.FrozenSet[State]
    edges: T.Tuple[PdaEdge, ...]
    bottom: str = BOTTOM

    @classmethod
    def build(
        cls,
        edges: T.Iterable[T.Tuple[State, T.Optional[str], str, State, Stack]],
        initial: State,
        accepting: T.Iterable[State],
        alphabet: T.Optional[T.Iterable[str]] = None,
        states: T.Iterable[State] = (),
        bottom: str = BOTTOM,
    ) -> "Pda":
        unique: T.Dict[PdaEdge, None] = {}
        for e in edges:
            edge = PdaEdge(e[0], e[1], e[2], e[3], tuple(e[4]))
            if bottom in edge.push and (
                edge.pop != bottom
                or edge.push[-1] != bottom
                or edge.push.count(bottom) != 1
            ):
                raise ValueError(f"edge {edge} pushes the bottom symbol")
            unique.setdefault(edge, None)
        trans = tuple(unique)
        all_states = {initial, *states, *accepting}
        symbols = {bottom}
        for e in trans:
            all_states.update((e.source, e.target))
            symbols.add(e.pop)
            symbols.update(e.push)
        if alphabet is None:
            alphabet = {e.label for e in trans if e.label is not None}
        return cls(
            states=frozenset(all_states),
            alphabet=frozenset(alphabet),
            stack_alphabet=frozenset(symbols),
            initial=initial,
            accepting=frozenset(accepting),
            edges=trans,
            bottom=bottom,
        )

    @cached_property
    def _outgoing(self) -> T.Dict[State, T.List[PdaEdge]]:
        out: T.Dict[State, T.List[PdaEdge]] = {}
        for e in self.edges:
            out.setdefault(e.source, []).append(e)
        return out

    def edges_from(self, state: State) -> T.List[PdaEdge]:
        return self._outgoing.get(state, [])

    def sorted_states(self) -> T.List[State]:
        return sorted(self.states, key=state_key)

    def trim(self) -> "Pda":
        """Drop control states that cannot lie on an initial-to-accepting
        path of the control graph."""
        forward = {self.initial}
        todo = [self.initial]
        while todo:
            for e in self.edges_from(todo.pop()):
                if e.target not in forward:
                    forward.add(e.target)
                    todo.append(e.target)
        backward: T.Dict[State, T.Set[State]] = {}
        for e in self.edges:
            backward.setdefault(e.target, set()).add(e.source)
        alive = set(self.accepting & forward)
        todo = list(alive)
        while todo:
            for source in backward.get(todo.pop(), ()):
                if source in forward and source not in alive:
                    alive.add(source)
                    todo.append(source)
        return Pda.build(
            (e for e in self.edges if e.source in alive and e.target in alive),
            self.initial,
            self.accepting & alive,
            self.alphabet,
            {self.initial} | alive,
            self.bottom,
        )

    def normalize(self) -> "Pda":
        """Factor pushes longer than two symbols through fresh states."""
        if all(len(e.push) <= 2 for e in self.edges):
            return self
        edges = []
        for k, e in enumerate(self.edges):
            if len(e.push) <= 2:
                edges.append(e)
                continue
            # replace the popped symbol by the bottom two pushed symbols,
            # then grow the string one symbol at a time
            push = e.push
            chain = [Control("push", k, j) for j in range(len(push) - 2)]
            edges.append((e.source, e.label, e.pop, chain[0], push[-2:]))
            for j in range(len(chain)):
                below = push[len(push) - 2 - j]
                target = chain[j + 1] if j + 1 < len(chain) else e.target
                top = push[len(push) - 3 - j]
                edges.append((chain[j], None, below, target, (top, below)))
        return Pda.build(
            edges, self.initial, self.accepting, self.alphabet, self.states, self.bottom
        )

    def _moves(self, state: State, stack: Stack):
        if not stack:
            return
        for e in self.edges_from(state):
            if e.pop == stack[0]:
                yield e, e.push + stack[1:]

    def accepts(self, word: T.Sequence[str], max_stack: T.Optional[int] = None) -> bool:
        """Bounded simulation: stacks higher than ``max_stack`` are cut."""
        limit = max_stack if max_stack is not None else 2 * len(word) + 8
        start = (self.initial, 0, (self.bottom,))
        seen = {start}
        todo = deque([start])
        while todo:
            state, i, stack = todo.popleft()
            if i == len(word) and state in self.accepting:
                return True
            for e, pushed in self._moves(state, stack):
                if len(pushed) > limit:
                    continue
                if e.label is None:
                    nxt = (e.target, i, pushed)
                elif i < len(word) and e.label == word[i]:
                    nxt = (e.target, i + 1, pushed)
                else:
                    continue
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        return False

    def words(self, max_length: int, max_stack: T.Optional[int] = None) -> T.Set[Word]:
        """Accepted words of at most ``max_length`` letters, under the same
        stack bound as :meth:`accepts`."""
        limit = max_stack if max_stack is not None else 2 * max_length + 8
        start: T.Tuple[State, Word, Stack] = (self.initial, (), (self.bottom,))
        seen = {start}
        todo = deque([start])
        found: T.Set[Word] = set()
        while todo:
            state, word, stack = todo.popleft()
            if state in self.accepting:
                found.add(word)
            for e, pushed in self._moves(state, stack):
                if len(pushed) > limit:
                    continue
                if e.label is None:
                    nxt = (e.target, word, pushed)
                elif len(word) < max_length:
                    nxt = (e.target, (*word, e.label), pushed)
                else:
                    continue
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        return found


def _counter_unit(label: T.Optional[str]) -> T.Optional[str]:
    unit = parse_unit(label)
    if unit is None:
        return None
    kind, index = unit
    if index != 1:
        raise UnsupportedClassError(
            "the energy stack tracks a single energy variable",
            f"label {label} updates energy {index}",
        )
    return kind


def _drain(
    edges: T.List[T.Tuple[State, T.Optional[str], str, State, Stack]],
    source: State,
    drain: State,
    done: State,
) -> None:
    for symbol in (BOTTOM, UNIT):
        edges.append((source, None, symbol, drain, (symbol,)))
    edges.append((drain, DRAIN, UNIT, drain, ()))
    edges.append((drain, None, BOTTOM, done, (BOTTOM,)))


def energy_pda_of_nfa(nfa: Nfa) -> Pda:
    """Pushdown automaton whose accepted words are the words of ``nfa``
    with updates made silent, followed by one ``a`` per unit of final
    energy; words driving the energy below zero are dropped.

    Each accepting state silently enters a drain state that pops the
    remaining units with ``a`` and tests the bottom on the way to a fresh
    accepting state.
    """
    edges: T.List[T.Tuple[State, T.Optional[str], str, State, Stack]] = []
    alphabet = {DRAIN}

    def run(q: State) -> Control:
        return Control("run", q)

    for t in nfa.transitions:
        atoms, _ = parse_marker(t.label)
        if atoms:
            raise UnsupportedClassError(
                "guard markers need the guarded construction",
                f"label {t.label} carries an energy guard",
            )
        kind = _counter_unit(t.label)
        source, target = run(t.source), run(t.target)
        if kind == "inc":
            for symbol in (BOTTOM, UNIT):
                edges.append((source, None, symbol, target, (UNIT, symbol)))
        elif kind == "dec":
            edges.append((source, None, UNIT, target, ()))
        else:
            if t.label is not None:
                alphabet.add(t.label)
            for symbol in (BOTTOM, UNIT):
                edges.append((source, t.label, symbol, target, (symbol,)))
    accepting = []
    for q in sorted(nfa.accepting, key=state_key):
        done = Control("done", q)
        _drain(edges, run(q), Control("drain", q), done)
        accepting.append(done)
    return Pda.build(edges, run(nfa.initial), accepting, alphabet)


def guarded_energy_pda(nfa: Nfa, max_constant: int) -> Pda:
    """Energy stack for automata whose energy guards are marker labels.

    Values up to ``max_constant`` are kept in the control state, one copy
    per value, where markers are evaluated exactly; above it a top copy
    counts the excess on the stack and every marker reads as "above the
    largest constant". The drain emits one ``a`` per stacked unit and one
    per copy traversed down to copy 0.
    """
    if max_constant < 0:
        raise ValueError(f"maximal constant must be non-negative, got {max_constant}")
    top = max_constant + 1
    levels = range(max_constant + 1)
    edges: T.List[T.Tuple[State, T.Optional[str], str, State, Stack]] = []
    alphabet = {DRAIN}

    def copy(q: State, level: int) -> Control:
        return Control("copy", q, level)

    for t in nfa.transitions:
        atoms, rest = parse_marker(t.label)
        kind = _counter_unit(rest)
        label = None if kind else rest
        if label is not None:
            alphabet.add(label)
        for level in levels:
            if not all(a.relation.holds(level, a.bound) for a in atoms):
                continue
            if kind == "inc":
                reached = level + 1
            elif kind == "dec":
                if level == 0:
                    continue
                reached = level - 1
            else:
                reached = level
            edges.append(
                (copy(t.source, level), label, BOTTOM, copy(t.target, reached), (BOTTOM,))
            )
        if not all(not a.relation.is_upper for a in atoms):
            continue
        source, target = copy(t.source, top), copy(t.target, top)
        if kind == "inc":
            for symbol in (BOTTOM, UNIT):
                edges.append((source, None, symbol, target, (UNIT, symbol)))
        elif kind == "dec":
            edges.append((source, None, UNIT, target, ()))
            edges.append(
                (source, None, BOTTOM, copy(t.target, max_constant), (BOTTOM,))
            )
        else:
            for symbol in (BOTTOM, UNIT):
                edges.append((source, label, symbol, target, (symbol,)))

    accepting = []
    for q in sorted(nfa.accepting, key=state_key):
        drains = [Control("drain", q, level) for level in range(top + 1)]
        for level in levels:
            edges.append((copy(q, level), None, BOTTOM, drains[level], (BOTTOM,)))
        _drain(edges, copy(q, top), drains[top], drains[max_constant])
        # the bottom test above already accounts for the first unit of the
        # top copy; relabel it
        edges[-1] = (drains[top], DRAIN, BOTTOM, drains[max_constant], (BOTTOM,))
        for level in range(max_constant, 0, -1):
            edges.append((drains[level], DRAIN, BOTTOM, drains[level - 1], (BOTTOM,)))
        accepting.append(drains[0])
    return Pda.build(edges, copy(nfa.initial, 0), accepting, alphabet)


def l_geq0_pda(
    inc: str = inc_label(1),
    dec: str = dec_label(1),
    neutral: T.Sequence[str] = (TICK, FLUSH),
) -> Pda:
    """Single-state automaton for the words whose every prefix has at least
    as many ``inc`` as ``dec``."""
    s = "s"
    edges: T.List[T.Tuple[State, T.Optional[str], str, State, Stack]] = []
    for symbol in (BOTTOM, UNIT):
        edges.append((s, inc, symbol, s, (UNIT, symbol)))
        edges.append((s, inc, symbol, s, (symbol,)))
        for letter in neutral:
            edges.append((s, letter, symbol, s, (symbol,)))
    edges.append((s, dec, UNIT, s, ()))
    return Pda.build(edges, s, [s], {inc, dec, *neutral})


def pda_nfa_product(p: Pda, n: Nfa) -> Pda:
    if p.alphabet != n.alphabet:
        raise DimensionError(
            f"alphabet mismatch: {sorted(p.alphabet)} vs {sorted(n.alphabet)}"
        )
    start = (p.initial, n.initial)
    seen = {start}
    todo = deque([start])
    edges = []
    while todo:
        pair = todo.popleft()
        left, right = pair
        moves = []
        for e in p.edges_from(left):
            if e.label is None:
                moves.append((None, e.pop, (e.target, right), e.push))
                continue
            for label, target in n.successors(right):
                if label == e.label:
                    moves.append((e.label, e.pop, (e.target, target), e.push))
        for label, target in n.successors(right):
            if label is None:
                for symbol in sorted(p.stack_alphabet):
                    moves.append((None, symbol, (left, target), (symbol,)))
        for label, pop, nxt, push in moves:
            edges.append((pair, label, pop, nxt, push))
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    accepting = {s for s in seen if s[0] in p.accepting and s[1] in n.accepting}
    return Pda.build(edges, start, accepting, p.alphabet, seen, p.bottom)


class Nonterminal(T.NamedTuple):
    kind: str
    args: tuple = ()

    def __str__(self) -> str:
        if not self.args:
            return self.kind
        return f"{self.kind}[{','.join(repr(a) for a in self.args)}]"


Symbol = T.Union[str, Nonterminal]


class Production(T.NamedTuple):
    lhs: Nonterminal
    body: T.Tuple[Symbol, ...]

    @property
    def children(self) -> T.List[Nonterminal]:
        return [s for s in self.body if isinstance(s, Nonterminal)]

    @property
    def letters(self) -> T.List[str]:
        return [s for s in self.body if not isinstance(s, Nonterminal)]


@dataclass(frozen=True)
class Cfg:
    nonterminals: T.FrozenSet[Nonterminal]
    terminals: T.FrozenSet[str]
    start: Nonterminal
    productions: T.Tuple[Production, ...]

    @classmethod
    def build(cls, start: Nonterminal, productions: T.Iterable[Production]) -> "Cfg":
        prods = tuple(dict.fromkeys(productions))
        nonterminals = {start}
        terminals = set()
        for p in prods:
            nonterminals.add(p.lhs)
            nonterminals.update(p.children)
            terminals.update(p.letters)
        return cls(frozenset(nonterminals), frozenset(terminals), start, prods)

    def productive(self) -> T.FrozenSet[Nonterminal]:
        found: T.Set[Nonterminal] = set()
        changed = True
        while changed:
            changed = False
            for p in self.productions:
                if p.lhs not in found and all(c in found for c in p.children):
                    found.add(p.lhs)
                    changed = True
        return frozenset(found)

    def reduced(self) -> "Cfg":
        """Keep productions over productive symbols reachable from the start."""
        alive = self.productive()
        useful = [
            p
            for p in self.productions
            if p.lhs in alive and all(c in alive for c in p.children)
        ]
        by_lhs: T.Dict[Nonterminal, T.List[Production]] = {}
        for p in useful:
            by_lhs.setdefault(p.lhs, []).append(p)
        reached = {self.start}
        todo = [self.start]
        while todo:
            for p in by_lhs.get(todo.pop(), ()):
                for c in p.children:
                    if c not in reached:
                        reached.add(c)
                        todo.append(c)
        return Cfg.build(self.start, (p for p in useful if p.lhs in reached))

    def shortest_derivations(self) -> T.Dict[Nonterminal, T.Tuple[int, Production]]:
        """Cheapest production of every productive symbol, a production
        costing its letters plus the cost of its children."""
        uses: T.Dict[Nonterminal, T.List[int]] = {}
        waiting = []
        heap: T.List[T.Tuple[int, int, int]] = []
        for i, p in enumerate(self.productions):
            children = p.children
            waiting.append(len(children))
            for c in children:
                uses.setdefault(c, []).append(i)
            if not children:
                heapq.heappush(heap, (len(p.letters), i, i))
        best: T.Dict[Nonterminal, T.Tuple[int, Production]] = {}
        while heap:
            cost, _, i = heapq.heappop(heap)
            p = self.productions[i]
            if p.lhs in best:
                continue
            best[p.lhs] = (cost, p)
            for j in uses.get(p.lhs, ()):
                waiting[j] -= 1
                if waiting[j] == 0:
                    q = self.productions[j]
                    total = len(q.letters) + sum(best[c][0] for c in q.children)
                    heapq.heappush(heap, (total, j, j))
        return best

    def shortest_word(self) -> T.Optional[Word]:
        best = self.shortest_derivations()
        if self.start not in best:
            return None
        word: T.List[str] = []
        todo: T.List[Symbol] = [self.start]
        while todo:
            symbol = todo.pop()
            if isinstance(symbol, Nonterminal):
                todo.extend(reversed(best[symbol][1].body))
            else:
                word.append(symbol)
        return tuple(word)


def _summary(p: State, symbol: str, q: State) -> Nonterminal:
    return Nonterminal("S", (p, symbol, q))


def _head(p: State, symbol: str) -> Nonterminal:
    return Nonterminal("H", (p, symbol))


def _control_closure(pda: Pda) -> T.Dict[State, T.FrozenSet[State]]:
    closure = {}
    for state in pda.states:
        seen = {state}
        todo = [state]
        while todo:
            for e in pda.edges_from(todo.pop()):
                if e.target not in seen:
                    seen.add(e.target)
                    todo.append(e.target)
        closure[state] = frozenset(seen)
    return closure


def pda_to_cfg(pda: Pda) -> Cfg:
    """Grammar for ``L(pda)``.

    ``S[p,X,q]`` derives the words read from ``p`` with ``X`` on top until
    that ``X`` is popped in ``q``; ``H[p,X]`` derives the words leading to a
    configuration in ``p`` with ``X`` on top; ``E[q]`` the words emptying the
    stack in ``q``.
    """
    pda = pda.normalize().trim()
    closure = _control_closure(pda)
    start = Nonterminal("start")
    productions: T.List[Production] = [Production(_head(pda.initial, pda.bottom), ())]

    def letter(e: PdaEdge) -> T.Tuple[str, ...]:
        return (e.label,) if e.label is not None else ()

    for e in pda.edges:
        a = letter(e)
        if not e.push:
            productions.append(Production(_summary(e.source, e.pop, e.target), a))
            continue
        first = e.push[0]
        productions.append(Production(_head(e.target, first), (_head(e.source, e.pop), *a)))
        if len(e.push) == 1:
            for r in sorted(closure[e.target], key=state_key):
                productions.append(
                    Production(
                        _summary(e.source, e.pop, r), (*a, _summary(e.target, first, r))
                    )
                )
            continue
        second = e.push[1]
        for r1 in sorted(closure[e.target], key=state_key):
            middle = _summary(e.target, first, r1)
            productions.append(
                Production(_head(r1, second), (_head(e.source, e.pop), *a, middle))
            )
            for r in sorted(closure[r1], key=state_key):
                productions.append(
                    Production(
                        _summary(e.source, e.pop, r),
                        (*a, middle, _summary(r1, second, r)),
                    )
                )
    for q in sorted(pda.accepting, key=state_key):
        empty = Nonterminal("E", (q,))
        productions.append(Production(empty, (_summary(pda.initial, pda.bottom, q),)))
        productions.append(Production(start, (empty,)))
        for symbol in sorted(pda.stack_alphabet):
            productions.append(Production(start, (_head(q, symbol),)))
    cfg = Cfg.build(start, productions)
    logger.debug(
        "grammar of a %d-state PDA: %d nonterminals, %d productions",
        len(pda.states),
        len(cfg.nonterminals),
        len(cfg.productions),
    )
    return cfg


def pda_emptiness(pda: Pda) -> T.Tuple[bool, T.Optional[Word]]:
    """Whether ``L(pda)`` is empty, with a shortest accepted word otherwise."""
    word = pda_to_cfg(pda).shortest_word()
    return word is None, word


Tree = T.Tuple[Vector, T.FrozenSet[Nonterminal]]


class _ParikhTrees:
    """Derivation trees without a nonterminal repeated on any path, and
    pumps whose root children are such trees, as (Parikh vector, set of
    nonterminals) pairs."""

    def __init__(self, cfg: Cfg, counted: T.Sequence[str], cap: int) -> None:
        index = {a: i for i, a in enumerate(counted)}
        self.dim = len(counted)
        self.cap = cap
        self.rules: T.Dict[Nonterminal, T.List[T.Tuple[Vector, T.List[Nonterminal]]]]
        self.rules = {n: [] for n in cfg.nonterminals}
        for p in cfg.productions:
            v = [0] * self.dim
            for a in p.letters:
                if a in index:
                    v[index[a]] += 1
            self.rules[p.lhs].append((tuple(v), p.children))
        self.reach: T.Dict[Nonterminal, T.FrozenSet[Nonterminal]] = {}
        for n in cfg.nonterminals:
            seen = {n}
            todo = [n]
            while todo:
                for _, children in self.rules[todo.pop()]:
                    for c in children:
                        if c not in seen:
                            seen.add(c)
                            todo.append(c)
            self.reach[n] = frozenset(seen)
        self._free: T.Dict[T.Tuple[Nonterminal, T.FrozenSet], T.FrozenSet[Tree]] = {}
        self._footed: T.Dict[T.Tuple, T.FrozenSet[Tree]] = {}

    def _bounded(self, trees: T.Set[Tree]) -> T.Set[Tree]:
        if len(trees) > self.cap:
            raise ResourceLimitError(
                f"Parikh image needs more than {self.cap} derivation trees",
                "max_semilinear",
                self.cap,
            )
        return trees

    def _combine(
        self, partial: T.Set[Tree], options: T.Iterable[Tree]
    ) -> T.Set[Tree]:
        options = list(options)
        return self._bounded(
            {(add(v, w), s | t) for (v, s), (w, t) in itertools.product(partial, options)}
        )

    def repeat_free(
        self, n: Nonterminal, banned: T.FrozenSet[Nonterminal]
    ) -> T.FrozenSet[Tree]:
        banned = banned & self.reach[n]
        key = (n, banned)
        if key in self._free:
            return self._free[key]
        inner = banned | {n}
        found: T.Set[Tree] = set()
        for v, children in self.rules[n]:
            if any(c in inner for c in children):
                continue
            partial: T.Set[Tree] = {(v, frozenset([n]))}
            for c in children:
                partial = self._combine(partial, self.repeat_free(c, inner))
                if not partial:
                    break
            found |= partial
        result = frozenset(self._bounded(found))
        self._free[key] = result
        return result

    def footed(
        self, n: Nonterminal, banned: T.FrozenSet[Nonterminal], foot: Nonterminal
    ) -> T.FrozenSet[Tree]:
        """Trees rooted at ``n`` with one leaf labelled ``foot``."""
        if n == foot:
            return frozenset([(zero(self.dim), frozenset())])
        banned = banned & self.reach[n]
        key = (n, banned, foot)
        if key in self._footed:
            return self._footed[key]
        inner = banned | {n}
        found: T.Set[Tree] = set()
        for v, children in self.rules[n]:
            for i, c in enumerate(children):
                if c != foot and c in inner:
                    continue
                if foot not in self.reach[c]:
                    continue
                others = children[:i] + children[i + 1 :]
                if any(d in inner for d in others):
                    continue
                partial: T.Set[Tree] = {(v, frozenset([n]))}
                partial = self._combine(partial, self.footed(c, inner, foot))
                for d in others:
                    partial = self._combine(partial, self.repeat_free(d, inner))
                found |= partial
        result = frozenset(self._bounded(found))
        self._footed[key] = result
        return result

    def pumps(self, root: Nonterminal) -> T.FrozenSet[Tree]:
        found: T.Set[Tree] = set()
        for v, children in self.rules[root]:
            for i, c in enumerate(children):
                if root not in self.reach[c]:
                    continue
                others = children[:i] + children[i + 1 :]
                partial: T.Set[Tree] = {(v, frozenset([root]))}
                partial = self._combine(partial, self.footed(c, frozenset(), root))
                for d in others:
                    partial = self._combine(partial, self.repeat_free(d, frozenset()))
                found |= partial
        return frozenset(self._bounded(found))


def cfg_parikh(
    cfg: Cfg, counted: T.Sequence[str], max_components: int = 2000
) -> SemilinearSet:
    """Parikh image of ``L(cfg)`` over ``counted``; other letters are
    ignored.

    Every derivation tree is a tree without repeated nonterminals on its
    paths plus pumps, each inserted at a node labelled with its root;
    bases attach pumps one after the other as long as they bring new
    nonterminals, periods are the pumps over the nonterminals used.
    """
    dim = len(counted)
    cfg = cfg.reduced()
    if cfg.start not in cfg.productive():
        return SemilinearSet.empty(dim)
    trees = _ParikhTrees(cfg, counted, max_components)
    skeletons = trees.repeat_free(cfg.start, frozenset())
    pumps = [
        (root, v, nts)
        for root in sorted(cfg.nonterminals, key=str)
        for v, nts in sorted(trees.pumps(root), key=lambda t: (t[0], sorted(map(str, t[1]))))
    ]
    seen = {(nts, v) for v, nts in skeletons}
    todo = list(seen)
    components: T.Set[LinearSet] = set()
    while todo:
        visited, base = todo.pop()
        periods = tuple(v for _, v, nts in pumps if nts <= visited)
        components.add(LinearSet(base, periods))
        if len(components) > max_components:
            raise ResourceLimitError(
                f"Parikh image exceeded {max_components} linear sets",
                "max_semilinear",
                max_components,
            )
        for root, v, nts in pumps:
            if root in visited and not nts <= visited:
                nxt = (visited | nts, add(base, v))
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
    logger.debug("Parikh image of a grammar: %d linear sets", len(components))
    return SemilinearSet(dim, tuple(components))


def parikh_of_pda(
    pda: Pda, counted: T.Sequence[str], max_components: int = 2000
) -> SemilinearSet:
    return cfg_parikh(pda_to_cfg(pda), counted, max_components)
