"""Linear and semilinear sets of natural vectors, and Parikh images of
finite automata."""
import itertools
import typing as T
from dataclasses import dataclass
from logging import getLogger

import networkx as nx

from meta_opacity.errors import DimensionError, ResourceLimitError
from meta_opacity.nfa import Nfa, State
from meta_opacity.presburger import (
    And,
    Exists,
    Formula,
    Term,
    conj,
    disj,
    eq,
    exists,
    forall,
    implies,
    presburger_decide,
    presburger_model,
)

logger = getLogger("meta_opacity")

Vector = T.Tuple[int, ...]


def zero(dim: int) -> Vector:
    return (0,) * dim


def add(a: Vector, b: Vector) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def norm(v: Vector) -> int:
    return sum(v)


def _check_vector(v: T.Sequence[int], dim: int) -> Vector:
    if len(v) != dim:
        raise DimensionError(f"expected a vector of dimension {dim}, got {len(v)}")
    if any(x < 0 for x in v):
        raise ValueError(f"vector {tuple(v)} has a negative entry")
    return tuple(int(x) for x in v)


def format_vector(v: Vector) -> str:
    return "(" + ",".join(str(x) for x in v) + ")"


@dataclass(frozen=True)
class LinearSet:
    """``base + ℕ·periods``; periods are kept sorted, without zero vectors
    or duplicates."""

    base: Vector
    periods: T.Tuple[Vector, ...] = ()

    def __post_init__(self) -> None:
        dim = len(self.base)
        base = _check_vector(self.base, dim)
        periods = {_check_vector(p, dim) for p in self.periods}
        periods.discard(zero(dim))
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "periods", tuple(sorted(periods)))

    @property
    def dim(self) -> int:
        return len(self.base)

    def formula(self, target: T.Sequence[Term], prefix: str) -> Formula:
        """``target`` is in the set, with coefficients named ``prefix<j>``."""
        names = [f"{prefix}{j}" for j in range(len(self.periods))]
        equations = []
        for i, goal in enumerate(target):
            pairs = [(p[i], n) for p, n in zip(self.periods, names) if p[i]]
            equations.append(eq(goal, Term.linear(pairs, self.base[i])))
        return exists(names, conj(*equations))

    def members(self, max_norm: int) -> T.Iterator[Vector]:
        """Members of ℓ¹-norm at most ``max_norm``, possibly repeated."""
        todo = [(self.base, 0)]
        while todo:
            v, start = todo.pop()
            if norm(v) > max_norm:
                continue
            yield v
            for j in range(start, len(self.periods)):
                todo.append((add(v, self.periods[j]), j))

    def __str__(self) -> str:
        text = format_vector(self.base)
        if self.periods:
            text += " + ℕ" + " + ℕ".join(format_vector(p) for p in self.periods)
        return text

    def as_dict(self) -> T.Dict[str, T.Any]:
        return {"base": list(self.base), "periods": [list(p) for p in self.periods]}


def _vector_terms(dim: int, prefix: str = "v") -> T.List[Term]:
    return [Term.var(f"{prefix}{i}") for i in range(dim)]


@dataclass(frozen=True)
class SemilinearSet:
    dim: int
    components: T.Tuple[LinearSet, ...] = ()

    def __post_init__(self) -> None:
        for component in self.components:
            if component.dim != self.dim:
                raise DimensionError(
                    f"component {component} does not have dimension {self.dim}"
                )
        unique = sorted(set(self.components), key=lambda c: (c.base, c.periods))
        object.__setattr__(self, "components", tuple(unique))

    @classmethod
    def empty(cls, dim: int) -> "SemilinearSet":
        return cls(dim)

    @classmethod
    def of(
        cls, base: T.Sequence[int], *periods: T.Sequence[int]
    ) -> "SemilinearSet":
        return cls(len(base), (LinearSet(tuple(base), tuple(map(tuple, periods))),))

    @property
    def is_empty(self) -> bool:
        return not self.components

    def union(self, other: "SemilinearSet") -> "SemilinearSet":
        _same_dimension(self, other)
        return SemilinearSet(self.dim, self.components + other.components)

    __or__ = union

    def formula(self, target: T.Sequence[Term], prefix: str = "l") -> Formula:
        return disj(
            *(c.formula(target, f"{prefix}{k}_") for k, c in enumerate(self.components))
        )

    def members(self, max_norm: int) -> T.List[Vector]:
        """Members of ℓ¹-norm at most ``max_norm``, by norm then value."""
        found = {v for c in self.components for v in c.members(max_norm)}
        return sorted(found, key=lambda v: (norm(v), v))

    def __contains__(self, v: T.Sequence[int]) -> bool:
        return slset_member(self, v)

    def __str__(self) -> str:
        if not self.components:
            return "∅"
        return " ∪ ".join(str(c) for c in self.components)

    def as_dict(self) -> T.Dict[str, T.Any]:
        return {"dim": self.dim, "components": [c.as_dict() for c in self.components]}

    @classmethod
    def from_dict(cls, data: T.Mapping[str, T.Any]) -> "SemilinearSet":
        try:
            dim = int(data["dim"])
            components = tuple(
                LinearSet(tuple(c["base"]), tuple(tuple(p) for p in c["periods"]))
                for c in data["components"]
            )
        except (KeyError, TypeError) as e:
            raise ValueError(f"malformed semilinear set: {e}") from e
        return cls(dim, components)


def _open_existentials(phi: Formula) -> Formula:
    """Drop existential quantifiers at the top and under conjunctions, so
    that their variables become free variables of a model search."""
    if isinstance(phi, Exists):
        return _open_existentials(phi.body)
    if isinstance(phi, And):
        return And(tuple(_open_existentials(p) for p in phi.parts))
    return phi


def _same_dimension(a: SemilinearSet, b: SemilinearSet) -> None:
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")


def slset_member(s: SemilinearSet, v: T.Sequence[int]) -> bool:
    if len(v) != s.dim:
        raise DimensionError(f"dimension mismatch: {s.dim} vs {len(v)}")
    if any(x < 0 for x in v):
        return False
    target = [Term.const(x) for x in v]
    for component in s.components:
        if not component.periods:
            if component.base == tuple(v):
                return True
            continue
        phi = _open_existentials(component.formula(target, "l"))
        if presburger_model(phi) is not None:
            return True
    return False


def slset_intersection_witness(
    a: SemilinearSet, b: SemilinearSet
) -> T.Optional[Vector]:
    """A smallest common vector of some component pair, or ``None``."""
    _same_dimension(a, b)
    target = _vector_terms(a.dim)
    names = [f"v{i}" for i in range(a.dim)]
    best: T.Optional[Vector] = None
    for left, right in itertools.product(a.components, b.components):
        phi = conj(left.formula(target, "l"), right.formula(target, "m"))
        phi = _open_existentials(phi)
        model = presburger_model(phi, minimize=names)
        if model is None:
            continue
        found = tuple(model[n] for n in names)
        if best is None or (norm(found), found) < (norm(best), best):
            best = found
    return best


def inclusion_sentence(superset: SemilinearSet, subset: SemilinearSet) -> Formula:
    _same_dimension(superset, subset)
    names = [f"v{i}" for i in range(subset.dim)]
    target = _vector_terms(subset.dim)
    return forall(
        names,
        implies(subset.formula(target, "l"), superset.formula(target, "m")),
    )


def slset_includes(
    superset: SemilinearSet, subset: SemilinearSet
) -> T.Tuple[bool, T.Optional[Vector]]:
    """Whether ``subset ⊆ superset``; otherwise a counterexample of least
    norm, found by widening the norm bound."""
    _same_dimension(superset, subset)
    if subset.is_empty:
        return True, None
    if superset.is_empty:
        return False, subset.members(min(norm(c.base) for c in subset.components))[0]
    holds, _ = presburger_decide(inclusion_sentence(superset, subset))
    if holds:
        return True, None
    bound = min(norm(c.base) for c in subset.components)
    while True:
        for v in subset.members(bound):
            if norm(v) == bound and not slset_member(superset, v):
                logger.debug("inclusion counterexample %s at norm %d", v, bound)
                return False, v
        bound += 1


def _label_vectors(labels: T.Iterable[str], index: T.Mapping[str, int]) -> Vector:
    v = [0] * len(index)
    for label in labels:
        v[index[label]] += 1
    return tuple(v)


def _path_vectors(
    graph: nx.DiGraph, nodes: T.Sequence[State], closed: bool
) -> T.Set[Vector]:
    pairs = list(zip(nodes, nodes[1:]))
    if closed:
        pairs.append((nodes[-1], nodes[0]))
    choices = [graph.edges[u, v]["vectors"] for u, v in pairs]
    dim = len(next(iter(choices[0]))) if choices else 0
    found = set()
    for combo in itertools.product(*choices):
        total = zero(dim)
        for v in combo:
            total = add(total, v)
        found.add(total)
    return found


def parikh_of_nfa(
    nfa: Nfa,
    counted_alphabet: T.Sequence[str],
    max_components: int = 2000,
    max_subsets: int = 2**16,
) -> SemilinearSet:
    """Exact Parikh image of ``L(nfa)`` over ``counted_alphabet``.

    Every accepted word is a simple path plus simple cycles whose states
    form a connected set; bases are a path plus cycles attached one after
    the other, each adding new states, and periods are all simple cycles
    inside the visited states.
    """
    dim = len(counted_alphabet)
    index = {a: i for i, a in enumerate(counted_alphabet)}
    automaton = nfa.project(counted_alphabet).remove_epsilon().trim()
    if not automaton.accepting:
        return SemilinearSet.empty(dim)
    automaton = automaton.minimize(max_subsets)
    if not automaton.accepting:
        return SemilinearSet.empty(dim)

    # parallel labelled edges collapse into one edge with a set of units
    multi = automaton.to_graph()
    graph = nx.DiGraph()
    graph.add_nodes_from(multi.nodes)
    for source, target, label in multi.edges(data="label"):
        unit = _label_vectors([label], index)
        if graph.has_edge(source, target):
            graph.edges[source, target]["vectors"].add(unit)
        else:
            graph.add_edge(source, target, vectors={unit})

    cycles: T.List[T.Tuple[T.FrozenSet[State], Vector]] = []
    for nodes in nx.simple_cycles(graph):
        for v in sorted(_path_vectors(graph, nodes, closed=True)):
            cycles.append((frozenset(nodes), v))
            if len(cycles) > max_components:
                raise ResourceLimitError(
                    f"Parikh image needs more than {max_components} cycles",
                    "max_semilinear",
                    max_components,
                )

    starts: T.Set[T.Tuple[T.FrozenSet[State], Vector]] = set()
    for final in sorted(automaton.accepting):
        if final == automaton.initial:
            starts.add((frozenset([final]), zero(dim)))
            continue
        for nodes in nx.all_simple_paths(graph, automaton.initial, final):
            for v in _path_vectors(graph, nodes, closed=False):
                starts.add((frozenset(nodes), v))

    seen = set(starts)
    todo = sorted(starts, key=lambda s: (sorted(s[0]), s[1]))
    components: T.Set[LinearSet] = set()
    while todo:
        visited, base = todo.pop()
        periods = tuple(v for nodes, v in cycles if nodes <= visited)
        components.add(LinearSet(base, periods))
        if len(components) > max_components:
            raise ResourceLimitError(
                f"Parikh image exceeded {max_components} linear sets",
                "max_semilinear",
                max_components,
            )
        for nodes, v in cycles:
            if nodes & visited and not nodes <= visited:
                nxt = (visited | nodes, add(base, v))
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
    result = SemilinearSet(dim, tuple(components))
    logger.debug(
        "Parikh image over %s: %d linear sets", list(counted_alphabet), len(components)
    )
    return result
