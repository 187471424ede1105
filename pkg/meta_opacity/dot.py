"""Graphviz export.

Each exporter yields the lines of a ``digraph``; nodes and edges come out
sorted so that the same input always gives the same text::

    with open("model.dot", "w") as f:
        f.writelines(model_dot(meta))
"""
import typing as T

from meta_opacity.model import Edge, GuardedMeta, Location
from meta_opacity.nfa import Nfa, state_key
from meta_opacity.pbb import PbbAutomaton
from meta_opacity.pda import Pda


def _gvquote(s: str) -> str:
    return '"{}"'.format(str(s).replace("\\", "\\\\").replace('"', r"\""))


def _node(name: str, label: str, initial: bool, accepting: bool, extra: str = ""):
    shape = "doublecircle" if accepting else "circle"
    style = ' style="bold"' if initial else ""
    return f"  {_gvquote(name)} [shape={shape}{style} label={_gvquote(label)}{extra}];\n"


def _edge(source: str, target: str, label: str) -> str:
    return f"  {_gvquote(source)} -> {_gvquote(target)} [label={_gvquote(label)}];\n"


def _location_label(loc: Location) -> str:
    lines = [loc.name]
    if not loc.invariant.is_true:
        lines.append(str(loc.invariant))
    for energy, rate in loc.rates.items:
        lines.append(f"{energy}' = {rate}")
    return "\n".join(lines)


def _edge_label(edge: Edge) -> str:
    parts = []
    if not edge.guard.is_true:
        parts.append(str(edge.guard))
    parts.append(edge.action or "ε")
    parts.extend(f"{c} := 0" for c in sorted(edge.resets))
    parts.extend(f"{e} += {v}" for e, v in edge.updates.items)
    return "\n".join(parts)


def model_dot(meta: GuardedMeta) -> T.Iterator[str]:
    yield "digraph {\n"
    yield "  rankdir=LR;\n"
    for loc in sorted(meta.locations, key=lambda loc: loc.name):
        extra = ' color="red"' if loc.is_private else ""
        yield _node(loc.name, _location_label(loc), loc.is_initial, loc.is_final, extra)
    edges = sorted(meta.edges, key=lambda e: (e.source, e.target, _edge_label(e)))
    for edge in edges:
        yield _edge(edge.source, edge.target, _edge_label(edge))
    yield "}\n"


def _automaton_dot(automaton, edges: T.Iterable[T.Tuple[T.Any, T.Any, str]]):
    yield "digraph {\n"
    yield "  rankdir=LR;\n"
    for state in automaton.sorted_states():
        yield _node(
            state_key(state),
            str(state),
            state == automaton.initial,
            state in automaton.accepting,
        )
    yield from sorted(_edge(state_key(s), state_key(t), label) for s, label, t in edges)
    yield "}\n"


def nfa_dot(nfa: Nfa) -> T.Iterator[str]:
    return _automaton_dot(
        nfa, ((t.source, t.label or "ε", t.target) for t in nfa.transitions)
    )


def pda_dot(pda: Pda) -> T.Iterator[str]:
    return _automaton_dot(pda, ((e.source, str(e), e.target) for e in pda.edges))


def pbb_dot(pbb: PbbAutomaton) -> T.Iterator[str]:
    return _automaton_dot(
        pbb, ((e.source, f"{e.label}\n{e.image}", e.target) for e in pbb.edges)
    )


def to_text(lines: T.Iterable[str]) -> str:
    return "".join(lines)
