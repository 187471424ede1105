"""Model-to-model constructions used by the deciders.

Helper locations introduced here are labelled ``urgent`` and carry the
invariant ``cz <= 0`` of the zero-time clock ``cz``.
"""
import enum
import re
import typing as T
from collections import deque
from logging import getLogger

from meta_opacity.errors import ResourceLimitError, UnsupportedClassError
from meta_opacity.model import (
    Atom,
    Edge,
    EnergyRateMap,
    EnergyUpdateMap,
    GuardedMeta,
    Location,
    Relation,
    SimpleConstraint,
    classify,
    guarded_energies,
    max_energy_constant,
)
from meta_opacity.regions import build_region_automaton

logger = getLogger("meta_opacity")

URGENT_CLOCK = "cz"
TICK_CLOCK = "ct"
SWITCH_CLOCK = "cs"
TICK = "t"
FRACTIONAL_EXIT = "t>0"
FLUSH = "f"
URGENT = "urgent"
SPLIT = "split"

_MARKER = re.compile(r"^\[(?P<atoms>[^\]]*)\](?P<rest>.*)$")
_MARKER_ATOM = re.compile(r"^(?P<op><=|>=|<|>)(?P<bound>\d+)$")
_UNIT = re.compile(r"^(?P<kind>inc|dec)(?:_(?P<index>\d+))?$")


def inc_label(index: int) -> str:
    return f"inc_{index}"


def dec_label(index: int) -> str:
    return f"dec_{index}"


def unit_labels(count: int) -> T.List[str]:
    return [inc_label(i) for i in range(1, count + 1)]


def parse_unit(label: T.Optional[str]) -> T.Optional[T.Tuple[str, int]]:
    """``inc_2`` → ("inc", 2); bare ``inc``/``dec`` count as index 1."""
    if label is None:
        return None
    match = _UNIT.match(label)
    if match is None:
        return None
    return match["kind"], int(match["index"] or 1)


def format_marker(atoms: T.Sequence[Atom]) -> str:
    return "[" + ",".join(f"{a.relation.value}{a.bound}" for a in atoms) + "]"


def parse_marker(
    label: T.Optional[str],
) -> T.Tuple[T.Tuple[Atom, ...], T.Optional[str]]:
    """Split a guard-marked label into its energy atoms and the remaining
    label (``None`` when nothing remains)."""
    if label is None:
        return (), None
    match = _MARKER.match(label)
    if match is None:
        return (), label
    atoms = []
    for text in filter(None, match["atoms"].split(",")):
        atom = _MARKER_ATOM.match(text)
        if atom is None:
            raise ValueError(f"malformed guard marker {label!r}")
        atoms.append(Atom("", Relation(atom["op"]), int(atom["bound"])))
    return tuple(atoms), match["rest"] or None


def _urgent_location(name: str, *labels: str) -> Location:
    return Location(
        name=name,
        invariant=SimpleConstraint.of((URGENT_CLOCK, "<=", 0)),
        labels=frozenset((URGENT, *labels)),
    )


def _with_clock(clocks: T.Tuple[str, ...], *extra: str) -> T.Tuple[str, ...]:
    return clocks + tuple(c for c in extra if c not in clocks)


def remove_private(meta: GuardedMeta) -> GuardedMeta:
    private = meta.private_names
    return meta.replace(
        locations=tuple(loc for loc in meta.locations if not loc.is_private),
        edges=tuple(
            e for e in meta.edges if e.source not in private and e.target not in private
        ),
    )


def visited_name(name: str) -> str:
    return f"{name}/visited"


def unvisited_name(name: str) -> str:
    return f"{name}/unvisited"


def _copy_edge(edge: Edge, source: str, target: str, suffix: str) -> Edge:
    name = f"{edge.name}/{suffix}" if edge.name is not None else None
    return Edge(
        source=source,
        target=target,
        guard=edge.guard,
        action=edge.action,
        resets=edge.resets,
        updates=edge.updates,
        name=name,
    )


def duplicate_visited(meta: GuardedMeta) -> GuardedMeta:
    """Two copies of the model; the second one is entered when a private
    location is reached, and only its final locations accept."""
    start_visited = meta.initial.is_private
    locations = []
    for loc in meta.locations:
        locations.append(
            Location(
                name=unvisited_name(loc.name),
                invariant=loc.invariant,
                rates=loc.rates,
                labels=loc.labels,
                is_private=loc.is_private,
                is_initial=loc.is_initial and not start_visited,
            )
        )
    for loc in meta.locations:
        locations.append(
            Location(
                name=visited_name(loc.name),
                invariant=loc.invariant,
                rates=loc.rates,
                labels=loc.labels,
                is_private=loc.is_private,
                is_final=loc.is_final,
                is_initial=loc.is_initial and start_visited,
            )
        )
    private = meta.private_names
    edges = []
    for edge in meta.edges:
        target = (
            visited_name(edge.target)
            if edge.target in private
            else unvisited_name(edge.target)
        )
        edges.append(_copy_edge(edge, unvisited_name(edge.source), target, "unvisited"))
    for edge in meta.edges:
        edges.append(
            _copy_edge(
                edge, visited_name(edge.source), visited_name(edge.target), "visited"
            )
        )
    return meta.replace(locations=tuple(locations), edges=tuple(edges))


def _level_holds(atom: Atom, level: int, top: int) -> bool:
    if level > top:
        return not atom.relation.is_upper
    return atom.relation.holds(level, atom.bound)


def _copy_name(name: str, tracked: T.Sequence[str], levels, top: int) -> str:
    if not tracked:
        return name
    shown = ",".join(f">{top}" if v > top else str(v) for v in levels)
    return f"{name}#{shown}"


def remove_energy_guards(meta: GuardedMeta, max_states: int = 5000) -> GuardedMeta:
    """Hard-code energy guards into copies of the model.

    Each copy records the value of every guarded energy up to the largest
    constant compared against, or that it exceeds it; copies are built from
    the initial one and only reachable copies are kept.
    """
    report = classify(meta)
    if not (report.is_discrete and report.is_positive):
        raise UnsupportedClassError(
            "energy guards can only be removed from discrete positive models",
            f"model is {report.class_name}",
        )
    tracked = guarded_energies(meta)
    top = max_energy_constant(meta)
    energies = frozenset(meta.energies)

    def evaluate(constraint: SimpleConstraint, levels) -> bool:
        value = dict(zip(tracked, levels))
        return all(
            _level_holds(a, value[a.var], top)
            for a in constraint.atoms
            if a.var in energies
        )

    start = (meta.initial.name, tuple(0 for _ in tracked))
    seen = {start}
    order = [start]
    todo = deque([start])
    edges: T.List[Edge] = []
    while todo:
        name, levels = todo.popleft()
        for edge in meta.edges_from(name):
            if not evaluate(edge.guard, levels):
                continue
            moved = tuple(
                min(v + edge.updates.get(e), top + 1) for e, v in zip(tracked, levels)
            )
            if not evaluate(meta.location(edge.target).invariant, moved):
                continue
            target = (edge.target, moved)
            edges.append(
                Edge(
                    source=_copy_name(name, tracked, levels, top),
                    target=_copy_name(edge.target, tracked, moved, top),
                    guard=edge.guard.without(energies),
                    action=edge.action,
                    resets=edge.resets,
                    updates=edge.updates,
                    name=edge.name and _copy_name(edge.name, tracked, levels, top),
                )
            )
            if target not in seen:
                if len(seen) >= max_states:
                    raise ResourceLimitError(
                        f"guard removal exceeded {max_states} copies",
                        "max_states",
                        max_states,
                    )
                seen.add(target)
                order.append(target)
                todo.append(target)

    locations = []
    for name, levels in order:
        loc = meta.location(name)
        locations.append(
            Location(
                name=_copy_name(name, tracked, levels, top),
                invariant=loc.invariant.without(energies),
                rates=loc.rates,
                labels=loc.labels,
                is_private=loc.is_private,
                is_final=loc.is_final,
                is_initial=(name, levels) == start,
            )
        )
    logger.debug(
        "guard removal: %d copies of %d locations", len(order), len(meta.locations)
    )
    return meta.replace(locations=tuple(locations), edges=tuple(edges))


def split_and_relabel(meta: GuardedMeta, guard_markers: bool = False) -> GuardedMeta:
    """Turn energy updates into unit ``inc_i``/``dec_i`` actions.

    Updates of more than one unit go through urgent intermediate locations.
    Original action names are erased and energies removed. With
    ``guard_markers`` (single energy only), energy atoms of a guard prefix
    the first label of the edge as ``[<=2,>0]`` and energy invariants of the
    target become a trailing marker-only edge.
    """
    report = classify(meta)
    if not report.is_discrete:
        raise UnsupportedClassError(
            "updates can only be split in discrete models", "energy rates are not zero"
        )
    if report.is_guarded and not guard_markers:
        raise UnsupportedClassError(
            "energy guards must be removed or marked before splitting",
            f"model is {report.class_name}",
        )
    if guard_markers and len(meta.energies) > 1:
        raise UnsupportedClassError(
            "guard markers need a single energy variable",
            f"model has {len(meta.energies)} energies",
        )
    energies = frozenset(meta.energies)
    locations = [
        Location(
            name=loc.name,
            invariant=loc.invariant.without(energies),
            labels=loc.labels,
            is_private=loc.is_private,
            is_final=loc.is_final,
            is_initial=loc.is_initial,
        )
        for loc in meta.locations
    ]
    edges: T.List[Edge] = []
    for k, edge in enumerate(meta.edges):
        labels: T.List[str] = []
        for i, energy in enumerate(meta.energies, start=1):
            offset = edge.updates.get(energy)
            unit = inc_label(i) if offset > 0 else dec_label(i)
            labels.extend([unit] * abs(offset))
        if guard_markers:
            atoms = edge.guard.restrict(energies).atoms
            if atoms:
                first = labels[0] if labels else ""
                labels[:1] = [format_marker(atoms) + first]
            target_atoms = meta.location(edge.target).invariant.restrict(energies).atoms
            if target_atoms:
                labels.append(format_marker(target_atoms))
        guard = edge.guard.without(energies)
        if len(labels) <= 1:
            edges.append(
                Edge(
                    source=edge.source,
                    target=edge.target,
                    guard=guard,
                    action=labels[0] if labels else None,
                    resets=edge.resets,
                    name=edge.name,
                )
            )
            continue
        chain = [edge.source]
        for j in range(1, len(labels)):
            helper = f"{edge.source}~{k}.{j}"
            locations.append(_urgent_location(helper, SPLIT))
            chain.append(helper)
        chain.append(edge.target)
        for j, label in enumerate(labels):
            edges.append(
                Edge(
                    source=chain[j],
                    target=chain[j + 1],
                    guard=guard if j == 0 else SimpleConstraint(),
                    action=label,
                    resets=(edge.resets | {URGENT_CLOCK}) if j == 0 else frozenset(),
                    name=f"{edge.name}.{j}" if edge.name else None,
                )
            )
    uses_urgent = any(URGENT in loc.labels for loc in locations)
    return GuardedMeta(
        actions=frozenset(e.action for e in edges if e.action is not None),
        clocks=_with_clock(meta.clocks, URGENT_CLOCK) if uses_urgent else meta.clocks,
        energies=(),
        locations=tuple(locations),
        edges=tuple(edges),
    )


class TickMode(enum.Enum):
    ET_EN = "ET_EN"
    DE = "DE"
    BDE = "BDE"


def zero_copy_name(name: str) -> str:
    return f"{name}@0"


def exit_name(name: str) -> str:
    return f"{name}'"


def _insert_flushes(meta: GuardedMeta) -> GuardedMeta:
    split_helpers = {loc.name for loc in meta.locations if SPLIT in loc.labels}
    locations = list(meta.locations)
    edges = []
    for k, edge in enumerate(meta.edges):
        if parse_unit(edge.action) is None or edge.target in split_helpers:
            edges.append(edge)
            continue
        helper = f"{edge.target}~flush{k}"
        locations.append(_urgent_location(helper))
        edges.append(
            Edge(
                source=edge.source,
                target=helper,
                guard=edge.guard,
                action=edge.action,
                resets=edge.resets | {URGENT_CLOCK},
                name=edge.name,
            )
        )
        edges.append(Edge(source=helper, target=edge.target, action=FLUSH))
    return meta.replace(locations=tuple(locations), edges=tuple(edges))


def add_tick_instrumentation(meta: GuardedMeta, mode: TickMode) -> GuardedMeta:
    """Make integer time visible through a tick action ``t``.

    A tick clock ``ct`` never exceeds 1 and is reset by a ``t`` self-loop on
    every non-final location; original edges additionally require
    ``ct > 0`` so that actions at an integer time come before its tick.
    Behaviour at time 0 runs in a copy with invariant ``ct <= 0``. Final
    locations become urgent and exit to a fresh final location with ``t``
    at integer times, otherwise with ``t>0`` (ET_EN) or ``t`` (DE, BDE).
    In BDE mode every update block is closed by an ``f`` action.
    """
    if meta.energies:
        raise UnsupportedClassError(
            "tick instrumentation needs updates compiled into actions",
            "model still declares energy variables",
        )
    if mode is TickMode.BDE:
        meta = _insert_flushes(meta)
    finals = meta.final_names
    tick_guard = SimpleConstraint.of((TICK_CLOCK, "<=", 1), (TICK_CLOCK, ">=", 1))
    after_zero = SimpleConstraint.of((TICK_CLOCK, ">", 0))
    fractional = SimpleConstraint.of((TICK_CLOCK, ">", 0), (TICK_CLOCK, "<", 1))
    at_zero = SimpleConstraint.of((TICK_CLOCK, "<=", 0))
    bounded = SimpleConstraint.of((TICK_CLOCK, "<=", 1))
    urgent = SimpleConstraint.of((URGENT_CLOCK, "<=", 0))

    locations: T.List[Location] = []
    edges: T.List[Edge] = []
    for loc in meta.locations:
        locations.append(
            Location(
                name=zero_copy_name(loc.name),
                invariant=loc.invariant & at_zero,
                labels=loc.labels,
                is_private=loc.is_private,
                is_initial=loc.is_initial,
            )
        )
    for loc in meta.locations:
        if loc.is_final:
            locations.append(
                Location(
                    name=loc.name,
                    invariant=loc.invariant & urgent & bounded,
                    labels=loc.labels | {URGENT},
                    is_private=loc.is_private,
                )
            )
            locations.append(Location(name=exit_name(loc.name), is_final=True))
            continue
        locations.append(
            Location(
                name=loc.name,
                invariant=loc.invariant & bounded,
                labels=loc.labels,
                is_private=loc.is_private,
            )
        )

    for edge in meta.edges:
        edges.append(
            Edge(
                source=zero_copy_name(edge.source),
                target=zero_copy_name(edge.target),
                guard=edge.guard,
                action=edge.action,
                resets=edge.resets,
                name=edge.name and zero_copy_name(edge.name),
            )
        )
    for loc in meta.locations:
        if loc.is_final:
            edges.append(
                Edge(source=zero_copy_name(loc.name), target=exit_name(loc.name))
            )
        else:
            edges.append(Edge(source=zero_copy_name(loc.name), target=loc.name))
    for edge in meta.edges:
        resets = edge.resets | {URGENT_CLOCK} if edge.target in finals else edge.resets
        edges.append(
            Edge(
                source=edge.source,
                target=edge.target,
                guard=edge.guard & after_zero,
                action=edge.action,
                resets=resets,
                name=edge.name,
            )
        )
    late_exit = FRACTIONAL_EXIT if mode is TickMode.ET_EN else TICK
    for loc in meta.locations:
        if loc.is_final:
            edges.append(
                Edge(
                    source=loc.name,
                    target=exit_name(loc.name),
                    guard=tick_guard,
                    action=TICK,
                )
            )
            edges.append(
                Edge(
                    source=loc.name,
                    target=exit_name(loc.name),
                    guard=fractional,
                    action=late_exit,
                )
            )
        else:
            edges.append(
                Edge(
                    source=loc.name,
                    target=loc.name,
                    guard=tick_guard,
                    action=TICK,
                    resets=frozenset({TICK_CLOCK}),
                )
            )

    actions = set(meta.actions) | {TICK}
    if mode is TickMode.ET_EN:
        actions.add(FRACTIONAL_EXIT)
    if mode is TickMode.BDE:
        actions.add(FLUSH)
    return GuardedMeta(
        actions=frozenset(actions),
        clocks=_with_clock(meta.clocks, URGENT_CLOCK, TICK_CLOCK),
        energies=(),
        locations=tuple(locations),
        edges=tuple(edges),
    )


def _tick_region_automaton(meta: GuardedMeta, max_states: int):
    """Region automaton of the energy-free skeleton with a tick clock;
    discrete transitions are labelled ``e<index>`` by original edge."""
    bounded = SimpleConstraint.of((TICK_CLOCK, "<=", 1))
    tick_guard = SimpleConstraint.of((TICK_CLOCK, ">=", 1))
    locations = tuple(
        Location(
            name=loc.name,
            invariant=loc.invariant if loc.is_final else loc.invariant & bounded,
            is_final=loc.is_final,
            is_initial=loc.is_initial,
            is_private=loc.is_private,
        )
        for loc in meta.locations
    )
    originals = [
        Edge(
            source=e.source,
            target=e.target,
            guard=e.guard,
            action=e.action,
            resets=e.resets,
        )
        for e in meta.edges
    ]
    ticks = [
        Edge(
            source=loc.name,
            target=loc.name,
            guard=tick_guard,
            action=TICK,
            resets=frozenset({TICK_CLOCK}),
        )
        for loc in meta.locations
        if not loc.is_final
    ]
    skeleton = GuardedMeta(
        actions=frozenset(),
        clocks=_with_clock(meta.clocks, TICK_CLOCK),
        energies=(),
        locations=locations,
        edges=tuple(originals + ticks),
    )
    count = len(originals)

    def label_of(index: int, edge: Edge) -> str:
        return f"e{index}" if index < count else TICK

    return build_region_automaton(skeleton, max_states, label_of)


def integer_switch_checks(
    meta: GuardedMeta, max_states: int = 5000
) -> T.Tuple[bool, bool]:
    """Whether rates only change at integer times (IS) and final locations
    are only entered at integer times (iET)."""
    if classify(meta).is_guarded:
        raise UnsupportedClassError(
            "integer-switch checks are only offered for unguarded models",
            "model has energy guards",
        )
    regions = _tick_region_automaton(meta, max_states)
    is_switching, is_integer_time = True, True
    for source, label, _target in regions.nfa.transitions:
        if label is None or label == TICK:
            continue
        edge = meta.edges[int(label[1:])]
        region = source.region  # type: ignore
        if region.has_zero_fraction(TICK_CLOCK):
            continue
        if meta.location(edge.target).is_final:
            is_integer_time = False
        elif meta.location(edge.source).rates != meta.location(edge.target).rates:
            is_switching = False
    return is_switching, is_integer_time


def integer_switch_to_discrete(
    meta: GuardedMeta, max_states: int = 5000
) -> GuardedMeta:
    """Replace rates by updates applied once per time unit.

    A clock ``cs`` bounded by 1 is reset by a silent self-loop on each
    non-final location that adds the location's rates; other edges need
    ``cs < 1``.
    """
    is_switching, _ = integer_switch_checks(meta, max_states)
    if not is_switching:
        raise UnsupportedClassError(
            "rates change at non-integer times", "model is not integer-switching"
        )
    bounded = SimpleConstraint.of((SWITCH_CLOCK, "<=", 1))
    before_tick = SimpleConstraint.of((SWITCH_CLOCK, "<", 1))
    tick_guard = SimpleConstraint.of((SWITCH_CLOCK, "<=", 1), (SWITCH_CLOCK, ">=", 1))
    locations = []
    edges = [
        Edge(
            source=e.source,
            target=e.target,
            guard=e.guard & before_tick,
            action=e.action,
            resets=e.resets,
            updates=e.updates,
            name=e.name,
        )
        for e in meta.edges
    ]
    for loc in meta.locations:
        locations.append(
            Location(
                name=loc.name,
                invariant=loc.invariant if loc.is_final else loc.invariant & bounded,
                rates=EnergyRateMap(),
                labels=loc.labels,
                is_private=loc.is_private,
                is_final=loc.is_final,
                is_initial=loc.is_initial,
            )
        )
        if not loc.is_final:
            edges.append(
                Edge(
                    source=loc.name,
                    target=loc.name,
                    guard=tick_guard,
                    resets=frozenset({SWITCH_CLOCK}),
                    updates=EnergyUpdateMap(loc.rates.items),
                    name=f"{loc.name}.tick",
                )
            )
    return meta.replace(
        clocks=_with_clock(meta.clocks, SWITCH_CLOCK),
        locations=tuple(locations),
        edges=tuple(edges),
    )
