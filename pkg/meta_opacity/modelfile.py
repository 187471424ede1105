import json
import re
import typing as T
from logging import getLogger

from meta_opacity.errors import ModelError, Violation
from meta_opacity.model import (
    Atom,
    Edge,
    EnergyRateMap,
    EnergyUpdateMap,
    GuardedMeta,
    Location,
    Relation,
    SimpleConstraint,
    validate,
)

logger = getLogger("meta_opacity")

RESERVED_CLOCKS = frozenset({"cz", "ct", "cs"})
RESERVED_ACTIONS = frozenset({"t", "t>0", "f"})
_RESERVED_ACTION = re.compile(r"^(inc|dec)(_\d+)?$|^\[")

_OPS = {"<", "<=", ">=", ">", "="}


def is_reserved_action(name: str) -> bool:
    return name in RESERVED_ACTIONS or bool(_RESERVED_ACTION.match(name))


class _Reader:
    def __init__(self) -> None:
        self.violations: T.List[Violation] = []

    def fail(self, path: str, message: str, code: str = "format") -> None:
        self.violations.append(Violation(code, message, path))

    def names(
        self, doc: T.Mapping[str, T.Any], key: str, path: str = ""
    ) -> T.List[str]:
        value = doc.get(key) or []
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            self.fail(path or key, f"{key} must be a list of names")
            return []
        return value

    def constraint(self, value: T.Any, path: str) -> SimpleConstraint:
        if value is None:
            return SimpleConstraint()
        if not isinstance(value, list):
            self.fail(path, "constraint must be a list of [var, op, int] triples")
            return SimpleConstraint()
        atoms: T.List[Atom] = []
        for i, triple in enumerate(value):
            if (
                not isinstance(triple, list)
                or len(triple) != 3
                or not isinstance(triple[0], str)
                or triple[1] not in _OPS
                or not isinstance(triple[2], int)
                or isinstance(triple[2], bool)
            ):
                self.fail(f"{path}[{i}]", f"malformed atom {triple!r}")
                continue
            var, op, bound = triple
            if op == "=":
                atoms.append(Atom(var, Relation.LE, bound))
                atoms.append(Atom(var, Relation.GE, bound))
            else:
                atoms.append(Atom(var, Relation(op), bound))
        return SimpleConstraint(tuple(atoms))

    def energy_map(self, value: T.Any, path: str, cls):
        if value is None:
            return cls()
        if not isinstance(value, dict) or not all(
            isinstance(v, int) and not isinstance(v, bool) for v in value.values()
        ):
            self.fail(path, "expected a map of energy names to integers")
            return cls()
        return cls.of(value)

    def flag(self, item: T.Mapping[str, T.Any], key: str, path: str) -> bool:
        value = item.get(key, False)
        if not isinstance(value, bool):
            self.fail(f"{path}.{key}", f"{key} must be a boolean")
            return False
        return value

    def location(self, item: T.Any, path: str) -> T.Optional[Location]:
        if not isinstance(item, dict) or not isinstance(item.get("name"), str):
            self.fail(path, "location must be an object with a name")
            return None
        return Location(
            name=item["name"],
            invariant=self.constraint(item.get("invariant"), f"{path}.invariant"),
            rates=self.energy_map(item.get("rates"), f"{path}.rates", EnergyRateMap),
            labels=frozenset(self.names(item, "labels", f"{path}.labels")),
            is_private=self.flag(item, "private", path),
            is_final=self.flag(item, "final", path),
            is_initial=self.flag(item, "initial", path),
        )

    def edge(self, item: T.Any, path: str) -> T.Optional[Edge]:
        if (
            not isinstance(item, dict)
            or not isinstance(item.get("from"), str)
            or not isinstance(item.get("to"), str)
        ):
            self.fail(path, "edge must be an object with from and to")
            return None
        action = item.get("action")
        if action is not None and not isinstance(action, str):
            self.fail(f"{path}.action", "action must be a name or null")
            action = None
        resets = self.names(item, "resets", f"{path}.resets")
        name = item.get("name")
        if name is not None and not isinstance(name, str):
            self.fail(f"{path}.name", "name must be a string or null")
            name = None
        return Edge(
            source=item["from"],
            target=item["to"],
            guard=self.constraint(item.get("guard"), f"{path}.guard"),
            action=action,
            resets=frozenset(resets),
            updates=self.energy_map(
                item.get("updates"), f"{path}.updates", EnergyUpdateMap
            ),
            name=name,
        )


def model_from_dict(doc: T.Any) -> GuardedMeta:
    reader = _Reader()
    if not isinstance(doc, dict):
        raise ModelError("model must be a JSON object")
    actions = reader.names(doc, "actions")
    clocks = reader.names(doc, "clocks")
    energies = reader.names(doc, "energies")
    raw_locations = doc.get("locations", [])
    raw_edges = doc.get("edges", [])
    if not isinstance(raw_locations, list) or not isinstance(raw_edges, list):
        raise ModelError("locations and edges must be lists")

    locations = [
        reader.location(item, f"locations[{i}]") for i, item in enumerate(raw_locations)
    ]
    edges = [reader.edge(item, f"edges[{i}]") for i, item in enumerate(raw_edges)]

    for name in clocks:
        if name in RESERVED_CLOCKS:
            reader.fail("clocks", f"clock name {name} is reserved", "reserved-name")
    for name in actions:
        if is_reserved_action(name):
            reader.fail("actions", f"action name {name} is reserved", "reserved-name")
    if len(set(actions)) != len(actions):
        reader.fail("actions", "duplicate action declaration", "duplicate-name")
    if reader.violations:
        raise ModelError("malformed model", reader.violations)

    meta = GuardedMeta(
        actions=frozenset(actions),
        clocks=tuple(clocks),
        energies=tuple(energies),
        locations=tuple(loc for loc in locations if loc is not None),
        edges=tuple(edge for edge in edges if edge is not None),
    )
    violations = validate(meta)
    if violations:
        raise ModelError("invalid model", violations)
    return meta


def parse_model(text: T.Union[str, bytes]) -> GuardedMeta:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ModelError("model file is not UTF-8", cause=e) from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelError(
            "syntax error",
            [Violation("syntax", e.msg, line=e.lineno, column=e.colno)],
            cause=e,
        ) from e
    meta = model_from_dict(doc)
    logger.debug(
        "parsed model with %d locations and %d edges",
        len(meta.locations),
        len(meta.edges),
    )
    return meta


def _atoms(constraint: SimpleConstraint) -> T.List[T.List[T.Any]]:
    return [[a.var, a.relation.value, a.bound] for a in constraint.atoms]


def model_to_dict(meta: GuardedMeta) -> T.Dict[str, T.Any]:
    locations = []
    for loc in meta.locations:
        locations.append(
            {
                "name": loc.name,
                "invariant": _atoms(loc.invariant),
                "rates": loc.rates.as_dict(),
                "private": loc.is_private,
                "final": loc.is_final,
                "initial": loc.is_initial,
                "labels": sorted(loc.labels),
            }
        )
    edges = []
    for edge in meta.edges:
        item = {
            "from": edge.source,
            "guard": _atoms(edge.guard),
            "action": edge.action,
            "resets": sorted(edge.resets),
            "updates": edge.updates.as_dict(),
            "to": edge.target,
        }
        if edge.name is not None:
            item["name"] = edge.name
        edges.append(item)
    return {
        "actions": sorted(meta.actions),
        "clocks": list(meta.clocks),
        "energies": list(meta.energies),
        "locations": locations,
        "edges": edges,
    }


def serialize_model(meta: GuardedMeta) -> str:
    return json.dumps(model_to_dict(meta), indent=2, ensure_ascii=False) + "\n"
