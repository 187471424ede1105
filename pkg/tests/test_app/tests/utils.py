import json
import random
import shutil
import tempfile
from fractions import Fraction
from pathlib import Path

from meta_opacity.modelfile import model_from_dict
from meta_opacity.nfa import Nfa
from meta_opacity.samples import load_sample, sample_path


def fractions(*values):
    return tuple(Fraction(v) for v in values)


# charge at 0, cool at 10, fly at 15, flash at 17, back to flying and land
DRONE_SCRIPT = [
    (0, "charge"),
    (10, "cool"),
    (5, "fly"),
    (2, "flash"),
    (0, None),
    (0, "land"),
]

# the private run: raise the level at 1.5 and spend it at 2.5 and 3
PRIVATE_DECREMENTS = [
    ("3/2", "a"),
    ("0", "a"),
    ("1", "loop"),
    ("1/2", "loop"),
    ("0", "leave"),
]

# the public run: raise the level at 1.5, spend it all at 2.5
PUBLIC_DECREMENT = [("3/2", "a"), ("1", "c")]


def random_model(seed, energies=1, guarded=False, max_locations=4, max_constant=2):
    """A seeded discrete positive model with one clock: l0 is initial, l1
    private and the last location final."""
    rng = random.Random(seed)
    count = rng.randint(3, max_locations)
    names = [f"l{i}" for i in range(count)]
    final = names[-1]
    etas = [f"eta{i + 1}" for i in range(energies)]
    locations = [{"name": "l0", "initial": True}, {"name": "l1", "private": True}]
    locations += [{"name": n} for n in names[2:-1]]
    locations.append({"name": final, "final": True})
    for loc in locations[1:-1]:
        if rng.random() < 0.5:
            loc["invariant"] = [["x", "<=", rng.randint(1, 2)]]

    pairs = [("l0", "l1"), ("l1", final), ("l0", rng.choice(names[2:]))]
    for _ in range(rng.randint(1, 3)):
        pairs.append((rng.choice(names[:-1]), rng.choice(names)))
    edges = []
    energy_atoms = 0
    for source, target in dict.fromkeys(pairs):
        guard = []
        if rng.random() < 0.4:
            op = rng.choice(["<", "<=", ">=", ">"])
            guard.append(["x", op, rng.randint(0, 2)])
        if guarded and rng.random() < 0.5:
            op = rng.choice(["<=", ">=", ">"])
            guard.append([rng.choice(etas), op, rng.randint(0, max_constant)])
            energy_atoms += 1
        updates = {e: rng.choice([0, 1, 1, 2]) for e in etas}
        edges.append(
            {
                "from": source,
                "to": target,
                "action": rng.choice(["a", "b"]),
                "guard": guard,
                "resets": ["x"] if rng.random() < 0.3 else [],
                "updates": {e: v for e, v in updates.items() if v},
            }
        )
    if guarded and not energy_atoms:
        edges[-1]["guard"].append([etas[0], "<=", rng.randint(0, max_constant)])
    return model_from_dict(
        {
            "actions": ["a", "b"],
            "clocks": ["x"],
            "energies": etas,
            "locations": locations,
            "edges": edges,
        }
    )


def random_nfa(seed, alphabet=("a", "b"), states=4):
    rng = random.Random(seed)
    transitions = [
        (p, letter, q)
        for p in range(states)
        for letter in alphabet
        for q in range(states)
        if rng.random() < 0.2
    ]
    accepting = [q for q in range(states) if rng.random() < 0.4] or [states - 1]
    return Nfa.build(transitions, 0, accepting, alphabet, range(states))


def words(alphabet, max_length):
    found = [()]
    layer = [()]
    for _ in range(max_length):
        layer = [w + (letter,) for w in layer for letter in alphabet]
        found.extend(layer)
    return found


class BaseTestMixin:
    @staticmethod
    def sample(name):
        return load_sample(name)

    @staticmethod
    def sample_path(name):
        return str(sample_path(name))

    def setUp(self):
        self.workdir = Path(tempfile.mkdtemp(prefix="meta-opacity-"))

    def tearDown(self):
        shutil.rmtree(self.workdir, ignore_errors=True)

    def write_json(self, name, data):
        path = self.workdir / name
        path.write_text(json.dumps(data))
        return str(path)

    def write_text(self, name, text):
        path = self.workdir / name
        path.write_text(text)
        return str(path)
