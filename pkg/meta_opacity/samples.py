"""Models bundled with the package, loaded by name."""
import typing as T
from functools import lru_cache
from pathlib import Path

from meta_opacity.model import GuardedMeta
from meta_opacity.modelfile import parse_model
from meta_opacity.twocounter import DecOrZero, Inc, TwoCounterMachine

SAMPLES_DIR = Path(__file__).resolve().parent / "sample_models"

# counts down counter 1 through the private state, moving each unit to
# counter 2, then halts
COUNTER_TRANSFER = TwoCounterMachine(
    states=("q0", "q1", "q2", "halt"),
    halt_state="halt",
    transitions=(
        Inc(1, "q0", "q1"),
        DecOrZero(1, "q1", "q2", "halt"),
        Inc(2, "q2", "q1"),
    ),
    private_states=frozenset({"q2"}),
)


def sample_names() -> T.List[str]:
    return sorted(p.stem for p in SAMPLES_DIR.glob("*.json"))


def sample_path(name: str) -> Path:
    path = SAMPLES_DIR / f"{name}.json"
    if not path.is_file():
        raise LookupError(f"no sample model named {name!r}")
    return path


@lru_cache(maxsize=None)
def load_sample(name: str) -> GuardedMeta:
    return parse_model(sample_path(name).read_bytes())
