"""Bounded cross-validation of the deciders by run enumeration.

The oracle enumerates the runs whose delays lie on a grid, within a time
horizon and a step bound, and collects what the attacker observes of the
private and of the public accepting runs. Its sets are under-approximations,
so it can confirm a shared observation but never refute one.
"""
import typing as T
from dataclasses import dataclass
from fractions import Fraction
from logging import getLogger

from meta_opacity.conf import Limits, OracleBounds
from meta_opacity.deciders import OpacityQuery, Property, Status, Variant, decide
from meta_opacity.model import GuardedMeta
from meta_opacity.semantics import (
    ObservationKind,
    Run,
    absolute_times,
    destutter,
    enumerate_runs,
    fraction_str,
    observe,
    run_stats,
)
from meta_opacity.transforms import FRACTIONAL_EXIT, TICK

logger = getLogger("meta_opacity")

AGREE = "agree"
DISAGREE = "disagree"
INCONCLUSIVE = "inconclusive"

_KINDS = {
    Property.EN: ObservationKind.EN,
    Property.ET_EN: ObservationKind.ET_EN,
    Property.DE: ObservationKind.DE,
    Property.BDE: ObservationKind.BDE,
}


class OracleObservations(T.NamedTuple):
    private: T.FrozenSet[T.Hashable]
    public: T.FrozenSet[T.Hashable]
    runs: int


def _visited(meta: GuardedMeta, run: Run) -> bool:
    return any(meta.location(s.location).is_private for s in run.states())


def _prune_key(meta: GuardedMeta, kind: ObservationKind):
    """Runs sharing a key have the same future observations."""

    def key(run: Run) -> T.Hashable:
        base = (run.last, run.duration, _visited(meta, run))
        if kind in (ObservationKind.DE, ObservationKind.BDE):
            history = destutter(absolute_times(run), run.initial.energy_vector)
            return base + (tuple(history),)
        return base

    return key


def oracle_observations(
    meta: GuardedMeta,
    kind: ObservationKind,
    bounds: T.Optional[OracleBounds] = None,
) -> OracleObservations:
    bounds = bounds or OracleBounds.from_settings()
    private: T.Set[T.Hashable] = set()
    public: T.Set[T.Hashable] = set()
    count = 0
    for run in enumerate_runs(
        meta, bounds.max_steps, bounds.grid, bounds.horizon, _prune_key(meta, kind)
    ):
        count += 1
        stats = run_stats(meta, run)
        if stats.is_private:
            private.add(observe(kind, run))
        elif stats.is_public:
            public.add(observe(kind, run))
    logger.debug(
        "oracle: %d runs, %d private and %d public observations",
        count,
        len(private),
        len(public),
    )
    return OracleObservations(frozenset(private), frozenset(public), count)


def format_observation(value: T.Any) -> T.Any:
    if isinstance(value, Fraction):
        return fraction_str(value)
    if isinstance(value, tuple):
        return [format_observation(v) for v in value]
    return value


def _sorted(values: T.Iterable[T.Hashable]) -> T.List[T.Hashable]:
    return sorted(values, key=lambda v: str(format_observation(v)))


def _witness_matches(
    query: OpacityQuery, witness: T.Mapping[str, T.Any], observation: T.Any
) -> T.Optional[bool]:
    """Whether an observation is the one a vector witness describes;
    ``None`` when the witness cannot be read as an observation."""
    if "vector" not in witness:
        return None
    counts = dict(zip(witness["alphabet"], witness["vector"]))
    energies = tuple(
        Fraction(v) for a, v in zip(witness["alphabet"], witness["vector"])
        if a not in (TICK, FRACTIONAL_EXIT)
    )
    if query.property is Property.EN:
        return observation == energies
    if query.property is Property.ET_EN:
        duration, final = observation
        ticks = counts.get(TICK, 0)
        if counts.get(FRACTIONAL_EXIT, 0):
            timed = ticks < duration < ticks + 1
        else:
            timed = duration == ticks
        return timed and final == energies
    return None


def _found(query, witness, observations) -> T.Optional[bool]:
    results = {_witness_matches(query, witness, o) for o in observations}
    if None in results:
        return None
    return True in results


def _agreement(
    query: OpacityQuery, status: Status, witness, seen: OracleObservations
) -> T.Tuple[str, str]:
    common = seen.private & seen.public
    private_only = seen.private - seen.public
    public_only = seen.public - seen.private
    if status not in (Status.HOLDS, Status.FAILS):
        return INCONCLUSIVE, f"decider returned {status.value}"
    if query.variant is Variant.EXISTS:
        if status is Status.FAILS:
            if common:
                return DISAGREE, "the oracle found a shared observation"
            return AGREE, "no shared observation within the bounds"
        if common:
            return AGREE, "the oracle found a shared observation"
        return INCONCLUSIVE, "no shared observation within the bounds"
    if status is Status.HOLDS:
        unmatched = private_only or (public_only if query.variant is Variant.FULL else ())
        if unmatched:
            return INCONCLUSIVE, "some observations are unmatched within the bounds"
        return AGREE, "every bounded observation is matched"
    if witness is None:
        return INCONCLUSIVE, "no counterexample to reproduce"
    side = witness.get("side", "private")
    here, there = (
        (seen.private, seen.public) if side == "private" else (seen.public, seen.private)
    )
    reached = _found(query, witness, here)
    if reached is None:
        if (private_only if side == "private" else public_only):
            return AGREE, f"the oracle found an unmatched {side} observation"
        return INCONCLUSIVE, "counterexample is not comparable with observations"
    if not reached:
        return INCONCLUSIVE, f"counterexample not reached on the {side} side"
    if _found(query, witness, there):
        return DISAGREE, "counterexample observed on both sides"
    return AGREE, f"counterexample reproduced on the {side} side only"


def oracle_compare(
    meta: GuardedMeta,
    query: OpacityQuery,
    bounds: T.Optional[OracleBounds] = None,
    limits: T.Optional[Limits] = None,
) -> T.Dict[str, T.Any]:
    """Run the decider and the oracle on ``query`` and report whether they
    agree; disagreements are reported as such."""
    bounds = bounds or OracleBounds.from_settings()
    verdict = decide(meta, query, limits)
    seen = oracle_observations(meta, _KINDS[query.property], bounds)
    agreement, detail = _agreement(query, verdict.status, verdict.witness, seen)
    if agreement == DISAGREE:
        logger.warning("oracle disagrees on %s: %s", query, detail)
    common = _sorted(seen.private & seen.public)
    return {
        "verdict": verdict.as_dict(),
        "oracle": {
            "grid": fraction_str(bounds.grid),
            "max_steps": bounds.max_steps,
            "horizon": fraction_str(bounds.horizon),
            "runs": seen.runs,
            "private": [format_observation(o) for o in _sorted(seen.private)],
            "public": [format_observation(o) for o in _sorted(seen.public)],
            "common": [format_observation(o) for o in common],
        },
        "agreement": agreement,
        "detail": detail,
    }
