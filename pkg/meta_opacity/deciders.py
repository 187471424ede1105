"""Opacity deciders and the dispatch from model classes to pipelines.

Every decider builds the public side (private locations removed) and the
private side (runs that visited a private location) of the model, turns
both into finite or pushdown automata over the observed letters, and
compares what they can show:

``EXISTS``
    some observation is shared;
``WEAK``
    every private observation is also a public one;
``FULL``
    private and public observations coincide.
"""
import enum
import typing as T
from dataclasses import dataclass, field, replace
from logging import getLogger

from meta_opacity.conf import Limits
from meta_opacity.errors import ResourceLimitError, UnsupportedClassError
from meta_opacity.model import GuardedMeta, SubclassReport, classify, max_energy_constant
from meta_opacity.nfa import Nfa, Word, nfa_inclusion, nfa_intersect_emptiness
from meta_opacity.pbb import parikh_by_block, pbb_product_check
from meta_opacity.pda import (
    DRAIN,
    energy_pda_of_nfa,
    guarded_energy_pda,
    l_geq0_pda,
    parikh_of_pda,
    pda_emptiness,
    pda_nfa_product,
)
from meta_opacity.regions import build_region_automaton
from meta_opacity.semilinear import (
    SemilinearSet,
    Vector,
    parikh_of_nfa,
    slset_includes,
    slset_intersection_witness,
)
from meta_opacity.transforms import (
    FLUSH,
    FRACTIONAL_EXIT,
    TICK,
    TickMode,
    add_tick_instrumentation,
    dec_label,
    duplicate_visited,
    inc_label,
    integer_switch_checks,
    integer_switch_to_discrete,
    remove_energy_guards,
    remove_private,
    split_and_relabel,
    unit_labels,
)

logger = getLogger("meta_opacity")


class Property(enum.Enum):
    EN = "EN"
    ET_EN = "ET_EN"
    DE = "DE"
    BDE = "BDE"


class Variant(enum.Enum):
    EXISTS = "EXISTS"
    WEAK = "WEAK"
    FULL = "FULL"


class Status(enum.Enum):
    HOLDS = "HOLDS"
    FAILS = "FAILS"
    UNSUPPORTED = "UNSUPPORTED"
    RESOURCE = "RESOURCE"


@dataclass(frozen=True)
class OpacityQuery:
    property: Property
    variant: Variant

    def __str__(self) -> str:
        return f"{self.variant.value}-{self.property.value}"


@dataclass(frozen=True)
class Verdict:
    status: Status
    pipeline: T.Optional[str]
    property: Property
    variant: Variant
    witness: T.Optional[T.Dict[str, T.Any]] = None
    notes: T.Tuple[str, ...] = field(default=())
    unsupported_reason: T.Optional[str] = None

    def as_dict(self, witness: bool = True) -> T.Dict[str, T.Any]:
        data: T.Dict[str, T.Any] = {
            "status": self.status.value,
            "pipeline": self.pipeline,
            "property": self.property.value,
            "variant": self.variant.value,
        }
        if witness and self.witness is not None:
            data["witness"] = self.witness
        if self.unsupported_reason is not None:
            data["unsupported_reason"] = self.unsupported_reason
        result = self.result
        if result is not None:
            data["result"] = result
        if self.notes:
            data["notes"] = list(self.notes)
        return data

    @property
    def result(self) -> T.Optional[str]:
        return result_of(self.pipeline)


class Route(T.NamedTuple):
    pipeline: T.Optional[str]
    reason: T.Optional[str] = None
    notes: T.Tuple[str, ...] = ()

    @property
    def result(self) -> T.Optional[str]:
        return result_of(self.pipeline)


GUARD_REMOVAL = "+guard-removal"
GUARDED_PBB_NOTE = (
    "existential DE-opacity by blocks is established for unguarded discrete "
    "positive METAs; energy guards were removed first"
)
SHARED_WORD_NOTE = (
    "decrements make different words show the same energy levels: a shared "
    "word proves opacity, its absence decides nothing"
)


INTEGER_SWITCH = "integer-switch/"

# decidability result each pipeline implements, keyed by base pipeline
RESULTS = {
    "parikh": (
        "EN and ET-EN opacity are decidable for discrete positive METAs by "
        "comparing the Parikh images of the private and public region automata"
    ),
    "energy-stack": (
        "EN and ET-EN opacity are decidable for discrete ETAs by comparing the "
        "Parikh images of energy-stack pushdown automata"
    ),
    "energy-stack-guarded": (
        "EN and ET-EN opacity are decidable for discrete guarded ETAs with one "
        "copy per guard value up to the largest constant, all sharing one stack"
    ),
    "tick-words": (
        "DE opacity is decidable for discrete positive ETAs as inclusion and "
        "intersection of tick-instrumented regular languages"
    ),
    "tick-words-nonneg": (
        "a non-negative word shared by private and public runs of a discrete "
        "ETA proves existential DE opacity"
    ),
    "parikh-by-block": (
        "existential DE opacity is decidable for discrete positive METAs by "
        "intersecting Parikh images between consecutive ticks"
    ),
    "buffered-words": (
        "bDE opacity is decidable for discrete positive METAs as inclusion and "
        "intersection of regular languages with buffered updates"
    ),
    "buffered-words-nonneg": (
        "bDE opacity is decidable for discrete ETAs by intersecting the regular "
        "sides, never the pushdown one, with the non-negative prefix language"
    ),
}
GUARD_REMOVAL_RESULT = (
    "energy guards of positive models are removed by tracking each guarded "
    "energy up to the largest constant"
)
INTEGER_SWITCH_RESULT = (
    "integer-switching models with integer execution times are decided on "
    "their discretisation"
)


def result_of(pipeline: T.Optional[str]) -> T.Optional[str]:
    """Statement of the decidability result behind ``pipeline``."""
    if pipeline is None:
        return None
    parts = []
    if pipeline.startswith(INTEGER_SWITCH):
        parts.append(INTEGER_SWITCH_RESULT)
        pipeline = pipeline[len(INTEGER_SWITCH) :]
    base = pipeline.replace(GUARD_REMOVAL, "")
    if base not in RESULTS:
        return None
    if base != pipeline:
        parts.append(GUARD_REMOVAL_RESULT)
    parts.append(RESULTS[base])
    return "; ".join(parts)


def _undecidable(report: SubclassReport, query: OpacityQuery) -> Route:
    if query.property is Property.DE:
        shown = "observing the energy levels at every tick"
    else:
        shown = "observing the final energy levels"
    return Route(
        None,
        f"{query} is undecidable for {report.class_name}s: two energy variables "
        f"with energy guards and one clock encode two-counter machines, and "
        f"{shown} tells whether the machine halts",
    )


def _open(report: SubclassReport, query: OpacityQuery) -> Route:
    return Route(
        None, f"{query} is an open problem for {report.class_name}s; no procedure known"
    )


def route(report: SubclassReport, query: OpacityQuery) -> Route:
    """The pipeline deciding ``query`` on a discrete model of class
    ``report``, or the reason no pipeline applies."""
    guarded, positive = report.is_guarded, report.is_positive
    single = report.energy_count <= 1
    suffix = GUARD_REMOVAL if guarded else ""
    prop = query.property
    if prop in (Property.EN, Property.ET_EN):
        if positive:
            return Route("parikh" + suffix)
        if single:
            return Route("energy-stack-guarded" if guarded else "energy-stack")
        return _undecidable(report, query) if guarded else _open(report, query)
    if prop is Property.DE:
        if positive and single:
            return Route("tick-words" + suffix)
        if positive:
            if query.variant is not Variant.EXISTS:
                return _open(report, query)
            notes = (GUARDED_PBB_NOTE,) if guarded else ()
            return Route("parikh-by-block" + suffix, notes=notes)
        if guarded and not single:
            return _undecidable(report, query)
        if single and not guarded and query.variant is Variant.EXISTS:
            return Route("tick-words-nonneg", notes=(SHARED_WORD_NOTE,))
        return _open(report, query)
    if positive:
        return Route("buffered-words" + suffix)
    if single and not guarded:
        return Route("buffered-words-nonneg")
    return _open(report, query)


def _sample_report(guarded: bool, positive: bool, energies: int) -> SubclassReport:
    return SubclassReport(
        is_guarded=guarded,
        is_discrete=True,
        is_positive=positive,
        energy_count=energies,
        clock_count=1,
        is_ta=energies == 0,
        is_eta=energies == 1 and not guarded,
        is_meta=not guarded,
    )


def dispatch_table() -> T.List[T.Dict[str, T.Any]]:
    """Route of every discrete class (guarded or not, positive or not, one
    or two energies) for every property and variant."""
    rows = []
    for guarded in (False, True):
        for positive in (True, False):
            for energies in (1, 2):
                report = _sample_report(guarded, positive, energies)
                for prop in Property:
                    for variant in Variant:
                        found = route(report, OpacityQuery(prop, variant))
                        rows.append(
                            {
                                "class": report.class_name,
                                "property": prop.value,
                                "variant": variant.value,
                                "pipeline": found.pipeline,
                                "result": found.result,
                                "unsupported_reason": found.reason,
                            }
                        )
    return rows


class _Sides(T.NamedTuple):
    private: Nfa
    public: Nfa


def _empty_nfa(alphabet: T.Iterable[str]) -> Nfa:
    return Nfa.build([], "empty", [], alphabet)


def _region_sides(
    meta: GuardedMeta,
    limits: Limits,
    prepare: T.Callable[[GuardedMeta], GuardedMeta],
    keep: T.Sequence[str],
) -> _Sides:
    """Region automata of the prepared private and public sides, with every
    label outside ``keep`` silenced."""

    def build(side: GuardedMeta) -> Nfa:
        regions = build_region_automaton(prepare(side), limits.max_states)
        return regions.nfa.project(keep)

    private = build(duplicate_visited(meta))
    if meta.initial.is_private:
        public = _empty_nfa(keep)
    else:
        public = build(remove_private(meta))
    logger.debug(
        "sides: %d private and %d public region states",
        len(private.states),
        len(public.states),
    )
    return _Sides(private, public)


def _skeleton(nfa: Nfa, word: T.Sequence[str]) -> T.Optional[T.List[str]]:
    """States of an accepting path of ``nfa`` reading ``word``."""
    start = (nfa.initial, 0)
    parent: T.Dict[T.Tuple[T.Any, int], T.Optional[T.Tuple[T.Any, int]]] = {start: None}
    todo = [start]
    while todo:
        current = todo.pop(0)
        state, i = current
        if i == len(word) and state in nfa.accepting:
            path = []
            node: T.Optional[T.Tuple[T.Any, int]] = current
            while node is not None:
                path.append(str(node[0]))
                node = parent[node]
            return path[::-1]
        for label, target in nfa.successors(state):
            if label is None:
                nxt = (target, i)
            elif i < len(word) and label == word[i]:
                nxt = (target, i + 1)
            else:
                continue
            if nxt not in parent:
                parent[nxt] = current
                todo.append(nxt)
    return None


def _vector_witness(alphabet: T.Sequence[str], vector: Vector, **extra) -> T.Dict:
    return {"alphabet": list(alphabet), "vector": list(vector), **extra}


def _word_witness(word: Word, sides: T.Optional[_Sides] = None, **extra) -> T.Dict:
    data: T.Dict[str, T.Any] = {"word": list(word), **extra}
    if sides is not None:
        for name, nfa in (("private", sides.private), ("public", sides.public)):
            path = _skeleton(nfa, word)
            if path is not None:
                data[f"{name}_skeleton"] = path
    return data


def _verdict(
    status: Status,
    query: OpacityQuery,
    pipeline: str,
    notes: T.Tuple[str, ...],
    witness: T.Optional[T.Dict] = None,
) -> Verdict:
    return Verdict(status, pipeline, query.property, query.variant, witness, notes)


def _compare_images(
    query: OpacityQuery,
    pipeline: str,
    notes: T.Tuple[str, ...],
    alphabet: T.Sequence[str],
    private: SemilinearSet,
    public: SemilinearSet,
) -> Verdict:
    logger.debug("private image %s; public image %s", private, public)
    if query.variant is Variant.EXISTS:
        common = slset_intersection_witness(private, public)
        if common is None:
            return _verdict(Status.FAILS, query, pipeline, notes)
        return _verdict(
            Status.HOLDS, query, pipeline, notes, _vector_witness(alphabet, common)
        )
    holds, missing = slset_includes(public, private)
    if not holds:
        assert missing is not None
        witness = _vector_witness(alphabet, missing, side="private")
        return _verdict(Status.FAILS, query, pipeline, notes, witness)
    if query.variant is Variant.FULL:
        holds, missing = slset_includes(private, public)
        if not holds:
            assert missing is not None
            witness = _vector_witness(alphabet, missing, side="public")
            return _verdict(Status.FAILS, query, pipeline, notes, witness)
    return _verdict(Status.HOLDS, query, pipeline, notes)


def _compare_words(
    query: OpacityQuery,
    pipeline: str,
    notes: T.Tuple[str, ...],
    sides: _Sides,
    limits: Limits,
) -> Verdict:
    private = sides.private.remove_epsilon()
    public = sides.public.remove_epsilon()
    if query.variant is Variant.EXISTS:
        empty, word = nfa_intersect_emptiness(private, public)
        if empty:
            return _verdict(Status.FAILS, query, pipeline, notes)
        assert word is not None
        return _verdict(
            Status.HOLDS, query, pipeline, notes, _word_witness(word, sides)
        )
    holds, word = nfa_inclusion(private, public, limits.max_subsets)
    if not holds:
        assert word is not None
        witness = _word_witness(word, sides, side="private")
        return _verdict(Status.FAILS, query, pipeline, notes, witness)
    if query.variant is Variant.FULL:
        holds, word = nfa_inclusion(public, private, limits.max_subsets)
        if not holds:
            assert word is not None
            witness = _word_witness(word, sides, side="public")
            return _verdict(Status.FAILS, query, pipeline, notes, witness)
    return _verdict(Status.HOLDS, query, pipeline, notes)


def _guard_removal(route_: Route, limits: Limits):
    def prepare(meta: GuardedMeta) -> GuardedMeta:
        if route_.pipeline and route_.pipeline.endswith(GUARD_REMOVAL):
            return remove_energy_guards(meta, limits.max_states)
        return meta

    return prepare


class ParikhImages(T.NamedTuple):
    alphabet: T.List[str]
    private: SemilinearSet
    public: SemilinearSet


def parikh_images(
    meta: GuardedMeta,
    prop: Property,
    limits: T.Optional[Limits] = None,
    guard_removal: T.Optional[bool] = None,
) -> ParikhImages:
    """Parikh images of the private and public sides of a discrete positive
    model over the unit increments, plus ``t`` and ``t>0`` for ET-EN.

    Energy guards are removed first when ``guard_removal`` is set, which
    defaults to whether the model is guarded.
    """
    limits = limits or Limits.from_settings()
    if guard_removal is None:
        guard_removal = classify(meta).is_guarded
    units = unit_labels(len(meta.energies))
    counted = units + ([TICK, FRACTIONAL_EXIT] if prop is Property.ET_EN else [])

    def prepare(side: GuardedMeta) -> GuardedMeta:
        if guard_removal:
            side = remove_energy_guards(side, limits.max_states)
        return add_tick_instrumentation(split_and_relabel(side), TickMode.ET_EN)

    sides = _region_sides(meta, limits, prepare, counted)
    private, public = (
        parikh_of_nfa(nfa, counted, limits.max_semilinear, limits.max_subsets)
        for nfa in sides
    )
    return ParikhImages(counted, private, public)


def _parikh_pipeline(
    meta: GuardedMeta, query: OpacityQuery, found: Route, limits: Limits
) -> Verdict:
    assert found.pipeline is not None
    images = parikh_images(
        meta, query.property, limits, found.pipeline.endswith(GUARD_REMOVAL)
    )
    return _compare_images(query, found.pipeline, found.notes, *images)


def _energy_stack_pipeline(
    meta: GuardedMeta, query: OpacityQuery, found: Route, limits: Limits
) -> Verdict:
    guarded = classify(meta).is_guarded
    ticks = [TICK, FRACTIONAL_EXIT]
    counted = [DRAIN] + (ticks if query.property is Property.ET_EN else [])
    top = max_energy_constant(meta)

    def prepare(side: GuardedMeta) -> GuardedMeta:
        split = split_and_relabel(side, guard_markers=guarded)
        return add_tick_instrumentation(split, TickMode.ET_EN)

    def letters(side: GuardedMeta) -> T.List[str]:
        shown = prepare(side).actions
        if query.property is Property.EN:
            shown = shown - set(ticks)
        return sorted(shown)

    keep = letters(meta)
    sides = _region_sides(meta, limits, prepare, keep)
    images = []
    for nfa in sides:
        small = nfa.remove_epsilon().minimize(limits.max_subsets)
        if guarded:
            pda = guarded_energy_pda(small, top)
        else:
            pda = energy_pda_of_nfa(small)
        images.append(parikh_of_pda(pda, counted, limits.max_semilinear))
    return _compare_images(query, found.pipeline, found.notes, counted, *images)


def _tick_words_pipeline(
    meta: GuardedMeta, query: OpacityQuery, found: Route, limits: Limits
) -> Verdict:
    strip = _guard_removal(found, limits)
    keep = unit_labels(len(meta.energies)) + [TICK]

    def prepare(side: GuardedMeta) -> GuardedMeta:
        return add_tick_instrumentation(split_and_relabel(strip(side)), TickMode.DE)

    sides = _region_sides(meta, limits, prepare, keep)
    return _compare_words(query, found.pipeline, found.notes, sides, limits)


def _pbb_pipeline(
    meta: GuardedMeta, query: OpacityQuery, found: Route, limits: Limits
) -> Verdict:
    strip = _guard_removal(found, limits)
    units = unit_labels(len(meta.energies))

    def prepare(side: GuardedMeta) -> GuardedMeta:
        return add_tick_instrumentation(split_and_relabel(strip(side)), TickMode.DE)

    sides = _region_sides(meta, limits, prepare, units + [TICK])
    private, public = (
        parikh_by_block(
            nfa.remove_epsilon().minimize(limits.max_subsets),
            units,
            limits.max_semilinear,
            limits.max_subsets,
        )
        for nfa in sides
    )
    exists, path = pbb_product_check(private, public, limits.max_states)
    if not exists:
        return _verdict(Status.FAILS, query, found.pipeline, found.notes)
    assert path is not None
    witness = {
        "alphabet": units,
        "path": [
            {
                "source": [repr(s) for s in step.source],
                "label": step.label,
                "target": [repr(s) for s in step.target],
                "vector": list(step.vector),
            }
            for step in path
        ],
    }
    return _verdict(Status.HOLDS, query, found.pipeline, found.notes, witness)


def _buffered_words_pipeline(
    meta: GuardedMeta, query: OpacityQuery, found: Route, limits: Limits
) -> Verdict:
    strip = _guard_removal(found, limits)
    keep = unit_labels(len(meta.energies)) + [TICK, FLUSH]

    def prepare(side: GuardedMeta) -> GuardedMeta:
        return add_tick_instrumentation(split_and_relabel(strip(side)), TickMode.BDE)

    sides = _region_sides(meta, limits, prepare, keep)
    return _compare_words(query, found.pipeline, found.notes, sides, limits)


def _nonneg_words_pipeline(
    meta: GuardedMeta, query: OpacityQuery, found: Route, limits: Limits
) -> Verdict:
    """Buffered words of a discrete ETA with decrements: the automata over
    increments and decrements over-approximate the runs, which are exactly
    their words with no prefix below zero; only the regular side is ever
    complemented."""
    keep = [inc_label(1), dec_label(1), TICK, FLUSH]

    def prepare(side: GuardedMeta) -> GuardedMeta:
        return add_tick_instrumentation(split_and_relabel(side), TickMode.BDE)

    sides = _region_sides(meta, limits, prepare, keep)
    private, public = (
        nfa.remove_epsilon().minimize(limits.max_subsets) for nfa in sides
    )
    nonneg = l_geq0_pda()

    def nonempty(nfa: Nfa) -> T.Optional[Word]:
        _, word = pda_emptiness(pda_nfa_product(nonneg, nfa))
        return word

    pipeline, notes = found.pipeline, found.notes
    if query.variant is Variant.EXISTS:
        word = nonempty(private.intersect(public))
        if word is None:
            return _verdict(Status.FAILS, query, pipeline, notes)
        return _verdict(Status.HOLDS, query, pipeline, notes, _word_witness(word, sides))
    word = nonempty(private.intersect(public.complement(limits.max_subsets)))
    if word is not None:
        witness = _word_witness(word, sides, side="private")
        return _verdict(Status.FAILS, query, pipeline, notes, witness)
    if query.variant is Variant.FULL:
        word = nonempty(public.intersect(private.complement(limits.max_subsets)))
        if word is not None:
            witness = _word_witness(word, sides, side="public")
            return _verdict(Status.FAILS, query, pipeline, notes, witness)
    return _verdict(Status.HOLDS, query, pipeline, notes)


def _nonneg_tick_words_pipeline(
    meta: GuardedMeta, query: OpacityQuery, found: Route, limits: Limits
) -> Verdict:
    keep = [inc_label(1), dec_label(1), TICK]

    def prepare(side: GuardedMeta) -> GuardedMeta:
        return add_tick_instrumentation(split_and_relabel(side), TickMode.DE)

    sides = _region_sides(meta, limits, prepare, keep)
    private, public = (
        nfa.remove_epsilon().minimize(limits.max_subsets) for nfa in sides
    )
    nonneg = l_geq0_pda(neutral=(TICK,))
    _, word = pda_emptiness(pda_nfa_product(nonneg, private.intersect(public)))
    if word is None:
        raise UnsupportedClassError(
            "no shared word",
            f"{query} is an open problem for {classify(meta).class_name}s with "
            "decrements and no private and public run share an update word",
        )
    return _verdict(
        Status.HOLDS, query, found.pipeline, found.notes, _word_witness(word, sides)
    )


_PIPELINES: T.Dict[str, T.Callable[..., Verdict]] = {
    "parikh": _parikh_pipeline,
    "energy-stack": _energy_stack_pipeline,
    "energy-stack-guarded": _energy_stack_pipeline,
    "tick-words": _tick_words_pipeline,
    "tick-words-nonneg": _nonneg_tick_words_pipeline,
    "parikh-by-block": _pbb_pipeline,
    "buffered-words": _buffered_words_pipeline,
    "buffered-words-nonneg": _nonneg_words_pipeline,
}


def _run(
    meta: GuardedMeta, query: OpacityQuery, found: Route, limits: Limits
) -> Verdict:
    if found.pipeline is None:
        return Verdict(
            Status.UNSUPPORTED,
            None,
            query.property,
            query.variant,
            notes=found.notes,
            unsupported_reason=found.reason,
        )
    base = found.pipeline.replace(GUARD_REMOVAL, "")
    logger.info("deciding %s with pipeline %s", query, found.pipeline)
    try:
        return _PIPELINES[base](meta, query, found, limits)
    except UnsupportedClassError as e:
        return Verdict(
            Status.UNSUPPORTED,
            found.pipeline,
            query.property,
            query.variant,
            notes=found.notes,
            unsupported_reason=e.reason,
        )
    except ResourceLimitError as e:
        logger.warning("%s: %s limit %d reached", query, e.limit, e.value)
        return Verdict(
            Status.RESOURCE,
            found.pipeline,
            query.property,
            query.variant,
            notes=found.notes + (f"{e.limit} limit of {e.value} reached: {e}",),
        )


def _decide_discrete(
    meta: GuardedMeta, query: OpacityQuery, limits: Limits
) -> Verdict:
    return _run(meta, query, route(classify(meta), query), limits)


def _decide(
    meta: GuardedMeta, query: OpacityQuery, limits: T.Optional[Limits]
) -> Verdict:
    limits = limits or Limits.from_settings()
    if not classify(meta).is_discrete:
        return decide_via_is_transform(meta, query, limits)
    return _decide_discrete(meta, query, limits)


def decide_en(
    meta: GuardedMeta, variant: Variant, limits: T.Optional[Limits] = None
) -> Verdict:
    return _decide(meta, OpacityQuery(Property.EN, variant), limits)


def decide_et_en(
    meta: GuardedMeta, variant: Variant, limits: T.Optional[Limits] = None
) -> Verdict:
    return _decide(meta, OpacityQuery(Property.ET_EN, variant), limits)


def decide_de(
    meta: GuardedMeta, variant: Variant, limits: T.Optional[Limits] = None
) -> Verdict:
    return _decide(meta, OpacityQuery(Property.DE, variant), limits)


def decide_bde(
    meta: GuardedMeta, variant: Variant, limits: T.Optional[Limits] = None
) -> Verdict:
    return _decide(meta, OpacityQuery(Property.BDE, variant), limits)


def decide(
    meta: GuardedMeta, query: OpacityQuery, limits: T.Optional[Limits] = None
) -> Verdict:
    return _decide(meta, query, limits)


def _is_covered(report: SubclassReport, query: OpacityQuery) -> bool:
    if query.property in (Property.EN, Property.ET_EN):
        return report.is_positive or report.energy_count <= 1
    if query.property is Property.DE:
        return report.is_positive and (
            report.energy_count <= 1 or query.variant is Variant.EXISTS
        )
    return False


def decide_via_is_transform(
    meta: GuardedMeta, query: OpacityQuery, limits: T.Optional[Limits] = None
) -> Verdict:
    """Decide a model with energy rates by moving its rates to updates
    applied once per time unit.

    This is only sound when rates change at integer times and final
    locations are entered at integer times.
    """
    limits = limits or Limits.from_settings()
    report = classify(meta)

    def unsupported(reason: str) -> Verdict:
        return Verdict(
            Status.UNSUPPORTED,
            None,
            query.property,
            query.variant,
            unsupported_reason=reason,
        )

    if report.is_guarded:
        return unsupported(
            f"{query} is not offered for {report.class_name}s with energy rates: "
            "guarded integer-switching models are left out"
        )
    try:
        is_switching, is_integer_time = integer_switch_checks(meta, limits.max_states)
    except ResourceLimitError as e:
        return Verdict(
            Status.RESOURCE,
            "integer-switch",
            query.property,
            query.variant,
            notes=(f"{e.limit} limit of {e.value} reached: {e}",),
        )
    if not is_switching:
        return unsupported(
            f"{report.class_name} changes rates at non-integer times; "
            "only integer-switching models can be discretised"
        )
    if not is_integer_time:
        return unsupported(
            f"{report.class_name} can reach a final location at a non-integer "
            "time; discretisation needs integer execution times"
        )
    if not _is_covered(report, query):
        return unsupported(
            f"{query} is not covered by the discretisation of {report.class_name}s"
        )
    discrete = integer_switch_to_discrete(meta, limits.max_states)
    verdict = _decide_discrete(discrete, query, limits)
    note = "rates replaced by per-time-unit updates"
    return replace(
        verdict,
        pipeline=verdict.pipeline and f"{INTEGER_SWITCH}{verdict.pipeline}",
        notes=(note,) + verdict.notes,
    )
