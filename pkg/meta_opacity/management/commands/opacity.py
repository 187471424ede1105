import json
import logging
import sys
import typing as T
from dataclasses import replace
from pathlib import Path

from django.core.exceptions import ImproperlyConfigured
from django.core.management.base import BaseCommand, CommandError

from meta_opacity.conf import Limits, OracleBounds
from meta_opacity.deciders import OpacityQuery, Property, Status, Variant, decide
from meta_opacity.dot import model_dot, nfa_dot, pbb_dot, pda_dot, to_text
from meta_opacity.errors import (
    ModelError,
    OpacityError,
    ResourceLimitError,
    SemanticsError,
    UnsupportedClassError,
)
from meta_opacity.model import GuardedMeta, classify, max_energy_constant
from meta_opacity.modelfile import parse_model, serialize_model
from meta_opacity.oracle import DISAGREE, oracle_compare
from meta_opacity.pbb import parikh_by_block
from meta_opacity.pda import energy_pda_of_nfa, guarded_energy_pda
from meta_opacity.regions import build_region_automaton
from meta_opacity.samples import load_sample
from meta_opacity.semantics import (
    Run,
    as_fraction,
    bdeo,
    deo,
    enumerate_runs,
    fraction_str,
    replay,
    run_stats,
)
from meta_opacity.transforms import (
    TICK,
    TickMode,
    add_tick_instrumentation,
    duplicate_visited,
    integer_switch_checks,
    integer_switch_to_discrete,
    remove_energy_guards,
    remove_private,
    split_and_relabel,
    unit_labels,
)

logger = logging.getLogger("meta_opacity")

EXIT_FAILS = 1
EXIT_UNSUPPORTED = 2
EXIT_INPUT = 3

_EXIT_CODES = {
    Status.HOLDS: 0,
    Status.FAILS: EXIT_FAILS,
    Status.UNSUPPORTED: EXIT_UNSUPPORTED,
    Status.RESOURCE: EXIT_INPUT,
}

_LOG_LEVELS = {0: logging.ERROR, 1: logging.WARNING, 2: logging.INFO, 3: logging.DEBUG}

SAMPLE_PREFIX = "sample:"


def _vector(meta: GuardedMeta, vector) -> T.Dict[str, str]:
    return {e: fraction_str(v) for e, v in zip(meta.energies, vector)}


def _vectors(vectors) -> T.List[T.List[str]]:
    return [[fraction_str(v) for v in vector] for vector in vectors]


class Command(BaseCommand):
    help = "classify META models and decide their energy opacity"

    CHECK = "check"
    CLASSIFY = "classify"
    SIMULATE = "simulate"
    TRANSFORM = "transform"
    EXPORT = "export"
    ORACLE = "oracle-compare"

    PROPERTIES = {
        "en": Property.EN,
        "et-en": Property.ET_EN,
        "de": Property.DE,
        "bde": Property.BDE,
    }
    MODES = {"et-en": TickMode.ET_EN, "de": TickMode.DE, "bde": TickMode.BDE}

    MODEL_STAGES = [
        "apub",
        "apriv",
        "guard-free",
        "split",
        "instrumented",
        "integer-switch",
    ]
    DOT_STAGES = [
        "model",
        "apub",
        "apriv",
        "instrumented",
        "regions",
        "pbb",
        "energy-stack",
    ]

    def add_arguments(self, parser):
        group = parser.add_argument_group("limits")
        group.add_argument(
            "--max-states",
            type=int,
            default=None,
            help="cap on automaton states (default: META_OPACITY_MAX_STATES)",
        )
        group.add_argument(
            "--max-semilinear",
            type=int,
            default=None,
            help="cap on semilinear components (default: META_OPACITY_MAX_SEMILINEAR)",
        )

        cmds = parser.add_subparsers(
            dest="command",
            title="subcommands",
            description="valid subcommands",
        )

        def with_model(name: str, **kwargs):
            sub = cmds.add_parser(name, **kwargs)
            sub.add_argument(
                "model", type=str, help=f"model file or {SAMPLE_PREFIX}<name>"
            )
            return sub

        def with_query(sub, variant: bool = True):
            sub.add_argument(
                "--property",
                type=str.lower,
                default="en",
                choices=list(self.PROPERTIES),
                help="observed property",
            )
            if variant:
                sub.add_argument(
                    "--variant",
                    type=str.lower,
                    default="exists",
                    choices=[v.value.lower() for v in Variant],
                    help="opacity variant",
                )

        def with_bounds(sub):
            sub.add_argument("--grid", type=str, default=None, help="delay grid")
            sub.add_argument("--max-steps", type=int, default=None, help="step bound")
            sub.add_argument("--horizon", type=str, default=None, help="time bound")

        check = with_model(self.CHECK, help="decide opacity of a model")
        with_query(check)
        check.add_argument(
            "--witness", action="store_true", help="include the witness in the report"
        )
        check.add_argument(
            "--emit-dot", type=str, default=None, help="also write the model as DOT"
        )

        with_model(self.CLASSIFY, help="report the subclass of a model")

        simulate = with_model(self.SIMULATE, help="replay or enumerate runs")
        simulate.add_argument(
            "--script",
            type=str,
            default=None,
            help="JSON file with a list of [delay, edge] steps; "
            "without it runs are enumerated on the grid",
        )
        with_bounds(simulate)

        transform = with_model(self.TRANSFORM, help="print a transformed model")
        transform.add_argument(
            "--stage", type=str, required=True, choices=self.MODEL_STAGES
        )
        transform.add_argument(
            "--mode", type=str.lower, default="de", choices=list(self.MODES)
        )

        export = with_model(self.EXPORT, help="print a construction stage as DOT")
        export.add_argument("--stage", type=str, default="model", choices=self.DOT_STAGES)
        export.add_argument(
            "--mode", type=str.lower, default="de", choices=list(self.MODES)
        )

        oracle = with_model(self.ORACLE, help="compare a decider with the grid oracle")
        with_query(oracle)
        with_bounds(oracle)

        super().add_arguments(parser)

    def handle(self, *args, **options):
        self.configure_logging(options["verbosity"])
        command = options["command"] or ""
        handlers = {
            self.CHECK: self.check,
            self.CLASSIFY: self.classify,
            self.SIMULATE: self.simulate,
            self.TRANSFORM: self.transform,
            self.EXPORT: self.export,
            self.ORACLE: self.oracle_compare,
        }
        if command not in handlers:
            self.print_help("opacity", "")
            if command != "":
                raise CommandError(
                    f"don't know how to handle command: {command}",
                    returncode=EXIT_INPUT,
                )
            raise CommandError("command name required", returncode=EXIT_INPUT)
        try:
            handlers[command](self.load(options["model"]), options)
        except UnsupportedClassError as e:
            raise CommandError(
                f"not applicable: {e.reason}", returncode=EXIT_UNSUPPORTED
            ) from e
        except (ResourceLimitError, ImproperlyConfigured) as e:
            raise CommandError(str(e), returncode=EXIT_INPUT) from e
        except OpacityError as e:
            raise CommandError(str(e), returncode=EXIT_INPUT) from e

    def configure_logging(self, verbosity: int):
        logger.setLevel(_LOG_LEVELS.get(verbosity, logging.DEBUG))
        if verbosity >= 2 and not logger.handlers:
            logger.addHandler(logging.StreamHandler(sys.stderr))

    def load(self, source: str) -> GuardedMeta:
        try:
            if source.startswith(SAMPLE_PREFIX):
                return load_sample(source[len(SAMPLE_PREFIX) :])
            return parse_model(Path(source).read_bytes())
        except ModelError as e:
            raise CommandError(
                f"invalid model {source}: {e}", returncode=EXIT_INPUT
            ) from e
        except (OSError, LookupError) as e:
            raise CommandError(
                f"could not read model {source}: {e}", returncode=EXIT_INPUT
            ) from e

    def limits(self, options) -> Limits:
        return Limits.from_settings(
            max_states=options["max_states"], max_semilinear=options["max_semilinear"]
        )

    def query(self, options) -> OpacityQuery:
        return OpacityQuery(
            self.PROPERTIES[options["property"]], Variant(options["variant"].upper())
        )

    def bounds(self, options) -> OracleBounds:
        try:
            grid = options["grid"] and as_fraction(options["grid"])
            horizon = options["horizon"] and as_fraction(options["horizon"])
        except (ValueError, ZeroDivisionError) as e:
            raise CommandError(
                f"invalid oracle bound: {e}", returncode=EXIT_INPUT
            ) from e
        return OracleBounds.from_settings(
            grid=grid or None, max_steps=options["max_steps"], horizon=horizon or None
        )

    def write_json(self, report: T.Any):
        self.stdout.write(json.dumps(report, indent=2, ensure_ascii=False))

    def check(self, meta: GuardedMeta, options):
        query = self.query(options)
        if options["emit_dot"]:
            Path(options["emit_dot"]).write_text(to_text(model_dot(meta)))
        verdict = decide(meta, query, self.limits(options))
        report = {"model": options["model"], "class": classify(meta).class_name}
        report.update(verdict.as_dict(witness=options["witness"]))
        self.write_json(report)
        code = _EXIT_CODES[verdict.status]
        if code:
            raise CommandError(
                f"{query}: {verdict.status.value}"
                + (f" ({verdict.unsupported_reason})" if verdict.unsupported_reason else ""),
                returncode=code,
            )

    def classify(self, meta: GuardedMeta, options):
        report = classify(meta)
        if not report.is_discrete and not report.is_guarded:
            is_switching, is_integer_time = integer_switch_checks(
                meta, self.limits(options).max_states
            )
            report = replace(
                report,
                is_integer_switching=is_switching,
                is_integer_execution_time=is_integer_time,
            )
        self.write_json(report.as_dict())

    def trace(self, meta: GuardedMeta, run: Run) -> T.Dict[str, T.Any]:
        stats = run_stats(meta, run)
        return {
            "location": run.last.location,
            "duration": fraction_str(stats.duration),
            "energies": _vector(meta, stats.final_energies),
            "timed_word": [[fraction_str(t), a] for t, a in stats.timed_word],
            "private": stats.is_private,
            "public": stats.is_public,
            "deo": _vectors(deo(run).ticks),
            "bdeo": [_vectors(block) for block in bdeo(run).ticks],
        }

    def simulate(self, meta: GuardedMeta, options):
        if options["script"] is None:
            bounds = self.bounds(options)
            traces = [
                self.trace(meta, run)
                for run in enumerate_runs(
                    meta, bounds.max_steps, bounds.grid, bounds.horizon
                )
                if meta.location(run.last.location).is_final
            ]
            self.write_json({"accepting_runs": traces})
            return
        try:
            script = json.loads(Path(options["script"]).read_text())
            steps = [(delay, selector) for delay, selector in script]
        except (OSError, ValueError, TypeError) as e:
            raise CommandError(
                f"could not read script {options['script']}: {e}",
                returncode=EXIT_INPUT,
            ) from e
        try:
            run = replay(meta, steps)
        except SemanticsError as e:
            atom = f" (failing atom {e.atom})" if e.atom is not None else ""
            raise CommandError(
                f"invalid step, {e.code}: {e}{atom}", returncode=EXIT_INPUT
            ) from e
        self.write_json(self.trace(meta, run))

    def units(self, meta: GuardedMeta, options) -> GuardedMeta:
        if classify(meta).is_guarded:
            meta = remove_energy_guards(meta, self.limits(options).max_states)
        return split_and_relabel(meta)

    def stage(self, meta: GuardedMeta, stage: str, options) -> GuardedMeta:
        if stage == "model":
            return meta
        if stage == "apub":
            return remove_private(meta)
        if stage == "apriv":
            return duplicate_visited(meta)
        if stage == "guard-free":
            return remove_energy_guards(meta, self.limits(options).max_states)
        if stage == "split":
            return self.units(meta, options)
        if stage == "instrumented":
            return add_tick_instrumentation(
                self.units(meta, options), self.MODES[options["mode"]]
            )
        assert stage == "integer-switch"
        return integer_switch_to_discrete(meta, self.limits(options).max_states)

    def transform(self, meta: GuardedMeta, options):
        self.stdout.write(serialize_model(self.stage(meta, options["stage"], options)))

    def export(self, meta: GuardedMeta, options):
        stage = options["stage"]
        max_states = self.limits(options).max_states
        if stage == "regions":
            regions = build_region_automaton(self.units(meta, options), max_states)
            lines = nfa_dot(regions.nfa)
        elif stage == "pbb":
            limits = self.limits(options)
            units = unit_labels(len(meta.energies))
            timed = add_tick_instrumentation(self.units(meta, options), TickMode.DE)
            nfa = build_region_automaton(timed, max_states).nfa.project(units + [TICK])
            lines = pbb_dot(
                parikh_by_block(
                    nfa.remove_epsilon().minimize(limits.max_subsets),
                    units,
                    limits.max_semilinear,
                    limits.max_subsets,
                )
            )
        elif stage == "energy-stack":
            limits = self.limits(options)
            guarded = classify(meta).is_guarded
            split = split_and_relabel(meta, guard_markers=guarded)
            nfa = build_region_automaton(split, max_states).nfa
            nfa = nfa.project(sorted(split.actions))
            nfa = nfa.remove_epsilon().minimize(limits.max_subsets)
            if guarded:
                pda = guarded_energy_pda(nfa, max_energy_constant(meta))
            else:
                pda = energy_pda_of_nfa(nfa)
            lines = pda_dot(pda)
        else:
            lines = model_dot(self.stage(meta, stage, options))
        self.stdout.write(to_text(lines), ending="")

    def oracle_compare(self, meta: GuardedMeta, options):
        report = oracle_compare(
            meta, self.query(options), self.bounds(options), self.limits(options)
        )
        self.write_json(report)
        if report["agreement"] == DISAGREE:
            raise CommandError(
                f"oracle disagrees: {report['detail']}", returncode=EXIT_FAILS
            )
