from collections import Counter
from fractions import Fraction

from django.test import SimpleTestCase

from meta_opacity.conf import Limits, OracleBounds
from meta_opacity.deciders import (
    SHARED_WORD_NOTE,
    OpacityQuery,
    Property,
    Status,
    Variant,
    decide,
    decide_bde,
    decide_de,
    decide_en,
    decide_et_en,
    dispatch_table,
    parikh_images,
    result_of,
    route,
)
from meta_opacity.model import classify
from meta_opacity.oracle import oracle_observations
from meta_opacity.semantics import ObservationKind
from meta_opacity.semilinear import slset_member

from .utils import BaseTestMixin, fractions, random_model

GR = "+guard-removal"
PBB_OR_OPEN = ("parikh-by-block", "open", "open")

# (class, property) -> pipeline, or per variant (EXISTS, WEAK, FULL)
DISPATCH = {
    ("discrete positive ETA", "EN"): "parikh",
    ("discrete positive ETA", "ET_EN"): "parikh",
    ("discrete positive ETA", "DE"): "tick-words",
    ("discrete positive ETA", "BDE"): "buffered-words",
    ("discrete positive META", "EN"): "parikh",
    ("discrete positive META", "ET_EN"): "parikh",
    ("discrete positive META", "DE"): PBB_OR_OPEN,
    ("discrete positive META", "BDE"): "buffered-words",
    ("discrete positive guarded ETA", "EN"): "parikh" + GR,
    ("discrete positive guarded ETA", "ET_EN"): "parikh" + GR,
    ("discrete positive guarded ETA", "DE"): "tick-words" + GR,
    ("discrete positive guarded ETA", "BDE"): "buffered-words" + GR,
    ("discrete positive guarded META", "EN"): "parikh" + GR,
    ("discrete positive guarded META", "ET_EN"): "parikh" + GR,
    ("discrete positive guarded META", "DE"): ("parikh-by-block" + GR, "open", "open"),
    ("discrete positive guarded META", "BDE"): "buffered-words" + GR,
    ("discrete ETA", "EN"): "energy-stack",
    ("discrete ETA", "ET_EN"): "energy-stack",
    ("discrete ETA", "DE"): ("tick-words-nonneg", "open", "open"),
    ("discrete ETA", "BDE"): "buffered-words-nonneg",
    ("discrete META", "EN"): "open",
    ("discrete META", "ET_EN"): "open",
    ("discrete META", "DE"): "open",
    ("discrete META", "BDE"): "open",
    ("discrete guarded ETA", "EN"): "energy-stack-guarded",
    ("discrete guarded ETA", "ET_EN"): "energy-stack-guarded",
    ("discrete guarded ETA", "DE"): "open",
    ("discrete guarded ETA", "BDE"): "open",
    ("discrete guarded META", "EN"): "undecidable",
    ("discrete guarded META", "ET_EN"): "undecidable",
    ("discrete guarded META", "DE"): "undecidable",
    ("discrete guarded META", "BDE"): "open",
}


def cell_reason(reason):
    if "undecidable" in reason:
        return "undecidable"
    assert "open problem" in reason, reason
    return "open"


class EnergyOpacityTests(BaseTestMixin, SimpleTestCase):
    def test_double_increment(self):
        meta = self.sample("double_increment")
        shared = decide_en(meta, Variant.EXISTS)
        self.assertEqual(shared.status, Status.HOLDS)
        self.assertEqual(shared.pipeline, "parikh")
        self.assertEqual(shared.witness, {"alphabet": ["inc_1"], "vector": [2]})

        weak = decide_en(meta, Variant.WEAK)
        self.assertEqual(weak.status, Status.FAILS)
        self.assertEqual(
            weak.witness, {"alphabet": ["inc_1"], "vector": [0], "side": "private"}
        )
        self.assertEqual(decide_en(meta, Variant.FULL).status, Status.FAILS)

    def test_images(self):
        images = parikh_images(self.sample("double_increment"), Property.EN)
        self.assertEqual(images.alphabet, ["inc_1"])
        for value in range(11):
            with self.subTest(value):
                self.assertTrue(slset_member(images.private, (value,)))
                self.assertEqual(slset_member(images.public, (value,)), value == 2)

    def test_guard_removal_pipeline(self):
        meta = self.sample("guarded_counter")
        shared = decide_en(meta, Variant.EXISTS)
        self.assertEqual(shared.status, Status.HOLDS)
        self.assertEqual(shared.pipeline, "parikh+guard-removal")
        weak = decide_en(meta, Variant.WEAK)
        self.assertEqual(weak.status, Status.FAILS)
        self.assertEqual(weak.witness["alphabet"], ["inc_1", "inc_2"])
        self.assertEqual(weak.witness["vector"], [0, 1])

    def test_guarded_energy_stack(self):
        meta = self.sample("guarded_stack")
        shared = decide_en(meta, Variant.EXISTS)
        self.assertEqual(shared.status, Status.HOLDS)
        self.assertEqual(shared.pipeline, "energy-stack-guarded")
        self.assertEqual(decide_en(meta, Variant.WEAK).status, Status.HOLDS)
        full = decide_en(meta, Variant.FULL)
        self.assertEqual(full.status, Status.FAILS)
        self.assertEqual(full.witness, {"alphabet": ["a"], "vector": [3], "side": "public"})


class OracleAgreementTests(SimpleTestCase):
    def test_shared_observations_mean_opacity(self):
        bounds = OracleBounds(grid=Fraction(1), max_steps=5, horizon=Fraction(2))
        shared = 0
        for seed in range(20):
            guarded = seed % 4 == 0
            meta = random_model(100 + seed, energies=1 + seed % 2, guarded=guarded)
            with self.subTest(seed=seed):
                seen = oracle_observations(meta, ObservationKind.EN, bounds)
                verdict = decide_en(meta, Variant.EXISTS)
                self.assertIn(verdict.status, (Status.HOLDS, Status.FAILS))
                if seen.private & seen.public:
                    shared += 1
                    self.assertEqual(verdict.status, Status.HOLDS)
        self.assertGreater(shared, 0)


class TimedEnergyOpacityTests(BaseTestMixin, SimpleTestCase):
    def test_double_increment(self):
        meta = self.sample("double_increment")
        verdict = decide_et_en(meta, Variant.EXISTS)
        self.assertEqual(verdict.status, Status.HOLDS)
        self.assertEqual(verdict.witness["alphabet"], ["inc_1", "t", "t>0"])
        # the smallest shared observation: both runs end at time 1 with 2
        self.assertEqual(verdict.witness["vector"], [2, 1, 0])

    def test_images_share_the_stated_vector(self):
        # the least shared vector is (2, 1, 0); (2, 2, 1) is shared too
        images = parikh_images(self.sample("double_increment"), Property.ET_EN)
        self.assertEqual(images.alphabet, ["inc_1", "t", "t>0"])
        self.assertTrue(slset_member(images.private, (2, 2, 1)))
        self.assertTrue(slset_member(images.public, (2, 2, 1)))

    def test_fractional_duration_is_shared(self):
        # (2, 2, 1): energy 2 after a duration in (2, 3)
        bounds = OracleBounds(grid=Fraction(1, 2), max_steps=6, horizon=Fraction(3))
        seen = oracle_observations(
            self.sample("double_increment"), ObservationKind.ET_EN, bounds
        )
        observation = (Fraction(5, 2), fractions(2))
        self.assertIn(observation, seen.private)
        self.assertIn(observation, seen.public)


class DiscreteEnergyOpacityTests(BaseTestMixin, SimpleTestCase):
    def test_decrements_share_levels(self):
        verdict = decide_de(self.sample("decrement_eta"), Variant.EXISTS)
        self.assertEqual(verdict.status, Status.HOLDS)
        self.assertEqual(verdict.pipeline, "tick-words-nonneg")
        self.assertEqual(verdict.notes, (SHARED_WORD_NOTE,))
        counts = Counter(verdict.witness["word"])
        self.assertEqual((counts["inc_1"], counts["dec_1"]), (2, 2))
        self.assertGreaterEqual(counts["t"], 1)

    def test_decrements_weak_is_open(self):
        verdict = decide_de(self.sample("decrement_eta"), Variant.WEAK)
        self.assertEqual(verdict.status, Status.UNSUPPORTED)
        self.assertIsNone(verdict.pipeline)
        self.assertIn("open problem", verdict.unsupported_reason)

    def test_positive_single_energy(self):
        meta = self.sample("double_increment")
        verdict = decide_de(meta, Variant.EXISTS)
        self.assertEqual(verdict.status, Status.HOLDS)
        self.assertEqual(verdict.pipeline, "tick-words")
        self.assertIn("private_skeleton", verdict.witness)
        self.assertIn("public_skeleton", verdict.witness)
        self.assertEqual(decide_de(meta, Variant.WEAK).status, Status.FAILS)

    def test_blocks(self):
        verdict = decide_de(self.sample("guarded_counter"), Variant.EXISTS)
        self.assertEqual(verdict.pipeline, "parikh-by-block+guard-removal")
        self.assertEqual(verdict.status, Status.HOLDS)
        self.assertTrue(verdict.notes)
        self.assertEqual(verdict.witness["alphabet"], ["inc_1", "inc_2"])
        self.assertEqual(verdict.witness["path"][-1]["label"], "f")


class BufferedOpacityTests(BaseTestMixin, SimpleTestCase):
    def test_decrements_are_told_apart(self):
        verdict = decide_bde(self.sample("decrement_eta"), Variant.EXISTS)
        self.assertEqual(verdict.status, Status.FAILS)
        self.assertEqual(verdict.pipeline, "buffered-words-nonneg")

    def test_update_blocks_are_told_apart(self):
        # the public run adds 2 in one block, private runs add 1 per block
        verdict = decide_bde(self.sample("double_increment"), Variant.EXISTS)
        self.assertEqual(verdict.status, Status.FAILS)
        self.assertEqual(verdict.pipeline, "buffered-words")


class DispatchTests(BaseTestMixin, SimpleTestCase):
    def test_table(self):
        rows = dispatch_table()
        self.assertEqual(len(rows), 96)
        for row in rows:
            self.assertTrue(
                (row["pipeline"] is None) != (row["unsupported_reason"] is None)
            )
            self.assertEqual(row["result"] is None, row["pipeline"] is None)

    def test_table_cells(self):
        cells = {}
        for row in dispatch_table():
            key = (row["class"], row["property"])
            cells.setdefault(key, []).append(
                row["pipeline"] or cell_reason(row["unsupported_reason"])
            )
        self.assertEqual(len(cells), len(DISPATCH))
        for key, expected in DISPATCH.items():
            with self.subTest(key):
                if isinstance(expected, str):
                    expected = [expected] * 3
                self.assertEqual(cells[key], list(expected))

    def test_results(self):
        self.assertIn("Parikh images", result_of("parikh"))
        removal = result_of("parikh+guard-removal")
        self.assertTrue(removal.startswith("energy guards"))
        self.assertIn("Parikh images", removal)
        switched = result_of("integer-switch/tick-words")
        self.assertIn("discretisation", switched)
        self.assertIn("tick-instrumented", switched)
        self.assertIsNone(result_of(None))
        self.assertIsNone(result_of("integer-switch"))

    def test_undecidable_reasons(self):
        report = classify(self.sample("two_counter"))
        shown = {
            Property.EN: "final energy levels",
            Property.DE: "energy levels at every tick",
        }
        for prop, text in shown.items():
            reason = route(report, OpacityQuery(prop, Variant.EXISTS)).reason
            self.assertIn("two-counter machines", reason)
            self.assertIn("energy guards", reason)
            self.assertIn(text, reason)
        bde = route(report, OpacityQuery(Property.BDE, Variant.EXISTS)).reason
        self.assertIn("open problem", bde)

    def test_two_counter_machines(self):
        meta = self.sample("two_counter")
        for query in (
            OpacityQuery(Property.EN, Variant.EXISTS),
            OpacityQuery(Property.ET_EN, Variant.WEAK),
            OpacityQuery(Property.DE, Variant.FULL),
        ):
            with self.subTest(str(query)):
                verdict = decide(meta, query)
                self.assertEqual(verdict.status, Status.UNSUPPORTED)
                self.assertIn("undecidable", verdict.unsupported_reason)
                self.assertIn("discrete guarded META", verdict.unsupported_reason)

    def test_routes(self):
        report = classify(self.sample("decrement_eta"))
        self.assertEqual(
            route(report, OpacityQuery(Property.EN, Variant.FULL)).pipeline,
            "energy-stack",
        )
        self.assertEqual(
            route(report, OpacityQuery(Property.BDE, Variant.WEAK)).pipeline,
            "buffered-words-nonneg",
        )
        positive = classify(self.sample("guarded_counter"))
        self.assertIsNone(
            route(positive, OpacityQuery(Property.DE, Variant.WEAK)).pipeline
        )

    def test_resource_limit(self):
        verdict = decide_en(
            self.sample("double_increment"), Variant.EXISTS, Limits(max_states=5)
        )
        self.assertEqual(verdict.status, Status.RESOURCE)
        self.assertIn("max_states limit of 5 reached", verdict.notes[-1])

    def test_verdict_dict(self):
        verdict = decide_en(self.sample("double_increment"), Variant.EXISTS)
        self.assertEqual(
            verdict.as_dict(),
            {
                "status": "HOLDS",
                "pipeline": "parikh",
                "property": "EN",
                "variant": "EXISTS",
                "witness": {"alphabet": ["inc_1"], "vector": [2]},
                "result": result_of("parikh"),
            },
        )
        self.assertNotIn("witness", verdict.as_dict(witness=False))
        unsupported = decide_en(self.sample("two_counter"), Variant.EXISTS)
        self.assertNotIn("result", unsupported.as_dict())


class RateModelTests(BaseTestMixin, SimpleTestCase):
    def test_non_integer_execution_time(self):
        verdict = decide_en(self.sample("integer_switch"), Variant.EXISTS)
        self.assertEqual(verdict.status, Status.UNSUPPORTED)
        self.assertIn("non-integer time", verdict.unsupported_reason)

    def test_guarded_rates(self):
        verdict = decide_en(self.sample("drone"), Variant.EXISTS)
        self.assertEqual(verdict.status, Status.UNSUPPORTED)
        self.assertIn("guarded integer-switching", verdict.unsupported_reason)

    def test_not_covered(self):
        verdict = decide_de(self.sample("integer_switch_iet"), Variant.EXISTS)
        self.assertEqual(verdict.status, Status.UNSUPPORTED)
        self.assertIn("not covered", verdict.unsupported_reason)
