from fractions import Fraction

from django.test import SimpleTestCase

from meta_opacity.conf import OracleBounds
from meta_opacity.deciders import OpacityQuery, Property, Variant
from meta_opacity.oracle import (
    AGREE,
    INCONCLUSIVE,
    format_observation,
    oracle_compare,
)

from .utils import BaseTestMixin

BOUNDS = OracleBounds(grid=Fraction(1, 2), max_steps=6, horizon=Fraction(3))


class OracleCompareTests(BaseTestMixin, SimpleTestCase):
    def test_shared_energy(self):
        report = oracle_compare(
            self.sample("double_increment"),
            OpacityQuery(Property.EN, Variant.EXISTS),
            BOUNDS,
        )
        self.assertEqual(report["verdict"]["status"], "HOLDS")
        self.assertEqual(report["agreement"], AGREE)
        self.assertEqual(report["oracle"]["common"], [["2"]])
        self.assertEqual(report["oracle"]["public"], [["2"]])
        self.assertEqual(report["oracle"]["grid"], "1/2")
        self.assertEqual(report["oracle"]["horizon"], "3")
        self.assertGreater(report["oracle"]["runs"], 0)

    def test_counterexample_reproduced(self):
        report = oracle_compare(
            self.sample("double_increment"),
            OpacityQuery(Property.EN, Variant.WEAK),
            BOUNDS,
        )
        self.assertEqual(report["verdict"]["status"], "FAILS")
        self.assertEqual(report["agreement"], AGREE)
        self.assertIn("private side only", report["detail"])

    def test_buffered_levels_never_shared(self):
        report = oracle_compare(
            self.sample("decrement_eta"),
            OpacityQuery(Property.BDE, Variant.EXISTS),
            BOUNDS,
        )
        self.assertEqual(report["verdict"]["status"], "FAILS")
        self.assertEqual(report["agreement"], AGREE)
        self.assertEqual(report["oracle"]["common"], [])

    def test_unsupported_is_inconclusive(self):
        report = oracle_compare(
            self.sample("two_counter"),
            OpacityQuery(Property.EN, Variant.EXISTS),
            BOUNDS,
        )
        self.assertEqual(report["verdict"]["status"], "UNSUPPORTED")
        self.assertEqual(report["agreement"], INCONCLUSIVE)


class FormatTests(SimpleTestCase):
    def test_format_observation(self):
        self.assertEqual(
            format_observation((Fraction(5, 2), (Fraction(2), Fraction(0)))),
            ["5/2", ["2", "0"]],
        )
        self.assertEqual(format_observation("x"), "x")
