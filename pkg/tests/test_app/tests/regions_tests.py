from django.test import SimpleTestCase

from meta_opacity.errors import ResourceLimitError, UnsupportedClassError
from meta_opacity.model import Atom, Relation
from meta_opacity.regions import (
    build_region_automaton,
    clock_region_of,
    max_constants,
    time_successor,
    time_successors,
)
from meta_opacity.transforms import split_and_relabel

from .utils import BaseTestMixin


class ClockRegionTests(SimpleTestCase):
    def test_single_clock_chain(self):
        consts = {"x": 3}
        chain = time_successors(clock_region_of({}, consts), consts)
        self.assertEqual(len(chain), 8)
        self.assertEqual(
            [str(r) for r in chain[:3]], ["x=0", "0<x<1", "x=1"]
        )
        self.assertTrue(chain[-1].is_unbounded)
        self.assertEqual(time_successor(chain[-1], consts), chain[-1])

    def test_clocks_move_together(self):
        consts = {"x": 1, "y": 1}
        chain = time_successors(clock_region_of({}, consts), consts)
        self.assertEqual(len(chain), 4)

    def test_fraction_ordering(self):
        consts = {"x": 2, "y": 2}
        region = clock_region_of({"x": "1/2", "y": "3/2"}, consts)
        self.assertEqual(region.integer_part("y"), 1)
        self.assertIn("frac(x)=frac(y)", str(region))
        self.assertNotEqual(region, clock_region_of({"x": "1/4", "y": "3/2"}, consts))
        self.assertEqual(region, clock_region_of({"x": "1/3", "y": "4/3"}, consts))

    def test_reset(self):
        consts = {"x": 2, "y": 2}
        region = clock_region_of({"x": "1/2", "y": "3/2"}, consts).reset(["y"])
        self.assertEqual(region, clock_region_of({"x": "1/2", "y": 0}, consts))
        self.assertTrue(region.has_zero_fraction("y"))

    def test_satisfies(self):
        consts = {"x": 3}
        between = clock_region_of({"x": "3/2"}, consts)
        self.assertTrue(between.satisfies_atom(Atom("x", Relation.GT, 1)))
        self.assertTrue(between.satisfies_atom(Atom("x", Relation.LT, 2)))
        self.assertFalse(between.satisfies_atom(Atom("x", Relation.LE, 1)))
        self.assertFalse(between.satisfies_atom(Atom("x", Relation.GE, 2)))
        beyond = clock_region_of({"x": 7}, consts)
        self.assertTrue(beyond.satisfies_atom(Atom("x", Relation.GT, 3)))
        self.assertFalse(beyond.satisfies_atom(Atom("x", Relation.LE, 3)))

    def test_negative_value(self):
        with self.assertRaises(ValueError):
            clock_region_of({"x": -1}, {"x": 1})


class RegionAutomatonTests(BaseTestMixin, SimpleTestCase):
    def test_rejects_energy_models(self):
        with self.assertRaises(UnsupportedClassError):
            build_region_automaton(self.sample("double_increment"))

    def test_split_model_language(self):
        ta = split_and_relabel(self.sample("double_increment"))
        self.assertEqual(max_constants(ta), {"x": 3, "cz": 0})
        regions = build_region_automaton(ta)
        self.assertTrue(regions.nfa.accepts([]))
        self.assertTrue(regions.nfa.accepts(["inc_1"]))
        self.assertTrue(regions.nfa.accepts(["inc_1"] * 4))
        for state in regions.states:
            self.assertTrue(ta.has_location(state.location))

    def test_state_limit(self):
        ta = split_and_relabel(self.sample("double_increment"))
        with self.assertRaises(ResourceLimitError) as ctx:
            build_region_automaton(ta, max_states=3)
        self.assertEqual(ctx.exception.limit, "max_states")
