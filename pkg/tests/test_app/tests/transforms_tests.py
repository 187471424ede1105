from django.test import SimpleTestCase

from meta_opacity.errors import (
    ResourceLimitError,
    SemanticsError,
    UnsupportedClassError,
)
from meta_opacity.model import Atom, Relation, SimpleConstraint, classify
from meta_opacity.semantics import energy_at, enumerate_runs, replay, run_stats
from meta_opacity.transforms import (
    FLUSH,
    FRACTIONAL_EXIT,
    SPLIT,
    TICK,
    URGENT,
    TickMode,
    add_tick_instrumentation,
    duplicate_visited,
    integer_switch_checks,
    integer_switch_to_discrete,
    parse_marker,
    parse_unit,
    remove_energy_guards,
    remove_private,
    split_and_relabel,
)

from .utils import BaseTestMixin, fractions, random_model


def accepted_words(meta, max_steps, grid, horizon):
    words = set()
    for run in enumerate_runs(meta, max_steps, grid, horizon):
        stats = run_stats(meta, run)
        if stats.is_private or stats.is_public:
            words.add((stats.timed_word, stats.is_private))
    return words


class LabelTests(SimpleTestCase):
    def test_parse_unit(self):
        self.assertEqual(parse_unit("inc_2"), ("inc", 2))
        self.assertEqual(parse_unit("dec"), ("dec", 1))
        self.assertIsNone(parse_unit("a"))
        self.assertIsNone(parse_unit(None))

    def test_parse_marker(self):
        self.assertEqual(
            parse_marker("[>0]dec_1"), ((Atom("", Relation.GT, 0),), "dec_1")
        )
        self.assertEqual(parse_marker("[<=2]"), ((Atom("", Relation.LE, 2),), None))
        self.assertEqual(parse_marker("inc_1"), ((), "inc_1"))
        with self.assertRaises(ValueError):
            parse_marker("[~2]inc_1")


class PrivateCopyTests(BaseTestMixin, SimpleTestCase):
    def test_remove_private(self):
        public = remove_private(self.sample("drone"))
        self.assertEqual(len(public.locations), 7)
        self.assertFalse(public.has_location("flashed"))
        for edge in public.edges:
            self.assertNotIn("flashed", (edge.source, edge.target))

    def test_duplicate_visited(self):
        doubled = duplicate_visited(self.sample("private_loop"))
        self.assertEqual(len(doubled.locations), 8)
        self.assertEqual(doubled.initial.name, "l_init/unvisited")
        self.assertEqual(doubled.final_names, frozenset({"l_f/visited"}))
        (enter,) = [
            e
            for e in doubled.edges_from("l_init/unvisited")
            if e.action == "a"
        ]
        self.assertEqual(enter.target, "l_priv/visited")
        self.assertEqual(doubled.edge_named("loop/visited").source, "l_priv/visited")


class GuardRemovalTests(BaseTestMixin, SimpleTestCase):
    def test_private_loop_copies(self):
        free = remove_energy_guards(self.sample("private_loop"))
        self.assertEqual(classify(free).class_name, "discrete positive ETA")
        self.assertEqual(free.initial.name, "l_init#0")
        names = {loc.name for loc in free.locations}
        self.assertEqual(
            names,
            {
                "l_init#0",
                "l1#0",
                "l_priv#1",
                "l_priv#3",
                "l_priv#5",
                "l_f#1",
                "l_f#2",
                "l_f#3",
                "l_f#5",
            },
        )
        self.assertEqual(free.private_names, {"l_priv#1", "l_priv#3", "l_priv#5"})

    def test_accepted_timed_words_are_kept(self):
        meta = self.sample("private_loop")
        self.assertEqual(
            accepted_words(remove_energy_guards(meta), 6, "1/2", 3),
            accepted_words(meta, 6, "1/2", 3),
        )
        meta = self.sample("guarded_counter")
        self.assertEqual(
            accepted_words(remove_energy_guards(meta), 5, 1, 1),
            accepted_words(meta, 5, 1, 1),
        )

    def test_counter_copies(self):
        meta = self.sample("guarded_counter")
        free = remove_energy_guards(meta)
        self.assertEqual(
            {loc.name for loc in free.locations},
            {
                "l_init#0",
                "l_init#1",
                "l_init#>1",
                "l1#1",
                "l1#>1",
                "l_priv#0",
                "l_priv#1",
                "l_priv#>1",
                "l_f#0",
                "l_f#1",
                "l_f#>1",
            },
        )
        # the loop is only kept while eta1 is at most 1
        loops = [e.source for e in free.edges if (e.name or "").startswith("loop")]
        self.assertEqual(sorted(loops), ["l_priv#0", "l_priv#1"])
        for edge in free.edges:
            self.assertEqual(edge.guard.atoms, ())
        self.assertEqual(
            accepted_words(free, 6, "1/2", 1), accepted_words(meta, 6, "1/2", 1)
        )

    def test_random_models_keep_timed_words(self):
        for seed in range(5):
            meta = random_model(seed, guarded=True)
            with self.subTest(seed=seed):
                self.assertTrue(classify(meta).is_guarded)
                self.assertEqual(
                    accepted_words(remove_energy_guards(meta), 6, "1/2", 1),
                    accepted_words(meta, 6, "1/2", 1),
                )

    def test_level_above_top(self):
        free = remove_energy_guards(self.sample("guarded_counter"))
        names = {loc.name for loc in free.locations}
        self.assertIn("l_init#>1", names)
        self.assertIn("l_priv#>1", names)

    def test_rejects_negative_updates(self):
        with self.assertRaises(UnsupportedClassError):
            remove_energy_guards(self.sample("guarded_stack"))

    def test_copy_limit(self):
        with self.assertRaises(ResourceLimitError):
            remove_energy_guards(self.sample("private_loop"), max_states=2)


class SplitTests(BaseTestMixin, SimpleTestCase):
    def test_units(self):
        split = split_and_relabel(self.sample("double_increment"))
        self.assertEqual(split.energies, ())
        self.assertEqual(split.actions, frozenset({"inc_1"}))
        self.assertEqual(split.clocks, ("x", "cz"))
        self.assertEqual(len([e for e in split.edges if e.action == "inc_1"]), 3)
        (helper,) = [loc for loc in split.locations if SPLIT in loc.labels]
        self.assertEqual(helper.name, "l_init~1.1")
        self.assertIn(URGENT, helper.labels)
        self.assertEqual(helper.invariant, SimpleConstraint.of(("cz", "<=", 0)))
        first, second = split.edges_from("l_init")[1], split.edges_from(helper.name)[0]
        self.assertEqual(first.target, helper.name)
        self.assertEqual(first.guard, SimpleConstraint.of(("x", ">=", 1)))
        self.assertIn("cz", first.resets)
        self.assertTrue(second.guard.is_true)
        self.assertEqual(second.target, "l_f")

    def test_decrements(self):
        split = split_and_relabel(self.sample("decrement_eta"))
        self.assertEqual(split.actions, frozenset({"inc_1", "dec_1"}))
        self.assertEqual(split.edge_named("loop").action, "dec_1")

    def test_guard_markers(self):
        split = split_and_relabel(self.sample("guarded_stack"), guard_markers=True)
        self.assertEqual(split.edge_named("enter").action, "[>2]")
        self.assertEqual(split.edge_named("charge").action, "inc_1")
        (exit_edge,) = [e for e in split.edges if e.target == "l_f" and e.source == "l_priv"]
        self.assertEqual(exit_edge.action, "[<=2]")
        self.assertEqual(exit_edge.guard, SimpleConstraint.of(("x", ">", 1)))
        (spend,) = [
            e for e in split.edges_from("l_priv") if e.target == "l_priv"
        ]
        self.assertEqual(spend.action, "[>0]dec_1")

    def test_rejections(self):
        with self.assertRaises(UnsupportedClassError):
            split_and_relabel(self.sample("guarded_stack"))
        with self.assertRaises(UnsupportedClassError):
            split_and_relabel(self.sample("drone"))
        with self.assertRaises(UnsupportedClassError):
            split_and_relabel(self.sample("guarded_counter"), guard_markers=True)


class TickInstrumentationTests(BaseTestMixin, SimpleTestCase):
    def instrumented(self, mode):
        return add_tick_instrumentation(
            split_and_relabel(self.sample("double_increment")), mode
        )

    def test_tick_loops(self):
        ticked = self.instrumented(TickMode.DE)
        tick_guard = SimpleConstraint.of(("ct", "<=", 1), ("ct", ">=", 1))
        loops = [e for e in ticked.edges if e.action == TICK and e.source == e.target]
        self.assertTrue(loops)
        for edge in loops:
            self.assertEqual(edge.guard, tick_guard)
            self.assertEqual(edge.resets, frozenset({"ct"}))
        self.assertEqual({e.source for e in loops}, {"l_init", "l_priv", "l_init~1.1"})

    def test_zero_copy_and_exit(self):
        ticked = self.instrumented(TickMode.DE)
        self.assertEqual(ticked.initial.name, "l_init@0")
        self.assertIn(Atom("ct", Relation.LE, 0), ticked.initial.invariant.atoms)
        self.assertEqual(ticked.final_names, frozenset({"l_f'"}))
        self.assertIn(URGENT, ticked.location("l_f").labels)
        self.assertEqual(ticked.clocks, ("x", "cz", "ct"))

    def test_original_edges_wait_for_time(self):
        ticked = self.instrumented(TickMode.DE)
        loop = ticked.edge_named("loop")
        self.assertIn(Atom("ct", Relation.GT, 0), loop.guard.atoms)
        self.assertTrue(ticked.edge_named("loop@0").guard.is_true)

    def test_exit_labels_per_mode(self):
        de = self.instrumented(TickMode.DE)
        self.assertNotIn(FRACTIONAL_EXIT, de.actions)
        et_en = self.instrumented(TickMode.ET_EN)
        exits = {e.action for e in et_en.edges if e.target == "l_f'"}
        self.assertEqual(exits, {None, TICK, FRACTIONAL_EXIT})

    def test_flushes(self):
        bde = self.instrumented(TickMode.BDE)
        self.assertIn(FLUSH, bde.actions)
        flushes = {
            loc.name
            for loc in bde.locations
            if "~flush" in loc.name and not loc.name.endswith("@0")
        }
        # one per unit edge closing a block: the second step of c and the loop
        self.assertEqual(flushes, {"l_f~flush2", "l_priv~flush3"})
        for edge in bde.edges:
            if edge.action == FLUSH:
                self.assertIn("~flush", edge.source)

    def test_rejects_energies(self):
        with self.assertRaises(UnsupportedClassError):
            add_tick_instrumentation(self.sample("double_increment"), TickMode.DE)


class IntegerSwitchTests(BaseTestMixin, SimpleTestCase):
    def test_checks(self):
        self.assertEqual(
            integer_switch_checks(self.sample("integer_switch")), (True, False)
        )
        self.assertEqual(
            integer_switch_checks(self.sample("integer_switch_iet")), (True, True)
        )

    def test_checks_reject_guarded_models(self):
        with self.assertRaises(UnsupportedClassError):
            integer_switch_checks(self.sample("private_loop"))

    def test_discrete_model_matches_per_unit(self):
        meta = self.sample("integer_switch")
        continuous = replay(meta, [(1, "a"), (1, "leave")])
        self.assertEqual(run_stats(meta, continuous).final_energies, fractions(0, 1))

        discrete = integer_switch_to_discrete(meta)
        report = classify(discrete)
        self.assertTrue(report.is_discrete)
        self.assertEqual(report.energy_count, 2)
        self.assertIn("cs", discrete.clocks)
        run = replay(discrete, [(1, None), (0, "a"), (1, None), (0, "leave")])
        stats = run_stats(discrete, run)
        self.assertEqual(stats.final_energies, fractions(0, 1))
        self.assertTrue(stats.is_private)

    def test_levels_agree_at_integer_times(self):
        meta = self.sample("integer_switch_iet")
        discrete = integer_switch_to_discrete(meta)

        def traces(model, max_steps):
            found = set()
            for run in enumerate_runs(model, max_steps, 1, 2):
                stats = run_stats(model, run)
                actions = [s for s in run.steps if s.edge.action is not None]
                if not (stats.is_private or stats.is_public) or len(actions) > 4:
                    continue
                levels = tuple(
                    energy_at(model, run, k) for k in range(int(stats.duration) + 1)
                )
                found.add((stats.is_private, stats.duration, levels))
            return found

        continuous = traces(meta, 4)
        # every time unit adds one silent tick step
        self.assertEqual(traces(discrete, 6), continuous)
        self.assertIn(
            (False, 2, (fractions(0, 0), fractions(0, 2), fractions(2, 4))), continuous
        )

    def test_discrete_model_orders_tick_first(self):
        discrete = integer_switch_to_discrete(self.sample("integer_switch"))
        # at time 1 the action needs the per-unit update to have happened
        with self.assertRaises(SemanticsError):
            replay(discrete, [(1, "a")])
