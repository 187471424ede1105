from django.test import SimpleTestCase

from meta_opacity.errors import DimensionError
from meta_opacity.nfa import Nfa
from meta_opacity.pbb import END, parikh_by_block, pbb_product_check
from meta_opacity.semilinear import (
    SemilinearSet,
    slset_intersection_witness,
    slset_member,
)

INC = "inc_1"


def one_then_two():
    # one unit before the tick, two after
    return Nfa.build(
        [(0, INC, 1), (1, "t", 2), (2, INC, 3), (3, INC, 4)], 0, [4]
    )


class ParikhByBlockTests(SimpleTestCase):
    def test_blocks(self):
        pbb = parikh_by_block(one_then_two(), [INC])
        self.assertEqual(pbb.states, {0, 2, END})
        self.assertEqual(pbb.accepting, {END})
        self.assertEqual(
            [(e.source, e.label, e.target) for e in pbb.edges],
            [(0, "t", 2), (2, "f", END)],
        )
        self.assertEqual(pbb.edges[0].image, SemilinearSet.of((1,)))
        self.assertEqual(pbb.edges[1].image, SemilinearSet.of((2,)))

    def test_loop_inside_block(self):
        nfa = Nfa.build([(0, INC, 0), (0, "t", 1), (1, None, 2)], 0, [2])
        pbb = parikh_by_block(nfa, [INC])
        (tick,) = pbb.edges_from(0)
        self.assertEqual(tick.image, SemilinearSet.of((0,), (1,)))
        (flush,) = pbb.edges_from(1)
        self.assertEqual(flush.image, SemilinearSet.of((0,)))

    def test_product_path(self):
        looping = Nfa.build(
            [(0, INC, 0), (0, "t", 1), (1, INC, 2), (2, INC, 3)], 0, [3]
        )
        found, path = pbb_product_check(
            parikh_by_block(one_then_two(), [INC]), parikh_by_block(looping, [INC])
        )
        self.assertTrue(found)
        self.assertEqual([s.label for s in path], ["t", "f"])
        self.assertEqual([s.vector for s in path], [(1,), (2,)])
        self.assertEqual(path[-1].target, (END, END))

    def test_product_blocked(self):
        one_then_one = Nfa.build([(0, INC, 1), (1, "t", 2), (2, INC, 3)], 0, [3])
        self.assertEqual(
            pbb_product_check(
                parikh_by_block(one_then_two(), [INC]),
                parikh_by_block(one_then_one, [INC]),
            ),
            (False, None),
        )

    def test_dimension_mismatch(self):
        nfa = one_then_two()
        with self.assertRaises(DimensionError):
            pbb_product_check(
                parikh_by_block(nfa, [INC]), parikh_by_block(nfa, [INC, "dec_1"])
            )


def private_side():
    # a and b stand for inc_1 and inc_2
    return Nfa.build(
        [
            ("q0", "a", "q1"),
            ("q1", "b", "q0"),
            ("q0", "b", "q3"),
            ("q1", "t", "q2"),
            ("q2", "t", "q2"),
            ("q2", "b", "q3"),
            ("q3", "t", "q1"),
            ("q3", "a", "qf"),
        ],
        "q0",
        ["qf"],
    )


def public_side():
    return Nfa.build(
        [
            ("p0", "a", "p0"),
            ("p1", "b", "p1"),
            ("p1", "t", "p0"),
            ("p0", "t", "p1"),
            ("p1", "a", "pf"),
        ],
        "p0",
        ["pf"],
    )


class BlockProductTests(SimpleTestCase):
    def tick(self, pbb, source, target):
        (edge,) = [
            e for e in pbb.edges_from(source) if e.label == "t" and e.target == target
        ]
        return edge.image

    def test_private_blocks(self):
        pbb = parikh_by_block(private_side(), ["a", "b"])
        to_q2 = self.tick(pbb, "q0", "q2")
        self.assertTrue(slset_member(to_q2, (1, 0)))
        self.assertTrue(slset_member(to_q2, (3, 2)))
        self.assertFalse(slset_member(to_q2, (0, 1)))
        to_q1 = self.tick(pbb, "q0", "q1")
        self.assertTrue(slset_member(to_q1, (0, 1)))
        self.assertFalse(slset_member(to_q1, (1, 0)))

    def test_product_edges(self):
        private = parikh_by_block(private_side(), ["a", "b"])
        public = parikh_by_block(public_side(), ["a", "b"])
        only_a = self.tick(public, "p0", "p1")
        self.assertIsNone(
            slset_intersection_witness(self.tick(private, "q0", "q1"), only_a)
        )
        shared = slset_intersection_witness(self.tick(private, "q0", "q2"), only_a)
        self.assertEqual(shared, (1, 0))

    def test_product_path(self):
        found, path = pbb_product_check(
            parikh_by_block(private_side(), ["a", "b"]),
            parikh_by_block(public_side(), ["a", "b"]),
        )
        self.assertTrue(found)
        self.assertEqual([s.label for s in path], ["t", "f"])
        self.assertEqual(path[0].target, ("q2", "p1"))
        self.assertEqual(path[0].vector, (1, 0))
        self.assertEqual(path[-1].target, (END, END))
