from django.test import SimpleTestCase

from meta_opacity.dot import _gvquote, model_dot, nfa_dot, pbb_dot, pda_dot, to_text
from meta_opacity.nfa import Nfa
from meta_opacity.pbb import parikh_by_block
from meta_opacity.pda import l_geq0_pda

from .utils import BaseTestMixin


def edge_lines(text):
    return [line for line in text.splitlines() if "->" in line]


class DotTests(BaseTestMixin, SimpleTestCase):
    def test_quote(self):
        self.assertEqual(_gvquote('say "hi"'), r'"say \"hi\""')
        self.assertEqual(_gvquote("a\\b"), r'"a\\b"')

    def test_model(self):
        text = to_text(model_dot(self.sample("double_increment")))
        self.assertTrue(text.startswith("digraph {\n  rankdir=LR;\n"))
        self.assertTrue(text.endswith("}\n"))
        node = text[text.index('  "l_priv" [') :]
        self.assertIn('color="red"];', node[: node.index("];") + 2])
        self.assertEqual(text.count('color="red"'), 1)
        final = [line for line in text.splitlines() if '  "l_f" [' in line]
        self.assertIn("doublecircle", final[0])
        self.assertEqual(len(edge_lines(text)), 4)
        self.assertIn("eta1 += 2", text)

    def test_nfa(self):
        nfa = Nfa.build([(0, "a", 1), (1, None, 2)], 0, [2])
        text = to_text(nfa_dot(nfa))
        self.assertIn('  "0" -> "1" [label="a"];\n', text)
        self.assertIn('  "1" -> "2" [label="ε"];\n', text)
        self.assertIn('style="bold"', text)

    def test_pda(self):
        pda = l_geq0_pda()
        self.assertEqual(len(edge_lines(to_text(pda_dot(pda)))), len(pda.edges))

    def test_pbb(self):
        nfa = Nfa.build([(0, "inc_1", 1), (1, "t", 2), (2, "inc_1", 3)], 0, [3])
        text = to_text(pbb_dot(parikh_by_block(nfa, ["inc_1"])))
        self.assertEqual(len(edge_lines(text)), 2)

    def test_stable_output(self):
        meta = self.sample("guarded_counter")
        self.assertEqual(to_text(model_dot(meta)), to_text(model_dot(meta)))
