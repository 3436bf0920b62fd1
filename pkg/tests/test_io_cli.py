import io
import json

import numpy as np
import pytest
from hypothesis import given, settings

from qnsc import (
    Event,
    Generator,
    NondeterminismError,
    ParseError,
    StructureError,
    UnknownReferenceError,
    empty,
    make_generator,
)
from qnsc.automaton import accessible, closed_language_equal, language_equal
from qnsc.cli import CliError, main, parse_bounds
from qnsc.io import canonicalize, export_dot, parse_automaton, serialize_automaton

from helpers import F1, F2, F3, ALTERNATING, UNC_PLANT, generators, marked, words

F1_TEXT = """alphabet:
a c
b c
states:
0
1
initial:
0
marked:
0
trans:
0 a 1
1 b 0
"""


class TestParse:
    def test_canonical_round_trip(self):
        g = parse_automaton(F1_TEXT)
        assert language_equal(g, F1)
        assert serialize_automaton(g) == F1_TEXT

    def test_inline_items_and_comments(self):
        text = "# F1\nalphabet:\na c\nb c\nstates: A B\ninitial: A  # start\nmarked: A\ntrans:\nA a B\nB b A\n"
        assert serialize_automaton(parse_automaton(text)) == F1_TEXT

    def test_duplicate_transition(self):
        text = "alphabet:\na c\nstates: A B C\ninitial: A\nmarked:\ntrans:\nA a B\nA a C\n"
        with pytest.raises(NondeterminismError) as exc:
            parse_automaton(text)
        assert exc.value.line == 8

    def test_repeated_identical_transition(self):
        text = "alphabet:\na c\nstates: A B\ninitial: A\nmarked:\ntrans:\nA a B\nA a B\n"
        with pytest.raises(ParseError):
            parse_automaton(text)

    def test_alphabet_only(self):
        g = parse_automaton("alphabet:\na c\nb u\n")
        assert g.is_empty and g.n_states == 0
        assert g.events == (Event("a", True), Event("b", False))

    @pytest.mark.parametrize("text, line, col", [
        ("alphabet:\na x\n", 2, 3),
        ("a c\n", 1, 1),
        ("alphabet:\na c\nfoo:\n", 3, 1),
        ("alphabet:\na c\nstates: A\ninitial: A\ntrans:\nA a\n", 6, 3),
        ("alphabet:\na c\nalphabet:\n", 3, 1),
    ])
    def test_syntax_errors(self, text, line, col):
        with pytest.raises(ParseError) as exc:
            parse_automaton(text)
        assert (exc.value.line, exc.value.col) == (line, col)

    def test_unknown_references(self):
        with pytest.raises(UnknownReferenceError) as exc:
            parse_automaton("alphabet:\na c\nstates: A\ninitial: A\ntrans:\nA z A\n")
        assert (exc.value.line, exc.value.col) == (6, 3)
        with pytest.raises(UnknownReferenceError):
            parse_automaton("alphabet:\na c\nstates: A\ninitial: B\n")

    def test_missing_initial(self):
        with pytest.raises(StructureError):
            parse_automaton("alphabet:\na c\nstates: A\n")

    def test_parity_convention(self):
        text = "alphabet:\n11\n24\nstates: 0 1\ninitial: 0\nmarked: 1\ntrans:\n0 11 1\n1 24 0\n"
        g = parse_automaton(text, parity_convention=True)
        assert [(e.name, e.controllable) for e in g.events] == [("11", True), ("24", False)]
        with pytest.raises(ParseError):
            parse_automaton("alphabet:\nx\n", parity_convention=True)
        with pytest.raises(ParseError):
            parse_automaton(text)


class TestSerialize:
    def test_isomorphic(self):
        a = make_generator([(0, "a", 1), (1, "b", 2), (2, "c", 0)], initial=0, marked=[1, 2])
        b = make_generator([("z", "a", "y"), ("y", "b", "x"), ("x", "c", "z")], initial="z", marked=["x", "y"])
        assert serialize_automaton(a) == serialize_automaton(b)

    def test_idempotent(self):
        for g in (F1, F2, F3, ALTERNATING, UNC_PLANT):
            s = serialize_automaton(g)
            assert serialize_automaton(parse_automaton(s)) == s

    def test_empty(self):
        assert serialize_automaton(empty("ab")) == "alphabet:\na c\nb c\nstates:\nmarked:\ntrans:\n"
        assert parse_automaton(serialize_automaton(empty("ab"))).is_empty

    def test_unreachable_states_kept(self):
        g = make_generator([(0, "a", 1)], initial=0, marked=[1], states=[0, 1, 2], events="a")
        c = canonicalize(g)
        assert c.n_states == 3 and c.initial == 0
        assert "2\n" in serialize_automaton(g)

    def test_numeric_order(self):
        g = make_generator([(i, "a", i + 1) for i in range(11)], initial=0, marked=[11])
        lines = serialize_automaton(g).split("states:\n")[1].split("initial:")[0].split()
        assert lines == [str(i) for i in range(12)]


class TestDot:
    @staticmethod
    def counts(text):
        lines = text.splitlines()
        edges = [ln for ln in lines if "->" in ln and "__init" not in ln]
        nodes = [ln for ln in lines if ln.strip().startswith('"') and "->" not in ln and "__init" not in ln]
        return len(nodes), len(edges), sum("doublecircle" in ln for ln in nodes)

    def test_f1(self):
        assert self.counts(export_dot(F1)) == (2, 2, 1)

    def test_f3(self):
        assert self.counts(export_dot(F3)) == (3, 3, 2)

    def test_empty(self):
        text = export_dot(empty("a"))
        assert self.counts(text) == (0, 0, 0)
        assert text.startswith("digraph G {")

    def test_uncontrollable_dashed(self):
        text = export_dot(UNC_PLANT)
        dashed = [ln for ln in text.splitlines() if "dashed" in ln]
        assert len(dashed) == 1 and '"u"' in dashed[0]

    def test_deterministic(self):
        assert export_dot(F3) == export_dot(F3)


# ---------------------------------------------------------------------------
# CLI


def write(tmp_path, name, g_or_text):
    p = tmp_path / name
    p.write_text(g_or_text if isinstance(g_or_text, str) else serialize_automaton(g_or_text))
    return str(p)


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


class TestCli:
    def test_check_qc(self, tmp_path):
        f1 = write(tmp_path, "f1.aut", F1)
        code, out, _ = run("check-qc", f1, "--n", "1")
        assert code == 0 and "holds" in out

    def test_check_qc_fails(self, tmp_path):
        f2 = write(tmp_path, "f2.aut", F2)
        rep = tmp_path / "r.json"
        code, out, _ = run("check-qc", f2, "--n", "3", "--report", str(rep))
        assert code == 1 and "violated" in out
        data = json.loads(rep.read_text())
        assert data["verdict"] is False
        assert data["property"] == {"name": "check-qc", "parameters": {"N": 3}}
        assert set(data["stats"]) == {"states", "transitions", "elapsed_ms"}
        g = parse_automaton(open(f2).read())
        for wit in data["witnesses"]:
            assert set(wit) >= {"state", "trace", "kind", "bound"}
            assert wit["kind"] in ("path", "cycle", "unreachable")
            x = g.run_index(tuple(wit["access"]))
            assert g.states[x] == wit["state"]
            assert g.run_index(tuple(wit["trace"]), x) >= 0

    def test_supqc_both(self, tmp_path):
        f2 = write(tmp_path, "f2.aut", F2)
        rep = tmp_path / "r.json"
        code, out, _ = run("supqc", f2, "--n", "2", "--method", "both", "--report", str(rep))
        assert code == 0
        assert marked(parse_automaton(out)) == words("ac")
        assert json.loads(rep.read_text())["methods_agree"] is True

    def test_synth_hq_empty(self, tmp_path):
        f3 = write(tmp_path, "f3.aut", F3)
        code, out, _ = run("synth-hq", f3, f3, "--bounds", "1=1,2=2")
        assert code == 1
        assert parse_automaton(out).is_empty

    def test_out_and_trace(self, tmp_path):
        f2 = write(tmp_path, "f2.aut", F2)
        dst, tr = tmp_path / "o.aut", tmp_path / "t.json"
        code, out, _ = run("supqc", f2, "--n", "3", "--out", str(dst), "--trace", str(tr))
        assert code == 0 and out == ""
        assert marked(parse_automaton(dst.read_text())) == words("ac", "abc")
        assert json.loads(tr.read_text())["entries"]

    def test_plant_spec_commands(self, tmp_path):
        f3 = write(tmp_path, "f3.aut", F3)
        assert run("check-hqc", f3, f3, "--bounds", "1=2,2=2")[0] == 0
        assert run("check-hqc", f3, f3, "--bounds", "1=1,2=2")[0] == 1
        assert run("check-ctrl", f3, f3)[0] == 0
        assert run("supcon", f3, f3)[0] == 0
        assert run("synth-q", f3, f3, "--n", "2")[0] == 0
        assert run("suphqc", f3, f3, "--bounds", "1=2,2=2")[0] == 0
        assert run("check-nb", f3)[0] == 0

    def test_ctrl_violation(self, tmp_path):
        g = write(tmp_path, "g.aut", UNC_PLANT)
        k = write(tmp_path, "k.aut", "alphabet:\na c\nu u\nstates: 0 1\ninitial: 0\nmarked: 1\ntrans:\n0 a 1\n")
        code, out, _ = run("check-ctrl", g, k)
        assert code == 1 and "uncontrollable" in out

    def test_binary_commands(self, tmp_path):
        f1 = write(tmp_path, "f1.aut", F1)
        code, out, _ = run("product", f1, f1)
        assert code == 0 and language_equal(parse_automaton(out), F1)
        code, out, _ = run("union", f1, f1)
        assert code == 0 and language_equal(parse_automaton(out), F1)
        code, out, _ = run("complement", f1)
        assert code == 0 and not parse_automaton(out).accepts(())
        assert run("compare", f1, f1) == (0, "equal\n", "")

    def test_compare_differs(self, tmp_path):
        f1 = write(tmp_path, "f1.aut", F1)
        one = write(tmp_path, "e.aut", "alphabet:\na c\nb c\nstates: 0\ninitial: 0\nmarked: 0\n")
        code, out, _ = run("compare", one, f1)
        assert code == 1
        assert out.splitlines()[0] == "a_subset_b"
        assert "only in B: a b" in out

    def test_dot_and_oracle(self, tmp_path):
        f1 = write(tmp_path, "f1.aut", F1)
        code, out, _ = run("dot", f1)
        assert code == 0 and out.startswith("digraph")
        code, out, _ = run("oracle", "enum", f1, "--max-len", "2")
        assert code == 0
        assert out.splitlines() == ["closed ε", "closed a", "closed a b", "marked ε", "marked a b"]

    @pytest.mark.parametrize("argv", [
        [],
        ["check-qc", "missing.aut", "--n", "1"],
        ["check-qc", "{f1}", "--n", "0"],
        ["check-qc", "{f1}"],
        ["check-hqc", "{f3}", "{f3}", "--bounds", "1=2"],
        ["check-hqc", "{f3}", "{f3}", "--bounds", "1=x,2=2"],
        ["supqc", "{bad}", "--n", "1"],
        ["product", "{f1}", "{f3}"],
        ["frobnicate"],
    ])
    def test_errors_exit_2(self, tmp_path, argv):
        files = {"f1": write(tmp_path, "f1.aut", F1), "f3": write(tmp_path, "f3.aut", F3),
                 "bad": write(tmp_path, "bad.aut", "alphabet:\na q\n")}
        code, out, err = run(*[a.format(**files) for a in argv])
        assert code == 2 and err.startswith("qnsc: error:")

    def test_parity_flag(self, tmp_path):
        p = write(tmp_path, "p.aut", "alphabet:\n11\n24\nstates: 0 1\ninitial: 0\nmarked: 0 1\ntrans:\n0 11 1\n1 24 0\n")
        assert run("check-qc", p, "--n", "1")[0] == 2
        assert run("check-qc", p, "--n", "1", "--parity-convention")[0] == 0


def test_parse_bounds():
    assert parse_bounds("q1=3, q2=1") == {"q1": 3, "q2": 1}
    for bad in ("", "q", "q=0", "q=1,q=2", "=3"):
        with pytest.raises(CliError):
            parse_bounds(bad)


@settings(max_examples=200, deadline=None)
@given(generators(max_states=5, events="abc", uncontrollable="c"))
def test_round_trip(g):
    h = parse_automaton(serialize_automaton(g))
    assert language_equal(h, g) and closed_language_equal(h, g)
    assert h.events == g.events and h.n_states == g.n_states
    assert serialize_automaton(h) == serialize_automaton(g)


@settings(max_examples=100, deadline=None)
@given(generators(max_states=5, events="ab"))
def test_state_permutation_invariance(g):
    # only reachable states have a canonical position
    g = accessible(g)
    perm = np.random.default_rng(g.n_states).permutation(g.n_states)
    inv = np.argsort(perm)
    delta = np.where(g.delta[perm] >= 0, inv[np.maximum(g.delta[perm], 0)], -1).astype(np.int32)
    init = int(inv[g.initial]) if g.initial >= 0 else -1
    h = Generator(g.events, g.states, delta, init, g.marked[perm])
    assert serialize_automaton(h) == serialize_automaton(g)
