import csv
import io
import json
import os

import numpy as np
import pytest

from agent_thermo import __version__
from agent_thermo.case_studies import alice_bob
from agent_thermo.cli import SpecError, main, parse_spec, parse_spec_text, spec_document
from agent_thermo.corpus import history_refinement
from agent_thermo.transducer import InputModel, block_law, minimize

AB = "builtin:alice_bob"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_spec(tmp_path, doc, name="m.spec"):
    path = tmp_path / name
    path.write_text(json.dumps(doc, indent=2), encoding="utf-8")
    return str(path)


def ab_document():
    t, gram = alice_bob()
    return spec_document(t, InputModel.for_machine(t), gram)


def test_builtin_spec_equals_generator():
    t, gram = alice_bob()
    spec = parse_spec(AB)
    assert spec.machine.states == t.states
    assert np.array_equal(spec.machine.probs, t.probs) and np.array_equal(spec.machine.succ, t.succ)
    assert np.allclose(spec.gram, gram, atol=1e-12)
    assert np.allclose(spec.inputs.distribution, 0.5)


def test_bad_probability_names_the_transition(tmp_path, capsys):
    doc = ab_document()
    doc["transitions"][0]["p"] = 1.2
    code, out, err = run(capsys, "analyze", write_spec(tmp_path, doc))
    assert code == 1 and out == ""
    assert "00" in err and "1.2" in err


def test_syntax_error_has_line_number():
    text = '{\n  "inputs": [0, 1],\n  "outputs": [0 1]\n}'
    with pytest.raises(SpecError, match="line 3"):
        parse_spec_text(text)


@pytest.mark.parametrize("mutate, message", [
    (lambda d: d.pop("states"), "missing field 'states'"),
    (lambda d: d["transitions"][2].update(to="zz"), r"transitions\[2\]"),
    (lambda d: d["input_distribution"].update({"7": 0.1}), "undeclared"),
    (lambda d: d["encoding"].update(gram=[[1.0]]), "shape"),
])
def test_field_errors_carry_context(mutate, message):
    doc = ab_document()
    mutate(doc)
    with pytest.raises(SpecError, match=message):
        parse_spec_text(json.dumps(doc))


def test_analyze_alice_bob(capsys):
    code, out, _ = run(capsys, "analyze", AB)
    assert code == 0
    doc = json.loads(out)
    assert doc["classical_rate"] == 2.0 and doc["online_cost"] == 1.5
    assert doc["gap"] == 1.0 and doc["advantage_predicted"] is True
    assert doc["primary_encoding"] == "user_supplied"
    assert doc["encodings"]["user_supplied"]["quantum_online_dissipation"] == 0.5
    assert doc["tool"]["version"] == __version__
    assert doc["witness"]["pair"] == ["00", "10"]


def test_missing_encoding_falls_back_to_systematic(tmp_path, capsys):
    doc = ab_document()
    del doc["encoding"]
    code, out, _ = run(capsys, "analyze", write_spec(tmp_path, doc))
    rep = json.loads(out)
    assert code == 0 and rep["primary_encoding"] == "systematic"
    assert list(rep["encodings"]) == ["systematic"] and rep["gap"] == 0.5


def test_memoryless_spec(capsys):
    code, out, _ = run(capsys, "analyze", "builtin:memoryless")
    rep = json.loads(out)
    assert code == 0 and rep["classical_rate"] == 0.0 and rep["advantage_predicted"] is False


def test_stride_beyond_budget(capsys):
    code, out, err = run(capsys, "analyze", AB, "--stride", "12")
    assert code == 1 and out == ""
    assert "budget" in err


def test_budget_env_override(capsys, monkeypatch):
    monkeypatch.setenv("AGENT_THERMO_BUDGET", "10")
    code, _, err = run(capsys, "analyze", AB, "--stride", "2")
    assert code == 1 and "budget" in err
    assert run(capsys, "analyze", AB, "--stride", "2", "--budget", "1000")[0] == 0


def test_kT_block(capsys):
    code, out, _ = run(capsys, "analyze", AB, "--kT", "4e-21")
    rep = json.loads(out)
    assert rep["input"]["kT"] == 4e-21
    assert rep["joules_per_step"]["classical_rate"] == pytest.approx(2 * 4e-21 * np.log(2), rel=1e-11)


def test_text_format(capsys):
    code, out, _ = run(capsys, "analyze", AB, "--format", "text")
    assert code == 0 and "classical_rate: 2.0" in out
    assert "encoding[user_supplied].gap: 1.0" in out


def test_report_round_trips(capsys, tmp_path):
    out_path = tmp_path / "r.json"
    assert run(capsys, "analyze", AB, "--stride", "2", "--out", str(out_path))[0] == 0
    text = out_path.read_text()
    doc = json.loads(text)
    assert json.loads(json.dumps(doc, indent=2)) == doc
    assert json.dumps(doc, indent=2) + "\n" == text
    # the same inputs give byte-identical reports
    run(capsys, "analyze", AB, "--stride", "2", "--out", str(tmp_path / "s.json"))
    assert (tmp_path / "s.json").read_text() == text


def test_clock_sweep(capsys):
    code, out, _ = run(capsys, "sweep", "clock", "--dt", "0.2", "0.1", "0.05", "0.025")
    assert code == 0 and "\r" not in out
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["dt", "L", "classical_dissipation_per_time", "quantum_dissipation_per_time"]
    assert len(rows) == 5
    c = [float(r[2]) for r in rows[1:]]
    assert all(b > a for a, b in zip(c, c[1:]))


def test_brownian_sweep(capsys):
    sizes = [str(2**k) for k in range(3, 11)]
    code, out, _ = run(capsys, "sweep", "brownian", "--sigma", "0.01", "--n", *sizes)
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["N", "H_classical_bits", "H_quantum_bits", "gap_kTln2"]
    assert [float(r[1]) for r in rows[1:]] == [float(k) for k in range(3, 11)]


def test_sweep_flag_errors(capsys):
    assert run(capsys, "sweep", "brownian", "--n", "8")[0] == 1
    assert run(capsys, "sweep", "clock", "--n", "8")[0] == 1
    assert run(capsys, "sweep", "clock", "--dt", "0.3")[0] == 1


def test_unwritable_out(capsys, tmp_path):
    target = tmp_path / "ro"
    target.mkdir()
    os.chmod(target, 0o500)
    try:
        path = target / "x.csv"
        code, _, err = run(capsys, "sweep", "clock", "--dt", "0.1", "--out", str(path))
        if os.access(target, os.W_OK):  # running as root ignores the mode bits
            path = target
            code, _, err = run(capsys, "sweep", "clock", "--dt", "0.1", "--out", str(path))
        assert code == 1 and err.startswith("error:")
    finally:
        os.chmod(target, 0o700)


def test_detect_alice_bob(capsys):
    code, out, _ = run(capsys, "detect", AB)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "causal states: 4"
    assert lines[1] == "wasteful pairs: 4"
    for line in lines[2:6]:
        assert "gram=0.5" in line and "overlap(depth 6)=0.707106781187" in line
    assert lines[-1] == "advantage predicted at stride 1: yes"


def test_detect_none(tmp_path, capsys):
    code, out, _ = run(capsys, "detect", "builtin:memoryless")
    assert code == 0 and "wasteful pairs: none" in out
    # a answers 0, b answers 1, and the input picks the next state
    tr = [{"from": s, "x": x, "y": y, "p": 1.0, "to": "ab"[x]} for s, y in (("a", 0), ("b", 1)) for x in (0, 1)]
    doc = {"inputs": [0, 1], "outputs": [0, 1], "states": ["a", "b"], "input_distribution": {"0": 0.5, "1": 0.5},
           "transitions": tr}
    code, out, _ = run(capsys, "detect", write_spec(tmp_path, doc))
    assert "causal states: 2" in out and "wasteful pairs: none" in out


def test_simulate(capsys):
    code, a, _ = run(capsys, "simulate", AB, "--steps", "200", "--seed", "5")
    _, b, _ = run(capsys, "simulate", AB, "--steps", "200", "--seed", "5")
    _, c, _ = run(capsys, "simulate", AB, "--steps", "200", "--seed", "6")
    assert code == 0 and a == b and a != c
    rows = list(csv.reader(io.StringIO(a)))
    assert rows[0] == ["t", "x", "y", "state"] and len(rows) == 201
    assert run(capsys, "simulate", AB, "--steps", "0")[1] == "t,x,y,state\n"


def test_simulate_frequencies(capsys):
    _, out, _ = run(capsys, "simulate", AB, "--steps", "20000", "--seed", "1")
    rows = list(csv.reader(io.StringIO(out)))[1:]
    t, _ = alice_bob()
    bl = block_law(t, InputModel.for_machine(t), 1)
    counts = {}
    for r in rows:
        counts[(int(r[1]), int(r[2]))] = counts.get((int(r[1]), int(r[2])), 0) + 1
    for k, p in enumerate(bl.word_probs):
        (pair,) = bl.decode(t, k)
        assert counts[tuple(pair)] / len(rows) == pytest.approx(p, abs=0.02)


def test_minimize_round_trip(tmp_path, capsys):
    t, gram = alice_bob()
    r = history_refinement(t, 1)
    _, block = minimize(r)
    doc = spec_document(r, InputModel.for_machine(r), gram[np.ix_(block, block)])
    code, out, _ = run(capsys, "minimize", write_spec(tmp_path, doc))
    assert code == 0
    spec = parse_spec_text(out)
    assert spec.machine.n_states == 4
    assert np.allclose(np.sort(np.abs(spec.gram).ravel()), np.sort(np.abs(gram).ravel()), atol=1e-12)
    again = run(capsys, "minimize", write_spec(tmp_path, json.loads(out), "n.spec"))[1]
    assert again == out


def test_missing_file(capsys, tmp_path):
    code, out, err = run(capsys, "analyze", str(tmp_path / "nope.spec"))
    assert code == 1 and out == "" and "nope.spec" in err
    assert run(capsys, "analyze", "builtin:nothing")[0] == 1
