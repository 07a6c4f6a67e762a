"""Command-line front end.

Spec files are JSON documents::

    {
      "inputs": [0, 1], "outputs": [0, 1], "states": ["a", "b"],
      "input_distribution": {"0": 0.5, "1": 0.5},
      "transitions": [{"from": "a", "x": 0, "y": 1, "p": 1.0, "to": "b"}, ...],
      "default_output_entropy": 1.0,          # optional, log2 |Y| otherwise
      "encoding": {"gram": [[1, 0.5], ...]}   # optional, rows in state order
    }

``builtin:NAME`` loads one of the bundled specs (``alice_bob``, ``memoryless``).
Data goes to stdout or ``--out``; diagnostics go to stderr; the exit status is
0 on success and 1 on any error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .case_studies import ResetClockParams, brownian_sweep, clock_sweep
from .errors import AgentThermoError
from .quantum_encoding import distinguishability, interrogation_values, systematic_encoding
from .thermo import ThermoReport, advantage_predicate, analyze
from .transducer import InputModel, Transducer, minimize, simulate, validate

SIG_DIGITS = 12
BROWNIAN_HEADER = ["N", "H_classical_bits", "H_quantum_bits", "gap_kTln2"]
CLOCK_HEADER = ["dt", "L", "classical_dissipation_per_time", "quantum_dissipation_per_time"]
SIMULATION_HEADER = ["t", "x", "y", "state"]


class SpecError(AgentThermoError, ValueError):
    """A spec document is malformed; the message names the line or field."""


@dataclass
class ProcessSpec:
    machine: Transducer
    inputs: InputModel
    gram: np.ndarray | None
    source: str


def _num(x: float) -> float:
    return float(f"{float(x):.{SIG_DIGITS}g}") + 0.0  # + 0.0 folds -0.0 into 0.0


def _clean(obj):
    """Round every float to 12 significant digits, recursively."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, complex):
        return {"re": _num(obj.real), "im": _num(obj.imag)}
    return obj


def _read_spec_text(path: str) -> tuple[str, str]:
    if path.startswith("builtin:"):
        name = path.split(":", 1)[1]
        res = resources.files("agent_thermo").joinpath("specs", f"{name}.spec")
        if not res.is_file():
            raise SpecError(f"no bundled spec named {name!r}")
        return res.read_text(encoding="utf-8"), path
    return Path(path).read_text(encoding="utf-8"), path


def _field(doc: dict, key: str, kind, where: str = ""):
    if key not in doc:
        raise SpecError(f"{where}missing field {key!r}")
    value = doc[key]
    if not isinstance(value, kind):
        raise SpecError(f"{where}field {key!r} must be a {getattr(kind, '__name__', kind)}")
    return value


def parse_spec_text(text: str, source: str = "<spec>") -> ProcessSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise SpecError(f"{source}: top level must be an object")
    where = f"{source}: "
    inputs = _field(doc, "inputs", list, where)
    outputs = _field(doc, "outputs", list, where)
    states = _field(doc, "states", list, where)
    for name, labels in (("inputs", inputs), ("outputs", outputs), ("states", states)):
        if not labels:
            raise SpecError(f"{where}field {name!r} is empty")
        if len({str(s) for s in labels}) != len(labels):
            raise SpecError(f"{where}field {name!r} has repeated labels")
    lookup = {
        "x": {str(s): s for s in inputs},
        "y": {str(s): s for s in outputs},
        "from": {str(s): s for s in states},
        "to": {str(s): s for s in states},
    }
    transitions = []
    for i, tr in enumerate(_field(doc, "transitions", list, where)):
        loc = f"{where}transitions[{i}]: "
        if not isinstance(tr, dict):
            raise SpecError(f"{loc}must be an object")
        row = {}
        for key in ("from", "x", "y", "to"):
            if key not in tr:
                raise SpecError(f"{loc}missing field {key!r}")
            if str(tr[key]) not in lookup[key]:
                raise SpecError(f"{loc}field {key!r} = {tr[key]!r} is not a declared label")
            row[key] = lookup[key][str(tr[key])]
        p = tr.get("p")
        if isinstance(p, bool) or not isinstance(p, (int, float)) or not math.isfinite(p):
            raise SpecError(f"{loc}field 'p' must be a finite number")
        transitions.append((row["from"], row["x"], row["y"], float(p), row["to"]))
    machine = Transducer.from_transitions(inputs, outputs, states, transitions)
    report = validate(machine)
    if not report.ok:
        raise SpecError(f"{where}invalid machine\n{report}")

    dist_doc = _field(doc, "input_distribution", dict, where)
    unknown = set(dist_doc) - set(lookup["x"])
    if unknown:
        raise SpecError(f"{where}input_distribution names undeclared inputs {sorted(unknown)}")
    dist = [float(dist_doc.get(str(s), 0.0)) for s in inputs]
    h_dflt = doc.get("default_output_entropy")
    try:
        im = InputModel.for_machine(machine, dist, h_dflt)
    except AgentThermoError as exc:
        raise SpecError(f"{where}input_distribution: {exc}") from None

    gram = None
    if "encoding" in doc:
        enc = _field(doc, "encoding", dict, where)
        rows = _field(enc, "gram", list, f"{where}encoding: ")
        try:
            gram = np.array(rows, dtype=float)
        except (TypeError, ValueError):
            raise SpecError(f"{where}encoding.gram must be a numeric table") from None
        if gram.shape != (len(states), len(states)):
            raise SpecError(f"{where}encoding.gram has shape {gram.shape}, expected {(len(states),) * 2}")
    return ProcessSpec(machine, im, gram, source)


def parse_spec(path: str) -> ProcessSpec:
    text, source = _read_spec_text(path)
    return parse_spec_text(text, source)


def spec_document(t: Transducer, im: InputModel, gram=None) -> dict:
    doc = {
        "inputs": list(t.inputs),
        "outputs": list(t.outputs),
        "states": list(t.states),
        "input_distribution": {str(s): float(q) for s, q in zip(t.inputs, im.distribution)},
        "default_output_entropy": im.default_output_entropy,
        "transitions": [{"from": j, "x": x, "y": y, "p": p, "to": k} for j, x, y, p, k in t.transitions()],
    }
    if gram is not None:
        doc["encoding"] = {"gram": np.asarray(gram).tolist()}
    return _clean(doc)


def report_document(spec: ProcessSpec, report: ThermoReport) -> dict:
    doc = {
        "tool": {"name": "agent-thermo", "version": __version__},
        "input": {
            "source": spec.source,
            "inputs": list(spec.machine.inputs),
            "outputs": list(spec.machine.outputs),
            "states": list(spec.machine.states),
            "input_distribution": spec.inputs.distribution.tolist(),
            "default_output_entropy": spec.inputs.default_output_entropy,
            "stride": report.stride,
            "kT": report.kT_scale,
        },
        "units": "kT ln 2 per step",
        "classical_information": report.classical_information,
        "classical_rate": report.classical_rate,
        "quantum_rate": report.quantum_rate,
        "gap": report.gap,
        "online_cost": report.online_cost,
        "landauer_floor": report.landauer_floor,
        "conditional_output_entropy": report.conditional_output_entropy,
        "primary_encoding": report.primary_encoding,
        "encodings": {name: asdict(e) for name, e in report.encodings.items()},
        "wasteful_pairs": [list(p) for p in report.wasteful_pairs],
        "advantage_predicted": report.advantage_predicted,
        "witness": report.witness,
        "systematic_advantage": report.systematic_advantage,
    }
    if report.kT_scale is not None:
        doc["joules_per_step"] = report.scaled()
    return _clean(doc)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.{SIG_DIGITS}g}" if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def cmd_analyze(args) -> int:
    spec = parse_spec(args.spec)
    report = analyze(spec.machine, spec.inputs, args.stride, gram=spec.gram, kT=args.kT, budget=args.budget)
    doc = report_document(spec, report)
    if args.format == "text":
        lines = [f"{k}: {v}" for k, v in doc.items() if not isinstance(v, dict)]
        for name, e in doc["encodings"].items():
            lines += [f"encoding[{name}].{k}: {v}" for k, v in e.items()]
        _emit("\n".join(lines) + "\n", args.out)
    else:
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return 0


def cmd_sweep(args) -> int:
    if args.system == "brownian":
        if args.sigma is None or not args.n:
            raise SpecError("brownian sweep needs --sigma and --n")
        rows = [(r.N, r.H_classical, r.H_quantum, r.gap) for r in brownian_sweep(args.sigma, args.n)]
        text = _csv_text(BROWNIAN_HEADER, rows)
    else:
        if args.n:
            raise SpecError("--n applies to the brownian sweep only")
        base = ResetClockParams(args.p, args.gamma0, args.gamma1, args.gammax, args.dt[0], args.tau, args.truncation)
        rows = [(r.dt, r.L, r.classical_dissipation_per_time, r.quantum_dissipation_per_time)
                for r in clock_sweep(base, args.dt)]
        text = _csv_text(CLOCK_HEADER, rows)
    _emit(text, args.out)
    return 0


def cmd_detect(args) -> int:
    spec = parse_spec(args.spec)
    m, _ = minimize(spec.machine)
    d = distinguishability(m)
    pairs = [(i, j) for i in range(m.n_states) for j in range(i + 1, m.n_states) if not d[i, j]]
    lines = [f"causal states: {m.n_states}"]
    if not pairs:
        lines.append("wasteful pairs: none")
    else:
        gram = systematic_encoding(m).gram
        overlap = interrogation_values(m, args.depth, args.budget)
        lines.append(f"wasteful pairs: {len(pairs)}")
        for i, j in pairs:
            lines.append(f"  {m.states[i]} {m.states[j]}  gram={_num(np.real(gram[i, j]))}"
                         f"  overlap(depth {args.depth})={_num(overlap[i, j])}")
    pred = advantage_predicate(m, spec.inputs, args.stride, args.budget)
    lines.append(f"advantage predicted at stride {args.stride}: {'yes' if pred.predicted else 'no'}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_simulate(args) -> int:
    spec = parse_spec(args.spec)
    t = spec.machine
    traj = simulate(t, spec.inputs, args.steps, args.seed)
    rows = ((k, t.inputs[x], t.outputs[y], t.states[s])
            for k, (x, y, s) in enumerate(zip(traj.inputs, traj.outputs, traj.states)))
    _emit(_csv_text(SIMULATION_HEADER, rows), args.out)
    return 0


def cmd_minimize(args) -> int:
    spec = parse_spec(args.spec)
    m, block = minimize(spec.machine)
    gram = None
    if spec.gram is not None:
        reps = [int(np.flatnonzero(block == b)[0]) for b in range(m.n_states)]
        gram = spec.gram[np.ix_(reps, reps)]
    _emit(json.dumps(spec_document(m, spec.inputs, gram), indent=2) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="agent-thermo", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, spec=True):
        if spec:
            p.add_argument("spec", help="spec file path or builtin:NAME")
        p.add_argument("--out", help="write to this file instead of stdout")
        p.add_argument("--budget", type=int, help="enumeration budget (default 1e7 or AGENT_THERMO_BUDGET)")

    p = sub.add_parser("analyze", help="work-cost report")
    common(p)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--kT", type=float, help="thermal energy in joules; adds a joules_per_step block")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="case-study scaling table as CSV")
    p.add_argument("system", choices=("brownian", "clock"))
    common(p, spec=False)
    p.add_argument("--n", type=int, nargs="+", help="ring sizes")
    p.add_argument("--sigma", type=float)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--gamma0", type=float, default=1.0)
    p.add_argument("--gamma1", type=float, default=10.0)
    p.add_argument("--gammax", type=float, default=0.1)
    p.add_argument("--dt", type=float, nargs="+", default=[0.1, 0.05, 0.025, 0.0125, 0.00625])
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--truncation", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("detect", help="list causally wasteful pairs")
    common(p)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--depth", type=int, default=6)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("simulate", help="sample a trajectory as CSV")
    common(p)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("minimize", help="write the minimized spec")
    common(p)
    p.set_defaults(func=cmd_minimize)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (AgentThermoError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
