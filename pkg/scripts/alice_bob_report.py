"""Print the full work-cost report for the question-answer agent."""

import argparse
import json

from agent_thermo.case_studies import alice_bob
from agent_thermo.cli import ProcessSpec, report_document
from agent_thermo.thermo import analyze
from agent_thermo.transducer import InputModel


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--stride", type=int, default=1)
    ap.add_argument("--kT", type=float)
    args = ap.parse_args()
    t, qubit = alice_bob()
    im = InputModel.for_machine(t)
    rep = analyze(t, im, args.stride, gram=qubit, kT=args.kT)
    print(json.dumps(report_document(ProcessSpec(t, im, qubit, "alice_bob()"), rep), indent=2))


if __name__ == "__main__":
    main()
