"""Compare the wasteful-pair predicate with the systematic gap on random machines.

Each mismatch is classified by why the systematic overlap of its wasteful
pairs vanishes: "limit" when interrogation separates the pair only as the
depth grows without bound, "product" when the per-input overlaps stay
positive but the product over inputs is zero.
"""

import argparse
import collections

import numpy as np

from agent_thermo.corpus import random_minimal_machine
from agent_thermo.quantum_encoding import (
    ZERO_OVERLAP,
    interrogation_values,
    solve_overlaps,
    systematic_encoding,
    wasteful_pairs,
)
from agent_thermo.thermo import GAP_TOL, advantage_gap, advantage_predicate
from agent_thermo.transducer import block_law


def classify(t):
    of = solve_overlaps(t)
    deep = interrogation_values(t, 400)
    kinds = set()
    for i, j in wasteful_pairs(t):
        if abs(of.gram[i, j]) >= ZERO_OVERLAP:
            kinds.add("positive")
        elif deep[i, j] < 1e-6:
            kinds.add("limit")
        else:
            kinds.add("product")
    return "+".join(sorted(kinds)) or "none"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--machines", type=int, default=300)
    ap.add_argument("--seed", type=int, default=20240611)
    ap.add_argument("--max-states", type=int, default=4)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    counts = collections.Counter()
    kinds = collections.Counter()
    for k in range(args.machines):
        t, im = random_minimal_machine(rng, args.max_states, dyadic=bool(k % 2))
        enc = systematic_encoding(t)
        for L in (1, 2):
            bl = block_law(t, im, L)
            gap = advantage_gap(bl, enc).value
            for relation in ("certainty", "systematic"):
                pred = advantage_predicate(t, im, L, bl=bl, relation=relation).predicted
                if pred != (gap > GAP_TOL):
                    counts[relation] += 1
                    if relation == "certainty":
                        kinds[classify(t)] += 1
    total = 2 * args.machines
    for relation in ("certainty", "systematic"):
        print(f"{relation}: {counts[relation]}/{total} mismatches")
    for kind, n in sorted(kinds.items()):
        print(f"  wasteful overlaps {kind}: {n}")


if __name__ == "__main__":
    main()
