"""Dissipation per unit time of the reset clock as the step shrinks."""

import argparse
import math

import numpy as np

from agent_thermo.case_studies import ResetClockParams, clock_block_information, clock_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, default=0.5)
    ap.add_argument("--gamma0", type=float, default=1.0)
    ap.add_argument("--gamma1", type=float, default=10.0)
    ap.add_argument("--gammax", type=float, default=0.1)
    ap.add_argument("--tau", type=float, default=1.0)
    ap.add_argument("--dt", type=float, nargs="+", default=[0.1, 0.05, 0.025, 0.0125, 0.00625])
    args = ap.parse_args()
    base = ResetClockParams(args.p, args.gamma0, args.gamma1, args.gammax, args.dt[0], args.tau)
    rows = clock_sweep(base, args.dt)
    factor = 1 - math.exp(-(args.gamma0 + args.gammax) * args.tau)
    print("dt,L,classical_per_time,quantum_per_time,lower_bound_per_time")
    for r in rows:
        info = clock_block_information(ResetClockParams(args.p, args.gamma0, args.gamma1, args.gammax, r.dt, args.tau))
        print(f"{r.dt},{r.L},{r.classical_dissipation_per_time:.6f},{r.quantum_dissipation_per_time:.6f},"
              f"{factor * info.H_classical / args.tau:.6f}")
    x = np.log2(1 / np.array([r.dt for r in rows]))
    y = np.array([r.classical_dissipation_per_time for r in rows])
    if len(rows) > 1:
        slope = np.polyfit(x, y, 1)[0]
        print(f"# classical slope vs log2(1/dt) {slope:.4f}, asymptote {factor / args.tau:.4f}")


if __name__ == "__main__":
    main()
