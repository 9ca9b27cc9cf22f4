"""Exponent curves along blend, realify and weaken paths for random slowly varying cocycles."""

import argparse
import csv
import sys

import numpy as np

from cocycle_forge.errors import Infeasible
from cocycle_forge.generators import slow_cocycle
from cocycle_forge.paths import blend_exponents, realify, verify_contract


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--dim", type=int, default=3)
    ap.add_argument("--period", type=int, default=24)
    ap.add_argument("--eps", type=float, default=0.5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--curves", help="write the curves of the first run to this CSV")
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    passed = infeasible = 0
    for run in range(args.runs):
        c = slow_cocycle(rng, args.dim, args.period, twist=0.1)
        j = int(rng.integers(1, args.dim))
        try:
            p = blend_exponents(c, j, args.eps)
            q = realify(c, args.eps)
        except Infeasible as exc:
            infeasible += 1
            print(f"run {run}: {exc.reason}: {exc}", file=sys.stderr)
            continue
        ok = verify_contract(p, p.contract).passed and verify_contract(q, q.contract).passed
        passed += ok
        print(f"run {run}: j={j} blend radius {p.radius:.4g}, realify radius {q.radius:.4g}, contracts {'ok' if ok else 'FAILED'}")
        if args.curves and run == 0:
            with open(args.curves, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["t"] + [f"chi_{k + 1}" for k in range(args.dim)])
                for t, row in zip(p.grid, p.exponent_curves()):
                    w.writerow([t, *row])
    print(f"{passed} of {args.runs - infeasible} feasible runs passed; {infeasible} infeasible")


if __name__ == "__main__":
    main()
