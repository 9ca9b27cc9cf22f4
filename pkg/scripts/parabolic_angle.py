"""Angle between normalized parabolic iterates and the invariant line, against |lambda|/s."""

import argparse

import numpy as np

from cocycle_forge.strong_connection import CenterStableModel, normalized_iteration_limit, steps_to_angle


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam", type=float, default=0.5)
    ap.add_argument("--threshold", type=float, default=1e-6)
    args = ap.parse_args()
    m = CenterStableModel(np.array([[args.lam, 1.0], [0.0, args.lam]]), np.array([0.0, 1.0]))
    print(f"{'steps':>8} {'angle':>12} {'angle*s/|lam|':>14}")
    for s in np.unique(np.geomspace(10, 1e5, 9).round().astype(int)):
        a = normalized_iteration_limit(m, int(s)).angle
        print(f"{s:>8d} {a:>12.4e} {a * s / abs(args.lam):>14.6f}")
    print(f"steps to reach angle < {args.threshold:g}: {steps_to_angle(m, args.threshold)}")


if __name__ == "__main__":
    main()
