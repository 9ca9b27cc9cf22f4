"""Volume identity, conjugation and shift invariance of the spectrum on random cocycles, with timing."""

import argparse
import time

import numpy as np

from cocycle_forge.cocycle import random_cocycle
from cocycle_forge.spectrum import lyapunov_spectrum


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=1000)
    ap.add_argument("--max-dim", type=int, default=6)
    ap.add_argument("--max-period", type=int, default=64)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    errs = np.zeros((args.count, 3))
    start = time.perf_counter()
    for k in range(args.count):
        d, ell = int(rng.integers(2, args.max_dim + 1)), int(rng.integers(1, args.max_period + 1))
        c = random_cocycle(rng, d, ell)
        s = lyapunov_spectrum(c)
        # well-conditioned change of basis keeps the conjugate invertible in floating point
        q = np.linalg.qr(rng.standard_normal((d, d)))[0] @ np.diag(rng.uniform(0.5, 2.0, d))
        errs[k] = [abs(s.exponents.sum() - c.log_abs_det / ell),
                   np.abs(lyapunov_spectrum(c.conjugated(q)).exponents - s.exponents).max(),
                   np.abs(lyapunov_spectrum(c.shifted(int(rng.integers(ell)))).exponents - s.exponents).max()]
    elapsed = time.perf_counter() - start
    for name, col in zip(("volume", "conjugation", "shift"), errs.T):
        print(f"{name:>12}: max error {col.max():.3e}, median {np.median(col):.3e}")
    print(f"{args.count} cocycles (3 spectra each) in {elapsed:.2f}s")


if __name__ == "__main__":
    main()
