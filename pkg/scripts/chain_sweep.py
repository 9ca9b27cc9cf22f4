"""Chain-class counts of a zoo map across resolutions and epsilons."""

import argparse
import time

from cocycle_forge.chain import build_chain_graph, class_count_across_epsilon
from cocycle_forge.maps import ZOO, zoo_map


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--map", default="north_south", choices=sorted(ZOO))
    ap.add_argument("--res", default="16,64,256,1024")
    ap.add_argument("--eps", default="0.5,0.1,0.02,0.005")
    args = ap.parse_args()
    fmap = zoo_map(args.map)
    eps = [float(e) for e in args.eps.split(",")]
    for res in (int(r) for r in args.res.split(",")):
        start = time.perf_counter()
        sweep = class_count_across_epsilon(fmap, res, eps)
        elapsed = time.perf_counter() - start
        print(f"res {res:>5}: counts {list(sweep.counts)} refinement {'ok' if sweep.refines else 'broken'} "
              f"({elapsed:.2f}s)")
    g = build_chain_graph(fmap, int(args.res.split(",")[-1]), eps[-1])
    for k, cls in enumerate(g.classes):
        lo, hi = g.grid.centers[cls[0]], g.grid.centers[cls[-1]]
        print(f"class {k}: {len(cls)} boxes, centers {lo.round(4).tolist()} .. {hi.round(4).tolist()}")


if __name__ == "__main__":
    main()
