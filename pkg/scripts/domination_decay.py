"""Minimal domination strength of a two-loop cocycle as the dwell length grows."""

import argparse
import csv
import json
import sys
from pathlib import Path

from cocycle_forge import records
from cocycle_forge.domination import domination_scan
from cocycle_forge.two_loop import build_two_loop_cocycle

HERE = Path(__file__).resolve().parent


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--spec", default=str(HERE.parent / "fixtures" / "twoloop.json"))
    ap.add_argument("--n", default="2,5,10,15,20,30,40")
    ap.add_argument("--kmax", type=int, default=64)
    args = ap.parse_args()
    rec = json.loads(Path(args.spec).read_text())
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["n", "period"] + [f"k_{i}" for i in range(1, rec["dim"])])
    for n in (int(x) for x in args.n.split(",")):
        c = build_two_loop_cocycle(records.twoloop_from_record(rec, n))
        rep = domination_scan(c, args.kmax)
        out.writerow([n, c.period] + ["" if r.k is None else r.k for r in rep.indices])


if __name__ == "__main__":
    main()
