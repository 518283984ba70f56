#!/usr/bin/env python3
"""Run one reconstruction experiment and print a digest of the artifacts.

Thin convenience wrapper around the ``graphlap`` command line: forwards the
flags, then summarizes report.csv and the trace tail so a single run can be
eyeballed without opening the output files.

    python3 scripts/run_experiment.py --problem ct --size 64 --delta-rel 0.05
    python3 scripts/run_experiment.py --problem deblur --size 128 --psi tikhonov
"""

import argparse
import sys
from pathlib import Path

from graphlap import cli


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0],
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out", default="out/experiment", help="output directory")
    parser.add_argument("--tail", type=int, default=5, help="trace rows to print (default 5)")
    args, passthrough = parser.parse_known_args()

    rc = cli.main([*passthrough, "--out", args.out])
    if rc != 0:
        return rc

    out = Path(args.out)
    report = (out / "report.csv").read_text().splitlines()
    header, row = report[0].split(","), report[-1].split(",")
    print("\nsummary")
    for key, value in zip(header, row):
        print(f"  {key:>14} = {value}")

    trace = (out / "trace.csv").read_text().splitlines()
    print(f"\ntrace tail ({min(args.tail, len(trace) - 1)} of {len(trace) - 1} rows)")
    print("  " + trace[0])
    for line in trace[-args.tail:]:
        print("  " + line)
    print(f"\nartifacts in {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
