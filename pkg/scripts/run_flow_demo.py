#!/usr/bin/env python3
"""Heat-flow energy demo: trace a problem file over time and print the limit.

Examples
--------
    python3 scripts/run_flow_demo.py problems/holder_boxes.json
    python3 scripts/run_flow_demo.py problems/lifted_section_triple.json --tmax 100
"""

import argparse

from blflow import monotonicity_scan
from blflow.cli import _bellman_of, _certificate_of
from blflow.heatflow import DEFAULT_TIMES
from blflow.io import parse_problem


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("file", help="problem JSON with profiles")
    parser.add_argument("--tmax", type=float, default=None)
    parser.add_argument("--quad-tol", type=float, default=1e-8)
    args = parser.parse_args()

    with open(args.file, encoding="utf-8") as fh:
        problem = parse_problem(fh.read())
    B = _bellman_of(problem)
    cert, _ = _certificate_of(problem)

    times = [t for t in DEFAULT_TIMES
             if args.tmax is None or t <= args.tmax]
    if args.tmax is not None and args.tmax not in times:
        times.append(args.tmax)

    trace, verdict = monotonicity_scan(problem.system, cert, B,
                                       problem.profiles, times=times,
                                       quad_tol=args.quad_tol)
    print(f"{'t':>12}  {'energy':>20}  {'halfwidth':>10}  levels")
    for t, v, L, lev in zip(trace.times, trace.values,
                            trace.halfwidths, trace.levels):
        print(f"{t:12.4g}  {v:20.15f}  {L:10.3f}  {int(lev)}")
    print(f"monotone: {verdict.monotone} ({verdict.label}); "
          f"limit {verdict.limit_value:.15f}; final gap {verdict.final_gap:.3e}")


if __name__ == "__main__":
    main()
