"""Solve the shipped PVS-style problems with both endgames where an SMT solver is available.

Usage: python3 scripts/pvs_bench.py [--smt "z3 {file}"]
"""

import argparse

from bernprune.bench import pvs_instances, run_instance
from bernprune.solver import ExternalSMT, SolverConfig


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--smt", help="external solver command for a second column")
    args = ap.parse_args()
    print("instance,expected,bernstein,seconds" + (",smt,smt_seconds" if args.smt else ""))
    for inst in pvs_instances():
        row, _ = run_instance(inst)
        line = f"{inst.name},{inst.expected},{row['verdict']},{row['wall_time']:.3f}"
        if args.smt:
            cfg = SolverConfig(epsilon=inst.problem.epsilon, endgame=ExternalSMT(args.smt))
            r2, _ = run_instance(inst, cfg)
            line += f",{r2['verdict']},{r2['wall_time']:.3f}"
        print(line)


if __name__ == "__main__":
    main()
