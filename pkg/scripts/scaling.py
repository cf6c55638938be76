"""Order and dimension sweeps; writes CSV and, if matplotlib is present, a plot.

Usage: python3 scripts/scaling.py [--out scaling.csv] [--plot scaling.png]
"""

import argparse
import sys

from bernprune.bench import rows_to_csv, run_suite, scaling_instances


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="-")
    ap.add_argument("--plot")
    args = ap.parse_args()
    rows = []
    for r in run_suite(scaling_instances()):
        print(f"{r['instance']:>16} {r['verdict']:>8} {r['wall_time']:8.3f}s", file=sys.stderr)
        rows.append(r)
    text = rows_to_csv(rows)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        open(args.out, "w").write(text)
    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
        for ax, prefix, label in ((axes[0], "order", "order"), (axes[1], "dim", "variables")):
            for kind in ("sat", "unsat"):
                pts = [(int(r["instance"][len(prefix):].split("_")[0]), r["wall_time"]) for r in rows
                       if r["instance"].startswith(prefix) and r["instance"].endswith("_" + kind)]
                ax.plot(*zip(*pts), marker="o", label=kind)
            ax.set_xlabel(label)
            ax.set_ylabel("seconds")
            ax.set_yscale("log")
            ax.legend()
        fig.tight_layout()
        fig.savefig(args.plot, dpi=120)


if __name__ == "__main__":
    main()
