"""Run every shipped reachability model and check sampled trajectories stay inside.

Usage: python3 scripts/reach_check.py [--samples 1000] [--csv-dir out/]
"""

import argparse
from importlib import resources
from pathlib import Path

import numpy as np

from bernprune.reach import parse_model_text, reach_csv, run_model, simulate


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--csv-dir")
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    models = resources.files("bernprune").joinpath("data", "models")
    for entry in sorted(models.iterdir(), key=lambda e: e.name):
        if not entry.name.endswith(".model"):
            continue
        model = parse_model_text(entry.read_text(encoding="utf-8"), entry.name[:-6])
        qs, reports = run_model(model)
        x0 = rng.uniform(model.init.lo, model.init.hi, size=(args.samples, model.init.n))
        traj = simulate(model.f, x0, len(qs) - 1)
        outside = sum(int((~q.contains_many(traj[k])).sum()) for k, q in enumerate(qs))
        vols = [r.volume for r in reports]
        print(f"{model.name:12s} steps {len(qs) - 1:3d}  outside {outside:5d}  "
              f"volume {vols[0]:.3g} -> {vols[-1]:.3g}  bernstein faces {sum(r.bernstein_faces for r in reports)}")
        if args.csv_dir:
            Path(args.csv_dir).mkdir(parents=True, exist_ok=True)
            (Path(args.csv_dir) / f"{model.name}.csv").write_text(reach_csv(qs, reports))


if __name__ == "__main__":
    main()
