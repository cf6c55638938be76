"""Compare guide accuracy with reduced Bernstein features against power-basis coefficients.

Usage: python3 scripts/feature_study.py [--train 10000] [--test 2000] [--local]
"""

import argparse
import logging

from bernprune.experiments import feature_study, make_datasets
from bernprune.guide import TrainConfig


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--train", type=int, default=10_000)
    ap.add_argument("--test", type=int, default=2_000)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--local", action="store_true", help="also train on region-local power coefficients")
    args = ap.parse_args()
    logging.basicConfig(level=logging.WARNING)

    data = make_datasets(args.train, args.test)
    bases = ("bernstein", "power", "power-local") if args.local else ("bernstein", "power")
    print("basis,seed,train_accuracy,test_accuracy")
    for seed in args.seeds:
        study = feature_study(data, bases, TrainConfig(seed=seed))
        for b in bases:
            print(f"{b},{seed},{study.train_accuracy[b]:.4f},{study.accuracy[b]:.4f}")


if __name__ == "__main__":
    main()
