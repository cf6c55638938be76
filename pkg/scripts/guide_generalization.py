"""Accuracy of a guide trained on [-2,2]^2 quadratics on a wider domain and on quartics.

Usage: python3 scripts/guide_generalization.py [--model path.json]
Without --model a fresh model is trained on the default dataset.
"""

import argparse

from bernprune.experiments import generalization, make_datasets
from bernprune.guide import TrainConfig, load_model, samples_to_arrays, train


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--model")
    ap.add_argument("--count", type=int, default=500)
    args = ap.parse_args()
    if args.model:
        model = load_model(args.model)
    else:
        data = make_datasets(n_test=1)
        model = train(*samples_to_arrays(data.train), TrainConfig())
    print("set,accuracy,tie_aware_accuracy,labels,seconds")
    for r in generalization(model, args.count):
        labels = "/".join(f"{k}:{v}" for k, v in r.label_counts.items())
        print(f"{r.name},{r.accuracy:.4f},{r.tie_aware:.4f},{labels},{r.seconds:.1f}")


if __name__ == "__main__":
    main()
