"""Rebuild the guide model shipped in bernprune/data/guide/quadratic.json."""

from pathlib import Path

from bernprune.experiments import make_datasets
from bernprune.guide import TrainConfig, accuracy_of, samples_to_arrays, save_model, train

OUT = Path(__file__).resolve().parents[1] / "src" / "bernprune" / "data" / "guide" / "quadratic.json"


def main():
    data = make_datasets()
    x, y = samples_to_arrays(data.train)
    xt, yt = samples_to_arrays(data.test)
    model = train(x, y, TrainConfig(seed=0), xt, yt)
    OUT.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, OUT)
    print(f"wrote {OUT}  train {model.train_accuracy:.4f}  held-out {accuracy_of(model, xt, yt):.4f}")


if __name__ == "__main__":
    main()
