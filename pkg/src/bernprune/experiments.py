"""Guide-network experiments shared by the scripts and the acceptance tests."""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field

from .guide import (GuideModel, GuideSample, TrainConfig, accuracy_of, generate_dataset, samples_to_arrays,
                    tie_aware_accuracy, train)


@dataclass
class FeatureStudy:
    """Held-out accuracy per feature basis, identical training otherwise."""

    accuracy: dict[str, float]
    train_accuracy: dict[str, float]
    label_counts: dict[int, int]
    models: dict[str, GuideModel] = field(default_factory=dict, repr=False)
    seconds: float = 0.0


@dataclass
class GuideDatasets:
    train: list[GuideSample]
    test: list[GuideSample]


def make_datasets(n_train: int = 10_000, n_test: int = 2_000, train_seed: int = 11,
                  test_seed: int = 12) -> GuideDatasets:
    return GuideDatasets(generate_dataset(n_train, seed=train_seed), generate_dataset(n_test, seed=test_seed))


def feature_study(data: GuideDatasets, bases=("bernstein", "power"), cfg: TrainConfig | None = None) -> FeatureStudy:
    cfg = cfg or TrainConfig()
    t0 = time.perf_counter()
    acc, tr_acc, models = {}, {}, {}
    _, y = samples_to_arrays(data.train)
    _, yt = samples_to_arrays(data.test)
    for basis in bases:
        x = samples_to_arrays(data.train, basis)[0]
        xt = samples_to_arrays(data.test, basis)[0]
        m = train(x, y, cfg)
        models[basis] = m
        acc[basis] = accuracy_of(m, xt, yt)
        tr_acc[basis] = m.train_accuracy
    return FeatureStudy(acc, tr_acc, dict(sorted(Counter(y.tolist()).items())), models,
                        time.perf_counter() - t0)


# benchmark analogues for the generalization check
GENERALIZATION_SETS = {
    "wide-quadratic": dict(template="quadratic", domain=(-4.0, 4.0)),
    "quartic": dict(template="quartic", domain=(-2.0, 2.0)),
}


@dataclass
class GeneralizationResult:
    name: str
    accuracy: float
    tie_aware: float
    label_counts: dict[int, int]
    seconds: float


def generalization(model: GuideModel, count: int = 500, seed: int = 21, sets=None) -> list[GeneralizationResult]:
    out = []
    for name, kw in (sets or GENERALIZATION_SETS).items():
        t0 = time.perf_counter()
        samples = generate_dataset(count, seed=seed, **kw)
        x, y = samples_to_arrays(samples)
        out.append(GeneralizationResult(name, accuracy_of(model, x, y), tie_aware_accuracy(model, samples),
                                        dict(sorted(Counter(y.tolist()).items())), time.perf_counter() - t0))
    return out
