"""Action-scoring network: a small ReLU MLP with softmax output, trained with Adam.

Also generates labelled training data by running abstraction refinement on
random polynomials and recording which action removes the most ambiguous
volume from each visited region.
"""

from __future__ import annotations

import csv
import itertools
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .abstraction import Action, apply_action, quadratic_bounds
from .bernstein import EnclosureFeatures, SignClass, classify_bounds, features
from .poly import Box, Polynomial

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
LAYER_DIMS = (4, 40, 40, 40, 3)
N_ACTIONS = 3


class ModelFormatError(ValueError):
    pass


@dataclass
class GuideModel:
    layer_dims: tuple[int, ...]
    weights: list[np.ndarray]  # each (fan_in, fan_out)
    biases: list[np.ndarray]
    mu: np.ndarray
    sigma: np.ndarray
    train_accuracy: float | None = None
    val_accuracy: float | None = None

    def __post_init__(self):
        self.layer_dims = tuple(int(d) for d in self.layer_dims)
        if len(self.weights) != len(self.layer_dims) - 1 or len(self.biases) != len(self.weights):
            raise ModelFormatError("layer count does not match layer_dims")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (self.layer_dims[i], self.layer_dims[i + 1]) or b.shape != (self.layer_dims[i + 1],):
                raise ModelFormatError(f"layer {i} has inconsistent shape")
        if self.mu.shape != (self.layer_dims[0],) or self.sigma.shape != (self.layer_dims[0],):
            raise ModelFormatError("normalizer has wrong shape")
        if not np.all(self.sigma > 0):
            raise ModelFormatError("sigma components must be positive")

    @classmethod
    def zeros(cls, layer_dims: Sequence[int] = LAYER_DIMS) -> "GuideModel":
        dims = tuple(layer_dims)
        return cls(
            dims,
            [np.zeros((a, b)) for a, b in zip(dims[:-1], dims[1:])],
            [np.zeros(b) for b in dims[1:]],
            np.zeros(dims[0]),
            np.ones(dims[0]),
        )

    def predict_proba(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        h = (x - self.mu) / self.sigma
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.maximum(h @ w + b, 0.0)
        return softmax(h @ self.weights[-1] + self.biases[-1])


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def forward(model: GuideModel, f) -> np.ndarray:
    """Action probabilities for one feature tuple (no dropout)."""
    x = f.as_array() if isinstance(f, EnclosureFeatures) else np.asarray(f, dtype=float)
    return model.predict_proba(x[None, :])[0]


def best_action(model: GuideModel, f) -> Action:
    return Action(int(np.argmax(forward(model, f))))


# -- persistence ------------------------------------------------------------

def model_to_dict(model: GuideModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "layer_dims": list(model.layer_dims),
        "weights": [w.tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
        "mu": model.mu.tolist(),
        "sigma": model.sigma.tolist(),
        "train_accuracy": model.train_accuracy,
        "val_accuracy": model.val_accuracy,
    }


def model_from_dict(d: dict) -> GuideModel:
    if d.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format_version {d.get('format_version')!r}")
    try:
        return GuideModel(
            tuple(d["layer_dims"]),
            [np.array(w, dtype=float) for w in d["weights"]],
            [np.array(b, dtype=float) for b in d["biases"]],
            np.array(d["mu"], dtype=float),
            np.array(d["sigma"], dtype=float),
            d.get("train_accuracy"),
            d.get("val_accuracy"),
        )
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"malformed model file: {exc}") from exc


def save_model(model: GuideModel, path) -> None:
    # json floats use repr, which round-trips float64 exactly
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1) + "\n", encoding="utf-8")


def load_model(path) -> GuideModel:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not JSON: {exc}") from exc
    return model_from_dict(d)


# -- training ---------------------------------------------------------------

@dataclass
class TrainConfig:
    epochs: int = 100
    batch_size: int = 64
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    dropout_p: float = 0.5
    dropout_layers: tuple[int, ...] = (0, 1)  # hidden layers 1 and 2
    seed: int = 0
    layer_dims: tuple[int, ...] = LAYER_DIMS


def init_params(layer_dims: Sequence[int], rng: np.random.Generator):
    weights, biases = [], []
    for a, b in zip(layer_dims[:-1], layer_dims[1:]):
        weights.append(rng.normal(0.0, np.sqrt(2.0 / a), size=(a, b)))
        biases.append(np.zeros(b))
    return weights, biases


def loss_and_grads(weights, biases, x: np.ndarray, y: np.ndarray, masks=None):
    """Mean softmax cross-entropy and its gradients.

    ``y`` holds integer class labels.  ``masks`` maps a hidden-layer index to
    an inverted-dropout mask applied after that layer's ReLU.
    """
    masks = masks or {}
    acts = [x]
    pre = []
    h = x
    for i, (w, b) in enumerate(zip(weights, biases)):
        z = h @ w + b
        pre.append(z)
        if i < len(weights) - 1:
            h = np.maximum(z, 0.0)
            if i in masks:
                h = h * masks[i]
            acts.append(h)
    probs = softmax(pre[-1])
    n = len(x)
    loss = -np.mean(np.log(probs[np.arange(n), y] + 1e-300))
    delta = probs
    delta[np.arange(n), y] -= 1.0
    delta /= n
    gw = [None] * len(weights)
    gb = [None] * len(weights)
    for i in range(len(weights) - 1, -1, -1):
        gw[i] = acts[i].T @ delta
        gb[i] = delta.sum(axis=0)
        if i > 0:
            delta = delta @ weights[i].T
            if (i - 1) in masks:
                delta = delta * masks[i - 1]
            delta = delta * (pre[i - 1] > 0)
    return loss, gw, gb


def fit_normalizer(x: np.ndarray):
    mu = x.mean(axis=0)
    sigma = x.std(axis=0)
    degenerate = ~(sigma > 0)
    if degenerate.any():
        log.warning("constant feature columns %s: sigma replaced by 1", np.flatnonzero(degenerate).tolist())
        sigma = np.where(degenerate, 1.0, sigma)
    return mu, sigma


def accuracy_of(model: GuideModel, x: np.ndarray, y: np.ndarray) -> float:
    if len(x) == 0:
        return float("nan")
    return float(np.mean(np.argmax(model.predict_proba(x), axis=1) == y))


def train(x: np.ndarray, y: np.ndarray, cfg: TrainConfig | None = None,
          x_val: np.ndarray | None = None, y_val: np.ndarray | None = None,
          on_epoch: Callable[[int, float], None] | None = None) -> GuideModel:
    """Minibatch Adam on softmax cross-entropy with inverted dropout."""
    cfg = cfg or TrainConfig()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    if len(x) < cfg.batch_size:
        raise ValueError("fewer samples than one batch")
    dims = (x.shape[1], *cfg.layer_dims[1:])
    rng = np.random.default_rng(cfg.seed)
    mu, sigma = fit_normalizer(x)
    xn = (x - mu) / sigma
    weights, biases = init_params(dims, rng)
    params = weights + biases
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    step = 0
    keep = 1.0 - cfg.dropout_p
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(xn))
        total = 0.0
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            xb, yb = xn[idx], y[idx]
            masks = {}
            if cfg.dropout_p > 0:
                for layer in cfg.dropout_layers:
                    masks[layer] = (rng.random((len(idx), dims[layer + 1])) < keep) / keep
            loss, gw, gb = loss_and_grads(weights, biases, xb, yb, masks)
            total += loss * len(idx)
            step += 1
            for j, g in enumerate(gw + gb):
                m[j] = cfg.beta1 * m[j] + (1 - cfg.beta1) * g
                v[j] = cfg.beta2 * v[j] + (1 - cfg.beta2) * g * g
                mhat = m[j] / (1 - cfg.beta1 ** step)
                vhat = v[j] / (1 - cfg.beta2 ** step)
                params[j] -= cfg.learning_rate * mhat / (np.sqrt(vhat) + cfg.adam_eps)
        if on_epoch is not None:
            on_epoch(epoch, total / len(xn))
    k = len(weights)
    model = GuideModel(dims, params[:k], params[k:], mu, sigma)
    model.train_accuracy = accuracy_of(model, x, y)
    if x_val is not None and y_val is not None and len(x_val):
        model.val_accuracy = accuracy_of(model, np.asarray(x_val, float), np.asarray(y_val, int))
    return model


def mean_loss(model: GuideModel, x: np.ndarray, y: np.ndarray) -> float:
    p = model.predict_proba(x)
    return float(-np.mean(np.log(p[np.arange(len(y)), y] + 1e-300)))


# -- data -------------------------------------------------------------------

@dataclass
class GuideSample:
    features: np.ndarray  # 4 reduced Bernstein features
    label: int
    power: np.ndarray | None = field(default=None, repr=False)  # raw power-basis coefficients of p
    power_local: np.ndarray | None = field(default=None, repr=False)  # same, in region-local coordinates
    width: float = 1.0  # mean side length of the region
    reductions: np.ndarray | None = field(default=None, repr=False)  # volume removed by each action

    @property
    def one_hot(self) -> np.ndarray:
        out = np.zeros(N_ACTIONS)
        out[self.label] = 1.0
        return out


def _quadratic_template(rng: np.random.Generator, scale: float = 1.0) -> Polynomial:
    c = rng.uniform(-scale, scale, size=6)
    return Polynomial(2, {(2, 0): c[0], (0, 2): c[1], (1, 1): c[2], (1, 0): c[3], (0, 1): c[4], (0, 0): c[5]})


def _quartic_template(rng: np.random.Generator, scale: float = 1.0) -> Polynomial:
    c = rng.uniform(-scale, scale, size=5)
    return Polynomial(2, {(4, 0): c[0], (0, 3): c[1], (4, 3): c[2], (3, 0): c[3], (0, 0): c[4]})


TEMPLATES = {"quadratic": _quadratic_template, "quartic": _quartic_template}

def power_features(p: Polynomial, box: Box | None = None,
                   slots: Sequence[tuple[int, ...]] | None = None) -> np.ndarray:
    """Power-basis coefficients of ``p``.

    With ``box`` the polynomial is first rewritten on the unit box,
    ``t = (x - lower) / widths``, so the vector depends on the region the
    way Bernstein coefficients do.
    """
    q = p if box is None else p.affine(box.lower, box.widths)
    if slots is None:
        slots = power_slots(p.degree_vector, p.total_degree)
    return np.array([q.terms.get(tuple(k), 0.0) for k in slots])


def power_slots(degree: Sequence[int], total: int) -> list[tuple[int, ...]]:
    ranges = [range(d + 1) for d in degree]
    return [k for k in itertools.product(*ranges) if sum(k) <= total]


_TEMPLATE_SLOTS = {"quadratic": power_slots((2, 2), 2), "quartic": power_slots((4, 3), 7)}


def action_reductions(p: Polynomial, box: Box, depth: int = 4, tau: float = 1e-9) -> np.ndarray:
    """Ambiguous-volume reduction of each action on ``box``.

    Split is scored one level ahead: the best convex action on each half at
    one level less depth, so every action is judged at the same resolution.
    """
    qb = quadratic_bounds(p, box)
    red = np.zeros(N_ACTIONS)
    for a in (Action.UNDER_APPROX, Action.OVER_APPROX):
        red[a] = apply_action(p, box, a, depth, tau, bounds=qb)[1]
    halves = apply_action(p, box, Action.SPLIT)[0].ambiguous
    total = 0.0
    for half in halves:
        qh = quadratic_bounds(p, half)
        total += max(apply_action(p, half, a, depth - 1, tau, bounds=qh)[1]
                     for a in (Action.UNDER_APPROX, Action.OVER_APPROX))
    red[Action.SPLIT] = total
    return red


def label_from_reductions(red: np.ndarray) -> int:
    # np.argmax returns the first maximum, matching UnderApprox < OverApprox < Split
    return int(np.argmax(red))


def generate_dataset(count: int, seed: int = 0, template: str = "quadratic",
                     domain: tuple[float, float] = (-2.0, 2.0), coeff_scale: float = 1.0,
                     per_poly: int = 6, depth: int = 4, tau: float = 1e-9,
                     max_visits: int = 40) -> list[GuideSample]:
    """Labelled samples from abstraction refinement of random polynomials.

    Each polynomial gets its own RNG stream derived from ``seed`` and
    contributes at most ``per_poly`` ambiguous regions, visited largest first.
    Regions where no action removes any volume have no best action; they are
    split without being recorded.
    """
    if count <= 0:
        raise ValueError("count must be positive")
    make = TEMPLATES[template]
    slots = _TEMPLATE_SLOTS[template]
    samples: list[GuideSample] = []
    poly_index = 0
    while len(samples) < count:
        rng = np.random.default_rng([seed, poly_index])
        poly_index += 1
        p = make(rng, coeff_scale)
        root = Box.cube(domain[0], domain[1], 2)
        queue = list(root.orthant_pieces())
        taken = visits = 0
        while queue and taken < per_poly and visits < max_visits and len(samples) < count:
            queue.sort(key=lambda b: -b.volume())
            region = queue.pop(0)
            visits += 1
            f = features(p, region)
            if classify_bounds(f.p_min, f.p_max, tau) is not SignClass.AMBIGUOUS:
                continue
            red = action_reductions(p, region, depth, tau)
            if not red.max() > 0.0:
                queue.extend(region.bisect(region.widest_axis()))
                continue
            label = label_from_reductions(red)
            samples.append(GuideSample(f.as_array(), label, power_features(p, None, slots),
                                       power_features(p, region, slots), float(np.mean(region.widths)), red))
            taken += 1
            part, _ = apply_action(p, region, Action(label), depth, tau)
            queue.extend(part.ambiguous)
    return samples


def tie_aware_accuracy(model: GuideModel, samples: Sequence[GuideSample]) -> float:
    """Fraction of samples where the predicted action attains the maximal reduction."""
    x, _ = samples_to_arrays(samples)
    pred = np.argmax(model.predict_proba(x), axis=1)
    hits = [s.reductions[a] >= s.reductions.max() for s, a in zip(samples, pred)]
    return float(np.mean(hits))


def samples_to_arrays(samples: Sequence[GuideSample], basis: str = "bernstein"):
    """Feature matrix and labels; ``basis`` is bernstein, power or power-local."""
    attr = {"bernstein": "features", "power": "power", "power-local": "power_local"}[basis]
    x = np.array([getattr(s, attr) for s in samples], dtype=float)
    y = np.array([s.label for s in samples], dtype=int)
    return x, y


def write_dataset_csv(samples: Sequence[GuideSample], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p_min", "p_max", "grad_min", "grad_max", "label"])
        for s in samples:
            w.writerow([repr(float(v)) for v in s.features] + [s.label])


def read_dataset_csv(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:5] != ["p_min", "p_max", "grad_min", "grad_max", "label"]:
        raise ValueError(f"{path}: missing dataset header")
    body = rows[1:]
    x = np.array([[float(v) for v in r[:4]] for r in body]).reshape(-1, 4)
    y = np.array([int(r[4]) for r in body], dtype=int)
    return x, y
