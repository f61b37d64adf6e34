"""Multi-class averaged perceptron and soft-max pair scoring.

Feature vectors are sparse ``{feature id: value}`` maps supplied by the
caller.  The averaged weights are the mean of the weight vector over every
training step (lazily accumulated, so only mistakes touch the sums).
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Optional, Sequence

from .algebra import DIRECTED_CAUSAL, TEMPORAL_LABELS

FeatureVector = Mapping[str, float]

TEMPORAL_LABEL_SET = tuple(r.value for r in TEMPORAL_LABELS)
CAUSAL_LABEL_SET = tuple(c.value for c in DIRECTED_CAUSAL)


@dataclass
class PerceptronModel:
    labels: tuple[str, ...]
    weights: dict[str, dict[str, float]] = field(default_factory=dict)
    epochs: int = 0
    seed: Optional[int] = None
    updates: int = 0
    epochs_run: int = 0

    def activations(self, features: FeatureVector) -> dict[str, float]:
        out = {}
        for label in self.labels:
            w = self.weights.get(label, {})
            out[label] = sum(value * w.get(f, 0.0) for f, value in features.items())
        return out

    def predict(self, features: FeatureVector) -> str:
        act = self.activations(features)
        # first maximum in label order
        return max(self.labels, key=lambda lab: act[lab])

    def to_obj(self) -> dict:
        return {
            "labels": list(self.labels),
            "epochs": self.epochs,
            "seed": self.seed,
            "updates": self.updates,
            "epochs_run": self.epochs_run,
            "weights": {lab: dict(sorted(self.weights.get(lab, {}).items())) for lab in self.labels},
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "PerceptronModel":
        labels = tuple(obj["labels"])
        weights = {lab: {f: float(w) for f, w in obj["weights"].get(lab, {}).items()} for lab in labels}
        return cls(labels, weights, int(obj.get("epochs", 0)), obj.get("seed"),
                   int(obj.get("updates", 0)), int(obj.get("epochs_run", 0)))

    def dumps(self) -> str:
        return json.dumps(self.to_obj(), sort_keys=False)


def _default_labels(gold: Iterable[str]) -> tuple[str, ...]:
    seen = set(gold)
    if seen <= set(TEMPORAL_LABEL_SET):
        return TEMPORAL_LABEL_SET
    if seen <= set(CAUSAL_LABEL_SET):
        return CAUSAL_LABEL_SET
    return tuple(sorted(seen))


def _averaged(weights, totals, c, labels):
    return {lab: {f: w - totals[lab].get(f, 0.0) / c for f, w in weights[lab].items()
                  if w - totals[lab].get(f, 0.0) / c} for lab in labels}


def train(data: Sequence[tuple[FeatureVector, str]], epochs: int, seed: int = 0,
          labels: Optional[Sequence[str]] = None) -> PerceptronModel:
    """Averaged perceptron with learning rate 1 and a seeded shuffle per epoch.

    ``epochs`` is an upper bound: training stops after a mistake-free epoch
    once the averaged weights also fit the training set, so a converged run
    is unaffected by a larger budget.
    """
    if not data:
        raise ValueError("training set is empty")
    if epochs < 1:
        raise ValueError(f"epochs must be positive, got {epochs}")
    labels = tuple(labels) if labels is not None else _default_labels(y for _, y in data)
    for k, (_, y) in enumerate(data):
        if y not in labels:
            raise ValueError(f"example {k}: label {y!r} not in label set {labels}")

    weights: dict[str, dict[str, float]] = {lab: {} for lab in labels}
    # step-weighted sums of updates; average = w - totals / c
    totals: dict[str, dict[str, float]] = {lab: {} for lab in labels}
    current = PerceptronModel(labels, weights)
    rng = random.Random(seed)
    order = list(range(len(data)))
    c, updates, run = 1, 0, 0

    for run in range(1, epochs + 1):
        rng.shuffle(order)
        mistakes = 0
        for k in order:
            feats, gold = data[k]
            guess = current.predict(feats)
            if guess != gold:
                mistakes += 1
                updates += 1
                for f, value in feats.items():
                    if value:
                        for lab, sign in ((gold, 1.0), (guess, -1.0)):
                            weights[lab][f] = weights[lab].get(f, 0.0) + sign * value
                            totals[lab][f] = totals[lab].get(f, 0.0) + sign * c * value
            c += 1
        if mistakes == 0:
            candidate = PerceptronModel(labels, _averaged(weights, totals, c, labels))
            if accuracy(candidate, data) == 1.0:
                break
    return PerceptronModel(labels, _averaged(weights, totals, c, labels), epochs, seed, updates, run)


def softmax(activations: Mapping[str, float]) -> dict[str, float]:
    top = max(activations.values())
    exps = {lab: math.exp(a - top) for lab, a in activations.items()}
    z = sum(exps.values())
    return {lab: e / z for lab, e in exps.items()}


def score_distribution(model: PerceptronModel, features: FeatureVector) -> dict[str, float]:
    return softmax(model.activations(features))


def accuracy(model: PerceptronModel, data: Sequence[tuple[FeatureVector, str]]) -> float:
    return sum(1 for x, y in data if model.predict(x) == y) / len(data)


def _feature_map(raw: Any, path: str) -> dict[str, float]:
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: expected an object of feature values")
    feats = {}
    for f, val in raw.items():
        if not isinstance(val, (int, float)) or isinstance(val, bool) or not math.isfinite(val):
            raise ValueError(f"{path}.{f}: feature values must be finite numbers")
        feats[str(f)] = float(val)
    return feats


def _json_array(text: str, what: str) -> list:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON: {exc}") from None
    if not isinstance(raw, list):
        raise ValueError(f"{what} must be a JSON array")
    return raw


def load_training_set(text: str) -> list[tuple[dict[str, float], str]]:
    """Parse ``[{"features": {...}, "label": "..."}]``."""
    out = []
    for k, ex in enumerate(_json_array(text, "training set")):
        if not isinstance(ex, dict) or "label" not in ex:
            raise ValueError(f"$[{k}]: expected {{'features': {{...}}, 'label': ...}}")
        out.append((_feature_map(ex.get("features"), f"$[{k}].features"), str(ex["label"])))
    return out


def load_feature_vectors(text: str) -> list[dict[str, float]]:
    """Parse ``[{"features": {...}}, ...]``; any ``label`` field is ignored."""
    out = []
    for k, ex in enumerate(_json_array(text, "feature file")):
        if not isinstance(ex, dict):
            raise ValueError(f"$[{k}]: expected {{'features': {{...}}}}")
        out.append(_feature_map(ex.get("features"), f"$[{k}].features"))
    return out
