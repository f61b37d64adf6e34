import math
import random

import pytest

from tempcausal.scoring import (
    PerceptronModel,
    accuracy,
    load_feature_vectors,
    load_training_set,
    score_distribution,
    softmax,
    train,
)


def separable(n=200, dim=3, margin=0.1, seed=7):
    """Two classes split by a random hyperplane, keeping points at least ``margin`` away."""
    r = random.Random(seed)
    w = [r.gauss(0, 1) for _ in range(dim)]
    norm = math.sqrt(sum(x * x for x in w))
    bias = r.uniform(-0.3, 0.3)
    data = []
    while len(data) < n:
        x = [r.uniform(-1, 1) for _ in range(dim)]
        m = (sum(a * b for a, b in zip(w, x)) + bias) / norm
        if abs(m) < margin:
            continue
        feats = {f"x{k}": v for k, v in enumerate(x)}
        feats["bias"] = 1.0
        data.append((feats, "pos" if m > 0 else "neg"))
    return data


def test_single_example_one_epoch():
    model = train([({"f": 1.0}, "a")], epochs=1)
    assert model.predict({"f": 1.0}) == "a"


@pytest.mark.parametrize("seed", range(5))
def test_separable_set_is_fit(seed):
    data = separable(seed=seed)
    model = train(data, epochs=50, seed=seed, labels=("neg", "pos"))
    assert accuracy(model, data) == 1.0
    assert model.epochs_run <= 50


def test_training_is_deterministic():
    data = separable(seed=3)
    assert train(data, 20, seed=9).dumps() == train(data, 20, seed=9).dumps()


def test_converged_model_ignores_extra_epochs():
    data = separable(seed=1)
    short = train(data, 50, seed=0, labels=("neg", "pos"))
    long = train(data, 200, seed=0, labels=("neg", "pos"))
    assert short.epochs_run < 50
    assert short.weights == long.weights and short.updates == long.updates


def test_training_errors():
    with pytest.raises(ValueError):
        train([], 1)
    with pytest.raises(ValueError):
        train([({"f": 1.0}, "a")], 0)
    with pytest.raises(ValueError):
        train([({"f": 1.0}, "zzz")], 1, labels=("b", "a"))


def test_default_label_sets():
    assert train([({"f": 1.0}, "b")], 1).labels == ("b", "a", "i", "ii", "s", "v")
    assert train([({"f": 1.0}, "cbar")], 1).labels == ("c", "cbar")


def test_softmax_two_labels():
    out = softmax({"x": 1.0, "y": 0.0})
    assert out["x"] == pytest.approx(math.e / (math.e + 1), abs=1e-12)
    assert out["x"] == pytest.approx(0.7311, abs=5e-5)
    assert out["y"] == pytest.approx(0.2689, abs=5e-5)


def test_softmax_uniform_and_extreme():
    assert all(v == pytest.approx(1 / 6) for v in softmax({k: 2.0 for k in "abcdef"}).values())
    big = softmax({"x": 1e6, "y": -1e6})
    assert big["x"] == 1.0 and 0.0 <= big["y"] < 1e-300


def test_shift_invariance_and_normalisation():
    r = random.Random(0)
    for _ in range(100):
        act = {k: r.uniform(-20, 20) for k in "abcdef"}
        shift = r.uniform(-50, 50)
        p, q = softmax(act), softmax({k: v + shift for k, v in act.items()})
        assert abs(sum(p.values()) - 1.0) < 1e-9
        assert all(v > 0 for v in p.values())
        assert all(abs(p[k] - q[k]) < 1e-9 for k in p)


def test_distribution_argmax_matches_prediction():
    data = separable(seed=2)
    model = train(data, 10, seed=2)
    for feats, _ in data[:50]:
        dist = score_distribution(model, feats)
        assert max(model.labels, key=dist.get) == model.predict(feats)


def test_zero_model_is_uniform():
    model = PerceptronModel(("c", "cbar"))
    assert score_distribution(model, {"f": 3.0}) == {"c": 0.5, "cbar": 0.5}


def test_scaling_weights_keeps_argmax():
    data = separable(seed=4)
    model = train(data, 10, seed=0)
    scaled = PerceptronModel(model.labels, {lab: {f: 3.5 * w for f, w in ws.items()}
                                            for lab, ws in model.weights.items()})
    assert all(model.predict(x) == scaled.predict(x) for x, _ in data)


def test_model_json_round_trip():
    model = train(separable(seed=5), 5, seed=1)
    again = PerceptronModel.from_obj(model.to_obj())
    assert again.dumps() == model.dumps()


def test_loaders_validate_input():
    assert load_training_set('[{"features": {"a": 1}, "label": "b"}]') == [({"a": 1.0}, "b")]
    assert load_feature_vectors('[{"features": {"a": 2}}]') == [{"a": 2.0}]
    for bad in ('{"features": {}}', '[{"features": {"a": "x"}, "label": "b"}]', "[1]", "nope"):
        with pytest.raises(ValueError):
            load_training_set(bad)
