import numpy as np
import pytest

from tempcausal.algebra import CausalRel, TemporalRel
from tempcausal.evaluation import validate
from tempcausal.inference import FULL, infer, solve_local
from tempcausal.model import serialize_dataset
from tempcausal.synth import SynthConfig, gen_dataset, gen_synthetic, random_document

V = TemporalRel.VAGUE


def test_noise_free_scores_decode_to_gold():
    for seed in range(10):
        doc = gen_synthetic(SynthConfig(noise=0.0, causal_density=0.5, vague_rate=0.2, seed=seed))
        sol = solve_local(doc)
        for pair, r in doc.gold.temporal.items():
            if r != V:
                assert sol.temporal[pair] == r
        assert all(sol.causal[p] == c for p, c in doc.gold.causal.items())


def test_zero_density_means_no_causal_scores():
    doc = gen_synthetic(SynthConfig(causal_density=0.0, seed=3))
    assert not doc.scores.causal and not doc.gold.causal


def test_gold_validates_for_many_seeds():
    for seed in range(200):
        cfg = SynthConfig(causal_density=0.3, vague_rate=0.15, seed=seed)
        doc = gen_synthetic(cfg)
        report = validate(doc.gold, doc, FULL)
        assert report.ok, (seed, [v.describe() for v in report])


def test_gold_agrees_with_timex_values():
    # enforcing every gold label at once must be feasible alongside the timex pins
    for seed in range(40):
        doc = gen_synthetic(SynthConfig(n_timexes=3, causal_density=0.3, vague_rate=0.2, seed=seed))
        sol = infer(doc, FULL.with_(enforce_gold_temporal=True, enforce_gold_causal=True))
        assert all(sol.temporal[p] == r for p, r in doc.gold.temporal.items())


def test_causal_links_follow_time():
    doc = gen_synthetic(SynthConfig(n_events=8, causal_density=1.0, seed=1))
    assert doc.gold.causal
    for pair, c in doc.gold.causal.items():
        expected = CausalRel.CAUSES if doc.gold.temporal[pair] == TemporalRel.BEFORE else CausalRel.CAUSED_BY
        assert c == expected
        assert doc.node(pair[0]).is_event and doc.node(pair[1]).is_event


def test_reversal_count_is_exact_over_the_dataset():
    base = gen_dataset(SynthConfig(causal_density=0.4, seed=5), 20)
    flipped = gen_dataset(SynthConfig(causal_density=0.4, reversed_causality=0.25, seed=5), 20)
    links = sum(len(d.gold.causal) for d in base)
    changed = sum(1 for d0, d1 in zip(base, flipped) for p in d0.gold.causal
                  if d0.gold.causal[p] != d1.gold.causal[p])
    assert changed == round(0.25 * links)
    bridge = sum(validate(d.gold, d, FULL).by_kind().get("causal_bridge", 0) for d in flipped)
    assert bridge == changed


def test_vague_rate_and_rules():
    doc = gen_synthetic(SynthConfig(vague_rate=0.3, rule_rate=0.5, seed=2))
    assert any(r == V for r in doc.gold.temporal.values())
    assert doc.rules and all(doc.gold.temporal[p] == r and r != V for p, r in doc.rules.items())


def test_no_gold_for_timex_timex_pairs():
    doc = gen_synthetic(SynthConfig(n_timexes=3, seed=0))
    assert all(doc.pair_category(p) != "TT" for p in doc.gold.temporal)
    assert all(n.value for n in doc.nodes if n.is_timex)


def test_datasets_are_reproducible():
    cfg = SynthConfig(causal_density=0.3, vague_rate=0.1, seed=9)
    assert serialize_dataset(gen_dataset(cfg, 5)) == serialize_dataset(gen_dataset(cfg, 5))
    other = serialize_dataset(gen_dataset(SynthConfig(causal_density=0.3, vague_rate=0.1, seed=10), 5))
    assert other != serialize_dataset(gen_dataset(cfg, 5))


def test_scores_are_distributions():
    doc = gen_synthetic(SynthConfig(causal_density=0.5, noise=1.0, seed=4))
    for row in list(doc.scores.temporal.values()) + list(doc.scores.causal.values()):
        assert abs(sum(row.values()) - 1.0) < 1e-9


@pytest.mark.parametrize("kwargs", [dict(n_events=1, n_timexes=0), dict(n_events=-1),
                                    dict(vague_rate=1.5), dict(noise=-0.1)])
def test_config_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        SynthConfig(**kwargs)


def test_random_documents_stay_small():
    rng = np.random.default_rng(0)
    for k in range(100):
        doc = random_document(rng, f"r{k}")
        assert 3 <= len(doc.nodes) <= 5
        tt = sum(1 for n1 in doc.nodes for n2 in doc.nodes if n1.id < n2.id and n1.is_timex and n2.is_timex)
        assert len(doc.scores.temporal) + len(doc.scores.causal) + tt <= 7
