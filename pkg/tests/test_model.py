import json
import logging
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tempcausal.algebra import CausalRel, TemporalRel
from tempcausal.model import (
    DocumentError,
    Node,
    RelationGraph,
    canonical,
    compare_timex,
    enumerate_pairs,
    parse_dataset,
    parse_document,
    restrict_window,
    serialize_dataset,
    serialize_document,
    timex_interval,
)
from tempcausal.synth import SynthConfig, gen_synthetic

from conftest import make_doc, one_hot


def _base(**extra):
    obj = {"id": "x", "nodes": [{"id": "e1", "kind": "event"}, {"id": "e2", "kind": "event"},
                                {"id": "t1", "kind": "timex", "value": "2020-01-01"}],
           "scores": {"temporal": [], "causal": []}}
    obj.update(extra)
    return obj


def _error(obj):
    with pytest.raises(DocumentError) as info:
        parse_document(json.dumps(obj))
    return info.value


def test_reversed_pair_is_normalised():
    doc = make_doc(["e1", "e2"], temporal=[("e2", "e1", "b")],
                   causal=[("e2", "e1", {"c": 0.8, "cbar": 0.2})])
    row = doc.scores.temporal[("e1", "e2")]
    assert max(row, key=row.get) is TemporalRel.AFTER
    assert doc.scores.causal[("e1", "e2")][CausalRel.CAUSED_BY] == pytest.approx(0.8)
    assert CausalRel.NULL not in doc.scores.causal[("e1", "e2")]


def test_canonical_orientation():
    assert canonical("e2", "e1") == (("e1", "e2"), True)
    assert canonical("e1", "t0") == (("e1", "t0"), False)


@pytest.mark.parametrize("mutate,path", [
    (lambda o: o["nodes"].append({"id": "e1", "kind": "event"}), "$.nodes[3].id"),
    (lambda o: o["scores"]["temporal"].append({"pair": ["e1", "zz"], "dist": one_hot("b")}),
     "$.scores.temporal[0].pair[1]"),
    (lambda o: o["scores"]["temporal"].append({"pair": ["e1", "e2"], "dist": {"b": 1.0}}),
     "$.scores.temporal[0].dist"),
    (lambda o: o["scores"]["temporal"].append({"pair": ["e1", "e2"], "dist": {**one_hot("b"), "q": 0}}),
     "$.scores.temporal[0].dist.q"),
    (lambda o: o["scores"]["causal"].append({"pair": ["e1", "t1"], "dist": {"c": 1, "cbar": 0}}),
     "$.scores.causal[0].pair"),
    (lambda o: o["nodes"].append({"id": "e3", "kind": "verb"}), "$.nodes[3].kind"),
    (lambda o: o.update(gold={"temporal": [{"pair": ["e1", "e2"], "label": "b"},
                                           {"pair": ["e2", "e1"], "label": "b"}]}), "$.gold"),
])
def test_errors_carry_json_paths(mutate, path):
    obj = _base()
    mutate(obj)
    assert _error(obj).path == path


def test_non_finite_score_rejected():
    text = json.dumps(_base()).replace('"temporal": []',
                                       '"temporal": [{"pair": ["e1", "e2"], "dist": '
                                       '{"b": NaN, "a": 0, "i": 0, "ii": 0, "s": 0, "v": 0}}]')
    with pytest.raises(DocumentError) as info:
        parse_document(text)
    assert info.value.path == "$.scores.temporal[0].dist.b"


def test_invalid_json_reported_at_root():
    with pytest.raises(DocumentError) as info:
        parse_document("{not json")
    assert info.value.path == "$"


def test_dataset_paths_are_indexed():
    good, bad = _base(), _base()
    bad["nodes"][0]["id"] = ""
    with pytest.raises(DocumentError) as info:
        parse_dataset(json.dumps([good, bad]))
    assert info.value.path == "$[1].nodes[0].id"


# ----------------------------------------------------------------- timexes

def _tx(nid, value):
    return Node(nid, "timex", value=value)


@pytest.mark.parametrize("v1,v2,expected", [
    ("2020-03-05", "2020-03-05", "s"),
    ("2020-03-05", "2020-03-07", "b"),
    ("2020-03-05", "2020-03-06", "b"),   # adjacent days meet
    ("2020-03", "2020-03-05", "i"),
    ("2020-03-31", "2020-03", "ii"),
    ("2020", "2020-12", "i"),
    ("2020-12", "2021", "b"),
    ("2020-03-05T10:00", "2020-03-05", "ii"),
    ("2021-01-01", "2020", "a"),
])
def test_compare_timex(v1, v2, expected):
    assert compare_timex(_tx("t1", v1), _tx("t2", v2)).value == expected


def test_compare_timex_unusable_value(caplog):
    with caplog.at_level(logging.WARNING):
        assert compare_timex(_tx("t1", "last spring"), _tx("t2", "2020")) is None
    assert "t1" in caplog.text


def test_compare_timex_needs_timexes():
    with pytest.raises(ValueError):
        compare_timex(Node("e1", "event"), _tx("t1", "2020"))


def test_timex_interval_is_half_open():
    start, end = timex_interval("2020-02")
    assert (start.day, end.month, end.day) == (1, 3, 1)
    assert timex_interval("2020-12")[1].year == 2021
    assert timex_interval(None) is None


# ------------------------------------------------------------------- pairs

def test_enumerate_pairs_categories_and_window():
    nodes = [{"id": "e1", "kind": "event", "sentence": 0},
             {"id": "e2", "kind": "event", "sentence": 3},
             {"id": "t1", "kind": "timex", "sentence": 1, "value": "2020"},
             {"id": "e3", "kind": "event"}]
    doc = make_doc(nodes)
    assert enumerate_pairs(doc) == [(("e1", "e2"), "EE"), (("e1", "e3"), "EE"), (("e1", "t1"), "ET"),
                                    (("e2", "e3"), "EE"), (("e2", "t1"), "ET"), (("e3", "t1"), "ET")]
    near = [p for p, _ in enumerate_pairs(doc, window=1)]
    assert ("e1", "e2") not in near and ("e2", "t1") not in near
    assert ("e1", "t1") in near and ("e1", "e3") in near   # e3 has no sentence index


def test_restrict_window_drops_far_scores_only():
    nodes = [{"id": "e1", "kind": "event", "sentence": 0}, {"id": "e2", "kind": "event", "sentence": 5}]
    gold = {"temporal": [{"pair": ["e1", "e2"], "label": "b"}]}
    doc = make_doc(nodes, temporal=[("e1", "e2", "b")], rules=[("e1", "e2", "b")], gold=gold)
    cut = restrict_window(doc, 2)
    assert not cut.scores.temporal and not cut.rules
    assert cut.gold.temporal == doc.gold.temporal
    assert restrict_window(doc, None) is doc


def test_graph_orientation_and_asymmetry():
    g = RelationGraph.from_edges([("e2", "e1", "b"), ("e1", "e2", "a")], [("e2", "e1", "c")])
    assert g.temporal == {("e1", "e2"): TemporalRel.AFTER}
    assert not g.asymmetric
    assert g.get_causal("e1", "e2") is CausalRel.CAUSED_BY
    bad = RelationGraph.from_edges([("e1", "e2", "b"), ("e2", "e1", "b")])
    assert len(bad.asymmetric) == 1


# --------------------------------------------------------------- round trip

@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), n_events=st.integers(1, 6), n_timexes=st.integers(0, 3),
       density=st.sampled_from([0.0, 0.4, 1.0]))
def test_serialization_round_trip(seed, n_events, n_timexes, density):
    if n_events + n_timexes < 2:
        return
    doc = gen_synthetic(SynthConfig(n_events=n_events, n_timexes=n_timexes, causal_density=density,
                                    vague_rate=0.2, seed=seed))
    text = serialize_document(doc)
    again = parse_document(text)
    assert serialize_document(again) == text
    assert again.gold.temporal == doc.gold.temporal
    assert serialize_dataset([again]) == serialize_dataset(parse_dataset(serialize_dataset([doc])))


def test_optional_null_score_survives_round_trip():
    doc = make_doc(["e1", "e2"], temporal=[("e1", "e2", "b")],
                   causal=[("e1", "e2", {"c": 0.5, "cbar": 0.1, "null": 0.4})])
    again = parse_document(serialize_document(doc))
    assert math.isclose(again.scores.causal[("e1", "e2")][CausalRel.NULL], 0.4)
