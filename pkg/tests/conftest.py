import json

import numpy as np
import pytest

from tempcausal.model import parse_document

LABELS = ("b", "a", "i", "ii", "s", "v")


def one_hot(label, hi=0.9):
    lo = (1.0 - hi) / 5
    return {r: (hi if r == label else lo) for r in LABELS}


def make_doc(nodes, temporal=(), causal=(), rules=(), gold=None, doc_id="d"):
    """Build a document through the JSON parser.

    ``nodes`` are ids ("e*" events, "t*" timexes) or dicts; ``temporal`` holds
    ``(x, y, dist_or_label)`` and ``causal`` holds ``(x, y, {"c": .., "cbar": ..})``.
    """
    raw_nodes = []
    for n in nodes:
        if isinstance(n, dict):
            raw_nodes.append(n)
        else:
            raw_nodes.append({"id": n, "kind": "timex" if n.startswith("t") else "event"})
    obj = {
        "id": doc_id,
        "nodes": raw_nodes,
        "scores": {
            "temporal": [{"pair": [x, y], "dist": d if isinstance(d, dict) else one_hot(d)}
                         for x, y, d in temporal],
            "causal": [{"pair": [x, y], "dist": d} for x, y, d in causal],
        },
        "rules": [{"pair": [x, y], "label": r} for x, y, r in rules],
    }
    if gold is not None:
        obj["gold"] = gold
    return parse_document(json.dumps(obj))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
