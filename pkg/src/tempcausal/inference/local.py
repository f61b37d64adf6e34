"""Local baseline: every pair takes its own best label."""

from __future__ import annotations

import time

from ..algebra import CAUSAL_LABELS, TEMPORAL_LABELS
from ..model import Document
from .ilp import Solution


def _argmax(dist, labels):
    # max() keeps the first maximum, so ties go to the earlier canonical label
    return max(labels, key=lambda lab: dist[lab])


def solve_local(doc: Document) -> Solution:
    """Per-pair argmax over the scored pairs, ignoring every constraint.

    A causal pair without an explicit ``null`` score gives ``null`` zero, the
    same coefficient the integer program uses.
    """
    t0 = time.perf_counter()
    temporal, causal = {}, {}
    total = 0.0
    for pair, dist in sorted(doc.scores.temporal.items()):
        r = _argmax(dist, TEMPORAL_LABELS)
        temporal[pair] = r
        total += dist[r]
    for pair, dist in sorted(doc.scores.causal.items()):
        dist = {c: dist.get(c, 0.0) for c in CAUSAL_LABELS}
        c = _argmax(dist, CAUSAL_LABELS)
        causal[pair] = c
        total += dist[c]
    return Solution(doc.id, temporal, causal, total, nodes_expanded=0,
                    ms=(time.perf_counter() - t0) * 1000.0)
