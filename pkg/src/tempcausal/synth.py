"""Synthetic documents with known gold graphs.

Every node gets an interval on a day-resolution timeline; gold temporal
labels are the reduced Allen relations between those intervals.  Timexes
are whole days or whole calendar months, written as ISO values, so their
labels agree with :func:`~tempcausal.model.compare_timex`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from datetime import date, timedelta
from itertools import combinations
from typing import Optional

import numpy as np

from .algebra import (
    CAUSAL_LABELS,
    DIRECTED_CAUSAL,
    TEMPORAL_LABELS,
    CausalRel,
    TemporalRel,
    allen_relation,
    reduce_allen,
    reverse_causal,
)
from .model import Document, Node, Pair, RelationGraph, ScoreSet, compare_timex, enumerate_pairs

log = logging.getLogger(__name__)

EPOCH = date(2010, 1, 1)


@dataclass(frozen=True)
class SynthConfig:
    n_events: int = 6
    n_timexes: int = 2
    causal_density: float = 0.0
    noise: float = 0.5
    vague_rate: float = 0.0
    seed: int = 0
    rule_rate: float = 0.1
    reversed_causality: float = 0.0
    causal_noise: Optional[float] = None
    window: Optional[int] = None
    horizon: int = 60
    max_duration: int = 10

    def __post_init__(self):
        if self.n_events < 0 or self.n_timexes < 0:
            raise ValueError("node counts must be non-negative")
        if self.n_events + self.n_timexes < 2:
            raise ValueError("a document needs at least two nodes")
        for name in ("causal_density", "vague_rate", "rule_rate", "reversed_causality"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {val}")
        if self.noise < 0 or (self.causal_noise is not None and self.causal_noise < 0):
            raise ValueError("noise must be non-negative")
        if self.horizon < 1 or self.max_duration < 1:
            raise ValueError("horizon and max_duration must be positive")


def _month_span(day: int) -> tuple[int, int, str]:
    d = EPOCH + timedelta(days=day)
    first = d.replace(day=1)
    nxt = first.replace(year=first.year + 1, month=1) if first.month == 12 else first.replace(month=first.month + 1)
    return (first - EPOCH).days, (nxt - EPOCH).days, first.strftime("%Y-%m")


def _intervals(cfg: SynthConfig, rng: np.random.Generator):
    nodes, spans = [], {}
    for k in range(cfg.n_events):
        start = int(rng.integers(0, cfg.horizon))
        end = start + int(rng.integers(1, cfg.max_duration + 1))
        nid = f"e{k}"
        spans[nid] = (start, end)
        nodes.append(Node(nid, "event", surface=f"event{k}"))
    for k in range(cfg.n_timexes):
        day = int(rng.integers(0, cfg.horizon))
        nid = f"t{k}"
        if rng.random() < 0.25:
            lo, hi, value = _month_span(day)
        else:
            lo, hi, value = day, day + 1, (EPOCH + timedelta(days=day)).isoformat()
        spans[nid] = (lo, hi)
        nodes.append(Node(nid, "timex", surface=value, value=value))
    # sentence order follows start time, two nodes per sentence
    by_start = sorted(spans, key=lambda nid: (spans[nid][0], nid))
    sentence = {nid: k // 2 for k, nid in enumerate(by_start)}
    nodes = [replace(n, sentence=sentence[n.id]) for n in nodes]
    return nodes, spans


def _softmax_row(logits: np.ndarray) -> np.ndarray:
    z = np.exp(logits - logits.max())
    return z / z.sum()


def _noisy(gold_index: int, size: int, scale: float, rng: np.random.Generator) -> np.ndarray:
    logits = np.zeros(size)
    logits[gold_index] = 1.0
    if scale > 0:
        logits = logits + rng.normal(0.0, scale, size)
    return _softmax_row(logits)


def _timex_order(doc: Document) -> dict[Pair, TemporalRel]:
    out = {}
    for pair, cat in enumerate_pairs(doc):
        if cat == "TT":
            rel = compare_timex(doc.node(pair[0]), doc.node(pair[1]))
            if rel is not None:
                out[pair] = rel
    return out


def _project(doc: Document, temporal: dict[Pair, TemporalRel], fixed: dict[Pair, TemporalRel]):
    from .inference import ConstraintConfig, build_model, solve_exact

    scores = ScoreSet()
    for pair, r in temporal.items():
        dist = {lab: 0.0 for lab in TEMPORAL_LABELS}
        dist[TemporalRel.VAGUE] = 0.5
        dist[r] = 1.0
        scores.add_temporal(*pair, dist)
    cfg = ConstraintConfig(transitivity=True, tt=True, rules=True, causal_link=False, et=True)
    sol = solve_exact(build_model(Document(doc.id, doc.nodes, scores, None, fixed), cfg))
    return {pair: sol.temporal[pair] for pair in temporal}


def repair(doc: Document, temporal: dict[Pair, TemporalRel]) -> dict[Pair, TemporalRel]:
    """Closest consistent labelling: keep as many labels as possible, preferring vague.

    Consistency includes the order fixed by timex values.  Only pairs inside
    a violated triple are free to move at first; if that leaves no consistent
    labelling the whole graph is re-optimised.
    """
    from .evaluation import validate
    from .inference import ConstraintConfig, InfeasibleError

    cfg = ConstraintConfig(transitivity=True, tt=False, rules=False, causal_link=False, et=True)
    tt = _timex_order(doc)
    report = validate(RelationGraph({**temporal, **tt}), doc, cfg)
    if report.ok:
        return temporal
    loose = {pair for v in report for pair in combinations(v.pairs, 2)}
    try:
        return _project(doc, temporal, {p: r for p, r in temporal.items() if p not in loose})
    except InfeasibleError:
        return _project(doc, temporal, {})


def _gold_structure(cfg: SynthConfig, rng: np.random.Generator, doc_id: str):
    nodes, spans = _intervals(cfg, rng)
    skeleton = Document(doc_id, nodes)
    pairs = [(p, cat) for p, cat in enumerate_pairs(skeleton, cfg.window) if cat != "TT"]
    temporal = {p: reduce_allen(allen_relation(*spans[p[0]], *spans[p[1]])) for p, _ in pairs}

    candidates = [p for p, _ in pairs if temporal[p] != TemporalRel.VAGUE]
    n_vague = int(round(cfg.vague_rate * len(candidates)))
    if n_vague:
        for k in rng.choice(len(candidates), size=n_vague, replace=False):
            temporal[candidates[int(k)]] = TemporalRel.VAGUE
    temporal = repair(skeleton, temporal)

    causal: dict[Pair, CausalRel] = {}
    if cfg.causal_density > 0:
        for p, cat in pairs:
            if cat != "EE" or temporal[p] not in (TemporalRel.BEFORE, TemporalRel.AFTER):
                continue
            if rng.random() < cfg.causal_density:
                # the earlier event is the cause
                causal[p] = CausalRel.CAUSES if temporal[p] == TemporalRel.BEFORE else CausalRel.CAUSED_BY
    return nodes, pairs, temporal, causal


def _finish(cfg: SynthConfig, rng: np.random.Generator, doc_id: str, nodes, pairs,
            temporal, causal) -> Document:
    scores = ScoreSet()
    for p, _ in pairs:
        row = _noisy(temporal[p].rank, len(TEMPORAL_LABELS), cfg.noise, rng)
        scores.add_temporal(*p, {r: float(row[r.rank]) for r in TEMPORAL_LABELS})
    c_noise = cfg.noise if cfg.causal_noise is None else cfg.causal_noise
    for p in sorted(causal):
        row = _noisy(DIRECTED_CAUSAL.index(causal[p]), 2, c_noise, rng)
        scores.add_causal(*p, {c: float(row[k]) for k, c in enumerate(DIRECTED_CAUSAL)})

    rules = {}
    if cfg.rule_rate > 0:
        for p, _ in pairs:
            if temporal[p] != TemporalRel.VAGUE and rng.random() < cfg.rule_rate:
                rules[p] = temporal[p]
    gold = RelationGraph(dict(temporal), dict(causal))
    return Document(doc_id, nodes, scores, gold, rules)


def gen_synthetic(cfg: SynthConfig, doc_id: Optional[str] = None) -> Document:
    """One document; each causal link is reversed independently with ``reversed_causality``."""
    rng = np.random.default_rng(cfg.seed)
    doc_id = doc_id or f"synth-{cfg.seed}"
    nodes, pairs, temporal, causal = _gold_structure(cfg, rng, doc_id)
    for p in sorted(causal):
        if rng.random() < cfg.reversed_causality:
            causal[p] = reverse_causal(causal[p])
    return _finish(cfg, rng, doc_id, nodes, pairs, temporal, causal)


def gen_dataset(cfg: SynthConfig, n_docs: int) -> list[Document]:
    """``n_docs`` documents seeded from ``cfg.seed``.

    Reversed causal links are planned over the whole dataset: exactly
    ``round(reversed_causality * links)`` of them, chosen at random.
    """
    if n_docs < 1:
        raise ValueError("n_docs must be positive")
    master = np.random.default_rng(cfg.seed)
    seeds = [int(s) for s in master.integers(0, 2**31 - 1, size=n_docs)]
    drafts = []
    for k, seed in enumerate(seeds):
        rng = np.random.default_rng(seed)
        doc_id = f"synth-{cfg.seed}-{k:03d}"
        drafts.append((rng, doc_id) + _gold_structure(cfg, rng, doc_id))

    links = [(k, p) for k, d in enumerate(drafts) for p in sorted(d[5])]
    n_rev = int(round(cfg.reversed_causality * len(links)))
    if n_rev:
        for idx in sorted(master.choice(len(links), size=n_rev, replace=False)):
            k, p = links[int(idx)]
            drafts[k][5][p] = reverse_causal(drafts[k][5][p])
    return [_finish(cfg, rng, doc_id, nodes, pairs, temporal, causal)
            for rng, doc_id, nodes, pairs, temporal, causal in drafts]


# ------------------------------------------------------------ oracle instances

def random_document(rng: np.random.Generator, doc_id: str = "rand", min_nodes: int = 3,
                    max_nodes: int = 5, max_vars: int = 7) -> Document:
    """Small document with arbitrary scores, for cross-checking solvers.

    At most ``max_vars`` pair blocks can reach the integer program under any
    config (scored pairs, timex pairs, causal pairs together).
    """
    n = int(rng.integers(min_nodes, max_nodes + 1))
    n_tx = int(rng.integers(0, min(2, n - 1) + 1))
    spans = {}
    nodes = []
    for k in range(n):
        is_tx = k >= n - n_tx
        nid = f"t{k}" if is_tx else f"e{k}"
        day = int(rng.integers(0, 20))
        if is_tx:
            value = (EPOCH + timedelta(days=day)).isoformat()
            spans[nid] = (day, day + 1)
            nodes.append(Node(nid, "timex", value=value))
        else:
            spans[nid] = (day, day + int(rng.integers(1, 6)))
            nodes.append(Node(nid, "event"))
    ids = sorted(spans)
    all_pairs = list(combinations(ids, 2))
    tt = [p for p in all_pairs if p[0][0] == "t" and p[1][0] == "t"]
    other = [p for p in all_pairs if p not in tt]
    budget = max_vars - len(tt)
    n_scored = int(rng.integers(1, max(1, min(len(other), budget - 1)) + 1))
    picked = sorted(other[int(k)] for k in rng.choice(len(other), size=n_scored, replace=False))

    scores = ScoreSet()
    for p in picked:
        vals = rng.normal(0.0, 1.0, len(TEMPORAL_LABELS))
        if rng.random() < 0.5:
            vals = _softmax_row(2.0 * vals)
        scores.add_temporal(*p, {r: float(vals[r.rank]) for r in TEMPORAL_LABELS})
    ee = [p for p in picked if p[0][0] == "e" and p[1][0] == "e"]
    n_causal = min(len(ee), max(0, max_vars - len(tt) - len(picked)), int(rng.integers(0, 3)))
    causal_pairs = sorted(ee[int(k)] for k in rng.choice(len(ee), size=n_causal, replace=False)) if n_causal else []
    for p in causal_pairs:
        vals = rng.random(2)
        dist = {CausalRel.CAUSES: float(vals[0]), CausalRel.CAUSED_BY: float(vals[1])}
        if rng.random() < 0.3:
            dist[CausalRel.NULL] = float(rng.random())
        scores.add_causal(*p, dist)

    truth = {p: reduce_allen(allen_relation(*spans[p[0]], *spans[p[1]])) for p in picked}
    rules = {}
    for p in picked:
        if rng.random() < 0.2:
            # mostly faithful, sometimes arbitrary
            rules[p] = truth[p] if rng.random() < 0.7 else TEMPORAL_LABELS[int(rng.integers(0, 6))]
    gold_c = {}
    for p in causal_pairs:
        if truth[p] == TemporalRel.BEFORE:
            gold_c[p] = CausalRel.CAUSES
        elif truth[p] == TemporalRel.AFTER:
            gold_c[p] = CausalRel.CAUSED_BY
        else:
            gold_c[p] = CAUSAL_LABELS[int(rng.integers(0, 3))]
    gold = RelationGraph(dict(truth), gold_c)
    return Document(doc_id, tuple(nodes), scores, gold, rules)


def random_config(rng: np.random.Generator):
    from .inference import ConstraintConfig

    flags = rng.random(8) < 0.5
    return ConstraintConfig(
        symmetry=bool(flags[0]), transitivity=bool(flags[1]), tt=bool(flags[2]),
        rules=bool(flags[3]), causal_link=bool(flags[4]), et=bool(flags[5]),
        enforce_gold_temporal=bool(flags[6] and rng.random() < 0.5),
        enforce_gold_causal=bool(flags[7] and rng.random() < 0.5),
    )
