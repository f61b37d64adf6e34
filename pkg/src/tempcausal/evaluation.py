"""Closure, consistency validation and scoring of relation graphs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Optional, Sequence

from .algebra import CausalRel, TemporalRel, reverse_temporal, trans
from .inference.ilp import ConstraintConfig, resolve_causal_pins, resolve_temporal_pins
from .model import Document, Pair, RelationGraph, canonical

V = TemporalRel.VAGUE


class ClosureConflict(ValueError):
    def __init__(self, pair: Pair, existing: TemporalRel, derived: TemporalRel):
        super().__init__(f"closure derives {derived.value} for {pair[0]}-{pair[1]} "
                         f"but the graph has {existing.value}")
        self.pair = pair
        self.existing = existing
        self.derived = derived


def _neighbours(temporal: dict[Pair, TemporalRel]) -> dict[str, dict[str, TemporalRel]]:
    adj: dict[str, dict[str, TemporalRel]] = {}
    for (x, y), r in temporal.items():
        adj.setdefault(x, {})[y] = r
        adj.setdefault(y, {})[x] = reverse_temporal(r)
    return adj


def closure(graph: RelationGraph, strict: bool = True) -> RelationGraph:
    """Add every edge forced by a singleton composition of two non-vague edges.

    Existing labels are never overwritten.  With ``strict`` a derivation that
    contradicts a non-vague label (or another derivation) raises
    :class:`ClosureConflict`; otherwise the first derivation in sorted order wins.
    """
    temporal = dict(graph.temporal)
    while True:
        adj = _neighbours(temporal)
        derived: dict[Pair, TemporalRel] = {}
        for m2 in sorted(adj):
            around = sorted(adj[m2].items())
            for m1, r_21 in around:
                for m3, r2 in around:
                    if m1 == m3:
                        continue
                    r1 = reverse_temporal(r_21)
                    if r1 == V or r2 == V:
                        continue
                    allowed = trans(r1, r2)
                    if len(allowed) != 1:
                        continue
                    (r3,) = allowed
                    pair, flipped = canonical(m1, m3)
                    r3c = reverse_temporal(r3) if flipped else r3
                    existing = temporal.get(pair)
                    if existing is not None:
                        if strict and existing != V and existing != r3c:
                            raise ClosureConflict(pair, existing, r3c)
                        continue
                    held = derived.setdefault(pair, r3c)
                    if held != r3c and strict:
                        raise ClosureConflict(pair, held, r3c)
        if not derived:
            break
        temporal.update(derived)
    return RelationGraph(temporal, dict(graph.causal))


# --------------------------------------------------------------------- metrics

@dataclass
class MetricsReport:
    """Temporal awareness and causal accuracy; ``None`` marks a metric not reported."""

    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]
    causal_accuracy: Optional[float] = None
    n_sys: int = 0
    n_gold: int = 0
    matched_sys: int = 0
    matched_gold: int = 0
    violations: int = 0
    mcnemar: Optional[tuple[float, float]] = None

    def to_obj(self) -> dict:
        obj = {
            "temporal": {"p": self.precision, "r": self.recall, "f1": self.f1},
            "causal_accuracy": self.causal_accuracy,
            "violations": self.violations,
            "counts": {"sys": self.n_sys, "gold": self.n_gold,
                       "matched_sys": self.matched_sys, "matched_gold": self.matched_gold},
        }
        if self.mcnemar is not None:
            obj["mcnemar"] = {"stat": self.mcnemar[0], "p": self.mcnemar[1]}
        return obj


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def temporal_awareness(gold: RelationGraph, sys: RelationGraph) -> MetricsReport:
    """Closure-based precision and recall over non-vague edges.

    A system edge counts for precision when the gold closure carries the same
    label on that pair; recall is the mirror image.  Vague edges are left out
    of both numerators and denominators.
    """
    gold_c = closure(gold, strict=False).temporal
    sys_c = closure(sys, strict=False).temporal
    sys_edges = {p: r for p, r in sys.temporal.items() if r != V}
    gold_edges = {p: r for p, r in gold.temporal.items() if r != V}
    hit_p = sum(1 for p, r in sys_edges.items() if gold_c.get(p) == r)
    hit_r = sum(1 for p, r in gold_edges.items() if sys_c.get(p) == r)
    prec = hit_p / len(sys_edges) if sys_edges else 0.0
    rec = hit_r / len(gold_edges) if gold_edges else 0.0
    return MetricsReport(prec, rec, _f1(prec, rec), n_sys=len(sys_edges), n_gold=len(gold_edges),
                         matched_sys=hit_p, matched_gold=hit_r)


def _gold_causal_pairs(gold: RelationGraph) -> list[Pair]:
    return sorted(p for p, c in gold.causal.items() if c != CausalRel.NULL)


def causal_accuracy(gold: RelationGraph, sys: RelationGraph) -> float:
    pairs = _gold_causal_pairs(gold)
    if not pairs:
        raise ValueError("causal accuracy needs at least one gold causal pair")
    return sum(1 for p in pairs if sys.causal.get(p) == gold.causal[p]) / len(pairs)


def temporal_correctness(gold: RelationGraph, sys: RelationGraph) -> list[bool]:
    """Per gold temporal pair (sorted), whether the system label is identical."""
    return [sys.temporal.get(p) == r for p, r in sorted(gold.temporal.items())]


def causal_correctness(gold: RelationGraph, sys: RelationGraph) -> list[bool]:
    return [sys.causal.get(p) == gold.causal[p] for p in _gold_causal_pairs(gold)]


def mcnemar(preds1: Sequence[bool], preds2: Sequence[bool]) -> tuple[float, float]:
    """Continuity-corrected McNemar test on aligned correctness flags."""
    if len(preds1) != len(preds2):
        raise ValueError(f"length mismatch: {len(preds1)} vs {len(preds2)}")
    b = sum(1 for x, y in zip(preds1, preds2) if x and not y)
    c = sum(1 for x, y in zip(preds1, preds2) if y and not x)
    if b + c == 0:
        return 0.0, 1.0
    stat = (abs(b - c) - 1) ** 2 / (b + c)
    # chi-square survival with one degree of freedom
    return stat, math.erfc(math.sqrt(stat / 2.0))


# ------------------------------------------------------------------ validation

@dataclass(frozen=True)
class Violation:
    kind: str
    pairs: tuple
    labels: tuple

    def describe(self) -> str:
        where = " ".join("-".join(p) if isinstance(p, tuple) else str(p) for p in self.pairs)
        labs = " ".join(getattr(x, "value", str(x)) for x in self.labels)
        return f"{self.kind}: {where} [{labs}]"


@dataclass
class ViolationReport:
    violations: list[Violation] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)

    @property
    def ok(self) -> bool:
        return not self.violations

    def by_kind(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for v in self.violations:
            out[v.kind] = out.get(v.kind, 0) + 1
        return out


def validate(graph: RelationGraph, doc: Document, cfg: ConstraintConfig) -> ViolationReport:
    report = ViolationReport()
    add = report.violations.append

    for pair, old, new in graph.asymmetric:
        add(Violation("symmetry", (pair,), (old, new)))

    if cfg.transitivity:
        kinds = {n.id: n.kind for n in doc.nodes}
        nodes = sorted(nid for nid in graph.nodes() if cfg.et or kinds.get(nid) == "event")
        for triple in combinations(nodes, 3):
            labels = [graph.get_temporal(x, y) for x, y in combinations(triple, 2)]
            if any(r is None for r in labels):
                continue
            broken = [(m1, m2, m3) for m1, m2, m3 in permutations(triple)
                      if graph.get_temporal(m1, m3) not in trans(graph.get_temporal(m1, m2),
                                                                 graph.get_temporal(m2, m3))]
            if broken:
                add(Violation("transitivity", triple, tuple(labels)))

    pins, _ = resolve_temporal_pins(doc, cfg)
    for pair, (label, source) in sorted(pins.items()):
        got = graph.temporal.get(pair)
        if got is not None and got != label:
            add(Violation("pin", (pair, source), (label, got)))
    for pair, label in sorted(resolve_causal_pins(doc, cfg).items()):
        got = graph.causal.get(pair)
        if got is not None and got != label:
            add(Violation("pin", (pair, "gold"), (label, got)))

    if cfg.causal_link:
        need = {CausalRel.CAUSES: TemporalRel.BEFORE, CausalRel.CAUSED_BY: TemporalRel.AFTER}
        for pair, c in sorted(graph.causal.items()):
            if c in need and graph.temporal.get(pair) != need[c]:
                add(Violation("causal_bridge", (pair,), (c, graph.temporal.get(pair))))
    return report


def evaluate(gold: RelationGraph, sys: RelationGraph, doc: Optional[Document] = None,
             cfg: Optional[ConstraintConfig] = None) -> MetricsReport:
    report = temporal_awareness(gold, sys)
    if _gold_causal_pairs(gold):
        report.causal_accuracy = causal_accuracy(gold, sys)
    if doc is not None and cfg is not None:
        report.violations = len(validate(sys, doc, cfg))
    return report


def format_table(rows: Sequence[tuple[str, MetricsReport]], title: str = "") -> str:
    """Aligned text table: system, P, R, F1 (percent) and causal accuracy."""
    header = ("#", "System", "P", "R", "F1", "CausalAcc")
    body = []
    for k, (name, m) in enumerate(rows, 1):
        cells = [m.precision, m.recall, m.f1, m.causal_accuracy]
        body.append((str(k), name) + tuple("-" if x is None else f"{100 * x:.1f}" for x in cells))
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
    line = "-+-".join("-" * w for w in widths)

    def fmt(r):
        return " | ".join(c.ljust(w) if i == 1 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))

    out = [title] if title else []
    out += [fmt(header), line] + [fmt(r) for r in body]
    return "\n".join(out)
