"""Documents, temporal nodes, score tables and relation graphs.

Every pair is stored in canonical orientation: the node with the
lexicographically smaller id is the source.  Labels supplied for the other
orientation are reversed on ingestion.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from itertools import combinations
from typing import Any, Iterable, Iterator, Optional

from .algebra import (
    CausalRel,
    TemporalRel,
    DIRECTED_CAUSAL,
    TEMPORAL_LABELS,
    CAUSAL_LABELS,
    allen_relation,
    reduce_allen,
    reverse_causal,
    reverse_temporal,
)

log = logging.getLogger(__name__)

Pair = tuple[str, str]

EVENT = "event"
TIMEX = "timex"


class DocumentError(ValueError):
    """Schema or integrity violation, located by a JSON path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class Node:
    id: str
    kind: str
    surface: Optional[str] = None
    sentence: Optional[int] = None
    value: Optional[str] = None

    @property
    def is_event(self) -> bool:
        return self.kind == EVENT

    @property
    def is_timex(self) -> bool:
        return self.kind == TIMEX


def canonical(x: str, y: str) -> tuple[Pair, bool]:
    """Return the canonical pair and whether ``(x, y)`` had to be flipped."""
    if x == y:
        raise ValueError(f"pair needs two distinct nodes, got ({x!r}, {y!r})")
    if x < y:
        return (x, y), False
    return (y, x), True


def category(kind1: str, kind2: str) -> str:
    kinds = {kind1, kind2}
    if kinds == {EVENT}:
        return "EE"
    if kinds == {TIMEX}:
        return "TT"
    return "ET"


@dataclass
class ScoreSet:
    temporal: dict[Pair, dict[TemporalRel, float]] = field(default_factory=dict)
    causal: dict[Pair, dict[CausalRel, float]] = field(default_factory=dict)

    def add_temporal(self, x: str, y: str, dist: dict[TemporalRel, float]) -> None:
        pair, flipped = canonical(x, y)
        if flipped:
            dist = {reverse_temporal(r): p for r, p in dist.items()}
        self.temporal[pair] = {r: float(dist[r]) for r in TEMPORAL_LABELS}

    def add_causal(self, x: str, y: str, dist: dict[CausalRel, float]) -> None:
        pair, flipped = canonical(x, y)
        if flipped:
            dist = {reverse_causal(c): p for c, p in dist.items()}
        row = {c: float(dist[c]) for c in DIRECTED_CAUSAL}
        if CausalRel.NULL in dist:
            row[CausalRel.NULL] = float(dist[CausalRel.NULL])
        self.causal[pair] = row


@dataclass
class RelationGraph:
    """Temporal and causal labels keyed by canonical pair.

    ``asymmetric`` collects input edges whose two orientations disagreed;
    it is only populated by :meth:`from_edges`.
    """

    temporal: dict[Pair, TemporalRel] = field(default_factory=dict)
    causal: dict[Pair, CausalRel] = field(default_factory=dict)
    asymmetric: list[tuple[Pair, Any, Any]] = field(default_factory=list, compare=False)

    def set_temporal(self, x: str, y: str, r: TemporalRel) -> None:
        pair, flipped = canonical(x, y)
        self.temporal[pair] = reverse_temporal(r) if flipped else r

    def get_temporal(self, x: str, y: str) -> Optional[TemporalRel]:
        pair, flipped = canonical(x, y)
        r = self.temporal.get(pair)
        if r is None:
            return None
        return reverse_temporal(r) if flipped else r

    def set_causal(self, x: str, y: str, c: CausalRel) -> None:
        pair, flipped = canonical(x, y)
        self.causal[pair] = reverse_causal(c) if flipped else c

    def get_causal(self, x: str, y: str) -> Optional[CausalRel]:
        pair, flipped = canonical(x, y)
        c = self.causal.get(pair)
        if c is None:
            return None
        return reverse_causal(c) if flipped else c

    def nodes(self) -> list[str]:
        seen = set()
        for x, y in list(self.temporal) + list(self.causal):
            seen.add(x)
            seen.add(y)
        return sorted(seen)

    def copy(self) -> "RelationGraph":
        return RelationGraph(dict(self.temporal), dict(self.causal), list(self.asymmetric))

    @classmethod
    def from_edges(cls, temporal: Iterable = (), causal: Iterable = ()) -> "RelationGraph":
        """Build from ``(x, y, label)`` triples in any orientation."""
        g = cls()
        for x, y, r in temporal:
            pair, flipped = canonical(x, y)
            r = TemporalRel(r)
            r = reverse_temporal(r) if flipped else r
            old = g.temporal.setdefault(pair, r)
            if old != r:
                g.asymmetric.append((pair, old, r))
        for x, y, c in causal:
            pair, flipped = canonical(x, y)
            c = CausalRel(c)
            c = reverse_causal(c) if flipped else c
            old = g.causal.setdefault(pair, c)
            if old != c:
                g.asymmetric.append((pair, old, c))
        return g


@dataclass(frozen=True)
class Document:
    id: str
    nodes: tuple[Node, ...]
    scores: ScoreSet = field(default_factory=ScoreSet)
    gold: Optional[RelationGraph] = None
    rules: dict[Pair, TemporalRel] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "_index", {n.id: n for n in self.nodes})

    def node(self, node_id: str) -> Node:
        return self._index[node_id]

    def has_node(self, node_id: str) -> bool:
        return node_id in self._index

    def pair_category(self, pair: Pair) -> str:
        return category(self.node(pair[0]).kind, self.node(pair[1]).kind)

    @property
    def node_ids(self) -> list[str]:
        return [n.id for n in self.nodes]


# --------------------------------------------------------------------- timexes

_TIMEX_FORMATS = (
    ("%Y-%m-%dT%H:%M", "minute"),
    ("%Y-%m-%d", "day"),
    ("%Y-%m", "month"),
    ("%Y", "year"),
)


def timex_interval(value: Optional[str]) -> Optional[tuple[datetime, datetime]]:
    """Half-open interval ``[start, end)`` covered by an ISO date at its granularity."""
    if not value:
        return None
    for fmt, unit in _TIMEX_FORMATS:
        try:
            start = datetime.strptime(value, fmt)
        except ValueError:
            continue
        if unit == "year":
            end = start.replace(year=start.year + 1)
        elif unit == "month":
            end = (start.replace(year=start.year + 1, month=1) if start.month == 12
                   else start.replace(month=start.month + 1))
        elif unit == "day":
            end = start + timedelta(days=1)
        else:
            end = start + timedelta(minutes=1)
        return start, end
    return None


def compare_timex(t1: Node, t2: Node) -> Optional[TemporalRel]:
    if not (t1.is_timex and t2.is_timex):
        raise ValueError(f"compare_timex needs two timexes, got {t1.kind} and {t2.kind}")
    iv1, iv2 = timex_interval(t1.value), timex_interval(t2.value)
    if iv1 is None or iv2 is None:
        bad = t1 if iv1 is None else t2
        log.warning("timex %s has no usable normalized value (%r)", bad.id, bad.value)
        return None
    return reduce_allen(allen_relation(iv1[0], iv1[1], iv2[0], iv2[1]))


# ----------------------------------------------------------------------- pairs

def enumerate_pairs(doc: Document, window: Optional[int] = None) -> list[tuple[Pair, str]]:
    """Canonical node pairs within ``window`` sentences, with their EE/ET/TT category.

    Nodes lacking a sentence index are never filtered out by the window.
    """
    nodes = sorted(doc.nodes, key=lambda n: n.id)
    out = []
    for n1, n2 in combinations(nodes, 2):
        if window is not None and n1.sentence is not None and n2.sentence is not None:
            if abs(n1.sentence - n2.sentence) > window:
                continue
        out.append(((n1.id, n2.id), category(n1.kind, n2.kind)))
    return out



def restrict_window(doc: Document, window: Optional[int]) -> Document:
    """Drop scores and rule pins on pairs farther apart than ``window`` sentences.

    Gold annotations are kept whole so evaluation still sees every gold edge.
    """
    if window is None:
        return doc
    keep = {pair for pair, _ in enumerate_pairs(doc, window)}
    scores = ScoreSet({p: d for p, d in doc.scores.temporal.items() if p in keep},
                      {p: d for p, d in doc.scores.causal.items() if p in keep})
    rules = {p: r for p, r in doc.rules.items() if p in keep}
    return Document(doc.id, doc.nodes, scores, doc.gold, rules)

# ------------------------------------------------------------------------ JSON

def _expect(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise DocumentError(path, message)


def _finite(value: Any, path: str) -> float:
    _expect(isinstance(value, (int, float)) and not isinstance(value, bool), path,
            f"expected a number, got {value!r}")
    _expect(math.isfinite(value), path, f"score must be finite, got {value!r}")
    return float(value)


def _pair(raw: Any, path: str, doc_nodes: dict) -> Pair:
    _expect(isinstance(raw, list) and len(raw) == 2, path, "pair must be [id, id]")
    x, y = raw
    for k, nid in enumerate((x, y)):
        _expect(isinstance(nid, str), f"{path}[{k}]", "node id must be a string")
        _expect(nid in doc_nodes, f"{path}[{k}]", f"unknown node id {nid!r}")
    _expect(x != y, path, "pair needs two distinct nodes")
    return x, y


def _label(enum_cls, raw: Any, path: str, allowed=None):
    try:
        label = enum_cls(raw)
    except ValueError:
        raise DocumentError(path, f"unknown label {raw!r}") from None
    if allowed is not None:
        _expect(label in allowed, path, f"label {raw!r} not allowed here")
    return label


def document_from_obj(obj: Any, path: str = "$") -> Document:
    _expect(isinstance(obj, dict), path, "document must be an object")
    _expect(isinstance(obj.get("id"), str), f"{path}.id", "missing or non-string id")
    raw_nodes = obj.get("nodes")
    _expect(isinstance(raw_nodes, list), f"{path}.nodes", "missing nodes array")

    nodes: list[Node] = []
    index: dict[str, Node] = {}
    for k, rn in enumerate(raw_nodes):
        p = f"{path}.nodes[{k}]"
        _expect(isinstance(rn, dict), p, "node must be an object")
        nid = rn.get("id")
        _expect(isinstance(nid, str) and nid != "", f"{p}.id", "missing or non-string id")
        _expect(nid not in index, f"{p}.id", f"duplicate node id {nid!r}")
        kind = rn.get("kind")
        _expect(kind in (EVENT, TIMEX), f"{p}.kind", f"kind must be 'event' or 'timex', got {kind!r}")
        sentence = rn.get("sentence")
        if sentence is not None:
            _expect(isinstance(sentence, int) and not isinstance(sentence, bool) and sentence >= 0,
                    f"{p}.sentence", "sentence must be a non-negative integer")
        surface = rn.get("surface")
        _expect(surface is None or isinstance(surface, str), f"{p}.surface", "surface must be a string")
        value = rn.get("value")
        _expect(value is None or isinstance(value, str), f"{p}.value", "value must be a string")
        if value is not None and kind == TIMEX and timex_interval(value) is None:
            log.warning("%s.value: unsupported timex value %r, treated as absent", p, value)
        node = Node(nid, kind, surface, sentence, value)
        nodes.append(node)
        index[nid] = node

    scores = ScoreSet()
    raw_scores = obj.get("scores", {})
    _expect(isinstance(raw_scores, dict), f"{path}.scores", "scores must be an object")
    for k, row in enumerate(raw_scores.get("temporal", [])):
        p = f"{path}.scores.temporal[{k}]"
        _expect(isinstance(row, dict), p, "score row must be an object")
        x, y = _pair(row.get("pair"), f"{p}.pair", index)
        _expect(canonical(x, y)[0] not in scores.temporal, f"{p}.pair", "duplicate score row")
        dist = row.get("dist")
        _expect(isinstance(dist, dict), f"{p}.dist", "missing dist object")
        parsed = {}
        for key, val in dist.items():
            parsed[_label(TemporalRel, key, f"{p}.dist.{key}")] = _finite(val, f"{p}.dist.{key}")
        missing = [r.value for r in TEMPORAL_LABELS if r not in parsed]
        _expect(not missing, f"{p}.dist", f"incomplete score row, missing {missing}")
        scores.add_temporal(x, y, parsed)
    for k, row in enumerate(raw_scores.get("causal", [])):
        p = f"{path}.scores.causal[{k}]"
        _expect(isinstance(row, dict), p, "score row must be an object")
        x, y = _pair(row.get("pair"), f"{p}.pair", index)
        _expect(index[x].is_event and index[y].is_event, f"{p}.pair", "causal pairs must be event-event")
        _expect(canonical(x, y)[0] not in scores.causal, f"{p}.pair", "duplicate score row")
        dist = row.get("dist")
        _expect(isinstance(dist, dict), f"{p}.dist", "missing dist object")
        parsed = {}
        for key, val in dist.items():
            parsed[_label(CausalRel, key, f"{p}.dist.{key}")] = _finite(val, f"{p}.dist.{key}")
        missing = [c.value for c in DIRECTED_CAUSAL if c not in parsed]
        _expect(not missing, f"{p}.dist", f"incomplete score row, missing {missing}")
        scores.add_causal(x, y, parsed)

    gold = None
    if obj.get("gold") is not None:
        raw_gold = obj["gold"]
        _expect(isinstance(raw_gold, dict), f"{path}.gold", "gold must be an object")
        t_edges, c_edges = [], []
        for k, e in enumerate(raw_gold.get("temporal", [])):
            p = f"{path}.gold.temporal[{k}]"
            _expect(isinstance(e, dict), p, "edge must be an object")
            x, y = _pair(e.get("pair"), f"{p}.pair", index)
            t_edges.append((x, y, _label(TemporalRel, e.get("label"), f"{p}.label")))
        for k, e in enumerate(raw_gold.get("causal", [])):
            p = f"{path}.gold.causal[{k}]"
            _expect(isinstance(e, dict), p, "edge must be an object")
            x, y = _pair(e.get("pair"), f"{p}.pair", index)
            c_edges.append((x, y, _label(CausalRel, e.get("label"), f"{p}.label")))
        gold = RelationGraph.from_edges(t_edges, c_edges)
        if gold.asymmetric:
            pair, old, new = gold.asymmetric[0]
            raise DocumentError(f"{path}.gold", f"contradictory labels for {list(pair)}: {old} vs {new}")

    rules: dict[Pair, TemporalRel] = {}
    for k, e in enumerate(obj.get("rules") or []):
        p = f"{path}.rules[{k}]"
        _expect(isinstance(e, dict), p, "rule must be an object")
        x, y = _pair(e.get("pair"), f"{p}.pair", index)
        r = _label(TemporalRel, e.get("label"), f"{p}.label")
        pair, flipped = canonical(x, y)
        r = reverse_temporal(r) if flipped else r
        _expect(rules.get(pair, r) == r, f"{p}", f"contradictory rule for {list(pair)}")
        rules[pair] = r

    return Document(obj["id"], tuple(nodes), scores, gold, rules)


def parse_document(data: bytes | str) -> Document:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise DocumentError("$", f"invalid JSON: {exc}") from None
    return document_from_obj(obj)


def parse_dataset(data: bytes | str) -> list[Document]:
    """A dataset file is a JSON array of documents; a lone document is accepted too."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise DocumentError("$", f"invalid JSON: {exc}") from None
    if isinstance(obj, dict):
        return [document_from_obj(obj)]
    _expect(isinstance(obj, list), "$", "dataset must be an array of documents")
    return [document_from_obj(d, f"$[{k}]") for k, d in enumerate(obj)]


def _edges(mapping: dict) -> list[dict]:
    return [{"pair": list(p), "label": lab.value} for p, lab in sorted(mapping.items())]


def graph_to_obj(g: RelationGraph) -> dict:
    return {"temporal": _edges(g.temporal), "causal": _edges(g.causal)}


def document_to_obj(doc: Document) -> dict:
    nodes = []
    for n in doc.nodes:
        rn: dict[str, Any] = {"id": n.id, "kind": n.kind}
        if n.surface is not None:
            rn["surface"] = n.surface
        if n.sentence is not None:
            rn["sentence"] = n.sentence
        if n.value is not None:
            rn["value"] = n.value
        nodes.append(rn)
    temporal = [{"pair": list(p), "dist": {r.value: d[r] for r in TEMPORAL_LABELS}}
                for p, d in sorted(doc.scores.temporal.items())]
    causal = [{"pair": list(p), "dist": {c.value: d[c] for c in CAUSAL_LABELS if c in d}}
              for p, d in sorted(doc.scores.causal.items())]
    obj: dict[str, Any] = {"id": doc.id, "nodes": nodes,
                           "scores": {"temporal": temporal, "causal": causal}}
    if doc.gold is not None:
        obj["gold"] = graph_to_obj(doc.gold)
    if doc.rules:
        obj["rules"] = _edges(doc.rules)
    return obj


def serialize_document(doc: Document) -> str:
    return json.dumps(document_to_obj(doc), indent=None, separators=(",", ":"))


def serialize_dataset(docs: Iterable[Document]) -> str:
    return json.dumps([document_to_obj(d) for d in docs], separators=(",", ":"))


def iter_event_pairs(doc: Document) -> Iterator[Pair]:
    for pair, cat in enumerate_pairs(doc):
        if cat == "EE":
            yield pair
