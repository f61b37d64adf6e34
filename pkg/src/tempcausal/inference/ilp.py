"""Integer program for joint temporal/causal inference over one document.

Indicator ``y[k, r]`` says temporal pair ``k`` takes label ``r``; ``w[j, c]``
does the same for causal pair ``j``.  Symmetry is structural: one block of
variables per canonical pair, so the reversed orientation is an alias.

Besides the explicit linear rows, the model keeps the structure they were
generated from (pins, node triples, causal links).  The branch-and-bound
solver works on the structure, the brute-force oracle only on the rows.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, fields, replace
from itertools import combinations, permutations, product
from typing import Any, Optional

from ..algebra import (
    ALL_TEMPORAL,
    CAUSAL_LABELS,
    TEMPORAL_LABELS,
    CausalRel,
    TemporalRel,
    reverse_temporal,
    trans,
)
from ..model import Document, Pair, RelationGraph, canonical, compare_timex

log = logging.getLogger(__name__)

NT = len(TEMPORAL_LABELS)
NC = len(CAUSAL_LABELS)


class ModelError(ValueError):
    pass


class InfeasibleError(ValueError):
    def __init__(self, message: str, constraints: tuple = ()):
        super().__init__(message)
        self.constraints = constraints


@dataclass(frozen=True)
class ConstraintConfig:
    """Which constraint families enter the program.

    ``symmetry`` is honoured structurally whatever its value.  ``et`` lets
    triples run through timex nodes; with it off only event triples are
    constrained and event-timex pairs are decided on their own scores.
    ``gold_temporal_pairs``/``gold_causal_pairs`` restrict gold enforcement
    to a subset of the gold pairs.
    """

    symmetry: bool = True
    transitivity: bool = True
    tt: bool = True
    rules: bool = True
    causal_link: bool = True
    et: bool = True
    enforce_gold_temporal: bool = False
    enforce_gold_causal: bool = False
    gold_temporal_pairs: Optional[frozenset] = None
    gold_causal_pairs: Optional[frozenset] = None

    _JSON_KEYS = ("symmetry", "transitivity", "tt", "rules", "causal_link", "et",
                  "enforce_gold_temporal", "enforce_gold_causal")

    @classmethod
    def none(cls) -> "ConstraintConfig":
        return cls(symmetry=False, transitivity=False, tt=False, rules=False,
                   causal_link=False, et=False)

    @classmethod
    def from_obj(cls, obj: dict) -> "ConstraintConfig":
        unknown = set(obj) - set(cls._JSON_KEYS)
        if unknown:
            raise ValueError(f"unknown constraint config keys: {sorted(unknown)}")
        for k, val in obj.items():
            if not isinstance(val, bool):
                raise ValueError(f"constraint config key {k!r} must be a boolean")
        return cls(**obj)

    @classmethod
    def from_json(cls, text: str) -> "ConstraintConfig":
        return cls.from_obj(json.loads(text))

    def to_obj(self) -> dict:
        return {k: getattr(self, k) for k in self._JSON_KEYS}

    def with_(self, **changes) -> "ConstraintConfig":
        return replace(self, **changes)

    def families(self) -> set[str]:
        return {f.name for f in fields(self)
                if f.name in self._JSON_KEYS and getattr(self, f.name)}


LOCAL = ConstraintConfig.none()
FULL = ConstraintConfig()


@dataclass(frozen=True)
class Row:
    """``sum(coef * var) <sense> rhs`` with sense ``"<="`` or ``"=="``."""

    kind: str
    terms: tuple[tuple[int, float], ...]
    sense: str
    rhs: float
    note: str = ""

    def holds(self, x) -> bool:
        lhs = sum(c * x[v] for v, c in self.terms)
        if self.sense == "==":
            return abs(lhs - self.rhs) < 1e-9
        return lhs <= self.rhs + 1e-9


@dataclass(frozen=True)
class Pin:
    var: int
    label: Any
    source: str

    def describe(self, model: "IlpModel") -> str:
        if isinstance(self.label, TemporalRel):
            pair = model.temporal_pairs[self.var]
        else:
            pair = model.causal_pairs[self.var]
        return f"{self.source} pin {pair[0]}-{pair[1]}={self.label.value}"


@dataclass
class IlpModel:
    document_id: str
    config: ConstraintConfig
    temporal_pairs: list[Pair]
    causal_pairs: list[Pair]
    p: list[dict[TemporalRel, float]]
    q: list[dict[CausalRel, float]]
    explicit_rows: list[Row] = field(default_factory=list)
    temporal_pins: list[Pin] = field(default_factory=list)
    causal_pins: list[Pin] = field(default_factory=list)
    triples: list[tuple[int, int, int]] = field(default_factory=list)
    triple_nodes: list[tuple[str, str, str]] = field(default_factory=list)
    links: list[tuple[int, int]] = field(default_factory=list)
    conflicts: list[str] = field(default_factory=list)
    _transitivity_rows: Optional[list[Row]] = field(default=None, repr=False, compare=False)

    @property
    def n_vars(self) -> int:
        return NT * len(self.temporal_pairs) + NC * len(self.causal_pairs)

    def y(self, k: int, r: TemporalRel) -> int:
        return NT * k + r.rank

    def w(self, j: int, c: CausalRel) -> int:
        return NT * len(self.temporal_pairs) + NC * j + c.rank

    def variables(self) -> list[tuple[str, Pair, Any]]:
        out = [("y", pair, r) for pair in self.temporal_pairs for r in TEMPORAL_LABELS]
        out += [("w", pair, c) for pair in self.causal_pairs for c in CAUSAL_LABELS]
        return out

    def objective(self) -> list[float]:
        coef = [self.p[k][r] for k in range(len(self.temporal_pairs)) for r in TEMPORAL_LABELS]
        coef += [self.q[j][c] for j in range(len(self.causal_pairs)) for c in CAUSAL_LABELS]
        return coef

    @property
    def rows(self) -> list[Row]:
        """Every linear row; transitivity rows are generated on first use."""
        if self._transitivity_rows is None:
            self._transitivity_rows = _transitivity_rows(self)
        return self.explicit_rows + self._transitivity_rows

    def rows_of(self, kind: str) -> list[Row]:
        return [row for row in self.rows if row.kind == kind]

    def add_pin(self, pair: Pair, label, source: str) -> None:
        """Fix ``pair`` to ``label``; pins on the same pair are not merged."""
        if isinstance(label, TemporalRel):
            k = self.temporal_pairs.index(pair)
            pin = Pin(k, label, source)
            self.temporal_pins.append(pin)
            self.explicit_rows.append(Row("pin", ((self.y(k, label), 1.0),), "==", 1.0, pin.describe(self)))
        else:
            j = self.causal_pairs.index(pair)
            pin = Pin(j, label, source)
            self.causal_pins.append(pin)
            self.explicit_rows.append(Row("pin", ((self.w(j, label), 1.0),), "==", 1.0, pin.describe(self)))

    def indicator(self, temporal: dict, causal: dict) -> list[int]:
        x = [0] * self.n_vars
        for k, pair in enumerate(self.temporal_pairs):
            x[self.y(k, temporal[pair])] = 1
        for j, pair in enumerate(self.causal_pairs):
            x[self.w(j, causal[pair])] = 1
        return x

    def value(self, temporal: dict, causal: dict) -> float:
        total = 0.0
        for k, pair in enumerate(self.temporal_pairs):
            total += self.p[k][temporal[pair]]
        for j, pair in enumerate(self.causal_pairs):
            total += self.q[j][causal[pair]]
        return total

    def violated_rows(self, temporal: dict, causal: dict) -> list[Row]:
        x = self.indicator(temporal, causal)
        return [row for row in self.rows if not row.holds(x)]


@dataclass
class Solution:
    document_id: str
    temporal: dict[Pair, TemporalRel]
    causal: dict[Pair, CausalRel]
    objective: float
    nodes_expanded: int = 0
    ms: Optional[float] = None

    def graph(self) -> RelationGraph:
        return RelationGraph(dict(self.temporal), dict(self.causal))

    def to_obj(self, timing: bool = False) -> dict:
        return {
            "document": self.document_id,
            "objective": self.objective,
            "temporal": [{"pair": list(p), "label": r.value} for p, r in sorted(self.temporal.items())],
            "causal": [{"pair": list(p), "label": c.value} for p, c in sorted(self.causal.items())],
            "stats": {"nodes_expanded": self.nodes_expanded,
                      "ms": round(self.ms, 3) if timing and self.ms is not None else None},
        }


# ------------------------------------------------------------------ building

def _gold_selection(all_pairs, subset):
    if subset is None:
        return sorted(all_pairs)
    chosen = []
    for x, y in subset:
        pair = canonical(x, y)[0]
        if pair not in all_pairs:
            raise ModelError(f"gold enforcement pair {list(pair)} has no gold label")
        chosen.append(pair)
    return sorted(set(chosen))


def resolve_temporal_pins(doc: Document, cfg: ConstraintConfig):
    """Temporal pins after conflict resolution.

    Returns ``(pins, conflicts)`` with ``pins`` mapping pair to
    ``(label, source)``.  Precedence: timex dates, then gold, then rules.
    """
    pins: dict[Pair, tuple[TemporalRel, str]] = {}
    conflicts: list[str] = []

    def offer(pair, label, source):
        held = pins.get(pair)
        if held is None:
            pins[pair] = (label, source)
        elif held[0] != label:
            conflicts.append(f"{source} label {label.value} on {pair[0]}-{pair[1]} conflicts with "
                             f"{held[1]} label {held[0].value}; keeping {held[1]}")

    if cfg.tt:
        timexes = sorted((n for n in doc.nodes if n.is_timex), key=lambda n: n.id)
        for t1, t2 in combinations(timexes, 2):
            r = compare_timex(t1, t2)
            if r is not None:
                offer((t1.id, t2.id), r, "tt")
    if cfg.enforce_gold_temporal:
        if doc.gold is None:
            raise ModelError(f"{doc.id}: gold enforcement requested but document has no gold")
        for pair in _gold_selection(doc.gold.temporal, cfg.gold_temporal_pairs):
            offer(pair, doc.gold.temporal[pair], "gold")
    if cfg.rules:
        for pair, r in sorted(doc.rules.items()):
            offer(pair, r, "rule")
    return pins, conflicts


def resolve_causal_pins(doc: Document, cfg: ConstraintConfig) -> dict[Pair, CausalRel]:
    if not cfg.enforce_gold_causal:
        return {}
    if doc.gold is None:
        raise ModelError(f"{doc.id}: gold enforcement requested but document has no gold")
    return {pair: doc.gold.causal[pair]
            for pair in _gold_selection(doc.gold.causal, cfg.gold_causal_pairs)}


def _zero_t():
    return {r: 0.0 for r in TEMPORAL_LABELS}


def build_model(doc: Document, cfg: ConstraintConfig = FULL) -> IlpModel:
    t_pins, conflicts = resolve_temporal_pins(doc, cfg)
    for msg in conflicts:
        log.warning("%s: %s", doc.id, msg)
    c_pins = resolve_causal_pins(doc, cfg)

    t_pairs = sorted(set(doc.scores.temporal) | set(t_pins))
    c_pairs = sorted(set(doc.scores.causal) | set(c_pins))
    p = [dict(doc.scores.temporal.get(pair) or _zero_t()) for pair in t_pairs]
    q = []
    for pair in c_pairs:
        row = doc.scores.causal.get(pair, {})
        q.append({c: row.get(c, 0.0) for c in CAUSAL_LABELS})
    model = IlpModel(doc.id, cfg, t_pairs, c_pairs, p, q, conflicts=conflicts)
    t_index = {pair: k for k, pair in enumerate(t_pairs)}

    for k in range(len(t_pairs)):
        terms = tuple((model.y(k, r), 1.0) for r in TEMPORAL_LABELS)
        model.explicit_rows.append(Row("exactly_one", terms, "==", 1.0, f"{t_pairs[k]}"))
    for j in range(len(c_pairs)):
        terms = tuple((model.w(j, c), 1.0) for c in CAUSAL_LABELS)
        model.explicit_rows.append(Row("exactly_one", terms, "==", 1.0, f"{c_pairs[j]}"))

    for pair, (label, source) in sorted(t_pins.items()):
        model.add_pin(pair, label, source)
    for pair, label in sorted(c_pins.items()):
        model.add_pin(pair, label, "gold")

    if cfg.transitivity:
        _add_transitivity(doc, model, t_index)

    if cfg.causal_link:
        for j, pair in enumerate(c_pairs):
            k = t_index.get(pair)
            if k is None:
                raise ModelError(
                    f"{doc.id}: causal pair {list(pair)} has no temporal score for the causal link")
            model.links.append((j, k))
            # w(x,y)=c  =>  y(x,y)=b ;  w(x,y)=cbar, i.e. y causes x  =>  y(x,y)=a
            model.explicit_rows.append(Row("causal_link",
                                  ((model.w(j, CausalRel.CAUSES), 1.0), (model.y(k, TemporalRel.BEFORE), -1.0)),
                                  "<=", 0.0, f"{pair} c -> b"))
            model.explicit_rows.append(Row("causal_link",
                                  ((model.w(j, CausalRel.CAUSED_BY), 1.0), (model.y(k, TemporalRel.AFTER), -1.0)),
                                  "<=", 0.0, f"{pair} cbar -> a"))
    return model


# (r1, r2, allowed r3 labels) for every composition that actually constrains
_CONSTRAINING = tuple((r1, r2, tuple(r3 for r3 in TEMPORAL_LABELS if r3 in trans(r1, r2)))
                      for r1, r2 in product(TEMPORAL_LABELS, repeat=2)
                      if trans(r1, r2) != ALL_TEMPORAL)


def _oriented_vars(model: IlpModel, x, y) -> dict[TemporalRel, int]:
    """Variable of each label as read in the ``x -> y`` direction."""
    pair, flipped = canonical(x, y)
    k = model.temporal_pairs.index(pair)
    return {r: model.y(k, reverse_temporal(r) if flipped else r) for r in TEMPORAL_LABELS}


def _add_transitivity(doc: Document, model: IlpModel, t_index) -> None:
    allowed_nodes = sorted(n.id for n in doc.nodes if model.config.et or n.is_event)
    for a, b, c in combinations(allowed_nodes, 3):
        ab, bc, ac = (a, b), (b, c), (a, c)
        if not (ab in t_index and bc in t_index and ac in t_index):
            continue
        model.triples.append((t_index[ab], t_index[bc], t_index[ac]))
        model.triple_nodes.append((a, b, c))


def _transitivity_rows(model: IlpModel) -> list[Row]:
    """All orderings of every constrained triple, skipping unconstrained compositions."""
    cache: dict[tuple[str, str], dict[TemporalRel, int]] = {}

    def var(x, y):
        got = cache.get((x, y))
        if got is None:
            got = cache[(x, y)] = _oriented_vars(model, x, y)
        return got

    rows = []
    for triple in model.triple_nodes:
        for m1, m2, m3 in permutations(triple):
            v12, v23, v13 = var(m1, m2), var(m2, m3), var(m1, m3)
            for r1, r2, allowed in _CONSTRAINING:
                terms = ((v12[r1], 1.0), (v23[r2], 1.0)) + tuple((v13[r3], -1.0) for r3 in allowed)
                rows.append(Row("transitivity", terms, "<=", 1.0,
                                f"({m1},{m2})={r1.value} ({m2},{m3})={r2.value}"))
    return rows
