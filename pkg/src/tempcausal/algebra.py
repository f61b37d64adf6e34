"""Temporal and causal label sets, reversal maps and the transitivity table.

Temporal labels are the six reduced relations obtained from Allen's thirteen
interval relations.  ``TRANS[(r1, r2)]`` is the set of labels allowed on
``(m1, m3)`` when ``(m1, m2)`` is ``r1`` and ``(m2, m3)`` is ``r2``.
"""

from __future__ import annotations

from enum import Enum
from itertools import product
from types import MappingProxyType
from typing import Mapping


class TemporalRel(str, Enum):
    BEFORE = "b"
    AFTER = "a"
    INCLUDES = "i"
    IS_INCLUDED = "ii"
    SIMULTANEOUS = "s"
    VAGUE = "v"

    @property
    def rank(self) -> int:
        return _T_RANK[self]

    def __str__(self) -> str:
        return self.value


class CausalRel(str, Enum):
    CAUSES = "c"
    CAUSED_BY = "cbar"
    NULL = "null"

    @property
    def rank(self) -> int:
        return _C_RANK[self]

    def __str__(self) -> str:
        return self.value


class AllenRel(str, Enum):
    BEFORE = "before"
    AFTER = "after"
    MEETS = "meets"
    MET_BY = "met_by"
    OVERLAPS = "overlaps"
    OVERLAPPED_BY = "overlapped_by"
    STARTS = "starts"
    STARTED_BY = "started_by"
    DURING = "during"
    CONTAINS = "contains"
    FINISHES = "finishes"
    FINISHED_BY = "finished_by"
    EQUAL = "equal"


# Canonical order, also used for deterministic tie-breaking.
TEMPORAL_LABELS: tuple[TemporalRel, ...] = tuple(TemporalRel)
CAUSAL_LABELS: tuple[CausalRel, ...] = tuple(CausalRel)
DIRECTED_CAUSAL: tuple[CausalRel, ...] = (CausalRel.CAUSES, CausalRel.CAUSED_BY)
ALL_TEMPORAL = frozenset(TEMPORAL_LABELS)

_T_RANK = {r: k for k, r in enumerate(TEMPORAL_LABELS)}
_C_RANK = {c: k for k, c in enumerate(CAUSAL_LABELS)}

b, a, i, ii, s, v = TEMPORAL_LABELS

_T_REVERSE = {b: a, a: b, i: ii, ii: i, s: s, v: v}
_C_REVERSE = {
    CausalRel.CAUSES: CausalRel.CAUSED_BY,
    CausalRel.CAUSED_BY: CausalRel.CAUSES,
    CausalRel.NULL: CausalRel.NULL,
}

_ALLEN_INVERSE = {
    AllenRel.BEFORE: AllenRel.AFTER,
    AllenRel.MEETS: AllenRel.MET_BY,
    AllenRel.OVERLAPS: AllenRel.OVERLAPPED_BY,
    AllenRel.STARTS: AllenRel.STARTED_BY,
    AllenRel.DURING: AllenRel.CONTAINS,
    AllenRel.FINISHES: AllenRel.FINISHED_BY,
    AllenRel.EQUAL: AllenRel.EQUAL,
}
_ALLEN_INVERSE.update({y: x for x, y in list(_ALLEN_INVERSE.items())})

# Each low-frequency relation goes to the label sharing its start-point
# ordering; overlaps has no unique closest label.
_ALLEN_REDUCTION = {
    AllenRel.BEFORE: b,
    AllenRel.MEETS: b,
    AllenRel.AFTER: a,
    AllenRel.MET_BY: a,
    AllenRel.CONTAINS: i,
    AllenRel.STARTED_BY: i,
    AllenRel.FINISHED_BY: i,
    AllenRel.DURING: ii,
    AllenRel.STARTS: ii,
    AllenRel.FINISHES: ii,
    AllenRel.EQUAL: s,
    AllenRel.OVERLAPS: v,
    AllenRel.OVERLAPPED_BY: v,
}


def temporal(label: str | TemporalRel) -> TemporalRel:
    """Parse a serialized temporal label ("b", "a", "i", "ii", "s", "v")."""
    return TemporalRel(label)


def causal(label: str | CausalRel) -> CausalRel:
    return CausalRel(label)


def reverse_temporal(r: TemporalRel) -> TemporalRel:
    return _T_REVERSE[r]


def reverse_causal(c: CausalRel) -> CausalRel:
    return _C_REVERSE[c]


def inverse_allen(r: AllenRel) -> AllenRel:
    return _ALLEN_INVERSE[r]


def reduce_allen(r: AllenRel) -> TemporalRel:
    return _ALLEN_REDUCTION[r]


def allen_relation(s1, e1, s2, e2) -> AllenRel:
    """Allen relation of interval ``[s1, e1]`` to ``[s2, e2]``; both need start < end."""
    if not (s1 < e1 and s2 < e2):
        raise ValueError(f"degenerate interval: [{s1}, {e1}] or [{s2}, {e2}]")
    if e1 < s2:
        return AllenRel.BEFORE
    if e2 < s1:
        return AllenRel.AFTER
    if e1 == s2:
        return AllenRel.MEETS
    if e2 == s1:
        return AllenRel.MET_BY
    if s1 == s2 and e1 == e2:
        return AllenRel.EQUAL
    if s1 == s2:
        return AllenRel.STARTS if e1 < e2 else AllenRel.STARTED_BY
    if e1 == e2:
        return AllenRel.FINISHES if s1 > s2 else AllenRel.FINISHED_BY
    if s2 < s1 and e1 < e2:
        return AllenRel.DURING
    if s1 < s2 and e2 < e1:
        return AllenRel.CONTAINS
    return AllenRel.OVERLAPS if s1 < s2 else AllenRel.OVERLAPPED_BY


def _labels(text: str) -> frozenset[TemporalRel]:
    return frozenset(TemporalRel(t) for t in text.split())


# Rows 4-11 of the published table, verbatim.
EXPLICIT_ROWS: tuple[tuple[TemporalRel, TemporalRel, frozenset[TemporalRel]], ...] = (
    (b, i, _labels("b i v")),
    (b, ii, _labels("b ii v")),
    (b, v, _labels("b i ii v")),
    (a, i, _labels("a i v")),
    (a, ii, _labels("a ii v")),
    (a, v, _labels("a i ii v")),
    (i, v, _labels("b a i v")),
    (ii, v, _labels("b a ii v")),
)


def _mirror(r1: TemporalRel, r2: TemporalRel, allowed) -> tuple[tuple, frozenset]:
    key = (reverse_temporal(r2), reverse_temporal(r1))
    return key, frozenset(reverse_temporal(x) for x in allowed)


def _build_trans() -> dict[tuple[TemporalRel, TemporalRel], frozenset[TemporalRel]]:
    table: dict[tuple[TemporalRel, TemporalRel], frozenset[TemporalRel]] = {}

    def put(key, allowed):
        old = table.get(key)
        if old is not None and old != allowed:
            raise AssertionError(f"inconsistent transitivity entry {key}: {old} vs {allowed}")
        table[key] = allowed

    for r in TEMPORAL_LABELS:
        put((r, r), frozenset({r}))
        put((r, s), frozenset({r}))
    for r1, r2, allowed in EXPLICIT_ROWS:
        put((r1, r2), allowed)
    for (r1, r2), allowed in list(table.items()):
        put(*_mirror(r1, r2, allowed))
    for key in product(TEMPORAL_LABELS, repeat=2):
        table.setdefault(key, ALL_TEMPORAL)
    return table


TRANS: Mapping[tuple[TemporalRel, TemporalRel], frozenset[TemporalRel]] = MappingProxyType(
    _build_trans()
)


def trans(r1: TemporalRel, r2: TemporalRel) -> frozenset[TemporalRel]:
    return TRANS[(r1, r2)]


def is_consistent_triple(r1: TemporalRel, r2: TemporalRel, r3: TemporalRel) -> bool:
    return r3 in TRANS[(r1, r2)]


def sort_temporal(labels) -> list[TemporalRel]:
    return sorted(labels, key=_T_RANK.__getitem__)
