"""Exhaustive verification oracle.

Reads nothing but the variables, objective and linear rows of a model.  Rows
are grouped by the pair blocks they touch and each group is tabulated once
over its label combinations; the full product of labels is then scanned in
lexicographic order in numpy chunks.
"""

from __future__ import annotations

import time
from itertools import product

import numpy as np

from ..algebra import CAUSAL_LABELS, TEMPORAL_LABELS
from .ilp import IlpModel, InfeasibleError, Solution

MAX_PAIRS = 10
CHUNK = 1 << 20


class TooLargeError(ValueError):
    pass


def _blocks(model: IlpModel):
    """Variable blocks, one per pair: ``(first_var, size)``."""
    out, start = [], 0
    for _ in model.temporal_pairs:
        out.append((start, len(TEMPORAL_LABELS)))
        start += len(TEMPORAL_LABELS)
    for _ in model.causal_pairs:
        out.append((start, len(CAUSAL_LABELS)))
        start += len(CAUSAL_LABELS)
    return out


def _row_tables(model: IlpModel, blocks):
    owner = {}
    for g, (start, size) in enumerate(blocks):
        for off in range(size):
            owner[start + off] = (g, off)
    groups: dict[tuple[int, ...], list] = {}
    for row in model.rows:
        scope = tuple(sorted({owner[v][0] for v, _ in row.terms}))
        groups.setdefault(scope, []).append(row)

    tables = []
    for scope, rows in groups.items():
        sizes = [blocks[g][1] for g in scope]
        table = np.ones(sizes, dtype=bool)
        for combo in product(*(range(s) for s in sizes)):
            chosen = {blocks[g][0] + lab for g, lab in zip(scope, combo)}
            for row in rows:
                lhs = sum(c for v, c in row.terms if v in chosen)
                ok = abs(lhs - row.rhs) < 1e-9 if row.sense == "==" else lhs <= row.rhs + 1e-9
                if not ok:
                    table[combo] = False
                    break
        tables.append((scope, table, rows))
    return tables


def solve_bruteforce(model: IlpModel) -> Solution:
    t0 = time.perf_counter()
    blocks = _blocks(model)
    if len(blocks) > MAX_PAIRS:
        raise TooLargeError(f"{len(blocks)} pairs exceed the brute-force limit of {MAX_PAIRS}")
    coef = np.asarray(model.objective(), dtype=float)
    sizes = [size for _, size in blocks]
    tables = _row_tables(model, blocks)
    total = int(np.prod(sizes)) if sizes else 1

    best_val, best_idx = -np.inf, -1
    for lo in range(0, total, CHUNK):
        idx = np.arange(lo, min(total, lo + CHUNK))
        cols = np.unravel_index(idx, sizes) if sizes else ()
        value = np.zeros(len(idx))
        for (start, _), col in zip(blocks, cols):
            value += coef[start + col]
        feasible = np.ones(len(idx), dtype=bool)
        for scope, table, _ in tables:
            feasible &= table[tuple(cols[g] for g in scope)]
        if not feasible.any():
            continue
        value[~feasible] = -np.inf
        k = int(np.argmax(value))
        if value[k] > best_val:
            best_val, best_idx = float(value[k]), int(idx[k])

    if best_idx < 0:
        broken = [row.note for scope, table, rows in tables if not table.any() for row in rows]
        raise InfeasibleError(f"{model.document_id}: infeasible model {broken}", tuple(broken))

    labels = np.unravel_index(best_idx, sizes) if sizes else ()
    nt = len(model.temporal_pairs)
    temporal = {pair: TEMPORAL_LABELS[int(labels[k])] for k, pair in enumerate(model.temporal_pairs)}
    causal = {pair: CAUSAL_LABELS[int(labels[nt + j])] for j, pair in enumerate(model.causal_pairs)}
    return Solution(model.document_id, temporal, causal, model.value(temporal, causal),
                    nodes_expanded=total, ms=(time.perf_counter() - t0) * 1000.0)
