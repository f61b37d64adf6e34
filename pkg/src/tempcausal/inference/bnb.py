"""Exact best-first branch and bound with domain propagation.

Domains are bitmasks over label ranks.  A node triple ``a < b < c`` with
canonical variables ``ab``, ``bc``, ``ac`` is a single ternary constraint
whose allowed tuples satisfy the transitivity table for every choice of
middle node; it is propagated to generalized arc consistency.  Causal links
are binary: ``c`` needs ``ab = b`` and ``cbar`` needs ``ab = a``.

The bound is the sum over variables of the best score left in each domain,
which never underestimates any completion.
"""

from __future__ import annotations

import heapq
import time
from functools import lru_cache
from itertools import product

from ..algebra import CAUSAL_LABELS, TEMPORAL_LABELS, CausalRel, TemporalRel, reverse_temporal, trans
from .ilp import IlpModel, InfeasibleError, Solution

FULL_T = (1 << len(TEMPORAL_LABELS)) - 1
FULL_C = (1 << len(CAUSAL_LABELS)) - 1
BIT_B = 1 << TemporalRel.BEFORE.rank
BIT_A = 1 << TemporalRel.AFTER.rank
BIT_C = 1 << CausalRel.CAUSES.rank
BIT_CBAR = 1 << CausalRel.CAUSED_BY.rank
BIT_NULL = 1 << CausalRel.NULL.rank

DIVE_LIMIT = 20000


def _allowed_triples() -> list[tuple[int, int, int]]:
    out = []
    for x, y, z in product(TEMPORAL_LABELS, repeat=3):
        if (z in trans(x, y)
                and y in trans(reverse_temporal(x), z)
                and x in trans(z, reverse_temporal(y))):
            out.append((1 << x.rank, 1 << y.rank, 1 << z.rank))
    return out


ALLOWED = _allowed_triples()


@lru_cache(maxsize=None)
def gac(dx: int, dy: int, dz: int) -> tuple[int, int, int]:
    nx = ny = nz = 0
    for bx, by, bz in ALLOWED:
        if bx & dx and by & dy and bz & dz:
            nx |= bx
            ny |= by
            nz |= bz
    return nx, ny, nz


def _link(dw: int, dy: int) -> tuple[int, int]:
    if not dy & BIT_B:
        dw &= ~BIT_C
    if not dy & BIT_A:
        dw &= ~BIT_CBAR
    if dw == BIT_C:
        dy &= BIT_B
    elif dw == BIT_CBAR:
        dy &= BIT_A
    elif not dw & BIT_NULL:
        dy &= BIT_B | BIT_A
    return dw, dy


class _Problem:
    """Flattened view of a model: variables ``0..T-1`` temporal, ``T..`` causal."""

    def __init__(self, model: IlpModel):
        self.model = model
        nt, nc = len(model.temporal_pairs), len(model.causal_pairs)
        self.nt = nt
        self.n = nt + nc
        self.labels = [TEMPORAL_LABELS] * nt + [CAUSAL_LABELS] * nc
        scores = [[model.p[k][r] for r in TEMPORAL_LABELS] for k in range(nt)]
        scores += [[model.q[j][c] for c in CAUSAL_LABELS] for j in range(nc)]
        self.scores = scores
        # best score per (variable, domain mask)
        self.best = []
        for sc in scores:
            table = [float("-inf")] * (1 << len(sc))
            for mask in range(1, len(table)):
                table[mask] = max(sc[b] for b in range(len(sc)) if mask >> b & 1)
            self.best.append(table)

        # constraints: ("t", ab, bc, ac) or ("l", w, y), indices into the flat variables
        self.constraints = [("t", ab, bc, ac) for ab, bc, ac in model.triples]
        self.constraints += [("l", nt + j, k) for j, k in model.links]
        self.watch = [[] for _ in range(self.n)]
        for ci, con in enumerate(self.constraints):
            for var in con[1:]:
                self.watch[var].append(ci)

        # branching order: by pair, temporal before causal on the same pair
        keyed = [(model.temporal_pairs[k], 0, k) for k in range(nt)]
        keyed += [(model.causal_pairs[j], 1, nt + j) for j in range(nc)]
        self.order = [var for _, _, var in sorted(keyed)]
        # value order: highest score first, canonical rank on ties
        self.value_order = [sorted(range(len(sc)), key=lambda b, sc=sc: (-sc[b], b)) for sc in scores]

    def root_domains(self, pins_t=None, pins_c=None) -> list[int]:
        m = self.model
        pins_t = m.temporal_pins if pins_t is None else pins_t
        pins_c = m.causal_pins if pins_c is None else pins_c
        dom = [FULL_T] * self.nt + [FULL_C] * (self.n - self.nt)
        for pin in pins_t:
            dom[pin.var] &= 1 << pin.label.rank
        for pin in pins_c:
            dom[self.nt + pin.var] &= 1 << pin.label.rank
        return dom

    def propagate(self, dom: list[int], changed=None) -> bool:
        """Shrink ``dom`` in place; False when some domain empties."""
        if any(d == 0 for d in dom):
            return False
        if changed is None:
            queue = list(range(len(self.constraints)))
        else:
            queue = list(self.watch[changed])
        queued = set(queue)
        cons, watch = self.constraints, self.watch
        while queue:
            ci = queue.pop()
            queued.discard(ci)
            con = cons[ci]
            if con[0] == "t":
                _, x, y, z = con
                new = gac(dom[x], dom[y], dom[z])
                vars_ = (x, y, z)
            else:
                _, x, y = con
                new = _link(dom[x], dom[y])
                vars_ = (x, y)
            for var, nd in zip(vars_, new):
                if nd != dom[var]:
                    if nd == 0:
                        return False
                    dom[var] = nd
                    for cj in watch[var]:
                        if cj != ci and cj not in queued:
                            queued.add(cj)
                            queue.append(cj)
        return True

    def bound(self, dom: list[int]) -> float:
        best = self.best
        return sum(best[v][dom[v]] for v in range(self.n))

    def branch_var(self, dom: list[int]) -> int:
        for var in self.order:
            d = dom[var]
            if d & (d - 1):
                return var
        return -1

    def children(self, dom: list[int], var: int):
        for bit in self.value_order[var]:
            if dom[var] >> bit & 1:
                child = list(dom)
                child[var] = 1 << bit
                if self.propagate(child, var):
                    yield child

    def dive(self, dom: list[int]):
        """Depth-first search for a first feasible completion (the incumbent)."""
        budget = [DIVE_LIMIT]

        def rec(d):
            budget[0] -= 1
            if budget[0] < 0:
                return None
            var = self.branch_var(d)
            if var < 0:
                return d
            for child in self.children(d, var):
                found = rec(child)
                if found is not None:
                    return found
            return None

        return rec(dom)

    def decode(self, dom: list[int]):
        m = self.model
        temporal, causal = {}, {}
        for var in range(self.n):
            label = self.labels[var][dom[var].bit_length() - 1]
            if var < self.nt:
                temporal[m.temporal_pairs[var]] = label
            else:
                causal[m.causal_pairs[var - self.nt]] = label
        return temporal, causal


def _explain_infeasible(prob: _Problem) -> InfeasibleError:
    m = prob.model
    pins = [("t", p) for p in m.temporal_pins] + [("c", p) for p in m.causal_pins]
    for (k1, p1), (k2, p2) in ((u, w) for n, u in enumerate(pins) for w in pins[n + 1:]):
        t_pins = [p for k, p in ((k1, p1), (k2, p2)) if k == "t"]
        c_pins = [p for k, p in ((k1, p1), (k2, p2)) if k == "c"]
        dom = prob.root_domains(t_pins, c_pins)
        if not prob.propagate(dom):
            a, b = p1.describe(m), p2.describe(m)
            return InfeasibleError(f"{m.document_id}: infeasible model, {a} conflicts with {b}", (a, b))
    names = tuple(p.describe(m) for _, p in pins)
    return InfeasibleError(f"{m.document_id}: infeasible model; pins involved: {', '.join(names)}", names)


def solve_exact(model: IlpModel) -> Solution:
    t0 = time.perf_counter()
    prob = _Problem(model)
    root = prob.root_domains()
    if not prob.propagate(root):
        raise _explain_infeasible(prob)

    incumbent = prob.dive(root)
    best_val = prob.bound(incumbent) if incumbent is not None else float("-inf")

    counter = 0
    heap = [(-prob.bound(root), counter, root)]
    expanded = 0
    result = None
    while heap:
        neg_bound, _, dom = heapq.heappop(heap)
        expanded += 1
        if -neg_bound < best_val:
            continue
        var = prob.branch_var(dom)
        if var < 0:
            result = dom
            break
        for child in prob.children(dom, var):
            b = prob.bound(child)
            if b < best_val:
                continue
            if prob.branch_var(child) < 0 and b > best_val:
                best_val = b
            counter += 1
            heapq.heappush(heap, (-b, counter, child))
    if result is None:
        if incumbent is None:
            raise _explain_infeasible(prob)
        result = incumbent

    temporal, causal = prob.decode(result)
    return Solution(model.document_id, temporal, causal, model.value(temporal, causal),
                    nodes_expanded=expanded, ms=(time.perf_counter() - t0) * 1000.0)
