"""Ablation and joint-vs-separate experiments over a dataset with gold graphs."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from statistics import fmean
from typing import Optional, Sequence

from .evaluation import (
    MetricsReport,
    causal_correctness,
    mcnemar,
    temporal_awareness,
    temporal_correctness,
    validate,
)
from .inference import (
    FULL,
    LOCAL,
    ConstraintConfig,
    InfeasibleError,
    build_model,
    solve_exact,
    solve_local,
)
from .model import Document

log = logging.getLogger(__name__)

LOCAL_SOLVER = "local"


@dataclass(frozen=True)
class Preset:
    name: str
    config: ConstraintConfig
    solver: str = "exact"


_TRANS = LOCAL.with_(symmetry=True, transitivity=True)
_ET = _TRANS.with_(et=True, tt=True)
_RULES = _ET.with_(rules=True)

ABLATION: tuple[Preset, ...] = (
    Preset("baseline", LOCAL, LOCAL_SOLVER),
    Preset("+transitivity", _TRANS),
    Preset("+ET", _ET),
    Preset("+rules", _RULES),
    Preset("+causal", _RULES.with_(causal_link=True)),
)

TEMPORAL_ONLY = Preset("temporal only", FULL.with_(causal_link=False))
CAUSAL_ONLY = Preset("causal only", LOCAL, LOCAL_SOLVER)
JOINT = Preset("joint", FULL)
GOLD_TEMPORAL = Preset("gold temporal", FULL.with_(enforce_gold_temporal=True))
GOLD_CAUSAL = Preset("gold causal", FULL.with_(enforce_gold_causal=True))
JOINT_STUDY: tuple[Preset, ...] = (TEMPORAL_ONLY, CAUSAL_ONLY, JOINT, GOLD_TEMPORAL, GOLD_CAUSAL)


@dataclass
class PresetResult:
    name: str
    config: ConstraintConfig
    mean: MetricsReport
    micro: MetricsReport
    per_doc_f1: list[float]
    temporal_flags: list[bool] = field(repr=False)
    causal_flags: list[bool] = field(repr=False)
    mcnemar_temporal: Optional[tuple[float, float]] = None
    mcnemar_causal: Optional[tuple[float, float]] = None
    fallbacks: int = 0

    def to_obj(self) -> dict:
        obj = {
            "name": self.name,
            "config": self.config.to_obj(),
            "mean": self.mean.to_obj(),
            "micro": self.micro.to_obj(),
            "per_doc_f1": self.per_doc_f1,
            "fallbacks": self.fallbacks,
        }
        if self.mcnemar_temporal is not None:
            obj["mcnemar_temporal"] = {"stat": self.mcnemar_temporal[0], "p": self.mcnemar_temporal[1]}
        if self.mcnemar_causal is not None:
            obj["mcnemar_causal"] = {"stat": self.mcnemar_causal[0], "p": self.mcnemar_causal[1]}
        return obj


def _solve(doc: Document, preset: Preset):
    """Solve one document; returns ``(solution, config actually used)``.

    Gold causal pins can contradict gold-derived temporal pins when the data
    holds effects that precede their cause.  Such a document is re-solved
    without the causal link, and the fallback is counted by the caller.
    """
    if preset.solver == LOCAL_SOLVER:
        return solve_local(doc), preset.config
    try:
        return solve_exact(build_model(doc, preset.config)), preset.config
    except InfeasibleError as err:
        if not preset.config.causal_link:
            raise
        log.warning("%s; solving without the causal link", err)
        cfg = preset.config.with_(causal_link=False)
        return solve_exact(build_model(doc, cfg)), cfg


def _doc_outcome(args):
    doc, preset = args
    sol, cfg = _solve(doc, preset)
    sys = sol.graph()
    aw = temporal_awareness(doc.gold, sys)
    n_viol = len(validate(sys, doc, cfg))
    return (aw, temporal_correctness(doc.gold, sys), causal_correctness(doc.gold, sys), n_viol,
            cfg is not preset.config)


def evaluate_preset(docs: Sequence[Document], preset: Preset, workers: int = 1) -> PresetResult:
    for d in docs:
        if d.gold is None:
            raise ValueError(f"{d.id}: experiments need gold graphs")
    jobs = [(d, preset) for d in docs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_doc_outcome, jobs, chunksize=4))
    else:
        outcomes = [_doc_outcome(j) for j in jobs]

    t_flags, c_flags = [], []
    n_sys = n_gold = hit_p = hit_r = n_viol = 0
    fallbacks = sum(1 for *_, fb in outcomes if fb)
    for aw, tf, cf, nv, _ in outcomes:
        t_flags += tf
        c_flags += cf
        n_sys += aw.n_sys
        n_gold += aw.n_gold
        hit_p += aw.matched_sys
        hit_r += aw.matched_gold
        n_viol += nv
    acc = sum(c_flags) / len(c_flags) if c_flags else None
    per_doc = [aw for aw, *_ in outcomes]
    mean = MetricsReport(fmean(a.precision for a in per_doc), fmean(a.recall for a in per_doc),
                         fmean(a.f1 for a in per_doc), acc, n_sys, n_gold, hit_p, hit_r, n_viol)
    p = hit_p / n_sys if n_sys else 0.0
    r = hit_r / n_gold if n_gold else 0.0
    micro = MetricsReport(p, r, 2 * p * r / (p + r) if p + r else 0.0, acc, n_sys, n_gold, hit_p, hit_r, n_viol)
    return PresetResult(preset.name, preset.config, mean, micro, [a.f1 for a in per_doc], t_flags, c_flags,
                        fallbacks=fallbacks)


def run_ablation(docs: Sequence[Document], presets: Sequence[Preset] = ABLATION,
                 workers: int = 1) -> list[PresetResult]:
    """Evaluate each preset; McNemar compares every preset with the one before it."""
    results = [evaluate_preset(docs, p, workers) for p in presets]
    for prev, cur in zip(results, results[1:]):
        cur.mcnemar_temporal = mcnemar(prev.temporal_flags, cur.temporal_flags)
        if prev.causal_flags and cur.causal_flags:
            cur.mcnemar_causal = mcnemar(prev.causal_flags, cur.causal_flags)
    return results


def run_joint_study(docs: Sequence[Document], workers: int = 1) -> list[PresetResult]:
    """Temporal only, causal only, joint and the two gold-enforced joint runs.

    The joint row carries McNemar tests against temporal only (temporal
    flags) and causal only (causal flags).
    """
    results = [evaluate_preset(docs, p, workers) for p in JOINT_STUDY]
    t_only, c_only, joint = results[0], results[1], results[2]
    joint.mcnemar_temporal = mcnemar(t_only.temporal_flags, joint.temporal_flags)
    if joint.causal_flags:
        joint.mcnemar_causal = mcnemar(c_only.causal_flags, joint.causal_flags)
    return results


def results_to_obj(results: Sequence[PresetResult]) -> list[dict]:
    return [r.to_obj() for r in results]


def results_to_rows(results: Sequence[PresetResult]) -> list[tuple[str, MetricsReport]]:
    return [(r.name, r.mean) for r in results]


def joint_rows(results: Sequence[PresetResult]) -> list[tuple[str, MetricsReport]]:
    """Rows for the joint study, hiding the metric each single-task baseline does not target."""
    rows = []
    for r in results:
        m = replace(r.mean)
        if r.name == TEMPORAL_ONLY.name:
            m.causal_accuracy = None
        elif r.name == CAUSAL_ONLY.name:
            m.precision = m.recall = m.f1 = None
        rows.append((r.name, m))
    return rows
