"""Command-line interface: ``tempcausal <command> [options]``.

Exit codes: 0 success, 1 usage error, 2 invalid input / infeasible model /
constraint violations, 3 oracle mismatch.  Tables go to stdout and
diagnostics to stderr.  JSON artifacts go to the ``--output`` file; commands
whose main product is JSON fall back to stdout when it is omitted.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Optional, Sequence

from . import __version__
from .evaluation import ClosureConflict, closure, evaluate, format_table, validate
from .experiments import (
    joint_rows,
    results_to_obj,
    results_to_rows,
    run_ablation,
    run_joint_study,
)
from .inference import (
    FULL,
    ConstraintConfig,
    InfeasibleError,
    ModelError,
    TooLargeError,
    build_model,
    solve_bruteforce,
    solve_exact,
    solve_local,
)
from .model import (
    DocumentError,
    RelationGraph,
    graph_to_obj,
    parse_dataset,
    restrict_window,
    serialize_dataset,
)
from .scoring import (
    PerceptronModel,
    accuracy,
    load_feature_vectors,
    load_training_set,
    score_distribution,
    train,
)
from .synth import SynthConfig, gen_dataset

log = logging.getLogger("tempcausal")

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_ORACLE = 0, 1, 2, 3
ORACLE_TOL = 1e-9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ------------------------------------------------------------------ helpers

def _read(path: Optional[str]) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write_json(obj: Any, path: Optional[str]) -> None:
    text = json.dumps(obj, indent=2, sort_keys=False) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        _write_text(Path(path), text)
        log.info("wrote %s", path)


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _load_config(path: Optional[str], base: ConstraintConfig = FULL) -> ConstraintConfig:
    if path is None:
        return base
    try:
        return ConstraintConfig.from_json(_read(path))
    except ValueError as exc:
        raise UsageError(f"bad --config: {exc}") from None


def _load_docs(args) -> list:
    docs = parse_dataset(_read(args.input))
    window = getattr(args, "window", None)
    return [restrict_window(d, window) for d in docs]


def _emit(objs: list, single: bool, path: Optional[str]) -> None:
    _write_json(objs[0] if single else objs, path)


def _is_single(text: str) -> bool:
    return text.lstrip().startswith("{")


def _graph_from_obj(obj: dict, where: str) -> RelationGraph:
    """Read ``{"temporal": [{pair, label}], "causal": [...]}`` (solutions and gold alike)."""
    try:
        temporal = [(e["pair"][0], e["pair"][1], e["label"]) for e in obj.get("temporal", [])]
        causal = [(e["pair"][0], e["pair"][1], e["label"]) for e in obj.get("causal", [])]
        return RelationGraph.from_edges(temporal, causal)
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise DocumentError(where, f"malformed graph: {exc}") from None


def _load_graphs(path: str) -> dict[str, RelationGraph]:
    """Solutions file (object or array) keyed by document id."""
    try:
        raw = json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise DocumentError("$", f"invalid JSON in {path}: {exc}") from None
    items = [raw] if isinstance(raw, dict) else raw
    if not isinstance(items, list):
        raise DocumentError("$", "expected a solution object or array")
    out = {}
    for k, obj in enumerate(items):
        where = f"$[{k}]" if isinstance(raw, list) else "$"
        if not isinstance(obj, dict) or "document" not in obj:
            raise DocumentError(where, "solution needs a 'document' field")
        out[obj["document"]] = _graph_from_obj(obj, where)
    return out


def _solve(doc, cfg: ConstraintConfig, solver: str):
    if solver == "local":
        return solve_local(doc)
    model = build_model(doc, cfg)
    return solve_bruteforce(model) if solver == "brute" else solve_exact(model)


# ----------------------------------------------------------------- commands

def cmd_gen(args) -> int:
    cfg = SynthConfig(n_events=args.n_events, n_timexes=args.n_timexes,
                      causal_density=args.causal_density, noise=args.noise,
                      vague_rate=args.vague_rate, seed=args.seed, rule_rate=args.rule_rate,
                      reversed_causality=args.reversed_causality, window=args.window)
    docs = gen_dataset(cfg, args.n_docs)
    text = serialize_dataset(docs) + "\n"
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        _write_text(Path(args.output), text)
    log.info("generated %d documents", len(docs))
    return EXIT_OK


def cmd_infer(args) -> int:
    text = _read(args.input)
    docs = [restrict_window(d, args.window) for d in parse_dataset(text)]
    cfg = _load_config(args.config)
    solutions, mismatch, broken = [], False, False
    for doc in docs:
        sol = _solve(doc, cfg, args.solver)
        if args.oracle and args.solver != "local":
            try:
                ref = solve_bruteforce(build_model(doc, cfg))
            except TooLargeError as exc:
                log.warning("%s: oracle skipped (%s)", doc.id, exc)
            else:
                if abs(ref.objective - sol.objective) > ORACLE_TOL:
                    log.error("%s: oracle mismatch, exact %.12f vs brute force %.12f",
                              doc.id, sol.objective, ref.objective)
                    mismatch = True
        # the local baseline makes no consistency promise, so nothing to check
        checked = cfg if args.solver != "local" else ConstraintConfig.none()
        for v in validate(sol.graph(), doc, checked):
            log.error("%s: %s", doc.id, v.describe())
            broken = True
        solutions.append(sol.to_obj(timing=args.timing))
    _emit(solutions, _is_single(text), args.output)
    if mismatch:
        return EXIT_ORACLE
    return EXIT_INVALID if broken else EXIT_OK


def cmd_eval(args) -> int:
    docs = _load_docs(args)
    cfg = _load_config(args.config)
    graphs = _load_graphs(args.system) if args.system else None
    rows, objs = [], []
    for doc in docs:
        if doc.gold is None:
            raise UsageError(f"{doc.id}: eval needs gold annotations")
        if graphs is not None:
            if doc.id not in graphs:
                raise UsageError(f"{doc.id}: no system graph in {args.system}")
            sys_graph = graphs[doc.id]
        else:
            sys_graph = _solve(doc, cfg, args.solver).graph()
        m = evaluate(doc.gold, sys_graph, doc, cfg)
        rows.append((doc.id, m))
        objs.append({"document": doc.id, **m.to_obj()})
    print(format_table(rows))
    if args.output:
        _write_json(objs[0] if len(objs) == 1 else objs, args.output)
    return EXIT_OK


def cmd_validate(args) -> int:
    docs = _load_docs(args)
    cfg = _load_config(args.config)
    graphs = _load_graphs(args.graph) if args.graph else None
    total, out = 0, []
    for doc in docs:
        if graphs is not None:
            graph = graphs.get(doc.id)
            if graph is None:
                raise UsageError(f"{doc.id}: no graph in {args.graph}")
        elif doc.gold is not None:
            graph = doc.gold
        else:
            raise UsageError(f"{doc.id}: nothing to validate (no gold and no --graph)")
        report = validate(graph, doc, cfg)
        total += len(report)
        print(f"{doc.id}: {len(report)} violation(s)")
        for v in report:
            print(f"  {v.describe()}")
        out.append({"document": doc.id, "violations": len(report), "by_kind": report.by_kind(),
                    "details": [v.describe() for v in report]})
    if args.output:
        _write_json(out, args.output)
    return EXIT_OK if total == 0 else EXIT_INVALID


def cmd_train(args) -> int:
    data = load_training_set(_read(args.input))
    model = train(data, args.epochs, args.seed)
    log.info("trained on %d examples, %d updates, training accuracy %.4f",
             len(data), model.updates, accuracy(model, data))
    _write_json(model.to_obj(), args.output)
    return EXIT_OK


def cmd_score(args) -> int:
    try:
        model = PerceptronModel.from_obj(json.loads(_read(args.model)))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"bad model file {args.model}: {exc}") from None
    vectors = load_feature_vectors(_read(args.input))
    out = []
    for feats in vectors:
        dist = score_distribution(model, feats)
        out.append({"dist": dist, "label": max(model.labels, key=lambda lab: dist[lab])})
    _write_json(out, args.output)
    return EXIT_OK


def _write_csv(path: Path, results, study: str) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["study", "system", "p", "r", "f1", "causal_accuracy", "violations",
                    "mcnemar_temporal_p", "mcnemar_causal_p", "fallbacks"])
        for r in results:
            m = r.mean
            w.writerow([study, r.name, f"{m.precision:.6f}", f"{m.recall:.6f}", f"{m.f1:.6f}",
                        "" if m.causal_accuracy is None else f"{m.causal_accuracy:.6f}",
                        m.violations,
                        "" if r.mcnemar_temporal is None else f"{r.mcnemar_temporal[1]:.6g}",
                        "" if r.mcnemar_causal is None else f"{r.mcnemar_causal[1]:.6g}",
                        r.fallbacks])


def cmd_ablate(args) -> int:
    if args.input:
        docs = _load_docs(args)
        source = {"input": args.input}
    else:
        cfg = SynthConfig(n_events=args.n_events, n_timexes=args.n_timexes,
                          causal_density=args.causal_density, noise=args.noise,
                          vague_rate=args.vague_rate, seed=args.seed,
                          reversed_causality=args.reversed_causality, window=args.window)
        docs = gen_dataset(cfg, args.n_docs)
        source = {"synthetic": {"n_docs": args.n_docs, **asdict(cfg)}}
    report: dict[str, Any] = {"source": source, "n_docs": len(docs)}
    tables = []
    if args.study in ("ablation", "both"):
        abl = run_ablation(docs, workers=args.workers)
        report["ablation"] = results_to_obj(abl)
        tables.append(("ablation", abl, results_to_rows(abl)))
    if args.study in ("joint", "both"):
        joint = run_joint_study(docs, workers=args.workers)
        report["joint"] = results_to_obj(joint)
        tables.append(("joint", joint, joint_rows(joint)))

    for name, results, rows in tables:
        print(format_table(rows, title=f"[{name}] mean over {len(docs)} documents"))
        for r in results:
            if r.mcnemar_temporal is not None:
                print(f"  McNemar {r.name}: temporal stat={r.mcnemar_temporal[0]:.3f} "
                      f"p={r.mcnemar_temporal[1]:.3g}"
                      + ("" if r.mcnemar_causal is None else
                         f", causal stat={r.mcnemar_causal[0]:.3f} p={r.mcnemar_causal[1]:.3g}"))
        print()

    if not args.output:
        return EXIT_OK
    _write_json(report, args.output)
    if args.output != "-" and not args.no_figures:
        from .plotting import plot_f1_distribution, plot_metrics

        base = Path(args.output)
        for name, results, rows in tables:
            _write_csv(base.with_name(f"{base.stem}_{name}.csv"), results, name)
            plot_metrics(rows, base.with_name(f"{base.stem}_{name}.png"), title=name)
            plot_f1_distribution(results, base.with_name(f"{base.stem}_{name}_f1.png"))
        log.info("wrote CSV and figures next to %s", base)
    return EXIT_OK


def cmd_closure(args) -> int:
    """Close either the gold graphs of a dataset or the graphs in a solutions file."""
    text = _read(args.input)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError("$", f"invalid JSON: {exc}") from None
    first = raw[0] if isinstance(raw, list) and raw else raw
    if isinstance(first, dict) and "nodes" in first:
        graphs = {}
        for doc in parse_dataset(text):
            if doc.gold is None:
                raise UsageError(f"{doc.id}: no gold graph to close")
            graphs[doc.id] = doc.gold
    else:
        graphs = _load_graphs(args.input)
    out = []
    for doc_id, g in graphs.items():
        closed = closure(g, strict=not args.lenient)
        added = len(closed.temporal) - len(g.temporal)
        print(f"{doc_id}: {len(g.temporal)} edges, {added} derived", file=sys.stderr)
        out.append({"document": doc_id, **graph_to_obj(closed)})
    _write_json(out[0] if not isinstance(raw, list) else out, args.output)
    return EXIT_OK


# ------------------------------------------------------------------- parser

def _add_synth_args(p, n_docs_default=None):
    if n_docs_default is not None:
        p.add_argument("--n-docs", type=int, default=n_docs_default)
    p.add_argument("--n-events", type=int, default=6)
    p.add_argument("--n-timexes", type=int, default=2)
    p.add_argument("--causal-density", type=float, default=0.0)
    p.add_argument("--noise", type=float, default=0.5)
    p.add_argument("--vague-rate", type=float, default=0.0)
    p.add_argument("--reversed-causality", type=float, default=0.0,
                   help="fraction of causal links whose cause follows the effect")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("-i", "--input", help="input file ('-' for stdin)")
    common.add_argument("-o", "--output", help="output JSON file (stdout when omitted)")
    common.add_argument("--config", help="ConstraintConfig JSON file")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--window", type=int, default=None,
                        help="only consider pairs at most this many sentences apart")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="tempcausal", description=(
        "Globally consistent temporal and causal relation graphs from pairwise scores."))
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("gen", parents=[common], help="generate a synthetic dataset")
    _add_synth_args(p, n_docs_default=10)
    p.add_argument("--rule-rate", type=float, default=0.1)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("infer", parents=[common], help="solve documents")
    p.add_argument("--solver", choices=("exact", "local", "brute"), default="exact")
    p.add_argument("--oracle", action="store_true",
                   help="cross-check against brute force; exit 3 on mismatch")
    p.add_argument("--timing", action="store_true", help="record wall-clock ms in stats")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("eval", parents=[common], help="score system graphs against gold")
    p.add_argument("--system", help="solutions file; inference is run when omitted")
    p.add_argument("--solver", choices=("exact", "local"), default="exact")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("validate", parents=[common], help="check graphs against constraints")
    p.add_argument("--graph", help="solutions file; the gold graphs are checked when omitted")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("train", parents=[common], help="train an averaged perceptron")
    p.add_argument("--epochs", type=int, default=10)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("score", parents=[common], help="soft-max distributions from a model")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("ablate", parents=[common], help="ablation and joint-study report")
    _add_synth_args(p, n_docs_default=50)
    p.add_argument("--study", choices=("ablation", "joint", "both"), default="both")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("closure", parents=[common], help="transitive closure of a graph")
    p.add_argument("--lenient", action="store_true", help="keep the first derivation on conflict")
    p.set_defaults(func=cmd_closure)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:   # --help, --version and usage errors
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"tempcausal: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DocumentError, InfeasibleError, ModelError, ClosureConflict) as exc:
        print(f"tempcausal: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"tempcausal: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
