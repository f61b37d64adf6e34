import json

import pytest

from tempcausal.cli import main
from tempcausal.model import parse_dataset


@pytest.fixture
def dataset(tmp_path):
    path = tmp_path / "data.json"
    assert main(["gen", "--n-docs", "3", "--causal-density", "0.3", "--seed", "2", "-o", str(path)]) == 0
    return path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_is_reproducible(tmp_path, dataset):
    again = tmp_path / "again.json"
    main(["gen", "--n-docs", "3", "--causal-density", "0.3", "--seed", "2", "-o", str(again)])
    assert again.read_bytes() == dataset.read_bytes()
    assert len(parse_dataset(dataset.read_text())) == 3


def test_infer_then_validate_and_eval(tmp_path, dataset, capsys):
    sols = tmp_path / "sols.json"
    code, _, _ = run(["infer", "-i", dataset, "-o", sols], capsys)
    assert code == 0
    objs = json.loads(sols.read_text())
    assert [o["document"] for o in objs] == ["synth-2-000", "synth-2-001", "synth-2-002"]
    assert all(o["stats"]["ms"] is None for o in objs)

    code, out, _ = run(["validate", "-i", dataset, "--graph", sols], capsys)
    assert code == 0 and out.count("0 violation(s)") == 3

    metrics = tmp_path / "m.json"
    code, out, _ = run(["eval", "-i", dataset, "--system", sols, "-o", metrics], capsys)
    assert code == 0 and "CausalAcc" in out
    assert {"temporal", "causal_accuracy", "violations"} <= set(json.loads(metrics.read_text())[0])


def test_infer_output_is_byte_stable(tmp_path, dataset):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["infer", "-i", str(dataset), "-o", str(a)])
    main(["infer", "-i", str(dataset), "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_infer_single_document_with_oracle_and_timing(tmp_path, capsys):
    doc = tmp_path / "doc.json"
    doc.write_text(json.dumps({
        "id": "tiny", "nodes": [{"id": "e1", "kind": "event"}, {"id": "e2", "kind": "event"},
                                {"id": "e3", "kind": "event"}],
        "scores": {"temporal": [
            {"pair": ["e1", "e2"], "dist": {"b": .8, "a": .1, "i": .025, "ii": .025, "s": .025, "v": .025}},
            {"pair": ["e2", "e3"], "dist": {"b": .8, "a": .1, "i": .025, "ii": .025, "s": .025, "v": .025}},
            {"pair": ["e1", "e3"], "dist": {"b": .3, "a": .6, "i": .025, "ii": .025, "s": .025, "v": .025}}]}}))
    code, out, _ = run(["infer", "-i", doc, "--oracle", "--timing"], capsys)
    assert code == 0
    sol = json.loads(out)
    assert sol["document"] == "tiny" and isinstance(sol["stats"]["ms"], float)
    assert {"pair": ["e1", "e3"], "label": "b"} in sol["temporal"]


def test_local_solver_and_config(tmp_path, dataset, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"transitivity": false, "causal_link": false}')
    code, out, _ = run(["infer", "-i", dataset, "--config", cfg], capsys)
    assert code == 0 and json.loads(out)
    code, _, _ = run(["infer", "-i", dataset, "--solver", "local"], capsys)
    assert code == 0


def test_validate_flags_broken_graph(tmp_path, capsys):
    doc = tmp_path / "doc.json"
    gold = {"temporal": [{"pair": ["e1", "e2"], "label": "b"}, {"pair": ["e2", "e3"], "label": "b"},
                         {"pair": ["e1", "e3"], "label": "a"}]}
    doc.write_text(json.dumps({"id": "g", "nodes": [{"id": n, "kind": "event"} for n in ("e1", "e2", "e3")],
                               "gold": gold}))
    code, out, _ = run(["validate", "-i", doc], capsys)
    assert code == 2 and "transitivity" in out


def test_train_and_score(tmp_path, capsys):
    train = tmp_path / "train.json"
    train.write_text(json.dumps([{"features": {"x": 1.0}, "label": "c"},
                                 {"features": {"x": -1.0}, "label": "cbar"}] * 5))
    model = tmp_path / "model.json"
    assert run(["train", "-i", train, "--epochs", "5", "-o", model], capsys)[0] == 0
    feats = tmp_path / "feats.json"
    feats.write_text(json.dumps([{"features": {"x": 2.0}}]))
    code, out, _ = run(["score", "--model", model, "-i", feats], capsys)
    assert code == 0
    (row,) = json.loads(out)
    assert row["label"] == "c" and abs(sum(row["dist"].values()) - 1) < 1e-9


def test_closure_of_gold(tmp_path, capsys):
    doc = tmp_path / "doc.json"
    gold = {"temporal": [{"pair": ["e1", "e2"], "label": "b"}, {"pair": ["e2", "e3"], "label": "b"}]}
    doc.write_text(json.dumps({"id": "g", "nodes": [{"id": n, "kind": "event"} for n in ("e1", "e2", "e3")],
                               "gold": gold}))
    code, out, _ = run(["closure", "-i", doc], capsys)
    assert code == 0
    assert {"pair": ["e1", "e3"], "label": "b"} in json.loads(out)["temporal"]


def test_ablate_writes_report_csv_and_figures(tmp_path, capsys):
    out = tmp_path / "report" / "abl.json"
    code, stdout, _ = run(["ablate", "--n-docs", "4", "--causal-density", "0.3", "--seed", "1",
                           "-o", out], capsys)
    assert code == 0
    assert "+causal" in stdout and "gold temporal" in stdout and "McNemar" in stdout
    report = json.loads(out.read_text())
    assert [r["name"] for r in report["ablation"]] == ["baseline", "+transitivity", "+ET", "+rules", "+causal"]
    for name in ("abl_ablation.csv", "abl_joint.csv", "abl_ablation.png", "abl_joint.png"):
        assert (out.parent / name).stat().st_size > 0
    assert (out.parent / "abl_ablation.csv").read_text().startswith("study,system,p,r,f1")


def test_usage_errors_exit_1(tmp_path, capsys):
    assert run(["nonsense"], capsys)[0] == 1
    assert run(["infer", "--bogus-flag"], capsys)[0] == 1
    assert run(["infer", "-i", tmp_path / "missing.json"], capsys)[0] == 1
    bad_cfg = tmp_path / "cfg.json"
    bad_cfg.write_text('{"transitivty": true}')
    doc = tmp_path / "d.json"
    doc.write_text('{"id": "x", "nodes": []}')
    assert run(["infer", "-i", doc, "--config", bad_cfg], capsys)[0] == 1


def test_invalid_documents_exit_2(tmp_path, capsys):
    doc = tmp_path / "d.json"
    doc.write_text('{"id": "x", "nodes": [{"id": "e1", "kind": "event"}, {"id": "e1", "kind": "event"}]}')
    code, _, err = run(["infer", "-i", doc], capsys)
    assert code == 2 and "$.nodes[1].id" in err


def test_infeasible_pins_exit_2(tmp_path, capsys):
    doc = tmp_path / "d.json"
    one_hot = {"b": 1, "a": 0, "i": 0, "ii": 0, "s": 0, "v": 0}
    doc.write_text(json.dumps({
        "id": "x", "nodes": [{"id": n, "kind": "event"} for n in ("e1", "e2", "e3")],
        "scores": {"temporal": [{"pair": p, "dist": one_hot} for p in (["e1", "e2"], ["e2", "e3"], ["e1", "e3"])]},
        "rules": [{"pair": ["e1", "e2"], "label": "b"}, {"pair": ["e2", "e3"], "label": "b"},
                  {"pair": ["e1", "e3"], "label": "a"}]}))
    code, _, err = run(["infer", "-i", doc], capsys)
    assert code == 2 and "infeasible" in err


def test_oracle_mismatch_exit_3(tmp_path, capsys, monkeypatch, caplog):
    import tempcausal.cli as cli
    from tempcausal.inference import solve_exact

    def off_by_one(model):
        sol = solve_exact(model)
        sol.objective += 1.0
        return sol

    monkeypatch.setattr(cli, "solve_bruteforce", off_by_one)
    doc = tmp_path / "d.json"
    doc.write_text(json.dumps({"id": "x", "nodes": [{"id": "e1", "kind": "event"}, {"id": "e2", "kind": "event"}],
                               "scores": {"temporal": [{"pair": ["e1", "e2"], "dist": {
                                   "b": 1, "a": 0, "i": 0, "ii": 0, "s": 0, "v": 0}}]}}))
    code, _, err = run(["infer", "-i", doc, "--oracle"], capsys)
    assert code == 3 and "oracle mismatch" in err + caplog.text
