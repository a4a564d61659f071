import csv
import io
import json

import pytest

from srcdetect.experiment import (
    REPORT_HEADER,
    ConfigError,
    ExperimentConfig,
    ReportRow,
    aggregate,
    emit_report,
    render_histogram,
    render_report,
    run_experiment,
    run_trial,
    run_trials,
    trial_graph,
    worker_count,
)


def tree_config(**overrides) -> ExperimentConfig:
    data = {
        "graph": {"family": "regular_tree", "n": 200, "d": 4},
        "target_size": 30,
        "estimators": ["multi_end_vertex", "top_k", "rumor_center"],
        "trials": 12,
        "seed": 5,
    }
    data.update(overrides)
    return ExperimentConfig.from_dict(data)


def read_rows(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


# -- config -----------------------------------------------------------------


def test_config_validation():
    with pytest.raises(ConfigError):
        tree_config(trials=0)
    with pytest.raises(ConfigError):
        tree_config(estimators=["nope"])
    with pytest.raises(ConfigError):
        tree_config(graph={"family": "hypercube", "n": 8})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"graph": {"family": "line", "n": 4}, "target_size": 2, "estimators": ["sdc"], "colour": 1})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"graph": {"family": "line", "n": 4}})
    with pytest.raises(ConfigError):
        tree_config(max_end_vertex_fraction="0")


def test_config_roundtrip():
    cfg = tree_config()
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
    assert cfg.canonical_methods() == ("multi_end_vertex", "top_k", "rumor_center")


def test_target_larger_than_graph():
    cfg = ExperimentConfig.from_dict({"graph": {"family": "line", "n": 4}, "target_size": 9, "estimators": ["sdc"]})
    with pytest.raises(ConfigError):
        run_trial(cfg, 0)


def test_threads_override(monkeypatch):
    cfg = tree_config(workers=3)
    assert worker_count(cfg) == 3
    monkeypatch.setenv("THREADS", "2")
    assert worker_count(cfg) == 2
    monkeypatch.setenv("THREADS", "zero")
    with pytest.raises(ConfigError):
        worker_count(cfg)


# -- trials -----------------------------------------------------------------


def test_smoke_two_node_spread():
    cfg = ExperimentConfig.from_dict({"graph": {"family": "line", "n": 5}, "target_size": 2, "estimators": ["rumor_center", "jordan"]})
    rows = run_trials(cfg)
    assert len(rows) == 2
    assert all(r.error in (0, 1) for r in rows)


def test_top_k_matches_alg4_size():
    rows = run_trials(tree_config())
    by_trial = {}
    for r in rows:
        by_trial.setdefault(r.trial, {})[r.method] = r
    for methods in by_trial.values():
        assert methods["top_k"].kappa_size == methods["multi_end_vertex"].kappa_size


def test_top_k_without_alg4_listed():
    cfg = tree_config(estimators=["top_k"], trials=3)
    assert {r.method for r in run_trials(cfg)} == {"top_k"}


def test_rows_complete_and_ordered():
    cfg = tree_config()
    rows = run_trials(cfg)
    assert len(rows) == cfg.trials * 3
    assert [(r.trial, r.method) for r in rows] == [
        (t, m) for t in range(cfg.trials) for m in cfg.canonical_methods()
    ]
    assert all(r.error >= 0 and r.runtime_ms is None for r in rows)


def test_regenerated_graphs_differ_per_trial():
    cfg = ExperimentConfig.from_dict(
        {
            "graph": {"family": "random_bounded_degree_tree", "n": 60, "d_max": 4},
            "target_size": 20,
            "estimators": ["multi_end_vertex"],
            "trials": 3,
            "regenerate_graph": True,
        }
    )
    edges = [tuple(trial_graph(cfg, t).edges()) for t in range(3)]
    assert len(set(edges)) == 3
    assert tuple(trial_graph(cfg, 1).edges()) == edges[1]


def test_edge_list_graph(tmp_path):
    path = tmp_path / "g.edges"
    path.write_text("".join(f"{i} {i + 1}\n" for i in range(9)), encoding="utf-8")
    cfg = ExperimentConfig.from_dict({"graph": {"edges": str(path)}, "target_size": 5, "estimators": ["jordan"], "trials": 2})
    assert len(run_trials(cfg)) == 2


def test_timing_fills_runtime():
    rows = run_trials(tree_config(timing=True, trials=2))
    assert all(r.runtime_ms is not None and r.runtime_ms >= 0 for r in rows)


# -- reports ----------------------------------------------------------------


def test_header_only_report():
    assert render_report([]) == ",".join(REPORT_HEADER) + "\n"
    assert aggregate([]) == {}
    assert render_histogram({}) == ""


def test_aggregates_recompute_from_rows(tmp_path):
    cfg = tree_config(out_dir=str(tmp_path))
    files, agg = run_experiment(cfg)
    rows = read_rows(files.report_csv.read_text(encoding="utf-8"))
    assert len(rows) == cfg.trials * 3
    for method, summary in agg.items():
        errors = [int(r["error"]) for r in rows if r["method"] == method]
        assert summary["trials"] == len(errors)
        assert summary["mean_error"] == pytest.approx(sum(errors) / len(errors), rel=1e-5)
        assert summary["detection_rate"] == pytest.approx(errors.count(0) / len(errors), rel=1e-5)
        assert summary["p_error_le_1"] == pytest.approx(sum(e <= 1 for e in errors) / len(errors), rel=1e-5)
        assert sum(summary["histogram"].values()) == len(errors)
    doc = json.loads(files.summary_json.read_text(encoding="utf-8"))
    assert doc["methods"] == agg
    assert "workers" not in doc["config"] and "out_dir" not in doc["config"]
    hist = files.hist_dat.read_text(encoding="utf-8")
    assert "# multi_end_vertex" in hist


def test_report_cardinality():
    rows = [ReportRow(t, m, 1, t % 3) for t in range(1000) for m in ("a", "b")]
    assert len(render_report(rows).splitlines()) == 2001


def test_runtime_formatting():
    assert ReportRow(0, "a", 1, 0, 1.23456789).cells()[-1] == "1.23457"
    assert ReportRow(0, "a", 1, 0).cells()[-1] == "NA"


def test_emit_creates_directory(tmp_path):
    files = emit_report([], {}, tmp_path / "deep" / "dir", "x")
    assert files.report_csv.exists()


@pytest.mark.slow
def test_byte_identical_across_workers(tmp_path):
    outputs = []
    for workers in (1, 8):
        out = tmp_path / f"w{workers}"
        cfg = tree_config(trials=24, out_dir=str(out), workers=workers)
        files, _ = run_experiment(cfg)
        outputs.append(tuple(p.read_bytes() for p in (files.report_csv, files.summary_json, files.hist_dat)))
    assert outputs[0] == outputs[1]
    again = tmp_path / "again"
    files, _ = run_experiment(tree_config(trials=24, out_dir=str(again), workers=1))
    assert files.report_csv.read_bytes() == outputs[0][0]
