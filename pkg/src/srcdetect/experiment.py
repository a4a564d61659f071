"""Seeded batch experiments: simulate spreads, run estimators, write reports."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Iterable

import numpy as np

from .estimators import (
    Estimate,
    EstimatorKind,
    algorithm4_multi_end_vertex,
    estimate,
    estimation_error,
    top_k_baseline,
)
from .graph_core import FAMILIES, Graph, GeneratorSpec, from_edge_list, generate
from .spread import StopRule, simulate_si

TOP_K = "top_k"
RANDOM_FAMILIES = {"random_regular", "barabasi_albert", "random_bounded_degree_tree"}
STAGE_GRAPH, STAGE_SOURCE, STAGE_SPREAD = 0, 1, 2
REPORT_HEADER = ("trial", "method", "kappa_size", "error", "runtime_ms")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a graph, a spreading rule, estimators and trials.

    ``graph`` holds generator fields (``family``, ``n``, ``d``, ...) or
    ``{"edges": path}``. ``top_k`` takes its suspect-set size from the
    multi-end-vertex estimator of the same trial. Random graph families are
    redrawn every trial when ``regenerate_graph`` is set.
    """

    graph: dict
    target_size: int
    estimators: tuple[str, ...]
    trials: int = 1
    seed: int = 0
    max_end_vertex_fraction: str = "1"
    regenerate_graph: bool = False
    shared_bfs_tree: bool = False
    timing: bool = False
    workers: int = 1
    out_dir: str = "."
    prefix: str = "experiment"

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.target_size < 1:
            raise ConfigError("target_size must be positive")
        if not self.estimators:
            raise ConfigError("at least one estimator is required")
        for name in self.estimators:
            if name != TOP_K:
                try:
                    EstimatorKind.parse(name)
                except ValueError as exc:
                    raise ConfigError(str(exc)) from None
        if "edges" not in self.graph:
            fam = self.graph.get("family")
            if fam not in FAMILIES:
                raise ConfigError(f"unknown graph family {fam!r}")
        frac = Fraction(self.max_end_vertex_fraction)
        if not 0 < frac <= 1:
            raise ConfigError("max_end_vertex_fraction must lie in (0, 1]")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        if "graph" not in data or "target_size" not in data or "estimators" not in data:
            raise ConfigError("config needs graph, target_size and estimators")
        values = dict(data)
        values["estimators"] = tuple(values["estimators"])
        values["max_end_vertex_fraction"] = str(values.get("max_end_vertex_fraction", "1"))
        return cls(**values)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["estimators"] = list(self.estimators)
        return out

    def canonical_methods(self) -> tuple[str, ...]:
        return tuple(
            TOP_K if name == TOP_K else EstimatorKind.parse(name).value for name in self.estimators
        )


@dataclass(frozen=True)
class ReportRow:
    trial: int
    method: str
    kappa_size: int
    error: int
    runtime_ms: float | None = None

    def cells(self) -> tuple[str, ...]:
        rt = "NA" if self.runtime_ms is None else f"{self.runtime_ms:.6g}"
        return (str(self.trial), self.method, str(self.kappa_size), str(self.error), rt)


def trial_seed(master: int, trial: int, stage: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master & 0xFFFFFFFFFFFFFFFF, trial, stage])


def _graph_spec(graph: dict, seed: int) -> GeneratorSpec:
    fields = dict(graph)
    if "connections" in fields:
        fields["connections"] = tuple(fields["connections"])
    fields.setdefault("seed", seed)
    return GeneratorSpec(**fields)


@lru_cache(maxsize=4)
def _fixed_graph(graph_json: str) -> Graph:
    graph = json.loads(graph_json)
    if "edges" in graph:
        with open(graph["edges"], encoding="utf-8") as fh:
            return from_edge_list(fh)[0]
    return generate(_graph_spec(graph, 0))


def trial_graph(cfg: ExperimentConfig, trial: int) -> Graph:
    if cfg.regenerate_graph and cfg.graph.get("family") in RANDOM_FAMILIES:
        seed = int(trial_seed(cfg.seed, trial, STAGE_GRAPH).generate_state(1, np.uint64)[0])
        spec = dict(cfg.graph)
        spec["seed"] = seed
        return generate(_graph_spec(spec, seed))
    return _fixed_graph(json.dumps(cfg.graph, sort_keys=True))


def run_trial(cfg: ExperimentConfig, trial: int) -> list[ReportRow]:
    g = trial_graph(cfg, trial)
    if cfg.target_size > g.n:
        raise ConfigError(f"target_size {cfg.target_size} exceeds graph size {g.n}")
    src_rng = np.random.default_rng(trial_seed(cfg.seed, trial, STAGE_SOURCE))
    source = int(src_rng.integers(g.n))
    rule = StopRule(cfg.target_size, Fraction(cfg.max_end_vertex_fraction))
    snap = simulate_si(g, source, rule, trial_seed(cfg.seed, trial, STAGE_SPREAD))
    truth = snap.source
    rows = []
    alg4: Estimate | None = None
    for method in cfg.canonical_methods():
        start = time.perf_counter()
        if method == TOP_K:
            if alg4 is None:
                alg4 = algorithm4_multi_end_vertex(snap)
            est = top_k_baseline(snap, len(alg4.kappa))
        else:
            est = estimate(snap, method, shared_tree=cfg.shared_bfs_tree)
            if method == EstimatorKind.MULTI_END_VERTEX.value:
                alg4 = est
        elapsed = (time.perf_counter() - start) * 1000.0 if cfg.timing else None
        rows.append(ReportRow(trial, method, len(est.kappa), estimation_error(est, truth, snap), elapsed))
    return rows


def _run_chunk(cfg: ExperimentConfig, trials: list[int]) -> list[ReportRow]:
    out = []
    for t in trials:
        out.extend(run_trial(cfg, t))
    return out


def worker_count(cfg: ExperimentConfig) -> int:
    env = os.environ.get("THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"THREADS must be an integer, got {env!r}") from None
        if value < 1:
            raise ConfigError("THREADS must be at least 1")
        return value
    return cfg.workers


def run_trials(cfg: ExperimentConfig, workers: int | None = None) -> list[ReportRow]:
    workers = worker_count(cfg) if workers is None else workers
    trials = list(range(cfg.trials))
    if workers <= 1 or cfg.trials == 1:
        rows = _run_chunk(cfg, trials)
    else:
        chunks = [trials[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, [cfg] * len(chunks), chunks))
        rows = [r for part in parts for r in part]
    order = {m: i for i, m in enumerate(cfg.canonical_methods())}
    rows.sort(key=lambda r: (r.trial, order[r.method]))
    return rows


def _sig(x: float) -> float:
    return float(f"{x:.6g}")


def aggregate(rows: Iterable[ReportRow]) -> dict:
    """Per-method mean error, hit rates, mean suspect-set size and histogram."""
    by_method: dict[str, list[ReportRow]] = {}
    for r in rows:
        by_method.setdefault(r.method, []).append(r)
    out = {}
    for method, rs in by_method.items():
        errors = [r.error for r in rs]
        hist: dict[str, int] = {}
        for e in sorted(errors):
            hist[str(e)] = hist.get(str(e), 0) + 1
        out[method] = {
            "trials": len(rs),
            "mean_error": _sig(sum(errors) / len(rs)),
            "detection_rate": _sig(sum(e == 0 for e in errors) / len(rs)),
            "p_error_le_1": _sig(sum(e <= 1 for e in errors) / len(rs)),
            "mean_kappa_size": _sig(sum(r.kappa_size for r in rs) / len(rs)),
            "histogram": hist,
        }
    return out


@dataclass(frozen=True)
class ReportFiles:
    report_csv: Path
    summary_json: Path
    hist_dat: Path


def render_report(rows: Iterable[ReportRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_HEADER)
    for r in rows:
        writer.writerow(r.cells())
    return buf.getvalue()


def render_summary(aggregates: dict, config: dict | None) -> str:
    doc = {"methods": aggregates}
    if config is not None:
        doc["config"] = config
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def render_histogram(aggregates: dict) -> str:
    """Two-column ``error count`` blocks, one per method, separated by blank lines."""
    blocks = []
    for method in sorted(aggregates):
        lines = [f"# {method}", "# error count"]
        for err, count in sorted(aggregates[method]["histogram"].items(), key=lambda kv: int(kv[0])):
            lines.append(f"{err} {count}")
        blocks.append("\n".join(lines) + "\n")
    return "\n\n".join(blocks)


def emit_report(
    rows: list[ReportRow],
    aggregates: dict,
    out_dir: str | Path,
    prefix: str,
    config: dict | None = None,
) -> ReportFiles:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = ReportFiles(
        out / f"{prefix}.report.csv",
        out / f"{prefix}.summary.json",
        out / f"{prefix}.hist.dat",
    )
    files.report_csv.write_text(render_report(rows), encoding="utf-8")
    files.summary_json.write_text(render_summary(aggregates, config), encoding="utf-8")
    files.hist_dat.write_text(render_histogram(aggregates), encoding="utf-8")
    return files


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> tuple[ReportFiles, dict]:
    rows = run_trials(cfg, workers)
    agg = aggregate(rows)
    config = cfg.to_dict()
    # where and how fast the run happened must not change the report bytes
    for key in ("workers", "out_dir"):
        config.pop(key)
    return emit_report(rows, agg, cfg.out_dir, cfg.prefix, config), agg
