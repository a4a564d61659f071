"""Request handlers and the FastAPI application that exposes them.

The CLI calls these handlers in-process, so both front ends share one code
path and one set of validation rules.
"""

from __future__ import annotations

import json
from fractions import Fraction

from fastapi import FastAPI, HTTPException

from . import asymptotics, likelihood, vaccine
from .estimators import estimate, top_k_baseline
from .experiment import ExperimentConfig, run_experiment
from .graph_core import Graph, GeneratorSpec, from_edge_list, generate
from .schemas import (
    DetectionExactRequest,
    DetectionExactRow,
    DetectionLimitRequest,
    DetectionLimitRow,
    EstimateRequest,
    EstimateResponse,
    ExperimentRequest,
    ExperimentResponse,
    GeneratorSpecModel,
    GraphModel,
    LikelihoodRequest,
    LikelihoodResponse,
    LikelihoodRow,
    SnapshotModel,
    SpreadRequest,
    UrnRequest,
    UrnResponse,
    VaccineRequest,
    VaccineResponse,
)
from .spread import LazyRegularTree, Snapshot, StopRule, simulate_si


def graph_from_model(model: GraphModel) -> tuple[Graph, tuple[int, ...]]:
    return from_edge_list(f"{u} {v}" for u, v in model.edges)


def graph_to_model(g: Graph, ids: tuple[int, ...] | None = None) -> GraphModel:
    ids = ids or tuple(range(g.n))
    return GraphModel(edges=[(ids[u], ids[v]) for u, v in g.edges()])


def snapshot_from_model(model: SnapshotModel) -> Snapshot:
    return Snapshot.from_json(model.model_dump())


def snapshot_to_model(snap: Snapshot) -> SnapshotModel:
    return SnapshotModel(**snap.to_json())


def spec_from_model(model: GeneratorSpecModel) -> GeneratorSpec:
    data = model.model_dump()
    data["connections"] = tuple(data["connections"])
    return GeneratorSpec(**data)


# --------------------------------------------------------------------------
# Handlers
# --------------------------------------------------------------------------


def handle_generate(req: GeneratorSpecModel) -> GraphModel:
    return graph_to_model(generate(spec_from_model(req)))


def handle_spread(req: SpreadRequest) -> SnapshotModel:
    given = [x is not None for x in (req.graph, req.generator, req.infinite_degree)]
    if sum(given) != 1:
        raise ValueError("give exactly one of graph, generator or infinite_degree")
    rule = StopRule(req.target_size, Fraction(req.max_end_vertex_fraction))
    if req.infinite_degree is not None:
        if req.source != 0:
            raise ValueError("spreads on an infinite tree start at node 0")
        return snapshot_to_model(simulate_si(LazyRegularTree(req.infinite_degree), 0, rule, req.seed))
    if req.graph is not None:
        g, ids = graph_from_model(req.graph)
        index = {lab: i for i, lab in enumerate(ids)}
        if req.source not in index:
            raise ValueError(f"source {req.source} is not a graph node")
        snap = simulate_si(g, index[req.source], rule, req.seed)
        relabelled = Snapshot(snap.graph, snap.degree, tuple(ids[x] for x in snap.labels), snap.source, snap.order)
        return snapshot_to_model(relabelled)
    g = generate(spec_from_model(req.generator))
    return snapshot_to_model(simulate_si(g, req.source, rule, req.seed))


def handle_estimate(req: EstimateRequest) -> EstimateResponse:
    snap = snapshot_from_model(req.snapshot)
    if req.method.strip().lower() in ("top_k", "topk"):
        est = top_k_baseline(snap, req.k or 1)
    else:
        est = estimate(snap, req.method, shared_tree=req.shared_tree)
    return EstimateResponse(**est.to_json(snap))


def handle_likelihood(req: LikelihoodRequest) -> LikelihoodResponse:
    def need(*names: str) -> None:
        missing = [n for n in names if getattr(req, n) is None]
        if missing:
            raise ValueError(f"{req.kind} likelihood needs: {', '.join(missing)}")

    if req.kind == "exact":
        need("snapshot")
        table = likelihood.exact_source_likelihood(snapshot_from_model(req.snapshot))
    elif req.kind == "pseudo_tree":
        need("snapshot")
        table = likelihood.pseudo_tree_likelihood(snapshot_from_model(req.snapshot))
    elif req.kind == "line":
        need("d", "n")
        table = likelihood.line_likelihood(req.d, req.n)
    else:
        need("d", "t", "k_ends")
        table = likelihood.broom_likelihood(req.d, req.t, req.k_ends)
    rows = [
        LikelihoodRow(node=lab, numerator=num, denominator=den, posterior=float(post))
        for lab, num, den, post in table.rows()
    ]
    return LikelihoodResponse(rows=rows, argmax=[table.labels[v] for v in table.argmax])


def handle_detection_exact(req: DetectionExactRequest) -> list[DetectionExactRow]:
    rows = []
    for d in req.d:
        for n in req.n:
            p = asymptotics.detection_prob_exact(d, n, req.exact, Fraction(req.tie_weight))
            rows.append(DetectionExactRow(d=d, n=n, exact_prob=str(p), value=float(p)))
    return rows


def handle_detection_limit(req: DetectionLimitRequest) -> list[DetectionLimitRow]:
    return [DetectionLimitRow(d=d, limit=asymptotics.detection_prob_limit(d)) for d in req.d]


def handle_urn(req: UrnRequest) -> UrnResponse:
    if req.spreading_d is not None:
        if req.spreading_n is None:
            raise ValueError("spreading preset needs spreading_n")
        spec = asymptotics.UrnSpec.spreading(req.spreading_d, req.spreading_n)
    else:
        if req.initial is None or req.m is None or req.draws is None:
            raise ValueError("give initial, m and draws, or the spreading preset")
        spec = asymptotics.UrnSpec(tuple(req.initial), req.m, req.draws)
    if req.mode == "pmf":
        if req.outcome is None:
            raise ValueError("pmf mode needs an outcome")
        return UrnResponse(probabilities=[str(asymptotics.urn_joint_pmf(spec, req.outcome))])
    if req.mode == "marginal":
        if not 0 <= req.color < spec.colors:
            raise ValueError("color out of range")
        return UrnResponse(probabilities=[str(p) for p in asymptotics.urn_marginal_pmf(spec, req.color)])
    samples = asymptotics.urn_sample_batch(spec, req.replicates, req.seed)
    return UrnResponse(samples=samples.tolist())


def handle_vaccine(req: VaccineRequest) -> VaccineResponse:
    g, ids = graph_from_model(req.graph)
    if req.method == "brute_force":
        ps = vaccine.brute_force_protection(g, req.k)
    elif req.method == "degree":
        ps = vaccine.degree_heuristic_protection(g, req.k)
    elif g.is_tree and req.bfs_root is None:
        ps = vaccine.select_protection_set(g, req.k)
    else:
        root = None
        if req.bfs_root is not None:
            index = {lab: i for i, lab in enumerate(ids)}
            if req.bfs_root not in index:
                raise ValueError(f"bfs_root {req.bfs_root} is not a graph node")
            root = index[req.bfs_root]
        ps = vaccine.select_protection_set_general(g, req.k, root)
    doc = ps.to_json(g.n)
    doc["protection_set"] = [ids[v] for v in ps.nodes]
    doc["bound_chain"] = vaccine.bound_check(g).to_json() if g.is_tree else None
    return VaccineResponse(**doc)


def handle_experiment(req: ExperimentRequest) -> ExperimentResponse:
    cfg = ExperimentConfig.from_dict(req.config)
    files, agg = run_experiment(cfg, req.workers)
    return ExperimentResponse(
        files={
            "report_csv": str(files.report_csv),
            "summary_json": str(files.summary_json),
            "hist_dat": str(files.hist_dat),
        },
        summary=json.loads(json.dumps(agg)),
    )


# --------------------------------------------------------------------------
# HTTP application
# --------------------------------------------------------------------------


def _guard(fn, req):
    try:
        return fn(req)
    except (ValueError, OSError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None


def create_app() -> FastAPI:
    app = FastAPI(title="srcdetect", version="0.1.0")

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/generate", response_model=GraphModel)
    def generate_route(req: GeneratorSpecModel):
        return _guard(handle_generate, req)

    @app.post("/spread", response_model=SnapshotModel)
    def spread_route(req: SpreadRequest):
        return _guard(handle_spread, req)

    @app.post("/estimate", response_model=EstimateResponse)
    def estimate_route(req: EstimateRequest):
        return _guard(handle_estimate, req)

    @app.post("/likelihood", response_model=LikelihoodResponse)
    def likelihood_route(req: LikelihoodRequest):
        return _guard(handle_likelihood, req)

    @app.post("/asymptotics/exact", response_model=list[DetectionExactRow])
    def exact_route(req: DetectionExactRequest):
        return _guard(handle_detection_exact, req)

    @app.post("/asymptotics/limit", response_model=list[DetectionLimitRow])
    def limit_route(req: DetectionLimitRequest):
        return _guard(handle_detection_limit, req)

    @app.post("/urn", response_model=UrnResponse)
    def urn_route(req: UrnRequest):
        return _guard(handle_urn, req)

    @app.post("/vaccine", response_model=VaccineResponse)
    def vaccine_route(req: VaccineRequest):
        return _guard(handle_vaccine, req)

    @app.post("/experiment", response_model=ExperimentResponse)
    def experiment_route(req: ExperimentRequest):
        return _guard(handle_experiment, req)

    return app
