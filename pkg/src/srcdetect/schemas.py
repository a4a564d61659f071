"""Request and response models shared by the HTTP service and the CLI."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

Family = Literal[
    "line",
    "regular_tree",
    "broom",
    "star",
    "grid",
    "circulant",
    "random_regular",
    "barabasi_albert",
    "random_bounded_degree_tree",
]


class GeneratorSpecModel(BaseModel):
    family: Family
    n: Optional[int] = None
    d: Optional[int] = None
    width: Optional[int] = None
    height: Optional[int] = None
    t: Optional[int] = None
    k: Optional[int] = None
    connections: list[int] = Field(default_factory=list)
    m: Optional[int] = None
    d_max: Optional[int] = None
    seed: int = Field(0, ge=0, lt=2**64)


class GraphModel(BaseModel):
    """Edge list with arbitrary non-negative node ids; isolated nodes are not representable."""

    edges: list[tuple[int, int]]


class SnapshotModel(BaseModel):
    nodes: list[int]
    edges: list[tuple[int, int]]
    underlying_degree: dict[str, int]
    end_vertices: list[int] = Field(default_factory=list)
    source: Optional[int] = None
    order: Optional[list[int]] = None


class SpreadRequest(BaseModel):
    graph: Optional[GraphModel] = None
    generator: Optional[GeneratorSpecModel] = None
    infinite_degree: Optional[int] = Field(None, ge=2, description="spread on an infinite regular tree")
    source: int = 0
    target_size: int = Field(..., ge=1)
    max_end_vertex_fraction: str = "1"
    seed: int = Field(0, ge=0)


class EstimateRequest(BaseModel):
    snapshot: SnapshotModel
    method: str
    k: Optional[int] = Field(None, ge=1, description="suspect count for top_k")
    shared_tree: bool = False


class EstimateResponse(BaseModel):
    method: str
    suspects: list[int]
    representative: int
    scores: list[str]


class LikelihoodRequest(BaseModel):
    kind: Literal["exact", "line", "broom", "pseudo_tree"] = "exact"
    snapshot: Optional[SnapshotModel] = None
    d: Optional[int] = None
    n: Optional[int] = None
    t: Optional[int] = None
    k_ends: Optional[int] = None


class LikelihoodRow(BaseModel):
    node: int
    numerator: int
    denominator: int
    posterior: float


class LikelihoodResponse(BaseModel):
    rows: list[LikelihoodRow]
    argmax: list[int]


class DetectionExactRequest(BaseModel):
    d: list[int]
    n: list[int]
    exact: Optional[bool] = None
    tie_weight: str = "1"


class DetectionExactRow(BaseModel):
    d: int
    n: int
    exact_prob: str
    value: float


class DetectionLimitRequest(BaseModel):
    d: list[int]


class DetectionLimitRow(BaseModel):
    d: int
    limit: float


class UrnRequest(BaseModel):
    initial: Optional[list[int]] = None
    m: Optional[int] = None
    draws: Optional[int] = None
    spreading_d: Optional[int] = None
    spreading_n: Optional[int] = None
    mode: Literal["pmf", "marginal", "sample"] = "marginal"
    outcome: Optional[list[int]] = None
    color: int = 0
    replicates: int = Field(1, ge=1)
    seed: int = Field(0, ge=0)


class UrnResponse(BaseModel):
    probabilities: list[str] = Field(default_factory=list)
    samples: list[list[int]] = Field(default_factory=list)


class VaccineRequest(BaseModel):
    graph: GraphModel
    k: int = Field(..., ge=0)
    method: Literal["vaccine", "brute_force", "degree"] = "vaccine"
    bfs_root: Optional[int] = None


class VaccineResponse(BaseModel):
    k: int
    method: str
    protection_set: list[int]
    objective: int
    expected_outage: str
    bound_chain: Optional[dict] = None


class ExperimentRequest(BaseModel):
    config: dict
    workers: Optional[int] = Field(None, ge=1)


class ExperimentResponse(BaseModel):
    files: dict[str, str]
    summary: dict
