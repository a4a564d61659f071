import pytest
from fastapi.testclient import TestClient

from srcdetect.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


STAR = {
    "nodes": [0, 1, 2, 3],
    "edges": [[0, 1], [0, 2], [0, 3]],
    "underlying_degree": {"0": 3, "1": 3, "2": 3, "3": 3},
}


def test_health(client):
    assert client.get("/health").json() == {"status": "ok"}


def test_generate(client):
    res = client.post("/generate", json={"family": "line", "n": 4})
    assert res.status_code == 200
    assert res.json()["edges"] == [[0, 1], [1, 2], [2, 3]]


def test_generate_rejects_unknown_family(client):
    assert client.post("/generate", json={"family": "hypercube", "n": 4}).status_code == 422


def test_spread_from_edges_keeps_labels(client):
    edges = [[10, 20], [20, 30], [30, 40], [40, 50]]
    res = client.post("/spread", json={"graph": {"edges": edges}, "source": 30, "target_size": 3, "seed": 4})
    doc = res.json()
    assert res.status_code == 200
    assert doc["source"] == 30 and set(doc["nodes"]) <= {10, 20, 30, 40, 50}


def test_spread_needs_one_graph(client):
    res = client.post("/spread", json={"target_size": 3})
    assert res.status_code == 422
    assert "exactly one" in res.json()["detail"]


def test_estimate(client):
    res = client.post("/estimate", json={"snapshot": STAR, "method": "rumor_center"})
    assert res.json()["suspects"] == [0]
    res = client.post("/estimate", json={"snapshot": STAR, "method": "top_k", "k": 2})
    assert res.json()["suspects"] == [0, 1]


def test_likelihood(client):
    res = client.post("/likelihood", json={"kind": "exact", "snapshot": STAR})
    rows = res.json()["rows"]
    assert (rows[0]["numerator"], rows[0]["denominator"]) == (1, 10)
    assert res.json()["argmax"] == [0]


def test_asymptotics(client):
    rows = client.post("/asymptotics/exact", json={"d": [3], "n": [4, 5]}).json()
    assert [r["exact_prob"] for r in rows] == ["7/10", "2/5"]
    limit = client.post("/asymptotics/limit", json={"d": [3]}).json()
    assert limit == [{"d": 3, "limit": 0.25}]
    assert client.post("/asymptotics/limit", json={"d": [2]}).status_code == 422


def test_urn(client):
    res = client.post("/urn", json={"spreading_d": 3, "spreading_n": 3, "mode": "pmf", "outcome": [1, 1, 0]})
    assert res.json()["probabilities"] == ["1/6"]
    assert client.post("/urn", json={"mode": "marginal"}).status_code == 422


def test_vaccine_relabels(client):
    edges = [[100, 101], [101, 102], [102, 103], [103, 104]]
    doc = client.post("/vaccine", json={"graph": {"edges": edges}, "k": 1}).json()
    assert doc["protection_set"] == [102]
    assert doc["expected_outage"] == "8/5"


def test_experiment(client, tmp_path):
    cfg = {
        "graph": {"family": "line", "n": 30},
        "target_size": 8,
        "estimators": ["sdc", "jordan"],
        "trials": 3,
        "out_dir": str(tmp_path),
    }
    doc = client.post("/experiment", json={"config": cfg}).json()
    assert set(doc["summary"]) == {"sdc", "jordan"}
    assert doc["files"]["report_csv"].endswith("experiment.report.csv")
    bad = client.post("/experiment", json={"config": {"graph": {}, "target_size": 1, "estimators": ["x"]}})
    assert bad.status_code == 422
