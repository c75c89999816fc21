import json

import pytest
from fastapi.testclient import TestClient

from dswig.cli import main
from dswig.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


@pytest.fixture(scope="module")
def fig3b_text():
    from dswig.fixtures import load_fixture

    case = load_fixture("fig2_2x2")
    return case.graph_text, case.pipeline_text


def canonical(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":")) + "\n"


def test_health(client):
    resp = client.get("/api/health")
    assert resp.status_code == 200
    assert resp.json() == {"ok": True}


def test_parse_action(client, fig3b_text):
    graph_text, _ = fig3b_text
    resp = client.post("/api/parse", json={"graph": graph_text})
    body = resp.json()
    assert body["ok"]
    assert len(body["result"]["graph"]["nodes"]) == 5
    assert body["result"]["dot"].startswith("digraph")


def test_dsep_action_on_pruned_stage(client, fig3b_text):
    graph_text, pipeline_text = fig3b_text
    resp = client.post(
        "/api/dsep",
        json={"graph": graph_text, "pipeline": pipeline_text, "query": "dY1 _||_ D | X"},
    )
    body = resp.json()
    assert body["ok"] and body["result"]["separated"] is True
    resp2 = client.post(
        "/api/dsep",
        json={
            "graph": graph_text,
            "pipeline": pipeline_text,
            "query": {"x": ["dY1"], "y": ["D"], "z": ["X"]},
            "explain": True,
        },
    )
    explain = resp2.json()["result"]["explain"]
    assert explain["separated"] and all(not p["open"] for p in explain["paths"])


def test_vas_feedback_example(client):
    resp = client.post(
        "/api/vas",
        json={
            "template": {"T": 3},
            "g": 1,
            "t": 2,
            "restrictions": ["r-alpha", "r-y", "r-dx-t"],
        },
    )
    result = resp.json()["result"]
    assert result["feasible"] is False
    assert result["minimal_potential"] == ["X0", "X1", "X2(0)"]


def test_template_action(client):
    resp = client.post("/api/template", json={"T": 3, "restrictions": ["r-alpha", "r-y"]})
    result = resp.json()["result"]
    ids = {n["id"] for n in result["graph"]["nodes"]}
    assert {"U", "X0", "X1", "X2", "D1", "D2", "Y0", "Y1", "Y2"} == ids
    assert "dsl" in result and "dot" in result


def test_statelessness_identical_bodies(client, fig3b_text):
    graph_text, pipeline_text = fig3b_text
    payload = {"graph": graph_text, "pipeline": pipeline_text, "query": "dY1 _||_ D | X"}
    a = client.post("/api/dsep", json=payload)
    b = client.post("/api/dsep", json=payload)
    assert a.content == b.content


def test_malformed_json_gets_location(client):
    resp = client.post("/api/parse", content=b"{not json", headers={"content-type": "application/json"})
    assert resp.status_code == 400
    err = resp.json()["error"]
    assert err["code"] == "bad_json" and "location" in err


def test_domain_error_shape(client):
    resp = client.post("/api/parse", json={"graph": "node A\nedge A -> B"})
    assert resp.status_code == 400
    err = resp.json()["error"]
    assert err["code"] == "parse_error"


def test_unknown_action_404(client):
    resp = client.post("/api/frobnicate", json={})
    assert resp.status_code == 404


def test_cli_and_service_agree_byte_for_byte(client, capsys, tmp_path, fig3b_text):
    graph_text, _ = fig3b_text
    # table1
    api = client.post("/api/table1", json={"T": 3}).json()["result"]
    assert main(["table1", "--T", "3", "--format", "json"]) == 0
    assert canonical(api) == capsys.readouterr().out
    # vas
    api = client.post(
        "/api/vas",
        json={"template": {"T": 3}, "g": 1, "t": 2, "restrictions": ["r-alpha", "r-y", "r-dx-t"]},
    ).json()["result"]
    assert (
        main(
            ["vas", "--template", "3", "--g", "1", "--t", "2", "--restrict",
             "r-alpha,r-y,r-dx-t", "--format", "json"]
        )
        == 0
    )
    assert canonical(api) == capsys.readouterr().out
    # swig
    path = tmp_path / "g.dswig"
    path.write_text(graph_text, encoding="utf-8")
    api = client.post("/api/swig", json={"graph": graph_text, "fix": {"D": 0}}).json()["result"]
    assert main(["swig", str(path), "--fix", "D=0", "--format", "json"]) == 0
    assert canonical(api["swig"]) == capsys.readouterr().out
    # dsep on a self-contained file (embedded pipeline)
    full = tmp_path / "full.dswig"
    full.write_text(graph_text + "\n" + fig3b_text[1], encoding="utf-8")
    api = client.post(
        "/api/dsep", json={"graph": full.read_text(), "query": "dY1 _||_ D | X", "mode": "implied"}
    ).json()["result"]
    assert main(["check", str(full), "--dsep", "dY1 _||_ D | X", "--format", "json"]) == 0
    assert canonical(api) == capsys.readouterr().out


def test_cors_headers_present(client):
    resp = client.get("/api/health", headers={"Origin": "http://localhost:5173"})
    assert resp.headers.get("access-control-allow-origin") == "*"
