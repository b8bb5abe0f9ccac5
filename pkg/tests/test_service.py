import json

import pytest
from fastapi.testclient import TestClient

from shapesim.service import (
    AnnotationServer,
    RoundRejected,
    ServiceConfig,
    UnknownAnnotator,
    create_app,
)
from shapesim.simgraph import Partition, write_partition


@pytest.fixture
def config(tmp_path):
    # cluster 0: {a,b,c,d}; cluster 1: {x,y,z}
    p = Partition({"a": 0, "b": 0, "c": 0, "d": 0, "x": 1, "y": 1, "z": 1}, 2)
    tasks = tmp_path / "tasks.tsv"
    write_partition(p, tasks)
    preview = tmp_path / "previews"
    preview.mkdir()
    (preview / "a.xyz").write_text("0 0 0\n")
    return ServiceConfig(
        tasks_path=str(tasks),
        log_path=str(tmp_path / "rounds.jsonl"),
        tokens={"tok1": "ann1", "tok2": "ann2"},
        preview_dir=str(preview),
    )


@pytest.fixture
def server(config):
    s = AnnotationServer(config)
    yield s
    s.close()


def test_fresh_annotator_gets_lowest_cluster(server):
    task = server.next_cluster("tok1")
    assert task["cluster_id"] == 0
    assert task["remaining"] == ["a", "b", "c", "d"]
    assert task["round"] == 0


def test_unknown_token(server):
    with pytest.raises(UnknownAnnotator):
        server.next_cluster("nope")


def test_round_flow_and_exhaustion(server):
    r = server.submit_round("tok1", 0, ["a", "b"])
    assert r == {"remaining": ["c", "d"], "terminal": False}
    task = server.next_cluster("tok1")
    assert task["cluster_id"] == 0
    assert task["remaining"] == ["c", "d"]
    r = server.submit_round("tok1", 0, ["c", "d"])
    assert r["terminal"]
    task = server.next_cluster("tok1")
    assert task["cluster_id"] == 1
    server.submit_round("tok1", 1, ["x", "y", "z"])
    assert server.next_cluster("tok1") is None


def test_foreign_id_rejected_with_offenders(server):
    with pytest.raises(RoundRejected) as exc:
        server.submit_round("tok1", 0, ["a", "q"])
    assert exc.value.offending == ["q"]


def test_terminal_session_rejected(server):
    server.submit_round("tok1", 0, ["a", "b", "c", "d"])
    with pytest.raises(RoundRejected):
        server.submit_round("tok1", 0, ["a"])


def test_export_split_cluster(server):
    server.submit_round("tok1", 0, ["a", "b"])
    server.submit_round("tok1", 0, ["c", "d"])
    tsv = server.export_edges("tok1")
    lines = tsv.strip().split("\n")
    assert len(lines) == 6
    assert sum(1 for l in lines if l.endswith("+1")) == 2
    assert sum(1 for l in lines if l.endswith("-1")) == 4


def test_export_nothing_completed(server):
    with pytest.raises(RoundRejected):
        server.export_edges("tok1")


def test_export_two_clusters_counts(server):
    server.submit_round("tok1", 0, ["a", "b", "c", "d"])
    server.submit_round("tok1", 1, ["x", "y", "z"])
    tsv = server.export_edges("tok1")
    assert len(tsv.strip().split("\n")) == 6 + 3


def test_replay_reproduces_export(server, config):
    server.submit_round("tok1", 0, ["a", "c"])
    server.submit_round("tok1", 0, [])
    server.submit_round("tok2", 0, ["a", "b", "c", "d"])
    before = server.export_edges("tok1")
    server.close()
    replica = AnnotationServer(config)
    try:
        assert replica.export_edges("tok1") == before
        assert replica.sessions == server.sessions
    finally:
        replica.close()


def test_sessions_are_isolated(server):
    server.submit_round("tok1", 0, ["a", "b"])
    task2 = server.next_cluster("tok2")
    assert task2["cluster_id"] == 0
    assert task2["remaining"] == ["a", "b", "c", "d"]


def test_progress(server):
    p = server.progress()
    assert p.per_annotator["ann1"] == {"completed": 0, "total": 2, "edges_labeled": 0}
    server.submit_round("tok1", 0, ["a", "b", "c", "d"])
    server.submit_round("tok2", 0, ["a", "b", "c", "d"])
    p = server.progress()
    assert p.per_annotator["ann1"]["edges_labeled"] == 6
    assert p.consistency["ann1/ann2"] == 1.0


def test_log_records_have_monotone_round_index(server, config):
    server.submit_round("tok1", 0, ["a", "b"])
    server.submit_round("tok1", 0, ["c"])
    records = [
        json.loads(l)
        for l in open(config.log_path, encoding="utf-8")
        if l.strip()
    ]
    assert [r["round"] for r in records] == [0, 1]
    assert all(set(r) == {"annotator", "cluster", "round", "checked", "ts"} for r in records)


# -- HTTP surface -----------------------------------------------------------


@pytest.fixture
def client(config):
    app = create_app(config)
    with TestClient(app) as c:
        yield c
    app.state.server.close()


def test_http_health(client):
    r = client.get("/api/health")
    assert r.status_code == 200
    assert r.json()["status"] == "ok"


def test_http_next_and_rounds(client):
    r = client.get("/api/clusters/next", params={"annotator": "tok1"})
    assert r.status_code == 200
    task = r.json()
    assert task["cluster_id"] == 0
    assert task["previews"][0] == "/api/preview/a.xyz"

    r = client.post(
        "/api/clusters/0/rounds", json={"annotator": "tok1", "checked": ["a", "b"]}
    )
    assert r.status_code == 200
    assert r.json() == {"remaining": ["c", "d"], "terminal": False}

    r = client.post(
        "/api/clusters/0/rounds", json={"annotator": "tok1", "checked": ["a"]}
    )
    assert r.status_code == 409
    assert r.json()["detail"]["offending"] == ["a"]


def test_http_204_when_done(client):
    for cid, checked in ((0, ["a", "b", "c", "d"]), (1, ["x", "y", "z"])):
        client.post(
            f"/api/clusters/{cid}/rounds",
            json={"annotator": "tok1", "checked": checked},
        )
    r = client.get("/api/clusters/next", params={"annotator": "tok1"})
    assert r.status_code == 204


def test_http_unknown_token(client):
    r = client.get("/api/clusters/next", params={"annotator": "bad"})
    assert r.status_code == 401


def test_http_export(client):
    client.post(
        "/api/clusters/0/rounds", json={"annotator": "tok1", "checked": ["a", "b"]}
    )
    client.post(
        "/api/clusters/0/rounds", json={"annotator": "tok1", "checked": ["c", "d"]}
    )
    r = client.get("/api/export", params={"annotator": "tok1"})
    assert r.status_code == 200
    assert "attachment" in r.headers["content-disposition"]
    assert len(r.text.strip().split("\n")) == 6


def test_http_static_ui_mount(config, tmp_path):
    static = tmp_path / "ui"
    static.mkdir()
    (static / "index.html").write_text("<html>annotator</html>")
    config.static_dir = str(static)
    app = create_app(config)
    with TestClient(app) as c:
        r = c.get("/")
        assert r.status_code == 200
        assert "annotator" in r.text
        # API routes take precedence over the static mount
        assert c.get("/api/health").status_code == 200
    app.state.server.close()


def test_http_progress_and_preview(client):
    r = client.get("/api/progress")
    assert r.status_code == 200
    assert "per_annotator" in r.json()
    r = client.get("/api/preview/a.xyz")
    assert r.status_code == 200
    assert r.text == "0 0 0\n"
    assert client.get("/api/preview/missing.xyz").status_code == 404
