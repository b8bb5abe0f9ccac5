"""KMeans over precomputed feature vectors and capacity-bounded splitting.

Produces the small initial clusters (at most T members each) that are
the unit of human annotation. Features are always ingested from files;
no representation learning happens here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simgraph import Partition

MAX_ITER = 300


@dataclass(frozen=True)
class FeatureMatrix:
    ids: tuple[str, ...]
    vectors: np.ndarray  # (n, d) float64

    def __post_init__(self):
        n, d = self.vectors.shape
        if n != len(self.ids):
            raise ValueError("id count does not match vector rows")
        if d < 1:
            raise ValueError("feature dimension must be >= 1")
        if len(set(self.ids)) != n:
            raise ValueError("duplicate model ids")
        if not np.isfinite(self.vectors).all():
            raise ValueError("non-finite feature values")

    def subset(self, indices) -> "FeatureMatrix":
        idx = np.asarray(indices)
        return FeatureMatrix(tuple(self.ids[i] for i in idx), self.vectors[idx])


def _kmeans_pp_centroids(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: D^2-weighted draws after a uniform first pick."""
    n = len(x)
    centroids = np.empty((k, x.shape[1]), dtype=np.float64)
    first = rng.integers(n)
    centroids[0] = x[first]
    d2 = np.sum((x - centroids[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            # all remaining points coincide with a centroid; pick uniformly
            choice = rng.integers(n)
        else:
            choice = rng.choice(n, p=d2 / total)
        centroids[c] = x[choice]
        d2 = np.minimum(d2, np.sum((x - centroids[c]) ** 2, axis=1))
    return centroids


def _assign(x: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-centroid labels (ties to the lowest index) and squared dists."""
    d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(len(x)), labels]


def kmeans(features: FeatureMatrix, k: int, seed: int) -> Partition:
    """Lloyd's iterations from k-means++ seeding until the assignment is a
    fixpoint or MAX_ITER is hit. Every output cluster is nonempty: an empty
    cluster is re-seeded at the point farthest from its centroid, and that
    point is pinned to it for the round.

    The within-cluster sum of squares is checked to be non-increasing
    across iterations.
    """
    x = features.vectors
    n = len(x)
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp_centroids(x, k, rng)
    labels, d2 = _assign(x, centroids)
    objective = d2.sum()
    for _ in range(MAX_ITER):
        new_centroids = np.empty_like(centroids)
        pinned: dict[int, int] = {}
        for c in range(k):
            members = labels == c
            if members.any():
                new_centroids[c] = x[members].mean(axis=0)
            else:
                far = int(np.argmax(d2))
                new_centroids[c] = x[far]
                pinned[far] = c
                d2 = d2.copy()
                d2[far] = 0.0
        new_labels, d2 = _assign(x, new_centroids)
        for point, c in pinned.items():
            new_labels[point] = c
            d2[point] = ((x[point] - new_centroids[c]) ** 2).sum()
        new_objective = d2.sum()
        if new_objective > objective + 1e-9 * max(objective, 1.0):
            raise AssertionError(
                f"kmeans objective increased: {objective} -> {new_objective}"
            )
        converged = np.array_equal(new_labels, labels)
        labels, centroids, objective = new_labels, new_centroids, new_objective
        if converged:
            break
    return Partition.from_assignment(
        {features.ids[i]: int(labels[i]) for i in range(n)}
    )


@dataclass(frozen=True)
class InitialClustering:
    partition: Partition
    capacity: int

    def __post_init__(self):
        sizes = [len(c) for c in self.partition.clusters()]
        if max(sizes) > self.capacity:
            raise ValueError("cluster above capacity")


def capacity_split(
    features: FeatureMatrix, p: Partition, capacity: int, seed: int
) -> InitialClustering:
    """Re-run kmeans inside any cluster above capacity, with fan-out
    ceil(size / capacity), until every cluster fits. A split that makes no
    progress (e.g. identical feature rows) falls back to chunking the
    members in sorted-id order, which always terminates.
    """
    if capacity < 1:
        raise ValueError("capacity must be >= 1")
    index_of = {m: i for i, m in enumerate(features.ids)}
    groups: list[list[str]] = [sorted(c) for c in p.clusters()]
    done: list[list[str]] = []
    split_round = 0
    while groups:
        group = groups.pop(0)
        if len(group) <= capacity:
            done.append(group)
            continue
        fanout = -(-len(group) // capacity)
        sub = features.subset([index_of[m] for m in group])
        subparts = kmeans(sub, fanout, seed + split_round).clusters()
        split_round += 1
        if max(len(s) for s in subparts) >= len(group):
            subparts = [group[i : i + capacity] for i in range(0, len(group), capacity)]
        groups.extend(sorted(s) for s in subparts)
    done.sort()
    assignment = {m: c for c, members in enumerate(done) for m in members}
    return InitialClustering(Partition(assignment, len(done)), capacity)


def write_features(f: FeatureMatrix, path) -> None:
    n, d = f.vectors.shape
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"FEAT {n} {d}\n")
        for mid, row in zip(f.ids, f.vectors):
            fh.write(mid + "\t" + "\t".join(f"{v:.9g}" for v in row) + "\n")


def read_features(path) -> FeatureMatrix:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 3 or header[0] != "FEAT":
            raise ValueError(f"{path}: not a FEAT file")
        n, d = int(header[1]), int(header[2])
        ids: list[str] = []
        vectors = np.empty((n, d), dtype=np.float64)
        for i in range(n):
            parts = fh.readline().rstrip("\n").split("\t")
            if len(parts) != d + 1:
                raise ValueError(f"{path}: row {i} has {len(parts) - 1} features")
            ids.append(parts[0])
            vectors[i] = [float(v) for v in parts[1:]]
    return FeatureMatrix(tuple(ids), vectors)
