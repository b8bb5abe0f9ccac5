"""Evaluation indices.

External: edge accuracy and balanced accuracy of a predicted partition
against a reference labeler, computed over the reference's known
(non-zero) edges only. Internal: silhouette coefficient over a
precomputed shape-to-shape distance matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from .distances import DistanceMatrix
from .simgraph import NEGATIVE, POSITIVE, UNKNOWN, EdgeKey, Partition


@dataclass(frozen=True)
class ConfusionCounts:
    """Binary confusion over labeled edges, +1 ("similar") positive."""

    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("negative confusion count")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(
    pred: Partition,
    ref: Callable[[EdgeKey], int],
    edge_universe: Iterable[EdgeKey],
) -> ConfusionCounts:
    """Tally predicted-vs-reference edge labels over a universe of edges.

    Edges the reference labels 0 (unknown) are skipped; they do not count
    toward the total. Raises if no edge in the universe is labeled.
    """
    tp = fp = tn = fn = 0
    for edge in edge_universe:
        truth = ref(edge)
        if truth == UNKNOWN:
            continue
        predicted = pred.edge_label(edge)
        if truth == POSITIVE:
            if predicted == POSITIVE:
                tp += 1
            else:
                fn += 1
        else:
            if predicted == NEGATIVE:
                tn += 1
            else:
                fp += 1
    counts = ConfusionCounts(tp, fp, tn, fn)
    if counts.total == 0:
        raise ValueError("no labeled edges in the evaluation universe")
    return counts


def edge_accuracy(c: ConfusionCounts) -> float:
    """Fraction of evaluated edges whose predicted label matches."""
    if c.total == 0:
        raise ValueError("empty confusion counts")
    return (c.tp + c.tn) / c.total


def balanced_accuracy(c: ConfusionCounts) -> float:
    """Mean of the true-positive and true-negative rates."""
    if c.tp + c.fn == 0:
        raise ValueError("positive class absent from reference")
    if c.tn + c.fp == 0:
        raise ValueError("negative class absent from reference")
    return (c.tp / (c.tp + c.fn) + c.tn / (c.tn + c.fp)) / 2.0


@dataclass(frozen=True)
class SilhouetteResult:
    per_object: dict[str, float]
    mean: float


def silhouette(p: Partition, d: DistanceMatrix) -> SilhouetteResult:
    """Silhouette coefficient s(i) = (b - a) / max(a, b) per object.

    a(i) is the mean distance to the other members of i's cluster, b(i)
    the minimum over other clusters of the mean distance to that cluster.
    Objects in singleton clusters get s(i) = 0.
    """
    if p.k < 2:
        raise ValueError("silhouette undefined for a single cluster")
    ids = list(p.models)
    rows = np.array([d.index_of(m) for m in ids])
    labels = np.array([p.cluster_of(m) for m in ids])
    dm = d.values[np.ix_(rows, rows)]
    n = len(ids)
    sizes = np.bincount(labels, minlength=p.k)
    # cluster_sums[i, c] = sum of distances from object i to cluster c
    cluster_sums = np.zeros((n, p.k), dtype=np.float64)
    for c in range(p.k):
        cluster_sums[:, c] = dm[:, labels == c].sum(axis=1)
    own = labels
    s = np.zeros(n, dtype=np.float64)
    multi = sizes[own] > 1
    a = np.zeros(n)
    a[multi] = cluster_sums[np.arange(n), own][multi] / (sizes[own][multi] - 1)
    mean_to = cluster_sums / np.maximum(sizes, 1)[None, :]
    mean_to[:, sizes == 0] = np.inf
    mean_to[np.arange(n), own] = np.inf
    b = mean_to.min(axis=1)
    denom = np.maximum(a, b)
    valid = multi & (denom > 0)
    s[valid] = (b[valid] - a[valid]) / denom[valid]
    per_object = {m: float(s[i]) for i, m in enumerate(ids)}
    return SilhouetteResult(per_object, float(s.mean()))


def ranking_report(
    scores: Mapping[str, Mapping[int, float]],
) -> tuple[dict[int, list[str]], list[str]]:
    """Per-K rankings and the mean-over-K ranking, best first.

    All methods must share the same K grid; ties break by method name.
    """
    methods = sorted(scores)
    if not methods:
        raise ValueError("no methods to rank")
    grid = sorted(scores[methods[0]])
    for m in methods:
        if sorted(scores[m]) != grid:
            raise ValueError(f"method {m!r} has a different K grid")
    per_k = {
        k: sorted(methods, key=lambda m: (-scores[m][k], m)) for k in grid
    }
    mean = {m: sum(scores[m][k] for k in grid) / len(grid) for m in methods}
    overall = sorted(methods, key=lambda m: (-mean[m], m))
    return per_k, overall


def write_scores(scores: Mapping[str, Mapping[int, Mapping[str, float]]], path) -> None:
    """Score table: method, K, index name, value."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for method in sorted(scores):
            for k in sorted(scores[method]):
                for index in sorted(scores[method][k]):
                    f.write(f"{method}\t{k}\t{index}\t{scores[method][k][index]:.6f}\n")


def read_scores(path) -> dict[str, dict[int, dict[str, float]]]:
    out: dict[str, dict[int, dict[str, float]]] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 columns")
            method, k, index, value = parts
            out.setdefault(method, {}).setdefault(int(k), {})[index] = float(value)
    return out
