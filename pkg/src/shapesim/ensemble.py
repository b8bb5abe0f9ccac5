"""Ensemble similarity labelings.

Two ensembles feed external evaluation: a dense method ensemble built
by majority vote over N clustering-induced partitions (positive when
the positive-vote count reaches ceil((N+1)/2)), and a sparse human
ensemble over annotator edge sets where an exact vote tie means
unknown. EnsembleHuman is the mean of a method's balanced accuracy
against each of the two references.
"""

from __future__ import annotations

from dataclasses import dataclass

from .simgraph import (
    NEGATIVE,
    POSITIVE,
    UNKNOWN,
    EdgeKey,
    LabeledEdgeSet,
    Partition,
    read_edge_set,
    read_partition,
)


@dataclass(frozen=True)
class MethodEnsemble:
    partitions: tuple[Partition, ...]

    def __post_init__(self):
        if not self.partitions:
            raise ValueError("method ensemble needs at least one partition")
        models = set(self.partitions[0].models)
        for p in self.partitions[1:]:
            if set(p.models) != models:
                raise ValueError("partitions cover different model sets")


def method_ensemble_label(e: MethodEnsemble, edge: EdgeKey) -> int:
    """Majority vote over the N partition-derived labels; never unknown."""
    n = len(e.partitions)
    positives = sum(1 for p in e.partitions if p.edge_label(edge) == POSITIVE)
    threshold = (n + 2) // 2  # ceil((N + 1) / 2)
    return POSITIVE if positives >= threshold else NEGATIVE


@dataclass(frozen=True)
class HumanEnsemble:
    edge_sets: tuple[LabeledEdgeSet, ...]

    def __post_init__(self):
        if not self.edge_sets:
            raise ValueError("human ensemble needs at least one edge set")

    def support(self) -> set[EdgeKey]:
        keys: set[EdgeKey] = set()
        for es in self.edge_sets:
            keys.update(es.entries)
        return keys


def human_ensemble_label(h: HumanEnsemble, edge: EdgeKey) -> int:
    """Majority among the annotators who labeled the edge; an exact tie or
    an unlabeled edge is unknown."""
    pos = neg = 0
    for es in h.edge_sets:
        label = es.entries.get(edge, UNKNOWN)
        if label == POSITIVE:
            pos += 1
        elif label == NEGATIVE:
            neg += 1
    if pos > neg:
        return POSITIVE
    if neg > pos:
        return NEGATIVE
    return UNKNOWN


def ensemble_human_score(ba_vs_ensemble: float, ba_vs_human: float) -> float:
    """Mean of the balanced accuracies against the two references."""
    for v in (ba_vs_ensemble, ba_vs_human):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"balanced accuracy out of [0,1]: {v}")
    return (ba_vs_ensemble + ba_vs_human) / 2.0


def read_partition_manifest(path) -> MethodEnsemble:
    """Manifest: one partition-file path per line, relative to the manifest."""
    return MethodEnsemble(tuple(read_partition(p) for p in _manifest_paths(path)))


def read_edge_set_manifest(path) -> HumanEnsemble:
    return HumanEnsemble(tuple(read_edge_set(p) for p in _manifest_paths(path)))


def _manifest_paths(path):
    from pathlib import Path

    base = Path(path).parent
    paths = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            p = Path(line)
            paths.append(p if p.is_absolute() else base / p)
    if not paths:
        raise ValueError(f"{path}: empty manifest")
    return paths
