"""Similarity graph primitives.

Models are nodes of an undirected complete graph; edges carry labels
+1 (similar), -1 (dissimilar), or 0 (unknown). Unknown edges are never
stored: a sparse edge set holds only the +1/-1 entries, and a partition
acts as an implicit dense similarity matrix queried lazily.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

EdgeKey = tuple[str, str]

POSITIVE = 1
NEGATIVE = -1
UNKNOWN = 0


def canonical_edge(i: str, j: str) -> EdgeKey:
    """Canonical undirected edge key: endpoints in lexicographic order."""
    if i == j:
        raise ValueError(f"self-edge not representable: {i!r}")
    return (i, j) if i < j else (j, i)


@dataclass
class LabeledEdgeSet:
    """Sparse map from canonical edges to {+1, -1}; absence means unknown."""

    owner: str = ""
    entries: dict[EdgeKey, int] = field(default_factory=dict)

    def insert(self, i: str, j: str, label: int) -> None:
        if label not in (POSITIVE, NEGATIVE):
            raise ValueError(f"edge label must be +1 or -1, got {label}")
        self.entries[canonical_edge(i, j)] = label

    def label(self, i: str, j: str) -> int:
        return self.entries.get(canonical_edge(i, j), UNKNOWN)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple[EdgeKey, int]]:
        return iter(self.entries.items())

    def update(self, other: "LabeledEdgeSet") -> None:
        self.entries.update(other.entries)


@dataclass(frozen=True)
class Partition:
    """Assignment of every model id to exactly one of K clusters.

    Cluster indices must be dense in [0, K). A partition doubles as a
    dense similarity matrix: same cluster => +1, different => -1.
    """

    assignment: dict[str, int]
    k: int

    def __post_init__(self):
        if not self.assignment:
            raise ValueError("empty partition")
        seen = set(self.assignment.values())
        if self.k <= 0 or seen != set(range(self.k)):
            raise ValueError(
                f"cluster indices must be dense in [0, {self.k}), got {sorted(seen)}"
            )

    @classmethod
    def from_assignment(cls, assignment: dict[str, int]) -> "Partition":
        """Build with K inferred; indices are re-densified preserving order."""
        distinct = sorted(set(assignment.values()))
        remap = {c: i for i, c in enumerate(distinct)}
        return cls({m: remap[c] for m, c in assignment.items()}, len(distinct))

    @property
    def models(self) -> Iterable[str]:
        return self.assignment.keys()

    def cluster_of(self, model: str) -> int:
        try:
            return self.assignment[model]
        except KeyError:
            raise KeyError(f"unknown model id: {model!r}") from None

    def clusters(self) -> list[list[str]]:
        out: list[list[str]] = [[] for _ in range(self.k)]
        for m, c in self.assignment.items():
            out[c].append(m)
        return out

    def edge_label(self, edge: EdgeKey) -> int:
        a, b = edge
        return POSITIVE if self.cluster_of(a) == self.cluster_of(b) else NEGATIVE


def partition_edge_label(p: Partition, edge: EdgeKey) -> int:
    """+1 iff the endpoints share a cluster, else -1. Never 0."""
    return p.edge_label(edge)


def positive_pair_count(p: Partition) -> int:
    """Number of unordered same-cluster pairs: sum over clusters of C(n,2)."""
    sizes: dict[int, int] = {}
    for c in p.assignment.values():
        sizes[c] = sizes.get(c, 0) + 1
    return sum(n * (n - 1) // 2 for n in sizes.values())


def consistency(x: LabeledEdgeSet, y: LabeledEdgeSet) -> Optional[float]:
    """Fraction of commonly-labeled edges with equal labels.

    Returns None when the supports are disjoint (undefined, not an error).
    """
    common = x.entries.keys() & y.entries.keys()
    if not common:
        return None
    agree = sum(1 for e in common if x.entries[e] == y.entries[e])
    return agree / len(common)


def label_stats(x: LabeledEdgeSet, universe_size: int) -> tuple[int, int, int]:
    """(positive, negative, unknown) counts over a universe of edges."""
    if universe_size < len(x):
        raise ValueError(
            f"universe ({universe_size}) smaller than labeled edges ({len(x)})"
        )
    pos = sum(1 for lbl in x.entries.values() if lbl == POSITIVE)
    neg = len(x) - pos
    return pos, neg, universe_size - len(x)


def all_edges(models: Iterable[str]) -> Iterator[EdgeKey]:
    """All canonical edges over a model set, lexicographically ordered."""
    ids = sorted(models)
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            yield (ids[i], ids[j])


# ---------------------------------------------------------------------------
# File formats (TSV, UTF-8, LF; '#' lines are comments)

def write_edge_set(es: LabeledEdgeSet, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for (a, b), lbl in sorted(es.entries.items()):
            f.write(f"{a}\t{b}\t{'+1' if lbl == POSITIVE else '-1'}\n")


def read_edge_set(path, owner: str = "") -> LabeledEdgeSet:
    es = LabeledEdgeSet(owner=owner or str(path))
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3 or parts[2] not in ("+1", "-1", "1"):
                raise ValueError(f"{path}:{lineno}: malformed edge line: {line!r}")
            a, b, lbl = parts
            if not (a < b):
                raise ValueError(f"{path}:{lineno}: ids not canonical: {a!r} {b!r}")
            es.insert(a, b, POSITIVE if lbl in ("+1", "1") else NEGATIVE)
    return es


def write_partition(p: Partition, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for m in sorted(p.assignment):
            f.write(f"{m}\t{p.assignment[m]}\n")


def read_partition(path) -> Partition:
    assignment: dict[str, int] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: malformed partition line")
            model, idx = parts
            if model in assignment:
                raise ValueError(f"{path}:{lineno}: duplicate model id {model!r}")
            if not idx.isdigit():
                raise ValueError(f"{path}:{lineno}: bad cluster index {idx!r}")
            assignment[model] = int(idx)
    return Partition.from_assignment(assignment)
