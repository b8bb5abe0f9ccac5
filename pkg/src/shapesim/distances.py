"""Shape-to-shape distances and the cached pairwise distance matrix.

Chamfer uses the squared-distance convention (sum of the two directed
mean-squared nearest-neighbor terms), so values are not comparable to
root-form Chamfer implementations. Jaccard distance is 1 - IoU over
occupancy voxel grids.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .geometry import PointCloud, VoxelGrid


def chamfer(p: PointCloud, q: PointCloud) -> float:
    """Squared Chamfer distance between two nonempty point clouds."""
    if len(p) == 0 or len(q) == 0:
        raise ValueError("chamfer distance requires nonempty clouds")
    dp, _ = cKDTree(q.points).query(p.points, k=1)
    dq, _ = cKDTree(p.points).query(q.points, k=1)
    return float(np.mean(dp**2) + np.mean(dq**2))


def jaccard(a: VoxelGrid, b: VoxelGrid) -> float:
    """Jaccard distance 1 - |A∩B|/|A∪B| between same-resolution grids.

    Both grids empty -> 0; exactly one empty -> 1 (a too-thin object has
    zero IoU against anything).
    """
    if a.resolution != b.resolution:
        raise ValueError(
            f"resolution mismatch: {a.resolution} vs {b.resolution}"
        )
    if not a.occupied and not b.occupied:
        return 0.0
    union = len(a.occupied | b.occupied)
    inter = len(a.occupied & b.occupied)
    return 1.0 - inter / union


@dataclass(frozen=True)
class DistanceMatrix:
    ids: tuple[str, ...]
    values: np.ndarray  # (n, n) float64, symmetric, zero diagonal
    metric: str  # "chamfer" or "jaccard"

    def __post_init__(self):
        n = len(self.ids)
        if self.values.shape != (n, n):
            raise ValueError("matrix shape does not match id count")
        if not np.isfinite(self.values).all() or (self.values < 0).any():
            raise ValueError("distances must be finite and non-negative")
        if np.abs(self.values - self.values.T).max(initial=0.0) > 1e-12:
            raise ValueError("matrix not symmetric")
        if np.abs(np.diag(self.values)).max(initial=0.0) != 0.0:
            raise ValueError("diagonal must be exactly zero")

    def index_of(self, model: str) -> int:
        try:
            return self.ids.index(model)
        except ValueError:
            raise KeyError(f"model {model!r} not in distance matrix") from None

    def get(self, a: str, b: str) -> float:
        return float(self.values[self.index_of(a), self.index_of(b)])


_METRICS = {"chamfer": (chamfer, PointCloud), "jaccard": (jaccard, VoxelGrid)}


def distance_matrix(shapes, metric: str, threads: int = 1) -> DistanceMatrix:
    """All-pairs distances over (model_id, shape) pairs.

    Each (i, j) cell has exactly one producer, so the result is identical
    for any thread count.
    """
    if metric not in _METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    fn, want = _METRICS[metric]
    shapes = list(shapes)
    if len(shapes) < 2:
        raise ValueError("need at least two shapes")
    for mid, shp in shapes:
        if not isinstance(shp, want):
            raise TypeError(
                f"metric {metric!r} needs {want.__name__}, got "
                f"{type(shp).__name__} for {mid!r}"
            )
    n = len(shapes)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    values = np.zeros((n, n), dtype=np.float64)

    def cell(ij):
        i, j = ij
        return i, j, fn(shapes[i][1], shapes[j][1])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(cell, pairs))
    else:
        results = [cell(ij) for ij in pairs]
    for i, j, d in results:
        values[i, j] = d
        values[j, i] = d
    return DistanceMatrix(tuple(mid for mid, _ in shapes), values, metric)


def write_matrix(m: DistanceMatrix, path) -> None:
    """DMAT text format; writing a loaded matrix reproduces the file."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"DMAT {m.metric} {len(m.ids)}\n")
        f.write("\t".join(m.ids) + "\n")
        for row in m.values:
            f.write("\t".join(f"{v:.12g}" for v in row) + "\n")


def read_matrix(path) -> DistanceMatrix:
    with open(path, encoding="utf-8") as f:
        header = f.readline().split()
        if len(header) != 3 or header[0] != "DMAT":
            raise ValueError(f"{path}: not a DMAT file")
        metric, n = header[1], int(header[2])
        ids = tuple(f.readline().rstrip("\n").split("\t"))
        if len(ids) != n:
            raise ValueError(f"{path}: id count mismatch")
        values = np.empty((n, n), dtype=np.float64)
        for i in range(n):
            row = f.readline().split("\t")
            if len(row) != n:
                raise ValueError(f"{path}: row {i} has {len(row)} entries")
            values[i] = [float(v) for v in row]
    return DistanceMatrix(ids, values, metric)
