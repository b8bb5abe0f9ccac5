"""Mesh ingestion and conversion to point clouds and voxel grids.

Pipeline: OBJ mesh -> area-weighted surface samples -> per-dimension
min-max normalization to [0,1] -> occupancy voxel grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TriangleMesh:
    vertices: np.ndarray  # (v, 3) float64
    triangles: np.ndarray  # (t, 3) int64, indices into vertices

    def __post_init__(self):
        if self.triangles.shape[0] < 1:
            raise ValueError("mesh has zero triangles")
        if self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices):
            raise ValueError("triangle index out of range")

    def triangle_areas(self) -> np.ndarray:
        a = self.vertices[self.triangles[:, 0]]
        b = self.vertices[self.triangles[:, 1]]
        c = self.vertices[self.triangles[:, 2]]
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray  # (n, 3) float64

    def __post_init__(self):
        if self.points.ndim != 2 or self.points.shape[1] != 3:
            raise ValueError("points must be an (n, 3) array")
        if not np.isfinite(self.points).all():
            raise ValueError("non-finite coordinates in point cloud")

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class VoxelGrid:
    resolution: int
    occupied: frozenset[tuple[int, int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.resolution < 1:
            raise ValueError("resolution must be >= 1")
        for cell in self.occupied:
            if any(c < 0 or c >= self.resolution for c in cell):
                raise ValueError(f"cell {cell} outside grid of resolution {self.resolution}")


def load_obj(data: bytes | str, ignore_unsupported: bool = True) -> TriangleMesh:
    """Parse an OBJ subset: `v` records and triangular `f` records (1-based).

    Faces with more than three vertices are an error; other record types
    (vn, vt, comments, groups...) are skipped when ignore_unsupported is
    set, rejected otherwise.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    vertices: list[list[float]] = []
    triangles: list[list[int]] = []
    for lineno, raw in enumerate(data.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise ValueError(f"line {lineno}: malformed vertex record")
            vertices.append([float(x) for x in parts[1:4]])
        elif tag == "f":
            if len(parts) != 4:
                raise ValueError(f"line {lineno}: only triangular faces supported")
            idx = []
            for tok in parts[1:]:
                vi = int(tok.split("/")[0])
                if vi < 0:  # negative indices count from the end
                    vi = len(vertices) + 1 + vi
                if vi < 1 or vi > len(vertices):
                    raise ValueError(f"line {lineno}: face index {tok} out of range")
                idx.append(vi - 1)
            triangles.append(idx)
        elif not ignore_unsupported:
            raise ValueError(f"line {lineno}: unsupported record {tag!r}")
    if not triangles:
        raise ValueError("zero triangles in OBJ input")
    return TriangleMesh(
        np.asarray(vertices, dtype=np.float64),
        np.asarray(triangles, dtype=np.int64),
    )


def sample_surface(mesh: TriangleMesh, n: int, seed: int) -> PointCloud:
    """Sample n points uniformly over the mesh surface.

    Triangles are selected with probability proportional to area; the
    point within a triangle is uniform via the sqrt barycentric trick.
    Deterministic given the seed.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    areas = mesh.triangle_areas()
    total = areas.sum()
    if total <= 0.0:
        raise ValueError("degenerate mesh: total surface area is zero")
    rng = np.random.default_rng(seed)
    tri = rng.choice(len(areas), size=n, p=areas / total)
    u = rng.random(n)
    v = rng.random(n)
    su = np.sqrt(u)
    w0 = 1.0 - su
    w1 = su * (1.0 - v)
    w2 = su * v
    a = mesh.vertices[mesh.triangles[tri, 0]]
    b = mesh.vertices[mesh.triangles[tri, 1]]
    c = mesh.vertices[mesh.triangles[tri, 2]]
    pts = w0[:, None] * a + w1[:, None] * b + w2[:, None] * c
    return PointCloud(pts)


def minmax_normalize(cloud: PointCloud) -> PointCloud:
    """Affine-scale each dimension independently so min -> 0 and max -> 1.

    A degenerate dimension (max == min) maps to constant 0.
    """
    if len(cloud) == 0:
        raise ValueError("cannot normalize an empty cloud")
    lo = cloud.points.min(axis=0)
    hi = cloud.points.max(axis=0)
    span = hi - lo
    out = np.zeros_like(cloud.points)
    live = span > 0
    out[:, live] = (cloud.points[:, live] - lo[live]) / span[live]
    return PointCloud(out)


def voxelize(cloud: PointCloud, resolution: int = 32) -> VoxelGrid:
    """Occupancy grid over [0,1]^3: cell index floor(x*R) clamped to R-1."""
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    pts = cloud.points
    if (pts < -1e-9).any() or (pts > 1.0 + 1e-9).any():
        raise ValueError("point cloud not normalized to [0,1]^3")
    cells = np.floor(np.clip(pts, 0.0, 1.0) * resolution).astype(np.int64)
    np.minimum(cells, resolution - 1, out=cells)
    occupied = frozenset(map(tuple, cells.tolist()))
    return VoxelGrid(resolution, occupied)


def write_xyz(cloud: PointCloud, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for x, y, z in cloud.points:
            f.write(f"{x:.9g} {y:.9g} {z:.9g}\n")


def read_xyz(path) -> PointCloud:
    pts = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            coords = line.split()
            if len(coords) != 3:
                raise ValueError(f"{path}:{lineno}: expected three coordinates")
            pts.append([float(c) for c in coords])
    if not pts:
        raise ValueError(f"{path}: empty point cloud")
    return PointCloud(np.asarray(pts, dtype=np.float64))
