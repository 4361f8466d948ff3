"""Indexed triangle meshes: welding, normals, normalization, topology checks."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .errors import EmptyMesh

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IndexedMesh:
    """Vertices (position, optional normal, color) plus triangle index triples."""

    positions: np.ndarray              # (V, 3) float64
    triangles: np.ndarray              # (T, 3) int64
    colors: np.ndarray                 # (V, 3) float64 in [0, 1]
    normals: np.ndarray | None = None  # (V, 3) unit vectors

    @classmethod
    def empty(cls) -> "IndexedMesh":
        return cls(positions=np.zeros((0, 3)), triangles=np.zeros((0, 3), dtype=np.int64),
                   colors=np.zeros((0, 3)))

    @property
    def vertex_count(self) -> int:
        return self.positions.shape[0]

    @property
    def triangle_count(self) -> int:
        return self.triangles.shape[0]

    def validate(self) -> "IndexedMesh":
        v = self.vertex_count
        if self.positions.shape != (v, 3) or self.colors.shape != (v, 3):
            raise ValueError("positions and colors must both be (V, 3)")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise ValueError("triangles must be (T, 3)")
        if not np.isfinite(self.positions).all() or not np.isfinite(self.colors).all():
            raise ValueError("positions/colors contain NaN or Inf")
        if self.triangle_count:
            if self.triangles.min() < 0 or self.triangles.max() >= v:
                raise ValueError("triangle index out of range")
        if self.normals is not None:
            if self.normals.shape != (v, 3) or not np.isfinite(self.normals).all():
                raise ValueError("normals must be finite (V, 3)")
            lengths = np.linalg.norm(self.normals, axis=1)
            if v and np.abs(lengths - 1.0).max() > 1e-6:
                raise ValueError("normals must have unit length within 1e-6")
        return self


def degenerate_triangle_mask(triangles: np.ndarray) -> np.ndarray:
    """True where a triangle repeats a vertex index."""
    return ((triangles[:, 0] == triangles[:, 1])
            | (triangles[:, 1] == triangles[:, 2])
            | (triangles[:, 0] == triangles[:, 2]))


def weld_vertices(mesh: IndexedMesh, eps: float) -> IndexedMesh:
    """Merge vertices sharing a quantization cell of size eps (max-metric).

    eps = 0 merges exactly-coincident positions only. Each group keeps its
    first vertex as representative; triangles are reindexed and triangles
    made degenerate by merging are dropped. Idempotent for fixed eps.
    """
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    v = mesh.vertex_count
    if v == 0:
        return mesh
    if eps == 0:
        keys = mesh.positions + 0.0  # normalizes -0.0 so it matches +0.0
    else:
        keys = np.floor(mesh.positions / eps)
    _, inverse = np.unique(keys, axis=0, return_inverse=True)
    n_groups = int(inverse.max()) + 1
    first = np.full(n_groups, v, dtype=np.int64)
    np.minimum.at(first, inverse, np.arange(v, dtype=np.int64))
    order = np.argsort(first, kind="stable")  # groups by first occurrence
    rank = np.empty(n_groups, dtype=np.int64)
    rank[order] = np.arange(n_groups)
    new_index = rank[inverse]
    reps = first[order]

    triangles = new_index[mesh.triangles] if mesh.triangle_count else mesh.triangles
    triangles = triangles[~degenerate_triangle_mask(triangles)] if len(triangles) else triangles
    return IndexedMesh(
        positions=mesh.positions[reps],
        triangles=triangles,
        colors=mesh.colors[reps],
        normals=None if mesh.normals is None else mesh.normals[reps],
    )


def compute_vertex_normals(mesh: IndexedMesh) -> IndexedMesh:
    """Per-vertex normals: normalized sum of area-weighted face normals.

    Vertices whose accumulated normal sums to zero (including vertices with
    no incident face) get the +z fallback; their count is logged.
    """
    v = mesh.vertex_count
    acc = np.zeros((v, 3))
    if mesh.triangle_count:
        p = mesh.positions
        t = mesh.triangles
        face_n = np.cross(p[t[:, 1]] - p[t[:, 0]], p[t[:, 2]] - p[t[:, 0]])
        for k in range(3):
            np.add.at(acc, t[:, k], face_n)
    lengths = np.linalg.norm(acc, axis=1)
    zero = lengths == 0.0
    if zero.any():
        log.warning("normal fallback applied to %d of %d vertices", int(zero.sum()), v)
    normals = np.where(zero[:, None], np.array([0.0, 0.0, 1.0]),
                       acc / np.where(zero, 1.0, lengths)[:, None])
    return replace(mesh, normals=normals)


def normalize_bounds(mesh: IndexedMesh, target_extent: float = 1.0) -> IndexedMesh:
    """Uniformly scale and translate so the bbox is origin-centered with the
    requested maximum extent."""
    if mesh.vertex_count == 0:
        raise EmptyMesh("cannot normalize an empty mesh")
    if not target_extent > 0:
        raise ValueError(f"target_extent must be > 0, got {target_extent}")
    lo = mesh.positions.min(axis=0)
    hi = mesh.positions.max(axis=0)
    center = (lo + hi) / 2.0
    extent = float((hi - lo).max())
    scale = target_extent / extent if extent > 0 else 1.0
    return replace(mesh, positions=(mesh.positions - center) * scale)


@dataclass(frozen=True)
class TopologyReport:
    """Counts and health flags describing a mesh's connectivity."""

    vertex_count: int
    edge_count: int
    face_count: int
    euler_characteristic: int
    connected_components: int
    watertight: bool
    manifold: bool


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        parent = self.parent
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _vertex_links_manifold(triangles: np.ndarray, vertex_count: int) -> bool:
    """Check each used vertex's incident faces form a single fan (disk/half-disk)."""
    link_edges: dict[int, list[tuple[int, int]]] = {}
    for a, b, c in triangles.tolist():
        link_edges.setdefault(a, []).append((b, c))
        link_edges.setdefault(b, []).append((c, a))
        link_edges.setdefault(c, []).append((a, b))
    for edges in link_edges.values():
        degree: dict[int, int] = {}
        nodes: dict[int, int] = {}
        for u, w in edges:
            degree[u] = degree.get(u, 0) + 1
            degree[w] = degree.get(w, 0) + 1
            nodes.setdefault(u, len(nodes))
            nodes.setdefault(w, len(nodes))
        if any(d > 2 for d in degree.values()):
            return False
        uf = _UnionFind(len(nodes))
        for u, w in edges:
            uf.union(nodes[u], nodes[w])
        roots = {uf.find(i) for i in range(len(nodes))}
        if len(roots) != 1:
            return False
    return True


def analyze_topology(mesh: IndexedMesh) -> TopologyReport:
    """Exact counts plus watertight/manifold/component analysis."""
    v = mesh.vertex_count
    f = mesh.triangle_count
    if f == 0:
        return TopologyReport(vertex_count=v, edge_count=0, face_count=0,
                              euler_characteristic=v, connected_components=v,
                              watertight=False, manifold=False)
    t = mesh.triangles
    half_edges = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    und = np.sort(half_edges, axis=1)
    edges, counts = np.unique(und, axis=0, return_counts=True)
    e = edges.shape[0]

    uf = _UnionFind(v)
    for a, b in edges.tolist():
        uf.union(a, b)
    components = len({uf.find(i) for i in range(v)})

    watertight = bool((counts == 2).all())
    manifold = bool((counts <= 2).all()) and _vertex_links_manifold(t, v)
    return TopologyReport(
        vertex_count=v,
        edge_count=e,
        face_count=f,
        euler_characteristic=v - e + f,
        connected_components=components,
        watertight=watertight,
        manifold=manifold,
    )
