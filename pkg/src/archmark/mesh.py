"""Indexed triangle mesh built from a raw triangle soup.

Indexing deduplicates vertices (exact bitwise comparison by default, or on a
snap grid), drops degenerate triangles, recomputes face normals from winding
order, and builds the face and vertex adjacency used by every later stage.

Conventions:

* ``faces[f, k]`` are vertex indices; edge slot ``k`` of face ``f`` joins
  corners ``k`` and ``(k + 1) % 3``.
* ``adjacency[f, k]`` is the face across that edge, or -1.
* ``boundary_edge[f, k]`` marks edges with exactly one incident face.

Edges with more than two incident faces are non-manifold: the first two
incidences (lowest face indices) are paired, the rest are left unconnected
and logged.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .stl import TriangleSoup

log = logging.getLogger(__name__)

_MIN_CROSS_NORM = 1e-12     # below this the winding normal is unusable


@dataclass
class IndexedMesh:
    """Deduplicated, adjacency-indexed triangle mesh (units: mm).

    Attributes
    ----------
    vertices : (V, 3) float64
    faces : (F, 3) int32
    face_normals : (F, 3) float64
        Unit normals recomputed from winding order.
    face_areas : (F,) float64
    face_centroids : (F, 3) float64
    adjacency : (F, 3) int32
        Neighbouring face per edge slot, -1 where there is none.
    adjacency_slot : (F, 3) int8
        The neighbour's edge slot for the same edge, -1 where there is none,
        so ``adjacency[adjacency[f, k], adjacency_slot[f, k]] == f``.
    boundary_edge : (F, 3) bool
    neighbor_indptr, neighbor_indices : int32 arrays
        CSR layout of the vertex 1-ring (neighbours sorted ascending).
    """

    vertices: np.ndarray
    faces: np.ndarray
    face_normals: np.ndarray
    face_areas: np.ndarray
    face_centroids: np.ndarray
    adjacency: np.ndarray
    adjacency_slot: np.ndarray
    boundary_edge: np.ndarray
    neighbor_indptr: np.ndarray
    neighbor_indices: np.ndarray
    n_merged_vertices: int = 0
    n_degenerate_faces: int = 0
    n_nonmanifold_edges: int = 0
    n_normal_mismatches: int = 0
    name: str = ""

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_faces(self) -> int:
        return self.faces.shape[0]

    def vertex_neighbors(self, v: int) -> np.ndarray:
        """1-ring vertex indices of vertex ``v``."""
        return self.neighbor_indices[self.neighbor_indptr[v]:
                                     self.neighbor_indptr[v + 1]]

    def has_boundary_edge(self) -> np.ndarray:
        """(F,) bool: faces owning at least one boundary edge."""
        return self.boundary_edge.any(axis=1)


def index_mesh(soup: TriangleSoup, snap: float = 0.0) -> IndexedMesh:
    """Index a triangle soup into an :class:`IndexedMesh`.

    Parameters
    ----------
    soup : TriangleSoup
    snap : float
        Optional snapping grid for vertex merging.  0 (default) merges only
        bitwise-identical coordinates.

    Raises
    ------
    ValueError
        If the soup is empty or all triangles are degenerate.
    """
    if len(soup) == 0:
        raise ValueError("cannot index an empty triangle soup")

    corner = soup.triangles.reshape(-1, 3)
    key = np.round(corner / snap) * snap if snap > 0 else corner
    vertices, inverse = np.unique(key, axis=0, return_inverse=True)
    faces = inverse.reshape(-1, 3).astype(np.int32)
    n_merged = corner.shape[0] - vertices.shape[0]

    # Degenerate faces: repeated vertex after merging, or collinear corners.
    v0 = vertices[faces[:, 0]]
    cross = np.cross(vertices[faces[:, 1]] - v0, vertices[faces[:, 2]] - v0)
    cross_norm = np.linalg.norm(cross, axis=1)
    repeated = ((faces[:, 0] == faces[:, 1]) | (faces[:, 1] == faces[:, 2])
                | (faces[:, 0] == faces[:, 2]))
    degenerate = repeated | (cross_norm <= _MIN_CROSS_NORM)
    n_degenerate = int(degenerate.sum())
    if n_degenerate:
        log.warning("dropped %d degenerate triangle(s)", n_degenerate)
        keep = ~degenerate
        faces = faces[keep]
        cross = cross[keep]
        cross_norm = cross_norm[keep]
        stored = soup.stored_normals[keep]
    else:
        stored = soup.stored_normals
    if faces.shape[0] == 0:
        raise ValueError("all triangles are degenerate")

    face_normals = cross / cross_norm[:, None]
    face_areas = 0.5 * cross_norm
    face_centroids = vertices[faces].mean(axis=1)

    # Stored normals are discarded, but disagreement with the winding order
    # is worth surfacing: it usually means inconsistent orientation.
    stored_len = np.linalg.norm(stored, axis=1)
    usable = stored_len > 1e-6
    agree = np.einsum("ij,ij->i", face_normals[usable],
                      stored[usable] / stored_len[usable, None])
    n_mismatch = int((agree < 0.99).sum())
    if n_mismatch:
        log.warning("%d stored normal(s) disagree with winding order; "
                    "stored normals ignored", n_mismatch)

    adjacency, adjacency_slot, boundary_edge, n_nonmanifold = \
        _face_adjacency(faces)
    indptr, indices = _vertex_adjacency(faces, vertices.shape[0])

    return IndexedMesh(
        vertices=vertices,
        faces=faces,
        face_normals=face_normals,
        face_areas=face_areas,
        face_centroids=face_centroids,
        adjacency=adjacency,
        adjacency_slot=adjacency_slot,
        boundary_edge=boundary_edge,
        neighbor_indptr=indptr,
        neighbor_indices=indices,
        n_merged_vertices=n_merged,
        n_degenerate_faces=n_degenerate,
        n_nonmanifold_edges=n_nonmanifold,
        n_normal_mismatches=n_mismatch,
        name=soup.name,
    )


def _face_adjacency(faces: np.ndarray):
    nf = faces.shape[0]
    fi = np.repeat(np.arange(nf, dtype=np.int64), 3)
    slot = np.tile(np.arange(3, dtype=np.int64), nf)
    a = faces[fi, slot].astype(np.int64)
    b = faces[fi, (slot + 1) % 3].astype(np.int64)
    lo, hi = np.minimum(a, b), np.maximum(a, b)

    # Group directed edges by undirected key; within a group incidences are
    # ordered by face index, which fixes the non-manifold pairing.
    order = np.lexsort((fi, hi, lo))
    lo_s, hi_s = lo[order], hi[order]
    new_group = np.empty(order.size, dtype=bool)
    new_group[0] = True
    np.not_equal(lo_s[1:], lo_s[:-1], out=new_group[1:])
    new_group[1:] |= hi_s[1:] != hi_s[:-1]
    starts = np.flatnonzero(new_group)
    counts = np.diff(np.append(starts, order.size))

    adjacency = np.full((nf, 3), -1, dtype=np.int32)
    adjacency_slot = np.full((nf, 3), -1, dtype=np.int8)
    boundary_edge = np.zeros((nf, 3), dtype=bool)

    s1 = starts[counts == 1]
    boundary_edge[fi[order[s1]], slot[order[s1]]] = True

    s2 = starts[counts == 2]
    e0, e1 = order[s2], order[s2 + 1]
    adjacency[fi[e0], slot[e0]] = fi[e1]
    adjacency[fi[e1], slot[e1]] = fi[e0]
    adjacency_slot[fi[e0], slot[e0]] = slot[e1]
    adjacency_slot[fi[e1], slot[e1]] = slot[e0]

    bad = np.flatnonzero(counts > 2)
    for g in bad:
        s = starts[g]
        e0, e1 = order[s], order[s + 1]
        adjacency[fi[e0], slot[e0]] = fi[e1]
        adjacency[fi[e1], slot[e1]] = fi[e0]
        adjacency_slot[fi[e0], slot[e0]] = slot[e1]
        adjacency_slot[fi[e1], slot[e1]] = slot[e0]
    if bad.size:
        log.warning("%d non-manifold edge(s); kept the first two incident "
                    "faces of each, left %d incidence(s) unconnected",
                    bad.size, int((counts[counts > 2] - 2).sum()))
    return adjacency, adjacency_slot, boundary_edge, int(bad.size)


def _vertex_adjacency(faces: np.ndarray, n_vertices: int):
    a = faces[:, [0, 1, 2]].ravel().astype(np.int64)
    b = faces[:, [1, 2, 0]].ravel().astype(np.int64)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    uniq = np.unique(lo * np.int64(n_vertices) + hi)
    ulo, uhi = uniq // n_vertices, uniq % n_vertices
    src = np.concatenate([ulo, uhi])
    dst = np.concatenate([uhi, ulo])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(n_vertices + 1, dtype=np.int32)
    indptr[1:] = np.cumsum(np.bincount(src, minlength=n_vertices))
    return indptr, dst.astype(np.int32)


def surface_area(mesh: IndexedMesh, face_subset=None) -> float:
    """Total area (mm^2) of the mesh or of a subset of face indices."""
    if face_subset is None:
        return float(mesh.face_areas.sum())
    face_subset = np.asarray(face_subset)
    if face_subset.dtype == bool:
        return float(mesh.face_areas[face_subset].sum())
    return float(mesh.face_areas[np.asarray(face_subset, dtype=np.int64)].sum())


def vertex_normals(mesh: IndexedMesh) -> np.ndarray:
    """Per-vertex unit normals: normalised mean of incident face normals.

    Vertices whose incident normals cancel exactly keep a zero vector.
    """
    acc = np.zeros((mesh.n_vertices, 3))
    for k in range(3):
        np.add.at(acc, mesh.faces[:, k], mesh.face_normals)
    norm = np.linalg.norm(acc, axis=1)
    ok = norm > 1e-12
    acc[ok] /= norm[ok, None]
    acc[~ok] = 0.0
    return acc
