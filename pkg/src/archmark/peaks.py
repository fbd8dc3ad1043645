"""Tooth-tip candidates: strict local height maxima.

A vertex is a peak when its occlusal height strictly exceeds every 1-ring
neighbour; ties disqualify both sides, so plateau rims produce no peaks.
A follow-up filter drops everything 6 mm or more below the highest tip,
leaving cusp-scale candidates only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import IndexedMesh
from .orientation import Frame


@dataclass
class Peak:
    """A strict local maximum of occlusal height.

    ``height`` is z in frame coordinates; ``position`` is the world-space
    vertex location.
    """

    vertex: int
    position: np.ndarray
    height: float


def find_peaks(mesh: IndexedMesh, frame: Frame) -> list[Peak]:
    """All strict 1-ring height maxima, ordered by vertex index."""
    heights = frame.heights(mesh.vertices)
    indptr, neigh = mesh.neighbor_indptr, mesh.neighbor_indices
    counts = np.diff(indptr)
    nonempty = counts > 0
    # Consecutive non-empty CSR starts are exact segment boundaries, so a
    # single reduceat yields each vertex's max neighbour height.  Vertices
    # with an empty ring (orphaned by degenerate-face removal) never peak.
    max_neigh = np.full(mesh.n_vertices, np.inf)
    if nonempty.any():
        starts = indptr[:-1][nonempty]
        max_neigh[nonempty] = np.maximum.reduceat(heights[neigh], starts)
    return [Peak(vertex=int(v), position=mesh.vertices[v],
                 height=float(heights[v]))
            for v in np.flatnonzero(heights > max_neigh)]


def filter_by_height(peaks: list[Peak], threshold: float = 6.0) -> list[Peak]:
    """Keep peaks less than ``threshold`` mm below the highest peak.

    A peak exactly ``threshold`` below is excluded.  Returns [] for [].
    """
    if not peaks:
        return []
    top = max(p.height for p in peaks)
    return [p for p in peaks if top - p.height < threshold]
