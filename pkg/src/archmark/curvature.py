"""Discrete curvature across mesh edges and the crossing costs built on it.

For two faces sharing an edge, with unit normals ``n0``/``n1`` and centroid
displacement ``dx`` from face 0 to face 1:

* magnitude  ``|k| = |n0 x n1| / |dx|``  (1/mm),
* sign       ``-sign(n0 . dx)``: negative in creases (inside corners, like
  the gum line around a tooth), positive on ridges.

The flood-fill edge cost is ``max(-signed, 0)``: free along flats and over
ridges, increasingly expensive across creases.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .mesh import IndexedMesh

log = logging.getLogger(__name__)

#: Centroid separations below this (mm) make the quotient meaningless; the
#: edge is treated as flat and a warning emitted.
_MIN_SEPARATION = 1e-9


@dataclass
class EdgeCurvatureMap:
    """Signed curvature per face edge slot, aligned with ``mesh.adjacency``.

    ``signed[f, k]`` is the curvature across edge slot ``k`` of face ``f``
    (NaN where there is no neighbour).  The map is symmetric: both incident
    faces see the same value.
    """

    signed: np.ndarray      # (F, 3) float64, NaN on boundary slots


def edge_curvatures(mesh: IndexedMesh) -> EdgeCurvatureMap:
    """Signed discrete curvature for every interior edge.

    Each edge is evaluated once, from its lower-indexed face, and the value
    written to both incident slots, so the map is symmetric down to the bit.
    """
    adj = mesh.adjacency
    fi, slot = np.nonzero(adj >= 0)
    nb = adj[fi, slot]
    lower = fi < nb
    fi, slot, nb = fi[lower], slot[lower], nb[lower]
    nb_slot = mesh.adjacency_slot[fi, slot]

    n0 = mesh.face_normals[fi]
    n1 = mesh.face_normals[nb]
    dx = mesh.face_centroids[nb] - mesh.face_centroids[fi]
    sep = np.linalg.norm(dx, axis=1)

    ok = sep > _MIN_SEPARATION
    n_bad = int((~ok).sum())
    if n_bad:
        log.warning("%d edge(s) with coincident face centroids treated as "
                    "flat", n_bad)
    value = np.zeros(fi.shape[0])
    mag = np.linalg.norm(np.cross(n0[ok], n1[ok]), axis=1) / sep[ok]
    value[ok] = -np.sign(np.einsum("ij,ij->i", n0[ok], dx[ok])) * mag

    signed = np.full((mesh.n_faces, 3), np.nan)
    signed[fi, slot] = value
    signed[nb, nb_slot] = value
    return EdgeCurvatureMap(signed=signed)


def cost_map(curv: EdgeCurvatureMap) -> np.ndarray:
    """(F, 3) flood-fill crossing costs: ``max(-signed, 0)``, 0 on boundary.

    Boundary slots get cost 0 but are never crossed (no neighbour there).
    """
    cost = np.maximum(-curv.signed, 0.0)
    return np.nan_to_num(cost, nan=0.0, copy=False)
