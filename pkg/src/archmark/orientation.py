"""Canonical coordinate frame for a dental model.

The frame is recovered in two steps:

1. :func:`orient` - principal component analysis of the vertex cloud gives
   the three axes (widest spread = left/right, then forwards/backwards, then
   up/down), after which three sign checks make the frame unambiguous:
   the occlusal axis must agree with the mean surface normal, the dental
   arch seen from above must be an upside-down U (negative quadratic
   coefficient), and the triad must be right-handed.
2. :func:`refine_vertical` - the occlusal axis is tilted about the
   left/right axis so that the line through the highest points of the model
   (sampled in bins along the forwards axis) becomes level.

Axis order convention throughout: ``x`` along ``right``, ``y`` along
``forwards``, ``z`` along ``up``; ``occlusal`` is ``up``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import OrientationError
from .mesh import IndexedMesh, vertex_normals

log = logging.getLogger(__name__)

#: |occlusal . mean normal| below this means the up/down direction cannot be
#: decided from surface normals.
_AMBIGUOUS_NORMAL = 1e-3

_RANK_EPS = 1e-9


@dataclass
class PcaResult:
    """Principal axes of a point cloud, strongest spread first.

    ``axes`` holds unit eigenvectors as rows; signs are whatever the
    eigensolver produced (the caller fixes them).
    """

    axes: np.ndarray          # (3, 3), rows
    eigenvalues: np.ndarray   # (3,), descending
    centroid: np.ndarray      # (3,)


@dataclass
class Frame:
    """Right-handed orthonormal frame (rows ``right``, ``forwards``, ``up``).

    ``up`` is the occlusal direction: out of the biting surface.
    """

    right: np.ndarray
    forwards: np.ndarray
    up: np.ndarray
    origin: np.ndarray

    @property
    def occlusal(self) -> np.ndarray:
        return self.up

    @property
    def rotation(self) -> np.ndarray:
        """(3, 3) matrix with rows right / forwards / up."""
        return np.stack([self.right, self.forwards, self.up])

    def local(self, points: np.ndarray) -> np.ndarray:
        """World points -> frame coordinates (x right, y forwards, z up)."""
        return (np.asarray(points) - self.origin) @ self.rotation.T

    def heights(self, points: np.ndarray) -> np.ndarray:
        """Occlusal height of each point (z in frame coordinates)."""
        return (np.asarray(points) - self.origin) @ self.up

    def horizontal(self, points: np.ndarray) -> np.ndarray:
        """(N, 2) frame-horizontal components (x right, y forwards)."""
        p = np.asarray(points) - self.origin
        return np.stack([p @ self.right, p @ self.forwards], axis=-1)

    def lift(self, vec2: np.ndarray) -> np.ndarray:
        """Embed a horizontal 2-vector back into 3-D world coordinates."""
        return vec2[0] * self.right + vec2[1] * self.forwards


def pca_axes(points: np.ndarray) -> PcaResult:
    """Principal axes of ``points`` via the covariance eigendecomposition.

    The scatter matrix is ``X'.T @ X'`` of the centred cloud; eigenpairs are
    returned sorted by descending eigenvalue.
    """
    points = np.asarray(points, dtype=np.float64)
    centroid = points.mean(axis=0)
    centred = points - centroid
    scatter = centred.T @ centred
    evals, evecs = np.linalg.eigh(scatter)
    order = np.argsort(evals)[::-1]
    return PcaResult(axes=evecs[:, order].T.copy(),
                     eigenvalues=evals[order].copy(),
                     centroid=centroid)


def orient(mesh: IndexedMesh) -> Frame:
    """Establish the canonical frame of a model.

    Raises
    ------
    OrientationError
        If the vertex cloud is rank deficient (collinear or coplanar), or if
        the mean surface normal is too close to horizontal to pick which way
        is up.
    """
    pca = pca_axes(mesh.vertices)
    if pca.eigenvalues[0] <= 0 or \
            pca.eigenvalues[2] < _RANK_EPS * pca.eigenvalues[0]:
        raise OrientationError(
            "degenerate vertex cloud: principal spreads "
            f"{pca.eigenvalues.tolist()} are rank deficient")

    right = pca.axes[0].copy()
    forwards = pca.axes[1].copy()
    up = pca.axes[2].copy()

    # Check 1: the occlusal surface faces the bulk of the normals.
    mean_normal = mesh.face_normals.mean(axis=0)
    agreement = float(up @ mean_normal)
    if abs(agreement) < _AMBIGUOUS_NORMAL:
        raise OrientationError(
            "ambiguous occlusal direction: mean surface normal is "
            f"orthogonal to the vertical axis (|dot| = {abs(agreement):.2e})")
    if agreement < 0:
        up = -up

    # Check 2: seen from above, the arch must be an upside-down U.  Flat
    # areas (normals along occlusal) get zero weight, walls full weight.
    vn = vertex_normals(mesh)
    weights = np.clip(1.0 - vn @ up, 0.0, None)
    x = (mesh.vertices - pca.centroid) @ right
    y = (mesh.vertices - pca.centroid) @ forwards
    coeff = np.polyfit(x, y, 2, w=np.sqrt(weights))
    if coeff[0] > 0:
        forwards = -forwards

    # Check 3: right-handedness fixes the remaining sign.
    if float(right @ np.cross(forwards, up)) < 0:
        right = -right

    return Frame(right=right, forwards=forwards, up=up, origin=pca.centroid)


def refine_vertical(mesh: IndexedMesh, frame: Frame,
                    n_bins: int = 64) -> Frame:
    """Level the highest points of the model by pitching about ``right``.

    The forwards extent is split into ``n_bins`` bins; the highest vertex of
    each bin is kept and a weighted straight line is fitted through these
    tops (weights favour high points near the middle of the row of tops).
    The frame is rotated about ``right`` so the fitted line becomes
    horizontal.  If fewer than 3 bins are occupied the refinement is skipped
    with a warning and the input frame returned.
    """
    rel = mesh.vertices - frame.origin
    f = rel @ frame.forwards
    h = rel @ frame.up

    f_min, f_max = float(f.min()), float(f.max())
    if f_max - f_min < 1e-9:
        log.warning("vertical refinement skipped: no forwards extent")
        return frame
    bin_id = np.minimum(((f - f_min) / (f_max - f_min) * n_bins).astype(int),
                        n_bins - 1)

    tops_f, tops_h = [], []
    for b in range(n_bins):
        members = np.flatnonzero(bin_id == b)
        if members.size == 0:
            continue
        top = members[np.argmax(h[members])]
        tops_f.append(f[top])
        tops_h.append(h[top])
    if len(tops_f) < 3:
        log.warning("vertical refinement skipped: only %d occupied bin(s)",
                    len(tops_f))
        return frame

    tf = np.array(tops_f)
    th = np.array(tops_h)
    h_range = th.max() - th.min()
    if h_range < 1e-9:
        return frame    # already level
    height_w = (th - th.min()) / h_range
    offset = tf - np.median(tf)
    span = np.abs(offset).max()
    centre_w = 1.0 - np.abs(offset) / span if span > 0 else np.ones_like(tf)
    w = height_w * np.clip(centre_w, 0.0, None)
    if np.count_nonzero(w) < 2:
        log.warning("vertical refinement skipped: weights degenerate")
        return frame

    slope = float(np.polyfit(tf, th, 1, w=w)[0])
    scale = 1.0 / math.hypot(1.0, slope)
    new_forwards = (frame.forwards + slope * frame.up) * scale
    new_up = (frame.up - slope * frame.forwards) * scale
    log.debug("vertical refinement pitch: %.3f deg",
              math.degrees(math.atan(slope)))
    return Frame(right=frame.right, forwards=new_forwards, up=new_up,
                 origin=frame.origin)
