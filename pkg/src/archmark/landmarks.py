"""Per-tooth landmark extraction.

What counts as "the" landmark depends on the tooth class:

* incisors: the incisal edge midpoint - the mean of member vertices within
  1 mm of the tooth's top, snapped to the nearest member vertex (an
  alternative policy takes the highest peak instead);
* canines: the highest member peak;
* premolars and molars: the buccal-side cusp tips - member peaks lying
  outwards of the arch, merged into clusters (closer than the merge radius
  collapses to the highest), one landmark per cluster ordered along the
  arch.

A labelled tooth that yields no landmark is flagged for human review
rather than dropped.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import arch as arch_mod
from .assignment import LabeledTooth
from .errors import ArchmarkError
from .mesh import IndexedMesh
from .orientation import Frame
from .peaks import Peak
from .teeth import parse_code, tooth_class

log = logging.getLogger(__name__)

INCISOR_POLICIES = ("edge_midpoint", "highest_peak")

_EDGE_BAND = 1.0            # mm below the top defining the incisal edge
DEFAULT_CUSP_MERGE_RADIUS = 1.5     # mm between cusp peaks of one cusp

MISSING_FLAG = "landmark-missing"


@dataclass
class Landmark:
    """A single landmark: ``kind`` is incisal_midpoint, canine_tip or
    buccal_cusp; ``vertex`` is the supporting mesh vertex.

    ``cusp_index`` orders multiple buccal cusps mesial-to-distal; it is 0
    for single-landmark kinds.
    """

    kind: str
    position: np.ndarray
    vertex: int
    cusp_index: int = 0


def extract_landmarks(tooth: LabeledTooth, mesh: IndexedMesh, frame: Frame,
                      curve: arch_mod.ArchCurve,
                      incisor_policy: str = "edge_midpoint",
                      cusp_merge_radius: float = DEFAULT_CUSP_MERGE_RADIUS,
                      ) -> tuple[list[Landmark], list[str]]:
    """Landmarks and review flags for one labelled tooth."""
    if incisor_policy not in INCISOR_POLICIES:
        raise ArchmarkError(f"incisor landmark policy must be one of "
                            f"{INCISOR_POLICIES}")
    _, ordinal, _ = parse_code(tooth.code)
    cls = tooth_class(ordinal)

    if cls == "incisor" and incisor_policy == "edge_midpoint":
        return [_incisal_midpoint(tooth, mesh, frame)], []

    if cls in ("incisor", "canine"):
        peak = _highest_peak(tooth.peaks)
        if peak is None:
            log.warning("tooth %s has no member peak; landmark missing",
                        tooth.code)
            return [], [MISSING_FLAG]
        kind = "incisal_midpoint" if cls == "incisor" else "canine_tip"
        return [Landmark(kind=kind, position=peak.position,
                         vertex=peak.vertex)], []

    # Premolars and molars: buccal-side cusp peaks.
    buccal_peaks = [p for p in tooth.peaks if _buccal_offset(p, frame,
                                                            curve) > 0]
    if not buccal_peaks:
        log.warning("tooth %s has no buccal-side peak; landmark missing",
                    tooth.code)
        return [], [MISSING_FLAG]
    clusters = _merge_cusps(buccal_peaks, cusp_merge_radius)
    s_vals = {p.vertex: float(arch_mod.project_onto(
        curve, frame.horizontal(p.position))) for p in clusters}
    clusters.sort(key=lambda p: s_vals[p.vertex])
    # cusp_index runs mesial to distal.  The midline sits at the arch apex,
    # so on the limb left of the apex ascending s points mesially and the
    # order flips.
    apex = -curve.b / (2.0 * curve.a) if curve.a != 0 else 0.0
    if np.mean(list(s_vals.values())) < apex:
        clusters.reverse()
    return [Landmark(kind="buccal_cusp", position=p.position,
                     vertex=p.vertex, cusp_index=k)
            for k, p in enumerate(clusters)], []


def _incisal_midpoint(tooth: LabeledTooth, mesh: IndexedMesh,
                      frame: Frame) -> Landmark:
    vert_idx = np.unique(mesh.faces[tooth.faces])
    verts = mesh.vertices[vert_idx]
    heights = frame.heights(verts)
    band = heights > float(heights.max()) - _EDGE_BAND
    centre = verts[band].mean(axis=0)
    nearest = int(np.argmin(np.linalg.norm(verts - centre, axis=1)))
    return Landmark(kind="incisal_midpoint", position=verts[nearest],
                    vertex=int(vert_idx[nearest]))


def _highest_peak(peaks: list[Peak]) -> Peak | None:
    if not peaks:
        return None
    return max(peaks, key=lambda p: (p.height, -p.vertex))


def _buccal_offset(peak: Peak, frame: Frame,
                   curve: arch_mod.ArchCurve) -> float:
    """Signed horizontal distance of a peak from the arch, buccal positive."""
    xy = frame.horizontal(peak.position)
    s = float(arch_mod.project_onto(curve, xy))
    nearest = np.array([s, curve.y(s)])
    buccal = arch_mod.direction_at(curve, xy, "buccal")
    return float((xy - nearest) @ buccal)


def _merge_cusps(peaks: list[Peak], radius: float) -> list[Peak]:
    """Greedy clustering: repeatedly take the highest remaining peak and
    absorb everything within ``radius`` of it."""
    remaining = sorted(peaks, key=lambda p: (-p.height, p.vertex))
    kept: list[Peak] = []
    while remaining:
        top = remaining.pop(0)
        kept.append(top)
        remaining = [p for p in remaining
                     if np.linalg.norm(p.position - top.position) > radius]
    return kept
