"""Tooth segmentation: flood fill from peaks, then grouping and cleaning.

From every candidate tooth tip a capped shortest-path flood grows across
the face graph, paying the crease-crossing cost at each edge; faces reached
below the cap ``T_max`` form the peak's region.  Regions sharing faces are
grouped, obviously-wrong groups are discarded (spilled floods, gum bumps in
the shadow of a tooth, one-sided ridges, anything touching the mesh rim),
and groups occupying the same stretch of the dental arch are merged into
blobs (one blob per physical tooth, ideally).

``T_max`` is not a constant of nature: :func:`adaptive_threshold` runs the
whole stack for a ladder of candidates and keeps the one maximising total
blob area (ties: the smallest cap).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import arch as arch_mod
from ._kernels import flood_kernel
from .curvature import EdgeCurvatureMap, cost_map
from .errors import ArchFitError, SegmentationError
from .mesh import IndexedMesh, surface_area
from .orientation import Frame
from .peaks import Peak

log = logging.getLogger(__name__)

DEFAULT_SPILL_RADIUS = 12.0      # mm, roughly a molar's width
DEFAULT_RATIO_LIMIT = 1.5        # max (rise)/(horizontal run) to a higher peak
DEFAULT_OVERLAP_FRACTION = 0.4   # arch-span overlap required to merge inline
#: Default candidate T_max ladder (1/mm): geometric, crease-scale range.
DEFAULT_CANDIDATES = tuple(np.geomspace(0.05, 3.0, 12))

_BILATERAL_MIN_FRACTION = 0.05
_BILATERAL_MIN_VARIANCE = 0.15


@dataclass
class Region:
    """A single peak's flood: member faces and how the flood ended."""

    peak: Peak
    members: np.ndarray          # sorted face indices, T < T_max
    spilled: bool
    touches_boundary: bool
    t_values: np.ndarray | None = None   # (F,) when requested


@dataclass
class RegionGroup:
    """Connected component of regions linked by shared faces."""

    regions: list[Region]
    members: np.ndarray          # sorted unique face indices

    @property
    def peaks(self) -> list[Peak]:
        return [r.peak for r in self.regions]

    @property
    def spilled(self) -> bool:
        return any(r.spilled for r in self.regions)

    @property
    def touches_boundary(self) -> bool:
        return any(r.touches_boundary for r in self.regions)


@dataclass
class Blob:
    """Inline-merged groups: the segmentation's best guess at one tooth."""

    faces: np.ndarray            # sorted unique face indices
    peaks: list[Peak]
    span: tuple[float, float]    # (s_lo, s_hi) along the arch
    centroid_xy: np.ndarray      # area-weighted horizontal centroid


@dataclass
class SegmentationResult:
    t_max: float
    blobs: list[Blob]
    arch: arch_mod.ArchCurve
    peaks: list[Peak]            # peaks of the surviving groups
    diagnostics: dict = field(default_factory=dict)


def _seed_faces(mesh: IndexedMesh, vertex: int) -> np.ndarray:
    return np.flatnonzero((mesh.faces == vertex).any(axis=1))


def flood_fill(mesh: IndexedMesh, costs: np.ndarray, seed: Peak,
               t_max: float, spill_radius: float, frame: Frame,
               face_xy: np.ndarray | None = None,
               keep_t: bool = False) -> Region:
    """Grow one region from ``seed``.

    ``costs`` is the (F, 3) edge-cost array from :func:`curvature.cost_map`.
    Faces containing the seed vertex start at T = 0; a face is a member when
    its final T is strictly below ``t_max``.  The flood does not expand
    through faces beyond ``spill_radius`` (horizontal distance from the
    seed peak); reaching one sets ``spilled``.  ``face_xy`` may carry
    precomputed horizontal face centroids to save repeated projection.
    """
    if face_xy is None:
        face_xy = frame.horizontal(mesh.face_centroids)
    seeds = _seed_faces(mesh, seed.vertex)
    if seeds.size == 0:
        raise ValueError(f"seed vertex {seed.vertex} belongs to no face")
    seed_xy = frame.horizontal(seed.position)
    t, spilled = flood_kernel(mesh.adjacency, costs, seeds, t_max,
                              face_xy, np.asarray(seed_xy, dtype=np.float64),
                              spill_radius)
    members = np.flatnonzero(t < t_max).astype(np.int32)
    touches = bool(mesh.boundary_edge[members].any())
    return Region(peak=seed, members=members, spilled=spilled,
                  touches_boundary=touches,
                  t_values=t if keep_t else None)


def group_overlapping(regions: list[Region]) -> list[RegionGroup]:
    """Union regions transitively linked by shared member faces."""
    n = len(regions)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    # Face -> regions incidence: sort (face, region) pairs and union runs.
    faces = np.concatenate([r.members for r in regions]) if n else \
        np.empty(0, dtype=np.int32)
    owner = np.concatenate([np.full(r.members.size, i, dtype=np.int32)
                            for i, r in enumerate(regions)]) if n else \
        np.empty(0, dtype=np.int32)
    order = np.lexsort((owner, faces))
    faces, owner = faces[order], owner[order]
    same = np.flatnonzero(faces[1:] == faces[:-1])
    for k in same:
        ra, rb = find(int(owner[k])), find(int(owner[k + 1]))
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    buckets: dict[int, list[int]] = {}
    for i in range(n):
        buckets.setdefault(find(i), []).append(i)
    groups = []
    for root in sorted(buckets):
        idx = buckets[root]
        members = np.unique(np.concatenate([regions[i].members
                                            for i in idx]))
        groups.append(RegionGroup(regions=[regions[i] for i in idx],
                                  members=members.astype(np.int32)))
    return groups


def clean_regions(groups: list[RegionGroup], all_peaks: list[Peak],
                  mesh: IndexedMesh, frame: Frame,
                  ratio_limit: float = DEFAULT_RATIO_LIMIT):
    """Drop groups that cannot be teeth.

    Peak-level rules run first: a spilled flood, or a member peak with a
    higher peak whose rise/run ratio exceeds ``ratio_limit`` (a gum bump in
    a tooth's shadow), condemn the whole group.  Then a provisional arch
    through the survivors' peaks gives each group a local buccal axis for
    the normals rule (member normals must spread to both sides of the arch,
    or at least vary a lot), and finally groups touching the mesh rim are
    dropped.

    Returns ``(kept_groups, drops)`` where ``drops`` maps rule name to a
    list of dropped groups' seed-vertex tuples.
    """
    drops: dict[str, list[tuple[int, ...]]] = {
        "spilled": [], "gum_ratio": [], "one_sided_normals": [],
        "boundary": []}

    peak_xy = {p.vertex: frame.horizontal(p.position) for p in all_peaks}

    def gum_like(p: Peak) -> bool:
        xy = peak_xy[p.vertex]
        for q in all_peaks:
            rise = q.height - p.height
            if q.vertex == p.vertex or rise <= 0:
                continue
            run = float(np.hypot(*(peak_xy[q.vertex] - xy)))
            if run < 1e-12 or rise / run > ratio_limit:
                return True
        return False

    survivors: list[RegionGroup] = []
    for g in groups:
        if g.spilled:
            drops["spilled"].append(tuple(p.vertex for p in g.peaks))
        elif any(gum_like(p) for p in g.peaks):
            drops["gum_ratio"].append(tuple(p.vertex for p in g.peaks))
        else:
            survivors.append(g)

    # Provisional arch (for the buccal axis only; the inline/ordering fit
    # happens after cleaning).  With too few peaks the normals rule cannot
    # run and is skipped.
    provisional = None
    pts = np.array([peak_xy[p.vertex] for g in survivors for p in g.peaks])
    if pts.shape[0] >= 3:
        try:
            provisional = arch_mod.fit_quadratic(pts)
        except ArchFitError:
            log.warning("provisional arch fit failed; normals rule skipped")

    kept: list[RegionGroup] = []
    for g in survivors:
        if provisional is not None and not _bilateral(g, mesh, frame,
                                                      provisional):
            drops["one_sided_normals"].append(
                tuple(p.vertex for p in g.peaks))
        elif g.touches_boundary:
            drops["boundary"].append(tuple(p.vertex for p in g.peaks))
        else:
            kept.append(g)
    return kept, drops


def _bilateral(group: RegionGroup, mesh: IndexedMesh, frame: Frame,
               curve: arch_mod.ArchCurve) -> bool:
    """Do the group's normals spread to both sides of the arch?"""
    areas = mesh.face_areas[group.members]
    centroid = (frame.horizontal(mesh.face_centroids[group.members])
                * areas[:, None]).sum(axis=0) / areas.sum()
    buccal = frame.lift(arch_mod.direction_at(curve, centroid, "buccal"))
    proj = mesh.face_normals[group.members] @ buccal
    pos = float((proj > 0).mean())
    neg = float((proj < 0).mean())
    if pos >= _BILATERAL_MIN_FRACTION and neg >= _BILATERAL_MIN_FRACTION:
        return True
    return float(np.var(proj)) >= _BILATERAL_MIN_VARIANCE


def group_inline(groups: list[RegionGroup], curve: arch_mod.ArchCurve,
                 mesh: IndexedMesh, frame: Frame,
                 overlap_fraction: float = DEFAULT_OVERLAP_FRACTION
                 ) -> list[Blob]:
    """Merge groups whose arch spans overlap into blobs.

    Two groups merge when their ``s`` ranges overlap by at least
    ``overlap_fraction`` of the shorter range (transitively), which joins
    the lingual and buccal cusps of one tooth without joining neighbouring
    teeth.
    """
    n = len(groups)
    spans: list[tuple[float, float]] = []
    for g in groups:
        xy = frame.horizontal(mesh.face_centroids[g.members])
        s = np.atleast_1d(arch_mod.project_onto(curve, xy))
        spans.append((float(s.min()), float(s.max())))

    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            lo = max(spans[i][0], spans[j][0])
            hi = min(spans[i][1], spans[j][1])
            shorter = min(spans[i][1] - spans[i][0],
                          spans[j][1] - spans[j][0])
            if hi - lo >= overlap_fraction * shorter and hi - lo >= 0:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)

    buckets: dict[int, list[int]] = {}
    for i in range(n):
        buckets.setdefault(find(i), []).append(i)

    blobs = []
    for root in sorted(buckets):
        idx = buckets[root]
        faces = np.unique(np.concatenate([groups[i].members for i in idx]))
        peaks = [p for i in idx for p in groups[i].peaks]
        lo = min(spans[i][0] for i in idx)
        hi = max(spans[i][1] for i in idx)
        areas = mesh.face_areas[faces]
        centroid = (frame.horizontal(mesh.face_centroids[faces])
                    * areas[:, None]).sum(axis=0) / areas.sum()
        blobs.append(Blob(faces=faces.astype(np.int32), peaks=peaks,
                          span=(lo, hi), centroid_xy=centroid))
    blobs.sort(key=lambda blob: (blob.span[0] + blob.span[1]) / 2.0)
    return blobs


def adaptive_threshold(mesh: IndexedMesh, curv: EdgeCurvatureMap,
                       peaks: list[Peak], frame: Frame,
                       candidates=DEFAULT_CANDIDATES,
                       spill_radius: float = DEFAULT_SPILL_RADIUS,
                       ratio_limit: float = DEFAULT_RATIO_LIMIT,
                       overlap_fraction: float = DEFAULT_OVERLAP_FRACTION
                       ) -> SegmentationResult:
    """Segment at every candidate ``T_max`` and keep the best.

    "Best" maximises total blob surface area; exact ties go to the smallest
    cap (a too-large cap merges teeth into spilling floods and loses area,
    a too-small one leaves area unclaimed).

    Raises
    ------
    SegmentationError
        If no candidate produces any blob area.
    """
    if not peaks:
        raise SegmentationError("no peaks to segment from")
    costs = cost_map(curv)
    face_xy = frame.horizontal(mesh.face_centroids)

    best = None
    best_area = 0.0
    ladder_rows = []
    for t_max in candidates:
        regions = [flood_fill(mesh, costs, p, float(t_max), spill_radius,
                              frame=frame, face_xy=face_xy) for p in peaks]
        groups = group_overlapping(regions)
        kept, drops = clean_regions(groups, peaks, mesh, frame, ratio_limit)
        row = {"t_max": float(t_max), "n_groups": len(groups),
               "n_kept": len(kept),
               "drops": {k: len(v) for k, v in drops.items()},
               "area": 0.0, "n_blobs": 0}
        if kept:
            kept_peaks = [p for g in kept for p in g.peaks]
            pts = np.array([frame.horizontal(p.position)
                            for p in kept_peaks])
            try:
                curve = arch_mod.fit_quadratic(pts)
            except ArchFitError as exc:
                row["arch_error"] = str(exc)
                ladder_rows.append(row)
                continue
            blobs = group_inline(kept, curve, mesh, frame, overlap_fraction)
            area = sum(surface_area(mesh, b.faces) for b in blobs)
            row["area"] = area
            row["n_blobs"] = len(blobs)
            if area > best_area:
                best_area = area
                best = SegmentationResult(
                    t_max=float(t_max), blobs=blobs, arch=curve,
                    peaks=kept_peaks,
                    diagnostics={"drops": drops})
        ladder_rows.append(row)

    if best is None:
        raise SegmentationError(
            "segmentation produced no tooth area at any candidate "
            f"threshold (tried {[round(float(t), 4) for t in candidates]})")
    best.diagnostics["ladder"] = ladder_rows
    best.diagnostics["chosen_t_max"] = best.t_max
    return best
