"""End-to-end pipeline: STL bytes in, landmark report out.

Stages: parse, index, orient, find and filter peaks, curvature costs,
adaptive flood-fill segmentation, characteristic measurement, type
assignment, half-molar merging, landmark extraction, report assembly.

Everything downstream of parsing is deterministic, so running the same
input twice yields byte-identical report JSON.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assignment import (DEFAULT_FUSSINESS, LabeledTooth, build_cost_table,
                         measure_characteristics, merge_half_molars,
                         solve_assignment)
from .curvature import edge_curvatures
from .database import TrainingDatabase
from .landmarks import DEFAULT_CUSP_MERGE_RADIUS, Landmark, \
    extract_landmarks
from .mesh import IndexedMesh, index_mesh
from .orientation import Frame, orient, refine_vertical
from .peaks import Peak, filter_by_height, find_peaks
from .report import BlobSummary, LandmarkReport, ToothReport, face_digest
from .segmentation import (DEFAULT_CANDIDATES, DEFAULT_OVERLAP_FRACTION,
                           DEFAULT_RATIO_LIMIT, DEFAULT_SPILL_RADIUS,
                           SegmentationResult, adaptive_threshold)
from .stl import TriangleSoup, parse_stl
from .teeth import type_table


@dataclass
class PipelineConfig:
    height_threshold: float = 6.0        # mm below the top peak
    spill_radius: float = DEFAULT_SPILL_RADIUS
    ratio_limit: float = DEFAULT_RATIO_LIMIT
    overlap_fraction: float = DEFAULT_OVERLAP_FRACTION
    candidates: tuple = DEFAULT_CANDIDATES
    fussiness: float = DEFAULT_FUSSINESS
    snap: float = 0.0                    # vertex dedup grid, 0 = exact
    incisor_policy: str = "edge_midpoint"
    cusp_merge_radius: float = DEFAULT_CUSP_MERGE_RADIUS


@dataclass
class SegmentedModel:
    """Intermediate state shared by the full pipeline and DB training."""

    soup: TriangleSoup
    mesh: IndexedMesh
    frame: Frame
    all_peaks: list[Peak]
    kept_peaks: list[Peak]
    seg: SegmentationResult
    warnings: list[str] = field(default_factory=list)


@dataclass
class PipelineResult:
    """Report plus the in-memory objects the report was built from."""

    report: LandmarkReport
    state: SegmentedModel
    teeth: list[LabeledTooth]
    landmarks: list[list[Landmark]]      # aligned with ``teeth``


class _WarningTap(logging.Handler):
    """Collects package log messages so reports can carry them."""

    def __init__(self):
        super().__init__(level=logging.WARNING)
        self.messages: list[str] = []

    def emit(self, record: logging.LogRecord) -> None:
        self.messages.append(record.getMessage())


def _load(source, name: str) -> tuple[TriangleSoup, str, str]:
    """Resolve ``source`` to a soup plus (display name, content hash)."""
    if isinstance(source, TriangleSoup):
        digest = hashlib.sha256(
            np.ascontiguousarray(source.triangles).tobytes()).hexdigest()
        return source, name or source.name or "in-memory mesh", digest
    if isinstance(source, (bytes, bytearray)):
        digest = hashlib.sha256(bytes(source)).hexdigest()
        soup = parse_stl(bytes(source), name=name or "stl bytes")
        return soup, name or "stl bytes", digest
    path = Path(source)
    data = path.read_bytes()
    digest = hashlib.sha256(data).hexdigest()
    soup = parse_stl(data, name=str(path))
    return soup, name or path.name, digest


def segment_model(source, config: PipelineConfig | None = None,
                  frame: Frame | None = None, name: str = "",
                  ) -> SegmentedModel:
    """Run the geometry half of the pipeline (no training data needed)."""
    config = config or PipelineConfig()
    tap = _WarningTap()
    log = logging.getLogger("archmark")
    log.addHandler(tap)
    try:
        soup, display, _ = _load(source, name)
        mesh = index_mesh(soup, snap=config.snap)
        if frame is None:
            frame = orient(mesh)
            frame = refine_vertical(mesh, frame)
        peaks = find_peaks(mesh, frame)
        kept = filter_by_height(peaks, config.height_threshold)
        curv = edge_curvatures(mesh)
        seg = adaptive_threshold(
            mesh, curv, kept, frame,
            candidates=config.candidates,
            spill_radius=config.spill_radius,
            ratio_limit=config.ratio_limit,
            overlap_fraction=config.overlap_fraction)
    finally:
        log.removeHandler(tap)
    return SegmentedModel(soup=soup, mesh=mesh, frame=frame,
                          all_peaks=peaks, kept_peaks=kept, seg=seg,
                          warnings=tap.messages)


def analyze(source, database: TrainingDatabase,
            config: PipelineConfig | None = None,
            name: str = "") -> PipelineResult:
    """Full run, returning the report and its supporting objects."""
    config = config or PipelineConfig()
    tap = _WarningTap()
    log = logging.getLogger("archmark")
    log.addHandler(tap)
    try:
        soup, display, digest = _load(source, name)
        state = segment_model(soup, config, name=display)
        mesh, frame, seg = state.mesh, state.frame, state.seg

        types = type_table(database.jaw_kind)
        priors = np.array([
            (database.record(t.key).prior
             if database.record(t.key) is not None else 0.0)
            for t in types])
        measured = [measure_characteristics(b, mesh, frame, seg.arch)
                    for b in seg.blobs]
        arc_centers = np.array([(b.span[0] + b.span[1]) / 2.0
                                for b in seg.blobs])
        table = build_cost_table(measured, types, database,
                                 arc_centers=arc_centers)
        solved = solve_assignment(table, types, priors,
                                  fussiness=config.fussiness)
        teeth = merge_half_molars(solved, seg.blobs, types)

        assigned = {i for i, _ in solved.pairs}
        blob_summaries = [
            BlobSummary(index=i, label=None,
                        characteristics=measured[i],
                        span=seg.blobs[i].span,
                        n_faces=int(seg.blobs[i].faces.size),
                        faces_sha256=face_digest(seg.blobs[i].faces))
            for i in range(len(seg.blobs))]
        for i, j in solved.pairs:
            blob_summaries[i].label = types[j].code

        tooth_reports = []
        tooth_landmarks: list[list[Landmark]] = []
        for tooth in teeth:
            marks, flags = extract_landmarks(
                tooth, mesh, frame, seg.arch,
                incisor_policy=config.incisor_policy,
                cusp_merge_radius=config.cusp_merge_radius)
            tooth_landmarks.append(marks)
            tooth_reports.append(ToothReport(
                code=tooth.code,
                partial=tooth.partial,
                anomalous=tooth.anomalous,
                flags=flags,
                source_blobs=[blob_summaries[i] for _, i in tooth.source],
                landmarks=[
                    {"kind": lm.kind,
                     "position": [float(c) for c in lm.position],
                     "vertex": int(lm.vertex),
                     "cusp_index": lm.cusp_index}
                    for lm in marks
                ]))

        present = {t.code for t in teeth}
        missing = [t.base_code for t in types
                   if t.role in ("plain", "whole")
                   and t.base_code not in present]

        diagnostics = {
            "chosen_t_max": seg.t_max,
            "n_peaks": len(state.all_peaks),
            "n_peaks_kept": len(state.kept_peaks),
            "drops": {rule: sorted(sorted(int(v) for v in grp)
                                   for grp in dropped)
                      for rule, dropped in
                      seg.diagnostics.get("drops", {}).items()},
            "ladder": seg.diagnostics.get("ladder", []),
            "mesh": {
                "n_merged_vertices": mesh.n_merged_vertices,
                "n_degenerate_faces": mesh.n_degenerate_faces,
                "n_nonmanifold_edges": mesh.n_nonmanifold_edges,
            },
            "warnings": state.warnings + tap.messages,
        }
        report = LandmarkReport(
            jaw_kind=database.jaw_kind,
            model_name=display,
            model_sha256=digest,
            n_faces=mesh.n_faces,
            frame=frame,
            arch=seg.arch,
            chosen_t_max=seg.t_max,
            objective=solved.objective,
            teeth=tooth_reports,
            unassigned=[blob_summaries[i] for i in range(len(seg.blobs))
                        if i not in assigned],
            missing_teeth=missing,
            diagnostics=diagnostics)
        return PipelineResult(report=report, state=state, teeth=teeth,
                              landmarks=tooth_landmarks)
    finally:
        log.removeHandler(tap)


def run_pipeline(source, database: TrainingDatabase,
                 config: PipelineConfig | None = None,
                 name: str = "") -> LandmarkReport:
    """Full run: returns the landmark report for one scanned arch."""
    return analyze(source, database, config=config, name=name).report
