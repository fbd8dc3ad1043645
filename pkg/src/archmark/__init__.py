"""archmark: tooth segmentation, identification and landmarks for
scanned dental arches.

The pipeline orients a raw arch scan, segments teeth by flooding
discrete-curvature costs from occlusal peaks, names each tooth with a
monotone assignment over a trained characteristics database, and reports
3D landmark coordinates per tooth.

Quick start::

    from archmark import run_pipeline, TrainingDatabase
    db = TrainingDatabase.load("adult_upper.json")
    report = run_pipeline("scan.stl", db)
    print(report.to_json())
"""

from .arch import ArchCurve, fit_quadratic, project_onto
from .assignment import (Assignment, LabeledTooth, build_cost_table,
                         cost_metric, measure_characteristics,
                         merge_half_molars, solve_assignment)
from .curvature import EdgeCurvatureMap, cost_map, edge_curvatures
from .database import TrainingDatabase, TypeRecord
from .errors import (ArchFitError, ArchmarkError, AssignmentError,
                     GenerationError, OrientationError, ParseError,
                     SegmentationError)
from .landmarks import Landmark, extract_landmarks
from .mesh import IndexedMesh, index_mesh, surface_area
from .orientation import Frame, orient, refine_vertical
from .peaks import Peak, filter_by_height, find_peaks
from .pipeline import (PipelineConfig, PipelineResult, analyze,
                       run_pipeline, segment_model)
from .report import LandmarkReport, write_ply
from .segmentation import (Blob, Region, SegmentationResult,
                           adaptive_threshold, flood_fill)
from .stl import (TriangleSoup, parse_stl, read_stl, write_stl,
                  write_stl_file)
from .synth import (GroundTruth, JawSpec, ToothSpec, build_jaw_spec,
                    generate_synthetic_jaw)
from .teeth import ToothType, parse_code, type_table
from .training import build_reference_database, train_from_reports

__version__ = "0.1.0"

__all__ = [
    "ArchCurve", "ArchFitError", "ArchmarkError", "Assignment",
    "AssignmentError", "Blob", "EdgeCurvatureMap", "Frame",
    "GenerationError", "GroundTruth", "IndexedMesh", "JawSpec",
    "LabeledTooth", "Landmark", "LandmarkReport", "OrientationError",
    "ParseError", "Peak", "PipelineConfig", "PipelineResult", "Region",
    "SegmentationError", "SegmentationResult", "ToothSpec", "ToothType",
    "TrainingDatabase", "TriangleSoup", "TypeRecord", "adaptive_threshold",
    "analyze", "build_cost_table", "build_jaw_spec",
    "build_reference_database", "cost_map", "cost_metric",
    "edge_curvatures", "extract_landmarks", "filter_by_height",
    "find_peaks", "fit_quadratic", "flood_fill", "generate_synthetic_jaw",
    "index_mesh", "measure_characteristics", "merge_half_molars", "orient",
    "parse_code", "parse_stl", "project_onto", "read_stl",
    "refine_vertical", "run_pipeline", "segment_model", "solve_assignment",
    "surface_area", "train_from_reports", "type_table", "write_ply",
    "write_stl", "write_stl_file",
    "__version__",
]
