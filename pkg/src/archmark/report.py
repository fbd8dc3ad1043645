"""Pipeline output: the landmark report and coloured mesh export.

The report is plain JSON with sorted keys so that repeated runs over the
same input produce byte-identical files.  Anything that varies run to run
(wall-clock timings, library versions) is deliberately excluded.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .arch import ArchCurve
from .mesh import IndexedMesh
from .orientation import Frame

SCHEMA_VERSION = 1

# Vertex colours for the mesh export, one per arch position, cycled.
_PALETTE = (
    (211, 84, 74), (62, 140, 201), (88, 171, 95), (222, 158, 54),
    (142, 104, 184), (80, 186, 183), (205, 97, 157), (151, 167, 61),
    (226, 120, 84), (94, 113, 206), (171, 138, 60), (60, 158, 128),
    (190, 81, 105), (108, 151, 216), (136, 182, 72), (197, 134, 192),
)
_GUM_COLOUR = (214, 186, 176)
_MARKER_COLOUR = (20, 20, 20)


def _vec(v: np.ndarray) -> list[float]:
    return [float(c) for c in v]


def face_digest(faces: np.ndarray) -> str:
    """Stable short id for a face set (order-insensitive)."""
    data = np.sort(np.asarray(faces, dtype=np.int64)).tobytes()
    return hashlib.sha256(data).hexdigest()[:16]


@dataclass
class BlobSummary:
    index: int
    label: str | None
    characteristics: dict
    span: tuple[float, float]
    n_faces: int
    faces_sha256: str


@dataclass
class ToothReport:
    code: str
    partial: bool
    anomalous: bool
    flags: list[str]
    source_blobs: list[BlobSummary]
    landmarks: list[dict]     # kind, position, vertex, cusp_index


@dataclass
class LandmarkReport:
    jaw_kind: str
    model_name: str
    model_sha256: str
    n_faces: int
    frame: Frame
    arch: ArchCurve
    chosen_t_max: float
    objective: float
    teeth: list[ToothReport]
    unassigned: list[BlobSummary] = field(default_factory=list)
    missing_teeth: list[str] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def to_payload(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "jaw_kind": self.jaw_kind,
            "model": {
                "name": self.model_name,
                "sha256": self.model_sha256,
                "n_faces": self.n_faces,
            },
            "frame": {
                "right": _vec(self.frame.right),
                "forwards": _vec(self.frame.forwards),
                "up": _vec(self.frame.up),
                "origin": _vec(self.frame.origin),
            },
            "arch": {"a": self.arch.a, "b": self.arch.b, "c": self.arch.c},
            "chosen_t_max": self.chosen_t_max,
            "objective": self.objective,
            "teeth": [
                {
                    "code": t.code,
                    "partial": t.partial,
                    "anomalous": t.anomalous,
                    "flags": sorted(t.flags),
                    "source_blobs": [_blob_payload(b)
                                     for b in t.source_blobs],
                    "landmarks": t.landmarks,
                }
                for t in self.teeth
            ],
            "unassigned_blobs": [_blob_payload(b) for b in self.unassigned],
            "missing_teeth": self.missing_teeth,
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_payload(), sort_keys=True, indent=2)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
            fh.write("\n")


def _blob_payload(blob: BlobSummary) -> dict:
    return {
        "index": blob.index,
        "label": blob.label,
        "characteristics": blob.characteristics,
        "span": [blob.span[0], blob.span[1]],
        "n_faces": blob.n_faces,
        "faces_sha256": blob.faces_sha256,
    }


def report_from_payload(payload: dict) -> dict:
    """Light-weight validation for report JSON read back from disk."""
    if payload.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(
            f"unsupported report schema {payload.get('schema_version')!r}")
    for key in ("jaw_kind", "teeth"):
        if key not in payload:
            raise ValueError(f"report is missing {key!r}")
    return payload


# ---------------------------------------------------------------------------
# coloured PLY export

def write_ply(path, mesh: IndexedMesh, labelled_faces: dict[str, np.ndarray],
              landmark_points: np.ndarray | None = None) -> None:
    """Binary little-endian PLY: vertices coloured per labelled tooth,
    landmark positions appended as isolated marker vertices.

    ``labelled_faces`` maps tooth code to face index array; codes are
    coloured in sorted order so the palette assignment is stable.
    """
    n_vertices = mesh.vertices.shape[0]
    colours = np.tile(np.array(_GUM_COLOUR, dtype=np.uint8),
                      (n_vertices, 1))
    for slot, code in enumerate(sorted(labelled_faces)):
        tint = np.array(_PALETTE[slot % len(_PALETTE)], dtype=np.uint8)
        verts = np.unique(mesh.faces[labelled_faces[code]])
        colours[verts] = tint

    markers = np.empty((0, 3), dtype=np.float64)
    if landmark_points is not None and len(landmark_points):
        markers = np.asarray(landmark_points, dtype=np.float64)

    total_vertices = n_vertices + markers.shape[0]
    header = (
        "ply\n"
        "format binary_little_endian 1.0\n"
        "comment archmark tooth segmentation\n"
        f"element vertex {total_vertices}\n"
        "property float x\nproperty float y\nproperty float z\n"
        "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        f"element face {mesh.faces.shape[0]}\n"
        "property list uchar int vertex_indices\n"
        "end_header\n"
    )

    vertex_dtype = np.dtype([("xyz", "<3f4"), ("rgb", "3u1")])
    vertex_block = np.empty(total_vertices, dtype=vertex_dtype)
    vertex_block["xyz"][:n_vertices] = mesh.vertices.astype(np.float32)
    vertex_block["rgb"][:n_vertices] = colours
    if markers.shape[0]:
        vertex_block["xyz"][n_vertices:] = markers.astype(np.float32)
        vertex_block["rgb"][n_vertices:] = np.array(_MARKER_COLOUR,
                                                    dtype=np.uint8)

    face_dtype = np.dtype([("n", "u1"), ("idx", "<3i4")])
    face_block = np.empty(mesh.faces.shape[0], dtype=face_dtype)
    face_block["n"] = 3
    face_block["idx"] = mesh.faces.astype(np.int32)

    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(vertex_block.tobytes())
        fh.write(face_block.tobytes())


def write_curvature_ply(path, mesh: IndexedMesh,
                        face_cost: np.ndarray) -> None:
    """Debug export: faces tinted by mean crossing cost (white to red)."""
    per_vertex = np.zeros(mesh.vertices.shape[0])
    counts = np.zeros(mesh.vertices.shape[0])
    np.add.at(per_vertex, mesh.faces.ravel(),
              np.repeat(face_cost, 3))
    np.add.at(counts, mesh.faces.ravel(), 1.0)
    per_vertex = per_vertex / np.maximum(counts, 1.0)
    top = per_vertex.max()
    scale = per_vertex / top if top > 0 else per_vertex
    colours = np.stack([
        np.full_like(scale, 235.0),
        235.0 * (1.0 - scale),
        235.0 * (1.0 - scale),
    ], axis=1).astype(np.uint8)

    header = (
        "ply\n"
        "format binary_little_endian 1.0\n"
        "comment archmark crossing costs\n"
        f"element vertex {mesh.vertices.shape[0]}\n"
        "property float x\nproperty float y\nproperty float z\n"
        "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        f"element face {mesh.faces.shape[0]}\n"
        "property list uchar int vertex_indices\n"
        "end_header\n"
    )
    vertex_dtype = np.dtype([("xyz", "<3f4"), ("rgb", "3u1")])
    block = np.empty(mesh.vertices.shape[0], dtype=vertex_dtype)
    block["xyz"] = mesh.vertices.astype(np.float32)
    block["rgb"] = colours
    face_dtype = np.dtype([("n", "u1"), ("idx", "<3i4")])
    faces = np.empty(mesh.faces.shape[0], dtype=face_dtype)
    faces["n"] = 3
    faces["idx"] = mesh.faces.astype(np.int32)
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(block.tobytes())
        fh.write(faces.tobytes())
