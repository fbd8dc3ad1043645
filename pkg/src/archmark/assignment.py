"""Tooth identification: measured blobs against reference statistics.

Every blob gets four scale-bearing measurements (surface area, mesiodistal
and buccolingual widths, pointiness).  Comparing a measurement ``t``
against a type's reference pool ``r`` uses a normalised mean squared error:

    C(t) = (MSE(t, r) - C_min) / Cbar_ref

where ``C_min`` (the population variance of ``r``) is the best achievable
MSE and ``Cbar_ref`` rescales so that an average reference value scores 1.
A blob/type cost is the unweighted mean over usable characteristics.

Blobs are then matched to the jaw's type sequence by a dynamic program
over monotone alignments: each blob is one tooth or not a tooth, each type
is used once or missing (missing costs ``fussiness * prior``), matched
pairs must respect arch order, and a whole molar excludes its half types.
This reproduces the boolean-program formulation exactly, deterministically
(lexicographically smallest assignment matrix among optima).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import arch as arch_mod
from .database import TrainingDatabase
from .errors import AssignmentError
from .mesh import IndexedMesh, surface_area
from .orientation import Frame
from .peaks import Peak
from .segmentation import Blob
from .teeth import ToothType

log = logging.getLogger(__name__)

DEFAULT_FUSSINESS = 8.0

CHARACTERISTICS = ("area", "mesiodistal_width", "buccolingual_width",
                   "pointiness")

#: Vertices this close (mm) to the blob's top count as "at the top" for
#: pointiness.
_TOP_BAND = 1.0

#: Cost per millimetre a blob sits past the arch midline on the side
#: opposite a candidate type.  Reference pools are shared by mirrored
#: types, so without this term a lone tooth near the midline could be
#: labelled onto the wrong quadrant at exactly equal cost.
_SIDE_WEIGHT = 0.6


def measure_characteristics(blob: Blob, mesh: IndexedMesh, frame: Frame,
                            curve: arch_mod.ArchCurve) -> dict[str, float]:
    """The four identification measurements of a blob.

    Widths are extents along the arch-local distal / buccal directions at
    the blob centroid; pointiness compares the mesiodistal width of the top
    1 mm band to the full width.  A blob shallower than the band is maximally
    blunt (pointiness 1, with a warning).
    """
    vert_idx = np.unique(mesh.faces[blob.faces])
    verts = mesh.vertices[vert_idx]

    distal = frame.lift(arch_mod.direction_at(curve, blob.centroid_xy,
                                              "distal"))
    buccal = frame.lift(arch_mod.direction_at(curve, blob.centroid_xy,
                                              "buccal"))
    along_md = verts @ distal
    along_bl = verts @ buccal
    md_width = float(along_md.max() - along_md.min())
    bl_width = float(along_bl.max() - along_bl.min())

    heights = frame.heights(verts)
    top = float(heights.max())
    if top - float(heights.min()) < _TOP_BAND:
        log.warning("blob is shallower than %.1f mm; pointiness forced to 1",
                    _TOP_BAND)
        pointiness = 1.0
    elif md_width <= 0.0:
        log.warning("blob has zero mesiodistal extent; pointiness forced "
                    "to 1")
        pointiness = 1.0
    else:
        band = along_md[heights > top - _TOP_BAND]
        pointiness = float(band.max() - band.min()) / md_width

    return {
        "area": surface_area(mesh, blob.faces),
        "mesiodistal_width": md_width,
        "buccolingual_width": bl_width,
        "pointiness": pointiness,
    }


def cost_metric(t: float, references: np.ndarray) -> float | None:
    """Normalised MSE of ``t`` against a reference pool.

    Returns None when the pool is degenerate (all values equal), in which
    case the characteristic carries no signal for this type.
    """
    r = np.asarray(references, dtype=np.float64)
    if r.size < 2:
        return None
    mse = float(np.mean((t - r) ** 2))
    c_min = float(np.var(r))
    # Mean reference self-cost above the floor; equals the variance
    # algebraically but is computed as defined.
    cbar = float(np.mean(np.mean((r[:, None] - r[None, :]) ** 2, axis=1))) \
        - c_min
    if cbar <= 0.0:
        return None
    return (mse - c_min) / cbar


def build_cost_table(measured: list[dict[str, float]],
                     types: list[ToothType],
                     db: TrainingDatabase,
                     arc_centers: np.ndarray | None = None) -> np.ndarray:
    """(m, n) blob/type cost matrix.

    Types without any reference data get an infinite column (never
    assignable); a type whose every characteristic pool is degenerate is an
    error, because it would be assignable at undefined cost.  When
    ``arc_centers`` gives each blob's signed arch coordinate, blobs past
    the midline pay ``_SIDE_WEIGHT`` per millimetre towards types of the
    opposite quadrant; a blob on a type's own side pays nothing.
    """
    m, n = len(measured), len(types)
    table = np.full((m, n), np.inf)
    for j, tooth in enumerate(types):
        rec = db.record(tooth.key)
        if rec is None or not rec.characteristics:
            log.warning("type %s has no reference data; treating as "
                        "unassignable", tooth.code)
            continue
        usable = []
        for name in CHARACTERISTICS:
            refs = rec.references(name)
            if refs.size >= 2 and np.ptp(refs) > 0:
                usable.append((name, refs))
            else:
                log.warning("type %s characteristic %s is degenerate; "
                            "skipped", tooth.code, name)
        if not usable:
            raise AssignmentError(
                f"type {tooth.code} has no usable characteristic "
                "(all reference pools degenerate)")
        for i, values in enumerate(measured):
            acc = 0.0
            for name, refs in usable:
                c = cost_metric(values[name], refs)
                assert c is not None    # degenerate pools filtered above
                acc += c
            table[i, j] = acc / len(usable)
    if arc_centers is not None:
        s = np.asarray(arc_centers, dtype=np.float64)
        for j, tooth in enumerate(types):
            sign = -1.0 if tooth.code[:2] in ("UR", "LL") else 1.0
            table[:, j] += _SIDE_WEIGHT * np.clip(-sign * s, 0.0, None)
    return table


@dataclass
class Assignment:
    """Solved blob/type matching.

    ``pairs`` holds (blob index, type index) in blob order; ``D``, ``NT``
    and ``MI`` are the boolean decision arrays of the underlying program;
    ``objective`` is evaluated in canonical order (assignment costs by blob
    index, then missing charges by type index).
    """

    pairs: list[tuple[int, int]]
    D: np.ndarray
    NT: np.ndarray
    MI: np.ndarray
    objective: float


def _conflicts(types: list[ToothType], u: int, v: int) -> bool:
    """Whole molars exclude their adjacent half types."""
    a, b = types[u], types[v]
    if a.molar_id is None or a.molar_id != b.molar_id:
        return False
    return "whole" in (a.role, b.role) and a.role != b.role


def canonical_objective(C: np.ndarray, miss_cost: np.ndarray,
                        pairs: list[tuple[int, int]],
                        MI: np.ndarray) -> float:
    """Objective evaluated in one fixed order for bitwise comparability."""
    obj = 0.0
    for i, j in sorted(pairs):
        obj += C[i, j]
    for j in range(MI.shape[0]):
        if MI[j]:
            obj += miss_cost[j]
    return obj


def solve_assignment(C: np.ndarray, types: list[ToothType],
                     priors: np.ndarray,
                     fussiness: float = DEFAULT_FUSSINESS) -> Assignment:
    """Minimise assignment cost plus ``fussiness``-weighted missing-type
    charges over monotone matchings.

    Blobs (rows of ``C``) and ``types`` must both be in arch order.  Among
    equally cheap solutions the lexicographically smallest flattened
    assignment matrix wins.

    Raises
    ------
    AssignmentError
        If ``C`` contains NaN.
    """
    m, n = C.shape
    if len(types) != n or priors.shape[0] != n:
        raise AssignmentError("cost table, types and priors disagree on n")
    if np.isnan(C).any():
        raise AssignmentError("cost table contains NaN")
    miss_cost = fussiness * np.asarray(priors, dtype=np.float64)

    # miss_range[u][v]: cost of marking types u..v missing, accumulated
    # left to right (exact, reproducible); 0 when u > v.
    miss_range = np.zeros((n + 1, n + 1))
    for u in range(n):
        acc = 0.0
        for v in range(u, n):
            acc += miss_cost[v]
            miss_range[u][v] = acc

    def skip(u: int, v: int) -> float:
        return miss_range[u][v] if u <= v else 0.0

    # suf[i][j+1]: best cost for blobs i.. with j the last matched type
    # (j = -1: none yet).  Types beyond the last match are charged missing
    # inside the transitions and the base case.
    suf = np.empty((m + 1, n + 1))
    for j in range(-1, n):
        suf[m][j + 1] = skip(j + 1, n - 1)
    for i in range(m - 1, -1, -1):
        for j in range(n - 1, -2, -1):
            best = suf[i + 1][j + 1]        # blob i is not a tooth
            for t in range(j + 1, n):
                if j == t - 1 and j >= 0 and _conflicts(types, j, t):
                    continue
                cand = skip(j + 1, t - 1) + C[i, t] + suf[i + 1][t + 1]
                if cand < best:
                    best = cand
            suf[i][j + 1] = best

    # Walk forwards, preferring "not a tooth", then the latest type, among
    # decisions that reproduce the suffix optimum exactly.  Comparing
    # against the very sums that formed the minimum avoids any float
    # regrouping, and this preference order yields the lexicographically
    # smallest flattened D.
    pairs: list[tuple[int, int]] = []
    NT = np.zeros(m, dtype=bool)
    j = -1
    for i in range(m):
        target = suf[i][j + 1]
        if suf[i + 1][j + 1] == target:
            NT[i] = True
            continue
        chosen = None
        for t in range(n - 1, j, -1):
            if j == t - 1 and j >= 0 and _conflicts(types, j, t):
                continue
            if skip(j + 1, t - 1) + C[i, t] + suf[i + 1][t + 1] == target:
                chosen = t
                break
        if chosen is None:      # pragma: no cover - suf guarantees a match
            raise AssignmentError("reconstruction failed to match the "
                                  "dynamic program")
        pairs.append((i, chosen))
        j = chosen

    D = np.zeros((m, n), dtype=bool)
    for i, t in pairs:
        D[i, t] = True
    MI = ~D.any(axis=0)
    objective = canonical_objective(C, miss_cost, pairs, MI)
    return Assignment(pairs=pairs, D=D, NT=NT, MI=MI, objective=objective)


@dataclass
class LabeledTooth:
    """A named tooth: one blob, or two merged half-molar blobs.

    ``source`` lists (type code, blob index) pairs before merging;
    ``partial`` marks a tooth reconstructed from a lone mesial half,
    ``anomalous`` a lone distal half (mesial missing is unusual).
    """

    code: str
    source: list[tuple[str, int]]
    faces: np.ndarray
    peaks: list[Peak] = field(default_factory=list)
    partial: bool = False
    anomalous: bool = False


def merge_half_molars(assignment: Assignment, blobs: list[Blob],
                      types: list[ToothType]) -> list[LabeledTooth]:
    """Collapse half-molar assignments into whole teeth.

    Both halves assigned: union of the blobs under the whole-tooth code.
    Mesial alone: the tooth, flagged partial.  Distal alone: kept, flagged
    anomalous.  Output preserves blob (arch) order.
    """
    by_molar: dict[str, dict[str, int]] = {}
    for i, j in assignment.pairs:
        t = types[j]
        if t.is_half:
            by_molar.setdefault(t.molar_id, {})[t.role] = i

    teeth: list[LabeledTooth] = []
    emitted: set[str] = set()
    for i, j in assignment.pairs:
        t = types[j]
        if not t.is_half:
            teeth.append(LabeledTooth(
                code=t.base_code, source=[(t.code, i)],
                faces=blobs[i].faces, peaks=list(blobs[i].peaks)))
            continue
        if t.molar_id in emitted:
            continue
        emitted.add(t.molar_id)
        halves = by_molar[t.molar_id]
        if "mesial" in halves and "distal" in halves:
            im, idd = halves["mesial"], halves["distal"]
            faces = np.unique(np.concatenate([blobs[im].faces,
                                              blobs[idd].faces]))
            teeth.append(LabeledTooth(
                code=t.molar_id,
                source=sorted([(types[jj].code, ii)
                               for ii, jj in assignment.pairs
                               if types[jj].molar_id == t.molar_id],
                              key=lambda sr: sr[1]),
                faces=faces.astype(np.int32),
                peaks=list(blobs[im].peaks) + list(blobs[idd].peaks)))
        elif "mesial" in halves:
            i0 = halves["mesial"]
            teeth.append(LabeledTooth(
                code=t.molar_id, source=[(t.code, i0)],
                faces=blobs[i0].faces, peaks=list(blobs[i0].peaks),
                partial=True))
        else:
            i1 = halves["distal"]
            teeth.append(LabeledTooth(
                code=t.molar_id, source=[(t.code, i1)],
                faces=blobs[i1].faces, peaks=list(blobs[i1].peaks),
                anomalous=True))
    return teeth
