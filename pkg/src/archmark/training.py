"""Reference databases: synthetic bootstrap and report-based training.

:func:`build_reference_database` synthesises a seeded cohort of jaws,
segments them with the normal geometry pipeline, labels every blob by
overlap with the generator's ground-truth face sets, and pools the
measured characteristics per tooth type.  Priors fall straight out of the
cohort: the fraction of quadrant slots in which each form of the type
appeared.  Because the measurements come from the same segmentation code
that runs at deployment, systematic discretisation effects cancel.

:func:`train_from_reports` rebuilds a database from labelled landmark
reports instead, which is how field data feeds back in.
"""

from __future__ import annotations

import logging

import numpy as np

from .database import TrainingDatabase, TypeRecord
from .errors import AssignmentError
from .pipeline import PipelineConfig, segment_model
from .synth import GroundTruth, build_jaw_spec, generate_synthetic_jaw
from .teeth import JAW_KINDS, database_keys, parse_code

log = logging.getLogger(__name__)

#: Per-seed tweaks for the reference cohort.  Variant seeds teach the
#: database what halves, wisdom teeth and gaps look like, and double as
#: the priors: a form absent from most seeds gets a small prior.
_COHORT = {
    0: {"replace_seven_with_eight": True},
    1: {"replace_seven_with_eight": True, "groove_eights": True},
    2: {"groove_molars": True},
    3: {"groove_molars": True},
    4: {"groove_molars": True, "groove_second": True},
    5: {"groove_second": True},
    6: {"variants": ("erupting_molar", "second_erupting_molar")},
    7: {"missing_two": True},
    8: {},
    9: {"variants": ("erupting_molar", "second_erupting_molar")},
    10: {"fine": True},
    11: {"fine": True},
}

#: Blob face overlap thresholds for ground-truth labelling.
_MATCH_COVERAGE = 0.5
_HALF_COVERAGE = 0.7


def _cohort_spec(jaw_kind: str, seed: int, grid_step: float):
    plan = _COHORT[seed % len(_COHORT)]
    dentition = jaw_kind.split("_")[0]
    molar = "6" if dentition == "adult" else "E"
    second = "7" if dentition == "adult" else "D"
    missing = ()
    if plan.get("missing_two"):
        upper = jaw_kind.endswith("upper")
        if dentition == "adult":
            missing = ("UR4", "UL1") if upper else ("LL4", "LR1")
        else:
            missing = ("URC", "ULA") if upper else ("LLC", "LRA")
    step = grid_step * (0.62 if plan.get("fine") else 1.0)
    spec = build_jaw_spec(
        jaw_kind, seed=seed, grid_step=step, missing=missing,
        variants=tuple(plan.get("variants", ())),
        replace_seven_with_eight=bool(
            plan.get("replace_seven_with_eight")) and dentition == "adult")
    for tooth in spec.teeth:
        ordinal = parse_code(tooth.code)[1]
        if plan.get("groove_molars") and ordinal == molar:
            tooth.groove = 0.45
        if plan.get("groove_second") and ordinal == second \
                and dentition == "adult":
            tooth.groove = 0.45
        if plan.get("groove_eights") and ordinal == "8":
            # Wisdom teeth are short; a deeper notch keeps the halves
            # separating reliably at the thresholds the ladder selects.
            tooth.groove = 0.55
    return spec


def _label_blob(blob_faces: np.ndarray, gt: GroundTruth) -> str | None:
    """Ground-truth key ('6', '6.0', ...) for a blob, or None."""
    blob_set = np.asarray(blob_faces)
    best_tooth, best_cover = None, 0.0
    for tooth in gt.teeth:
        inter = np.intersect1d(blob_set, tooth.faces,
                               assume_unique=False).size
        cover = inter / blob_set.size if blob_set.size else 0.0
        if cover > best_cover:
            best_tooth, best_cover = tooth, cover
    if best_tooth is None or best_cover < _MATCH_COVERAGE:
        return None
    ordinal = parse_code(best_tooth.code)[1]
    if best_tooth.partial:
        return ordinal + ".0"
    if best_tooth.half_faces:
        for suffix, half in (("0", best_tooth.half_faces["mesial"]),
                             ("1", best_tooth.half_faces["distal"])):
            inter = np.intersect1d(blob_set, half).size
            if blob_set.size and inter / blob_set.size >= _HALF_COVERAGE:
                return f"{ordinal}.{suffix}"
    return ordinal


def build_reference_database(jaw_kind: str, n_seeds: int = 12,
                             grid_step: float = 0.45,
                             config: PipelineConfig | None = None,
                             ) -> TrainingDatabase:
    """Bootstrap a complete training database for one jaw kind."""
    if jaw_kind not in JAW_KINDS:
        raise AssignmentError(f"unknown jaw kind {jaw_kind!r}")
    config = config or PipelineConfig()
    pools: dict[str, dict[str, list[float]]] = {}
    occurrences: dict[str, int] = {}

    from .assignment import measure_characteristics

    for seed in range(n_seeds):
        spec = _cohort_spec(jaw_kind, seed, grid_step)
        soup, gt = generate_synthetic_jaw(spec)
        # The canonical frame is ground truth; using it avoids folding
        # orientation noise into the reference pools.
        state = segment_model(soup, config, frame=gt.frame)
        for blob in state.seg.blobs:
            key = _label_blob(blob.faces, gt)
            if key is None:
                log.warning("seed %d: blob with %d faces matched no tooth",
                            seed, blob.faces.size)
                continue
            values = measure_characteristics(blob, state.mesh, state.frame,
                                             state.seg.arch)
            per_char = pools.setdefault(key, {})
            for name, value in values.items():
                per_char.setdefault(name, []).append(float(value))
            occurrences[key] = occurrences.get(key, 0) + 1

    types = {}
    for key in database_keys(jaw_kind):
        per_char = pools.get(key, {})
        prior = occurrences.get(key, 0) / (2.0 * n_seeds)
        types[key] = TypeRecord(characteristics=per_char,
                                prior=min(prior, 1.0))
    db = TrainingDatabase(jaw_kind=jaw_kind, types=types)
    db.validate(strict=True)
    return db


def train_from_reports(payloads: list[dict]) -> TrainingDatabase:
    """Pool characteristics from labelled report JSON payloads.

    Each report's teeth carry their source blobs with the measured
    characteristics and assigned labels; priors are occurrence counts over
    quadrant slots.  The result may cover only the types seen in the
    reports; validation is non-strict, and missing types stay unassignable
    until more data arrives.
    """
    if not payloads:
        raise AssignmentError("no reports to train from")
    jaw_kinds = {p.get("jaw_kind") for p in payloads}
    if len(jaw_kinds) != 1:
        raise AssignmentError(
            f"reports mix jaw kinds {sorted(str(k) for k in jaw_kinds)}")
    jaw_kind = jaw_kinds.pop()
    if jaw_kind not in JAW_KINDS:
        raise AssignmentError(f"reports have unknown jaw kind {jaw_kind!r}")

    pools: dict[str, dict[str, list[float]]] = {}
    occurrences: dict[str, int] = {}
    for payload in payloads:
        for tooth in payload.get("teeth", []):
            for blob in tooth.get("source_blobs", []):
                label = blob.get("label")
                if not label:
                    continue
                ordinal, half = parse_code(label)[1:]
                key = ordinal if half is None else f"{ordinal}.{half}"
                per_char = pools.setdefault(key, {})
                for name, value in blob.get("characteristics",
                                            {}).items():
                    per_char.setdefault(name, []).append(float(value))
                occurrences[key] = occurrences.get(key, 0) + 1

    types = {}
    for key in database_keys(jaw_kind):
        if key not in pools:
            continue
        prior = occurrences[key] / (2.0 * len(payloads))
        types[key] = TypeRecord(characteristics=pools[key],
                                prior=min(prior, 1.0))
    db = TrainingDatabase(jaw_kind=jaw_kind, types=types)
    missing = db.validate(strict=False)
    if missing:
        log.warning("trained database lacks reference data for %s; those "
                    "types stay unassignable", ", ".join(missing))
    return db
