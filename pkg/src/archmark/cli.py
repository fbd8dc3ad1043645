"""Command-line interface.

Subcommands
-----------
run    Segment and label one STL scan, emit the landmark report.
synth  Generate a synthetic arch model (STL plus ground-truth JSON).
train  Build a training database from labelled reports, or bootstrap one
       from the synthetic cohort.

Exit codes: 0 success, 2 unreadable input, 3 orientation failure,
4 segmentation failure, 5 assignment failure, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .database import TrainingDatabase
from .errors import (ArchmarkError, AssignmentError, GenerationError,
                     OrientationError, ParseError, SegmentationError)
from .pipeline import PipelineConfig, analyze
from .report import write_curvature_ply, write_ply
from .synth import generate_synthetic_jaw, spec_from_json, truth_summary
from .training import build_reference_database, train_from_reports

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARSE = 2
EXIT_ORIENTATION = 3
EXIT_SEGMENTATION = 4
EXIT_ASSIGNMENT = 5

log = logging.getLogger(__name__)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="archmark",
        description="Tooth segmentation, identification and landmarks "
                    "for scanned dental arches.")
    parser.add_argument("--verbose", "-v", action="store_true",
                        help="log progress details to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="process one STL scan")
    run.add_argument("stl", help="input STL file (binary or ASCII)")
    run.add_argument("--db", required=True,
                     help="training database JSON")
    run.add_argument("--jaw", default=None,
                     help="expected jaw kind; errors if the database "
                          "disagrees")
    run.add_argument("--out", default=None,
                     help="write the report here instead of stdout")
    run.add_argument("--ply", default=None,
                     help="write a colour-coded segmentation mesh")
    run.add_argument("--curvature-ply", default=None,
                     help="write a crossing-cost debug mesh")
    run.add_argument("--height-threshold", type=float, default=6.0,
                     help="peak band below the highest peak, mm "
                          "(default 6)")
    run.add_argument("--spill-radius", type=float, default=12.0,
                     help="flood stop radius around the seed peak, mm")
    run.add_argument("--fussiness", type=float, default=8.0,
                     help="penalty weight for missing expected teeth")
    run.add_argument("--snap", type=float, default=0.0,
                     help="vertex merge tolerance, mm (default exact)")
    run.add_argument("--incisor-policy", default="edge_midpoint",
                     choices=("edge_midpoint", "highest_peak"),
                     help="incisor landmark rule")

    synth = sub.add_parser("synth", help="generate a synthetic model")
    synth.add_argument("spec", help="JSON spec: jaw_kind plus optional "
                                    "seed, grid_step, missing, variants")
    synth.add_argument("--out", required=True, help="output STL path")
    synth.add_argument("--truth", default=None,
                       help="write ground-truth landmarks JSON here")

    train = sub.add_parser("train", help="build a training database")
    train.add_argument("reports", nargs="*",
                       help="labelled landmark report JSON files")
    train.add_argument("--synthetic", default=None, metavar="JAW_KIND",
                       help="bootstrap from the synthetic cohort instead")
    train.add_argument("--seeds", type=int, default=12,
                       help="cohort size for --synthetic (default 12)")
    train.add_argument("--grid-step", type=float, default=0.45,
                       help="cohort mesh resolution for --synthetic, mm")
    train.add_argument("--out", required=True,
                       help="output database JSON path")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    database = TrainingDatabase.load(args.db)
    if args.jaw is not None and args.jaw != database.jaw_kind:
        raise AssignmentError(
            f"database is for {database.jaw_kind}, not {args.jaw}")
    config = PipelineConfig(
        height_threshold=args.height_threshold,
        spill_radius=args.spill_radius,
        fussiness=args.fussiness,
        snap=args.snap,
        incisor_policy=args.incisor_policy)
    result = analyze(args.stl, database, config)
    report = result.report

    if args.ply:
        labelled = {t.code: t.faces for t in result.teeth}
        points = np.array([lm.position
                           for marks in result.landmarks
                           for lm in marks])
        write_ply(args.ply, result.state.mesh, labelled, points)
    if args.curvature_ply:
        from .curvature import cost_map, edge_curvatures
        costs = cost_map(edge_curvatures(result.state.mesh))
        face_cost = np.nanmax(np.where(np.isfinite(costs), costs, 0.0),
                              axis=1)
        write_curvature_ply(args.curvature_ply, result.state.mesh,
                            face_cost)

    if args.out:
        report.save(args.out)
        labelled_n = len(report.teeth)
        print(f"labelled {labelled_n} teeth "
              f"({len(report.missing_teeth)} missing, "
              f"{len(report.unassigned)} unassigned blobs); "
              f"report written to {args.out}")
    else:
        print(report.to_json())
    return EXIT_OK


def _cmd_synth(args: argparse.Namespace) -> int:
    with open(args.spec, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    spec = spec_from_json(payload)
    soup, gt = generate_synthetic_jaw(spec)
    from .stl import write_stl_file
    write_stl_file(soup, args.out)
    if args.truth:
        with open(args.truth, "w", encoding="utf-8") as fh:
            json.dump(truth_summary(gt), fh, sort_keys=True, indent=2)
            fh.write("\n")
    print(f"wrote {len(soup)} triangles to {args.out}")
    return EXIT_OK


def _cmd_train(args: argparse.Namespace) -> int:
    if args.synthetic is not None:
        if args.reports:
            raise GenerationError(
                "--synthetic and report files are mutually exclusive")
        db = build_reference_database(args.synthetic, n_seeds=args.seeds,
                                      grid_step=args.grid_step)
    else:
        if not args.reports:
            raise AssignmentError(
                "provide labelled reports or use --synthetic")
        payloads = []
        for path in args.reports:
            with open(path, "r", encoding="utf-8") as fh:
                payloads.append(json.load(fh))
        db = train_from_reports(payloads)
    db.save(args.out)
    print(f"wrote {db.jaw_kind} database with {len(db.types)} types "
          f"to {args.out}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "synth":
            return _cmd_synth(args)
        return _cmd_train(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OrientationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORIENTATION
    except SegmentationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEGMENTATION
    except AssignmentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ASSIGNMENT
    except (ArchmarkError, OSError, json.JSONDecodeError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
