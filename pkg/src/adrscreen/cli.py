"""Command-line pipeline: simulate, classify, score, diagnose, evaluate, timeline.

Every command is deterministic given its inputs and flags; reruns produce
byte-identical outputs. Errors print a single ``error: ...`` line to stderr
and exit nonzero. Set ADRSCREEN_LOG=debug|info|warning to adjust verbosity.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

from .classifier import ClassifierConfig, classify_sequence, parse_classifier_config_fields
from .errors import AdrScreenError, EmptyInputError
from .evaluation import evaluate_cohort, with_roc, write_evaluation
from .ingest import (
    LABELS_SUFFIX,
    SKELETON_SUFFIX,
    CohortManifest,
    atomic_write,
    parse_adr_results,
    parse_diagnoses,
    parse_label_file,
    parse_manifest,
    parse_skeleton_file,
    write_adr_results,
    write_diagnoses,
    write_label_file,
    write_timeline,
)
from .model import ActionLabelSequence, Group, View
from .scoring import (
    DEFAULT_FIXED_THRESHOLD,
    ThresholdPolicy,
    derive_threshold,
    diagnose,
    score_participant,
)
from .synthetic import CohortSpec, simulate_cohort

log = logging.getLogger("adrscreen")


def _configure_logging() -> None:
    level = os.environ.get("ADRSCREEN_LOG", "warning").upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _read(path: Path, what: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise AdrScreenError(f"cannot read {what} {path}: {e.strerror}") from e


def _load_manifest(path: Path) -> CohortManifest:
    return parse_manifest(_read(path, "manifest"))


def _resolve(base: Path, ref: str) -> Path:
    path = Path(ref)
    return path if path.is_absolute() else Path(base).parent / path


def _label_file_name(pid: str, view: View) -> str:
    return f"{pid}_{view.value}{LABELS_SUFFIX}"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_classify(args) -> int:
    manifest_path = Path(args.manifest)
    manifest = _load_manifest(manifest_path)

    fields: dict = {}
    if args.config:
        fields.update(parse_classifier_config_fields(_read(Path(args.config), "classifier config")))
    for flag, name in (("theta_torso", "theta_torso"), ("theta_limb", "theta_limb"),
                       ("c_min", "c_min"), ("window_size", "window_size")):
        value = getattr(args, flag)
        if value is not None:
            fields[name] = value
    fields.setdefault("window_size", manifest.window_size)
    try:
        cfg = ClassifierConfig(**fields)
    except ValueError as e:
        raise AdrScreenError(f"bad classifier config: {e}") from e

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for record in manifest.participants:
        pid = record.participant_id
        for view, ref in sorted(record.sources.items()):
            path = _resolve(manifest_path, ref)
            if not path.name.endswith(SKELETON_SUFFIX):
                raise AdrScreenError(
                    f"participant {pid} ({view.value}): {ref!r} is not a skeleton file; "
                    f"classify needs {SKELETON_SUFFIX} references")
            try:
                seq = parse_skeleton_file(_read(path, "skeleton file"))
                labels = classify_sequence(seq, cfg.window_size, cfg)
            except AdrScreenError as e:
                raise AdrScreenError(f"participant {pid} ({view.value}): {e}") from e
            atomic_write(out_dir / _label_file_name(pid, view), write_label_file(labels))
            log.info("classified %s %s: %d windows", pid, view.value, len(labels))
    return 0


def cmd_score(args) -> int:
    manifest_path = Path(args.manifest)
    manifest = _load_manifest(manifest_path)
    labels_dir = Path(args.labels) if args.labels else None

    results = []
    for record in manifest.participants:
        pid = record.participant_id
        per_view: dict[View, ActionLabelSequence] = {}
        for view in sorted(record.sources):
            if labels_dir is not None:
                path = labels_dir / _label_file_name(pid, view)
                if not path.exists():
                    log.info("no label file for %s %s, skipping view", pid, view.value)
                    continue
            else:
                path = _resolve(manifest_path, record.sources[view])
                if not path.name.endswith(LABELS_SUFFIX):
                    raise AdrScreenError(
                        f"participant {pid} ({view.value}): {record.sources[view]!r} is not a "
                        f"label file; run classify first or pass --labels")
            try:
                per_view[view] = parse_label_file(
                    _read(path, "label file"), participant_id=pid, view=view,
                    window_size=manifest.window_size)
            except AdrScreenError as e:
                raise AdrScreenError(f"participant {pid} ({view.value}): {e}") from e
        if not per_view:
            raise EmptyInputError(f"participant {pid}: no label file for any view")
        results.append(score_participant(pid, per_view))

    groups = {p.participant_id: p.group for p in manifest.participants}
    atomic_write(Path(args.out), write_adr_results(results, groups))
    log.info("scored %d participants", len(results))
    return 0


def cmd_diagnose(args) -> int:
    rows = parse_adr_results(_read(Path(args.adr), "ADR report"))
    if not rows:
        raise EmptyInputError(f"ADR report {args.adr} has no participants")
    if args.threshold_mode == "cohort-mean":
        policy = ThresholdPolicy.cohort_mean()
    else:
        value = args.threshold if args.threshold is not None else DEFAULT_FIXED_THRESHOLD
        policy = ThresholdPolicy.fixed(value)
    threshold = derive_threshold(rows, policy)
    diagnoses = [diagnose(r.adr_final, threshold, r.participant_id) for r in rows]
    atomic_write(Path(args.out), write_diagnoses(diagnoses, policy.mode.value))
    log.info("diagnosed %d participants at threshold %.4f (%s)",
             len(diagnoses), threshold, policy.mode.value)
    return 0


def cmd_evaluate(args) -> int:
    diagnoses, threshold_mode = parse_diagnoses(_read(Path(args.diag), "diagnosis report"))
    manifest = _load_manifest(Path(args.manifest))
    positive = Group.CONTROL if args.positive == "control" else Group.ADHD
    summary = evaluate_cohort(diagnoses, manifest, positive)
    groups = {p.participant_id: p.group for p in manifest.participants}
    scores = [(d.adr_final, groups[d.participant_id]) for d in diagnoses]
    summary = with_roc(summary, scores)
    atomic_write(Path(args.out), write_evaluation(summary, diagnoses[0].threshold, threshold_mode))
    log.info("evaluated %d participants: accuracy %.3f, auc %.4f",
             summary.cohort_size, summary.accuracy, summary.auc)
    return 0


def cmd_simulate(args) -> int:
    if args.spec:
        spec = CohortSpec.from_json(_read(Path(args.spec), "cohort spec"))
    else:
        spec = CohortSpec()
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    manifest_path = simulate_cohort(spec, Path(args.out))
    log.info("simulated cohort at %s", manifest_path)
    return 0


def cmd_timeline(args) -> int:
    labels = parse_label_file(_read(Path(args.labels), "label file"),
                              window_size=args.window_size)
    atomic_write(Path(args.out), write_timeline(labels))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adrscreen",
        description="Action-label hyperactivity scoring and ADHD/control screening.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="label skeleton sequences per window")
    p.add_argument("--manifest", required=True)
    p.add_argument("--config", help="classifier config JSON (.classifier.json)")
    p.add_argument("--theta-torso", dest="theta_torso", type=float)
    p.add_argument("--theta-limb", dest="theta_limb", type=float)
    p.add_argument("--c-min", dest="c_min", type=float)
    p.add_argument("--window-size", dest="window_size", type=int)
    p.add_argument("--out", required=True, help="output directory for label files")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("score", help="compute per-participant attention deficit ratios")
    p.add_argument("--manifest", required=True)
    p.add_argument("--labels", help="directory of label files from classify")
    p.add_argument("--out", required=True, help="output .adr.csv path")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("diagnose", help="apply the screening threshold")
    p.add_argument("--adr", required=True, help=".adr.csv report")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--threshold", type=float,
                       help=f"fixed threshold (default {DEFAULT_FIXED_THRESHOLD})")
    group.add_argument("--threshold-mode", dest="threshold_mode",
                       choices=["fixed", "cohort-mean"], default="fixed")
    p.add_argument("--out", required=True, help="output .diag.csv path")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("evaluate", help="score decisions against ground truth")
    p.add_argument("--diag", required=True, help=".diag.csv report")
    p.add_argument("--manifest", required=True)
    p.add_argument("--positive", choices=["control", "adhd"], default="control",
                   help="class treated as positive in the confusion metrics")
    p.add_argument("--out", required=True, help="output .eval.json path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("simulate", help="write a seeded synthetic cohort")
    p.add_argument("--spec", help="cohort spec JSON (defaults used when omitted)")
    p.add_argument("--seed", type=int, help="override the spec's seed")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("timeline", help="emit per-window frame spans for plotting")
    p.add_argument("--labels", required=True, help=".labels.csv file")
    p.add_argument("--window-size", dest="window_size", type=int, default=50)
    p.add_argument("--out", required=True, help="output .timeline.csv path")
    p.set_defaults(func=cmd_timeline)

    return parser


def main(argv=None) -> int:
    _configure_logging()
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AdrScreenError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
