"""Detection-style evaluation over interaction triplets.

A detected triplet counts as correct when both its human box and its
object box overlap an unmatched ground-truth instance of the same
triplet class with IoU above 0.5. Per-class average precision uses
all-point (precision-envelope) interpolation; note this shifts absolute
numbers versus 11-point interpolation. Classes with no ground truth in
the test set are excluded from every mean.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .datafiles import read_json, write_json
from .errors import ArgumentError, SplitConstraintError
from .geometry import BoxF, iou
from .seeding import derive_seed, worker_count


def encode_triplet(predicate: int, object_class: int, n_objects: int) -> int:
    return predicate * n_objects + object_class


def decode_triplet(triplet_id: int, n_objects: int) -> tuple[int, int]:
    return triplet_id // n_objects, triplet_id % n_objects


@dataclass(frozen=True)
class TripletDetection:
    scene_id: str
    human_box: BoxF
    object_box: BoxF
    triplet_id: int
    score: float


@dataclass(frozen=True)
class GtInstance:
    scene_id: str
    human_box: BoxF
    object_box: BoxF
    triplet_id: int


@dataclass
class EvalReport:
    """Per-class APs plus the split means; rare/seen splits optional."""

    per_class_ap: dict[int, float]
    gt_counts: dict[int, int]
    map_full: float
    map_rare: float | None = None
    map_nonrare: float | None = None
    map_seen: float | None = None
    map_unseen: float | None = None
    extras: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "per_class_ap": {str(k): v for k, v in sorted(self.per_class_ap.items())},
            "gt_counts": {str(k): v for k, v in sorted(self.gt_counts.items())},
            "map_full": self.map_full,
            "map_rare": self.map_rare,
            "map_nonrare": self.map_nonrare,
            "map_seen": self.map_seen,
            "map_unseen": self.map_unseen,
            **self.extras,
        }


def match_class(dets: list[TripletDetection], gts: list[GtInstance],
                iou_min: float = 0.5) -> tuple[list[bool], int]:
    """Greedy score-order matching for one triplet class.

    ``dets`` must already be sorted by descending score (ties keep their
    input order). Each detection claims the unmatched same-scene ground
    truth maximizing min(human IoU, object IoU), provided both IoUs
    exceed ``iou_min``; every ground truth matches at most once.
    """
    by_scene: dict[str, list[int]] = {}
    for j, g in enumerate(gts):
        by_scene.setdefault(g.scene_id, []).append(j)
    matched = [False] * len(gts)
    flags: list[bool] = []
    for d in dets:
        best_j = -1
        best_q = 0.0
        for j in by_scene.get(d.scene_id, ()):
            if matched[j]:
                continue
            hi = iou(d.human_box, gts[j].human_box)
            if hi <= iou_min:
                continue
            oi = iou(d.object_box, gts[j].object_box)
            if oi <= iou_min:
                continue
            q = min(hi, oi)
            if q > best_q:
                best_q = q
                best_j = j
        if best_j >= 0:
            matched[best_j] = True
            flags.append(True)
        else:
            flags.append(False)
    return flags, len(gts)


def average_precision(flags: list[bool], n_gt: int) -> float | None:
    """Area under the precision-recall curve, all-point interpolated.

    Returns None when the class has no ground truth (skipped from means)
    and 0.0 when ground truth exists but nothing was recovered.
    """
    if n_gt == 0:
        return None
    if not flags:
        return 0.0
    tp = np.cumsum(np.asarray(flags, dtype=np.float64))
    ranks = np.arange(1, len(flags) + 1, dtype=np.float64)
    precision = tp / ranks
    recall = tp / n_gt
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    ap = 0.0
    prev_recall = 0.0
    for i, hit in enumerate(flags):
        if hit:
            ap += (recall[i] - prev_recall) * envelope[i]
            prev_recall = recall[i]
    return float(ap)


def evaluate_detections(dets: list[TripletDetection], gts: list[GtInstance],
                        iou_min: float = 0.5,
                        workers: int | None = None) -> tuple[dict[int, float], dict[int, int]]:
    """Per-class AP and ground-truth counts over all classes with any GT."""
    det_by_class: dict[int, list[TripletDetection]] = {}
    for d in dets:
        det_by_class.setdefault(d.triplet_id, []).append(d)
    gt_by_class: dict[int, list[GtInstance]] = {}
    for g in gts:
        gt_by_class.setdefault(g.triplet_id, []).append(g)

    classes = sorted(gt_by_class)

    def one_class(cls: int) -> tuple[float, int]:
        class_dets = sorted(det_by_class.get(cls, []), key=lambda d: -d.score)
        flags, n_gt = match_class(class_dets, gt_by_class[cls], iou_min)
        return average_precision(flags, n_gt), n_gt

    n_workers = worker_count(workers)
    if n_workers > 1 and len(classes) > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(one_class, classes))
    else:
        results = [one_class(c) for c in classes]

    per_class = {c: r[0] for c, r in zip(classes, results)}
    counts = {c: r[1] for c, r in zip(classes, results)}
    return per_class, counts


def _mean(values: list[float]) -> float | None:
    return float(np.mean(values)) if values else None


def aggregate(per_class_ap: dict[int, float], gt_counts: dict[int, int],
              train_counts: dict[int, int],
              rare_threshold: int = 10) -> EvalReport:
    """Full/Rare/Non-rare means; rare means fewer than 10 training samples."""
    classes = sorted(per_class_ap)
    rare = [c for c in classes if train_counts.get(c, 0) < rare_threshold]
    nonrare = [c for c in classes if train_counts.get(c, 0) >= rare_threshold]
    return EvalReport(
        per_class_ap=dict(per_class_ap),
        gt_counts=dict(gt_counts),
        map_full=_mean([per_class_ap[c] for c in classes]) or 0.0,
        map_rare=_mean([per_class_ap[c] for c in rare]),
        map_nonrare=_mean([per_class_ap[c] for c in nonrare]),
    )


def aggregate_zero_shot(per_class_ap: dict[int, float], gt_counts: dict[int, int],
                        unseen: set[int]) -> EvalReport:
    """Seen/Unseen/All means under a class split."""
    classes = sorted(per_class_ap)
    seen_aps = [per_class_ap[c] for c in classes if c not in unseen]
    unseen_aps = [per_class_ap[c] for c in classes if c in unseen]
    return EvalReport(
        per_class_ap=dict(per_class_ap),
        gt_counts=dict(gt_counts),
        map_full=_mean([per_class_ap[c] for c in classes]) or 0.0,
        map_seen=_mean(seen_aps),
        map_unseen=_mean(unseen_aps),
    )


def zero_shot_split(triplet_ids: list[int], n_objects: int, n_unseen: int,
                    seed_or_file) -> tuple[set[int], set[int]]:
    """Split triplet classes into seen/unseen sets.

    With an integer seed the unseen set is sampled under the constraint
    that every object class keeps at least one seen triplet; with a path
    the split is loaded and re-validated against the same constraint.
    """
    ids = sorted(set(triplet_ids))
    if isinstance(seed_or_file, (str, Path)):
        payload = read_json(seed_or_file)
        unseen = {int(k) for k, v in payload["split"].items() if v == "unseen"}
        seen = {int(k) for k, v in payload["split"].items() if v == "seen"}
        _check_split(ids, seen, unseen, n_objects, n_unseen)
        return seen, unseen

    if n_unseen >= len(ids):
        raise SplitConstraintError(
            f"cannot withhold {n_unseen} of {len(ids)} triplet classes")
    rng = np.random.default_rng(derive_seed(seed_or_file, "zero-shot-split"))
    seen_per_object: dict[int, int] = {}
    for t in ids:
        obj = t % n_objects
        seen_per_object[obj] = seen_per_object.get(obj, 0) + 1
    unseen: set[int] = set()
    for t in rng.permutation(ids):
        if len(unseen) == n_unseen:
            break
        obj = int(t) % n_objects
        if seen_per_object[obj] > 1:
            seen_per_object[obj] -= 1
            unseen.add(int(t))
    if len(unseen) < n_unseen:
        raise SplitConstraintError(
            "per-object coverage makes the requested unseen count infeasible")
    return set(ids) - unseen, unseen


def _check_split(ids, seen: set[int], unseen: set[int], n_objects: int,
                 n_unseen: int) -> None:
    if seen & unseen:
        raise SplitConstraintError("classes assigned to both sides of the split")
    if set(ids) - (seen | unseen):
        raise SplitConstraintError("split file misses some triplet classes")
    if len(unseen) != n_unseen:
        raise SplitConstraintError(
            f"split file has {len(unseen)} unseen classes, expected {n_unseen}")
    covered = {t % n_objects for t in seen}
    wanted = {t % n_objects for t in ids}
    if wanted - covered:
        raise SplitConstraintError(
            f"objects with no seen triplet: {sorted(wanted - covered)}")


def write_split(path, seen: set[int], unseen: set[int]) -> None:
    split = {str(t): "seen" for t in sorted(seen)}
    split.update({str(t): "unseen" for t in sorted(unseen)})
    write_json(path, {"split": split})


def format_report_table(rows: list[tuple[str, EvalReport]],
                        zero_shot: bool = False) -> str:
    """Fixed-width table with one row per setting, mirroring mAP reports."""
    if zero_shot:
        header = f"{'setting':<18} {'Unseen':>8} {'Seen':>8} {'All':>8}"
        lines = [header, "-" * len(header)]
        for name, rep in rows:
            lines.append(f"{name:<18} {_fmt(rep.map_unseen):>8} "
                         f"{_fmt(rep.map_seen):>8} {_fmt(rep.map_full):>8}")
    else:
        header = f"{'setting':<18} {'Full':>8} {'Rare':>8} {'Non-rare':>9}"
        lines = [header, "-" * len(header)]
        for name, rep in rows:
            lines.append(f"{name:<18} {_fmt(rep.map_full):>8} "
                         f"{_fmt(rep.map_rare):>8} {_fmt(rep.map_nonrare):>9}")
    return "\n".join(lines) + "\n"


def _fmt(value: float | None) -> str:
    return "-" if value is None else f"{value:.4f}"
