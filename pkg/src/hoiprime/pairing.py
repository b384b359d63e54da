"""Candidate human-object pairs from detector output.

Training pairs keep only detections that clear both the confidence and
the ground-truth overlap thresholds, then form every (human, object)
combination; test pairs only filter on confidence. Pair labels are
multi-hot over predicates, assigned by dual IoU against the scene's
ground-truth triplets. A human can serve as the object of another
human's pair; only pairing a detection with itself is excluded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datafiles import GtTriplet, Scene
from .geometry import (
    HUMAN_CLASS,
    BoxF,
    Detection,
    crop_resize,
    iou,
    rasterize_ip,
    union_box,
)


@dataclass
class HoiPair:
    """One candidate pair with everything the model consumes."""

    human: Detection
    object: Detection
    union: BoxF
    ip: np.ndarray          # [2, R, R] binary
    union_crop: np.ndarray  # [3, R, R]
    w_o: np.ndarray         # object-class embedding
    target: np.ndarray | None = None  # [P] multi-hot, training only


def label_pair(human_box: BoxF, object_box: BoxF, object_class: int,
               gt_triplets: list[GtTriplet], n_predicates: int,
               match_iou: float = 0.5) -> np.ndarray:
    """Multi-hot predicate vector for a candidate pair.

    Predicate p is set when some ground-truth triplet with the same
    object class overlaps the pair with human IoU and object IoU both
    above ``match_iou``.
    """
    target = np.zeros(n_predicates, dtype=np.float32)
    for gt in gt_triplets:
        if gt.object_class != object_class:
            continue
        if iou(human_box, gt.human_box) > match_iou \
                and iou(object_box, gt.object_box) > match_iou:
            target[gt.predicate] = 1.0
    return target


def _build_pair(human: Detection, obj: Detection, image: np.ndarray,
                embeddings: np.ndarray, resolution: int) -> HoiPair:
    u = union_box(human.box, obj.box)
    return HoiPair(
        human=human,
        object=obj,
        union=u,
        ip=rasterize_ip(human.box, obj.box, resolution),
        union_crop=crop_resize(image, u, resolution),
        w_o=embeddings[obj.class_id],
    )


def make_training_pairs(dets: list[Detection], scene: Scene,
                        embeddings: np.ndarray, resolution: int,
                        n_predicates: int, conf_min: float = 0.75,
                        gt_iou_min: float = 0.7,
                        match_iou: float = 0.5) -> list[HoiPair]:
    """All labeled candidate pairs from detections that pass both filters.

    A detection survives when its score exceeds ``conf_min`` and its best
    IoU against any ground-truth human or object box exceeds
    ``gt_iou_min``. Pure-negative pairs come out with all-zero targets.
    """
    gt_boxes = [g.human_box for g in scene.gt] + [g.object_box for g in scene.gt]
    kept = []
    for d in dets:
        if d.score <= conf_min:
            continue
        best = max((iou(d.box, b) for b in gt_boxes), default=0.0)
        if best <= gt_iou_min:
            continue
        kept.append(d)
    humans = [d for d in kept if d.class_id == HUMAN_CLASS]
    pairs = []
    for h in humans:
        for o in kept:
            if o is h:
                continue
            pair = _build_pair(h, o, scene.image, embeddings, resolution)
            pair.target = label_pair(h.box, o.box, o.class_id, scene.gt,
                                     n_predicates, match_iou)
            pairs.append(pair)
    return pairs


def make_test_pairs(dets: list[Detection], image: np.ndarray,
                    embeddings: np.ndarray, resolution: int,
                    conf_min: float = 0.9) -> list[HoiPair]:
    """Unlabeled candidate pairs from high-confidence detections only."""
    kept = [d for d in dets if d.score > conf_min]
    humans = [d for d in kept if d.class_id == HUMAN_CLASS]
    pairs = []
    for h in humans:
        for o in kept:
            if o is h:
                continue
            pairs.append(_build_pair(h, o, image, embeddings, resolution))
    return pairs
