"""Procedural scenes with layout-determined interaction labels.

Every layout predicate is a total, deterministic rule over the
(human box, object box) geometry, and the rules partition that geometry
space, so each pair satisfies exactly one. The generator samples object
placements from the chosen rule's region (with margins, so rasterized
patterns stay separable), then relabels every human-entity pair from
its final geometry; labels are exact by construction.

An optional appearance predicate fires on an object's accent color
variant instead of layout, giving the visual branch information the
layout branch cannot have. A simulated detector stands in for the
frozen object detector: jittered boxes, confidence scores, misses,
false positives, and class-conditioned appearance features.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import datafiles
from .datafiles import Entity, GtTriplet, Scene
from .errors import ArgumentError
from .evaluation import encode_triplet
from .geometry import BoxF, Detection, contains, intersection_area
from .seeding import config_hash, derive_seed

LAYOUT_RULES = ("above", "below", "beside", "overlapping", "containing", "far_from")

_PALETTE = (
    (0.85, 0.65, 0.45),
    (0.20, 0.45, 0.85),
    (0.20, 0.75, 0.30),
    (0.90, 0.80, 0.20),
    (0.80, 0.25, 0.25),
    (0.55, 0.30, 0.75),
    (0.15, 0.70, 0.70),
    (0.95, 0.50, 0.15),
)
_SHAPES = ("rect", "disc", "triangle", "diamond")
_BACKGROUND = 0.1
_MAX_TRIES = 40


@dataclass(frozen=True)
class PredicateDef:
    """One predicate: a layout rule name or the appearance marker."""

    name: str
    kind: str  # one of LAYOUT_RULES or "appearance"
    allowed_classes: tuple[int, ...] | None = None  # None: every class

    def allows(self, class_id: int) -> bool:
        return self.allowed_classes is None or class_id in self.allowed_classes


@dataclass(frozen=True)
class SceneSpec:
    image_size: int = 64
    n_object_classes: int = 4
    predicates: tuple[PredicateDef, ...] = ()
    humans_range: tuple[int, int] = (1, 1)
    objects_range: tuple[int, int] = (2, 2)
    negative_pair_rate: float = 0.0
    accent_rate: float = 0.5
    far_threshold: float = 0.28  # fraction of the image size
    rare_multipliers: tuple[tuple[int, int, float], ...] = ()

    @property
    def n_predicates(self) -> int:
        return len(self.predicates)


def validate_spec(spec: SceneSpec) -> None:
    if spec.n_predicates < 1:
        raise ArgumentError("spec needs at least one predicate")
    if spec.n_object_classes < 2:
        raise ArgumentError("spec needs the human class plus one object class")
    if spec.image_size < 32:
        raise ArgumentError("image size below 32 leaves no room for layouts")
    kinds = [p.kind for p in spec.predicates]
    for k in kinds:
        if k not in LAYOUT_RULES and k != "appearance":
            raise ArgumentError(f"unknown predicate kind {k!r}")
    if kinds.count("appearance") > 1:
        raise ArgumentError("at most one appearance predicate is supported")
    layout_kinds = [k for k in kinds if k != "appearance"]
    if len(set(layout_kinds)) != len(layout_kinds):
        raise ArgumentError("each layout rule may back at most one predicate")
    if not layout_kinds:
        raise ArgumentError("spec needs at least one layout predicate")
    if spec.negative_pair_rate > 0 and "far_from" in kinds:
        raise ArgumentError(
            "negative pairs use the far region; far_from cannot also be a predicate")
    if not 0.0 <= spec.negative_pair_rate <= 1.0:
        raise ArgumentError("negative_pair_rate must be in [0, 1]")
    if not 0.0 <= spec.accent_rate <= 1.0:
        raise ArgumentError("accent_rate must be in [0, 1]")
    lo, hi = spec.humans_range
    if not 1 <= lo <= hi:
        raise ArgumentError("humans_range must satisfy 1 <= lo <= hi")
    lo, hi = spec.objects_range
    if not 1 <= lo <= hi:
        raise ArgumentError("objects_range must satisfy 1 <= lo <= hi")


# ---------------------------------------------------------------------------
# layout rules


def _edge_gap(a: BoxF, b: BoxF) -> float:
    gx = max(a.x1 - b.x2, b.x1 - a.x2, 0.0)
    gy = max(a.y1 - b.y2, b.y1 - a.y2, 0.0)
    return math.hypot(gx, gy)


def layout_relation(human: BoxF, obj: BoxF, far_threshold: float) -> str:
    """The one layout-rule region this pair occupies.

    Precedence: containment, any overlap, far separation, then the
    dominant axis of the center displacement (vertical wins ties).
    "above" means the human sits above the object (y grows downward).
    """
    if contains(human, obj):
        return "containing"
    if intersection_area(human, obj) > 0.0:
        return "overlapping"
    if _edge_gap(human, obj) > far_threshold:
        return "far_from"
    dx = obj.cx - human.cx
    dy = obj.cy - human.cy
    if abs(dy) >= abs(dx):
        return "above" if dy > 0 else "below"
    return "beside"


# ---------------------------------------------------------------------------
# placement samplers; each returns a box satisfying its rule or None


def _clamped(x1, y1, w, h, size) -> BoxF | None:
    x1 = min(max(x1, 0.0), size - w)
    y1 = min(max(y1, 0.0), size - h)
    if x1 < 0 or y1 < 0:
        return None
    return BoxF(x1, y1, x1 + w, y1 + h)


def _object_dims(rng, human: BoxF) -> tuple[float, float]:
    return (rng.uniform(0.4, 0.9) * human.width,
            rng.uniform(0.4, 0.9) * human.height)


def _place_containing(rng, human: BoxF, size, far_px, margin):
    avail_w = human.width - 2 * margin
    avail_h = human.height - 2 * margin
    if avail_w < 2 or avail_h < 2:
        return None
    w = rng.uniform(0.3, 0.6) * avail_w
    h = rng.uniform(0.3, 0.6) * avail_h
    x1 = rng.uniform(human.x1 + margin, human.x2 - margin - w)
    y1 = rng.uniform(human.y1 + margin, human.y2 - margin - h)
    return BoxF(x1, y1, x1 + w, y1 + h)


def _place_overlapping(rng, human: BoxF, size, far_px, margin):
    w, h = _object_dims(rng, human)
    depth = rng.uniform(0.25, 0.6) * min(w, human.width)
    if rng.random() < 0.5:
        x1 = human.x2 - depth
    else:
        x1 = human.x1 - w + depth
    cy = human.cy + rng.uniform(-0.3, 0.3) * human.height
    return _clamped(x1, cy - h / 2, w, h, size)


def _place_directional(rng, human: BoxF, size, far_px, margin, axis: str):
    w, h = _object_dims(rng, human)
    gap = rng.uniform(margin, 0.5 * far_px)
    if axis == "above":       # human above: object below it
        y1 = human.y2 + gap
        dy = (y1 + h / 2) - human.cy
        cx = human.cx + rng.uniform(-0.6, 0.6) * dy
        return _clamped(cx - w / 2, y1, w, h, size)
    if axis == "below":
        y2 = human.y1 - gap
        dy = human.cy - (y2 - h / 2)
        cx = human.cx + rng.uniform(-0.6, 0.6) * dy
        return _clamped(cx - w / 2, y2 - h, w, h, size)
    # beside: either side, horizontal displacement dominant
    side = 1 if rng.random() < 0.5 else -1
    if side > 0:
        x1 = human.x2 + gap
        dx = (x1 + w / 2) - human.cx
    else:
        x1 = human.x1 - gap - w
        dx = human.cx - (x1 + w / 2)
    cy = human.cy + rng.uniform(-0.6, 0.6) * dx
    return _clamped(x1, cy - h / 2, w, h, size)


def _place_far(rng, human: BoxF, size, far_px, margin):
    for _ in range(_MAX_TRIES):
        w = rng.uniform(0.1, 0.25) * size
        h = rng.uniform(0.1, 0.25) * size
        x1 = rng.uniform(0, size - w)
        y1 = rng.uniform(0, size - h)
        box = BoxF(x1, y1, x1 + w, y1 + h)
        if _edge_gap(human, box) > far_px + margin:
            return box
    return None


_PLACERS = {
    "containing": _place_containing,
    "overlapping": _place_overlapping,
    "above": lambda rng, hb, s, f, m: _place_directional(rng, hb, s, f, m, "above"),
    "below": lambda rng, hb, s, f, m: _place_directional(rng, hb, s, f, m, "below"),
    "beside": lambda rng, hb, s, f, m: _place_directional(rng, hb, s, f, m, "beside"),
    "far_from": _place_far,
}


def _sample_rule_box(rng, rule: str, human: BoxF, size, far_px, margin) -> BoxF | None:
    placer = _PLACERS[rule]
    for _ in range(_MAX_TRIES):
        box = placer(rng, human, size, far_px, margin)
        if box is None:
            continue
        if layout_relation(human, box, far_px) == rule:
            return box
    return None


# ---------------------------------------------------------------------------
# rendering


def class_style(class_id: int) -> tuple[str, tuple[float, float, float]]:
    return _SHAPES[class_id % len(_SHAPES)], _PALETTE[class_id % len(_PALETTE)]


def _shape_mask(shape: str, box: BoxF, size: int) -> np.ndarray:
    centers = np.arange(size) + 0.5
    cx = centers[None, :]
    cy = centers[:, None]
    if shape == "rect":
        return (cx >= box.x1) & (cx <= box.x2) & (cy >= box.y1) & (cy <= box.y2)
    rx = max(box.width / 2, 0.5)
    ry = max(box.height / 2, 0.5)
    if shape == "disc":
        return ((cx - box.cx) / rx) ** 2 + ((cy - box.cy) / ry) ** 2 <= 1.0
    if shape == "diamond":
        return np.abs(cx - box.cx) / rx + np.abs(cy - box.cy) / ry <= 1.0
    # upward triangle: apex at top center, base along the bottom edge
    frac = np.clip((cy - box.y1) / max(box.height, 1e-6), 0.0, 1.0)
    inside_y = (cy >= box.y1) & (cy <= box.y2)
    return inside_y & (np.abs(cx - box.cx) <= frac * rx)


def render_scene(entities: list[Entity], size: int) -> np.ndarray:
    image = np.full((3, size, size), _BACKGROUND, dtype=np.float32)
    for e in entities:
        shape, color = class_style(e.class_id)
        if e.accent:
            color = tuple(1.0 - c for c in color)
        mask = _shape_mask(shape, e.box, size)
        for ch in range(3):
            image[ch][mask] = color[ch]
    return image


# ---------------------------------------------------------------------------
# scene generation


def _sample_human(rng, size) -> BoxF:
    w = rng.uniform(0.22, 0.38) * size
    h = rng.uniform(0.22, 0.38) * size
    x1 = rng.uniform(0, size - w)
    y1 = rng.uniform(0, size - h)
    return BoxF(x1, y1, x1 + w, y1 + h)


def _layout_combos(spec: SceneSpec):
    """(predicate index, rule, class) choices with rare-class weights."""
    mult = {(p, c): m for p, c, m in spec.rare_multipliers}
    combos = []
    weights = []
    for idx, pred in enumerate(spec.predicates):
        if pred.kind == "appearance":
            continue
        for c in range(1, spec.n_object_classes):
            if pred.allows(c):
                combos.append((idx, pred.kind, c))
                weights.append(mult.get((idx, c), 1.0))
    if not combos:
        raise ArgumentError("no (predicate, class) combination is allowed")
    w = np.asarray(weights, dtype=np.float64)
    return combos, w / w.sum()


def generate_scene(rng: np.random.Generator, spec: SceneSpec,
                   scene_id: str = "scene", neg_budget: dict | None = None) -> Scene:
    """One scene: placed entities, rendered image, exact pair labels.

    ``neg_budget`` is a shared {"pos": n, "neg": n} counter; when given,
    a negative placement only happens while neg <= ratio * pos holds
    (the ratio rides in the dict under "ratio").
    """
    size = spec.image_size
    far_px = spec.far_threshold * size
    margin = max(1.5, 0.02 * size)
    combos, weights = _layout_combos(spec)
    appearance_idx = next(
        (i for i, p in enumerate(spec.predicates) if p.kind == "appearance"), None)
    rule_to_pred = {p.kind: i for i, p in enumerate(spec.predicates)
                    if p.kind != "appearance"}

    n_humans = int(rng.integers(spec.humans_range[0], spec.humans_range[1] + 1))
    n_objects = int(rng.integers(spec.objects_range[0], spec.objects_range[1] + 1))
    humans: list[BoxF] = []
    for _ in range(n_humans):
        for _ in range(_MAX_TRIES):
            box = _sample_human(rng, size)
            from .geometry import iou as _iou
            if all(_iou(box, other) < 0.15 for other in humans):
                break
        humans.append(box)
    entities = [Entity(box, 0, False) for box in humans]

    for _ in range(n_objects):
        placed = None
        class_id = 1
        accent = False
        for _ in range(_MAX_TRIES):
            anchor = humans[int(rng.integers(len(humans)))]
            want_negative = (
                spec.negative_pair_rate > 0
                and rng.random() < spec.negative_pair_rate
                and _budget_allows(neg_budget)
            )
            if want_negative:
                class_id = int(rng.integers(1, spec.n_object_classes))
                box = _sample_rule_box(rng, "far_from", anchor, size, far_px, margin)
            else:
                pick = int(rng.choice(len(combos), p=weights))
                _, rule, class_id = combos[pick]
                box = _sample_rule_box(rng, rule, anchor, size, far_px, margin)
            if box is not None:
                placed = box
                if want_negative and neg_budget is not None:
                    neg_budget["neg"] += 1
                elif neg_budget is not None:
                    neg_budget["pos"] += 1
                break
        if placed is None:
            # fall back to any placement that fits; labels come from geometry
            for rule in rng.permutation([r for r in rule_to_pred]):
                anchor = humans[int(rng.integers(len(humans)))]
                placed = _sample_rule_box(rng, str(rule), anchor, size, far_px, margin)
                if placed is not None:
                    break
        if placed is None:
            continue
        if appearance_idx is not None \
                and spec.predicates[appearance_idx].allows(class_id):
            accent = bool(rng.random() < spec.accent_rate)
        entities.append(Entity(placed, class_id, accent))

    gt: list[GtTriplet] = []
    for hi in range(n_humans):
        h = entities[hi]
        for e in entities:
            if e is h:
                continue
            rule = layout_relation(h.box, e.box, far_px)
            pred = rule_to_pred.get(rule)
            if pred is not None and spec.predicates[pred].allows(e.class_id):
                gt.append(GtTriplet(h.box, e.box, e.class_id, pred))
            if appearance_idx is not None and e.accent \
                    and spec.predicates[appearance_idx].allows(e.class_id):
                gt.append(GtTriplet(h.box, e.box, e.class_id, appearance_idx))

    return Scene(scene_id=scene_id, image=render_scene(entities, size),
                 entities=entities, gt=gt)


def _budget_allows(budget: dict | None) -> bool:
    if budget is None:
        return True
    return budget["neg"] < budget["ratio"] * max(budget["pos"], 1)


# ---------------------------------------------------------------------------
# simulated detector


@dataclass(frozen=True)
class DetectorNoise:
    """Noise model standing in for a frozen object detector."""

    box_jitter: float = 0.0    # stddev as a fraction of box width/height
    score_sigma: float = 0.0   # true-positive score = clip(1 - |N(0, sigma)|)
    miss_rate: float = 0.0
    fp_rate: float = 0.0       # expected false positives per entity
    feature_noise: float = 0.0
    feature_dim: int = 32
    fp_score: tuple[float, float] = (0.5, 0.95)


def validate_noise(noise: DetectorNoise) -> None:
    for name in ("miss_rate", "fp_rate"):
        v = getattr(noise, name)
        if not 0.0 <= v <= 1.0:
            raise ArgumentError(f"{name} must be in [0, 1], got {v}")
    if noise.feature_dim < 1:
        raise ArgumentError("feature_dim must be positive")


def class_feature(class_id: int, dim: int) -> np.ndarray:
    """Deterministic unit appearance vector for one detector class."""
    rng = np.random.default_rng(derive_seed("detector-feature", class_id, dim))
    v = rng.standard_normal(dim)
    return (v / np.linalg.norm(v)).astype(np.float32)


def _jitter_box(rng, box: BoxF, sigma: float, size: int) -> BoxF:
    dx = rng.normal(0.0, sigma * box.width, 2)
    dy = rng.normal(0.0, sigma * box.height, 2)
    x1 = min(max(box.x1 + dx[0], 0.0), size - 1.0)
    y1 = min(max(box.y1 + dy[0], 0.0), size - 1.0)
    x2 = min(max(box.x2 + dx[1], x1 + 1.0), float(size))
    y2 = min(max(box.y2 + dy[1], y1 + 1.0), float(size))
    return BoxF(x1, y1, x2, y2)


def simulate_detector(scene: Scene, noise: DetectorNoise,
                      rng: np.random.Generator) -> list[Detection]:
    """Jittered, scored detections for each entity plus false positives."""
    validate_noise(noise)
    size = scene.image.shape[-1] if scene.image is not None else 64
    dets: list[Detection] = []
    for e in scene.entities:
        if noise.miss_rate > 0 and rng.random() < noise.miss_rate:
            continue
        box = e.box if noise.box_jitter == 0 \
            else _jitter_box(rng, e.box, noise.box_jitter, size)
        score = 1.0 if noise.score_sigma == 0 \
            else float(np.clip(1.0 - abs(rng.normal(0.0, noise.score_sigma)), 0.0, 1.0))
        feat = class_feature(e.class_id, noise.feature_dim)
        if noise.feature_noise > 0:
            feat = feat + rng.normal(0.0, noise.feature_noise, noise.feature_dim)
        dets.append(Detection(box, e.class_id, score, feat.astype(np.float32)))
    if noise.fp_rate > 0 and scene.entities:
        n_fp = int(rng.binomial(len(scene.entities), noise.fp_rate))
        for _ in range(n_fp):
            w = rng.uniform(0.08, 0.3) * size
            h = rng.uniform(0.08, 0.3) * size
            x1 = rng.uniform(0, size - w)
            y1 = rng.uniform(0, size - h)
            class_id = int(rng.integers(0, _n_classes_of(scene)))
            feat = class_feature(class_id, noise.feature_dim)
            if noise.feature_noise > 0:
                feat = feat + rng.normal(0.0, noise.feature_noise, noise.feature_dim)
            score = float(rng.uniform(*noise.fp_score))
            dets.append(Detection(BoxF(x1, y1, x1 + w, y1 + h), class_id,
                                  score, feat.astype(np.float32)))
    return dets


def _n_classes_of(scene: Scene) -> int:
    return max(e.class_id for e in scene.entities) + 1


# ---------------------------------------------------------------------------
# pseudo word vectors


def embedding_table(n_classes: int, dim: int,
                    similar_groups: tuple[tuple[int, ...], ...] = ()) -> np.ndarray:
    """Deterministic unit embeddings; declared-similar classes share a basis.

    Group directions are orthonormalized, per-class residuals are
    projected off that subspace, so same-group cosines land near 0.9 and
    cross-group cosines stay small.
    """
    if dim < 2:
        raise ArgumentError("embedding dim must be at least 2")
    group_of: dict[int, int] = {}
    for gid, members in enumerate(similar_groups):
        for c in members:
            group_of[c] = gid
    next_gid = len(similar_groups)
    for c in range(n_classes):
        if c not in group_of:
            group_of[c] = next_gid
            next_gid += 1
    n_groups = next_gid
    rng = np.random.default_rng(
        derive_seed("embedding-basis", n_classes, dim, str(similar_groups)))
    raw = rng.standard_normal((dim, n_groups))
    if n_groups <= dim:
        q, _ = np.linalg.qr(raw)
        basis = q[:, :n_groups].T
    else:  # more groups than dimensions: settle for normalized directions
        basis = (raw / np.linalg.norm(raw, axis=0, keepdims=True)).T

    alpha = 0.95
    beta = math.sqrt(1.0 - alpha * alpha)
    table = np.zeros((n_classes, dim), dtype=np.float32)
    for c in range(n_classes):
        u = np.random.default_rng(
            derive_seed("embedding-class", c, dim)).standard_normal(dim)
        if n_groups <= dim:
            u = u - basis.T @ (basis @ u)
        norm = np.linalg.norm(u)
        u = u / norm if norm > 1e-9 else u
        e = alpha * basis[group_of[c]] + beta * u
        table[c] = (e / np.linalg.norm(e)).astype(np.float32)
    return table


def pseudo_embedding(class_id: int, dim: int, n_classes: int = 0,
                     similar_groups: tuple[tuple[int, ...], ...] = ()) -> np.ndarray:
    """One class's embedding; same arguments always return the same vector."""
    n = max(n_classes, class_id + 1)
    return embedding_table(n, dim, similar_groups)[class_id]


# ---------------------------------------------------------------------------
# dataset files


def build_dataset(spec: SceneSpec, n_train: int, n_test: int, seed: int,
                  out_dir, noise: DetectorNoise = DetectorNoise(),
                  background_ratio: float | None = None,
                  embed_dim: int = 16,
                  similar_groups: tuple[tuple[int, ...], ...] = ()) -> dict:
    """Generate scenes, run the simulated detector, and write all files.

    Everything is validated before the first write, and all randomness
    derives from ``seed``, so the same call produces byte-identical files.
    ``background_ratio`` caps designated negative placements at
    ratio : 1 against designated positives across the training split.
    """
    validate_spec(spec)
    validate_noise(noise)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    neg_budget = None
    if background_ratio is not None:
        neg_budget = {"pos": 0, "neg": 0, "ratio": float(background_ratio)}

    def make_split(prefix: str, count: int, budget):
        scenes = []
        for i in range(count):
            rng = np.random.default_rng(derive_seed(seed, prefix, i))
            scene = generate_scene(rng, spec, f"{prefix}_{i:06d}", budget)
            det_rng = np.random.default_rng(derive_seed(seed, prefix + "-det", i))
            scene.detections = simulate_detector(scene, noise, det_rng)
            scenes.append(scene)
        return scenes

    train_scenes = make_split("train", n_train, neg_budget)
    test_scenes = make_split("test", n_test, None)

    counts = Counter(
        encode_triplet(g.predicate, g.object_class, spec.n_object_classes)
        for s in train_scenes for g in s.gt)

    datafiles.write_scenes(out / "train_scenes.jsonl", out / "train_images.npy",
                           train_scenes)
    datafiles.write_scenes(out / "test_scenes.jsonl", out / "test_images.npy",
                           test_scenes)
    datafiles.write_embeddings(
        out / "embeddings.json",
        embedding_table(spec.n_object_classes, embed_dim, similar_groups))
    datafiles.write_counts(out / "counts.json", dict(counts))

    meta = {
        "format_version": 1,
        "seed": seed,
        "n_train": n_train,
        "n_test": n_test,
        "embed_dim": embed_dim,
        "image_size": spec.image_size,
        "n_object_classes": spec.n_object_classes,
        "n_predicates": spec.n_predicates,
        "predicates": [
            {"name": p.name, "kind": p.kind,
             "allowed_classes": list(p.allowed_classes) if p.allowed_classes else None}
            for p in spec.predicates
        ],
        "humans_range": list(spec.humans_range),
        "objects_range": list(spec.objects_range),
        "negative_pair_rate": spec.negative_pair_rate,
        "accent_rate": spec.accent_rate,
        "far_threshold": spec.far_threshold,
        "rare_multipliers": [list(t) for t in spec.rare_multipliers],
        "noise": asdict(noise),
        "background_ratio": background_ratio,
        "similar_groups": [list(g) for g in similar_groups],
    }
    meta["spec_hash"] = config_hash(meta)
    datafiles.write_json(out / "meta.json", meta)
    return meta


# ---------------------------------------------------------------------------
# standard benchmark specs


def layout_benchmark_spec(image_size: int = 64) -> SceneSpec:
    """Fully layout-separable: six rules, one human, two objects per scene."""
    allowed = (1, 2, 3)
    preds = tuple(PredicateDef(rule, rule, allowed) for rule in LAYOUT_RULES)
    return SceneSpec(image_size=image_size, n_object_classes=4, predicates=preds,
                     humans_range=(1, 1), objects_range=(2, 2))


def ablation_benchmark_spec(image_size: int = 64) -> SceneSpec:
    """Five layout rules plus the appearance predicate, with negatives."""
    allowed = (1, 2, 3)
    rules = ("above", "below", "beside", "overlapping", "containing")
    preds = tuple(PredicateDef(rule, rule, allowed) for rule in rules)
    preds += (PredicateDef("marked", "appearance", allowed),)
    return SceneSpec(image_size=image_size, n_object_classes=4, predicates=preds,
                     humans_range=(1, 2), objects_range=(2, 3),
                     negative_pair_rate=0.15, accent_rate=0.45)


BENCHMARKS = {
    "layout": layout_benchmark_spec,
    "ablation": ablation_benchmark_spec,
}
