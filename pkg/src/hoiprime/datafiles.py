"""Scene, detection, and report interchange files.

Scenes travel as line-delimited JSON, one object per scene, with boxes
as [x1, y1, x2, y2] lists. Images live in a sibling ``.npy`` stack
(uint8, [n, 3, H, W]) referenced by row index, which keeps the JSONL
readable and the bytes deterministic. Detections for evaluation and the
counts/embeddings/split files are plain JSON.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import BoxF, Detection


@dataclass(frozen=True)
class Entity:
    """A placed scene member; the detector's targets."""

    box: BoxF
    class_id: int
    accent: bool = False


@dataclass(frozen=True)
class GtTriplet:
    human_box: BoxF
    object_box: BoxF
    object_class: int
    predicate: int


@dataclass
class Scene:
    scene_id: str
    image: np.ndarray | None  # [3, H, W] float32 in [0, 1]
    entities: list[Entity] = field(default_factory=list)
    gt: list[GtTriplet] = field(default_factory=list)
    detections: list[Detection] = field(default_factory=list)


def _scene_record(scene: Scene, image_index: int) -> dict:
    return {
        "scene_id": scene.scene_id,
        "image_index": image_index,
        "entities": [
            {"box": e.box.as_list(), "class_id": e.class_id, "accent": e.accent}
            for e in scene.entities
        ],
        "detections": [
            {
                "box": d.box.as_list(),
                "class_id": d.class_id,
                "score": d.score,
                "feature": [float(v) for v in d.feature],
            }
            for d in scene.detections
        ],
        "gt": [
            {
                "human_box": g.human_box.as_list(),
                "object_box": g.object_box.as_list(),
                "object_class": g.object_class,
                "predicate": g.predicate,
            }
            for g in scene.gt
        ],
    }


def write_scenes(jsonl_path, images_path, scenes: list[Scene]) -> None:
    images = np.stack(
        [np.clip(s.image * 255.0, 0, 255).astype(np.uint8) for s in scenes]
    )
    np.save(images_path, images)
    with open(jsonl_path, "w", encoding="utf-8") as fh:
        for i, scene in enumerate(scenes):
            fh.write(json.dumps(_scene_record(scene, i), sort_keys=True,
                                separators=(",", ":")))
            fh.write("\n")


def read_scenes(jsonl_path, images_path=None) -> list[Scene]:
    images = np.load(images_path) if images_path is not None else None
    scenes: list[Scene] = []
    with open(jsonl_path, "r", encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            image = None
            if images is not None:
                image = images[rec["image_index"]].astype(np.float32) / 255.0
            scenes.append(Scene(
                scene_id=rec["scene_id"],
                image=image,
                entities=[
                    Entity(BoxF.from_list(e["box"]), int(e["class_id"]),
                           bool(e.get("accent", False)))
                    for e in rec.get("entities", [])
                ],
                gt=[
                    GtTriplet(BoxF.from_list(g["human_box"]),
                              BoxF.from_list(g["object_box"]),
                              int(g["object_class"]), int(g["predicate"]))
                    for g in rec.get("gt", [])
                ],
                detections=[
                    Detection(BoxF.from_list(d["box"]), int(d["class_id"]),
                              float(d["score"]),
                              np.asarray(d.get("feature", []), dtype=np.float32))
                    for d in rec.get("detections", [])
                ],
            ))
    return scenes


def write_json(path, payload: dict) -> None:
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=1) + "\n", encoding="utf-8")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_embeddings(path, table: np.ndarray) -> None:
    write_json(path, {
        "dim": int(table.shape[1]),
        "vectors": {str(i): [float(v) for v in row] for i, row in enumerate(table)},
    })


def read_embeddings(path) -> np.ndarray:
    payload = read_json(path)
    n = len(payload["vectors"])
    table = np.zeros((n, payload["dim"]), dtype=np.float32)
    for key, row in payload["vectors"].items():
        table[int(key)] = row
    return table


def write_counts(path, counts: dict[int, int]) -> None:
    write_json(path, {"triplet_counts": {str(k): int(v) for k, v in counts.items()}})


def read_counts(path) -> dict[int, int]:
    payload = read_json(path)
    return {int(k): int(v) for k, v in payload["triplet_counts"].items()}


def write_triplet_detections(path, dets) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in dets:
            fh.write(json.dumps({
                "scene_id": d.scene_id,
                "human_box": d.human_box.as_list(),
                "object_box": d.object_box.as_list(),
                "triplet_id": d.triplet_id,
                "score": d.score,
            }, sort_keys=True, separators=(",", ":")))
            fh.write("\n")


def read_triplet_detections(path):
    from .evaluation import TripletDetection

    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            out.append(TripletDetection(
                scene_id=rec["scene_id"],
                human_box=BoxF.from_list(rec["human_box"]),
                object_box=BoxF.from_list(rec["object_box"]),
                triplet_id=int(rec["triplet_id"]),
                score=float(rec["score"]),
            ))
    return out
