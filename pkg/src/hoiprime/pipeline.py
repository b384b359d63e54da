"""End-to-end glue: dataset files -> pairs -> model -> scored triplets.

This is the layer the CLI and the acceptance suite drive; everything in
it is deterministic given the dataset files, the model seed, and the
training seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import datafiles
from .datafiles import Scene
from .errors import ArgumentError
from .evaluation import (
    EvalReport,
    GtInstance,
    TripletDetection,
    aggregate,
    aggregate_zero_shot,
    encode_triplet,
    evaluate_detections,
)
from .model import Model, ModelConfig, build_model, compose_triplets
from .pairing import HoiPair, make_test_pairs, make_training_pairs
from .training import TrainConfig, batch_arrays, train


@dataclass
class Dataset:
    train_scenes: list[Scene]
    test_scenes: list[Scene]
    embeddings: np.ndarray
    counts: dict[int, int]
    meta: dict


def load_dataset(directory) -> Dataset:
    d = Path(directory)
    if not (d / "meta.json").exists():
        raise ArgumentError(f"no dataset at {d} (meta.json missing)")
    return Dataset(
        train_scenes=datafiles.read_scenes(d / "train_scenes.jsonl",
                                           d / "train_images.npy"),
        test_scenes=datafiles.read_scenes(d / "test_scenes.jsonl",
                                          d / "test_images.npy"),
        embeddings=datafiles.read_embeddings(d / "embeddings.json"),
        counts=datafiles.read_counts(d / "counts.json"),
        meta=datafiles.read_json(d / "meta.json"),
    )


def model_config_from_meta(meta: dict, resolution: int = 64,
                           width_scale: float = 0.125,
                           det_feat_dim: int | None = None,
                           visual_stages: int = 3) -> ModelConfig:
    return ModelConfig(
        n_predicates=int(meta["n_predicates"]),
        n_objects=int(meta["n_object_classes"]),
        resolution=resolution,
        width_scale=width_scale,
        embed_dim=int(meta["embed_dim"]),
        det_feat_dim=det_feat_dim if det_feat_dim is not None
        else int(meta["noise"]["feature_dim"]),
        visual_stages=visual_stages,
    )


def materialize_training_pairs(dataset: Dataset, config: ModelConfig,
                               max_pairs: int | None = None) -> list[HoiPair]:
    pairs: list[HoiPair] = []
    for scene in dataset.train_scenes:
        pairs += make_training_pairs(scene.detections, scene, dataset.embeddings,
                                     config.resolution, config.n_predicates)
        if max_pairs is not None and len(pairs) >= max_pairs:
            return pairs[:max_pairs]
    return pairs


def run_detection(model: Model, scenes: list[Scene], embeddings: np.ndarray,
                  score_source: str = "final",
                  batch_size: int = 64) -> list[TripletDetection]:
    """Score every test pair and compose per-predicate triplet detections.

    ``score_source`` picks the head to read: "final" for the visual
    branch output, "prior" for the layout branch alone.
    """
    if score_source not in ("final", "prior"):
        raise ArgumentError(f"score_source must be final or prior, got {score_source}")
    config = model.config
    out: list[TripletDetection] = []
    for scene in scenes:
        pairs = make_test_pairs(scene.detections, scene.image, embeddings,
                                config.resolution)
        for start in range(0, len(pairs), batch_size):
            chunk = pairs[start:start + batch_size]
            batch = batch_arrays_for(chunk, config)
            p1, p2 = model.forward_pairs(batch["ip"], batch["crop"], batch["wo"],
                                         batch["fh"], batch["fo"], mode="eval")
            logits = p1 if score_source == "prior" else p2
            if logits is None:
                raise ArgumentError("prior scores requested from an unprimed variant")
            values = logits.data
            for row, pair in enumerate(chunk):
                for tid, score in compose_triplets(values[row],
                                                   pair.object.class_id,
                                                   pair.human.score,
                                                   pair.object.score,
                                                   config.n_objects):
                    out.append(TripletDetection(scene.scene_id, pair.human.box,
                                                pair.object.box, tid, score))
    return out


def batch_arrays_for(pairs: list[HoiPair], config: ModelConfig) -> dict[str, np.ndarray]:
    return batch_arrays(pairs, range(len(pairs)), config.np_dtype())


def gt_instances(scenes: list[Scene], n_objects: int) -> list[GtInstance]:
    return [
        GtInstance(s.scene_id, g.human_box, g.object_box,
                   encode_triplet(g.predicate, g.object_class, n_objects))
        for s in scenes for g in s.gt
    ]


def evaluate_model(model: Model, dataset: Dataset,
                   score_source: str = "final",
                   unseen: set[int] | None = None) -> EvalReport:
    dets = run_detection(model, dataset.test_scenes, dataset.embeddings,
                         score_source)
    gts = gt_instances(dataset.test_scenes, model.config.n_objects)
    per_class, gt_counts = evaluate_detections(dets, gts)
    if unseen is not None:
        return aggregate_zero_shot(per_class, gt_counts, unseen)
    return aggregate(per_class, gt_counts, dataset.counts)


def train_and_evaluate(dataset: Dataset, config: ModelConfig, variant_name: str,
                       tc: TrainConfig, model_seed: int = 0,
                       score_source: str = "final",
                       train_pairs: list[HoiPair] | None = None,
                       unseen: set[int] | None = None):
    """Fresh model, full training run, evaluation; the ablation workhorse."""
    model = build_model(config, variant_name, seed=model_seed)
    pairs = train_pairs if train_pairs is not None \
        else materialize_training_pairs(dataset, config)
    history = train(pairs, model, tc)
    report = evaluate_model(model, dataset, score_source, unseen)
    return model, history, report
