import hashlib
import json

import numpy as np
import pytest

from hoiprime.datafiles import read_counts, read_embeddings, read_scenes
from hoiprime.errors import ArgumentError
from hoiprime.evaluation import encode_triplet
from hoiprime.geometry import BoxF, iou
from hoiprime.scenes import (
    DetectorNoise,
    PredicateDef,
    SceneSpec,
    ablation_benchmark_spec,
    build_dataset,
    class_feature,
    embedding_table,
    generate_scene,
    layout_benchmark_spec,
    layout_relation,
    pseudo_embedding,
    simulate_detector,
    validate_spec,
)


def file_hash(path):
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


class TestLayoutRelation:
    def test_partition_is_total_and_single_valued(self):
        rng = np.random.default_rng(70)
        for _ in range(500):
            x1, y1 = rng.uniform(0, 50, 2)
            h = BoxF(x1, y1, x1 + rng.uniform(5, 30), y1 + rng.uniform(5, 30))
            x1, y1 = rng.uniform(0, 50, 2)
            o = BoxF(x1, y1, x1 + rng.uniform(5, 30), y1 + rng.uniform(5, 30))
            rel = layout_relation(h, o, 18.0)
            assert rel in ("above", "below", "beside", "overlapping",
                           "containing", "far_from")

    def test_named_regions(self):
        h = BoxF(20, 20, 40, 40)
        assert layout_relation(h, BoxF(25, 25, 35, 35), 18) == "containing"
        assert layout_relation(h, BoxF(35, 35, 55, 55), 18) == "overlapping"
        assert layout_relation(h, BoxF(25, 45, 35, 55), 18) == "above"
        assert layout_relation(h, BoxF(25, 5, 35, 15), 18) == "below"
        assert layout_relation(h, BoxF(45, 25, 55, 35), 18) == "beside"
        assert layout_relation(h, BoxF(70, 70, 90, 90), 18) == "far_from"


class TestGenerateScene:
    def test_generated_pairs_recheck_against_their_rule(self):
        spec = layout_benchmark_spec()
        far_px = spec.far_threshold * spec.image_size
        rule_names = {i: p.kind for i, p in enumerate(spec.predicates)}
        for seed in range(30):
            scene = generate_scene(np.random.default_rng(seed), spec, f"s{seed}")
            assert len(scene.gt) >= 1
            for g in scene.gt:
                assert layout_relation(g.human_box, g.object_box, far_px) \
                    == rule_names[g.predicate]

    def test_zero_negative_rate_labels_every_pair(self):
        spec = layout_benchmark_spec()  # rules cover all of geometry space
        for seed in range(20):
            scene = generate_scene(np.random.default_rng(seed), spec, "s")
            humans = [e for e in scene.entities if e.class_id == 0]
            others = [e for e in scene.entities if e.class_id != 0]
            labeled = {(id(h), id(o)) for h in humans for o in others}
            got = set()
            for g in scene.gt:
                got.add((tuple(g.human_box.as_list()), tuple(g.object_box.as_list())))
            assert len(got) == len(labeled)

    def test_fixed_seed_bit_identical(self):
        spec = ablation_benchmark_spec()
        a = generate_scene(np.random.default_rng(99), spec, "s")
        b = generate_scene(np.random.default_rng(99), spec, "s")
        assert np.array_equal(a.image, b.image)
        assert [g.predicate for g in a.gt] == [g.predicate for g in b.gt]

    def test_entities_stay_inside_the_image(self):
        spec = ablation_benchmark_spec()
        for seed in range(20):
            scene = generate_scene(np.random.default_rng(seed), spec, "s")
            for e in scene.entities:
                assert 0 <= e.box.x1 < e.box.x2 <= spec.image_size + 1e-6
                assert 0 <= e.box.y1 < e.box.y2 <= spec.image_size + 1e-6

    def test_appearance_predicate_fires_only_on_accent(self):
        spec = ablation_benchmark_spec()
        marked = spec.n_predicates - 1
        accents = 0
        for seed in range(40):
            scene = generate_scene(np.random.default_rng(seed), spec, "s")
            by_box = {}
            for g in scene.gt:
                by_box.setdefault(tuple(g.object_box.as_list()), set()).add(g.predicate)
            for e in scene.entities:
                if e.class_id == 0:
                    continue
                preds = by_box.get(tuple(e.box.as_list()), set())
                if e.accent:
                    accents += 1
                    assert marked in preds
                else:
                    assert marked not in preds
        assert accents > 10

    def test_invalid_spec_rejected(self):
        with pytest.raises(ArgumentError):
            validate_spec(SceneSpec(predicates=()))
        with pytest.raises(ArgumentError):
            validate_spec(SceneSpec(
                predicates=(PredicateDef("far", "far_from"),),
                negative_pair_rate=0.5))


class TestSimulateDetector:
    def test_zero_noise_is_identity_with_unit_scores(self):
        scene = generate_scene(np.random.default_rng(1), layout_benchmark_spec(), "s")
        dets = simulate_detector(scene, DetectorNoise(), np.random.default_rng(0))
        assert len(dets) == len(scene.entities)
        for d, e in zip(dets, scene.entities):
            assert d.box == e.box
            assert d.score == 1.0
            assert d.class_id == e.class_id

    def test_jitter_keeps_boxes_close(self):
        # Monte-Carlo over the jitter model at sigma 0.05
        rng = np.random.default_rng(2)
        from hoiprime.scenes import _jitter_box
        base = BoxF(10, 10, 30, 34)
        ious = [iou(base, _jitter_box(rng, base, 0.05, 64)) for _ in range(1000)]
        assert np.mean(ious) > 0.8

    def test_full_miss_rate_empties_output(self):
        scene = generate_scene(np.random.default_rng(3), layout_benchmark_spec(), "s")
        dets = simulate_detector(scene, DetectorNoise(miss_rate=1.0),
                                 np.random.default_rng(0))
        assert dets == []

    def test_false_positives_added(self):
        scene = generate_scene(np.random.default_rng(4), layout_benchmark_spec(), "s")
        dets = simulate_detector(scene, DetectorNoise(fp_rate=1.0),
                                 np.random.default_rng(0))
        assert len(dets) == 2 * len(scene.entities)

    def test_features_are_class_conditioned(self):
        scene = generate_scene(np.random.default_rng(5), layout_benchmark_spec(), "s")
        dets = simulate_detector(scene, DetectorNoise(feature_dim=16),
                                 np.random.default_rng(0))
        for d in dets:
            assert np.array_equal(d.feature, class_feature(d.class_id, 16))


class TestPseudoEmbedding:
    def test_deterministic(self):
        a = pseudo_embedding(3, 16, n_classes=6)
        b = pseudo_embedding(3, 16, n_classes=6)
        assert np.array_equal(a, b)

    def test_unit_norm(self):
        table = embedding_table(8, 16)
        assert np.allclose(np.linalg.norm(table, axis=1), 1.0, atol=1e-6)

    def test_similarity_structure(self):
        groups = ((1, 2), (3, 4))
        table = embedding_table(6, 16, groups)
        cos = table @ table.T
        assert cos[1, 2] > 0.8
        assert cos[3, 4] > 0.8
        for a, b in ((1, 3), (1, 4), (2, 3), (0, 5), (0, 1)):
            assert abs(cos[a, b]) < 0.3


class TestBuildDataset:
    def test_deterministic_file_hashes(self, tmp_path):
        spec = layout_benchmark_spec()
        for sub in ("a", "b"):
            build_dataset(spec, n_train=6, n_test=3, seed=5,
                          out_dir=tmp_path / sub, embed_dim=8)
        for name in ("train_scenes.jsonl", "train_images.npy", "test_scenes.jsonl",
                     "counts.json", "embeddings.json", "meta.json"):
            assert file_hash(tmp_path / "a" / name) == file_hash(tmp_path / "b" / name)

    def test_rare_multipliers_starve_marked_triplets(self, tmp_path):
        spec = layout_benchmark_spec()
        rare = ((0, 1, 0.02), (1, 2, 0.02), (2, 3, 0.02))
        spec = SceneSpec(**{**spec.__dict__, "rare_multipliers": rare})
        build_dataset(spec, n_train=250, n_test=1, seed=6, out_dir=tmp_path,
                      embed_dim=8)
        counts = read_counts(tmp_path / "counts.json")
        for pred, cls, _ in rare:
            tid = encode_triplet(pred, cls, spec.n_object_classes)
            assert counts.get(tid, 0) < 10

    def test_background_ratio_caps_negative_pairs(self, tmp_path):
        spec = ablation_benchmark_spec()
        spec = SceneSpec(**{**spec.__dict__, "humans_range": (1, 1),
                            "objects_range": (2, 3),
                            "negative_pair_rate": 0.9})
        build_dataset(spec, n_train=120, n_test=1, seed=7, out_dir=tmp_path,
                      embed_dim=8, background_ratio=3.0)
        scenes = read_scenes(tmp_path / "train_scenes.jsonl")
        positives = negatives = 0
        for s in scenes:
            labeled = {(tuple(g.human_box.as_list()), tuple(g.object_box.as_list()))
                       for g in s.gt}
            humans = [e for e in s.entities if e.class_id == 0]
            for h in humans:
                for e in s.entities:
                    if e is h:
                        continue
                    key = (tuple(h.box.as_list()), tuple(e.box.as_list()))
                    if key in labeled:
                        positives += 1
                    else:
                        negatives += 1
        assert negatives <= 3 * positives

    def test_counts_match_scene_files(self, tmp_path):
        spec = layout_benchmark_spec()
        build_dataset(spec, n_train=10, n_test=2, seed=8, out_dir=tmp_path,
                      embed_dim=8)
        scenes = read_scenes(tmp_path / "train_scenes.jsonl")
        recount = {}
        for s in scenes:
            for g in s.gt:
                tid = encode_triplet(g.predicate, g.object_class, 4)
                recount[tid] = recount.get(tid, 0) + 1
        assert recount == read_counts(tmp_path / "counts.json")

    def test_round_trip_preserves_scene_content(self, tmp_path):
        spec = ablation_benchmark_spec()
        build_dataset(spec, n_train=4, n_test=2, seed=9, out_dir=tmp_path,
                      embed_dim=8, noise=DetectorNoise(box_jitter=0.03,
                                                       score_sigma=0.02,
                                                       fp_rate=0.2))
        scenes = read_scenes(tmp_path / "train_scenes.jsonl",
                             tmp_path / "train_images.npy")
        assert len(scenes) == 4
        for s in scenes:
            assert s.image.shape == (3, spec.image_size, spec.image_size)
            assert s.image.dtype == np.float32
            for d in s.detections:
                assert 0.0 <= d.score <= 1.0
                assert d.feature.shape == (32,)
        emb = read_embeddings(tmp_path / "embeddings.json")
        assert emb.shape == (4, 8)

    def test_validation_happens_before_any_write(self, tmp_path):
        bad = SceneSpec(predicates=())
        target = tmp_path / "nothing"
        with pytest.raises(ArgumentError):
            build_dataset(bad, 2, 1, 0, target)
        assert not target.exists()
