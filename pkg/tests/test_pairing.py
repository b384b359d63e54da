import numpy as np
import pytest

from hoiprime.datafiles import GtTriplet, Scene
from hoiprime.geometry import BoxF, Detection
from hoiprime.pairing import label_pair, make_test_pairs, make_training_pairs

R = 32
P = 4
EMB = np.eye(4, 6, dtype=np.float32)  # 4 classes, 6-dim embeddings


def det(x1, y1, x2, y2, class_id=1, score=0.95):
    return Detection(BoxF(x1, y1, x2, y2), class_id, score, np.zeros(3, np.float32))


def scene_with(gt, size=64):
    return Scene("s0", np.zeros((3, size, size), dtype=np.float32), gt=gt)


def simple_scene():
    human = BoxF(5, 5, 25, 45)
    obj = BoxF(30, 20, 50, 40)
    return scene_with([GtTriplet(human, obj, 1, 2)]), human, obj


class TestTrainingPairs:
    def test_low_confidence_excluded(self):
        scene, human, obj = simple_scene()
        dets = [det(*human.as_list(), class_id=0, score=0.74),
                det(*obj.as_list(), class_id=1, score=0.95)]
        assert make_training_pairs(dets, scene, EMB, R, P) == []

    def test_low_gt_overlap_excluded(self):
        scene, human, obj = simple_scene()
        # a confident human detection nowhere near any ground-truth box
        dets = [det(5, 45, 25, 64, class_id=0, score=0.9),
                det(*obj.as_list(), class_id=1, score=0.95)]
        assert make_training_pairs(dets, scene, EMB, R, P) == []

    def test_cartesian_product_count(self):
        scene, human, obj = simple_scene()
        scene.gt.append(GtTriplet(BoxF(5, 45, 25, 60), obj, 1, 0))
        dets = [det(*human.as_list(), class_id=0),
                det(5, 45, 25, 60, class_id=0),
                det(*obj.as_list(), class_id=1),
                det(30.5, 20.5, 50, 40, class_id=2),
                det(29, 19, 49.5, 39.5, class_id=3)]
        pairs = make_training_pairs(dets, scene, EMB, R, P)
        # 2 humans x 4 partners each (humans pair with other humans too)
        assert len(pairs) == 8

    def test_thresholds_strict(self):
        scene, human, obj = simple_scene()
        dets = [det(*human.as_list(), class_id=0, score=0.75),
                det(*obj.as_list(), class_id=1, score=0.76)]
        assert make_training_pairs(dets, scene, EMB, R, P) == []

    def test_pair_contents(self):
        scene, human, obj = simple_scene()
        dets = [det(*human.as_list(), class_id=0),
                det(*obj.as_list(), class_id=1)]
        (pair,) = make_training_pairs(dets, scene, EMB, R, P)
        assert pair.object.class_id == 1
        assert pair.ip.shape == (2, R, R)
        assert pair.union_crop.shape == (3, R, R)
        assert np.array_equal(pair.w_o, EMB[1])
        assert pair.target.tolist() == [0.0, 0.0, 1.0, 0.0]
        assert pair.union.x1 <= min(human.x1, obj.x1)


class TestTestPairs:
    def test_score_below_point_nine_excluded(self):
        _, human, obj = simple_scene()
        dets = [det(*human.as_list(), class_id=0, score=0.89),
                det(*obj.as_list(), class_id=1, score=0.95)]
        image = np.zeros((3, 64, 64), dtype=np.float32)
        assert make_test_pairs(dets, image, EMB, R) == []

    def test_no_humans_gives_empty(self):
        _, _, obj = simple_scene()
        dets = [det(*obj.as_list(), class_id=1, score=0.95)]
        image = np.zeros((3, 64, 64), dtype=np.float32)
        assert make_test_pairs(dets, image, EMB, R) == []

    def test_single_pair(self):
        _, human, obj = simple_scene()
        dets = [det(*human.as_list(), class_id=0, score=0.95),
                det(*obj.as_list(), class_id=1, score=0.93)]
        image = np.zeros((3, 64, 64), dtype=np.float32)
        pairs = make_test_pairs(dets, image, EMB, R)
        assert len(pairs) == 1
        assert pairs[0].target is None


class TestLabelPair:
    def test_exact_match_sets_only_that_predicate(self):
        scene, human, obj = simple_scene()
        target = label_pair(human, obj, 1, scene.gt, P)
        assert target.tolist() == [0.0, 0.0, 1.0, 0.0]

    def test_no_overlap_gives_zero_vector(self):
        scene, human, obj = simple_scene()
        target = label_pair(BoxF(50, 50, 60, 60), BoxF(0, 50, 10, 60), 1,
                            scene.gt, P)
        assert target.tolist() == [0.0] * P

    def test_two_triplets_sharing_boxes_set_both(self):
        human = BoxF(0, 0, 10, 10)
        obj = BoxF(12, 0, 20, 10)
        gt = [GtTriplet(human, obj, 2, 1), GtTriplet(human, obj, 2, 3)]
        target = label_pair(human, obj, 2, gt, P)
        assert target.tolist() == [0.0, 1.0, 0.0, 1.0]

    def test_wrong_object_class_does_not_match(self):
        scene, human, obj = simple_scene()
        target = label_pair(human, obj, 3, scene.gt, P)
        assert target.tolist() == [0.0] * P

    def test_filters_survive_refilter_property(self):
        rng = np.random.default_rng(31)
        scene, human, obj = simple_scene()
        dets = [det(*human.as_list(), class_id=0)]
        for _ in range(6):
            jit = rng.uniform(-1.5, 1.5, 4)
            box = BoxF(obj.x1 + jit[0], obj.y1 + jit[1],
                       obj.x2 + jit[2], obj.y2 + jit[3])
            dets.append(Detection(box, 1, float(rng.uniform(0.5, 1.0)),
                                  np.zeros(3, np.float32)))
        pairs = make_training_pairs(dets, scene, EMB, R, P)
        gt_boxes = [g.human_box for g in scene.gt] + [g.object_box for g in scene.gt]
        from hoiprime.geometry import iou
        for pair in pairs:
            for d in (pair.human, pair.object):
                assert d.score > 0.75
                assert max(iou(d.box, b) for b in gt_boxes) > 0.7
