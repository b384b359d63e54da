import numpy as np
import pytest

from hoiprime.checkpoint import load_checkpoint, save_checkpoint
from hoiprime.datafiles import GtTriplet
from hoiprime.errors import ArgumentError, CheckpointError, TrainingDivergedError
from hoiprime.geometry import BoxF, Detection
from hoiprime.model import ModelConfig, build_model, variant_by_name
from hoiprime.pairing import HoiPair
from hoiprime.tensor import Tensor
from hoiprime.training import (
    TrainConfig,
    class_weights,
    joint_loss,
    train,
    write_history_csv,
)

TINY = ModelConfig(n_predicates=4, n_objects=3, resolution=32, width_scale=1 / 16,
                   embed_dim=8, det_feat_dim=8)


def synthetic_pairs(rng, n, config=TINY):
    """Learnable toy pairs: the target predicate is readable off the pattern."""
    r = config.resolution
    pairs = []
    for i in range(n):
        pred = int(rng.integers(config.n_predicates))
        ip = np.zeros((2, r, r), dtype=np.float32)
        ip[0, : r // 2] = 1.0
        band = r // config.n_predicates
        ip[1, :, pred * band:(pred + 1) * band] = 1.0
        crop = rng.random((3, r, r)).astype(np.float32)
        target = np.zeros(config.n_predicates, dtype=np.float32)
        target[pred] = 1.0
        human = Detection(BoxF(0, 0, 10, 10), 0, 1.0,
                          rng.random(config.det_feat_dim).astype(np.float32))
        obj = Detection(BoxF(5, 5, 15, 15), 1, 1.0,
                        rng.random(config.det_feat_dim).astype(np.float32))
        pairs.append(HoiPair(human, obj, BoxF(0, 0, 15, 15), ip, crop,
                             rng.random(config.embed_dim).astype(np.float32),
                             target))
    return pairs


class TestClassWeights:
    def test_inverse_then_mean_normalized(self):
        assert np.allclose(class_weights([10, 40]), [1.6, 0.4])

    def test_uniform_counts_give_unit_weights(self):
        assert np.allclose(class_weights([7, 7, 7]), [1.0, 1.0, 1.0])

    def test_zero_count_uses_floor_of_one(self):
        w = class_weights([0, 10])
        # floor count 1 vs 10: inverse weights 1 and 0.1, mean-normalized
        assert np.allclose(w, [1 / 0.55, 0.1 / 0.55])
        assert w[0] == max(w)

    def test_all_zero_counts_rejected(self):
        with pytest.raises(ArgumentError):
            class_weights([0, 0])


class TestJointLoss:
    def test_unprimed_total_is_visual_loss(self):
        p2 = Tensor(np.zeros((2, 4)))
        report = joint_loss(None, p2, np.zeros((2, 4)), np.ones(4),
                            variant_by_name("np"))
        assert report.j1 is None
        assert report.total_value == report.j2_value

    def test_saturated_correct_prediction_is_tiny(self):
        logits = Tensor(np.full((1, 4), 30.0))
        report = joint_loss(logits, logits, np.ones((1, 4)), np.ones(4),
                            variant_by_name("standard"))
        assert report.total_value < 1e-6

    def test_zero_logits_closed_form(self):
        p = 4
        logits = Tensor(np.zeros((3, p)))
        report = joint_loss(logits, logits, np.zeros((3, p)), np.ones(p),
                            variant_by_name("standard"))
        assert report.total_value == pytest.approx(2 * p * np.log(2), rel=1e-6)

    def test_total_is_exact_sum(self):
        rng = np.random.default_rng(60)
        a = Tensor(rng.standard_normal((2, 4)))
        b = Tensor(rng.standard_normal((2, 4)))
        t = (rng.random((2, 4)) < 0.5).astype(np.float32)
        report = joint_loss(a, b, t, np.ones(4), variant_by_name("standard"))
        assert report.total_value == pytest.approx(
            report.j1_value + report.j2_value, abs=1e-7)


class TestSchedule:
    def test_default_shape_tenfold_every_three_epochs(self):
        tc = TrainConfig(lr0=0.1)
        lrs = [tc.lr_at(e) for e in range(10)]
        assert lrs == pytest.approx(
            [0.1] * 3 + [0.01] * 3 + [0.001] * 3 + [0.0001])


class TestTrainLoop:
    def test_overfits_small_set(self):
        rng = np.random.default_rng(61)
        pairs = synthetic_pairs(rng, 16)
        model = build_model(TINY, "standard", seed=7)
        tc = TrainConfig(epochs=10, lr0=0.05, decay_every=8, batch_size=8, seed=3)
        history = train(pairs, model, tc)
        assert history[-1].total < history[0].total
        assert all(np.isfinite(h.total) for h in history)
        for h in history:
            assert h.total == pytest.approx(h.j1 + h.j2, abs=1e-6)

    def test_identical_seed_reproduces_history(self):
        rng = np.random.default_rng(62)
        pairs = synthetic_pairs(rng, 12)
        tc = TrainConfig(epochs=2, lr0=0.02, batch_size=6, seed=5)
        h1 = train(pairs, build_model(TINY, "nl", seed=8), tc)
        h2 = train(pairs, build_model(TINY, "nl", seed=8), tc)
        assert [(a.j1, a.j2, a.total) for a in h1] \
            == [(b.j1, b.j2, b.total) for b in h2]

    def test_empty_dataset_rejected(self):
        with pytest.raises(ArgumentError):
            train([], build_model(TINY, "standard"), TrainConfig(epochs=1))

    def test_divergence_reports_location(self):
        rng = np.random.default_rng(63)
        pairs = synthetic_pairs(rng, 8)
        model = build_model(TINY, "standard", seed=9)
        model.visual.head.proj.weights.data[...] = np.nan
        with pytest.raises(TrainingDivergedError) as exc:
            train(pairs, model, TrainConfig(epochs=1, batch_size=8))
        assert exc.value.epoch == 0 and exc.value.batch == 0

    def test_horizontal_flip_changes_history_not_determinism(self):
        rng = np.random.default_rng(64)
        pairs = synthetic_pairs(rng, 12)
        tc = TrainConfig(epochs=1, lr0=0.01, batch_size=6, seed=4,
                         horizontal_flip=True)
        h1 = train(pairs, build_model(TINY, "nl", seed=2), tc)
        h2 = train(pairs, build_model(TINY, "nl", seed=2), tc)
        assert h1[0].total == h2[0].total


class TestCheckpoint:
    def test_round_trip_bit_exact(self, tmp_path):
        model = build_model(TINY, "standard", seed=12)
        path = tmp_path / "m.ckpt"
        digest = "ab" * 32
        save_checkpoint(path, model.named_state(), digest)
        state, loaded_digest = load_checkpoint(path)
        assert loaded_digest == digest
        for name, tensor in model.named_state().items():
            assert np.array_equal(state[name], tensor.data)

    def test_save_load_forward_identical(self, tmp_path):
        rng = np.random.default_rng(65)
        pairs = synthetic_pairs(rng, 8)
        model = build_model(TINY, "standard", seed=13)
        train(pairs, model, TrainConfig(epochs=1, lr0=0.02, batch_size=8))
        r = TINY.resolution
        inputs = (rng.random((2, 2, r, r)).astype(np.float32),
                  rng.random((2, 3, r, r)).astype(np.float32),
                  rng.random((2, 8)).astype(np.float32),
                  rng.random((2, 8)).astype(np.float32),
                  rng.random((2, 8)).astype(np.float32))
        _, before = model.forward_pairs(*inputs, mode="eval")
        path = tmp_path / "m.ckpt"
        save_checkpoint(path, model.named_state(), "00" * 32)
        fresh = build_model(TINY, "standard", seed=99)
        state, _ = load_checkpoint(path)
        fresh.load_state(state)
        _, after = fresh.forward_pairs(*inputs, mode="eval")
        assert np.array_equal(before.data, after.data)

    def test_save_is_byte_deterministic(self, tmp_path):
        model = build_model(TINY, "nl", seed=14)
        a, b = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
        save_checkpoint(a, model.named_state(), "11" * 32)
        save_checkpoint(b, model.named_state(), "11" * 32)
        assert a.read_bytes() == b.read_bytes()

    def test_truncated_file_rejected(self, tmp_path):
        model = build_model(TINY, "nl", seed=15)
        path = tmp_path / "m.ckpt"
        save_checkpoint(path, model.named_state(), "22" * 32)
        path.write_bytes(path.read_bytes()[:100])
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_state_mismatch_rejected(self, tmp_path):
        model = build_model(TINY, "nl", seed=16)
        path = tmp_path / "m.ckpt"
        save_checkpoint(path, model.named_state(), "33" * 32)
        other = build_model(TINY, "standard", seed=16)
        state, _ = load_checkpoint(path)
        with pytest.raises(CheckpointError):
            other.load_state(state)

    def test_history_csv(self, tmp_path):
        rng = np.random.default_rng(66)
        pairs = synthetic_pairs(rng, 8)
        model = build_model(TINY, "np", seed=17)
        history = train(pairs, model, TrainConfig(epochs=2, batch_size=8))
        path = tmp_path / "loss.csv"
        write_history_csv(path, history)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "epoch,j1,j2,total,lr"
        assert len(lines) == 3
