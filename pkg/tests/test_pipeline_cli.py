import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from hoiprime.cli import main
from hoiprime.model import ModelConfig
from hoiprime.pipeline import (
    evaluate_model,
    load_dataset,
    materialize_training_pairs,
    model_config_from_meta,
    run_detection,
    train_and_evaluate,
)
from hoiprime.scenes import DetectorNoise, build_dataset, layout_benchmark_spec
from hoiprime.training import TrainConfig


def file_hash(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@pytest.fixture(scope="module")
def small_dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("data")
    build_dataset(layout_benchmark_spec(), n_train=12, n_test=5, seed=21,
                  out_dir=out, embed_dim=8,
                  noise=DetectorNoise(feature_dim=8))
    return out


TINY_MODEL = dict(resolution=32, width_scale=1 / 16)


class TestPipeline:
    def test_materialized_pairs_are_complete(self, small_dataset):
        ds = load_dataset(small_dataset)
        config = model_config_from_meta(ds.meta, **TINY_MODEL)
        pairs = materialize_training_pairs(ds, config)
        assert len(pairs) == 2 * 12  # one human and two objects per scene
        for p in pairs:
            assert p.ip.shape == (2, 32, 32)
            assert p.target is not None and p.target.shape == (6,)

    def test_detection_and_eval_round(self, small_dataset):
        ds = load_dataset(small_dataset)
        config = model_config_from_meta(ds.meta, **TINY_MODEL)
        model, history, report = train_and_evaluate(
            ds, config, "nl", TrainConfig(epochs=1, lr0=0.02, batch_size=8, seed=1))
        assert len(history) == 1
        assert 0.0 <= report.map_full <= 1.0
        dets = run_detection(model, ds.test_scenes, ds.embeddings)
        # every test pair emits one detection per predicate
        assert len(dets) == 2 * 5 * config.n_predicates
        assert all(0.0 <= d.score <= 1.0 for d in dets)

    def test_prior_scores_requested_from_primed_variant(self, small_dataset):
        ds = load_dataset(small_dataset)
        config = model_config_from_meta(ds.meta, **TINY_MODEL)
        model, _, _ = train_and_evaluate(
            ds, config, "nl", TrainConfig(epochs=1, lr0=0.02, batch_size=8, seed=2))
        report = evaluate_model(model, ds, score_source="prior")
        assert 0.0 <= report.map_full <= 1.0


def run_cli(*argv):
    return main(list(argv))


class TestCli:
    def test_gen_is_deterministic_and_creates_dirs(self, tmp_path):
        cfg = {"seed": 4, "gen": {"preset": "layout", "n_train": 5, "n_test": 2,
                                  "noise": {"feature_dim": 8}}}
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(json.dumps(cfg))
        out_a = tmp_path / "missing" / "a"
        out_b = tmp_path / "missing" / "b"
        assert run_cli("gen", "--config", str(cfg_path), "--out", str(out_a)) == 0
        assert run_cli("gen", "--config", str(cfg_path), "--out", str(out_b)) == 0
        for name in ("train_scenes.jsonl", "meta.json", "counts.json"):
            assert file_hash(out_a / name) == file_hash(out_b / name)

    def test_gen_invalid_spec_fails_without_partial_files(self, tmp_path):
        cfg = {"gen": {"preset": "layout", "spec": {"predicates": []}}}
        cfg_path = tmp_path / "bad.json"
        cfg_path.write_text(json.dumps(cfg))
        out = tmp_path / "never"
        assert run_cli("gen", "--config", str(cfg_path), "--out", str(out)) == 2
        assert not out.exists()

    def test_train_eval_cycle(self, tmp_path, small_dataset):
        cfg = {"seed": 3, "dataset": str(small_dataset),
               "model": TINY_MODEL,
               "train": {"epochs": 1, "lr0": 0.02, "batch_size": 8}}
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(json.dumps(cfg))
        out = tmp_path / "run"
        assert run_cli("train", "--config", str(cfg_path), "--out", str(out),
                       "--variant", "nl") == 0
        assert (out / "model.ckpt").exists()
        assert (out / "loss_history.csv").exists()
        assert run_cli("eval", "--config", str(cfg_path), "--out", str(out),
                       "--variant", "nl") == 0
        report = json.loads((out / "eval_report.json").read_text())
        assert "map_full" in report and "config_hash" in report and "seed" in report
        table = (out / "eval_table.txt").read_text()
        assert "Full" in table and "Non-rare" in table

    def test_train_outputs_byte_identical_across_reruns(self, tmp_path,
                                                        small_dataset):
        cfg = {"seed": 11, "dataset": str(small_dataset),
               "model": TINY_MODEL,
               "train": {"epochs": 1, "lr0": 0.02, "batch_size": 8}}
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(json.dumps(cfg))
        hashes = []
        for sub in ("r1", "r2"):
            out = tmp_path / sub
            assert run_cli("train", "--config", str(cfg_path), "--out", str(out),
                           "--variant", "nl") == 0
            hashes.append((file_hash(out / "model.ckpt"),
                           file_hash(out / "loss_history.csv")))
        assert hashes[0] == hashes[1]

    def test_eval_zero_shot_emits_three_columns(self, tmp_path, small_dataset):
        cfg = {"seed": 5, "dataset": str(small_dataset),
               "model": TINY_MODEL,
               "train": {"epochs": 1, "lr0": 0.02, "batch_size": 8},
               "eval": {"zero_shot": True, "n_unseen": 3}}
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(json.dumps(cfg))
        out = tmp_path / "run"
        assert run_cli("train", "--config", str(cfg_path), "--out", str(out)) == 0
        assert run_cli("eval", "--config", str(cfg_path), "--out", str(out),
                       "--zero-shot") == 0
        table = (out / "eval_table.txt").read_text()
        assert "Unseen" in table and "Seen" in table and "All" in table

    def test_ablate_writes_row_per_variant(self, tmp_path, small_dataset):
        cfg = {"seed": 6, "dataset": str(small_dataset),
               "model": TINY_MODEL,
               "train": {"epochs": 1, "lr0": 0.02, "batch_size": 8}}
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(json.dumps(cfg))
        out = tmp_path / "ab"
        assert run_cli("ablate", "--config", str(cfg_path), "--out", str(out),
                       "--variant", "nl", "--variant", "nc") == 0
        table = (out / "ablation_table.txt").read_text()
        assert "nl" in table and "nc" in table
        payload = json.loads((out / "ablation_report.json").read_text())
        assert set(payload["rows"]) == {"nl", "nc"}

    def test_unknown_variant_rejected(self, tmp_path, small_dataset):
        cfg = {"dataset": str(small_dataset), "model": TINY_MODEL}
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(json.dumps(cfg))
        assert run_cli("train", "--config", str(cfg_path),
                       "--out", str(tmp_path / "x"), "--variant", "nope") == 2

    def test_split_command(self, tmp_path, small_dataset):
        out = tmp_path / "split.json"
        cfg = {"dataset": str(small_dataset)}
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(json.dumps(cfg))
        assert run_cli("split", "--config", str(cfg_path), "--out", str(out),
                       "--n-unseen", "3") == 0
        payload = json.loads(out.read_text())
        assert sum(1 for v in payload["split"].values() if v == "unseen") == 3

    def test_gradcheck_command_passes(self):
        assert run_cli("gradcheck", "--seeds", "2") == 0
