"""Command-line entry points: gen, train, eval, ablate, gradcheck.

A run is described by a JSON config file; command-line flags override
file values. Every emitted report embeds the config hash and seed, and
a rerun with the same config and seed is byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import checkpoint, datafiles
from .errors import ArgumentError
from .evaluation import format_report_table, write_split, zero_shot_split
from .model import (
    ModelConfig,
    VARIANTS,
    build_model,
    variant_by_name,
)
from .pipeline import (
    Dataset,
    evaluate_model,
    load_dataset,
    materialize_training_pairs,
    model_config_from_meta,
    train_and_evaluate,
)
from .scenes import BENCHMARKS, DetectorNoise, build_dataset
from .seeding import config_hash, derive_seed
from .training import DESK_PRESET, PAPER_PRESET, TrainConfig, train, write_history_csv
from .gradcheck_suite import run_gradcheck_suite


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _merged(config: dict, args: argparse.Namespace) -> dict:
    merged = dict(config)
    for key in ("seed", "variant", "out", "dataset"):
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _model_config(cfg: dict, dataset: Dataset) -> ModelConfig:
    section = cfg.get("model", {})
    return model_config_from_meta(
        dataset.meta,
        resolution=int(section.get("resolution", 64)),
        width_scale=float(section.get("width_scale", 0.125)),
        det_feat_dim=section.get("det_feat_dim"),
        visual_stages=int(section.get("visual_stages", 3)),
    )


def _train_config(cfg: dict, seed: int) -> TrainConfig:
    section = dict(cfg.get("train", {}))
    preset = section.pop("preset", "desk")
    base = PAPER_PRESET if preset == "paper" else DESK_PRESET
    return TrainConfig(
        epochs=int(section.get("epochs", base.epochs)),
        lr0=float(section.get("lr0", base.lr0)),
        decay_every=int(section.get("decay_every", base.decay_every)),
        decay_factor=float(section.get("decay_factor", base.decay_factor)),
        batch_size=int(section.get("batch_size", base.batch_size)),
        seed=seed,
        horizontal_flip=bool(section.get("horizontal_flip", False)),
    )


def _provenance(cfg: dict, seed: int) -> dict:
    return {"seed": seed, "config_hash": config_hash(cfg)}


def _spec_with_overrides(preset_spec, overrides: dict):
    from dataclasses import replace

    from .scenes import PredicateDef

    fields = dict(overrides)
    if "predicates" in fields:
        fields["predicates"] = tuple(
            PredicateDef(p["name"], p["kind"],
                         tuple(p["allowed_classes"]) if p.get("allowed_classes")
                         else None)
            for p in fields["predicates"])
    for key in ("humans_range", "objects_range"):
        if key in fields:
            fields[key] = tuple(fields[key])
    if "rare_multipliers" in fields:
        fields["rare_multipliers"] = tuple(tuple(t) for t in fields["rare_multipliers"])
    return replace(preset_spec, **fields)


def cmd_gen(args) -> int:
    cfg = _merged(_load_config(args.config), args)
    seed = int(cfg.get("seed", 0))
    section = cfg.get("gen", {})
    preset = section.get("preset", "layout")
    if preset not in BENCHMARKS:
        print(f"unknown benchmark preset {preset!r}; "
              f"valid: {', '.join(sorted(BENCHMARKS))}", file=sys.stderr)
        return 2
    spec = _spec_with_overrides(BENCHMARKS[preset](int(section.get("image_size", 64))),
                                section.get("spec", {}))
    noise = DetectorNoise(**section.get("noise", {}))
    out = cfg.get("out")
    if out is None:
        print("gen needs an output directory (--out)", file=sys.stderr)
        return 2
    try:
        meta = build_dataset(
            spec,
            n_train=int(section.get("n_train", 200)),
            n_test=int(section.get("n_test", 60)),
            seed=seed,
            out_dir=out,
            noise=noise,
            background_ratio=section.get("background_ratio"),
            embed_dim=int(section.get("embed_dim", 16)),
        )
    except ArgumentError as exc:
        print(f"gen failed: {exc}", file=sys.stderr)
        return 2
    print(f"wrote dataset to {out} (spec hash {meta['spec_hash'][:12]})")
    return 0


def cmd_train(args) -> int:
    cfg = _merged(_load_config(args.config), args)
    seed = int(cfg.get("seed", 0))
    dataset = load_dataset(cfg["dataset"])
    config = _model_config(cfg, dataset)
    variant = cfg.get("variant", "standard")
    variant_by_name(variant)  # validate early
    tc = _train_config(cfg, derive_seed(seed, "train"))
    out = Path(cfg.get("out", "run"))
    out.mkdir(parents=True, exist_ok=True)

    model = build_model(config, variant, seed=derive_seed(seed, "init"))
    pairs = materialize_training_pairs(dataset, config)
    history = train(pairs, model, tc)

    run_hash = config_hash({"model": config.__dict__, "variant": variant,
                            "train": tc.__dict__, "seed": seed})
    checkpoint.save_checkpoint(out / "model.ckpt", model.named_state(), run_hash)
    write_history_csv(out / "loss_history.csv", history)
    datafiles.write_json(out / "train_meta.json", {
        **_provenance(cfg, seed),
        "variant": variant,
        "run_hash": run_hash,
        "n_pairs": len(pairs),
        "final_total": history[-1].total,
    })
    print(f"trained {variant} on {len(pairs)} pairs; "
          f"final mean loss {history[-1].total:.4f}")
    return 0


def cmd_eval(args) -> int:
    cfg = _merged(_load_config(args.config), args)
    seed = int(cfg.get("seed", 0))
    dataset = load_dataset(cfg["dataset"])
    config = _model_config(cfg, dataset)
    variant = cfg.get("variant", "standard")
    out = Path(cfg.get("out", "run"))
    out.mkdir(parents=True, exist_ok=True)

    model = build_model(config, variant, seed=derive_seed(seed, "init"))
    ckpt_path = cfg.get("checkpoint", str(out / "model.ckpt"))
    state, _ = checkpoint.load_checkpoint(ckpt_path)
    model.load_state(state)

    unseen = None
    if args.zero_shot or cfg.get("eval", {}).get("zero_shot"):
        split_file = args.split_file or cfg.get("eval", {}).get("split_file")
        ids = sorted(dataset.counts)
        n_unseen = int(cfg.get("eval", {}).get("n_unseen", max(1, len(ids) // 5)))
        _, unseen = zero_shot_split(ids, config.n_objects, n_unseen,
                                    split_file if split_file else seed)

    report = evaluate_model(model, dataset, unseen=unseen)
    payload = {**report.to_json(), **_provenance(cfg, seed)}
    datafiles.write_json(out / "eval_report.json", payload)
    table = format_report_table([(variant, report)], zero_shot=unseen is not None)
    (out / "eval_table.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    return 0


def cmd_ablate(args) -> int:
    cfg = _merged(_load_config(args.config), args)
    seed = int(cfg.get("seed", 0))
    names = args.variants or cfg.get("ablate", {}).get("variants") \
        or ["standard", "np", "nl", "nc"]
    for name in names:
        variant_by_name(name)
    dataset = load_dataset(cfg["dataset"])
    config = _model_config(cfg, dataset)
    tc = _train_config(cfg, derive_seed(seed, "train"))
    out = Path(cfg.get("out", "run"))
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    for name in names:
        _, _, report = train_and_evaluate(dataset, config, name, tc,
                                          model_seed=derive_seed(seed, "init", name))
        rows.append((name, report))
        print(f"{name}: full {report.map_full:.4f}")
    table = format_report_table(rows)
    (out / "ablation_table.txt").write_text(table, encoding="utf-8")
    datafiles.write_json(out / "ablation_report.json", {
        **_provenance(cfg, seed),
        "rows": {name: rep.to_json() for name, rep in rows},
    })
    print(table, end="")
    return 0


def cmd_gradcheck(args) -> int:
    results = run_gradcheck_suite(seeds=args.seeds)
    width = max(len(name) for name, _, _, _ in results)
    ok = True
    for name, err, threshold, passed in results:
        ok &= passed
        print(f"{name:<{width}}  max rel err {err:.3e}  "
              f"(limit {threshold:.0e})  {'pass' if passed else 'FAIL'}")
    print("gradcheck:", "all ops pass" if ok else "FAILURES above")
    return 0 if ok else 1


def cmd_split(args) -> int:
    cfg = _merged(_load_config(args.config), args)
    seed = int(cfg.get("seed", 0))
    dataset = load_dataset(cfg["dataset"])
    ids = sorted(dataset.counts)
    n_unseen = args.n_unseen or max(1, len(ids) // 5)
    seen, unseen = zero_shot_split(ids, int(dataset.meta["n_object_classes"]),
                                   n_unseen, seed)
    write_split(cfg.get("out", "split.json"), seen, unseen)
    print(f"wrote split: {len(seen)} seen / {len(unseen)} unseen")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="hoiprime",
        description="Spatially primed interaction detection, desk scale.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON run config; flags override it")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)

    p_gen = sub.add_parser("gen", help="generate a synthetic dataset")
    common(p_gen)
    p_gen.set_defaults(func=cmd_gen)

    p_train = sub.add_parser("train", help="train one variant")
    common(p_train)
    p_train.add_argument("--dataset", default=None)
    p_train.add_argument("--variant", default=None,
                         help=f"one of: {', '.join(sorted(VARIANTS))}")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint")
    common(p_eval)
    p_eval.add_argument("--dataset", default=None)
    p_eval.add_argument("--variant", default=None)
    p_eval.add_argument("--zero-shot", action="store_true")
    p_eval.add_argument("--split-file", default=None)
    p_eval.set_defaults(func=cmd_eval)

    p_ablate = sub.add_parser("ablate", help="train and compare variants")
    common(p_ablate)
    p_ablate.add_argument("--dataset", default=None)
    p_ablate.add_argument("--variant", dest="variants", action="append",
                          help="repeatable; defaults to standard/np/nl/nc")
    p_ablate.set_defaults(func=cmd_ablate)

    p_gc = sub.add_parser("gradcheck", help="finite-difference check of all ops")
    p_gc.add_argument("--seeds", type=int, default=20)
    p_gc.set_defaults(func=cmd_gradcheck)

    p_split = sub.add_parser("split", help="sample a zero-shot class split")
    common(p_split)
    p_split.add_argument("--dataset", default=None)
    p_split.add_argument("--n-unseen", type=int, default=None)
    p_split.set_defaults(func=cmd_split)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
