"""Desk-scale human-object interaction detection.

A layout branch reads two-channel spatial maps of a candidate pair and
predicts prior logits over interaction predicates; a visual branch over
the union crop, fed by lateral connections and primed by those priors,
makes the final prediction. The package also contains the pairing and
mAP evaluation pipeline and a synthetic-scene oracle for verifying the
architecture's behavior end to end.
"""

from .geometry import BoxF, Detection, HUMAN_CLASS, crop_resize, iou, rasterize_ip, union_box
from .model import (
    Model,
    ModelConfig,
    VARIANTS,
    VariantSpec,
    build_model,
    compose_triplets,
    expected_param_count,
    variant_by_name,
)
from .pairing import HoiPair, label_pair, make_test_pairs, make_training_pairs
from .tensor import (
    LayerParams,
    Tensor,
    backward,
    batch_norm,
    conv2d,
    global_avg_pool,
    grad_check,
    linear,
    max_pool,
    relu,
    sgd_step,
    sigmoid,
    weighted_bce,
)
from .training import LossReport, TrainConfig, class_weights, joint_loss, train

__version__ = "0.1.0"

__all__ = [
    "BoxF", "Detection", "HUMAN_CLASS", "HoiPair", "LayerParams", "LossReport",
    "Model", "ModelConfig", "Tensor", "TrainConfig", "VARIANTS", "VariantSpec",
    "backward", "batch_norm", "build_model", "class_weights", "compose_triplets",
    "conv2d", "crop_resize", "expected_param_count", "global_avg_pool",
    "grad_check", "iou", "joint_loss", "label_pair", "linear",
    "make_test_pairs", "make_training_pairs", "max_pool", "rasterize_ip",
    "relu", "sgd_step", "sigmoid", "train", "union_box", "variant_by_name",
    "weighted_bce",
]
