"""The two-branch interaction model.

The layout branch is an eight-conv stack over the two-channel
interaction pattern; the visual branch is a reduced residual net over
the union crop. Visual stage outputs feed the layout branch through
1x1-conv lateral connections, the layout branch's prior logits prime
the visual head, and every ablation variant is pure configuration on
top of the same wiring code.

Head input order is fixed: visual feature, then prior logits (or the
pooled layout feature when priming is off), then the detector's human
and object appearance features.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ArgumentError, CheckpointError, ConstructionError, UnknownVariantError
from .seeding import derive_seed
from .tensor import (
    LayerParams,
    Tensor,
    add,
    batch_norm,
    batchnorm_params,
    concat,
    conv2d,
    conv_params,
    global_avg_pool,
    linear,
    linear_params,
    max_pool,
    relu,
    _sigmoid,
)

# (mid, out) channels per layout stage at full width; stage 1 runs
# 7x7/2 -> pool/2 -> 3x3/1 and later stages run 1x1/1 -> 3x3/2
_LAYOUT_STAGES = ((64, 256), (128, 512), (256, 1024), (512, 2048))
_VISUAL_STEM = 64
_VISUAL_STAGES = (256, 512, 1024, 2048)
_FC1, _FC2 = 1024, 512
_BLOCKS_PER_STAGE = 2


@dataclass(frozen=True)
class ModelConfig:
    """Widths and input dimensions; width_scale 1.0 is the full-size net."""

    n_predicates: int
    n_objects: int
    resolution: int = 64
    width_scale: float = 0.125
    embed_dim: int = 16
    det_feat_dim: int = 32
    visual_stages: int = 3
    dtype: str = "float32"

    def scaled(self, base: int) -> int:
        return max(1, round(base * self.width_scale))

    def np_dtype(self):
        return np.float64 if self.dtype == "float64" else np.float32


@dataclass(frozen=True)
class VariantSpec:
    """Switchboard for every named ablation; defaults are the standard model."""

    priming: bool = True
    laterals: str = "add"            # add | concat | none
    lateral_kernel: int = 1
    lateral_direction: str = "v2l"   # v2l | l2v
    connections: tuple[int, ...] = (1, 2, 3)
    use_w_o: bool = True
    use_fh_fo: bool = True
    enlarged_head: bool = False
    use_f1: bool = True              # unprimed models: feed the pooled layout feature

    def active_connections(self) -> tuple[int, ...]:
        return () if self.laterals == "none" else self.connections


VARIANTS: dict[str, VariantSpec] = {
    "standard": VariantSpec(),
    "np": VariantSpec(priming=False),
    "nc": VariantSpec(priming=False, laterals="none"),
    "nl": VariantSpec(laterals="none"),
    "concat": VariantSpec(laterals="concat"),
    "3x3add": VariantSpec(lateral_kernel=3),
    "conn1": VariantSpec(connections=(1,)),
    "conn2": VariantSpec(connections=(2,)),
    "conn3": VariantSpec(connections=(3,)),
    "ltov": VariantSpec(lateral_direction="l2v"),
    "no-wo": VariantSpec(use_w_o=False),
    "no-fhfo": VariantSpec(use_fh_fo=False),
    "standard-larger": VariantSpec(use_fh_fo=False, enlarged_head=True),
    "concat-larger": VariantSpec(laterals="concat", use_fh_fo=False,
                                 enlarged_head=True),
}


def variant_by_name(name: str) -> VariantSpec:
    key = name.lower()
    if key not in VARIANTS:
        raise UnknownVariantError(
            f"unknown variant {name!r}; valid names: {', '.join(sorted(VARIANTS))}")
    return VARIANTS[key]


def _conv_out(extent: int, k: int, stride: int, pad: int) -> int:
    return (extent + 2 * pad - k) // stride + 1


def _stage_extents(resolution: int, n_stages: int) -> list[int]:
    # shared by both branches: 7x7/2 stem, 2x2 pool, then a /2 conv per stage
    e = _conv_out(resolution, 7, 2, 3)
    e = _conv_out(e, 2, 2, 0)
    extents = [e]
    for _ in range(n_stages - 1):
        e = _conv_out(e, 3, 2, 1)
        extents.append(e)
    return extents


# ---------------------------------------------------------------------------
# building blocks


class _ConvUnit:
    """conv -> relu -> batchnorm, the layout branch's layer recipe."""

    def __init__(self, in_ch, out_ch, k, stride, rng, dtype):
        self.conv = conv_params(in_ch, out_ch, k, rng, dtype)
        self.bn = batchnorm_params(out_ch, dtype)
        self.stride = stride
        self.pad = k // 2

    def forward(self, x: Tensor, mode: str) -> Tensor:
        return batch_norm(relu(conv2d(x, self.conv, self.stride, self.pad)),
                          self.bn, mode)

    def named(self, prefix: str):
        yield f"{prefix}.conv.weight", self.conv.weights
        yield f"{prefix}.conv.bias", self.conv.bias
        yield from _bn_named(prefix + ".bn", self.bn)

    def trainable(self):
        return self.conv.trainable() + self.bn.trainable()


def _bn_named(prefix: str, p: LayerParams):
    yield f"{prefix}.gamma", p.weights
    yield f"{prefix}.beta", p.bias
    yield f"{prefix}.running_mean", p.running_mean
    yield f"{prefix}.running_var", p.running_var


class _ResBlock:
    """Two 3x3 convs with batchnorm and a projected skip when shapes change."""

    def __init__(self, in_ch, out_ch, stride, rng, dtype):
        self.conv1 = conv_params(in_ch, out_ch, 3, rng, dtype)
        self.bn1 = batchnorm_params(out_ch, dtype)
        self.conv2 = conv_params(out_ch, out_ch, 3, rng, dtype)
        self.bn2 = batchnorm_params(out_ch, dtype)
        self.stride = stride
        if stride != 1 or in_ch != out_ch:
            self.skip_conv = conv_params(in_ch, out_ch, 1, rng, dtype)
            self.skip_bn = batchnorm_params(out_ch, dtype)
        else:
            self.skip_conv = None
            self.skip_bn = None

    def forward(self, x: Tensor, mode: str) -> Tensor:
        y = relu(batch_norm(conv2d(x, self.conv1, self.stride, 1), self.bn1, mode))
        y = batch_norm(conv2d(y, self.conv2, 1, 1), self.bn2, mode)
        if self.skip_conv is not None:
            x = batch_norm(conv2d(x, self.skip_conv, self.stride, 0),
                           self.skip_bn, mode)
        return relu(add(y, x))

    def named(self, prefix: str):
        yield f"{prefix}.conv1.weight", self.conv1.weights
        yield f"{prefix}.conv1.bias", self.conv1.bias
        yield from _bn_named(prefix + ".bn1", self.bn1)
        yield f"{prefix}.conv2.weight", self.conv2.weights
        yield f"{prefix}.conv2.bias", self.conv2.bias
        yield from _bn_named(prefix + ".bn2", self.bn2)
        if self.skip_conv is not None:
            yield f"{prefix}.skip.weight", self.skip_conv.weights
            yield f"{prefix}.skip.bias", self.skip_conv.bias
            yield from _bn_named(prefix + ".skip_bn", self.skip_bn)

    def trainable(self):
        out = self.conv1.trainable() + self.bn1.trainable() \
            + self.conv2.trainable() + self.bn2.trainable()
        if self.skip_conv is not None:
            out += self.skip_conv.trainable() + self.skip_bn.trainable()
        return out


class _Head:
    """fc -> relu -> fc -> relu -> projection to predicate logits."""

    def __init__(self, in_dim, h1, h2, out_dim, rng, dtype):
        self.fc1 = linear_params(in_dim, h1, rng, dtype)
        self.fc2 = linear_params(h1, h2, rng, dtype)
        self.proj = linear_params(h2, out_dim, rng, dtype)
        self.in_dim = in_dim

    def forward(self, x: Tensor) -> Tensor:
        h = relu(linear(x, self.fc1))
        h = relu(linear(h, self.fc2))
        return linear(h, self.proj)

    def named(self, prefix: str):
        for tag, p in (("fc1", self.fc1), ("fc2", self.fc2), ("proj", self.proj)):
            yield f"{prefix}.{tag}.weight", p.weights
            yield f"{prefix}.{tag}.bias", p.bias

    def trainable(self):
        return self.fc1.trainable() + self.fc2.trainable() + self.proj.trainable()


class LayoutNet:
    """Eight-conv stack over the interaction pattern, pooled to one vector."""

    def __init__(self, config: ModelConfig, rng, head_sizes, with_head: bool):
        dtype = config.np_dtype()
        s = config.scaled
        self.stage_channels = [s(out) for _, out in _LAYOUT_STAGES]
        self.stages: list[list[_ConvUnit]] = []
        in_ch = 2
        for i, (mid, out) in enumerate(_LAYOUT_STAGES):
            if i == 0:
                units = [_ConvUnit(in_ch, s(mid), 7, 2, rng, dtype),
                         _ConvUnit(s(mid), s(out), 3, 1, rng, dtype)]
            else:
                units = [_ConvUnit(in_ch, s(mid), 1, 1, rng, dtype),
                         _ConvUnit(s(mid), s(out), 3, 2, rng, dtype)]
            self.stages.append(units)
            in_ch = s(out)
        self.feature_dim = in_ch
        self.head = None
        if with_head:
            head_in = self.feature_dim + (config.embed_dim if head_sizes[2] else 0)
            self.head = _Head(head_in, head_sizes[0], head_sizes[1],
                              config.n_predicates, rng, dtype)

    def run_stage(self, index: int, x: Tensor, mode: str) -> Tensor:
        units = self.stages[index - 1]
        x = units[0].forward(x, mode)
        if index == 1:
            x = max_pool(x, 2, 2)
        return units[1].forward(x, mode)

    def named(self, prefix: str = "layout"):
        for i, units in enumerate(self.stages, start=1):
            for j, unit in enumerate(units, start=1):
                yield from unit.named(f"{prefix}.s{i}.c{j}")
        if self.head is not None:
            yield from self.head.named(f"{prefix}.head")

    def trainable(self):
        out = []
        for units in self.stages:
            for unit in units:
                out += unit.trainable()
        if self.head is not None:
            out += self.head.trainable()
        return out


class VisualNet:
    """Reduced residual net over the union crop with per-stage taps."""

    def __init__(self, config: ModelConfig, rng, head_sizes, head_in: int):
        dtype = config.np_dtype()
        s = config.scaled
        stem_ch = s(_VISUAL_STEM)
        self.stem = _ConvUnit(3, stem_ch, 7, 2, rng, dtype)
        self.stage_channels = [s(c) for c in _VISUAL_STAGES[:config.visual_stages]]
        self.stages: list[list[_ResBlock]] = []
        in_ch = stem_ch
        for i, out_ch in enumerate(self.stage_channels):
            stride = 1 if i == 0 else 2
            blocks = [_ResBlock(in_ch, out_ch, stride, rng, dtype)]
            for _ in range(_BLOCKS_PER_STAGE - 1):
                blocks.append(_ResBlock(out_ch, out_ch, 1, rng, dtype))
            self.stages.append(blocks)
            in_ch = out_ch
        self.feature_dim = in_ch
        self.head = _Head(head_in, head_sizes[0], head_sizes[1],
                          config.n_predicates, rng, dtype)

    def run_stem(self, x: Tensor, mode: str) -> Tensor:
        return max_pool(self.stem.forward(x, mode), 2, 2)

    def run_stage(self, index: int, x: Tensor, mode: str) -> Tensor:
        for block in self.stages[index - 1]:
            x = block.forward(x, mode)
        return x

    def named(self, prefix: str = "visual"):
        yield from self.stem.named(f"{prefix}.stem")
        for i, blocks in enumerate(self.stages, start=1):
            for j, block in enumerate(blocks, start=1):
                yield from block.named(f"{prefix}.s{i}.b{j}")
        yield from self.head.named(f"{prefix}.head")

    def trainable(self):
        out = self.stem.trainable()
        for blocks in self.stages:
            for block in blocks:
                out += block.trainable()
        out += self.head.trainable()
        return out


class _Lateral:
    def __init__(self, in_ch, out_ch, kernel, rng, dtype):
        self.params = conv_params(in_ch, out_ch, kernel, rng, dtype)
        self.kernel = kernel

    def named(self, prefix: str):
        yield f"{prefix}.weight", self.params.weights
        yield f"{prefix}.bias", self.params.bias

    def trainable(self):
        return self.params.trainable()


# ---------------------------------------------------------------------------
# the assembled model


class Model:
    """Both branches plus lateral wiring for one variant.

    Immutable during forward-only inference; training mutates parameters
    through sgd_step and needs exclusive access.
    """

    def __init__(self, config: ModelConfig, variant: VariantSpec,
                 layout: LayoutNet, visual: VisualNet,
                 laterals: dict[int, _Lateral]):
        self.config = config
        self.variant = variant
        self.layout = layout
        self.visual = visual
        self.laterals = laterals
        self.lateral_calls = 0

    # -- wiring ------------------------------------------------------------

    def _apply_lateral(self, index: int, host: Tensor, tap: Tensor) -> Tensor:
        conn = self.laterals[index]
        self.lateral_calls += 1
        pad = conn.kernel // 2
        if self.variant.laterals == "add":
            return add(host, conv2d(tap, conn.params, 1, pad))
        return conv2d(concat([host, tap], axis=1), conn.params, 1, pad)

    def _visual_base(self, crop: Tensor, received, mode: str):
        x = self.visual.run_stem(crop, mode)
        taps: dict[int, Tensor] = {}
        active = self.variant.active_connections()
        for i in range(1, len(self.visual.stages) + 1):
            x = self.visual.run_stage(i, x, mode)
            taps[i] = x
            if received is not None and i in active:
                x = self._apply_lateral(i, x, received[i])
        return taps, global_avg_pool(x)

    def _layout_base(self, ip: Tensor, taps, mode: str) -> Tensor:
        active = self.variant.active_connections()
        x = ip
        for i in range(1, len(self.layout.stages) + 1):
            x = self.layout.run_stage(i, x, mode)
            if taps is not None and i in active:
                x = self._apply_lateral(i, x, taps[i])
        return global_avg_pool(x)

    def _layout_base_collect(self, ip: Tensor, mode: str):
        outs: dict[int, Tensor] = {}
        x = ip
        for i in range(1, len(self.layout.stages) + 1):
            x = self.layout.run_stage(i, x, mode)
            outs[i] = x
        return outs, global_avg_pool(x)

    def forward_pairs(self, ip, crop, wo, fh, fo, mode: str = "train"):
        """Run a batch of pairs; returns (prior logits or None, final logits)."""
        dtype = self.config.np_dtype()
        ip_t = ip if isinstance(ip, Tensor) else Tensor(np.asarray(ip, dtype))
        crop_t = crop if isinstance(crop, Tensor) else Tensor(np.asarray(crop, dtype))
        v = self.variant

        if v.lateral_direction == "v2l" or not v.active_connections():
            taps, f2 = self._visual_base(crop_t, None, mode)
            f1 = self._layout_base(ip_t, taps if v.active_connections() else None, mode)
        else:
            louts, f1 = self._layout_base_collect(ip_t, mode)
            _, f2 = self._visual_base(crop_t, louts, mode)

        p1 = None
        if v.priming:
            head_in = f1
            if v.use_w_o:
                wo_t = wo if isinstance(wo, Tensor) else Tensor(np.asarray(wo, dtype))
                head_in = concat([f1, wo_t], axis=1)
            p1 = self.layout.head.forward(head_in)

        parts = [f2]
        if v.priming:
            parts.append(p1)
        elif v.use_f1:
            parts.append(f1)
        if v.use_fh_fo:
            fh_t = fh if isinstance(fh, Tensor) else Tensor(np.asarray(fh, dtype))
            fo_t = fo if isinstance(fo, Tensor) else Tensor(np.asarray(fo, dtype))
            parts += [fh_t, fo_t]
        p2 = self.visual.head.forward(concat(parts, axis=1) if len(parts) > 1 else parts[0])
        return p1, p2

    # -- state -------------------------------------------------------------

    def named_state(self) -> dict[str, Tensor]:
        state: dict[str, Tensor] = {}
        for name, tensor in self.layout.named():
            state[name] = tensor
        for name, tensor in self.visual.named():
            state[name] = tensor
        for i in sorted(self.laterals):
            for name, tensor in self.laterals[i].named(f"lateral.{i}"):
                state[name] = tensor
        return state

    def parameters(self) -> list[Tensor]:
        out = self.layout.trainable() + self.visual.trainable()
        for i in sorted(self.laterals):
            out += self.laterals[i].trainable()
        return out

    def parameter_count(self) -> int:
        return sum(p.size for p in self.parameters())

    def load_state(self, arrays: dict[str, np.ndarray]) -> None:
        state = self.named_state()
        missing = set(state) - set(arrays)
        extra = set(arrays) - set(state)
        if missing or extra:
            raise CheckpointError(
                f"state mismatch; missing={sorted(missing)[:3]} extra={sorted(extra)[:3]}")
        for name, tensor in state.items():
            arr = arrays[name]
            if tuple(arr.shape) != tensor.shape:
                raise CheckpointError(
                    f"shape mismatch for {name}: {arr.shape} vs {tensor.shape}")
            tensor.data[...] = arr.astype(tensor.data.dtype)
            tensor.grad = None


# ---------------------------------------------------------------------------
# construction and parameter accounting


def _lateral_channels(config: ModelConfig, variant: VariantSpec,
                      index: int) -> tuple[int, int]:
    s = config.scaled
    layout_ch = s(_LAYOUT_STAGES[index - 1][1])
    visual_ch = s(_VISUAL_STAGES[index - 1])
    if variant.lateral_direction == "v2l":
        host, tap = layout_ch, visual_ch
    else:
        host, tap = visual_ch, layout_ch
    if variant.laterals == "concat":
        return host + tap, host
    return tap, host


def _head_sizes(config: ModelConfig, variant: VariantSpec) -> tuple[int, int]:
    if variant.enlarged_head:
        return _enlarged_head_sizes(config, variant)
    return config.scaled(_FC1), config.scaled(_FC2)


def _visual_head_in(config: ModelConfig, variant: VariantSpec) -> int:
    s = config.scaled
    f2 = s(_VISUAL_STAGES[config.visual_stages - 1])
    dim = f2
    if variant.priming:
        dim += config.n_predicates
    elif variant.use_f1:
        dim += s(_LAYOUT_STAGES[-1][1])
    if variant.use_fh_fo:
        dim += 2 * config.det_feat_dim
    return dim


def _count_params(config: ModelConfig, variant: VariantSpec,
                  head_sizes: tuple[int, int]) -> int:
    s = config.scaled
    conv_n = lambda ci, co, k: co * ci * k * k + co
    bn_n = lambda c: 2 * c
    lin_n = lambda i, o: o * i + o

    total = 0
    in_ch = 2
    for i, (mid, out) in enumerate(_LAYOUT_STAGES):
        k_first = 7 if i == 0 else 1
        total += conv_n(in_ch, s(mid), k_first) + bn_n(s(mid))
        total += conv_n(s(mid), s(out), 3) + bn_n(s(out))
        in_ch = s(out)
    if variant.priming:
        head_in = in_ch + (config.embed_dim if variant.use_w_o else 0)
        total += lin_n(head_in, head_sizes[0]) + lin_n(head_sizes[0], head_sizes[1]) \
            + lin_n(head_sizes[1], config.n_predicates)

    total += conv_n(3, s(_VISUAL_STEM), 7) + bn_n(s(_VISUAL_STEM))
    v_in = s(_VISUAL_STEM)
    for i in range(config.visual_stages):
        out = s(_VISUAL_STAGES[i])
        stride = 1 if i == 0 else 2
        for b in range(_BLOCKS_PER_STAGE):
            cin = v_in if b == 0 else out
            total += conv_n(cin, out, 3) + bn_n(out)
            total += conv_n(out, out, 3) + bn_n(out)
            if b == 0 and (stride != 1 or cin != out):
                total += conv_n(cin, out, 1) + bn_n(out)
        v_in = out
    total += lin_n(_visual_head_in(config, variant), head_sizes[0]) \
        + lin_n(head_sizes[0], head_sizes[1]) \
        + lin_n(head_sizes[1], config.n_predicates)

    for i in variant.active_connections():
        cin, cout = _lateral_channels(config, variant, i)
        total += conv_n(cin, cout, variant.lateral_kernel)
    return total


def _enlarged_head_sizes(config: ModelConfig, variant: VariantSpec) -> tuple[int, int]:
    """Widen fc1/fc2 until the total matches the with-appearance reference."""
    reference = replace(variant, use_fh_fo=True, enlarged_head=False)
    target = _count_params(config, reference, _head_sizes(config, reference))
    base = replace(variant, enlarged_head=False)
    h1 = config.scaled(_FC1)
    best = None
    while h1 < 1_000_000:
        sizes = (h1, max(1, h1 // 2))
        count = _count_params(config, base, sizes)
        diff = abs(count - target)
        if best is None or diff < best[0]:
            best = (diff, sizes)
        if count >= target:
            break
        h1 += 1
    if best is None or best[0] / target > 0.01:
        raise ConstructionError("could not match parameter count within 1%")
    return best[1]


def expected_param_count(config: ModelConfig, variant: VariantSpec) -> int:
    """Closed-form trainable parameter count for a config/variant pair."""
    return _count_params(config, variant, _head_sizes(config, variant))


def _validate(config: ModelConfig, variant: VariantSpec) -> None:
    if config.n_predicates < 1 or config.n_objects < 1:
        raise ArgumentError("predicate and object vocabulary sizes must be positive")
    if config.embed_dim < 1 or config.det_feat_dim < 1:
        raise ArgumentError("embedding and detector feature dims must be positive")
    if config.resolution < 32:
        raise ArgumentError("resolution below 32 collapses the deepest stage")
    if config.visual_stages not in (3, 4):
        raise ArgumentError("visual_stages must be 3 or 4")
    if variant.laterals not in ("add", "concat", "none"):
        raise ArgumentError(f"bad lateral mode {variant.laterals!r}")
    if variant.lateral_direction not in ("v2l", "l2v"):
        raise ArgumentError(f"bad lateral direction {variant.lateral_direction!r}")
    if variant.lateral_kernel not in (1, 3):
        raise ArgumentError("lateral kernel must be 1 or 3")
    for i in variant.active_connections():
        if i not in (1, 2, 3):
            raise ConstructionError("connection index out of range", connection=i)
        if i > config.visual_stages:
            raise ConstructionError("no visual stage feeds this port", connection=i)
    layout_ext = _stage_extents(config.resolution, 4)
    visual_ext = _stage_extents(config.resolution, config.visual_stages)
    for i in variant.active_connections():
        if layout_ext[i - 1] != visual_ext[i - 1]:
            raise ConstructionError(
                f"tap extent {visual_ext[i - 1]} != port extent {layout_ext[i - 1]}",
                connection=i)


def build_model(config: ModelConfig, variant: VariantSpec | str,
                seed: int = 0) -> Model:
    """Construct both branches and the lateral convs for one variant."""
    if isinstance(variant, str):
        variant = variant_by_name(variant)
    _validate(config, variant)
    rng = np.random.default_rng(derive_seed(seed, "model-init"))
    dtype = config.np_dtype()
    head_sizes = _head_sizes(config, variant)

    layout = LayoutNet(config, rng, (head_sizes[0], head_sizes[1], variant.use_w_o),
                       with_head=variant.priming)
    visual = VisualNet(config, rng, head_sizes, _visual_head_in(config, variant))
    laterals: dict[int, _Lateral] = {}
    for i in variant.active_connections():
        cin, cout = _lateral_channels(config, variant, i)
        laterals[i] = _Lateral(cin, cout, variant.lateral_kernel, rng, dtype)

    model = Model(config, variant, layout, visual, laterals)
    expected = expected_param_count(config, variant)
    actual = model.parameter_count()
    if actual != expected:
        raise ConstructionError(
            f"parameter accounting drifted: built {actual}, expected {expected}")
    return model


def compose_triplets(logits: np.ndarray, object_class: int, s_h: float,
                     s_o: float, n_objects: int) -> list[tuple[int, float]]:
    """Score every (predicate, detected object class) triplet for one pair.

    Scores are s_h * s_o * sigmoid(logit); combinations never seen in
    training compose the same way, which is what enables zero-shot output.
    """
    if not 0 <= object_class < n_objects:
        raise ArgumentError(f"object class {object_class} outside [0, {n_objects})")
    probs = _sigmoid(np.asarray(logits, dtype=np.float64))
    return [(int(p) * n_objects + object_class, float(s_h * s_o * probs[p]))
            for p in range(probs.shape[-1])]
