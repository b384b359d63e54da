"""Box arithmetic, interaction-pattern rasterization, and union crops.

All functions are pure; coordinates are continuous pixels with y down.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError

HUMAN_CLASS = 0


@dataclass(frozen=True)
class BoxF:
    """Axis-aligned box; x2 > x1 and y2 > y1 so the area is positive."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        if not (self.x2 > self.x1 and self.y2 > self.y1):
            raise ArgumentError(f"degenerate box {(self.x1, self.y1, self.x2, self.y2)}")

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def cx(self) -> float:
        return 0.5 * (self.x1 + self.x2)

    @property
    def cy(self) -> float:
        return 0.5 * (self.y1 + self.y2)

    def as_list(self) -> list[float]:
        return [self.x1, self.y1, self.x2, self.y2]

    @staticmethod
    def from_list(vals) -> "BoxF":
        return BoxF(float(vals[0]), float(vals[1]), float(vals[2]), float(vals[3]))


@dataclass
class Detection:
    """One detector output: box, object class, confidence, appearance feature."""

    box: BoxF
    class_id: int
    score: float
    feature: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.float32))

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ArgumentError(f"detection score {self.score} outside [0, 1]")


def intersection_area(a: BoxF, b: BoxF) -> float:
    w = min(a.x2, b.x2) - max(a.x1, b.x1)
    h = min(a.y2, b.y2) - max(a.y1, b.y1)
    if w <= 0 or h <= 0:
        return 0.0
    return w * h


def iou(a: BoxF, b: BoxF) -> float:
    """Intersection over union; 0 for disjoint boxes, exactly 1 for a == b."""
    inter = intersection_area(a, b)
    if inter == 0.0:
        return 0.0
    return inter / (a.area + b.area - inter)


def union_box(a: BoxF, b: BoxF) -> BoxF:
    """Smallest box covering both inputs."""
    return BoxF(min(a.x1, b.x1), min(a.y1, b.y1), max(a.x2, b.x2), max(a.y2, b.y2))


def contains(outer: BoxF, inner: BoxF) -> bool:
    return (inner.x1 >= outer.x1 and inner.y1 >= outer.y1
            and inner.x2 <= outer.x2 and inner.y2 <= outer.y2)


def _span_mask(lo: float, hi: float, r: int) -> np.ndarray:
    centers = np.arange(r) + 0.5
    return (centers >= lo) & (centers <= hi)


def rasterize_ip(human: BoxF, obj: BoxF, resolution: int) -> np.ndarray:
    """Two-channel binary map of both boxes inside their union.

    Boxes map into union-box coordinates scaled to R x R; a cell is set
    when its center lies inside the mapped box. A mapped box too small to
    cover any cell center still sets the single nearest cell, so each
    channel always has at least one active cell. Channel 0 is the human.
    """
    if resolution < 1:
        raise ArgumentError("resolution must be positive")
    u = union_box(human, obj)
    sx = resolution / u.width
    sy = resolution / u.height
    grid = np.zeros((2, resolution, resolution), dtype=np.float32)
    for ch, box in ((0, human), (1, obj)):
        cols = _span_mask((box.x1 - u.x1) * sx, (box.x2 - u.x1) * sx, resolution)
        rows = _span_mask((box.y1 - u.y1) * sy, (box.y2 - u.y1) * sy, resolution)
        if cols.any() and rows.any():
            grid[ch] = np.outer(rows, cols)
        else:
            ci = int(np.clip(round((box.cy - u.y1) * sy - 0.5), 0, resolution - 1))
            cj = int(np.clip(round((box.cx - u.x1) * sx - 0.5), 0, resolution - 1))
            grid[ch, ci, cj] = 1.0
    return grid


def crop_resize(image: np.ndarray, box: BoxF, resolution: int) -> np.ndarray:
    """Bilinear crop of [3, H, W] to [3, R, R]; the box is clamped to bounds."""
    c, h, w = image.shape
    x1 = float(np.clip(box.x1, 0, w))
    x2 = float(np.clip(box.x2, 0, w))
    y1 = float(np.clip(box.y1, 0, h))
    y2 = float(np.clip(box.y2, 0, h))
    if x2 - x1 < 1e-6:
        x1 = min(max(box.x1, 0.0), w - 1.0)
        x2 = x1 + 1.0
    if y2 - y1 < 1e-6:
        y1 = min(max(box.y1, 0.0), h - 1.0)
        y2 = y1 + 1.0

    xs = x1 + (np.arange(resolution) + 0.5) * (x2 - x1) / resolution - 0.5
    ys = y1 + (np.arange(resolution) + 0.5) * (y2 - y1) / resolution - 0.5
    x0 = np.clip(np.floor(xs).astype(int), 0, w - 1)
    y0 = np.clip(np.floor(ys).astype(int), 0, h - 1)
    x1i = np.clip(x0 + 1, 0, w - 1)
    y1i = np.clip(y0 + 1, 0, h - 1)
    fx = np.clip(xs - x0, 0.0, 1.0)[None, None, :]
    fy = np.clip(ys - y0, 0.0, 1.0)[None, :, None]

    top = image[:, y0][:, :, x0] * (1 - fx) + image[:, y0][:, :, x1i] * fx
    bot = image[:, y1i][:, :, x0] * (1 - fx) + image[:, y1i][:, :, x1i] * fx
    return (top * (1 - fy) + bot * fy).astype(np.float32)
