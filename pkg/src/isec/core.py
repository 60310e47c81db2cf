"""Raster types and the parameter bundle shared by every module.

Conventions: arrays are row-major with the origin at the top-left, ``x`` is
the column and ``y`` the row.  Binary maps are plain ``bool`` arrays of
shape ``(H, W)``; the other raster kinds get small frozen wrappers so their
invariants are checked once, at construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

BinaryMap = np.ndarray
DensityMap = np.ndarray

MIN_SIDE = 3


class ParamError(ValueError):
    """Raised when an :class:`IsecParams` invariant does not hold."""


class DegenerateInputError(ValueError):
    """Raised when an input is valid but carries no usable signal."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RasterImage:
    """H x W x 3 RGB image with 8-bit samples."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 3 or data.shape[2] != 3:
            raise ValueError(f"expected an (H, W, 3) array, got shape {data.shape}")
        if data.dtype != np.uint8:
            raise ValueError(f"expected uint8 samples, got {data.dtype}")
        if data.shape[0] < MIN_SIDE or data.shape[1] < MIN_SIDE:
            raise ValueError(f"image must be at least 3x3, got {data.shape[1]}x{data.shape[0]}")
        object.__setattr__(self, "data", _frozen(data))

    @classmethod
    def from_samples(cls, width: int, height: int, samples) -> RasterImage:
        buf = np.frombuffer(bytes(samples), dtype=np.uint8)
        if buf.size != width * height * 3:
            raise ValueError(f"expected {width * height * 3} samples, got {buf.size}")
        return cls(buf.reshape(height, width, 3))

    def to_samples(self) -> bytes:
        return self.data.tobytes()

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)


@dataclass(frozen=True, eq=False)
class GradientField:
    """Per-pixel gradient magnitude and orientation folded into [0, pi)."""

    magnitude: np.ndarray
    orientation: np.ndarray

    def __post_init__(self):
        mag = np.asarray(self.magnitude, dtype=np.float64)
        ori = np.asarray(self.orientation, dtype=np.float64)
        if mag.shape != ori.shape or mag.ndim != 2:
            raise ValueError(f"magnitude {mag.shape} and orientation {ori.shape} must be equal 2-D shapes")
        if not np.all(np.isfinite(mag)) or np.any(mag < 0):
            raise ValueError("magnitudes must be finite and non-negative")
        object.__setattr__(self, "magnitude", _frozen(mag))
        object.__setattr__(self, "orientation", _frozen(ori))

    @property
    def shape(self) -> tuple[int, int]:
        return self.magnitude.shape


@dataclass(frozen=True, eq=False)
class FlowField:
    """Per-pixel displacement (dx along columns, dy along rows).

    Sintel-style unknown-flow markers (``|u|`` or ``|v|`` above 1e9) are
    kept as they are; :meth:`valid` tells them apart.
    """

    dx: np.ndarray
    dy: np.ndarray

    INVALID = 1e9

    def __post_init__(self):
        dx = np.asarray(self.dx, dtype=np.float32)
        dy = np.asarray(self.dy, dtype=np.float32)
        if dx.shape != dy.shape or dx.ndim != 2:
            raise ValueError(f"dx {dx.shape} and dy {dy.shape} must be equal 2-D shapes")
        if not (np.all(np.isfinite(dx)) and np.all(np.isfinite(dy))):
            raise ValueError("flow components must be finite")
        object.__setattr__(self, "dx", _frozen(dx))
        object.__setattr__(self, "dy", _frozen(dy))

    @classmethod
    def zeros(cls, height: int, width: int) -> FlowField:
        z = np.zeros((height, width), np.float32)
        return cls(z, z)

    @property
    def shape(self) -> tuple[int, int]:
        return self.dx.shape

    def valid(self) -> np.ndarray:
        return (np.abs(self.dx) <= self.INVALID) & (np.abs(self.dy) <= self.INVALID)


@dataclass(frozen=True, eq=False)
class LabelMap:
    """H x W map of non-negative integer labels.

    ``label_count`` is ``max + 1``.  Maps produced by segmentation are dense
    (every label in ``[0, label_count)`` occurs); maps read from disk need
    not be, see :meth:`is_dense` and :func:`relabel_dense`.
    """

    labels: np.ndarray
    label_count: int = field(init=False)

    def __post_init__(self):
        lab = np.asarray(self.labels)
        if lab.ndim != 2:
            raise ValueError(f"labels must be 2-D, got shape {lab.shape}")
        if lab.size == 0:
            raise ValueError("labels must not be empty")
        if not np.issubdtype(lab.dtype, np.integer):
            raise ValueError(f"labels must be integers, got {lab.dtype}")
        if lab.min() < 0:
            raise ValueError("labels must be non-negative")
        lab = lab.astype(np.int64, copy=False)
        object.__setattr__(self, "labels", _frozen(lab))
        object.__setattr__(self, "label_count", int(lab.max()) + 1)

    @classmethod
    def from_samples(cls, width: int, height: int, samples) -> LabelMap:
        a = np.asarray(list(samples) if not isinstance(samples, np.ndarray) else samples, dtype=np.int64)
        if a.size != width * height:
            raise ValueError(f"expected {width * height} samples, got {a.size}")
        return cls(a.reshape(height, width))

    def to_samples(self) -> list[int]:
        return self.labels.ravel().tolist()

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    def is_dense(self) -> bool:
        return np.unique(self.labels).size == self.label_count

    def __array__(self, dtype=None, copy=None):
        return self.labels if dtype is None else self.labels.astype(dtype)


def relabel_dense(labels) -> np.ndarray:
    """Rename labels to ``0..n-1`` in order of first raster-scan appearance."""
    flat = np.asarray(labels).ravel()
    _, first, inverse = np.unique(flat, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    return order[inverse].reshape(np.shape(labels)).astype(np.int64)


def as_labels(seg) -> np.ndarray:
    """Accept a LabelMap or an integer array and return the raw array."""
    if isinstance(seg, LabelMap):
        return seg.labels
    a = np.asarray(seg)
    if a.ndim != 2 or not np.issubdtype(a.dtype, np.integer):
        raise ValueError(f"expected a 2-D integer label array, got {a.dtype} {a.shape}")
    return a


@dataclass(frozen=True)
class IsecParams:
    """Knobs of the segmentation loop.

    Thresholds are fractions of the image's maximum gradient magnitude.
    """

    low_threshold: float = 0.05
    high_threshold_cap: float = 0.30
    threshold_step: float = 0.05
    filter_size: int = 11
    min_filter_size: int = 3
    high_low_ratio: float = 2.0
    ed_binarize_threshold: float = 0.05
    min_superpixel_area: int = 100
    sigma: float = 1.0

    def thresholds(self) -> list[float]:
        """Loop values ``k = t, t + step, ...`` up to and including ``T``."""
        n = int(np.floor((self.high_threshold_cap - self.low_threshold) / self.threshold_step + 1e-9)) + 1
        return [self.low_threshold + i * self.threshold_step for i in range(n)]


def validate_params(p: IsecParams) -> IsecParams:
    """Return ``p`` unchanged, or raise :class:`ParamError` naming the first broken rule."""
    t, T = p.low_threshold, p.high_threshold_cap
    if not 0 < t < 1:
        raise ParamError("low_threshold must lie in (0, 1)")
    if not T <= 1:
        raise ParamError("high_threshold_cap must be <= 1")
    if not t < T:
        raise ParamError("t < T required")
    if not p.threshold_step > 0:
        raise ParamError("threshold_step must be > 0")
    for name in ("filter_size", "min_filter_size"):
        v = getattr(p, name)
        if int(v) != v:
            raise ParamError(f"{name} must be an integer")
        if v % 2 == 0:
            raise ParamError(f"{name} must be odd")
        if v < 3:
            raise ParamError(f"{name} must be >= 3")
    if p.min_filter_size > p.filter_size:
        raise ParamError("min_filter_size must be <= filter_size")
    if not p.high_low_ratio > 1:
        raise ParamError("high_low_ratio must be > 1")
    if not 0 < p.ed_binarize_threshold <= 1:
        raise ParamError("ed_binarize_threshold must lie in (0, 1]")
    if int(p.min_superpixel_area) != p.min_superpixel_area or p.min_superpixel_area < 1:
        raise ParamError("min_superpixel_area must be an integer >= 1")
    if not p.sigma > 0:
        raise ParamError("sigma must be > 0")
    return p
