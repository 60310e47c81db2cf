"""Segmentation quality measures and the regular-grid baseline.

Flow-based measures (motion undersegmentation and motion discontinuity
error) compare segmentations through ground-truth optical flow; boundary
recall and undersegmentation error compare against a labelled ground truth.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import morphology
from .core import DegenerateInputError, FlowField, as_labels

UNLABELED = -1


@dataclass(frozen=True)
class MetricReport:
    metric: str
    value: float
    superpixel_count: int
    image: str = ""


def _check_shapes(*arrays):
    shapes = {np.shape(a) for a in arrays}
    if len(shapes) != 1:
        raise ValueError(f"dimension mismatch: {sorted(shapes)}")


def seg_to_boundary(seg) -> np.ndarray:
    """Pixels with an 8-neighbour of a different label."""
    lab = as_labels(seg)
    h, w = lab.shape
    out = np.zeros((h, w), dtype=bool)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == dx == 0:
                continue
            ys = slice(max(dy, 0), h + min(dy, 0))
            yd = slice(max(-dy, 0), h + min(-dy, 0))
            xs = slice(max(dx, 0), w + min(dx, 0))
            xd = slice(max(-dx, 0), w + min(-dx, 0))
            out[yd, xd] |= lab[yd, xd] != lab[ys, xs]
    return out


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5).astype(np.int64)


def flow_warp_labels(l1, f: FlowField) -> np.ndarray:
    """Carry frame-1 labels along the flow onto the frame-2 grid.

    Targets are rounded half-up; out-of-image targets and unknown-flow
    sources are dropped.  On collisions the source earliest in raster order
    wins.  Pixels nobody lands on are ``-1``.
    """
    lab = as_labels(l1)
    _check_shapes(lab, f.dx)
    h, w = lab.shape
    ys, xs = np.mgrid[0:h, 0:w]
    tx = _round_half_up(xs + f.dx.astype(np.float64))
    ty = _round_half_up(ys + f.dy.astype(np.float64))
    ok = f.valid() & (tx >= 0) & (tx < w) & (ty >= 0) & (ty < h)
    src = np.flatnonzero(ok)
    dst = (ty * w + tx).ravel()[src]
    # src is ascending, so the first occurrence of each target is the winner
    dst, first = np.unique(dst, return_index=True)
    out = np.full(h * w, UNLABELED, dtype=np.int64)
    out[dst] = lab.ravel()[src[first]]
    return out.reshape(h, w)


def _leakage(a: np.ndarray, b: np.ndarray) -> int:
    """Sum over overlapping (a, b) of min(|a & b|, |b| - |a & b|).

    Pixels where ``a`` is negative are ignored entirely.
    """
    keep = a.ravel() >= 0
    av = a.ravel()[keep]
    bv = b.ravel()[keep]
    if av.size == 0:
        return 0
    pairs, n_ab = np.unique(np.stack([av, bv]), axis=1, return_counts=True)
    b_ids, b_size = np.unique(bv, return_counts=True)
    size_of = b_size[np.searchsorted(b_ids, pairs[1])]
    return int(np.minimum(n_ab, size_of - n_ab).sum())


def muse(l1, l2, f: FlowField) -> float:
    """Motion undersegmentation error of ``l2`` against ``l1`` carried by ``f``."""
    a = as_labels(l1)
    b = as_labels(l2)
    _check_shapes(a, b, f.dx)
    warped = flow_warp_labels(a, f)
    return _leakage(warped, b) / b.size


def undersegmentation_error(seg, gt) -> float:
    """Leak of superpixels across ground-truth segments, per image pixel."""
    s = as_labels(seg)
    g = as_labels(gt)
    _check_shapes(s, g)
    return _leakage(g, s) / s.size


def flow_gradient_norm(f: FlowField) -> np.ndarray:
    """Per-pixel Frobenius norm of the flow Jacobian (central differences).

    Pixels whose stencil touches unknown flow contribute zero.
    """
    valid = f.valid()
    norm2 = np.zeros(f.shape)
    for comp in (f.dx, f.dy):
        c = np.where(valid, comp.astype(np.float64), 0.0)
        p = np.pad(c, 1, mode="edge")
        gx = (p[1:-1, 2:] - p[1:-1, :-2]) / 2
        gy = (p[2:, 1:-1] - p[:-2, 1:-1]) / 2
        norm2 += gx * gx + gy * gy
    stencil_ok = morphology.window_count(~valid, 3) == 0
    return np.where(stencil_ok, np.sqrt(norm2), 0.0)


def mde(b, f: FlowField) -> float:
    """Motion discontinuity error.

    Args:
        b: LabelMap / label array, or a boolean boundary map.
        f: ground-truth flow.

    Raises:
        DegenerateInputError: the flow has no gradient anywhere.
    """
    arr = np.asarray(b)
    boundary = arr if arr.dtype == bool else seg_to_boundary(b)
    _check_shapes(boundary, f.dx)
    weight = flow_gradient_norm(f)
    total = weight.sum()
    if not total > 0:
        raise DegenerateInputError("flow gradient is zero everywhere; MDE undefined")
    if not boundary.any():
        raise DegenerateInputError("segmentation has no boundary pixels")
    return float((weight * morphology.distance_transform(boundary)).sum() / total)


def boundary_recall(seg, gt_boundary: np.ndarray, tol: int = 2) -> float:
    """Fraction of ground-truth boundary pixels within Chebyshev ``tol`` of a predicted one."""
    gt = np.asarray(gt_boundary, dtype=bool)
    pred = seg_to_boundary(seg)
    _check_shapes(pred, gt)
    if not gt.any():
        raise ValueError("ground-truth boundary map is empty")
    if tol < 0:
        raise ValueError(f"tol must be >= 0, got {tol}")
    near = morphology.window_count(pred, 2 * tol + 1) > 0
    return float((near & gt).sum() / gt.sum())


def _grid_shape(width: int, height: int, k: int) -> tuple[int, int]:
    ideal = np.sqrt(k * width / height)
    best = None
    for cols in {int(np.floor(ideal)), int(np.ceil(ideal))}:
        cols = min(max(cols, 1), width, k)
        for rows in {k // cols, -(-k // cols)}:
            rows = min(max(rows, 1), height)
            aspect = abs(np.log((width / cols) / (height / rows)))
            key = (abs(rows * cols - k), round(aspect, 12), cols)
            if best is None or key < best[0]:
                best = (key, rows, cols)
    return best[1], best[2]


def box_baseline(width: int, height: int, k: int) -> np.ndarray:
    """Regular grid with about ``k`` near-square cells.

    Column count is ``sqrt(k * width / height)`` rounded either way, the row
    count follows from ``k``; of those candidates the one closest to ``k``
    cells (then squarest) wins.  Cell sides differ by at most one pixel.
    """
    if not 1 <= k <= width * height:
        raise ValueError(f"k must lie in [1, {width * height}], got {k}")
    rows, cols = _grid_shape(width, height, k)
    ry = (np.arange(height) * rows) // height
    cx = (np.arange(width) * cols) // width
    return (ry[:, None] * cols + cx[None, :]).astype(np.int64)
