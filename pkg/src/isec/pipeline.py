"""Superpixel segmentation from accumulated edge-cluster outlines.

Edges are selected at increasingly strict thresholds.  Each selection is
blurred into an edge-density map, binarised into clusters, thinned back
by the blur radius, and the cluster outlines are OR-ed into an
accumulator.  The accumulated outline mask is finally cleaned and turned
into a labelled partition.
"""
from __future__ import annotations

import heapq
import time
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import morphology
from .core import GradientField, IsecParams, RasterImage, relabel_dense, validate_params
from .gradient import extract_gradient

_EIGHT = ndimage.generate_binary_structure(2, 2)


@dataclass(frozen=True)
class IterationTrace:
    index: int
    low: float
    high: float
    filter_size: int
    edge_pixels: int
    border_pixels: int


def _direction_bins(orientation: np.ndarray) -> np.ndarray:
    """Quantise [0, pi) into 0: horizontal, 1: 45 deg, 2: vertical, 3: 135 deg."""
    return (np.floor(orientation / (np.pi / 4) + 0.5).astype(np.int64)) % 4


# neighbour offsets (dy, dx) along the gradient for each direction bin;
# y grows downwards, so 45 degrees points to (+1, +1)
_STEPS = ((0, 1), (1, 1), (1, 0), (1, -1))


def non_maximum_suppression(g: GradientField) -> np.ndarray:
    """Pixels that peak along their quantised gradient direction.

    A pixel must be >= its backward neighbour and > its forward neighbour,
    so a two-pixel plateau keeps exactly one pixel.
    """
    mag = g.magnitude
    h, w = mag.shape
    p = np.pad(mag, 1, mode="constant")
    bins = _direction_bins(g.orientation)
    keep = np.zeros((h, w), dtype=bool)
    for b, (dy, dx) in enumerate(_STEPS):
        fwd = p[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
        bwd = p[1 - dy:1 - dy + h, 1 - dx:1 - dx + w]
        keep |= (bins == b) & (mag >= bwd) & (mag > fwd)
    return keep & (mag > 0)


def hysteresis(candidates: np.ndarray, mag: np.ndarray, low: float, high: float) -> np.ndarray:
    """Keep strong candidates and weak ones 8-connected to a strong one."""
    weak = candidates & (mag >= low)
    strong = weak & (mag >= high)
    if not strong.any():
        return np.zeros_like(weak)
    lab, n = ndimage.label(weak, structure=_EIGHT)
    hit = np.zeros(n + 1, dtype=bool)
    hit[lab[strong]] = True
    hit[0] = False
    return hit[lab]


def _select(g: GradientField, low: float, high: float) -> np.ndarray:
    return hysteresis(non_maximum_suppression(g), g.magnitude, low, high)


def select_edges(g: GradientField, low: float, high: float) -> np.ndarray:
    """Canny-style edge selection on a normalised gradient field."""
    if not 0 < low < high <= 1:
        raise ValueError(f"need 0 < low < high <= 1, got low={low}, high={high}")
    return _select(g, low, high)


def cluster_borders(edges: np.ndarray, size: int, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Density, binarise, thin and outline an edge map.

    Returns the outline and the (binarised, pre-thinning) cluster mask.
    """
    clusters = morphology.binarize(morphology.edge_density(edges, size), tau)
    shaped = morphology.thin(clusters, (size - 1) // 2, replicate=True)
    return morphology.border_extract(shaped), clusters


def isec_iteration(g: GradientField, low: float, high: float, size: int, tau: float) -> np.ndarray:
    """One loop body: edge selection followed by cluster outline extraction."""
    return cluster_borders(select_edges(g, low, high), size, tau)[0]


def accumulate(spx: np.ndarray, c: np.ndarray) -> np.ndarray:
    spx = np.asarray(spx, dtype=bool)
    c = np.asarray(c, dtype=bool)
    if spx.shape != c.shape:
        raise ValueError(f"shape mismatch: {spx.shape} vs {c.shape}")
    return spx | c


def _assign_borders(regions: np.ndarray) -> np.ndarray:
    """Give every ``-1`` pixel the smallest label among its labelled 4-neighbours.

    Diagonal-only pixels wait until a 4-neighbour is labelled, so every
    region grows 4-connected.  Rounds are synchronous.
    """
    lab = regions.copy()
    h, w = lab.shape
    big = np.iinfo(np.int64).max
    while True:
        todo = lab < 0
        if not todo.any():
            return lab
        p = np.full((h + 2, w + 2), big, np.int64)
        p[1:-1, 1:-1] = np.where(todo, big, lab)
        best = np.minimum.reduce([p[:-2, 1:-1], p[2:, 1:-1], p[1:-1, :-2], p[1:-1, 2:]])
        fill = todo & (best != big)
        if not fill.any():
            # only possible when there is no region at all
            lab[todo] = 0
            return lab
        lab[fill] = best[fill]


def _adjacency(lab: np.ndarray) -> dict[tuple[int, int], int]:
    pairs = []
    for a, b in ((lab[:, :-1], lab[:, 1:]), (lab[:-1], lab[1:])):
        diff = a != b
        lo = np.minimum(a[diff], b[diff])
        hi = np.maximum(a[diff], b[diff])
        pairs.append(np.stack([lo, hi], axis=1))
    pairs = np.concatenate(pairs)
    if not len(pairs):
        return {}
    uniq, counts = np.unique(pairs, axis=0, return_counts=True)
    return {(int(a), int(b)): int(c) for (a, b), c in zip(uniq, counts)}


def absorb_small(lab: np.ndarray, min_area: int) -> np.ndarray:
    """Merge regions smaller than ``min_area`` into a 4-adjacent neighbour.

    Smallest regions go first (ties: smaller label); each joins the
    neighbour sharing the most 4-adjacent pixel pairs (ties: smaller label).
    """
    n = int(lab.max()) + 1
    area = np.bincount(lab.ravel(), minlength=n).tolist()
    if min_area <= 1 or min(area) >= min_area:
        return lab
    nbrs: list[dict[int, int]] = [dict() for _ in range(n)]
    for (a, b), c in _adjacency(lab).items():
        nbrs[a][b] = c
        nbrs[b][a] = c
    parent = list(range(n))
    alive = [True] * n
    heap = [(area[i], i) for i in range(n) if area[i] < min_area]
    heapq.heapify(heap)
    while heap:
        a_area, r = heapq.heappop(heap)
        if not alive[r] or a_area != area[r] or area[r] >= min_area or not nbrs[r]:
            continue
        target = min(nbrs[r].items(), key=lambda kv: (-kv[1], kv[0]))[0]
        # fold r into target
        alive[r] = False
        parent[r] = target
        area[target] += area[r]
        for q, c in nbrs[r].items():
            if q == target:
                continue
            nbrs[q].pop(r, None)
            nbrs[q][target] = nbrs[q].get(target, 0) + c
            nbrs[target][q] = nbrs[target].get(q, 0) + c
        nbrs[target].pop(r, None)
        nbrs[r] = {}
        if area[target] < min_area:
            heapq.heappush(heap, (area[target], target))
    root = np.arange(n)
    for i in range(n):
        j = i
        while parent[j] != j:
            j = parent[j]
        root[i] = j
    return root[lab]


def refine(accumulated: np.ndarray, min_area: int = 1) -> np.ndarray:
    """Turn an accumulated outline mask into a total 4-connected partition.

    Steps: thin outlines to unit width, drop isolated outline pixels, label
    the 4-connected complement, hand each outline pixel to an adjacent
    region, then absorb regions below ``min_area``.
    """
    mask = np.asarray(accumulated, dtype=bool)
    mask = morphology.thin(mask, None, replicate=True)
    mask &= morphology.window_count(mask, 3) > 1
    regions, count = morphology.connected_components(~mask, 4)
    if count == 0:
        return np.zeros(mask.shape, np.int64)
    lab = _assign_borders(regions)
    lab = absorb_small(lab, min_area)
    return relabel_dense(lab)


def _fit_filter(size: int, shape: tuple[int, int]) -> int:
    side = min(shape)
    if size > side:
        size = side if side % 2 else side - 1
    return size


def segment(img: RasterImage, p: IsecParams | None = None, timings: dict | None = None):
    """Segment an image into superpixels.

    Args:
        img: input image.
        p: loop parameters; defaults when omitted.
        timings: optional dict that receives per-stage wall time in seconds.

    Returns:
        ``(labels, traces)``: dense int64 label array and one
        :class:`IterationTrace` per loop iteration.
    """
    p = validate_params(p or IsecParams())
    clock = time.perf_counter
    t0 = clock()
    g = extract_gradient(img, p.sigma)
    t1 = clock()
    shape = g.shape
    spx = np.zeros(shape, dtype=bool)
    size = _fit_filter(p.filter_size, shape)
    min_size = _fit_filter(p.min_filter_size, shape)
    nms = non_maximum_suppression(g)
    traces = []
    for i, k in enumerate(p.thresholds()):
        high = min(k * p.high_low_ratio, 1.0)
        edges = hysteresis(nms, g.magnitude, k, high)
        borders, _ = cluster_borders(edges, size, p.ed_binarize_threshold)
        spx |= borders
        traces.append(IterationTrace(i, k, high, size, int(edges.sum()), int(borders.sum())))
        if size > min_size:
            size -= 2
    t2 = clock()
    labels = refine(spx, p.min_superpixel_area)
    t3 = clock()
    if timings is not None:
        timings.update(gradient=t1 - t0, iterations=t2 - t1, refine=t3 - t2, total=t3 - t0)
    return labels, traces
