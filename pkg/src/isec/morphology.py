"""Binary raster kernels: windowed edge density, thinning, border extraction.

3x3 neighbourhoods are packed into a 9-bit index: bit ``k`` holds the pixel
at offset ``(dy, dx)`` with ``k = 3 * (dy + 1) + (dx + 1)``, so the centre
is bit 4.  Pixels outside the image count as unset.
"""
from __future__ import annotations

import numpy as np
from scipy import ndimage

CENTER = 1 << 4
FULL = (1 << 9) - 1

# bit positions of the ring x1..x8: east, then counter-clockwise
_RING = (5, 2, 1, 0, 3, 6, 7, 8)

_STRUCT = {
    4: ndimage.generate_binary_structure(2, 1),
    8: ndimage.generate_binary_structure(2, 2),
}


def pack_neighborhood(bits: np.ndarray, replicate: bool = False) -> np.ndarray:
    """9-bit neighbourhood code of every pixel, as uint16.

    Outside pixels are unset, or copies of the nearest frame pixel when
    ``replicate`` is true.
    """
    b = np.asarray(bits, dtype=bool)
    h, w = b.shape
    p = np.pad(b, 1, mode="edge" if replicate else "constant").astype(np.uint16)
    idx = np.zeros((h, w), np.uint16)
    for k in range(9):
        dy, dx = divmod(k, 3)
        idx |= p[dy:dy + h, dx:dx + w] << k
    return idx


def _guo_hall_tables() -> tuple[np.ndarray, np.ndarray]:
    """Deletion tables for the two Guo-Hall sub-iterations, indexed by 9-bit code."""
    tables = np.zeros((2, 512), dtype=bool)
    for idx in range(512):
        if not idx & CENTER:
            continue
        x = [(idx >> k) & 1 for k in _RING]
        x.append(x[0])
        crossings = sum(1 for i in (0, 2, 4, 6) if not x[i] and (x[i + 1] or x[i + 2]))
        n1 = sum(1 for i in (0, 2, 4, 6) if x[i] or x[i + 1])
        n2 = sum(1 for i in (1, 3, 5, 7) if x[i] or x[i + 1])
        if crossings != 1 or not 2 <= min(n1, n2) <= 3:
            continue
        x1, x2, x3, x4, x5, x6, x7, x8 = x[:8]
        tables[0, idx] = not ((x2 or x3 or not x8) and x1)
        tables[1, idx] = not ((x6 or x7 or not x4) and x5)
    return tables[0], tables[1]


THIN_LUT = _guo_hall_tables()
BORDER_LUT = np.array([bool(i & CENTER) and i != FULL for i in range(512)])


def window_count(bits: np.ndarray, size: int) -> np.ndarray:
    """Number of set pixels in the ``size`` x ``size`` window centred on each pixel.

    The window is clipped at the image frame (outside counts as unset).
    """
    b = np.asarray(bits, dtype=np.int32)
    h, w = b.shape
    r = size // 2
    ii = np.zeros((h + 2 * r + 1, w + 2 * r + 1), np.int32)
    ii[r + 1:r + 1 + h, r + 1:r + 1 + w] = b
    np.cumsum(ii, axis=0, out=ii)
    np.cumsum(ii, axis=1, out=ii)
    return ii[size:, size:] - ii[:-size, size:] - ii[size:, :-size] + ii[:-size, :-size]


def edge_density(edges: np.ndarray, size: int) -> np.ndarray:
    """Mean edge occupancy over a ``size`` x ``size`` window.

    Clipped windows at the frame still divide by ``size**2``.
    """
    edges = np.asarray(edges, dtype=bool)
    if size < 1 or size % 2 == 0:
        raise ValueError(f"window size must be odd and positive, got {size}")
    if size > min(edges.shape):
        raise ValueError(f"window size {size} exceeds image side {min(edges.shape)}")
    return window_count(edges, size) / float(size * size)


def binarize(density: np.ndarray, tau: float) -> np.ndarray:
    return np.asarray(density) >= tau


def thin(bits: np.ndarray, passes: int | None = 1, replicate: bool = False) -> np.ndarray:
    """Guo-Hall parallel thinning.

    One pass is both sub-iterations.  ``passes=None`` runs to the fixpoint.
    Endpoints and connectivity are never removed.  With ``replicate``,
    structures touching the frame behave as if they continued past it, so
    they are not eaten away from the image edge.
    """
    out = np.array(bits, dtype=bool, copy=True)
    n = 0
    while passes is None or n < passes:
        changed = False
        for lut in THIN_LUT:
            kill = lut[pack_neighborhood(out, replicate)]
            if kill.any():
                out &= ~kill
                changed = True
        n += 1
        if not changed:
            break
    return out


def border_extract(bits: np.ndarray) -> np.ndarray:
    """Set pixels with at least one unset pixel among their 8 neighbours."""
    return BORDER_LUT[pack_neighborhood(bits)]


def connected_components(bits: np.ndarray, connectivity: int = 8) -> tuple[np.ndarray, int]:
    """Label connected set pixels.

    Returns:
        ``(labels, count)`` where labels run ``0..count-1`` in raster order of
        each component's first pixel and unset pixels hold ``-1``.
    """
    if connectivity not in _STRUCT:
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    lab, n = ndimage.label(np.asarray(bits, dtype=bool), structure=_STRUCT[connectivity])
    return lab.astype(np.int64) - 1, int(n)


def distance_transform(boundary: np.ndarray) -> np.ndarray:
    """Exact Euclidean distance from every pixel to the nearest set pixel."""
    b = np.asarray(boundary, dtype=bool)
    if not b.any():
        raise ValueError("distance transform needs at least one set pixel")
    return ndimage.distance_transform_edt(~b)
