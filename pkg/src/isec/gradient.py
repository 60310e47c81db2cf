"""Colour gradient extraction.

Each RGB channel is smoothed and differentiated separately; per pixel the
channel with the strongest response supplies both magnitude and direction.
"""
from __future__ import annotations

import numpy as np
from scipy import ndimage

from .core import GradientField, RasterImage

SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
SOBEL_Y = SOBEL_X.T

TRUNCATE = 3.0


def smooth(img, sigma: float = 1.0) -> np.ndarray:
    """Gaussian-smooth every channel, replicating the border.

    Args:
        img: RasterImage or (H, W, C) array.
        sigma: standard deviation in pixels; the kernel is cut at 3 sigma.

    Returns:
        float64 array with the input's shape.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    a = np.asarray(img, dtype=np.float64)
    if a.ndim == 2:
        a = a[:, :, None]
    out = np.empty_like(a)
    for c in range(a.shape[2]):
        ndimage.gaussian_filter(a[:, :, c], sigma, output=out[:, :, c], mode="nearest", truncate=TRUNCATE)
    return out.reshape(np.shape(img)) if np.ndim(img) == 2 else out


def _sobel(plane: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = np.pad(plane, 1, mode="edge")
    # Separable Sobel: [1 2 1] smoothing times [-1 0 1] difference.
    rows = p[:-2] + 2 * p[1:-1] + p[2:]
    gx = rows[:, 2:] - rows[:, :-2]
    cols = p[:, :-2] + 2 * p[:, 1:-1] + p[:, 2:]
    gy = cols[2:] - cols[:-2]
    return gx, gy


def fold_angle(gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    theta = np.arctan2(gy, gx)
    theta = np.where(theta < 0, theta + np.pi, theta)
    # atan2 may return exactly pi for negative gx with gy == 0.
    return np.where(theta >= np.pi, 0.0, theta)


def channel_gradients(img) -> list[tuple[np.ndarray, np.ndarray]]:
    """Sobel magnitude and folded orientation for each channel.

    Border pixels see replicated neighbours, so edges may sit on the frame.
    """
    a = np.asarray(img, dtype=np.float64)
    if a.ndim != 3:
        raise ValueError(f"expected an (H, W, C) array, got shape {a.shape}")
    out = []
    for c in range(a.shape[2]):
        gx, gy = _sobel(a[:, :, c])
        out.append((np.hypot(gx, gy), fold_angle(gx, gy)))
    return out


def fuse_max(channels) -> GradientField:
    """Keep, per pixel, the channel with the largest magnitude.

    Ties go to the earliest channel (R, then G, then B).
    """
    mags = np.stack([np.asarray(m, dtype=np.float64) for m, _ in channels])
    oris = np.stack([np.asarray(o, dtype=np.float64) for _, o in channels])
    if mags.shape != oris.shape:
        raise ValueError("magnitude and orientation stacks differ in shape")
    # argmax returns the first maximum, which is the R > G > B tie-break.
    idx = np.argmax(mags, axis=0)
    mag = np.take_along_axis(mags, idx[None], 0)[0]
    ori = np.take_along_axis(oris, idx[None], 0)[0]
    return GradientField(mag, ori)


def normalize(g: GradientField) -> GradientField:
    """Scale magnitudes into [0, 1] by the image maximum (all-zero stays zero)."""
    peak = g.magnitude.max()
    if peak <= 0:
        return g
    return GradientField(g.magnitude / peak, g.orientation)


def extract_gradient(img: RasterImage, sigma: float | None = 1.0) -> GradientField:
    """Smoothed, fused and normalised colour gradient of an image.

    ``sigma=None`` skips smoothing.
    """
    a = np.asarray(img, dtype=np.float64)
    if sigma is not None:
        a = smooth(a, sigma)
    return normalize(fuse_max(channel_gradients(a)))
