"""Circular region merging: turn kept particles into binary pseudo-masks.

Masks are plain boolean arrays of shape (height, width), indexed [y, x].
Pixel coordinates refer to integer pixel centers.
"""

import math

import numpy as np


def select_keyframes(total_frames, stride):
    """Indices of the frames kept after subsampling: 0, stride, 2*stride, ...

    An empty sequence yields an empty list.
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    return list(range(0, total_frames, stride))


def _stamp_disc(mask, center, radius):
    """OR a filled disc into `mask` in place. Pixels fully off-frame are clipped."""
    height, width = mask.shape
    cx, cy = float(center[0]), float(center[1])
    x0 = max(int(math.ceil(cx - radius)), 0)
    x1 = min(int(math.floor(cx + radius)), width - 1)
    y0 = max(int(math.ceil(cy - radius)), 0)
    y1 = min(int(math.floor(cy + radius)), height - 1)
    if x0 > x1 or y0 > y1:
        return
    ys = np.arange(y0, y1 + 1, dtype=np.float64)[:, None]
    xs = np.arange(x0, x1 + 1, dtype=np.float64)[None, :]
    inside = (xs - cx) ** 2 + (ys - cy) ** 2 <= radius * radius
    np.logical_or(mask[y0 : y1 + 1, x0 : x1 + 1], inside, out=mask[y0 : y1 + 1, x0 : x1 + 1])


def rasterize_disc(center, radius, width, height):
    """Boolean mask of the disc around `center` = (x, y).

    A pixel (px, py) is foreground iff (px-x)^2 + (py-y)^2 <= radius^2,
    with inclusive boundary. Discs lying entirely outside the frame give
    an all-background mask.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    mask = np.zeros((height, width), dtype=bool)
    _stamp_disc(mask, center, radius)
    return mask


def circular_region_merge(kept_particles, radius, width, height):
    """Pixelwise union of fixed-radius discs centered at the kept particles.

    `kept_particles` is an iterable of (x, y) positions. An empty iterable
    produces an all-background mask. The result does not depend on
    particle order.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    mask = np.zeros((height, width), dtype=bool)
    for center in kept_particles:
        _stamp_disc(mask, center, radius)
    return mask
