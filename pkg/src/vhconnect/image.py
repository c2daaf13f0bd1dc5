"""Pixel-level primitives: grayscale conversion, morphology, Otsu, rescaling.

Gray images are 2-D ``uint8`` numpy arrays indexed ``[y, x]``; binary images
use the same representation restricted to {0, 1}.  All morphology reads
outside the image replicate the nearest border pixel.
"""

from dataclasses import dataclass
import math

import numpy as np

from .exceptions import InvalidInputError
from .utils.validation import check_color_image, check_gray_image, check_positive_int

__all__ = [
    "StructuringElement",
    "ellipse",
    "hline",
    "vline",
    "to_grayscale",
    "dilate",
    "erode",
    "morphological_gradient",
    "close",
    "otsu_threshold",
    "downscale",
]

_LUMA = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class StructuringElement:
    """A morphology neighbourhood as a set of ``(dx, dy)`` offsets.

    ``descriptor`` is informational, e.g. ``("ellipse", 3, 3)`` or ``("hline", 9)``.
    """

    offsets: tuple
    descriptor: tuple = ("custom",)

    def __post_init__(self):
        offs = tuple(sorted({(int(dx), int(dy)) for dx, dy in self.offsets}))
        if not offs:
            raise InvalidInputError("structuring element needs at least one offset")
        object.__setattr__(self, "offsets", offs)

    def reflected(self):
        return StructuringElement(tuple((-dx, -dy) for dx, dy in self.offsets), ("reflected",) + self.descriptor)

    @property
    def is_symmetric(self):
        return set(self.offsets) == {(-dx, -dy) for dx, dy in self.offsets}

    def __len__(self):
        return len(self.offsets)


def _centered_range(n):
    return range(-(n // 2), n - n // 2)


def ellipse(width, height=None):
    """Elliptical element inscribed in a centred ``width x height`` grid.

    An offset is kept when ``(dx/(w/2))**2 + (dy/(h/2))**2 <= 1``; for
    ``ellipse(3, 3)`` that is the full 3x3 square.
    """
    if height is None:
        height = width
    w = check_positive_int(width, "width")
    h = check_positive_int(height, "height")
    rx, ry = w / 2.0, h / 2.0
    offsets = [
        (dx, dy)
        for dy in _centered_range(h)
        for dx in _centered_range(w)
        if (dx / rx) ** 2 + (dy / ry) ** 2 <= 1.0
    ]
    return StructuringElement(tuple(offsets), ("ellipse", w, h))


def hline(length):
    """Horizontal line ``[length x 1]``."""
    n = check_positive_int(length, "length")
    return StructuringElement(tuple((dx, 0) for dx in _centered_range(n)), ("hline", n))


def vline(length):
    """Vertical line ``[1 x length]``."""
    n = check_positive_int(length, "length")
    return StructuringElement(tuple((0, dy) for dy in _centered_range(n)), ("vline", n))


def to_grayscale(image):
    """Convert an ``(H, W, 3)`` RGB image to BT.601 luma, rounded half-up.

    2-D input is treated as already gray and returned validated.
    """
    arr = np.asarray(image)
    if arr.ndim == 2:
        return check_gray_image(arr, "image")
    arr = check_color_image(arr)
    rgb = arr.astype(np.float64)
    gray = _LUMA[0] * rgb[..., 0] + _LUMA[1] * rgb[..., 1] + _LUMA[2] * rgb[..., 2]
    # 1e-9 absorbs representation error so exact .5 values round up
    gray = np.floor(gray + 0.5 + 1e-9)
    return np.clip(gray, 0, 255).astype(np.uint8)


def _morph(img, se, reduce_fn, init):
    h, w = img.shape
    dxs = [dx for dx, _ in se.offsets]
    dys = [dy for _, dy in se.offsets]
    px = max(max(dxs), -min(dxs), 0)
    py = max(max(dys), -min(dys), 0)
    padded = np.pad(img, ((py, py), (px, px)), mode="edge") if (px or py) else img
    out = np.full_like(img, init)
    for dx, dy in se.offsets:
        reduce_fn(out, padded[py + dy : py + dy + h, px + dx : px + dx + w], out=out)
    return out


def dilate(img, se):
    """``out(x, y) = max over (dx, dy) in se of img(x + dx, y + dy)``."""
    img = check_gray_image(img)
    return _morph(img, se, np.maximum, 0)


def erode(img, se):
    """``out(x, y) = min over (dx, dy) in se of img(x + dx, y + dy)``."""
    img = check_gray_image(img)
    return _morph(img, se, np.minimum, 255)


def morphological_gradient(img, se):
    """Dilation minus erosion; a thick, orientation-free edge map."""
    img = check_gray_image(img)
    return dilate(img, se) - erode(img, se)


def close(img, se):
    """Morphological closing: dilation followed by erosion.

    The dilation uses the reflected element so the pair forms a true closing
    (extensive and idempotent) for asymmetric elements such as even-length
    lines.  For symmetric elements this is exactly ``erode(dilate(img))``.
    """
    img = check_gray_image(img)
    dil_se = se if se.is_symmetric else se.reflected()
    return erode(dilate(img, dil_se), se)


def otsu_threshold(img):
    """Global Otsu threshold over the 256-bin histogram.

    Returns ``(T, binary)`` where ``binary = img > T``.  ``T`` maximises the
    between-class variance of the split ``{<= T} | {> T}``, smallest ``T`` on
    ties.  The comparison is done in exact integer arithmetic.  A
    single-intensity image yields ``T = that intensity`` and an all-zero map.
    """
    img = check_gray_image(img)
    hist = np.bincount(img.ravel(), minlength=256)
    present = np.flatnonzero(hist)
    if len(present) == 1:
        t = int(present[0])
        return t, np.zeros_like(img)

    counts = [int(c) for c in hist]
    total_n = sum(counts)
    total_s = sum(i * c for i, c in enumerate(counts))
    # sigma_b^2 * N^2 = (s0*n1 - s1*n0)^2 / (n0*n1); compare fractions by cross-multiplying
    best_t, best_num, best_den = 0, 0, 1
    n0 = s0 = 0
    for t in range(255):
        n0 += counts[t]
        s0 += t * counts[t]
        n1 = total_n - n0
        if n0 == 0 or n1 == 0:
            continue
        s1 = total_s - s0
        num = (s0 * n1 - s1 * n0) ** 2
        den = n0 * n1
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t, (img > best_t).astype(np.uint8)


def _area_weights(n_src, n_dst):
    # overlap length of source cell j with destination cell i, in source units
    edges = np.arange(n_dst + 1, dtype=np.float64) * (n_src / n_dst)
    lo = np.maximum(edges[:-1, None], np.arange(n_src)[None, :])
    hi = np.minimum(edges[1:, None], np.arange(1, n_src + 1)[None, :])
    return np.clip(hi - lo, 0.0, None)


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def downscale(img, s):
    """Shrink by factor ``s`` in (0, 1] using area averaging.

    Output size is ``max(1, round(w*s)) x max(1, round(h*s))`` with halves
    rounded up; every output pixel is the area-weighted mean of the source
    rectangle it covers, rounded half-up.
    """
    img = check_gray_image(img)
    if isinstance(s, bool) or not isinstance(s, (int, float, np.floating, np.integer)):
        raise InvalidInputError(f"scale must be a number, got {s!r}")
    s = float(s)
    if not (0.0 < s <= 1.0):
        raise InvalidInputError(f"scale must lie in (0, 1], got {s}")
    h, w = img.shape
    oh = max(1, _round_half_up(h * s))
    ow = max(1, _round_half_up(w * s))
    if (oh, ow) == (h, w):
        return img.copy()
    wy = _area_weights(h, oh)
    wx = _area_weights(w, ow)
    acc = wy @ img.astype(np.float64) @ wx.T
    area = (h / oh) * (w / ow)
    out = np.floor(acc / area + 0.5 + 1e-9)
    return np.clip(out, 0, 255).astype(np.uint8)
