"""VH-Connect: edge grouping by horizontal/vertical closings.

Per pyramid level the grayscale image is turned into a binary edge map
(morphological gradient + Otsu), which is then closed with every horizontal
and vertical line kernel.  Each 8-connected structure of a closed map whose
fill ratio passes the filter yields one box in original-image coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy import ndimage
from sklearn.base import BaseEstimator, TransformerMixin

from .boxes import BoundingBox, Proposal
from .exceptions import InvalidInputError
from .image import close, downscale, ellipse, hline, morphological_gradient, otsu_threshold, to_grayscale, vline
from .utils.validation import check_binary_image, check_gray_image, check_positive_int, check_ratio

__all__ = [
    "VHConfig",
    "ConnectedStructure",
    "prescale",
    "connected_components",
    "filter_structures",
    "generate",
    "VHConnect",
]

_EIGHT = np.ones((3, 3), dtype=bool)
# absorbs float noise in back-mapping so exact multiples do not spill a pixel
_EPS = 1e-9


@dataclass(frozen=True)
class VHConfig:
    se_size: int = 3
    scales: tuple = (1.0, 0.5, 0.25)
    kernel_lengths: tuple = (9, 15, 30, 45)
    fill_ratio: float = 0.5
    max_side: int = 1024

    def __post_init__(self):
        check_positive_int(self.se_size, "se_size")
        check_positive_int(self.max_side, "max_side")
        scales = tuple(float(check_ratio(s, "scale", 0.0, 1.0, low_inclusive=False)) for s in self.scales)
        if not scales:
            raise InvalidInputError("scales must be non-empty")
        lengths = tuple(check_positive_int(k, "kernel length", minimum=2) for k in self.kernel_lengths)
        if not lengths:
            raise InvalidInputError("kernel_lengths must be non-empty")
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "kernel_lengths", lengths)
        object.__setattr__(self, "fill_ratio", check_ratio(self.fill_ratio, "fill_ratio"))


@dataclass(frozen=True)
class ConnectedStructure:
    pixel_count: int
    bbox: BoundingBox

    @property
    def fill_ratio(self):
        return self.pixel_count / self.bbox.area


def prescale(img, max_side=1024):
    """Shrink so that the longer side is at most ``max_side``.

    Returns ``(image, factor)``; images already within the limit come back
    unchanged with factor 1.0.
    """
    img = check_gray_image(img)
    max_side = check_positive_int(max_side, "max_side")
    longest = max(img.shape)
    if longest <= max_side:
        return img, 1.0
    factor = max_side / longest
    return downscale(img, factor), factor


def _label_stats(binary):
    """Label 8-connected 1-regions; return (counts, y0, x0, y1, x1) arrays."""
    labels, n = ndimage.label(binary, structure=_EIGHT)
    if n == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty, empty, empty
    counts = np.bincount(labels.ravel(), minlength=n + 1)[1:].astype(np.int64)
    slices = ndimage.find_objects(labels)
    bounds = np.array([(sy.start, sx.start, sy.stop, sx.stop) for sy, sx in slices], dtype=np.int64)
    return counts, bounds[:, 0], bounds[:, 1], bounds[:, 2], bounds[:, 3]


def connected_components(binary):
    """8-connected components of the 1-pixels, sorted by bbox ``(y_min, x_min)``."""
    binary = check_binary_image(binary)
    counts, y0, x0, y1, x1 = _label_stats(binary)
    order = np.lexsort((counts, x1, y1, x0, y0))
    return [
        ConnectedStructure(int(counts[i]), BoundingBox(int(x0[i]), int(y0[i]), int(x1[i]), int(y1[i])))
        for i in order
    ]


def filter_structures(structures, p):
    """Keep structures with ``pixel_count > p * bbox_area`` (strict)."""
    p = check_ratio(p, "p")
    return [s for s in structures if s.pixel_count > p * s.bbox.area]


def _edge_map(gray, se):
    grad = morphological_gradient(gray, se)
    _, binary = otsu_threshold(grad)
    return binary


def _sweep(gray, cfg, width, height, factor):
    """Yield ``(box_tuple, pixel_count, bbox_area)`` over the S x L x {h, v} sweep."""
    gradient_se = ellipse(cfg.se_size, cfg.se_size)
    for s in cfg.scales:
        level = downscale(gray, s) if s != 1.0 else gray
        edges = _edge_map(level, gradient_se)
        if not edges.any():
            continue
        f = s * factor
        for length in cfg.kernel_lengths:
            for kernel in (hline(length), vline(length)):
                counts, y0, x0, y1, x1 = _label_stats(close(edges, kernel))
                area = (y1 - y0) * (x1 - x0)
                keep = counts > cfg.fill_ratio * area
                for c, a, by0, bx0, by1, bx1 in zip(
                    counts[keep], area[keep], y0[keep], x0[keep], y1[keep], x1[keep]
                ):
                    box = (
                        max(0, math.floor(bx0 / f + _EPS)),
                        max(0, math.floor(by0 / f + _EPS)),
                        min(width, math.ceil(bx1 / f - _EPS)),
                        min(height, math.ceil(by1 / f - _EPS)),
                    )
                    yield box, int(c), int(a)


def generate(image, cfg=None, image_id=""):
    """Run VH-Connect on a color or gray image and return ranked proposals.

    Exact duplicate boxes keep their first occurrence in sweep order.  The
    result is sorted by descending fill ratio, then descending pixel count,
    then box position, and ranked from 1.
    """
    cfg = VHConfig() if cfg is None else cfg
    gray = to_grayscale(image)
    height, width = gray.shape
    scaled, factor = prescale(gray, cfg.max_side)

    seen = {}
    for box, count, area in _sweep(scaled, cfg, width, height, factor):
        if box not in seen:
            seen[box] = (count, area)

    ordered = sorted(
        seen.items(),
        key=lambda item: (-item[1][0] / item[1][1], -item[1][0], item[0][1], item[0][0], item[0][3], item[0][2]),
    )
    return [Proposal(image_id, BoundingBox(*box), rank, "vh") for rank, (box, _) in enumerate(ordered, start=1)]


def debug_stages(image, cfg=None):
    """Intermediate maps per scale: ``{scale: (gradient, otsu_threshold, edge_map)}``."""
    cfg = VHConfig() if cfg is None else cfg
    scaled, _ = prescale(to_grayscale(image), cfg.max_side)
    se = ellipse(cfg.se_size, cfg.se_size)
    out = {}
    for s in cfg.scales:
        level = downscale(scaled, s) if s != 1.0 else scaled
        grad = morphological_gradient(level, se)
        t, edges = otsu_threshold(grad)
        out[s] = (grad, t, edges)
    return out


class VHConnect(BaseEstimator, TransformerMixin):
    """Estimator wrapper around :func:`generate`.

    ``transform`` maps a sequence of images to a list of ``(n_i, 4)`` integer
    arrays of ranked boxes ``(x_min, y_min, x_max, y_max)``.  The generator has
    no learned state, so ``fit`` only validates the parameters.

    Parameters
    ----------
    se_size : int, default=3
        Side of the elliptical element used for the morphological gradient.
    scales : tuple of float, default=(1.0, 0.5, 0.25)
        Pyramid levels, each in (0, 1].
    kernel_lengths : tuple of int, default=(9, 15, 30, 45)
        Lengths of the horizontal and vertical closing kernels.
    fill_ratio : float, default=0.5
        A structure is kept when its pixel count exceeds this fraction of its
        bounding-box area.
    max_side : int, default=1024
        Inputs are shrunk so that their longer side does not exceed this.
    """

    def __init__(self, se_size=3, scales=(1.0, 0.5, 0.25), kernel_lengths=(9, 15, 30, 45), fill_ratio=0.5,
                 max_side=1024):
        self.se_size = se_size
        self.scales = scales
        self.kernel_lengths = kernel_lengths
        self.fill_ratio = fill_ratio
        self.max_side = max_side

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.requires_fit = False
        return tags

    def _make_config(self):
        return VHConfig(
            se_size=self.se_size,
            scales=tuple(self.scales),
            kernel_lengths=tuple(self.kernel_lengths),
            fill_ratio=self.fill_ratio,
            max_side=self.max_side,
        )

    def fit(self, X=None, y=None):
        self.config_ = self._make_config()
        return self

    def generate(self, image, image_id=""):
        cfg = getattr(self, "config_", None) or self._make_config()
        return generate(image, cfg, image_id)

    def transform(self, X):
        out = []
        for image in X:
            props = self.generate(image)
            arr = np.array([p.box.as_tuple() for p in props], dtype=np.int64).reshape(-1, 4)
            out.append(arr)
        return out
