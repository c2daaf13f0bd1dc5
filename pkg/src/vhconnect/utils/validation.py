"""Input validation helpers, in the spirit of ``sklearn.utils.validation``."""

import numbers

import numpy as np

from ..exceptions import InvalidInputError


def check_gray_image(img, name="img"):
    """Return ``img`` as a C-contiguous 2-D ``uint8`` array.

    Accepts any array-like of integers in [0, 255]. Raises
    :class:`InvalidInputError` on wrong rank, empty shape or out-of-range values.
    """
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidInputError(f"{name} is empty (shape {arr.shape})")
    if arr.dtype != np.uint8:
        if arr.dtype.kind not in "iub":
            if arr.dtype.kind == "f" and np.all(arr == np.round(arr)):
                pass
            else:
                raise InvalidInputError(f"{name} must hold integer intensities, got {arr.dtype}")
        if arr.min() < 0 or arr.max() > 255:
            raise InvalidInputError(f"{name} intensities must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return np.ascontiguousarray(arr)


def check_binary_image(img, name="binary"):
    arr = check_gray_image(img, name)
    if arr.max() > 1:
        raise InvalidInputError(f"{name} must only contain 0 and 1")
    return arr


def check_color_image(img, name="image"):
    """Return ``img`` as an ``(H, W, 3)`` ``uint8`` array."""
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise InvalidInputError(f"{name} must have shape (H, W, 3), got {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InvalidInputError(f"{name} is empty (shape {arr.shape})")
    if arr.dtype != np.uint8:
        if arr.min() < 0 or arr.max() > 255:
            raise InvalidInputError(f"{name} intensities must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def check_ratio(value, name, low=0.0, high=1.0, low_inclusive=True):
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise InvalidInputError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    ok_low = value >= low if low_inclusive else value > low
    if not (ok_low and value <= high):
        bracket = "[" if low_inclusive else "("
        raise InvalidInputError(f"{name} must lie in {bracket}{low}, {high}], got {value}")
    return value


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise InvalidInputError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise InvalidInputError(f"{name} must be >= {minimum}, got {value}")
    return int(value)
