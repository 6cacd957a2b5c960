"""
Flat grayscale morphology on scalar fields

dilate(f, B)(x) = max{ f(y) : y - x in B }
erode(f, B)(x)  = min{ f(y) : y - x in B }

Out-of-image offsets are ignored (neighborhood clipping); a pixel whose
clipped neighborhood is empty raises StructuringElementError. Every output
value is one of the input values, so all engines agree bit for bit.

Engines:
- "shift":     one shifted max/min per SE offset (any SE)
- "separable": scipy 1-D running max/min per axis (chessboard balls only)
- "naive":     per-pixel brute force, the reference for equivalence tests
"""

from typing import Optional, Tuple

import numpy as np
from scipy import ndimage

from constants import EUCLIDEAN_SLACK, NORM_CHESSBOARD
from errors import ImageValidationError, StructuringElementError
from structuring import StructuringElement
from utils.logger import get_logger

logger = get_logger(__name__)

ENGINES = ("auto", "shift", "separable", "naive")

_FILTERS = {
    "max": (np.maximum, -np.inf, ndimage.maximum_filter1d),
    "min": (np.minimum, np.inf, ndimage.minimum_filter1d),
}


def _shift_slices(shape: Tuple[int, ...], offset: Tuple[int, ...]) -> Optional[Tuple[tuple, tuple]]:
    """(destination, source) slices pairing x with x + offset, None if they never overlap"""
    dst, src = [], []
    for extent, o in zip(shape, offset):
        if abs(o) >= extent:
            return None
        dst.append(slice(max(0, -o), extent - max(0, o)))
        src.append(slice(max(0, o), extent + min(0, o)))
    return tuple(dst), tuple(src)


def _check_field(field: np.ndarray, ndim: int) -> np.ndarray:
    field = np.asarray(field, dtype=np.float64)
    if field.ndim < ndim:
        raise ImageValidationError(f"field of rank {field.ndim} cannot hold a rank-{ndim} image")
    if not np.all(np.isfinite(field)):
        index = tuple(int(v) for v in np.argwhere(~np.isfinite(field))[0][:ndim])
        raise ImageValidationError(f"non-finite value at pixel {index}", index=index)
    return field


def _raise_uncovered(covered: np.ndarray, se: StructuringElement) -> None:
    if not np.all(covered):
        index = tuple(int(v) for v in np.argwhere(~covered)[0])
        raise StructuringElementError(
            f"empty neighborhood at pixel {index} for {se.describe()}", index=index
        )


def _separable_ok(se: StructuringElement) -> bool:
    return se.is_ball and se.norm == NORM_CHESSBOARD


def extremum_filter(
    field: np.ndarray,
    se: StructuringElement,
    filtertype: str,
    ndim: Optional[int] = None,
    engine: str = "auto",
) -> np.ndarray:
    """
    Neighborhood max or min of a field

    Args:
        field: array whose first `ndim` axes are image axes; trailing axes
            (e.g. channels) are filtered independently
        se: structuring element
        filtertype: "max" (dilation) or "min" (erosion)
        ndim: image rank, defaults to field.ndim
        engine: one of ENGINES

    Returns:
        Filtered float64 array of the same shape
    """
    if filtertype not in _FILTERS:
        raise ValueError(f"unsupported filter type {filtertype!r}")
    if engine not in ENGINES:
        raise ValueError(f"unsupported engine {engine!r}, expected one of {ENGINES}")

    ndim = np.ndim(field) if ndim is None else ndim
    field = _check_field(field, ndim)
    reduce, fill, filter1d = _FILTERS[filtertype]

    if engine == "auto":
        engine = "separable" if _separable_ok(se) else "shift"

    if engine == "naive":
        return _extremum_naive(field, se, filtertype, ndim)

    if engine == "separable":
        if not _separable_ok(se):
            raise StructuringElementError(f"separable engine needs a chessboard ball, got {se.describe()}")
        # the chessboard ball contains the origin, so no neighborhood is empty
        size = 2 * int(np.floor(se.radius + EUCLIDEAN_SLACK)) + 1
        out = field
        for axis in range(ndim):
            out = filter1d(out, size, axis=axis, mode="constant", cval=fill)
        return out

    return neighborhood_reduce(field, se, reduce, fill, ndim)


def neighborhood_reduce(values: np.ndarray, se: StructuringElement, ufunc, identity, ndim: int) -> np.ndarray:
    """
    Fold `ufunc` over the clipped B-neighborhood of every pixel

    Works for any dtype whose `identity` is a neutral element of `ufunc`
    (max/-inf, min/+inf, bitwise or/0, bitwise and/all ones).
    """
    shape = values.shape[:ndim]
    out = np.full_like(values, identity)
    covered = np.zeros(shape, dtype=bool)
    for offset in se.offsets(ndim):
        pair = _shift_slices(shape, tuple(int(v) for v in offset))
        if pair is None:
            continue
        dst, src = pair
        ufunc(out[dst], values[src], out=out[dst])
        covered[dst] = True
    _raise_uncovered(covered, se)
    return out


def neighborhood_stack(values: np.ndarray, se: StructuringElement, ndim: int, fill) -> Tuple[np.ndarray, np.ndarray]:
    """
    Neighbor values of every pixel, one slab per SE offset

    Returns:
        (stack, valid): stack[m][x] = values[x + offsets[m]] (or `fill` where
        that lies outside the image) and the matching in-domain mask
    """
    shape = values.shape[:ndim]
    offsets = se.offsets(ndim)
    stack = np.full((len(offsets),) + values.shape, fill, dtype=values.dtype)
    valid = np.zeros((len(offsets),) + shape, dtype=bool)
    for m, offset in enumerate(offsets):
        pair = _shift_slices(shape, tuple(int(v) for v in offset))
        if pair is None:
            continue
        dst, src = pair
        stack[m][dst] = values[src]
        valid[m][dst] = True
    _raise_uncovered(valid.any(axis=0), se)
    return stack, valid


def _extremum_naive(field: np.ndarray, se: StructuringElement, filtertype: str, ndim: int) -> np.ndarray:
    """Per-pixel brute force; no slicing tricks, no shared kernels"""
    shape = field.shape[:ndim]
    offsets = [tuple(int(v) for v in row) for row in se.offsets(ndim)]
    out = np.empty_like(field)
    for x in np.ndindex(shape):
        values = []
        for b in offsets:
            y = tuple(xi + bi for xi, bi in zip(x, b))
            if all(0 <= yi < n for yi, n in zip(y, shape)):
                values.append(field[y])
        if not values:
            raise StructuringElementError(f"empty neighborhood at pixel {x} for {se.describe()}", index=x)
        stacked = np.stack(values)
        out[x] = stacked.max(axis=0) if filtertype == "max" else stacked.min(axis=0)
    return out


# =============================================================================
# Public operators
# =============================================================================

def dilate(field: np.ndarray, se: StructuringElement, engine: str = "auto") -> np.ndarray:
    """Flat dilation: max over the B-neighborhood"""
    return extremum_filter(field, se, "max", engine=engine)


def erode(field: np.ndarray, se: StructuringElement, engine: str = "auto") -> np.ndarray:
    """Flat erosion: min over the B-neighborhood"""
    return extremum_filter(field, se, "min", engine=engine)


def opening(field: np.ndarray, se: StructuringElement, engine: str = "auto") -> np.ndarray:
    """dilate(erode(f, B), B)"""
    return dilate(erode(field, se, engine), se, engine)


def closing(field: np.ndarray, se: StructuringElement, engine: str = "auto") -> np.ndarray:
    """erode(dilate(f, B), B)"""
    return erode(dilate(field, se, engine), se, engine)


def dilate_naive(field: np.ndarray, se: StructuringElement) -> np.ndarray:
    return extremum_filter(field, se, "max", engine="naive")


def erode_naive(field: np.ndarray, se: StructuringElement) -> np.ndarray:
    return extremum_filter(field, se, "min", engine="naive")
