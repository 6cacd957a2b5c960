"""
Morphology on Dirichlet parameter images

Every category is treated as an independent grayscale channel: dilation is a
per-channel neighborhood max of alpha, erosion a per-channel min. Subset
variants only touch the listed channels and copy the others verbatim. No
rescaling of alpha is applied, so magnitudes grow under dilation and shrink
under erosion.
"""

from typing import Callable, Iterable, Optional

import numpy as np

from categorical import DirichletImage, check_category
from errors import CategoryError
from grayscale import extremum_filter
from structuring import StructuringElement
from utils.logger import get_logger

logger = get_logger(__name__)


def _subset(f: DirichletImage, subset: Optional[Iterable[int]]) -> list:
    if subset is None:
        return list(range(f.channels))
    return sorted({check_category(k, f.channels) for k in subset})


def _apply(f: DirichletImage, se: StructuringElement, filtertype: str, subset: Optional[Iterable[int]]) -> DirichletImage:
    if not isinstance(f, DirichletImage):
        raise TypeError(f"expected a DirichletImage, got {type(f).__name__}")
    channels = _subset(f, subset)
    if not channels:
        return f
    out = np.array(f.data, copy=True)
    out[..., channels] = extremum_filter(f.data[..., channels], se, filtertype, ndim=f.ndim)
    logger.debug("dirichlet %s on channels %s with %s", filtertype, channels, se.describe())
    return DirichletImage(out)


def dir_dilate(f: DirichletImage, se: StructuringElement) -> DirichletImage:
    """Per-channel dilation of every category"""
    return _apply(f, se, "max", None)


def dir_erode(f: DirichletImage, se: StructuringElement) -> DirichletImage:
    """Per-channel erosion of every category"""
    return _apply(f, se, "min", None)


def dir_dilate_subset(f: DirichletImage, se: StructuringElement, subset: Iterable[int]) -> DirichletImage:
    """Dilate only the channels in `subset`; an empty subset is the identity"""
    return _apply(f, se, "max", subset)


def dir_erode_subset(f: DirichletImage, se: StructuringElement, subset: Iterable[int]) -> DirichletImage:
    """Erode only the channels in `subset`; an empty subset is the identity"""
    return _apply(f, se, "min", subset)


def dir_open(f: DirichletImage, se: StructuringElement, subset: Optional[Iterable[int]] = None) -> DirichletImage:
    """Per-channel opening (erode then dilate), optionally on a channel subset"""
    subset = None if subset is None else list(subset)
    return _apply(_apply(f, se, "min", subset), se, "max", subset)


def dir_close(f: DirichletImage, se: StructuringElement, subset: Optional[Iterable[int]] = None) -> DirichletImage:
    """Per-channel closing (dilate then erode), optionally on a channel subset"""
    subset = None if subset is None else list(subset)
    return _apply(_apply(f, se, "max", subset), se, "min", subset)


DIRICHLET_OPS: dict = {
    "dilate": lambda f, se, subset=None: _apply(f, se, "max", subset),
    "erode": lambda f, se, subset=None: _apply(f, se, "min", subset),
    "open": dir_open,
    "close": dir_close,
}


def dirichlet_op(op: str) -> Callable[..., DirichletImage]:
    """Look up a Dirichlet operator by pipeline op name"""
    try:
        return DIRICHLET_OPS[op]
    except KeyError:
        raise CategoryError(f"unknown Dirichlet operation {op!r}") from None
