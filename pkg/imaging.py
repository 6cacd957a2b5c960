"""
Bridges between categorical images and ordinary raster images

- import_png_labels: colour-coded segmentation mask -> one-hot categorical image
- render: 8-bit views of an image (RGB mixture, entropy, magnitude, argmax)
- count_components: connected components of one category in a label image
"""

from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from PIL import Image
from scipy import ndimage

from categorical import (
    CategoricalImage,
    CrispImage,
    DirichletImage,
    argmax_labels,
    dirichlet_expectation,
    entropy_map,
    magnitude_map,
    one_hot,
)
from constants import RENDER_STYLES, RGB_PALETTE, SEGMENTATION_PALETTE, SENTINEL_COLORS
from errors import ImageValidationError, PaletteError
from utils.logger import get_logger

logger = get_logger(__name__)

Color = Tuple[int, int, int]


# =============================================================================
# Palettes
# =============================================================================

def parse_color(text: str) -> Color:
    """'#rrggbb' or 'r,g,b' -> (r, g, b)"""
    text = text.strip()
    try:
        if text.startswith("#") and len(text) == 7:
            return tuple(int(text[k:k + 2], 16) for k in (1, 3, 5))
        parts = [int(v) for v in text.split(",")]
    except ValueError as e:
        raise PaletteError(f"cannot parse colour {text!r}") from e
    if len(parts) != 3 or not all(0 <= v <= 255 for v in parts):
        raise PaletteError(f"cannot parse colour {text!r}")
    return tuple(parts)


def parse_palette(text: str) -> List[Color]:
    """Category colours in index order, e.g. '#ff0000;#00ff00;#0000ff'"""
    colors = [parse_color(item) for item in text.split(";") if item.strip()]
    if not colors:
        raise PaletteError("empty palette")
    return colors


def default_palette(channels: int) -> List[Color]:
    """Pure R, G, B up to three categories, the segmentation palette above that"""
    palette = RGB_PALETTE if channels <= len(RGB_PALETTE) else SEGMENTATION_PALETTE
    if channels > len(palette):
        raise PaletteError(f"no default palette for {channels} categories, pass one explicitly")
    return list(palette[:channels])


def color_lookup(palette: Sequence[Color]) -> Dict[Color, int]:
    """colour -> category map of an index-ordered palette"""
    lookup = {}
    for k, color in enumerate(palette):
        color = tuple(int(v) for v in color)
        if color in lookup:
            raise PaletteError(f"colour {color} used for categories {lookup[color]} and {k}", color=color)
        lookup[color] = k
    return lookup


# =============================================================================
# Import
# =============================================================================

def _packed(rgb: np.ndarray) -> np.ndarray:
    rgb = rgb.astype(np.int64)
    return (rgb[..., 0] << 16) | (rgb[..., 1] << 8) | rgb[..., 2]


def labels_from_rgb(rgb: np.ndarray, palette: Union[Mapping[Color, int], Sequence[Color]]) -> np.ndarray:
    """
    (H, W, 3) colour array -> (H, W) category labels

    Raises:
        PaletteError: a colour that is not in the palette (with pixel location)
    """
    lookup = dict(palette) if isinstance(palette, Mapping) else color_lookup(palette)
    codes, inverse = np.unique(_packed(rgb), return_inverse=True)
    inverse = inverse.reshape(rgb.shape[:-1])
    labels = np.empty(codes.shape, dtype=np.int64)
    for n, code in enumerate(codes):
        color = (int(code) >> 16 & 255, int(code) >> 8 & 255, int(code) & 255)
        if color not in lookup:
            index = tuple(int(v) for v in np.argwhere(inverse == n)[0])
            raise PaletteError(f"colour {color} at pixel {index} is not in the palette", color=color, index=index)
        labels[n] = lookup[color]
    return labels[inverse]


def import_png_labels(
    path: Union[str, Path],
    palette: Union[Mapping[Color, int], Sequence[Color]],
    channels: Optional[int] = None,
) -> CategoricalImage:
    """
    Read a colour-coded segmentation mask as a one-hot categorical image

    Args:
        path: PNG (or any lossless format Pillow reads)
        palette: colour -> category map, or colours in category order
        channels: category count, defaults to the palette size
    """
    with Image.open(path) as image:
        rgb = np.asarray(image.convert("RGB"))
    labels = labels_from_rgb(rgb, palette)
    channels = channels or len(palette)
    logger.info("Imported %s: %s pixels, %d categories", path, rgb.shape[:2], channels)
    return one_hot(labels, channels)


# =============================================================================
# Rendering
# =============================================================================

def quantize(values: np.ndarray) -> np.ndarray:
    """[0, 255] floats -> uint8, rounding halves away from zero"""
    return np.clip(np.floor(np.asarray(values, dtype=np.float64) + 0.5), 0, 255).astype(np.uint8)


def _palette_array(palette: Optional[Sequence[Color]], channels: int) -> np.ndarray:
    palette = default_palette(channels) if palette is None else list(palette)
    if len(palette) != channels:
        raise PaletteError(f"palette has {len(palette)} colours for {channels} categories")
    return np.asarray(palette, dtype=np.float64)


def render_labels(labels: Union[CrispImage, np.ndarray], palette: Optional[Sequence[Color]] = None,
                  channels: Optional[int] = None) -> np.ndarray:
    """Label image -> RGB, with fixed colours for the BOTTOM / TOP sentinels"""
    if isinstance(labels, CrispImage):
        channels = channels or labels.categories
        labels = labels.data
    labels = np.asarray(labels).astype(np.int64)
    channels = channels or int(labels.max(initial=0)) + 1
    colors = _palette_array(palette, channels).astype(np.uint8)
    out = np.zeros(labels.shape + (3,), dtype=np.uint8)
    regular = (labels >= 0) & (labels < channels)
    out[regular] = colors[labels[regular]]
    for sentinel, color in SENTINEL_COLORS.items():
        out[labels == sentinel] = color
    return out


def render(
    image: Union[CategoricalImage, DirichletImage],
    style: str = "rgb-mixture",
    palette: Optional[Sequence[Color]] = None,
) -> np.ndarray:
    """
    8-bit view of an image

    Styles:
        rgb-mixture: per-pixel convex combination of the category colours
        entropy: Shannon entropy scaled so ln(channels) maps to 255 (grayscale)
        magnitude: Dirichlet parameter norm scaled by its maximum (grayscale)
        argmax: colour of the most probable category

    Dirichlet images are shown through their expectation except in the
    magnitude style.
    """
    if style not in RENDER_STYLES:
        raise ValueError(f"unknown render style {style!r}, expected one of {RENDER_STYLES}")
    if style == "magnitude":
        if not isinstance(image, DirichletImage):
            raise ImageValidationError("magnitude rendering needs a Dirichlet image")
        magnitude = magnitude_map(image)
        peak = magnitude.max(initial=0.0)
        return quantize(255.0 * magnitude / peak if peak > 0 else magnitude)

    if isinstance(image, DirichletImage):
        image = dirichlet_expectation(image)
    if style == "rgb-mixture":
        return quantize(image.data @ _palette_array(palette, image.channels))
    if style == "argmax":
        return render_labels(argmax_labels(image), palette, image.channels)
    scale = np.log(image.channels)
    return quantize(255.0 * entropy_map(image) / scale if scale > 0 else np.zeros(image.shape))


def as_raster(view: np.ndarray, rank: Optional[int] = None) -> np.ndarray:
    """
    Rendered view as a 2-D raster: (rows, cols) grayscale or (rows, cols, 3) RGB

    A 1-D image becomes a single row. Without `rank`, a 1-D array is a
    grayscale row and a 3-D array must end in an RGB axis.

    Raises:
        ImageValidationError: the view is not a 1-D or 2-D render
    """
    view = np.asarray(view)
    if rank is None:
        rank = view.ndim - 1 if view.ndim == 3 else view.ndim
    if rank not in (1, 2) or view.ndim not in (rank, rank + 1):
        raise ImageValidationError(f"only 1-D and 2-D images can be written as PNG, got shape {view.shape}")
    if view.ndim == rank + 1 and view.shape[-1] != 3:
        raise ImageValidationError(f"colour views need 3 channels in the last axis, got shape {view.shape}")
    return view[None] if rank == 1 else view


def save_png(array: np.ndarray, path: Union[str, Path], rank: Optional[int] = None) -> Path:
    """
    Write a rendered view (grayscale or RGB) as PNG

    Args:
        array: output of render / render_labels
        path: target file
        rank: spatial rank of the rendered image; 1-D views are written as one row
    """
    path = Path(path)
    raster = as_raster(array, rank)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.ascontiguousarray(raster, dtype=np.uint8)).save(path)
    logger.debug("Wrote %s", path)
    return path


# =============================================================================
# Components
# =============================================================================

def count_components(labels: Union[CrispImage, np.ndarray], category: int, connectivity: int = 1) -> int:
    """
    Number of connected regions labelled `category`

    Args:
        connectivity: 1 for edge neighbours (4-connected in 2-D), ndim for
            full neighbourhoods (8-connected in 2-D)
    """
    if isinstance(labels, CrispImage):
        labels = labels.data
    labels = np.asarray(labels)
    structure = ndimage.generate_binary_structure(labels.ndim, connectivity)
    _, count = ndimage.label(labels == category, structure=structure)
    return int(count)
