"""
CATD container: portable binary files for image payloads

Layout (all integers unsigned 32-bit little-endian):

    offset 0   magic   b"CATD"
    offset 4   version 1
    offset 8   kind    0 categorical | 1 dirichlet | 2 scalar
    offset 12  rank d
    offset 16  shape   d integers
               channels
               payload product(shape) * channels float32 LE, row-major,
               channels on the last axis

Scalar payloads have one channel (label images, distance fields) or one
channel per category (set-mode membership).

Usage:
    from catd import read_catd, write_catd

    write_catd(image, "denoised.catd")
    image = read_catd("denoised.catd")
"""

import struct
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from categorical import CategoricalImage, CrispImage, DirichletImage, ensure_valid, membership
from constants import (
    CATD_KINDS,
    CATD_MAGIC,
    CATD_VERSION,
    KIND_CATEGORICAL,
    KIND_DIRICHLET,
    KIND_SCALAR,
)
from errors import CatdFormatError
from utils.config import get_config
from utils.logger import get_logger

logger = get_logger(__name__)

CatdPayload = Union[CategoricalImage, DirichletImage, np.ndarray]

_U32 = struct.Struct("<I")
_PAYLOAD_DTYPE = np.dtype("<f4")


def _classify(image) -> Tuple[int, np.ndarray, int]:
    """(kind, array with channels last, channels)"""
    if isinstance(image, CategoricalImage):
        return KIND_CATEGORICAL, image.data, image.channels
    if isinstance(image, DirichletImage):
        return KIND_DIRICHLET, image.data, image.channels
    if isinstance(image, CrispImage):
        if image.mode == "set":
            return KIND_SCALAR, membership(image), image.categories
        return KIND_SCALAR, image.data[..., None], 1
    array = np.asarray(image)
    if array.dtype.kind not in "biuf":
        raise TypeError(f"cannot store {type(image).__name__} in a CATD file")
    return KIND_SCALAR, array[..., None], 1


def encode_catd(image: CatdPayload) -> bytes:
    """Serialize an image (or a scalar array / label image) to CATD bytes"""
    kind, array, channels = _classify(image)
    shape = array.shape[:-1]
    header = [CATD_MAGIC, _U32.pack(CATD_VERSION), _U32.pack(kind), _U32.pack(len(shape))]
    header += [_U32.pack(n) for n in shape]
    header.append(_U32.pack(channels))
    payload = np.ascontiguousarray(array, dtype=_PAYLOAD_DTYPE).tobytes()
    return b"".join(header) + payload


def _read_u32(buffer: bytes, offset: int, field: str) -> int:
    if offset + 4 > len(buffer):
        raise CatdFormatError(
            f"truncated header: missing {field} at byte {offset}", offset=offset, expected=offset + 4, actual=len(buffer)
        )
    return _U32.unpack_from(buffer, offset)[0]


def _parse_header(buffer: bytes) -> Tuple[int, Tuple[int, ...], int, int]:
    """(kind, shape, channels, payload offset)"""
    if buffer[:4] != CATD_MAGIC:
        raise CatdFormatError(f"bad magic {bytes(buffer[:4])!r} at offset 0, expected {CATD_MAGIC!r}", offset=0)
    version = _read_u32(buffer, 4, "version")
    if version != CATD_VERSION:
        raise CatdFormatError(
            f"unsupported CATD version {version}", offset=4, expected=CATD_VERSION, actual=version
        )
    kind = _read_u32(buffer, 8, "payload kind")
    if kind not in CATD_KINDS:
        raise CatdFormatError(f"unknown payload kind {kind}", offset=8, actual=kind)
    rank = _read_u32(buffer, 12, "rank")
    offset = 16
    shape = []
    for axis in range(rank):
        shape.append(_read_u32(buffer, offset, f"shape[{axis}]"))
        offset += 4
    channels = _read_u32(buffer, offset, "channels")
    return kind, tuple(shape), channels, offset + 4


def decode_catd(buffer: bytes, validate: bool = True) -> CatdPayload:
    """
    Parse CATD bytes

    Args:
        buffer: file contents
        validate: run simplex validation on categorical payloads

    Returns:
        CategoricalImage, DirichletImage, or a float32 ndarray for scalar payloads

    Raises:
        CatdFormatError: bad magic, unsupported version or kind, truncated or
            oversized payload
        ImageValidationError: categorical payload off the simplex (with pixel index)
    """
    kind, shape, channels, offset = _parse_header(buffer)
    expected = int(np.prod(shape, dtype=np.int64)) * channels * _PAYLOAD_DTYPE.itemsize
    actual = len(buffer) - offset
    if actual != expected:
        raise CatdFormatError(
            f"payload length mismatch: expected {expected} bytes, found {actual}",
            offset=offset, expected=expected, actual=actual,
        )

    array = np.frombuffer(buffer, dtype=_PAYLOAD_DTYPE, offset=offset).reshape(shape + (channels,))
    if kind == KIND_SCALAR:
        return array[..., 0].copy() if channels == 1 else array.copy()
    if kind == KIND_DIRICHLET:
        return DirichletImage(array.astype(np.float64))
    image = CategoricalImage(array.astype(np.float64))
    if validate:
        ensure_valid(image, get_config().SIMPLEX_TOL)
    return image


def write_catd(image: CatdPayload, path: Union[str, Path]) -> Path:
    """Write an image to a CATD file (parent directories are created)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buffer = encode_catd(image)
    path.write_bytes(buffer)
    logger.debug("Wrote %s (%d bytes)", path, len(buffer))
    return path


def read_catd(path: Union[str, Path], validate: bool = True) -> CatdPayload:
    """Read a CATD file; see decode_catd"""
    path = Path(path)
    image = decode_catd(path.read_bytes(), validate=validate)
    logger.debug("Read %s: %r", path, image if not isinstance(image, np.ndarray) else image.shape)
    return image


def describe_catd(path: Union[str, Path]) -> dict:
    """Header summary of a CATD file (the payload is not read)"""
    kind, shape, channels, offset = _parse_header(Path(path).read_bytes())
    return {"path": str(path), "kind": CATD_KINDS[kind], "shape": shape, "channels": channels, "header_bytes": offset}
