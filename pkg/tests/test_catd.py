"""
Tests for catd.py
"""

import struct
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from catd import decode_catd, describe_catd, encode_catd, read_catd, write_catd  # noqa: E402
from categorical import CategoricalImage, CrispImage, DirichletImage, membership, one_hot  # noqa: E402
from errors import CatdFormatError, ImageValidationError  # noqa: E402
from tests.conftest import random_simplex  # noqa: E402


def float32_image(rng, shape, channels):
    """Random image whose values survive the float32 payload unchanged"""
    return CategoricalImage(random_simplex(rng, shape, channels).astype(np.float32).astype(np.float64))


class TestLayout:
    """Byte layout of the container"""

    @pytest.mark.unit
    def test_header_fields(self):
        buffer = encode_catd(one_hot(np.array([[0, 1, 2]]), 3))
        assert buffer[:4] == b"CATD"
        version, kind, rank, h, w, channels = struct.unpack_from("<6I", buffer, 4)
        assert (version, kind, rank, h, w, channels) == (1, 0, 2, 1, 3, 3)
        assert len(buffer) == 28 + 1 * 3 * 3 * 4

    @pytest.mark.unit
    def test_payload_is_little_endian_float32_channels_last(self):
        f = CategoricalImage(np.array([[0.25, 0.75], [1.0, 0.0]]))
        payload = encode_catd(f)[24:]
        np.testing.assert_array_equal(np.frombuffer(payload, dtype="<f4"), [0.25, 0.75, 1.0, 0.0])

    @pytest.mark.unit
    def test_dirichlet_kind(self, random_dirichlet):
        buffer = encode_catd(random_dirichlet)
        assert struct.unpack_from("<I", buffer, 8)[0] == 1
        out = decode_catd(buffer)
        assert isinstance(out, DirichletImage)
        np.testing.assert_allclose(out.data, random_dirichlet.data, rtol=1e-6)


class TestRoundTrip:
    """write then read"""

    @pytest.mark.unit
    def test_random_images_bit_identical(self, rng, tmp_path):
        for n in range(100):
            shape = tuple(int(v) for v in rng.integers(1, 9, size=int(rng.integers(1, 4))))
            f = float32_image(rng, shape, int(rng.integers(2, 6)))
            path = write_catd(f, tmp_path / f"img{n}.catd")
            out = read_catd(path)
            np.testing.assert_array_equal(out.data, f.data)
            assert path.read_bytes() == encode_catd(out)

    @pytest.mark.unit
    def test_label_image(self):
        labels = CrispImage(np.array([[0, 2], [1, 1]]), 3)
        out = decode_catd(encode_catd(labels))
        np.testing.assert_array_equal(out, labels.data)

    @pytest.mark.unit
    def test_set_image_stored_as_membership(self):
        sets = CrispImage.from_sets([{0}, {1, 2}, set()], 3)
        out = decode_catd(encode_catd(sets))
        np.testing.assert_array_equal(out.astype(bool), membership(sets))

    @pytest.mark.unit
    def test_creates_parent_directories(self, tmp_path, uniform_image):
        path = write_catd(uniform_image, tmp_path / "a" / "b" / "u.catd")
        assert path.exists()

    @pytest.mark.unit
    def test_describe(self, tmp_path, uniform_image):
        header = describe_catd(write_catd(uniform_image, tmp_path / "u.catd"))
        assert header["kind"] == "categorical"
        assert header["shape"] == (4, 4)
        assert header["channels"] == 3
        assert header["header_bytes"] == 28


class TestErrors:
    """Malformed files"""

    @pytest.mark.unit
    def test_bad_magic_names_offset_zero(self, uniform_image):
        buffer = b"XATD" + encode_catd(uniform_image)[4:]
        with pytest.raises(CatdFormatError) as info:
            decode_catd(buffer)
        assert info.value.offset == 0
        assert "offset 0" in str(info.value)

    @pytest.mark.unit
    def test_payload_length_mismatch(self, uniform_image):
        buffer = encode_catd(uniform_image)
        with pytest.raises(CatdFormatError) as info:
            decode_catd(buffer[:-4])
        assert info.value.expected == 4 * 4 * 3 * 4
        assert info.value.actual == 4 * 4 * 3 * 4 - 4
        with pytest.raises(CatdFormatError):
            decode_catd(buffer + b"\0\0\0\0")

    @pytest.mark.unit
    def test_truncated_header(self, uniform_image):
        with pytest.raises(CatdFormatError) as info:
            decode_catd(encode_catd(uniform_image)[:18])
        assert info.value.offset == 16

    @pytest.mark.unit
    def test_unsupported_version(self, uniform_image):
        buffer = bytearray(encode_catd(uniform_image))
        buffer[4:8] = struct.pack("<I", 7)
        with pytest.raises(CatdFormatError) as info:
            decode_catd(bytes(buffer))
        assert info.value.actual == 7

    @pytest.mark.unit
    def test_unknown_kind(self, uniform_image):
        buffer = bytearray(encode_catd(uniform_image))
        buffer[8:12] = struct.pack("<I", 9)
        with pytest.raises(CatdFormatError):
            decode_catd(bytes(buffer))

    @pytest.mark.unit
    def test_off_simplex_payload_names_pixel(self):
        data = np.full((2, 3, 2), 0.5)
        data[1, 2] = (0.5, 0.7)
        buffer = b"CATD" + struct.pack("<6I", 1, 0, 2, 2, 3, 2) + data.astype("<f4").tobytes()
        with pytest.raises(ImageValidationError) as info:
            decode_catd(buffer)
        assert info.value.index == (1, 2)
        out = decode_catd(buffer, validate=False)
        assert out.data[1, 2, 1] == pytest.approx(0.7)
