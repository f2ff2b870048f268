import numpy as np
import pytest

from mixdenoise import Image
from mixdenoise.imageio import (FileFormat, ImageFileMeta, ImageFormatError,
                                quantize, read_image, write_image)


class TestQuantize:
    def test_peak_maps_to_full_scale(self):
        img = Image(np.array([[20.0]]), 20.0)
        assert quantize(img, 255)[0, 0] == 255

    def test_negative_clamps_to_zero(self):
        img = Image(np.array([[-0.4, 0.0]]), 20.0)
        np.testing.assert_array_equal(quantize(img, 255), [[0, 0]])

    def test_half_rounds_away_from_zero(self):
        # 10/20 * 255 = 127.5 -> 128
        img = Image(np.array([[10.0]]), 20.0)
        assert quantize(img, 255)[0, 0] == 128

    def test_overrange_clamps_to_max(self):
        img = Image(np.array([[25.0]]), 20.0)
        assert quantize(img, 255)[0, 0] == 255

    def test_16bit_scale(self):
        img = Image(np.array([[10.0]]), 20.0)
        assert quantize(img, 65535)[0, 0] == 32768  # 32767.5 rounds up


class TestPgm:
    def test_p5_8bit_round_trip(self, tmp_path, rng):
        img = Image(rng.integers(0, 256, (9, 13)).astype(float), 255.0)
        path = tmp_path / "img.pgm"
        write_image(img, path, ImageFileMeta(FileFormat.PGM8, 255))
        back, meta = read_image(path)
        assert meta.format is FileFormat.PGM8
        np.testing.assert_array_equal(back.data, img.data)

    def test_p5_16bit_round_trip(self, tmp_path, rng):
        img = Image(rng.integers(0, 65536, (5, 7)).astype(float), 65535.0)
        path = tmp_path / "img.pgm"
        write_image(img, path, ImageFileMeta(FileFormat.PGM16, 65535))
        back, meta = read_image(path)
        assert meta.format is FileFormat.PGM16
        np.testing.assert_array_equal(back.data, img.data)

    def test_write_is_deterministic(self, tmp_path, rng):
        img = Image(rng.uniform(0, 255, (8, 8)), 255.0)
        a, b = tmp_path / "a.pgm", tmp_path / "b.pgm"
        write_image(img, a, ImageFileMeta(FileFormat.PGM8, 255))
        write_image(img, b, ImageFileMeta(FileFormat.PGM8, 255))
        assert a.read_bytes() == b.read_bytes()

    def test_p2_ascii_with_comments(self, tmp_path):
        path = tmp_path / "ascii.pgm"
        path.write_bytes(b"P2\n# a comment\n3 2\n255\n0 1 2\n3 4 255\n")
        img, meta = read_image(path)
        assert meta.format is FileFormat.PGM8
        np.testing.assert_array_equal(img.data, [[0, 1, 2], [3, 4, 255]])

    def test_rejects_bad_maxval(self, tmp_path):
        path = tmp_path / "bad.pgm"
        path.write_bytes(b"P5\n2 2\n100\n" + bytes(4))
        with pytest.raises(ImageFormatError):
            read_image(path)

    def test_rejects_truncated_payload(self, tmp_path):
        path = tmp_path / "short.pgm"
        path.write_bytes(b"P5\n4 4\n255\n" + bytes(7))
        with pytest.raises(ImageFormatError):
            read_image(path)

    def test_rejects_sample_above_maxval(self, tmp_path):
        path = tmp_path / "over.pgm"
        path.write_bytes(b"P2\n2 1\n255\n300 0\n")
        with pytest.raises(ImageFormatError):
            read_image(path)


class TestPng:
    def test_8bit_round_trip(self, tmp_path, rng):
        img = Image(rng.integers(0, 256, (6, 11)).astype(float), 255.0)
        path = tmp_path / "img.png"
        write_image(img, path, ImageFileMeta(FileFormat.PNG8, 255))
        back, meta = read_image(path)
        assert meta.format is FileFormat.PNG8
        np.testing.assert_array_equal(back.data, img.data)

    def test_16bit_round_trip(self, tmp_path, rng):
        img = Image(rng.integers(0, 65536, (4, 6)).astype(float), 65535.0)
        path = tmp_path / "img.png"
        write_image(img, path, ImageFileMeta(FileFormat.PNG16, 65535))
        back, meta = read_image(path)
        assert meta.format is FileFormat.PNG16
        np.testing.assert_array_equal(back.data, img.data)

    def test_rejects_color_png(self, tmp_path):
        from PIL import Image as PILImage
        path = tmp_path / "rgb.png"
        PILImage.new("RGB", (4, 4)).save(path)
        with pytest.raises(ImageFormatError):
            read_image(path)


class TestMisc:
    def test_unknown_format_rejected(self, tmp_path):
        path = tmp_path / "mystery.bin"
        path.write_bytes(b"GIF89a trailing")
        with pytest.raises(ImageFormatError):
            read_image(path)

    def test_meta_depth_consistency(self):
        with pytest.raises(ValueError):
            ImageFileMeta(FileFormat.PGM8, 65535)
