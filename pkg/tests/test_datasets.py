"""Dataset layer: IDX parsing, resampling, amplitude encoding."""

import gzip

import numpy as np
import pytest

from firstphoton.datasets import (
    AmplitudeState,
    ClassStyleLayout,
    ExampleImage,
    downsample,
    drop_dark_images,
    encode_dataset,
    load_idx,
    relative_brightness,
    to_amplitudes,
)
from firstphoton.errors import DarkImageError, DatasetMismatchError, IdxFormatError, LayoutError

from conftest import write_idx_images, write_idx_labels


class TestLoadIdx:
    def test_known_bytes_round_trip(self, tmp_path):
        # byte values chosen so that value/255 is exact in binary fractions of 51
        images = np.array(
            [[[0, 51, 102], [153, 204, 255]], [[10, 20, 30], [40, 50, 60]]], dtype=np.uint8
        )
        labels = [3, 1]
        write_idx_images(tmp_path / "imgs", images)
        write_idx_labels(tmp_path / "labels", labels)
        examples = load_idx(tmp_path / "imgs", tmp_path / "labels")
        assert len(examples) == 2
        assert examples[0].label == 3 and examples[1].label == 1
        np.testing.assert_array_equal(examples[0].pixels, images[0] / 255.0)
        np.testing.assert_array_equal(examples[1].pixels, images[1] / 255.0)

    def test_gzipped_files(self, tmp_path):
        images = np.arange(8, dtype=np.uint8).reshape(2, 2, 2)
        write_idx_images(tmp_path / "imgs", images)
        write_idx_labels(tmp_path / "labels", [0, 1])
        for name in ("imgs", "labels"):
            with open(tmp_path / name, "rb") as f:
                data = f.read()
            with gzip.open(tmp_path / f"{name}.gz", "wb") as f:
                f.write(data)
        examples = load_idx(tmp_path / "imgs.gz", tmp_path / "labels.gz")
        assert [e.label for e in examples] == [0, 1]

    def test_all_zero_image_accepted_then_rejected_by_encoding(self, tmp_path):
        write_idx_images(tmp_path / "imgs", np.zeros((1, 2, 2), dtype=np.uint8))
        write_idx_labels(tmp_path / "labels", [0])
        examples = load_idx(tmp_path / "imgs", tmp_path / "labels")
        assert len(examples) == 1
        layout = ClassStyleLayout(classes=2, styles=2, pixel_dim=4)
        with pytest.raises(DarkImageError):
            to_amplitudes(examples[0], layout)

    def test_bad_magic(self, tmp_path):
        write_idx_labels(tmp_path / "labels-as-images", [1, 2])
        write_idx_images(tmp_path / "imgs", np.zeros((2, 2, 2), dtype=np.uint8))
        with pytest.raises(IdxFormatError, match="magic"):
            load_idx(tmp_path / "labels-as-images", tmp_path / "labels-as-images")

    def test_count_mismatch(self, tmp_path):
        write_idx_images(tmp_path / "imgs", np.zeros((3, 2, 2), dtype=np.uint8))
        write_idx_labels(tmp_path / "labels", [0, 1])
        with pytest.raises(DatasetMismatchError):
            load_idx(tmp_path / "imgs", tmp_path / "labels")

    def test_truncated_payload(self, tmp_path):
        write_idx_images(tmp_path / "imgs", np.zeros((2, 3, 3), dtype=np.uint8))
        data = (tmp_path / "imgs").read_bytes()
        (tmp_path / "short").write_bytes(data[:-5])
        write_idx_labels(tmp_path / "labels", [0, 1])
        with pytest.raises(IdxFormatError, match="truncated"):
            load_idx(tmp_path / "short", tmp_path / "labels")

    def test_mnist_test_set_shape(self, mnist_test):
        assert len(mnist_test) == 10000
        assert mnist_test[0].rows == 28 and mnist_test[0].cols == 28


def overlap_area_resample(pixels, target_rows, target_cols):
    """Brute-force oracle: integrate each target cell's fractional source rectangle."""
    rows, cols = pixels.shape
    out = np.zeros((target_rows, target_cols))
    for a in range(target_rows):
        for b in range(target_cols):
            r0, r1 = a * rows / target_rows, (a + 1) * rows / target_rows
            c0, c1 = b * cols / target_cols, (b + 1) * cols / target_cols
            acc = 0.0
            for y in range(rows):
                for x in range(cols):
                    oy = max(0.0, min(r1, y + 1) - max(r0, y))
                    ox = max(0.0, min(c1, x + 1) - max(c0, x))
                    acc += pixels[y, x] * oy * ox
            out[a, b] = acc / ((r1 - r0) * (c1 - c0))
    return out


class TestDownsample:
    def test_constant_image_stays_constant(self):
        image = ExampleImage(pixels=np.full((28, 28), 0.37), label=0)
        small = downsample(image, 10, 10)
        np.testing.assert_allclose(small.pixels, 0.37, rtol=0, atol=1e-14)
        assert small.label == 0

    def test_two_by_two_mean(self):
        image = ExampleImage(pixels=np.array([[1.0, 0.0], [0.0, 1.0]]), label=5)
        small = downsample(image, 1, 1)
        assert small.pixels.shape == (1, 1)
        assert small.pixels[0, 0] == pytest.approx(0.5, abs=1e-15)

    def test_matches_overlap_area_oracle(self):
        rng = np.random.default_rng(11)
        image = ExampleImage(pixels=rng.uniform(0, 1, size=(28, 28)), label=0)
        small = downsample(image, 10, 10)
        np.testing.assert_allclose(small.pixels, overlap_area_resample(image.pixels, 10, 10), atol=1e-12)

    def test_rejects_bad_targets(self):
        image = ExampleImage(pixels=np.ones((4, 4)), label=0)
        with pytest.raises(ValueError):
            downsample(image, 0, 2)
        with pytest.raises(ValueError):
            downsample(image, 8, 8)


class TestAmplitudeEncoding:
    layout = ClassStyleLayout(classes=2, styles=3, pixel_dim=4)

    def test_delta_image(self):
        image = ExampleImage(pixels=np.array([[1.0, 0.0], [0.0, 0.0]]), label=0)
        state = to_amplitudes(image, self.layout)
        expected = np.zeros(6)
        expected[0] = 1.0
        np.testing.assert_array_equal(state.amplitudes, expected)

    def test_four_equal_pixels_give_amplitude_half(self):
        image = ExampleImage(pixels=np.full((2, 2), 0.8), label=1)
        state = to_amplitudes(image, self.layout)
        np.testing.assert_allclose(state.amplitudes[:4], 0.5, atol=1e-15)
        np.testing.assert_array_equal(state.amplitudes[4:], 0.0)

    def test_matches_scalar_recomputation(self):
        rng = np.random.default_rng(3)
        pixels = rng.uniform(0, 1, size=(5, 5))
        image = ExampleImage(pixels=pixels, label=0)
        layout = ClassStyleLayout(classes=5, styles=6, pixel_dim=25)
        state = to_amplitudes(image, layout)
        total = pixels.sum()
        for y in range(5):
            for x in range(5):
                assert state.amplitudes[y * 5 + x] == pytest.approx(
                    np.sqrt(pixels[y, x] / total), abs=1e-15
                )

    def test_normalization_and_padding_properties(self):
        rng = np.random.default_rng(17)
        layout = ClassStyleLayout(classes=3, styles=4, pixel_dim=9)
        for _ in range(50):
            pixels = rng.uniform(0, 1, size=(3, 3)) * rng.integers(0, 2, size=(3, 3))
            if pixels.sum() == 0:
                continue
            state = to_amplitudes(ExampleImage(pixels=pixels, label=0), layout)
            assert abs(np.sum(np.abs(state.amplitudes) ** 2) - 1.0) <= 1e-12
            np.testing.assert_array_equal(state.amplitudes[9:], 0.0)
            # squared amplitudes recover the photon-landing distribution
            np.testing.assert_allclose(
                np.abs(state.amplitudes[:9]) ** 2, pixels.ravel() / pixels.sum(), atol=1e-12
            )

    def test_wrong_pixel_count(self):
        image = ExampleImage(pixels=np.ones((3, 3)), label=0)
        with pytest.raises(LayoutError):
            to_amplitudes(image, ClassStyleLayout(classes=2, styles=3, pixel_dim=4))

    def test_downsample_commutes_with_encoding_for_block_factors(self):
        # encoding then aggregating probabilities over 2x2 blocks must match
        # downsampling then encoding, because both are brightness ratios
        rng = np.random.default_rng(23)
        pixels = rng.uniform(0, 1, size=(4, 4))
        image = ExampleImage(pixels=pixels, label=0)
        big = ClassStyleLayout(classes=4, styles=4, pixel_dim=16)
        small = ClassStyleLayout(classes=2, styles=2, pixel_dim=4)
        probs_big = np.abs(to_amplitudes(image, big).amplitudes[:16]) ** 2
        grouped = probs_big.reshape(2, 2, 2, 2).sum(axis=(1, 3))
        probs_small = np.abs(to_amplitudes(downsample(image, 2, 2), small).amplitudes[:4]) ** 2
        np.testing.assert_allclose(grouped.ravel(), probs_small, atol=1e-10)


class TestLayoutAndState:
    def test_default_layouts(self):
        full = ClassStyleLayout.for_images(28, 28)
        assert (full.classes, full.styles, full.dim) == (10, 79, 790)
        small = ClassStyleLayout.for_images(10, 10)
        assert (small.classes, small.styles, small.dim) == (10, 10, 100)

    def test_index_map_is_bijective(self):
        layout = ClassStyleLayout(classes=3, styles=5, pixel_dim=15)
        seen = {layout.index(c, s) for c in range(3) for s in range(5)}
        assert seen == set(range(15))

    def test_layout_rejects_shrinking(self):
        with pytest.raises(LayoutError):
            ClassStyleLayout(classes=2, styles=2, pixel_dim=5)

    def test_state_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            AmplitudeState(amplitudes=np.array([0.5, 0.5]))

    def test_encode_dataset_matches_single_encoding(self):
        layout = ClassStyleLayout(classes=2, styles=3, pixel_dim=4)
        images = [
            ExampleImage(pixels=np.array([[1.0, 0.2], [0.0, 0.4]]), label=1),
            ExampleImage(pixels=np.array([[0.0, 0.9], [0.1, 0.0]]), label=0),
        ]
        states, labels = encode_dataset(images, layout)
        assert labels.tolist() == [1, 0]
        for i, image in enumerate(images):
            np.testing.assert_allclose(
                states[i], to_amplitudes(image, layout).amplitudes.real, atol=1e-15
            )

    def test_drop_dark_images(self):
        images = [
            ExampleImage(pixels=np.zeros((2, 2)), label=0),
            ExampleImage(pixels=np.ones((2, 2)), label=1),
        ]
        kept, dropped = drop_dark_images(images)
        assert dropped == 1 and kept[0].label == 1

    def test_negative_pixels_rejected(self):
        with pytest.raises(ValueError):
            ExampleImage(pixels=np.array([[-0.1, 0.0], [0.0, 0.0]]), label=0)

    def test_relative_brightness_sums_to_one(self):
        image = ExampleImage(pixels=np.array([[0.25, 0.5], [0.25, 0.0]]), label=0)
        np.testing.assert_allclose(relative_brightness(image).sum(), 1.0, atol=1e-15)
