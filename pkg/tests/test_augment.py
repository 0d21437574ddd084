import math

import numpy as np
import pytest

from helpers import make_random, random_image, smooth_image
from strkit.augment import (
    AugmentPolicy,
    box_muller,
    color_jitter,
    gaussian_noise,
    jpeg_degrade,
    motion_blur,
    quant_table,
    sample_and_apply,
    standard_normals,
)
from strkit.core import ImageBuffer, make_rng
from strkit.errors import ConfigError
from strkit.imaging import to_grayscale


class CountingStubRng:
    """Feeds a preset uniform sequence and counts consumption."""

    def __init__(self, values):
        self.values = list(values)
        self.calls = 0

    def random(self):
        self.calls += 1
        return self.values.pop(0)


class TestBoxMuller:
    def test_cosine_branch_formula(self):
        rng = CountingStubRng([0.5, 0.0])
        z = box_muller(rng)
        assert z == pytest.approx(math.sqrt(-2 * math.log(0.5)), abs=1e-12)

    def test_consumes_exactly_two_uniforms_per_normal(self):
        rng = CountingStubRng([0.3, 0.7] * 5)
        standard_normals(rng, 5)
        assert rng.calls == 10

    def test_u_equal_one_is_safe(self):
        # 1 - u keeps the log argument strictly positive when u = 0
        rng = CountingStubRng([0.0, 0.25])
        z = standard_normals(rng, 1)[0]
        assert np.isfinite(z)

    def test_rejects_negative_count(self):
        with pytest.raises(ValueError):
            standard_normals(make_rng(0), -1)

    def test_sample_statistics(self):
        zs = standard_normals(make_rng(5), 20_000)
        assert abs(zs.mean()) < 0.03
        assert abs(zs.std() - 1.0) < 0.03


class TestGaussianNoise:
    def test_sigma_zero_is_passthrough(self):
        img = random_image(make_random(1))
        assert gaussian_noise(img, make_rng(0), 0.0) is img

    def test_sigma_ten_statistics(self):
        img = ImageBuffer(np.full((200, 200), 128, dtype=np.uint8))
        out = gaussian_noise(img, make_rng(17), 10.0)
        delta = out.pixels.astype(float) - 128.0
        assert 8.5 <= delta.std() <= 11.5
        assert abs(delta.mean()) < 0.3

    def test_deterministic_per_seed(self):
        img = random_image(make_random(2), channels=3)
        a = gaussian_noise(img, make_rng(9), 5.0)
        b = gaussian_noise(img, make_rng(9), 5.0)
        c = gaussian_noise(img, make_rng(10), 5.0)
        assert a == b
        assert a != c

    def test_rejects_negative_sigma(self):
        img = random_image(make_random(3))
        with pytest.raises(ValueError):
            gaussian_noise(img, make_rng(0), -1.0)

    def test_dims_preserved(self):
        img = random_image(make_random(4))
        out = gaussian_noise(img, make_rng(0), 3.0)
        assert out.pixels.shape == img.pixels.shape


class TestMotionBlur:
    def test_length_one_is_passthrough(self):
        img = random_image(make_random(5))
        assert motion_blur(img, 1, 0.7) is img

    def test_horizontal_impulse_spreads_uniformly(self):
        pix = np.zeros((5, 11), dtype=np.uint8)
        pix[2, 5] = 255
        out = motion_blur(ImageBuffer(pix), 5, 0.0)
        row = out.pixels[2, :, 0]
        assert row[3:8].tolist() == [51] * 5  # 255/5 at each kernel tap
        assert row[:3].tolist() == [0, 0, 0]

    def test_vertical_blur_via_angle(self):
        pix = np.zeros((11, 5), dtype=np.uint8)
        pix[5, 2] = 255
        out = motion_blur(ImageBuffer(pix), 3, math.pi / 2)
        col = out.pixels[:, 2, 0]
        assert col[4:7].tolist() == [85] * 3
        assert out.pixels[:, 1, 0].sum() == 0

    def test_diagonal_kernel_weights_sum_to_one(self):
        # 3-tap diagonal rasterizes 3 points; a constant image must not move
        img = ImageBuffer(np.full((16, 16), 93, dtype=np.uint8))
        out = motion_blur(img, 3, math.pi / 4)
        assert out == img

    def test_constant_image_fixed_under_any_blur(self):
        img = ImageBuffer(np.full((9, 13, 3), 170, dtype=np.uint8))
        for length, angle in [(2, 0.3), (5, 1.2), (7, 2.8), (4, math.pi / 2)]:
            assert motion_blur(img, length, angle) == img

    def test_rejects_bad_length(self):
        img = random_image(make_random(6))
        with pytest.raises(ValueError):
            motion_blur(img, 0, 0.0)

    def test_dims_preserved(self):
        img = random_image(make_random(7))
        out = motion_blur(img, 5, 0.9)
        assert out.pixels.shape == img.pixels.shape


class TestJpeg:
    def test_quality_50_is_base_table(self):
        table = quant_table(50)
        assert table[0, 0] == 16 and table[7, 7] == 99 and table[0, 5] == 40

    def test_quality_100_is_all_ones(self):
        assert np.all(quant_table(100) == 1)

    def test_low_quality_scales_up(self):
        table = quant_table(5)  # scale = 5000/5 = 1000
        assert table[0, 0] == (16 * 1000 + 50) // 100

    def test_entries_never_below_one(self):
        for q in (1, 10, 50, 99, 100):
            assert quant_table(q).min() >= 1

    def test_rejects_out_of_range_quality(self):
        img = random_image(make_random(8))
        for q in (0, 101):
            with pytest.raises(ValueError):
                jpeg_degrade(img, q)

    def test_quality_100_constant_image_bit_identical(self):
        img = ImageBuffer(np.full((24, 24), 201, dtype=np.uint8))
        assert jpeg_degrade(img, 100) == img

    def test_degrades_more_at_lower_quality(self):
        img = smooth_image(make_random(9))
        err30 = np.abs(jpeg_degrade(img, 30).pixels.astype(int)
                       - img.pixels.astype(int)).mean()
        err95 = np.abs(jpeg_degrade(img, 95).pixels.astype(int)
                       - img.pixels.astype(int)).mean()
        assert err30 > err95

    def test_second_application_changes_less(self):
        for seed in range(5):
            img = smooth_image(make_random(40 + seed))
            once = jpeg_degrade(img, 40)
            twice = jpeg_degrade(once, 40)
            first = np.abs(once.pixels.astype(int) - img.pixels.astype(int)).mean()
            second = np.abs(twice.pixels.astype(int) - once.pixels.astype(int)).mean()
            assert second < first

    def test_non_multiple_of_eight_dims_preserved(self):
        img = random_image(make_random(10), max_side=21)
        out = jpeg_degrade(img, 60)
        assert out.pixels.shape == img.pixels.shape


class TestColorJitter:
    def test_all_factors_one_is_identity(self):
        img = random_image(make_random(11), channels=3)
        assert color_jitter(img, 1.0, 1.0, 1.0) == img

    def test_brightness_scales(self):
        img = ImageBuffer(np.full((2, 2, 3), 100, dtype=np.uint8))
        out = color_jitter(img, 0.5, 1.0, 1.0)
        assert np.all(out.pixels == 50)

    def test_contrast_pivots_at_128(self):
        img = ImageBuffer(np.full((2, 2), 100, dtype=np.uint8))
        out = color_jitter(img, 1.0, 2.0, 1.0)
        assert np.all(out.pixels == 72)
        assert np.all(color_jitter(
            ImageBuffer(np.full((2, 2), 128, dtype=np.uint8)), 1.0, 2.0, 1.0
        ).pixels == 128)

    def test_saturation_zero_matches_grayscale(self):
        img = random_image(make_random(12), channels=3)
        out = color_jitter(img, 1.0, 1.0, 0.0)
        gray = to_grayscale(img)
        assert np.array_equal(out.pixels[:, :, 0], gray.pixels[:, :, 0])
        assert np.array_equal(out.pixels[:, :, 0], out.pixels[:, :, 1])
        assert np.array_equal(out.pixels[:, :, 1], out.pixels[:, :, 2])

    def test_saturation_ignored_on_grayscale(self):
        img = random_image(make_random(13), channels=1)
        assert color_jitter(img, 1.0, 1.0, 0.0) == img

    def test_rejects_nonpositive_brightness_contrast(self):
        img = random_image(make_random(14), channels=3)
        with pytest.raises(ValueError):
            color_jitter(img, 0.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            color_jitter(img, 1.0, -0.5, 1.0)

    def test_rejects_negative_saturation(self):
        img = random_image(make_random(15), channels=3)
        with pytest.raises(ValueError):
            color_jitter(img, 1.0, 1.0, -0.1)


class TestPolicy:
    def test_defaults_validate(self):
        AugmentPolicy()

    def test_probability_bounds_checked(self):
        with pytest.raises(ConfigError):
            AugmentPolicy(p_noise=1.5)

    def test_inverted_range_rejected(self):
        with pytest.raises(ConfigError):
            AugmentPolicy(noise_sigma=(5.0, 1.0))

    def test_blur_len_floor(self):
        with pytest.raises(ConfigError):
            AugmentPolicy(blur_len=(0, 3))

    def test_jpeg_quality_window(self):
        with pytest.raises(ConfigError):
            AugmentPolicy(jpeg_quality=(0, 90))
        with pytest.raises(ConfigError):
            AugmentPolicy(jpeg_quality=(30, 200))

    def test_negative_magnitudes_rejected(self):
        with pytest.raises(ConfigError):
            AugmentPolicy(rotation_deg=-1.0)

    def test_from_mapping_rejects_unknown_key(self):
        with pytest.raises(ConfigError):
            AugmentPolicy.from_mapping({"p_noise": 0.5, "p_vignette": 0.5})

    def test_from_mapping_converts_lists(self):
        policy = AugmentPolicy.from_mapping({"noise_sigma": [0, 5]})
        assert policy.noise_sigma == (0, 5)


class TestSampleAndApply:
    def test_disabled_policy_is_passthrough(self):
        img = random_image(make_random(16))
        assert sample_and_apply(img, make_rng(3), AugmentPolicy.disabled()) is img

    def test_deterministic_per_seed(self):
        img = smooth_image(make_random(17))
        policy = AugmentPolicy()
        a = sample_and_apply(img, make_rng(77), policy)
        b = sample_and_apply(img, make_rng(77), policy)
        assert a == b

    def test_different_seeds_diverge(self):
        img = smooth_image(make_random(18))
        policy = AugmentPolicy()
        outs = {sample_and_apply(img, make_rng(s), policy).data for s in range(8)}
        assert len(outs) > 1

    def test_dims_preserved_under_full_policy(self):
        policy = AugmentPolicy(p_rotation=1.0, p_affine=1.0, p_perspective=1.0,
                               p_noise=1.0, p_blur=1.0, p_jpeg=1.0, p_color=1.0)
        rng = make_random(19)
        for seed in range(10):
            img = random_image(rng, max_side=40)
            out = sample_and_apply(img, make_rng(seed), policy)
            assert out.pixels.shape == img.pixels.shape

    def test_single_transform_policies_only_touch_their_transform(self):
        # probability 0 on everything = no draws consumed by params
        img = smooth_image(make_random(20))
        policy = AugmentPolicy(p_rotation=0.0, p_affine=0.0, p_perspective=0.0,
                               p_noise=0.0, p_blur=0.0, p_jpeg=0.0, p_color=1.0,
                               brightness=(1.0, 1.0), contrast=(1.0, 1.0),
                               saturation=(1.0, 1.0))
        out = sample_and_apply(img, make_rng(4), policy)
        assert out == img  # identity factors leave pixels untouched
