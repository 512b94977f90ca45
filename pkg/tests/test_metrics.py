import numpy as np
import pytest

import panotex as pt
from panotex.metrics import _psd_sqrt, builtin_features, load_feature_file


class TestInterframeConsistency:
    def test_identical_images_zero(self):
        rng = np.random.default_rng(0)
        img = rng.random((8, 16, 3))
        mask = rng.random((8, 16)) < 0.5
        assert pt.interframe_consistency(img, img, mask) == 0.0

    def test_all_zero_mask_is_zero(self):
        a = np.zeros((4, 4, 3))
        b = np.ones((4, 4, 3))
        assert pt.interframe_consistency(a, b, np.zeros((4, 4))) == 0.0

    def test_hand_case_single_masked_pixel(self):
        gen = np.zeros((1, 2, 3))
        par = np.zeros((1, 2, 3))
        gen[0, 0] = [0.5, 0.5, 0.5]
        par[0, 0] = [0.2, 0.2, 0.2]
        gen[0, 1] = [1.0, 1.0, 1.0]  # unmasked, must not count
        mask = np.array([[1, 0]])
        assert pt.interframe_consistency(gen, par, mask) == pytest.approx(0.3)

    def test_uint8_inputs_normalized(self):
        gen = np.full((2, 2, 3), 255, np.uint8)
        par = np.zeros((2, 2, 3), np.uint8)
        assert pt.interframe_consistency(gen, par, np.ones((2, 2))) == pytest.approx(1.0)

    def test_pseudometric_properties(self):
        rng = np.random.default_rng(1)
        a, b, c = rng.random((3, 6, 10, 3))
        mask = rng.random((6, 10)) < 0.7
        dab = pt.interframe_consistency(a, b, mask)
        dba = pt.interframe_consistency(b, a, mask)
        dac = pt.interframe_consistency(a, c, mask)
        dcb = pt.interframe_consistency(c, b, mask)
        assert dab == pytest.approx(dba)
        assert dab <= dac + dcb + 1e-12
        assert dab >= 0

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            pt.interframe_consistency(
                np.zeros((2, 2, 3)), np.zeros((2, 3, 3)), np.zeros((2, 2))
            )


class TestFrechet:
    def test_identical_sets_zero(self):
        rng = np.random.default_rng(2)
        feats = pt.FeatureSet(rng.random((64, 8)))
        assert pt.frechet_distance(feats, feats) == pytest.approx(0.0, abs=1e-6)

    def test_symmetry(self):
        rng = np.random.default_rng(3)
        a = pt.FeatureSet(rng.normal(0, 1, (200, 5)))
        b = pt.FeatureSet(rng.normal(1, 2, (300, 5)))
        assert pt.frechet_distance(a, b) == pytest.approx(pt.frechet_distance(b, a), rel=1e-9)

    def test_1d_gaussian_mean_gap(self):
        rng = np.random.default_rng(4)
        n = 100_000
        a = pt.FeatureSet(rng.normal(0.0, 1.0, (n, 1)))
        b = pt.FeatureSet(rng.normal(3.0, 1.0, (n, 1)))
        # analytic: (mu gap)^2 + (sigma gap)^2 = 9
        assert pt.frechet_distance(a, b) == pytest.approx(9.0, rel=0.02)

    def test_1d_gaussian_sigma_gap(self):
        rng = np.random.default_rng(5)
        n = 100_000
        a = pt.FeatureSet(rng.normal(0.0, 1.0, (n, 1)))
        b = pt.FeatureSet(rng.normal(0.0, 2.0, (n, 1)))
        assert pt.frechet_distance(a, b) == pytest.approx(1.0, rel=0.05)

    def test_dim_mismatch_and_small_n(self):
        a = pt.FeatureSet(np.zeros((3, 2)))
        b = pt.FeatureSet(np.zeros((3, 3)))
        with pytest.raises(ValueError):
            pt.frechet_distance(a, b)
        with pytest.raises(ValueError):
            pt.frechet_distance(pt.FeatureSet(np.zeros((1, 2))), pt.FeatureSet(np.zeros((3, 2))))

    def test_indefinite_matrix_rejected(self):
        with pytest.raises(ValueError, match="indefinite"):
            _psd_sqrt(np.array([[1.0, 0.0], [0.0, -0.5]]))

    def test_tiny_negative_eigenvalues_clamp(self):
        out = _psd_sqrt(np.array([[1.0, 0.0], [0.0, -1e-9]]))
        assert np.all(np.isfinite(out))


class TestFeatures:
    def test_constant_image_constant_vector(self):
        img = np.full((64, 128, 3), 0.5)
        v = builtin_features(img)
        assert v.shape == (32,)
        np.testing.assert_allclose(v, 0.5)

    def test_identical_images_identical_vectors(self):
        rng = np.random.default_rng(6)
        img = rng.random((256, 512, 3))
        a = pt.extract_features([img, img], "builtin")
        assert np.array_equal(a.vectors[0], a.vectors[1])

    def test_checkerboard_block_mean_hand_computed(self):
        # 512x256 checkerboard of 32-px tiles: every 64x64 pooling block holds
        # an equal number of black and white tiles, so each mean is 0.5.
        tile = 32
        yy, xx = np.mgrid[0:256, 0:512]
        board = (((yy // tile) + (xx // tile)) % 2).astype(np.float64)
        img = np.repeat(board[:, :, None], 3, axis=2)
        v = builtin_features(img)
        np.testing.assert_allclose(v, 0.5)

    def test_feature_file_roundtrip(self, tmp_path):
        path = tmp_path / "feats.txt"
        path.write_text("1.0 2.0 3.0\n4.0 5.0 6.0\n")
        feats = load_feature_file(path)
        assert feats.n == 2 and feats.dim == 3
        got = pt.extract_features([np.zeros((2, 2, 3))] * 2, f"file:{path}")
        np.testing.assert_array_equal(got.vectors, feats.vectors)

    def test_feature_file_rowcount_mismatch(self, tmp_path):
        path = tmp_path / "feats.txt"
        path.write_text("1.0 2.0\n")
        with pytest.raises(ValueError, match="rows"):
            pt.extract_features([np.zeros((2, 2, 3))] * 3, f"file:{path}")


class TestCrop:
    def test_default_band_256(self):
        img = np.arange(256 * 4 * 3).reshape(256, 4, 3)
        out = pt.crop_facades(img, pt.CropSpec(0.25, 0.625))
        assert out.shape[0] == 96
        np.testing.assert_array_equal(out, img[64:160])

    def test_identity_crop(self):
        img = np.ones((8, 4, 3))
        out = pt.crop_facades(img, pt.CropSpec(0.0, 1.0))
        assert out.shape == img.shape

    def test_empty_crop_rejected(self):
        with pytest.raises(ValueError):
            pt.CropSpec(0.5, 0.5)


class TestSeamMetric:
    def _atlas_with(self, colors, counts):
        atlas = pt.TextureAtlas(colors.shape[1], colors.shape[0])
        atlas.blended = colors.astype(np.float32)
        atlas.contribution_count = counts.astype(np.int32)
        return atlas

    def test_uniform_atlas_zero(self):
        colors = np.full((4, 4, 3), 0.25)
        counts = np.ones((4, 4))
        assert pt.seam_metric(self._atlas_with(colors, counts)) == 0.0

    def test_two_adjacent_extremes(self):
        colors = np.zeros((1, 2, 3))
        colors[0, 1] = 1.0
        counts = np.ones((1, 2))
        assert pt.seam_metric(self._atlas_with(colors, counts)) == 1.0

    def test_gap_separated_islands_do_not_pair(self):
        colors = np.zeros((1, 3, 3))
        colors[0, 2] = 1.0
        counts = np.array([[1, 0, 1]])  # hole between the two texels
        assert pt.seam_metric(self._atlas_with(colors, counts)) == 0.0

    def test_needs_two_mapped_texels(self):
        colors = np.zeros((2, 2, 3))
        counts = np.zeros((2, 2))
        counts[0, 0] = 1
        with pytest.raises(ValueError):
            pt.seam_metric(self._atlas_with(colors, counts))
