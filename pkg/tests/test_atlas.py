import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import panotex as pt
from conftest import OCCLUDER_ATLAS, brute_force_visible


class TestComputeWeights:
    def test_single_contributor(self):
        np.testing.assert_array_equal(pt.compute_weights([7.3]), [1.0])

    def test_symmetric_pair(self):
        np.testing.assert_allclose(pt.compute_weights([3.0, 3.0]), [0.5, 0.5])

    def test_clamped_hand_case(self):
        # raw (0.9, 0.9, 0.2) -> clamp (0.7, 0.7, 0.3) -> /1.7
        w = pt.compute_weights([1.0, 1.0, 8.0])
        np.testing.assert_allclose(w, [0.41176, 0.41176, 0.17647], atol=1e-5)

    def test_rejects_bad_distances(self):
        with pytest.raises(ValueError):
            pt.compute_weights([])
        with pytest.raises(ValueError):
            pt.compute_weights([1.0, 0.0])
        with pytest.raises(ValueError):
            pt.compute_weights([-2.0])

    @given(
        st.lists(
            st.floats(min_value=1e-6, max_value=100.0, allow_nan=False),
            min_size=1,
            max_size=16,
        )
    )
    @settings(max_examples=300, deadline=None)
    def test_weight_properties(self, distances):
        d = np.asarray(distances)
        w = pt.compute_weights(d)
        assert abs(w.sum() - 1.0) < 1e-9
        assert np.all(w >= 0) and np.all(w <= 1)
        if len(d) >= 2:
            raw = 1.0 - d / d.sum()
            assert abs(raw.sum() - (len(d) - 1)) < 1e-9


def single_texel_atlas(mode):
    return pt.TextureAtlas(4, 4, mode=mode)


class TestUpdateAtlas:
    def test_single_contribution_is_exact(self):
        atlas = single_texel_atlas("weighted")
        pt.update_atlas(atlas, [((1, 2), (0.2, 0.4, 0.6), 5.0)], 0)
        np.testing.assert_allclose(atlas.blended[2, 1], [0.2, 0.4, 0.6], atol=1e-7)
        assert atlas.contribution_count[2, 1] == 1

    def test_average_mode(self):
        atlas = single_texel_atlas("average")
        pt.update_atlas(atlas, [((0, 0), (0.2, 0.2, 0.2), 1.0)], 0)
        pt.update_atlas(atlas, [((0, 0), (0.6, 0.6, 0.6), 9.0)], 1)
        np.testing.assert_allclose(atlas.blended[0, 0], [0.4, 0.4, 0.4], atol=1e-7)

    def test_no_blend_last_write_wins(self):
        atlas = single_texel_atlas("no_blend")
        pt.update_atlas(atlas, [((0, 0), (0.2, 0.2, 0.2), 1.0)], 0)
        pt.update_atlas(atlas, [((0, 0), (0.9, 0.1, 0.5), 9.0)], 1)
        np.testing.assert_allclose(atlas.blended[0, 0], [0.9, 0.1, 0.5], atol=1e-7)

    def test_weighted_two_views(self):
        atlas = single_texel_atlas("weighted")
        pt.update_atlas(atlas, [((0, 0), (1.0, 0.0, 0.0), 1.0)], 0)
        pt.update_atlas(atlas, [((0, 0), (0.0, 0.0, 1.0), 9.0)], 1)
        # raw (0.9, 0.1) -> clamp (0.7, 0.3) -> exact mixture
        np.testing.assert_allclose(atlas.blended[0, 0], [0.7, 0.0, 0.3], atol=1e-6)

    def test_out_of_order_iteration_rejected(self):
        atlas = single_texel_atlas("weighted")
        pt.update_atlas(atlas, [((0, 0), (0.5, 0.5, 0.5), 1.0)], 3)
        with pytest.raises(ValueError, match="iteration"):
            pt.update_atlas(atlas, [((0, 0), (0.5, 0.5, 0.5), 1.0)], 3)

    def test_duplicate_texels_in_one_update_rejected(self):
        atlas = single_texel_atlas("weighted")
        with pytest.raises(ValueError, match="duplicate"):
            pt.update_atlas(
                atlas,
                [((0, 0), (0.5, 0.5, 0.5), 1.0), ((0, 0), (0.1, 0.1, 0.1), 2.0)],
                0,
            )

    def test_ledger_matches_scalar_recompute(self):
        # The vectorized group-by blend must agree with per-texel
        # compute_weights arithmetic.
        rng = np.random.default_rng(3)
        atlas = pt.TextureAtlas(8, 8, mode="weighted")
        n_iters = 6
        for it in range(n_iters):
            texels = rng.choice(64, size=rng.integers(5, 40), replace=False)
            contrib = pt.Contributions(
                texels=np.sort(texels),
                colors=rng.random((len(texels), 3)),
                distances=rng.uniform(0.5, 30.0, len(texels)),
            )
            pt.update_atlas(atlas, contrib, it)
        for flat in range(64):
            rows = atlas.contributions_for(flat)
            if not rows:
                continue
            colors = np.array([c for _, c, _ in rows])
            dists = [d for _, _, d in rows]
            expected = pt.compute_weights(dists) @ colors
            iy, ix = divmod(flat, 8)
            np.testing.assert_allclose(atlas.blended[iy, ix], expected, atol=1e-6)

    def test_permutation_invariance_weighted_and_average(self):
        pairs = [((0.9, 0.1, 0.2), 2.0), ((0.3, 0.8, 0.5), 7.0), ((0.1, 0.4, 0.9), 4.0)]
        results = {}
        for mode in ("weighted", "average"):
            blends = []
            for order in ([0, 1, 2], [2, 0, 1], [1, 2, 0]):
                atlas = single_texel_atlas(mode)
                for it, k in enumerate(order):
                    color, dist = pairs[k]
                    pt.update_atlas(atlas, [((0, 0), color, dist)], it)
                blends.append(atlas.blended[0, 0].copy())
            results[mode] = blends
            for b in blends[1:]:
                np.testing.assert_allclose(b, blends[0], atol=1e-7)

    def test_no_blend_depends_only_on_final_contribution(self):
        pairs = [((0.9, 0.1, 0.2), 2.0), ((0.3, 0.8, 0.5), 7.0), ((0.1, 0.4, 0.9), 4.0)]
        blends = []
        for order in ([0, 1, 2], [1, 0, 2]):  # reorder non-maximal only
            atlas = single_texel_atlas("no_blend")
            for it, k in enumerate(order):
                color, dist = pairs[k]
                pt.update_atlas(atlas, [((0, 0), color, dist)], it)
            blends.append(atlas.blended[0, 0].copy())
        np.testing.assert_allclose(blends[0], blends[1], atol=1e-7)
        np.testing.assert_allclose(blends[0], pairs[2][0], atol=1e-7)

    def test_blend_convexity_random_sets(self):
        rng = np.random.default_rng(11)
        for mode in pt.BLEND_MODES:
            atlas = pt.TextureAtlas(32, 32, mode=mode)
            n_tex = 1024
            n_iter = 6
            member = rng.random((n_iter, n_tex)) < 0.6
            member[0] = True  # every texel gets at least one contribution
            colors = rng.random((n_iter, n_tex, 3))
            dists = rng.uniform(1e-3, 50.0, (n_iter, n_tex))
            for it in range(n_iter):
                sel = np.flatnonzero(member[it])
                contrib = pt.Contributions(
                    texels=sel, colors=colors[it, sel], distances=dists[it, sel]
                )
                pt.update_atlas(atlas, contrib, it)
            flat_blend = atlas.blended.reshape(-1, 3)
            for t in range(n_tex):
                sel = member[:, t]
                lo = colors[sel, t].min(axis=0)
                hi = colors[sel, t].max(axis=0)
                assert np.all(flat_blend[t] >= lo - 1e-6)
                assert np.all(flat_blend[t] <= hi + 1e-6)

    def test_state_roundtrip(self, tmp_path):
        atlas = pt.TextureAtlas(8, 8, mode="weighted")
        rng = np.random.default_rng(5)
        for it in range(3):
            texels = np.sort(rng.choice(64, size=10, replace=False))
            pt.update_atlas(
                atlas,
                pt.Contributions(
                    texels=texels,
                    colors=rng.random((10, 3)),
                    distances=rng.uniform(1, 9, 10),
                ),
                it,
            )
        path = tmp_path / "state.npz"
        atlas.save_state(path)
        back = pt.TextureAtlas.load_state(path)
        np.testing.assert_array_equal(back.blended, atlas.blended)
        np.testing.assert_array_equal(back.contribution_count, atlas.contribution_count)
        assert back.iterations == atlas.iterations
        # Resume accepts only future iterations on already-contributed texels.
        taken = int(atlas._texel[0])
        with pytest.raises(ValueError):
            pt.update_atlas(back, [(taken, (0.5, 0.5, 0.5), 1.0)], 0)
        pt.update_atlas(back, [(taken, (0.5, 0.5, 0.5), 1.0)], 99)


class TestGatherContributions:
    def test_empty_texel_map(self, occluder_mesh, occluder_camera):
        tm = pt.build_texel_map(occluder_mesh, OCCLUDER_ATLAS, OCCLUDER_ATLAS)
        empty = pt.TexelMap(
            atlas_width=tm.atlas_width,
            atlas_height=tm.atlas_height,
            texels=np.zeros(0, dtype=np.int64),
            points=np.zeros((0, 3)),
            normals=np.zeros((0, 3)),
            face_ids=np.zeros(0, dtype=np.int32),
        )
        atlas = pt.TextureAtlas(OCCLUDER_ATLAS, OCCLUDER_ATLAS)
        frame = pt.render_partial(occluder_mesh, tm, atlas, occluder_camera, 128, 64)
        contrib = pt.gather_contributions(np.zeros((64, 128, 3), np.uint8), frame, empty)
        assert len(contrib) == 0

    def test_visibility_matches_brute_force(self, occluder_mesh, occluder_camera):
        tm = pt.build_texel_map(occluder_mesh, OCCLUDER_ATLAS, OCCLUDER_ATLAS)
        atlas = pt.TextureAtlas(OCCLUDER_ATLAS, OCCLUDER_ATLAS)
        frame = pt.render_partial(occluder_mesh, tm, atlas, occluder_camera, 2048, 1024)
        gen = np.full((1024, 2048, 3), 128, np.uint8)
        contrib = pt.gather_contributions(gen, frame, tm)
        included = np.isin(tm.texels, contrib.texels)
        oracle = brute_force_visible(occluder_mesh, occluder_camera.position, tm.points)
        assert np.array_equal(included, oracle)

    def test_distance_is_horizontal(self, occluder_mesh, occluder_camera):
        tm = pt.build_texel_map(occluder_mesh, OCCLUDER_ATLAS, OCCLUDER_ATLAS)
        atlas = pt.TextureAtlas(OCCLUDER_ATLAS, OCCLUDER_ATLAS)
        frame = pt.render_partial(occluder_mesh, tm, atlas, occluder_camera, 512, 256)
        gen = np.zeros((256, 512, 3), np.uint8)
        contrib = pt.gather_contributions(gen, frame, tm)
        pos = {int(t): i for i, t in enumerate(tm.texels)}
        for flat, dist in zip(contrib.texels[:50], contrib.distances[:50]):
            p = tm.points[pos[int(flat)]]
            expected = np.hypot(
                p[0] - occluder_camera.position[0], p[1] - occluder_camera.position[1]
            )
            assert dist == pytest.approx(expected, abs=1e-9)

    def test_bilinear_color_against_hand_interpolation(self, occluder_mesh, occluder_camera):
        tm = pt.build_texel_map(occluder_mesh, OCCLUDER_ATLAS, OCCLUDER_ATLAS)
        atlas = pt.TextureAtlas(OCCLUDER_ATLAS, OCCLUDER_ATLAS)
        W, H = 512, 256
        frame = pt.render_partial(occluder_mesh, tm, atlas, occluder_camera, W, H)
        rng = np.random.default_rng(0)
        gen = rng.integers(0, 256, (H, W, 3), dtype=np.uint8)
        contrib = pt.gather_contributions(gen, frame, tm)

        x, y, _ = pt.project(occluder_camera, tm.points, W, H)
        pos = {int(t): i for i, t in enumerate(tm.texels)}
        img = gen.astype(np.float64) / 255.0
        for k in range(0, len(contrib), 97):
            i = pos[int(contrib.texels[k])]
            x0, y0 = int(np.floor(x[i])), int(np.floor(y[i]))
            fx, fy = x[i] - x0, y[i] - y0
            corners = [
                img[np.clip(y0, 0, H - 1), x0 % W],
                img[np.clip(y0, 0, H - 1), (x0 + 1) % W],
                img[np.clip(y0 + 1, 0, H - 1), x0 % W],
                img[np.clip(y0 + 1, 0, H - 1), (x0 + 1) % W],
            ]
            expected = (
                corners[0] * (1 - fx) * (1 - fy)
                + corners[1] * fx * (1 - fy)
                + corners[2] * (1 - fx) * fy
                + corners[3] * fx * fy
            )
            np.testing.assert_allclose(contrib.colors[k], expected, atol=1e-12)

    def test_dimension_mismatch_rejected(self, occluder_mesh, occluder_camera):
        tm = pt.build_texel_map(occluder_mesh, OCCLUDER_ATLAS, OCCLUDER_ATLAS)
        atlas = pt.TextureAtlas(OCCLUDER_ATLAS, OCCLUDER_ATLAS)
        frame = pt.render_partial(occluder_mesh, tm, atlas, occluder_camera, 128, 64)
        with pytest.raises(ValueError):
            pt.gather_contributions(np.zeros((32, 128, 3), np.uint8), frame, tm)
