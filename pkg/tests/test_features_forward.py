import numpy as np
import pytest

from conftest import compare_or_record
from e2ecd.core.sampling import upsample_flow
from e2ecd.errors import MissingParameterError, ShapeError
from e2ecd.net.correlation import global_correlation, mutual_matching, neighborhood_consensus
from e2ecd.net.features import extract_features
from e2ecd.net.forward import (
    default_temperature,
    e2ecd_forward,
    head4,
    l_module_forward,
    softargmax_flow,
)
from e2ecd.net.weights import WeightStore
from e2ecd.synth.fixture import band_limited_image


def fixed_image(seed=0, size=64, channels=3):
    return band_limited_image(size, size, channels, seed=seed)


class TestExtractFeatures:
    def test_pyramid_shapes(self, arch, weights):
        levels = extract_features(fixed_image(), weights, arch)
        assert [lvl.shape for lvl in levels] == [
            (16, 16, 16), (8, 8, 32), (4, 4, 64), (2, 2, 128),
        ]

    def test_shared_weights_bitwise(self, arch, weights):
        img = fixed_image(3)
        a = extract_features(img, weights, arch)
        b = extract_features(img.copy(), weights, arch)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)

    def test_divisibility_enforced(self, arch, weights):
        with pytest.raises(ShapeError):
            extract_features(np.zeros((60, 64, 3), np.float32), weights, arch)

    def test_channel_count_enforced(self, arch, weights):
        with pytest.raises(ShapeError):
            extract_features(np.zeros((64, 64, 1), np.float32), weights, arch)

    def test_missing_weight_named(self, arch):
        with pytest.raises(MissingParameterError, match="extractor.stem.weight"):
            extract_features(fixed_image(), WeightStore(), arch)

    def test_golden_checksum(self, arch, weights, golden_dir):
        levels = extract_features(fixed_image(1), weights, arch)
        compare_or_record(golden_dir, "extractor_seed0",
                          {f"level{i}": lvl for i, lvl in enumerate(levels, 1)})


class TestSoftargmaxFlow:
    def test_delta_peak_recovers_displacement(self):
        n = 8
        for dy, dx in ((0, 1), (1, 0), (-2, 3), (3, -3)):
            c = np.zeros((n, n, n, n), np.float32)
            for i in range(n):
                for j in range(n):
                    k, l = i + dy, j + dx
                    if 0 <= k < n and 0 <= l < n:
                        c[i, j, k, l] = 1e6
            flow = softargmax_flow(c, 1.0)
            for i in range(n):
                for j in range(n):
                    if 0 <= i + dy < n and 0 <= j + dx < n:
                        np.testing.assert_allclose(flow[i, j], [dx, dy], atol=1e-4)

    def test_uniform_gives_centroid(self):
        n = 5
        c = np.ones((n, n, n, n), np.float32)
        flow = softargmax_flow(c, 1.0)
        centroid = (n - 1) / 2
        for i in range(n):
            for j in range(n):
                np.testing.assert_allclose(flow[i, j], [centroid - j, centroid - i], atol=1e-4)

    def test_identity_peak_zero_flow(self):
        n = 6
        c = np.zeros((n, n, n, n), np.float32)
        for i in range(n):
            for j in range(n):
                c[i, j, i, j] = 1e6
        assert np.abs(softargmax_flow(c, 1.0)).max() < 1e-4

    def test_temperature_must_be_positive(self):
        with pytest.raises(ValueError):
            softargmax_flow(np.zeros((2, 2, 2, 2), np.float32), 0.0)

    def test_default_temperature(self):
        assert default_temperature((2, 2, 4, 4)) == pytest.approx(0.25)


class TestHead4:
    def test_zero_init_equals_softargmax_bitwise(self, arch, weights):
        rng = np.random.default_rng(0)
        c = rng.uniform(-1, 1, size=(4, 4, 4, 4)).astype(np.float32)
        tau = default_temperature(c.shape)
        np.testing.assert_array_equal(head4(c, weights, None), softargmax_flow(c, tau))

    def test_delta_correlation_composition(self, arch, weights):
        n = 4
        c = np.zeros((n, n, n, n), np.float32)
        for i in range(n):
            for j in range(n):
                k, l = i + 1, j
                if k < n:
                    c[i, j, k, l] = 1e6
        flow = head4(c, weights, temperature=1.0)
        np.testing.assert_allclose(flow[1, 1], [0, 1], atol=1e-4)


class TestLModule:
    def test_residual_identity_at_init(self, arch, weights):
        rng = np.random.default_rng(1)
        fs = rng.normal(size=(8, 8, 32)).astype(np.float32)
        ft = rng.normal(size=(8, 8, 32)).astype(np.float32)
        w_next = rng.uniform(-1, 1, size=(4, 4, 2)).astype(np.float32)
        w_i, _ = l_module_forward(fs, ft, w_next, weights, level=2, radius=arch.radius)
        np.testing.assert_array_equal(w_i, upsample_flow(w_next, 2))

    def test_identical_features_give_constant_probability(self, arch, weights):
        rng = np.random.default_rng(2)
        f = rng.normal(size=(8, 8, 32)).astype(np.float32)
        w_next = np.zeros((4, 4, 2), np.float32)
        _, p = l_module_forward(f, f, w_next, weights, level=2, radius=arch.radius)
        # zero feature difference: the head sees a constant (bias-only) input
        assert np.abs(p - p[0, 0]).max() == 0.0

    def test_probability_channels_sum_to_one(self, arch, weights):
        rng = np.random.default_rng(3)
        fs = rng.normal(size=(16, 16, 16)).astype(np.float32)
        ft = rng.normal(size=(16, 16, 16)).astype(np.float32)
        w_next = rng.uniform(-2, 2, size=(8, 8, 2)).astype(np.float32)
        _, p = l_module_forward(fs, ft, w_next, weights, level=1, radius=arch.radius)
        np.testing.assert_allclose(p.sum(axis=-1), 1.0, atol=1e-5)

    def test_level_validated(self, arch, weights):
        with pytest.raises(ValueError):
            l_module_forward(
                np.zeros((4, 4, 16), np.float32), np.zeros((4, 4, 16), np.float32),
                np.zeros((2, 2, 2), np.float32), weights, level=4,
            )


class TestForward:
    def test_output_shapes(self, arch, weights):
        out = e2ecd_forward(fixed_image(4), fixed_image(5), weights, arch)
        assert out["w4"].shape == (2, 2, 2)
        assert out["w3"].shape == (4, 4, 2)
        assert out["w2"].shape == (8, 8, 2)
        assert out["w1"].shape == (16, 16, 2)
        assert out["w0"].shape == (64, 64, 2)
        assert out["p3"].shape == (4, 4, 2)
        assert out["p1"].shape == (16, 16, 2)
        assert out["p0"].shape == (64, 64, 2)

    def test_residual_identity_through_full_pass(self, arch, weights):
        out = e2ecd_forward(fixed_image(6), fixed_image(7), weights, arch)
        np.testing.assert_array_equal(out["w3"], upsample_flow(out["w4"], 2))
        np.testing.assert_array_equal(out["w2"], upsample_flow(out["w3"], 2))
        np.testing.assert_array_equal(out["w1"], upsample_flow(out["w2"], 2))
        np.testing.assert_array_equal(out["w0"], upsample_flow(out["w1"], 4))

    def test_init_flow_is_pure_softargmax_path(self, arch, weights):
        # zero-initialized residual heads: the coarse flow is exactly the
        # soft-argmax of the consensus volume, and every finer flow is its
        # upsampling
        img = fixed_image(8)
        out = e2ecd_forward(img, img, weights, arch)
        feats = extract_features(img, weights, arch)[3]
        c_tilde = neighborhood_consensus(
            mutual_matching(global_correlation(feats, feats)), weights
        )
        pure = softargmax_flow(c_tilde, default_temperature(c_tilde.shape))
        np.testing.assert_array_equal(out["w4"], pure)
        np.testing.assert_array_equal(
            out["w0"],
            upsample_flow(upsample_flow(upsample_flow(upsample_flow(pure, 2), 2), 2), 4),
        )

    def test_identity_peaked_correlation_gives_zero_flow(self):
        # when the volume feeding the soft-argmax is identity-peaked, the
        # full-resolution flow stays near zero
        n = 2
        c = np.zeros((n, n, n, n), np.float32)
        for i in range(n):
            for j in range(n):
                c[i, j, i, j] = 10.0
        w4 = softargmax_flow(c, default_temperature(c.shape))
        w0 = upsample_flow(upsample_flow(w4, 8), 4)
        mags = np.hypot(w0[..., 0], w0[..., 1])
        assert np.median(mags) < 0.5

    def test_probabilities_normalized_at_all_levels(self, arch, weights):
        out = e2ecd_forward(fixed_image(9), fixed_image(10), weights, arch)
        for key in ("p3", "p2", "p1", "p0"):
            np.testing.assert_allclose(out[key].sum(axis=-1), 1.0, atol=1e-5)

    def test_bit_identical_across_runs(self, arch, weights):
        a = e2ecd_forward(fixed_image(11), fixed_image(12), weights, arch)
        b = e2ecd_forward(fixed_image(11), fixed_image(12), weights, arch)
        for key in a:
            np.testing.assert_array_equal(a[key], b[key])

    def test_shape_mismatch_rejected(self, arch, weights):
        with pytest.raises(ShapeError):
            e2ecd_forward(fixed_image(0, 64), fixed_image(0, 32), weights, arch)

    def test_golden_outputs(self, arch, weights, golden_dir):
        out = e2ecd_forward(fixed_image(13), fixed_image(14), weights, arch)
        compare_or_record(golden_dir, "forward_seed0", dict(out))

    def test_consensus_pipeline_golden(self, arch, weights, golden_dir):
        ft = extract_features(fixed_image(15), weights, arch)[3]
        fs = extract_features(fixed_image(16), weights, arch)[3]
        c_tilde = neighborhood_consensus(mutual_matching(global_correlation(ft, fs)), weights)
        compare_or_record(golden_dir, "consensus_seed0", {"c_tilde": c_tilde})
