import numpy as np
import pytest

from oracles import conv2d_oracle, conv4d_oracle

from e2ecd.errors import ShapeError
from e2ecd.net.ops import conv2d, conv4d, relu, softmax_channels


class TestConv2d:
    def test_identity_kernel(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(5, 6, 3)).astype(np.float32)
        w = np.zeros((3, 3, 3, 3), np.float32)
        for c in range(3):
            w[c, c, 1, 1] = 1.0
        np.testing.assert_array_equal(conv2d(x, w), x)

    @pytest.mark.parametrize("stride", [1, 2])
    def test_matches_oracle(self, stride):
        rng = np.random.default_rng(stride)
        x = rng.normal(size=(6, 7, 2)).astype(np.float32)
        w = rng.normal(size=(4, 2, 3, 3)).astype(np.float32)
        b = rng.normal(size=4).astype(np.float32)
        got = conv2d(x, w, b, stride=stride, padding=1)
        want = conv2d_oracle(x, w, b, stride, 1)
        assert got.shape == want.shape
        np.testing.assert_allclose(got, want, atol=1e-5)

    def test_channel_mismatch_rejected(self):
        with pytest.raises(ShapeError):
            conv2d(np.zeros((4, 4, 2), np.float32), np.zeros((1, 3, 3, 3), np.float32))


class TestConv4d:
    def test_identity_kernel(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(3, 2, 3, 2, 1)).astype(np.float32)
        w = np.zeros((1, 1, 3, 3, 3, 3), np.float32)
        w[0, 0, 1, 1, 1, 1] = 1.0
        np.testing.assert_array_equal(conv4d(x, w), x)

    def test_ones_kernel_counts_neighborhood(self):
        x = np.zeros((3, 3, 3, 3, 1), np.float32)
        x[1, 1, 1, 1, 0] = 1.0
        w = np.ones((1, 1, 3, 3, 3, 3), np.float32)
        out = conv4d(x, w)[..., 0]
        # every position within the 3^4 neighborhood of the hot entry sees it
        assert out[1, 1, 1, 1] == 1.0
        assert out[0, 0, 0, 0] == 1.0
        assert out.sum() == 81.0

    def test_matches_nested_loop_oracle(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(4, 4, 4, 4, 2)).astype(np.float32)
        w = rng.normal(size=(2, 2, 3, 3, 3, 3)).astype(np.float32)
        np.testing.assert_allclose(conv4d(x, w), conv4d_oracle(x, w), atol=1e-5)

    def test_kernel_shape_rejected(self):
        with pytest.raises(ShapeError):
            conv4d(np.zeros((2, 2, 2, 2, 1), np.float32), np.zeros((1, 1, 5, 3, 3, 3), np.float32))


def test_relu():
    np.testing.assert_array_equal(relu(np.array([-1.0, 0.0, 2.0])), [0.0, 0.0, 2.0])


def test_softmax_channels_sums_to_one():
    rng = np.random.default_rng(3)
    x = rng.normal(scale=10, size=(4, 5, 2)).astype(np.float32)
    p = softmax_channels(x)
    np.testing.assert_allclose(p.sum(axis=-1), 1.0, atol=1e-6)
    assert (p >= 0).all()
