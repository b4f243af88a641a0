import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from e2ecd.core.sampling import (
    bilinear_sample,
    center_crop_to_multiple,
    coordinate_grid,
    sample_grid,
    upsample_bilinear,
    upsample_flow,
    warp_by_flow,
)
from e2ecd.errors import ShapeError


def tiny_image():
    return np.array([[0.0, 1.0], [2.0, 3.0]], dtype=np.float32)[..., None]


class TestBilinearSample:
    def test_integer_grid_point(self):
        assert bilinear_sample(tiny_image(), 0.0, 0.0)[0] == 0.0
        assert bilinear_sample(tiny_image(), 1.0, 1.0)[0] == 3.0

    def test_center_is_mean_of_corners(self):
        assert bilinear_sample(tiny_image(), 0.5, 0.5)[0] == pytest.approx(1.5)

    def test_far_out_of_bounds_is_zero(self):
        assert bilinear_sample(tiny_image(), -5.0, -5.0)[0] == 0.0

    def test_matches_direct_formula(self):
        rng = np.random.default_rng(0)
        img = rng.uniform(-2, 2, size=(5, 7, 3)).astype(np.float32)
        for _ in range(200):
            x = rng.uniform(-1.5, 7.5)
            y = rng.uniform(-1.5, 5.5)
            x0, y0 = int(np.floor(x)), int(np.floor(y))
            fx, fy = x - x0, y - y0
            expected = np.zeros(3)
            for dy, dx, wgt in (
                (0, 0, (1 - fx) * (1 - fy)),
                (0, 1, fx * (1 - fy)),
                (1, 0, (1 - fx) * fy),
                (1, 1, fx * fy),
            ):
                yy, xx = y0 + dy, x0 + dx
                if 0 <= xx < 7 and 0 <= yy < 5:
                    expected += wgt * img[yy, xx].astype(np.float64)
            np.testing.assert_allclose(bilinear_sample(img, x, y), expected, atol=1e-6)

    def test_continuity_bound(self):
        rng = np.random.default_rng(4)
        img = rng.uniform(0, 1, size=(8, 8, 1)).astype(np.float32)
        bound = 2.0 * np.abs(img).max()
        for _ in range(200):
            x, y = rng.uniform(1, 6, 2)
            eps = rng.uniform(1e-4, 1e-2)
            v0 = bilinear_sample(img, x, y)[0]
            v1 = bilinear_sample(img, x + eps, y)[0]
            v2 = bilinear_sample(img, x, y + eps)[0]
            assert abs(v1 - v0) <= eps * bound + 1e-6
            assert abs(v2 - v0) <= eps * bound + 1e-6

    def test_scalar_equals_grid(self):
        rng = np.random.default_rng(5)
        img = rng.uniform(0, 1, size=(4, 6, 2)).astype(np.float32)
        xs = rng.uniform(-1, 7, size=(3, 3))
        ys = rng.uniform(-1, 5, size=(3, 3))
        grid = sample_grid(img, xs, ys)
        for i in range(3):
            for j in range(3):
                np.testing.assert_array_equal(grid[i, j], bilinear_sample(img, xs[i, j], ys[i, j]))


class TestWarpByFlow:
    def test_zero_flow_is_identity(self):
        rng = np.random.default_rng(1)
        img = rng.uniform(0, 1, size=(9, 7, 3)).astype(np.float32)
        out = warp_by_flow(img, np.zeros((9, 7, 2), np.float32))
        assert np.abs(out - img).max() == 0.0

    def test_constant_flow_shifts_columns(self):
        img = np.arange(16, dtype=np.float32).reshape(4, 4)[..., None]
        flow = np.zeros((4, 4, 2), np.float32)
        flow[..., 0] = 1.0
        out = warp_by_flow(img, flow)
        np.testing.assert_array_equal(out[:, :3, 0], img[:, 1:, 0])
        # last column samples x=4, fully in the zero padding
        np.testing.assert_array_equal(out[:, 3, 0], np.zeros(4))

    def test_linearity_in_image(self):
        rng = np.random.default_rng(2)
        a, b = 0.7, -1.3
        i1 = rng.uniform(0, 1, size=(6, 6, 2)).astype(np.float32)
        i2 = rng.uniform(0, 1, size=(6, 6, 2)).astype(np.float32)
        flow = rng.uniform(-2, 2, size=(6, 6, 2)).astype(np.float32)
        lhs = warp_by_flow(a * i1 + b * i2, flow)
        rhs = a * warp_by_flow(i1, flow) + b * warp_by_flow(i2, flow)
        np.testing.assert_allclose(lhs, rhs, atol=1e-6)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ShapeError):
            warp_by_flow(np.zeros((4, 4, 1), np.float32), np.zeros((5, 4, 2), np.float32))

    def test_per_pixel_sampling_oracle(self):
        rng = np.random.default_rng(3)
        img = rng.uniform(0, 1, size=(5, 5, 1)).astype(np.float32)
        flow = rng.uniform(-3, 3, size=(5, 5, 2)).astype(np.float32)
        out = warp_by_flow(img, flow)
        for y in range(5):
            for x in range(5):
                expected = bilinear_sample(img, x + float(flow[y, x, 0]), y + float(flow[y, x, 1]))
                np.testing.assert_array_equal(out[y, x], expected)


class TestUpsample:
    def test_constant_stays_constant(self):
        m = np.full((3, 5, 1), 0.7, dtype=np.float32)
        out = upsample_bilinear(m, 4)
        assert out.shape == (12, 20, 1)
        assert np.abs(out - 0.7).max() == 0.0

    def test_factor_one_is_identity(self):
        rng = np.random.default_rng(6)
        m = rng.uniform(0, 1, size=(4, 4, 2)).astype(np.float32)
        np.testing.assert_array_equal(upsample_bilinear(m, 1), m)

    def test_column_ramp(self):
        m = np.array([[0.0, 1.0], [0.0, 1.0]], dtype=np.float32)[..., None]
        out = upsample_bilinear(m, 2)[..., 0]
        np.testing.assert_allclose(out[0], [0, 1 / 3, 2 / 3, 1], atol=1e-7)
        np.testing.assert_allclose(out[0], out[1], atol=0)
        np.testing.assert_allclose(out[0], out[3], atol=0)

    def test_factor_zero_rejected(self):
        with pytest.raises(ValueError):
            upsample_bilinear(np.zeros((2, 2, 1), np.float32), 0)

    def test_flow_zero_stays_zero(self):
        out = upsample_flow(np.zeros((3, 3, 2), np.float32), 3)
        assert out.shape == (9, 9, 2)
        assert np.abs(out).max() == 0.0

    def test_flow_constant_scales(self):
        f = np.zeros((4, 4, 2), np.float32)
        f[..., 0], f[..., 1] = 1.5, -2.0
        out = upsample_flow(f, 2)
        assert out.shape == (8, 8, 2)
        np.testing.assert_array_equal(out[..., 0], np.full((8, 8), 3.0, np.float32))
        np.testing.assert_array_equal(out[..., 1], np.full((8, 8), -4.0, np.float32))

    def test_flow_equals_scaled_bilinear(self):
        rng = np.random.default_rng(7)
        f = rng.uniform(-4, 4, size=(4, 4, 2)).astype(np.float32)
        # division by the power-of-two factor is exact, so equality is bitwise
        np.testing.assert_array_equal(upsample_flow(f, 2) / 2.0, upsample_bilinear(f, 2))

    def test_flow_factor_zero_rejected(self):
        with pytest.raises(ValueError):
            upsample_flow(np.zeros((2, 2, 2), np.float32), 0)


def test_coordinate_grid_layout():
    g = coordinate_grid(2, 3)
    assert g.shape == (2, 3, 2)
    np.testing.assert_array_equal(g[0, :, 0], [0, 1, 2])
    np.testing.assert_array_equal(g[:, 0, 1], [0, 1])


def test_center_crop_to_multiple():
    arr = np.zeros((70, 100, 3))
    cropped, (oy, ox) = center_crop_to_multiple(arr, 32)
    assert cropped.shape == (64, 96, 3)
    assert (oy, ox) == (3, 2)
    with pytest.raises(ShapeError):
        center_crop_to_multiple(np.zeros((10, 10)), 32)


@settings(max_examples=30, deadline=None)
@given(
    a=st.floats(-2, 2),
    b=st.floats(-2, 2),
    seed=st.integers(0, 2**31 - 1),
)
def test_warp_linearity_property(a, b, seed):
    rng = np.random.default_rng(seed)
    i1 = rng.uniform(0, 1, size=(5, 5, 1)).astype(np.float32)
    i2 = rng.uniform(0, 1, size=(5, 5, 1)).astype(np.float32)
    flow = rng.uniform(-2, 2, size=(5, 5, 2)).astype(np.float32)
    lhs = warp_by_flow(a * i1 + b * i2, flow)
    rhs = a * warp_by_flow(i1, flow) + b * warp_by_flow(i2, flow)
    np.testing.assert_allclose(lhs, rhs, atol=1e-5)
