"""Raster primitives: gradients, resampling, edge layout."""

import numpy as np
import pytest

from gadkit import (
    ShapeError,
    bilinear_upsample,
    box_downsample,
    edge_divergence,
    gradient_edges,
)
from gadkit.fields import as_scalar_field, as_stack


class TestGradientEdges:
    def test_1x2_definition(self):
        e = gradient_edges(np.array([[0.0, 3.0]]))
        assert e.east[0, 0] == 3.0
        assert e.east[0, 1] == 0.0  # border-crossing
        assert np.all(e.south == 0.0)

    def test_constant_field_zero(self):
        e = gradient_edges(np.full((5, 7), 2.5))
        assert np.all(e.east == 0.0)
        assert np.all(e.south == 0.0)

    def test_3x3_center_spike(self):
        # hand-enumerated: center owns two edges of -1, its west/north
        # neighbors own edges of +1 toward it
        f = np.zeros((3, 3))
        f[1, 1] = 1.0
        e = gradient_edges(f)
        assert e.east[1, 1] == -1.0
        assert e.south[1, 1] == -1.0
        assert e.east[1, 0] == 1.0
        assert e.south[0, 1] == 1.0
        # all 12 interior edges
        expected_east = np.array([[0, 0, 0], [1, -1, 0], [0, 0, 0]], dtype=float)
        expected_south = np.array([[0, 1, 0], [0, -1, 0], [0, 0, 0]], dtype=float)
        np.testing.assert_array_equal(e.east, expected_east)
        np.testing.assert_array_equal(e.south, expected_south)

    def test_divergence_telescopes_to_zero(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            f = rng.normal(size=(9, 11))
            div = edge_divergence(gradient_edges(f))
            assert abs(div.sum()) < 1e-10


class TestBilinearUpsample:
    def test_factor_one_identity(self):
        rng = np.random.default_rng(0)
        a = rng.random((2, 4, 5))
        np.testing.assert_array_equal(bilinear_upsample(a, 1), a)

    def test_constant_preserved(self):
        a = np.full((1, 3, 3), 0.7)
        np.testing.assert_allclose(bilinear_upsample(a, 4), 0.7)

    def test_1x2_hand_values(self):
        # both axes scale by the factor; each row carries the hand-computed
        # horizontal profile
        out = bilinear_upsample(np.array([[[0.0, 1.0]]]), 2)
        assert out.shape == (1, 2, 4)
        np.testing.assert_allclose(out[0, 0], [0.0, 0.25, 0.75, 1.0])
        np.testing.assert_allclose(out[0, 1], [0.0, 0.25, 0.75, 1.0])

    def test_bounds_preserved(self):
        rng = np.random.default_rng(1)
        a = rng.random((3, 6, 7))
        out = bilinear_upsample(a, 3)
        assert out.min() >= a.min() - 1e-15
        assert out.max() <= a.max() + 1e-15

    def test_factor_zero_rejected(self):
        with pytest.raises(ValueError):
            bilinear_upsample(np.zeros((1, 2, 2)), 0)


class TestBoxDownsample:
    def test_factor_one_identity(self):
        a = np.arange(12.0).reshape(1, 3, 4)
        np.testing.assert_array_equal(box_downsample(a, 1), a)

    def test_2x2_mean(self):
        a = np.array([[[0.0, 1.0], [1.0, 0.0]]])
        np.testing.assert_allclose(box_downsample(a, 2), [[[0.5]]])

    def test_constant_preserved(self):
        np.testing.assert_allclose(box_downsample(np.full((1, 8, 8), 0.3), 4), 0.3)

    def test_nondivisible_pads_by_replication(self):
        a = np.array([[[1.0, 2.0, 3.0]]])  # 1x3, factor 2 -> pad to 1x4
        out = box_downsample(a, 2)
        np.testing.assert_allclose(out, [[[1.5, 3.0]]])

    def test_down_then_up_on_constant_is_identity(self):
        a = np.full((2, 8, 8), 0.42)
        np.testing.assert_allclose(bilinear_upsample(box_downsample(a, 4), 4), a)

    def test_factor_zero_rejected(self):
        with pytest.raises(ValueError):
            box_downsample(np.zeros((1, 2, 2)), 0)


class TestValidation:
    def test_scalar_field_rejects_3d(self):
        with pytest.raises(ShapeError):
            as_scalar_field(np.zeros((2, 2, 2)))

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            as_scalar_field(np.array([[np.nan, 0.0]]))
        with pytest.raises(ValueError):
            as_stack(np.array([[[np.inf]]]))

    def test_2d_promoted_to_single_channel(self):
        assert as_stack(np.zeros((4, 5))).shape == (1, 4, 5)
