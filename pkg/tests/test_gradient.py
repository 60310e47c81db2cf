import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isec.gradient import channel_gradients, extract_gradient, fuse_max, smooth

from oracles import dense_gaussian


def test_smooth_keeps_constants():
    a = np.full((12, 9, 3), 77, np.uint8)
    np.testing.assert_allclose(smooth(a, 2.3), 77.0, atol=1e-9)


def test_smooth_matches_dense_convolution():
    a = np.zeros((21, 21, 3))
    a[10, 10] = 255
    a[3, 17, 1] = 40
    out = smooth(a, 1.0)
    for c in range(3):
        np.testing.assert_allclose(out[:, :, c], dense_gaussian(a[:, :, c], 1.0), atol=1e-9)
    # bump away from the frame keeps its mass
    assert abs(out[:, :, 0].sum() - 255) < 1e-6


def test_smooth_tiny_sigma_is_identity():
    rng = np.random.default_rng(0)
    a = rng.integers(0, 256, (8, 8, 3))
    np.testing.assert_allclose(smooth(a, 1e-9), a)


def test_smooth_rejects_bad_sigma():
    with pytest.raises(ValueError):
        smooth(np.zeros((3, 3, 3)), 0)


def test_vertical_step_peaks_on_step_with_horizontal_orientation():
    a = np.zeros((9, 12, 3))
    a[:, 6:, 0] = 100
    (mag, ori), (g_mag, _), _ = channel_gradients(a)
    assert np.all(mag[:, [5, 6]] == mag.max())
    assert np.all(mag[:, :4] == 0) and np.all(mag[:, 8:] == 0)
    np.testing.assert_allclose(ori[mag > 0], 0.0)
    assert not g_mag.any()


def test_constant_image_has_zero_gradient():
    for mag, _ in channel_gradients(np.full((6, 7, 3), 12.0)):
        assert not mag.any()


def test_diagonal_ramp_orientation():
    y, x = np.mgrid[0:10, 0:10]
    a = np.repeat((x + y)[:, :, None], 3, axis=2).astype(float)
    _, (_, ori), _ = channel_gradients(a)
    # finite-difference oracle: d/dx == d/dy on the ramp, so the angle is pi/4
    np.testing.assert_allclose(ori[1:-1, 1:-1], np.pi / 4, atol=1e-12)


def test_orientation_folded_into_half_open_range():
    rng = np.random.default_rng(3)
    for mag, ori in channel_gradients(rng.normal(size=(16, 16, 3))):
        assert ori.min() >= 0 and ori.max() < np.pi


def test_fuse_red_only_edge_equals_red():
    a = np.zeros((8, 8, 3))
    a[:, 4:, 0] = 50
    a[:, :, 1] = 9
    chans = channel_gradients(a)
    fused = fuse_max(chans)
    np.testing.assert_array_equal(fused.magnitude, chans[0][0])
    np.testing.assert_array_equal(fused.orientation, chans[0][1])


def test_fuse_identical_channels():
    rng = np.random.default_rng(1)
    plane = rng.normal(size=(6, 6))
    a = np.repeat(plane[:, :, None], 3, axis=2)
    chans = channel_gradients(a)
    fused = fuse_max(chans)
    np.testing.assert_array_equal(fused.magnitude, chans[2][0])


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_fuse_is_elementwise_max_with_rgb_tiebreak(seed):
    rng = np.random.default_rng(seed)
    mags = [rng.integers(0, 4, (5, 6)).astype(float) for _ in range(3)]
    oris = [np.full((5, 6), c * 0.5) for c in range(3)]
    fused = fuse_max(list(zip(mags, oris)))
    # element-wise oracle
    for y in range(5):
        for x in range(6):
            vals = [m[y, x] for m in mags]
            best = max(vals)
            assert fused.magnitude[y, x] == best
            assert fused.orientation[y, x] == vals.index(best) * 0.5
            assert all(fused.magnitude[y, x] >= v for v in vals)


def test_fuse_dimension_mismatch():
    with pytest.raises(ValueError):
        fuse_max([(np.zeros((3, 3)), np.zeros((3, 3))), (np.zeros((3, 4)), np.zeros((3, 4)))])


def test_extract_gradient_is_normalised():
    rng = np.random.default_rng(5)
    img = rng.integers(0, 256, (20, 24, 3)).astype(np.uint8)
    g = extract_gradient(img)
    assert g.magnitude.max() == pytest.approx(1.0)
    assert not extract_gradient(np.zeros((5, 5, 3), np.uint8)).magnitude.any()
