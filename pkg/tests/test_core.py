import dataclasses

import numpy as np
import pytest
from hypothesis import given, strategies as st

from isec.core import (FlowField, GradientField, IsecParams, LabelMap, ParamError, RasterImage,
                       relabel_dense, validate_params)

GOOD = IsecParams(low_threshold=0.05, high_threshold_cap=0.30, threshold_step=0.05, filter_size=11,
                  min_filter_size=3, high_low_ratio=2, ed_binarize_threshold=0.05, min_superpixel_area=4)


def test_validate_accepts_good_params():
    assert validate_params(GOOD) is GOOD


@pytest.mark.parametrize("change, message", [
    (dict(filter_size=10), "filter_size must be odd"),
    (dict(low_threshold=0.3, high_threshold_cap=0.1), "t < T required"),
    (dict(min_filter_size=4), "min_filter_size must be odd"),
    (dict(min_filter_size=13), "min_filter_size must be <= filter_size"),
    (dict(threshold_step=0), "threshold_step must be > 0"),
    (dict(high_low_ratio=1.0), "high_low_ratio must be > 1"),
    (dict(ed_binarize_threshold=0), "ed_binarize_threshold"),
    (dict(min_superpixel_area=0), "min_superpixel_area"),
    (dict(filter_size=1), "filter_size must be >= 3"),
])
def test_validate_names_broken_rule(change, message):
    with pytest.raises(ParamError, match=message):
        validate_params(dataclasses.replace(GOOD, **change))


@given(st.floats(0.01, 0.5), st.floats(0.51, 1.0), st.floats(0.001, 0.5), st.sampled_from([3, 5, 7, 9, 11]))
def test_validate_idempotent(t, T, step, size):
    p = IsecParams(low_threshold=t, high_threshold_cap=T, threshold_step=step, filter_size=size)
    assert validate_params(validate_params(p)) == validate_params(p)
    ks = p.thresholds()
    assert ks[0] == t and ks[-1] <= T + 1e-9 and len(ks) >= 1
    assert all(b > a for a, b in zip(ks, ks[1:]))


def test_default_schedule_has_six_iterations():
    assert len(IsecParams().thresholds()) == 6


@given(st.integers(3, 9), st.integers(3, 9), st.data())
def test_raster_round_trip(w, h, data):
    raw = data.draw(st.binary(min_size=w * h * 3, max_size=w * h * 3))
    img = RasterImage.from_samples(w, h, raw)
    assert img.to_samples() == raw
    assert (img.width, img.height) == (w, h)
    labels = data.draw(st.lists(st.integers(0, 1000), min_size=w * h, max_size=w * h))
    assert LabelMap.from_samples(w, h, labels).to_samples() == labels


def test_raster_rejects_small_or_wrong():
    with pytest.raises(ValueError):
        RasterImage(np.zeros((2, 5, 3), np.uint8))
    with pytest.raises(ValueError):
        RasterImage(np.zeros((5, 5, 3), np.float32))
    with pytest.raises(ValueError):
        RasterImage.from_samples(3, 3, b"\0" * 26)


def test_types_are_read_only():
    img = RasterImage(np.zeros((3, 3, 3), np.uint8))
    with pytest.raises(ValueError):
        img.data[0, 0, 0] = 1
    g = GradientField(np.zeros((3, 3)), np.zeros((3, 3)))
    with pytest.raises(ValueError):
        g.magnitude[0, 0] = 1


def test_gradient_field_invariants():
    with pytest.raises(ValueError):
        GradientField(np.zeros((3, 3)), np.zeros((3, 4)))
    with pytest.raises(ValueError):
        GradientField(-np.ones((3, 3)), np.zeros((3, 3)))
    with pytest.raises(ValueError):
        GradientField(np.full((3, 3), np.inf), np.zeros((3, 3)))


def test_flow_field_validity_mask():
    dx = np.array([[0, 2e9], [1, 0]], np.float32)
    f = FlowField(dx, np.zeros((2, 2), np.float32))
    assert f.valid().tolist() == [[True, False], [True, True]]
    with pytest.raises(ValueError):
        FlowField(np.full((2, 2), np.nan), np.zeros((2, 2)))


def test_label_map_counts_and_density():
    lm = LabelMap(np.array([[0, 2], [2, 0]]))
    assert lm.label_count == 3 and not lm.is_dense()
    with pytest.raises(ValueError):
        LabelMap(np.array([[0, -1]]))


def test_relabel_dense_raster_order():
    assert relabel_dense(np.array([[7, 7, 3], [9, 3, 3]])).tolist() == [[0, 0, 1], [2, 1, 1]]
