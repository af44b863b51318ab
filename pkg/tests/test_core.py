import numpy as np
import pytest

from waterstyle.core import (build_scale_set, center_channel_base,
                             extract_pixel_features, features_to_image,
                             resize_bilinear, resize_depth, resize_image,
                             scaled_size)
from waterstyle.errors import InvalidArgumentError


def bilinear_oracle_1d(values, n_dst):
    # Independent scalar bilinear interpolation at half-pixel sample centers.
    n_src = len(values)
    out = []
    for i in range(n_dst):
        x = (i + 0.5) * n_src / n_dst - 0.5
        x = min(max(x, 0.0), n_src - 1.0)
        lo = int(np.floor(x))
        hi = min(lo + 1, n_src - 1)
        f = x - lo
        out.append(values[lo] * (1.0 - f) + values[hi] * f)
    return out


def test_resize_constant_stays_constant():
    img = np.full((5, 7), 0.5)
    out = resize_bilinear(img, 11, 3)
    assert np.array_equal(out, np.full((11, 3), 0.5))


def test_resize_identity_is_exact():
    rng = np.random.default_rng(1)
    img = rng.random((6, 9))
    out = resize_bilinear(img, 6, 9)
    assert np.array_equal(out, img)
    assert out is not img


def test_resize_matches_scalar_oracle():
    col = np.array([0.0, 1.0])
    out = resize_bilinear(col[:, None], 4, 1)
    expected = bilinear_oracle_1d([0.0, 1.0], 4)
    np.testing.assert_allclose(out[:, 0], expected, rtol=0, atol=0)
    assert expected == [0.0, 0.25, 0.75, 1.0]


def test_resize_2d_matches_separable_oracle():
    rng = np.random.default_rng(7)
    src = rng.random((3, 5))
    out = resize_bilinear(src, 5, 8)
    rows = np.array([bilinear_oracle_1d(src[:, j], 5) for j in range(5)]).T
    expected = np.array([bilinear_oracle_1d(rows[i], 8) for i in range(5)])
    np.testing.assert_allclose(out, expected, atol=1e-15)


def test_resize_channel_first_tensor():
    rng = np.random.default_rng(2)
    t = rng.random((4, 6, 6))
    out = resize_bilinear(t, 3, 3)
    assert out.shape == (4, 3, 3)
    for c in range(4):
        np.testing.assert_array_equal(out[c], resize_bilinear(t[c], 3, 3))


def test_resize_rejects_zero_target():
    with pytest.raises(InvalidArgumentError):
        resize_bilinear(np.zeros((4, 4)), 0, 4)


def test_resize_image_and_depth_stay_in_range():
    rng = np.random.default_rng(3)
    img = rng.random((8, 8, 3))
    out = resize_image(img, 21, 5)
    assert out.min() >= 0.0 and out.max() <= 1.0
    d = rng.random((8, 8))
    out = resize_depth(d, 3, 17)
    assert out.min() >= 0.0 and out.max() <= 1.0


def test_scale_set_identity():
    rng = np.random.default_rng(4)
    t = rng.random((2, 8, 8))
    out = build_scale_set(t, [1.0])
    assert len(out) == 1
    assert np.array_equal(out[0], t)


def test_scale_set_dims():
    t = np.zeros((1, 8, 8))
    dims = [o.shape[1:] for o in build_scale_set(t, [1.0, 0.5])]
    assert dims == [(8, 8), (4, 4)]


def test_scale_set_round_half_up():
    assert scaled_size(7, 0.75) == 5
    assert scaled_size(5, 0.75) == 4
    t = np.zeros((1, 7, 5))
    (out,) = build_scale_set(t, [0.75])
    assert out.shape == (1, 5, 4)


def test_scale_set_rejects_bad_ratio():
    t = np.zeros((1, 4, 4))
    with pytest.raises(InvalidArgumentError):
        build_scale_set(t, [0.0])
    with pytest.raises(InvalidArgumentError):
        build_scale_set(t, [1.5])
    with pytest.raises(InvalidArgumentError):
        build_scale_set(t, [])


def test_pixel_features_radius0_roundtrip():
    rng = np.random.default_rng(5)
    img = rng.random((5, 4, 3))
    f = extract_pixel_features(img, 0)
    assert f.shape == (3, 5, 4)
    np.testing.assert_array_equal(f[0], img[:, :, 0])
    np.testing.assert_array_equal(features_to_image(f, 0), img)


def test_pixel_features_center_channels_equal_raw():
    rng = np.random.default_rng(6)
    img = rng.random((6, 6, 3))
    f = extract_pixel_features(img, 1)
    assert f.shape == (27, 6, 6)
    base = center_channel_base(1)
    for c in range(3):
        np.testing.assert_array_equal(f[base + c], img[:, :, c])
    np.testing.assert_array_equal(features_to_image(f, 1), img)


def test_pixel_features_match_manual_shifts():
    # 3x3 intensity gradient; hand-built shifted copies with replicate edges.
    g = np.linspace(0.0, 1.0, 9).reshape(3, 3)
    img = np.stack([g, g * 0.5, g * 0.25], axis=2)
    f = extract_pixel_features(img, 1)
    padded = np.pad(img, ((1, 1), (1, 1), (0, 0)), mode="edge")
    k = 3
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            for c in range(3):
                idx = ((dy + 1) * k + (dx + 1)) * 3 + c
                manual = padded[1 + dy:4 + dy, 1 + dx:4 + dx, c]
                np.testing.assert_array_equal(f[idx], manual)
