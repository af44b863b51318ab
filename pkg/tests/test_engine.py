import math

import numpy as np
import pytest

from waterstyle.core import (extract_pixel_features, resize_bilinear,
                             resize_depth, scaled_size)
from waterstyle.engine import (FusionConfig, alpha_blend, depth_blend,
                               stylize, transfer_multiscale,
                               transfer_single_scale, wct_transfer)
from waterstyle.errors import InvalidArgumentError
from waterstyle.linalg import StyleStats, compute_stats


def test_wct_identity_transfer():
    rng = np.random.default_rng(0)
    f = rng.normal(0.5, 0.2, (3, 12, 12))
    s = compute_stats(f)
    out = wct_transfer(f, s, s, 1e-12)
    np.testing.assert_allclose(out, f, atol=1e-6)


def test_wct_scalar_closed_form():
    f_c = np.array([0.0, 2.0, 4.0]).reshape(1, 1, 3)
    stats_c = compute_stats(f_c)
    assert stats_c.mean[0] == pytest.approx(2.0)
    assert stats_c.cov[0, 0] == pytest.approx(4.0)
    stats_s = StyleStats(mean=np.array([10.0]), cov=np.array([[1.0]]))
    out = wct_transfer(f_c, stats_c, stats_s, 1e-12)
    np.testing.assert_allclose(out.reshape(-1), [9.0, 10.0, 11.0], atol=1e-9)


def test_wct_constant_content_maps_to_style_mean():
    f_c = np.full((2, 3, 3), 0.4)
    stats_c = compute_stats(f_c)
    stats_s = StyleStats(mean=np.array([1.0, -2.0]),
                         cov=np.array([[2.0, 0.0], [0.0, 3.0]]))
    out = wct_transfer(f_c, stats_c, stats_s)
    np.testing.assert_allclose(out[0], 1.0, atol=1e-6)
    np.testing.assert_allclose(out[1], -2.0, atol=1e-6)


def test_wct_channel_mismatch():
    f = np.zeros((2, 2, 2))
    s2 = compute_stats(np.random.default_rng(1).random((2, 3, 3)))
    s3 = compute_stats(np.random.default_rng(2).random((3, 3, 3)))
    with pytest.raises(InvalidArgumentError):
        wct_transfer(f, s2, s3)


def test_depth_blend_boundaries():
    rng = np.random.default_rng(3)
    a, b = rng.normal(size=(2, 4, 4)), rng.normal(size=(2, 4, 4))
    np.testing.assert_array_equal(depth_blend(a, b, np.ones((4, 4))), a)
    np.testing.assert_array_equal(depth_blend(a, b, np.zeros((4, 4))), b)


def test_depth_blend_midpoint():
    a = np.full((1, 2, 2), 2.0)
    b = np.full((1, 2, 2), 4.0)
    np.testing.assert_allclose(depth_blend(a, b, np.full((2, 2), 0.5)), 3.0)


def test_depth_blend_resamples_weight_map():
    rng = np.random.default_rng(4)
    a, b = rng.normal(size=(1, 6, 6)), rng.normal(size=(1, 6, 6))
    w_small = rng.random((3, 3))
    out = depth_blend(a, b, w_small)
    w_up = np.clip(resize_bilinear(w_small, 6, 6), 0.0, 1.0)
    np.testing.assert_allclose(out, w_up * a + (1 - w_up) * b, atol=1e-15)


def test_alpha_blend_boundaries_bit_exact():
    rng = np.random.default_rng(5)
    a, b = rng.normal(size=(2, 3, 3)), rng.normal(size=(2, 3, 3))
    assert np.array_equal(alpha_blend(a, b, 0.0), b)
    assert np.array_equal(alpha_blend(a, b, 1.0), a)


def test_alpha_blend_arithmetic():
    a = np.full((1, 2, 2), 8.0)
    b = np.zeros((1, 2, 2))
    np.testing.assert_allclose(alpha_blend(a, b, 0.25), 2.0)


def test_alpha_blend_range_check():
    a = np.zeros((1, 2, 2))
    with pytest.raises(InvalidArgumentError):
        alpha_blend(a, a, 1.5)


def _cfg(**kw):
    kw.setdefault("scales", (1.0,))
    kw.setdefault("use_waterbody_mask", False)
    kw.setdefault("apply_guided_filter", False)
    return FusionConfig(**kw)


def test_single_scale_alpha0_returns_content():
    rng = np.random.default_rng(6)
    f_c = rng.random((2, 6, 6))
    f_s = rng.random((2, 6, 6))
    d = rng.random((6, 6))
    out = transfer_single_scale(f_c, f_s, d, None, _cfg(alpha=0.0))
    np.testing.assert_array_equal(out, f_c)


def test_single_scale_flat_depth_is_half_blend():
    rng = np.random.default_rng(7)
    f_c = rng.random((2, 8, 8))
    f_s = rng.random((2, 8, 8))
    d = np.full((8, 8), 0.55)
    cfg = _cfg(alpha=1.0, eps=1e-12)
    out = transfer_single_scale(f_c, f_s, d, None, cfg)
    f_tilde = wct_transfer(f_c, compute_stats(f_c), compute_stats(f_s), 1e-12)
    np.testing.assert_allclose(out, 0.5 * f_tilde + 0.5 * f_c, atol=1e-9)


def test_single_scale_chained_scalar_oracle():
    # 1-channel pipeline checked stage by stage with plain scalar math.
    f_c = np.array([[0.1, 0.2], [0.3, 0.4]]).reshape(1, 2, 2)
    f_s = np.array([[0.5, 0.5], [0.9, 0.9]]).reshape(1, 2, 2)
    d = np.array([[0.2, 0.2], [0.8, 0.8]])
    cfg = _cfg(alpha=0.7, eps=1e-12, tau_override=0.5, pool_kernel=1,
               k_base=10.0, k_eps=0.05)
    out = transfer_single_scale(f_c, f_s, d, None, cfg)

    mu_c, cov_c = 0.25, 0.05 / 3.0
    mu_s, cov_s = 0.7, 0.16 / 3.0
    sigma_d = 0.3
    k = 10.0 / (sigma_d + 0.05)
    expected = np.empty((2, 2))
    for y in range(2):
        for x in range(2):
            f = f_c[0, y, x]
            f_t = mu_s + math.sqrt(cov_s) * ((f - mu_c) / math.sqrt(cov_c))
            w = 1.0 / (1.0 + math.exp(-k * (d[y, x] - 0.5)))
            f_d = w * f_t + (1.0 - w) * f
            expected[y, x] = 0.7 * f_d + 0.3 * f
    np.testing.assert_allclose(out[0], expected, atol=1e-12)


def test_multiscale_single_scale_degeneracy_bit_exact():
    rng = np.random.default_rng(8)
    f_c = rng.random((3, 10, 10))
    f_s = rng.random((3, 10, 10))
    d = rng.random((10, 10))
    cfg = _cfg(alpha=0.8)
    multi = transfer_multiscale(f_c, f_s, d, None, cfg)
    single = transfer_single_scale(f_c, f_s, d, None, cfg)
    assert np.array_equal(multi, single)


def test_multiscale_alpha0_bit_exact():
    rng = np.random.default_rng(9)
    f_c = rng.random((2, 12, 12))
    f_s = rng.random((2, 12, 12))
    d = rng.random((12, 12))
    cfg = _cfg(alpha=0.0, scales=(1.0, 0.5))
    out = transfer_multiscale(f_c, f_s, d, None, cfg)
    np.testing.assert_array_equal(out, f_c)


def test_multiscale_two_scale_oracle():
    rng = np.random.default_rng(10)
    f_c = rng.random((2, 8, 8))
    f_s = rng.random((2, 8, 8))
    d = rng.random((8, 8))
    cfg = _cfg(alpha=1.0, scales=(1.0, 0.5), scale_weights=(0.5, 0.5))
    out = transfer_multiscale(f_c, f_s, d, None, cfg)

    r_full = transfer_single_scale(f_c, f_s, d, None, cfg)
    h2, w2 = scaled_size(8, 0.5), scaled_size(8, 0.5)
    r_half = transfer_single_scale(resize_bilinear(f_c, h2, w2),
                                   resize_bilinear(f_s, h2, w2),
                                   resize_depth(d, h2, w2), None, cfg)
    expected = 0.5 * r_full + 0.5 * resize_bilinear(r_half, 8, 8)
    np.testing.assert_array_equal(out, expected)


def test_multiscale_constant_tensors():
    f_c = np.full((2, 8, 8), 0.5)
    f_s = np.full((2, 8, 8), 0.25)
    d = np.full((8, 8), 0.5)
    cfg = _cfg(alpha=1.0, scales=(1.0, 0.5, 0.25))
    out = transfer_multiscale(f_c, f_s, d, None, cfg)
    single = transfer_single_scale(f_c, f_s, d, None, cfg)
    np.testing.assert_allclose(out, single, atol=1e-12)
    assert np.ptp(out) < 1e-12


def test_multiscale_convex_hull_of_scale_results():
    rng = np.random.default_rng(11)
    f_c = rng.random((2, 8, 8))
    f_s = rng.random((2, 8, 8))
    d = rng.random((8, 8))
    cfg = _cfg(alpha=1.0, scales=(1.0, 0.5), scale_weights=(0.3, 0.7))
    out = transfer_multiscale(f_c, f_s, d, None, cfg)
    r1 = transfer_single_scale(f_c, f_s, d, None, cfg)
    h2 = scaled_size(8, 0.5)
    r2 = resize_bilinear(
        transfer_single_scale(resize_bilinear(f_c, h2, h2),
                              resize_bilinear(f_s, h2, h2),
                              resize_depth(d, h2, h2), None, cfg), 8, 8)
    lo = np.minimum(r1, r2)
    hi = np.maximum(r1, r2)
    assert np.all(out >= lo - 1e-12)
    assert np.all(out <= hi + 1e-12)


def test_multiscale_thread_count_invariant():
    rng = np.random.default_rng(12)
    f_c = rng.random((3, 16, 16))
    f_s = rng.random((3, 16, 16))
    d = rng.random((16, 16))
    out1 = transfer_multiscale(f_c, f_s, d, None,
                               _cfg(scales=(1.0, 0.75, 0.5), threads=1))
    out8 = transfer_multiscale(f_c, f_s, d, None,
                               _cfg(scales=(1.0, 0.75, 0.5), threads=8))
    assert np.array_equal(out1, out8)


def test_alpha_distance_linear():
    rng = np.random.default_rng(13)
    f_d = rng.random((2, 6, 6))
    f_c = rng.random((2, 6, 6))
    d1 = np.linalg.norm(alpha_blend(f_d, f_c, 0.25) - f_c)
    d2 = np.linalg.norm(alpha_blend(f_d, f_c, 0.5) - f_c)
    d4 = np.linalg.norm(alpha_blend(f_d, f_c, 1.0) - f_c)
    assert d2 == pytest.approx(2 * d1, rel=1e-9)
    assert d4 == pytest.approx(4 * d1, rel=1e-9)


def test_no_nans_on_degenerate_inputs():
    f_c = np.full((3, 8, 8), 0.5)
    f_s = np.full((3, 8, 8), 0.2)
    d = np.zeros((8, 8))
    out = transfer_multiscale(f_c, f_s, d, None, _cfg(scales=(1.0, 0.5)))
    assert np.isfinite(out).all()


def test_config_validation():
    with pytest.raises(InvalidArgumentError):
        FusionConfig(alpha=1.2)
    with pytest.raises(InvalidArgumentError):
        FusionConfig(scales=())
    with pytest.raises(InvalidArgumentError):
        FusionConfig(scales=(2.0,))
    with pytest.raises(InvalidArgumentError):
        FusionConfig(scales=(1.0, 0.5), scale_weights=(1.0,))
    with pytest.raises(InvalidArgumentError):
        FusionConfig(scales=(1.0, 0.5), scale_weights=(0.9, 0.2))
    with pytest.raises(InvalidArgumentError):
        FusionConfig(threads=0)


def test_stylize_alpha0_no_filter_is_content_bit_exact():
    rng = np.random.default_rng(14)
    content = rng.random((20, 20, 3))
    style = rng.random((20, 20, 3))
    d = rng.random((20, 20))
    cfg = FusionConfig(alpha=0.0, apply_guided_filter=False)
    out, _ = stylize(content, style, d, d, cfg)
    np.testing.assert_array_equal(out, content)


def test_stylize_identity_style_smooth_default_config():
    # Smooth bluish content used as its own style; full waterbody mask.
    # Content must be smooth: the multi-scale pass low-passes whatever
    # detail the 0.25 grid cannot carry.
    n = 64
    yy, xx = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    base = 0.5 + 0.02 * np.sin(2 * np.pi * yy / n) * np.cos(2 * np.pi * xx / n)
    content = np.stack([base * 0.9, base * 0.95, base], axis=2)
    d = np.clip(0.5 + 0.3 * np.sin(2 * np.pi * 3 * yy / n), 0, 1)
    cfg = FusionConfig(alpha=1.0, far_fraction=1.0)
    out, _ = stylize(content, content, d, d, cfg)
    assert np.abs(out - content).max() <= 2.0 / 255.0


def test_stylize_identity_style_textured_single_scale():
    # Strong channel-correlated texture keeps the guided filter faithful;
    # a single scale avoids cross-resolution blur.
    rng = np.random.default_rng(18)
    u = rng.integers(0, 2, (48, 48)).astype(float)
    content = np.stack([0.78 * u, 0.1 + 0.78 * u, 0.2 + 0.78 * u], axis=2)
    d = rng.random((48, 48))
    cfg = FusionConfig(alpha=1.0, far_fraction=1.0, scales=(1.0,))
    out, _ = stylize(content, content, d, d, cfg)
    assert np.abs(out - content).max() <= 2.0 / 255.0


def test_stylize_mean_shift_toward_style_waterbody():
    # Two-tone content, uniform blue style, flat depths: with w = 0.5 and
    # alpha = 1 the output channel means land halfway to the style mean.
    rng = np.random.default_rng(15)
    content = np.empty((24, 24, 3))
    content[:12] = [0.6, 0.3, 0.2]
    content[12:] = [0.2, 0.5, 0.4]
    content = np.clip(content + 0.02 * rng.standard_normal(content.shape), 0, 1)
    style = np.tile(np.array([0.05, 0.45, 0.8]), (24, 24, 1))
    d = np.full((24, 24), 0.5)
    cfg = FusionConfig(alpha=1.0, apply_guided_filter=False)
    out, report = stylize(content, style, d, d, cfg)
    expected_means = 0.5 * np.array([0.05, 0.45, 0.8]) + \
        0.5 * content.reshape(-1, 3).mean(axis=0)
    np.testing.assert_allclose(out.reshape(-1, 3).mean(axis=0), expected_means,
                               atol=1e-3)
    np.testing.assert_allclose(report["background_color"], [0.05, 0.45, 0.8],
                               atol=1e-12)


def test_stylize_resamples_style_and_depths():
    rng = np.random.default_rng(16)
    content = rng.random((16, 16, 3))
    style = rng.random((10, 12, 3)) * [0.3, 0.8, 0.9]
    d_c = rng.random((8, 8))
    d_s = rng.random((5, 6))
    out, report = stylize(content, style, d_c, d_s,
                          FusionConfig(scales=(1.0, 0.5)))
    assert out.shape == (16, 16, 3)
    assert np.isfinite(out).all()
    assert 0.0 <= report["tau"] <= 1.0


def test_stylize_patch_radius_pipeline():
    rng = np.random.default_rng(19)
    content = rng.random((16, 16, 3))
    style = np.clip(rng.random((16, 16, 3)) * [0.2, 0.7, 1.0], 0, 1)
    d = rng.random((16, 16))
    cfg = FusionConfig(scales=(1.0, 0.5), patch_radius=1)
    out, _ = stylize(content, style, d, d, cfg)
    assert out.shape == (16, 16, 3)
    assert np.isfinite(out).all()
    assert 0.0 <= out.min() and out.max() <= 1.0
    # radius-1 features must feed 27 channels through the fusion
    f = extract_pixel_features(content, 1)
    assert f.shape[0] == 27


def test_stylize_report_fields():
    rng = np.random.default_rng(17)
    content = rng.random((16, 16, 3))
    d = rng.random((16, 16))
    _, report = stylize(content, content, d, d, FusionConfig(scales=(1.0,)))
    for key in ("tau", "k", "mu_d", "sigma_d", "background_color", "timings"):
        assert key in report
