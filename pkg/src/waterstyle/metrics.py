"""Image losses and quality metrics.

All squared-norm losses are per-element means so values are comparable
across resolutions.  SSIM and GMSD operate on Rec.601 luma with a dynamic
range of 1.0; RMSE and PSNR are reported on the conventional 8-bit scale.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import convolve2d

from .colorspace import luma, srgb_to_lab
from .core import validate_image
from .errors import InvalidArgumentError, MissingComponentError

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

# Gradient-similarity stabilizer on the [0, 1] intensity scale.
GMSD_C = 0.0026

_PREWITT_X = np.array([[1.0, 0.0, -1.0],
                       [1.0, 0.0, -1.0],
                       [1.0, 0.0, -1.0]]) / 3.0
_PREWITT_Y = _PREWITT_X.T


def _check_shapes(a, b):
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape:
        raise InvalidArgumentError(f"shape mismatch: {x.shape} vs {y.shape}")
    return x, y


def mse_loss(a, b):
    """Mean squared difference over all elements."""
    x, y = _check_shapes(a, b)
    return float(np.mean((x - y) ** 2))


def tensor_l2_loss(a, b):
    """Mean squared difference between two feature tensors."""
    return mse_loss(a, b)


def _gaussian_kernel(size, sigma):
    half = (size - 1) / 2.0
    x = np.arange(size) - half
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    k = np.outer(g, g)
    return k / k.sum()


def ssim(a, b, window=SSIM_WINDOW, k1=SSIM_K1, k2=SSIM_K2):
    """Structural similarity of two images, computed on luma.

    Local statistics use a Gaussian window (sigma 1.5, default 11 taps,
    'valid' support); the window shrinks to the largest odd size that fits
    small images.  Identical inputs score exactly 1.0.
    """
    x = luma(validate_image(a))
    y = luma(validate_image(b))
    if x.shape != y.shape:
        raise InvalidArgumentError(f"shape mismatch: {x.shape} vs {y.shape}")
    win = min(window, x.shape[0], x.shape[1])
    if win % 2 == 0:
        win -= 1
    if win < 1:
        raise InvalidArgumentError("image too small for SSIM window")
    kern = _gaussian_kernel(win, SSIM_SIGMA)

    mu_x = convolve2d(x, kern, mode="valid")
    mu_y = convolve2d(y, kern, mode="valid")
    var_x = convolve2d(x * x, kern, mode="valid") - mu_x * mu_x
    var_y = convolve2d(y * y, kern, mode="valid") - mu_y * mu_y
    cov = convolve2d(x * y, kern, mode="valid") - mu_x * mu_y

    c1 = (k1 * 1.0) ** 2
    c2 = (k2 * 1.0) ** 2
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def lab_color_loss(a, b):
    """Mean squared CIELAB difference of two sRGB images."""
    x = validate_image(a)
    y = validate_image(b)
    if x.shape != y.shape:
        raise InvalidArgumentError(f"shape mismatch: {x.shape} vs {y.shape}")
    return float(np.mean((srgb_to_lab(x) - srgb_to_lab(y)) ** 2))


def fft_loss(a, b):
    """Mean squared difference of DFT magnitude spectra.

    Spectra carry a 1/(H*W) forward normalization, so a constant offset d
    contributes d**2 / (H*W) to the loss.  Magnitudes (not phases) are
    compared, making the loss insensitive to circular shifts.
    """
    x = validate_image(a)
    y = validate_image(b)
    if x.shape != y.shape:
        raise InvalidArgumentError(f"shape mismatch: {x.shape} vs {y.shape}")
    h, w, _ = x.shape
    total = 0.0
    for ch in range(3):
        fx = np.abs(np.fft.fft2(x[:, :, ch])) / (h * w)
        fy = np.abs(np.fft.fft2(y[:, :, ch])) / (h * w)
        total += float(np.mean((fx - fy) ** 2))
    return total / 3.0


def cosine_distance(emb_a, emb_b):
    """1 - cosine similarity of two embedding vectors, in [0, 2]."""
    u = np.asarray(emb_a, dtype=np.float64).reshape(-1)
    v = np.asarray(emb_b, dtype=np.float64).reshape(-1)
    if u.shape != v.shape:
        raise InvalidArgumentError(f"embedding lengths differ: {u.size} vs {v.size}")
    uu = float(u @ u)
    vv = float(v @ v)
    if uu == 0.0 or vv == 0.0:
        raise InvalidArgumentError("embeddings must be nonzero")
    return 1.0 - float(u @ v) / math.sqrt(uu * vv)


@dataclass
class LossReport:
    """Loss components; ``None`` marks a component that was not computed."""

    l_rec: Optional[float] = None
    l_ssim: Optional[float] = None
    l_color: Optional[float] = None
    l_fft: Optional[float] = None
    l_cos: Optional[float] = None
    l_feat: Optional[float] = None
    l_percept: Optional[float] = None


def aggregate_losses(report, stage=0):
    """Base and staged loss totals.

    The base total sums reconstruction, SSIM, LAB, FFT and embedding-cosine
    components.  For stage >= 1 the staged total adds the feature and
    perceptual components; at stage 0 it is absent (None).
    """
    if not (0 <= stage <= 4):
        raise InvalidArgumentError(f"stage must be in 0..4, got {stage}")
    base_parts = [("l_rec", report.l_rec), ("l_ssim", report.l_ssim),
                  ("l_color", report.l_color), ("l_fft", report.l_fft),
                  ("l_cos", report.l_cos)]
    for name, value in base_parts:
        if value is None:
            raise MissingComponentError(f"missing loss component: {name}")
    l0 = sum(value for _, value in base_parts)
    if stage == 0:
        return l0, None
    for name, value in (("l_feat", report.l_feat), ("l_percept", report.l_percept)):
        if value is None:
            raise MissingComponentError(f"missing loss component: {name}")
    return l0, l0 + report.l_feat + report.l_percept


@dataclass
class MetricReport:
    rmse: float   # on the 0..255 scale
    psnr: float   # dB; +inf for identical images
    ssim: float
    gmsd: float


def rmse_255(a, b):
    """Root mean squared error on the 8-bit 0..255 scale."""
    return 255.0 * math.sqrt(mse_loss(a, b))


def psnr_from_rmse(rmse):
    """PSNR in dB for an 8-bit-scale RMSE; infinite when rmse is 0."""
    if rmse < 0:
        raise InvalidArgumentError("rmse must be >= 0")
    if rmse == 0.0:
        return math.inf
    return 20.0 * math.log10(255.0 / rmse)


def _gradient_magnitude(plane):
    p = np.pad(plane, 1, mode="edge")
    gx = convolve2d(p, _PREWITT_X, mode="valid")
    gy = convolve2d(p, _PREWITT_Y, mode="valid")
    return np.sqrt(gx * gx + gy * gy)


def gmsd(a, b):
    """Gradient magnitude similarity deviation on luma.

    Prewitt 3x3 gradients with replicate borders; the score is the
    population standard deviation of the pointwise similarity map.
    """
    x = luma(validate_image(a))
    y = luma(validate_image(b))
    if x.shape != y.shape:
        raise InvalidArgumentError(f"shape mismatch: {x.shape} vs {y.shape}")
    g1 = _gradient_magnitude(x)
    g2 = _gradient_magnitude(y)
    sim = (2.0 * g1 * g2 + GMSD_C) / (g1 * g1 + g2 * g2 + GMSD_C)
    return float(sim.std())


def evaluate(a, b):
    """RMSE, PSNR, SSIM and GMSD of an image pair."""
    x = validate_image(a)
    y = validate_image(b)
    if x.shape != y.shape:
        raise InvalidArgumentError(f"shape mismatch: {x.shape} vs {y.shape}")
    r = rmse_255(x, y)
    return MetricReport(rmse=r, psnr=psnr_from_rmse(r), ssim=ssim(x, y),
                        gmsd=gmsd(x, y))
