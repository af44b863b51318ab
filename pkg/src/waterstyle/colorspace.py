"""sRGB color conversions: luma and CIELAB (D65, 2-degree observer)."""

import numpy as np

# Rec.601 luma weights.
_LUMA = np.array([0.299, 0.587, 0.114])

# sRGB -> XYZ (linear light, D65).
_RGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])

# D65 reference white, equal to the matrix row sums.
_WHITE = _RGB_TO_XYZ.sum(axis=1)

_DELTA = 6.0 / 29.0


def luma(img):
    """Rec.601 luma of an (H, W, 3) image, shape (H, W)."""
    a = np.asarray(img, dtype=np.float64)
    return a @ _LUMA


def srgb_to_linear(img):
    """Undo the sRGB transfer curve."""
    a = np.asarray(img, dtype=np.float64)
    low = a / 12.92
    high = ((a + 0.055) / 1.055) ** 2.4
    return np.where(a <= 0.04045, low, high)


def srgb_to_lab(img):
    """Convert an sRGB (H, W, 3) image in [0, 1] to CIELAB.

    Returns an (H, W, 3) array holding L* in [0, 100] and a*/b* around 0;
    sRGB white maps to (100, 0, 0) and black to (0, 0, 0).
    """
    linear = srgb_to_linear(img)
    xyz = linear @ _RGB_TO_XYZ.T
    t = xyz / _WHITE

    cube = _DELTA ** 3
    f = np.where(t > cube, np.cbrt(t), t / (3.0 * _DELTA ** 2) + 4.0 / 29.0)

    fx, fy, fz = f[..., 0], f[..., 1], f[..., 2]
    lab = np.empty_like(f)
    lab[..., 0] = 116.0 * fy - 16.0
    lab[..., 1] = 500.0 * (fx - fy)
    lab[..., 2] = 200.0 * (fy - fz)
    return lab
