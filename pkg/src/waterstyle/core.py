"""Array containers and resampling primitives.

Conventions used throughout the package:

* image   -- float64 array of shape (H, W, 3), values in [0, 1], sRGB
* depth   -- float64 array of shape (H, W), relative depth in [0, 1],
             larger value = farther from the camera
* features -- float64 array of shape (C, H, W), unbounded but finite

All functions are pure; arrays are never modified in place.
"""

import numpy as np

from .errors import InvalidArgumentError


def validate_image(img):
    """Return ``img`` as a float64 (H, W, 3) array with values in [0, 1]."""
    a = np.asarray(img, dtype=np.float64)
    if a.ndim != 3 or a.shape[2] != 3:
        raise InvalidArgumentError(f"image must have shape (H, W, 3), got {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidArgumentError("image must have at least one pixel")
    if not np.isfinite(a).all():
        raise InvalidArgumentError("image contains non-finite values")
    if a.min() < 0.0 or a.max() > 1.0:
        raise InvalidArgumentError("image values must lie in [0, 1]")
    return a


def validate_depth(depth):
    """Return ``depth`` as a float64 (H, W) array with values in [0, 1]."""
    a = np.asarray(depth, dtype=np.float64)
    if a.ndim != 2:
        raise InvalidArgumentError(f"depth map must have shape (H, W), got {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidArgumentError("depth map must have at least one pixel")
    if not np.isfinite(a).all():
        raise InvalidArgumentError("depth map contains non-finite values")
    if a.min() < 0.0 or a.max() > 1.0:
        raise InvalidArgumentError("depth values must lie in [0, 1]")
    return a


def validate_features(feats):
    """Return ``feats`` as a float64 (C, H, W) array of finite values."""
    a = np.asarray(feats, dtype=np.float64)
    if a.ndim != 3:
        raise InvalidArgumentError(f"feature tensor must have shape (C, H, W), got {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1 or a.shape[2] < 1:
        raise InvalidArgumentError("feature tensor dimensions must be >= 1")
    if not np.isfinite(a).all():
        raise InvalidArgumentError("feature tensor contains non-finite values")
    return a


def _axis_coords(n_src, n_dst):
    # Half-pixel sample centers: dst pixel i samples src coordinate
    # (i + 0.5) * n_src / n_dst - 0.5, clamped to the valid range.
    x = (np.arange(n_dst, dtype=np.float64) + 0.5) * (n_src / n_dst) - 0.5
    x = np.clip(x, 0.0, n_src - 1.0)
    lo = np.floor(x).astype(np.intp)
    hi = np.minimum(lo + 1, n_src - 1)
    frac = x - lo
    return lo, hi, frac


def resize_bilinear(arr, new_h, new_w):
    """Bilinear resampling of a 2-D plane or a (C, H, W) tensor.

    Uses half-pixel sample centers with edge clamping.  Resizing to the
    source dimensions returns an exact copy.
    """
    a = np.asarray(arr, dtype=np.float64)
    if a.ndim not in (2, 3):
        raise InvalidArgumentError(f"expected 2-D or (C, H, W) array, got ndim={a.ndim}")
    if new_h < 1 or new_w < 1:
        raise InvalidArgumentError("target dimensions must be >= 1")
    h, w = a.shape[-2], a.shape[-1]
    if (new_h, new_w) == (h, w):
        return a.copy()

    y0, y1, fy = _axis_coords(h, new_h)
    x0, x1, fx = _axis_coords(w, new_w)

    # Interpolate rows, then columns.
    rows = a[..., y0, :] * (1.0 - fy)[:, None] + a[..., y1, :] * fy[:, None]
    out = rows[..., :, x0] * (1.0 - fx) + rows[..., :, x1] * fx
    return out


def resize_image(img, new_h, new_w):
    """Resize an (H, W, 3) image; output stays in [0, 1]."""
    a = validate_image(img)
    out = resize_bilinear(np.moveaxis(a, 2, 0), new_h, new_w)
    return np.clip(np.moveaxis(out, 0, 2), 0.0, 1.0)


def resize_depth(depth, new_h, new_w):
    """Resize an (H, W) depth map; output stays in [0, 1]."""
    a = validate_depth(depth)
    return np.clip(resize_bilinear(a, new_h, new_w), 0.0, 1.0)


def scaled_size(dim, ratio):
    """Scale a dimension by ``ratio`` with round-half-up, floored at 1."""
    return max(1, int(np.floor(dim * ratio + 0.5)))


def build_scale_set(feats, scales):
    """Downsampled copies of ``feats``, one per ratio in ``scales``.

    Each ratio must lie in (0, 1]; ratio 1.0 yields the input unchanged.
    """
    a = validate_features(feats)
    scales = list(scales)
    if not scales:
        raise InvalidArgumentError("scale list must be non-empty")
    out = []
    for s in scales:
        if not (0.0 < s <= 1.0):
            raise InvalidArgumentError(f"scale ratio must be in (0, 1], got {s}")
        if s == 1.0:
            out.append(a)
        else:
            out.append(resize_bilinear(a, scaled_size(a.shape[1], s), scaled_size(a.shape[2], s)))
    return out


def extract_pixel_features(img, patch_radius=0):
    """Shifted-patch pixel features of an image.

    Returns a (3 * (2r+1)**2, H, W) tensor.  Channel layout is offset-major:
    channel index ((dy+r)*(2r+1) + (dx+r))*3 + c holds, at pixel (y, x), the
    image value at (y+dy, x+dx, c) with edge-replicate padding.  Radius 0
    yields the 3 raw channels.
    """
    a = validate_image(img)
    r = int(patch_radius)
    if r < 0:
        raise InvalidArgumentError("patch radius must be >= 0")
    h, w, _ = a.shape
    if r == 0:
        return np.ascontiguousarray(np.moveaxis(a, 2, 0))
    padded = np.pad(a, ((r, r), (r, r), (0, 0)), mode="edge")
    k = 2 * r + 1
    out = np.empty((3 * k * k, h, w), dtype=np.float64)
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            base = ((dy + r) * k + (dx + r)) * 3
            block = padded[r + dy:r + dy + h, r + dx:r + dx + w, :]
            out[base:base + 3] = np.moveaxis(block, 2, 0)
    return out


def center_channel_base(patch_radius):
    """Index of the first center-offset channel in a shifted-patch tensor."""
    r = int(patch_radius)
    k = 2 * r + 1
    return (r * k + r) * 3


def features_to_image(feats, patch_radius=0):
    """Invert :func:`extract_pixel_features` by taking the center channels.

    Does not clip; callers clamp to [0, 1] where an image is required.
    """
    a = validate_features(feats)
    r = int(patch_radius)
    expected = 3 * (2 * r + 1) ** 2
    if a.shape[0] != expected:
        raise InvalidArgumentError(
            f"expected {expected} channels for patch radius {r}, got {a.shape[0]}")
    base = center_channel_base(r)
    return np.moveaxis(a[base:base + 3], 0, 2).copy()
