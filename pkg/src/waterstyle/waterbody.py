"""Waterbody extraction from a style image.

The farthest pixels of the style depth map locate the water column; their
channel-wise median gives the background color, and a bluish-green color
filter removes object and seabed pixels whose red channel dominates.  The
resulting mask restricts style statistics to waterbody appearance so that
no object texture is transferred.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .core import validate_depth, validate_image
from .errors import InvalidArgumentError
from .linalg import compute_stats

DEFAULT_FAR_FRACTION = 0.05
DEFAULT_BG_MARGIN = 0.0


@dataclass(frozen=True)
class WaterbodyEstimate:
    background_color: np.ndarray  # (3,) in [0, 1]
    mask: np.ndarray              # (H, W) bool, at style-image resolution
    far_fraction: float = DEFAULT_FAR_FRACTION


def _lower_median(values):
    # Deterministic median: element floor((n-1)/2) of the sorted values.
    s = np.sort(values)
    return s[(len(s) - 1) // 2]


def estimate_background(style, depth_s, far_fraction=DEFAULT_FAR_FRACTION):
    """Channel-wise median color of the farthest ``far_fraction`` pixels.

    Ties between equal depths are broken by row-major pixel order.
    """
    img = validate_image(style)
    d = validate_depth(depth_s)
    if d.shape != img.shape[:2]:
        raise InvalidArgumentError(
            f"depth shape {d.shape} does not match image dims {img.shape[:2]}")
    if not (0.0 < far_fraction <= 1.0):
        raise InvalidArgumentError("far fraction must be in (0, 1]")
    n = d.size
    n_sel = int(np.ceil(far_fraction * n))
    order = np.argsort(-d.reshape(-1), kind="stable")[:n_sel]
    colors = img.reshape(-1, 3)[order]
    return np.array([_lower_median(colors[:, ch]) for ch in range(3)])


def bluish_green_mask(style, margin=DEFAULT_BG_MARGIN):
    """Pixels whose blue and green channels dominate red by ``margin``."""
    img = validate_image(style)
    if margin < 0.0:
        raise InvalidArgumentError("margin must be >= 0")
    r, g, b = img[:, :, 0], img[:, :, 1], img[:, :, 2]
    return (b >= r + margin) & (g >= r + margin)


def estimate_waterbody(style, depth_s, far_fraction=DEFAULT_FAR_FRACTION,
                       margin=DEFAULT_BG_MARGIN):
    """Estimate the style image's waterbody background color and pixel mask.

    The mask intersects the bluish-green filter with the far-depth region
    (depth at or above the 1 - far_fraction quantile).  If the intersection
    selects fewer than 2 pixels the depth cut is relaxed fourfold, then
    dropped entirely; an empty color filter leaves the mask full so callers
    fall back to whole-image statistics.
    """
    img = validate_image(style)
    d = validate_depth(depth_s)
    if d.shape != img.shape[:2]:
        raise InvalidArgumentError(
            f"depth shape {d.shape} does not match image dims {img.shape[:2]}")
    background = estimate_background(img, d, far_fraction)
    color_mask = bluish_green_mask(img, margin)

    q = np.quantile(d, max(0.0, 1.0 - far_fraction))
    mask = color_mask & (d >= q)
    if mask.sum() < 2:
        q = np.quantile(d, max(0.0, 1.0 - 4.0 * far_fraction))
        mask = color_mask & (d >= q)
    if mask.sum() < 2:
        mask = color_mask
    if mask.sum() < 2:
        warnings.warn("waterbody mask is empty; falling back to full-image statistics")
        mask = np.ones_like(color_mask)
    return WaterbodyEstimate(background_color=background, mask=mask,
                             far_fraction=far_fraction)


def _resize_mask_nearest(mask, new_h, new_w):
    h, w = mask.shape
    if (new_h, new_w) == (h, w):
        return mask.copy()
    ys = np.minimum(((np.arange(new_h) + 0.5) * (h / new_h)).astype(np.intp), h - 1)
    xs = np.minimum(((np.arange(new_w) + 0.5) * (w / new_w)).astype(np.intp), w - 1)
    return mask[ys][:, xs]


def waterbody_stats(style_features, estimate):
    """Style statistics restricted to waterbody pixels.

    The mask is resampled to the feature resolution with nearest-neighbor
    sampling; if fewer than 2 feature pixels survive, full-image statistics
    are used and a warning is emitted.
    """
    feats = np.asarray(style_features, dtype=np.float64)
    mask = _resize_mask_nearest(estimate.mask, feats.shape[1], feats.shape[2])
    if mask.sum() < 2:
        warnings.warn("waterbody mask selects fewer than 2 feature pixels; "
                      "using full-image statistics")
        return compute_stats(feats)
    return compute_stats(feats, mask)
