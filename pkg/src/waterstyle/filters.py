"""Box filtering and guided-filter smoothing.

The guided filter fits a local linear model of the guide's luma in each
(2r+1)^2 window and applies it at the window center; with a constant guide
it degrades to plain box filtering, and with the guide equal to the input
it approaches the identity as epsilon goes to zero.
"""

from dataclasses import dataclass

import numpy as np

from .colorspace import luma
from .core import validate_image
from .errors import InvalidArgumentError


@dataclass(frozen=True)
class GuidedFilterParams:
    radius: int = 8
    epsilon: float = 1e-3

    def __post_init__(self):
        if self.radius < 0:
            raise InvalidArgumentError("guided filter radius must be >= 0")
        if self.epsilon < 0:
            raise InvalidArgumentError("guided filter epsilon must be >= 0")


def box_filter(plane, radius):
    """Mean over the (2r+1)^2 window with edge-replicate padding."""
    a = np.asarray(plane, dtype=np.float64)
    if a.ndim != 2:
        raise InvalidArgumentError(f"box filter expects a 2-D map, got ndim={a.ndim}")
    r = int(radius)
    if r < 0:
        raise InvalidArgumentError("radius must be >= 0")
    if r == 0:
        return a.copy()
    k = 2 * r + 1
    p = np.pad(a, r, mode="edge")
    out = _window_sum(p, k, axis=0)
    out = _window_sum(out, k, axis=1)
    return out / (k * k)


def _window_sum(a, k, axis):
    c = np.cumsum(a, axis=axis)
    zero = np.zeros_like(np.take(c, [0], axis=axis))
    c = np.concatenate([zero, c], axis=axis)
    n = a.shape[axis] - k + 1
    head = c.take(range(k, k + n), axis=axis)
    tail = c.take(range(0, n), axis=axis)
    return head - tail


def guided_filter(img, guide, params=GuidedFilterParams()):
    """Edge-preserving smoothing of ``img`` steered by ``guide``.

    Per channel p and guide luma I, the window statistics give
    a = cov(I, p) / (var(I) + eps) and b = mean(p) - a * mean(I); the
    output is a * I + b, clamped to [0, 1].  Zero-variance windows with
    eps = 0 fall back to a = 0, b = mean(p).
    """
    src = validate_image(img)
    g = validate_image(guide)
    if src.shape != g.shape:
        raise InvalidArgumentError(
            f"input shape {src.shape} does not match guide shape {g.shape}")
    r = params.radius
    eps = params.epsilon
    gy = luma(g)
    mean_g = box_filter(gy, r)
    var_g = np.maximum(box_filter(gy * gy, r) - mean_g * mean_g, 0.0)
    denom = var_g + eps

    out = np.empty_like(src)
    for ch in range(3):
        p = src[:, :, ch]
        mean_p = box_filter(p, r)
        cov_gp = box_filter(gy * p, r) - mean_g * mean_p
        with np.errstate(divide="ignore", invalid="ignore"):
            a = np.where(denom > 0.0, cov_gp / np.where(denom > 0.0, denom, 1.0), 0.0)
        b = mean_p - a * mean_g
        out[:, :, ch] = a * gy + b
    return np.clip(out, 0.0, 1.0)
