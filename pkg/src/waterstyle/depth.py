"""Depth-derived guidance: threshold, pooled statistics, sigmoid weights.

A content depth map is turned into a per-pixel blend weight in three steps:
Otsu's threshold tau splits near from far, average-pooled statistics set an
adaptive sigmoid sharpness k, and the weight map is sigmoid(k * (d - tau)).
By default farther pixels (larger depth) receive weights near 1 and take on
more of the transferred style; ``farther_is_styled=False`` flips the sign.
"""

from dataclasses import dataclass

import numpy as np

from .core import validate_depth
from .errors import InvalidArgumentError
from .filters import box_filter

DEFAULT_K_BASE = 10.0
DEFAULT_K_EPS = 0.05
DEFAULT_POOL_KERNEL = 5
DEFAULT_OTSU_BINS = 256


@dataclass(frozen=True)
class DepthGuidanceParams:
    """Computed guidance values plus the knobs that produced them."""

    tau: float
    k: float
    mu_d: float
    sigma_d: float
    pool_kernel: int = DEFAULT_POOL_KERNEL
    farther_is_styled: bool = True

    def __post_init__(self):
        if not (0.0 <= self.tau <= 1.0):
            raise InvalidArgumentError(f"tau must be in [0, 1], got {self.tau}")
        if self.k <= 0.0:
            raise InvalidArgumentError(f"k must be positive, got {self.k}")
        if self.sigma_d < 0.0:
            raise InvalidArgumentError("sigma_d must be >= 0")
        if self.pool_kernel < 1 or self.pool_kernel % 2 == 0:
            raise InvalidArgumentError("pool kernel must be odd and >= 1")


def otsu_threshold(depth, bins=DEFAULT_OTSU_BINS):
    """Histogram threshold maximizing between-class variance.

    Uses ``bins`` uniform bins over [0, 1] and returns the boundary between
    the two classes (the shared bin edge).  A map whose values all fall in
    one bin has no valid split; its mean is returned so downstream weights
    collapse to 0.5.
    """
    d = validate_depth(depth)
    if bins < 2:
        raise InvalidArgumentError("need at least 2 histogram bins")
    counts, _ = np.histogram(d, bins=bins, range=(0.0, 1.0))
    total = counts.sum()
    centers = (np.arange(bins) + 0.5) / bins

    w0 = np.cumsum(counts)[:-1]
    w1 = total - w0
    moments = np.cumsum(counts * centers)
    m0 = moments[:-1]
    m1 = moments[-1] - m0

    valid = (w0 > 0) & (w1 > 0)
    if not valid.any():
        return float(d.mean())
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = np.where(valid, m0 / np.where(w0 > 0, w0, 1), 0.0)
        mu1 = np.where(valid, m1 / np.where(w1 > 0, w1, 1), 0.0)
    between = np.where(valid, (w0 / total) * (w1 / total) * (mu0 - mu1) ** 2, -np.inf)
    split = int(np.argmax(between)) + 1
    return split / bins


def avgpool_stats(depth, kernel=DEFAULT_POOL_KERNEL):
    """Mean and population std of the average-pooled depth map.

    Pooling is a stride-1 moving average with edge-replicate padding.
    """
    d = validate_depth(depth)
    if kernel < 1 or kernel % 2 == 0:
        raise InvalidArgumentError("pool kernel must be odd and >= 1")
    pooled = box_filter(d, kernel // 2)
    return float(pooled.mean()), float(pooled.std())


def adaptive_k(sigma_d, k_base=DEFAULT_K_BASE, eps=DEFAULT_K_EPS):
    """Sigmoid sharpness, inversely proportional to pooled depth spread."""
    if k_base <= 0.0:
        raise InvalidArgumentError("k_base must be positive")
    if eps <= 0.0:
        raise InvalidArgumentError("eps must be positive")
    return k_base / (sigma_d + eps)


def depth_weight_map(depth, params):
    """Per-pixel sigmoid blend weights, strictly inside (0, 1).

    With ``farther_is_styled`` the weight is sigmoid(k * (d - tau)), so
    pixels at the threshold get exactly 0.5 and farther pixels approach 1.
    """
    d = validate_depth(depth)
    z = params.k * (d - params.tau)
    if not params.farther_is_styled:
        z = -z
    w = np.empty_like(z)
    pos = z >= 0
    w[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    w[~pos] = ez / (1.0 + ez)
    return np.clip(w, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))


def compute_depth_guidance(depth, k_base=DEFAULT_K_BASE, k_eps=DEFAULT_K_EPS,
                           pool_kernel=DEFAULT_POOL_KERNEL, bins=DEFAULT_OTSU_BINS,
                           tau_override=None, farther_is_styled=True):
    """Run the full guidance computation for a depth map."""
    tau = otsu_threshold(depth, bins) if tau_override is None else float(tau_override)
    if not (0.0 <= tau <= 1.0):
        raise InvalidArgumentError(f"tau must be in [0, 1], got {tau}")
    mu_d, sigma_d = avgpool_stats(depth, pool_kernel)
    k = adaptive_k(sigma_d, k_base, k_eps)
    return DepthGuidanceParams(tau=tau, k=k, mu_d=mu_d, sigma_d=sigma_d,
                               pool_kernel=pool_kernel,
                               farther_is_styled=farther_is_styled)
