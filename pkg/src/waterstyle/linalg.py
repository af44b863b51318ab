"""Symmetric-matrix numerics behind the whitening and coloring transform.

Covariances use the unbiased n-1 divisor.  Eigenvalues are clamped from
below before fractional powers so rank-deficient covariances (constant or
masked regions) stay finite.
"""

from dataclasses import dataclass

import numpy as np

from .core import validate_features
from .errors import DegenerateStatsError, InvalidArgumentError, NumericalFailureError

# Relative floor applied to eigenvalues before matrix powers.
EPS_SCALE = 1e-5


@dataclass(frozen=True)
class StyleStats:
    """Channel-wise mean vector and covariance matrix of a feature tensor."""

    mean: np.ndarray  # (C,)
    cov: np.ndarray   # (C, C), symmetric

    @property
    def channels(self):
        return self.mean.shape[0]


def default_eps(cov):
    """Default eigenvalue floor, scaled to the matrix magnitude."""
    c = cov.shape[0]
    return EPS_SCALE * max(float(np.trace(cov)) / c, 1e-12)


def compute_stats(feats, mask=None):
    """Mean and unbiased covariance over (optionally masked) pixels.

    ``mask`` is an (H, W) boolean array selecting pixels; at least two
    pixels must be selected.
    """
    a = validate_features(feats)
    c = a.shape[0]
    flat = a.reshape(c, -1)
    if mask is not None:
        m = np.asarray(mask, dtype=bool)
        if m.shape != a.shape[1:]:
            raise InvalidArgumentError(
                f"mask shape {m.shape} does not match feature dims {a.shape[1:]}")
        if not m.all():  # a full mask must match the unmasked path bit-for-bit
            flat = flat[:, m.reshape(-1)]
    n = flat.shape[1]
    if n < 2:
        raise DegenerateStatsError(f"need at least 2 pixels for statistics, got {n}")
    mean = flat.mean(axis=1)
    centered = flat - mean[:, None]
    cov = centered @ centered.T / (n - 1)
    cov = (cov + cov.T) / 2.0
    return StyleStats(mean=mean, cov=cov)


def sym_eigen(m):
    """Eigendecomposition of a symmetric matrix.

    Returns (eigenvalues, eigenvectors) with eigenvalues sorted descending
    and each eigenvector's largest-magnitude component made positive, so
    results are deterministic across platforms.
    """
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {a.shape}")
    scale = np.linalg.norm(a)
    if np.abs(a - a.T).max() > 1e-8 * max(scale, 1e-30):
        raise InvalidArgumentError("matrix is not symmetric within tolerance")
    sym = (a + a.T) / 2.0
    try:
        vals, vecs = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"eigendecomposition failed: {exc}") from exc
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    # Sign convention: largest-|component| of each column positive.
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vals, vecs * signs


def mat_pow_half(m, sign, eps=None):
    """Matrix power ``m ** (sign/2)`` with eigenvalues floored at ``eps``."""
    if sign not in (1, -1):
        raise InvalidArgumentError(f"sign must be +1 or -1, got {sign}")
    a = np.asarray(m, dtype=np.float64)
    if eps is None:
        eps = default_eps(a)
    if eps <= 0:
        raise InvalidArgumentError("eps must be positive")
    vals, vecs = sym_eigen(a)
    powered = np.maximum(vals, eps) ** (0.5 * sign)
    out = (vecs * powered) @ vecs.T
    return (out + out.T) / 2.0


def whiten(feats, stats, eps=None):
    """Remove channel statistics: per pixel, ``cov**-1/2 @ (f - mean)``."""
    a = validate_features(feats)
    if a.shape[0] != stats.channels:
        raise InvalidArgumentError(
            f"feature channels {a.shape[0]} != stats channels {stats.channels}")
    w = mat_pow_half(stats.cov, -1, eps)
    c, h, wd = a.shape
    flat = a.reshape(c, -1) - stats.mean[:, None]
    return (w @ flat).reshape(c, h, wd)


def color(feats, stats, eps=None):
    """Inject channel statistics: per pixel, ``mean + cov**1/2 @ f``."""
    a = validate_features(feats)
    if a.shape[0] != stats.channels:
        raise InvalidArgumentError(
            f"feature channels {a.shape[0]} != stats channels {stats.channels}")
    s = mat_pow_half(stats.cov, 1, eps)
    c, h, wd = a.shape
    flat = s @ a.reshape(c, -1) + stats.mean[:, None]
    return flat.reshape(c, h, wd)
