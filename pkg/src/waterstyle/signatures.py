"""Global color signatures and their PCA projection.

Each image reduces to an 8-vector: channel means, channel standard
deviations, and the mean-chroma ratios blue/red and green/red.  PCA over a
set of signatures separates waterbody color categories.
"""

import numpy as np

from .core import validate_image
from .errors import InvalidArgumentError
from .linalg import sym_eigen

# Floor applied to ratio denominators so red-free images stay finite.
RATIO_FLOOR = 1e-4

SIGNATURE_FIELDS = ("mean_r", "mean_g", "mean_b", "std_r", "std_g", "std_b",
                    "ratio_br", "ratio_gr")


def color_signature(img):
    """8-element color signature of an image."""
    a = validate_image(img)
    means = a.reshape(-1, 3).mean(axis=0)
    stds = a.reshape(-1, 3).std(axis=0)
    denom = max(means[0], RATIO_FLOOR)
    return np.concatenate([means, stds, [means[2] / denom, means[1] / denom]])


def pca(signatures, n_components=2):
    """Principal components of standardized signatures.

    Returns (components, explained_variance_ratio, projections) where
    ``components`` has one component per row, ratios are non-increasing and
    sum to at most 1, and ``projections`` is the standardized data times
    the top components.
    """
    x = np.asarray(signatures, dtype=np.float64)
    if x.ndim != 2:
        raise InvalidArgumentError("signatures must form a 2-D array")
    n, dim = x.shape
    if n < 2:
        raise InvalidArgumentError("need at least 2 signatures for PCA")
    if not (1 <= n_components <= dim):
        raise InvalidArgumentError(f"n_components must be in 1..{dim}")

    centered = x - x.mean(axis=0)
    std = centered.std(axis=0)
    scale = np.where(std > 0.0, std, 1.0)
    z = centered / scale

    cov = z.T @ z / (n - 1)
    cov = (cov + cov.T) / 2.0
    vals, vecs = sym_eigen(cov)
    vals = np.maximum(vals, 0.0)
    total = vals.sum()
    ratios = vals / total if total > 0.0 else np.zeros_like(vals)

    components = vecs[:, :n_components].T
    projections = z @ components.T
    return components, ratios, projections
