"""Depth-aware waterbody style transfer.

Fuses the waterbody appearance of a style image into a content image via
whitening/coloring statistics matching, modulated per pixel by sigmoid
weights derived from the content depth map, with physics-guided waterbody
masking, multi-scale fusion and guided-filter smoothing.
"""

from .core import (build_scale_set, extract_pixel_features, features_to_image,
                   resize_bilinear, resize_depth, resize_image)
from .depth import (DepthGuidanceParams, adaptive_k, avgpool_stats,
                    compute_depth_guidance, depth_weight_map, otsu_threshold)
from .engine import (FusionConfig, alpha_blend, depth_blend, stylize,
                     transfer_multiscale, transfer_single_scale, wct_transfer)
from .errors import (DegenerateStatsError, FormatError, InvalidArgumentError,
                     MissingComponentError, NumericalFailureError)
from .filters import GuidedFilterParams, box_filter, guided_filter
from .linalg import (StyleStats, color, compute_stats, mat_pow_half,
                     sym_eigen, whiten)
from .metrics import (LossReport, MetricReport, aggregate_losses,
                      cosine_distance, evaluate, fft_loss, gmsd,
                      lab_color_loss, mse_loss, psnr_from_rmse, rmse_255,
                      ssim, tensor_l2_loss)
from .signatures import color_signature, pca
from .waterbody import (WaterbodyEstimate, bluish_green_mask,
                        estimate_background, estimate_waterbody,
                        waterbody_stats)

__version__ = "0.1.0"

__all__ = [
    "DegenerateStatsError", "DepthGuidanceParams", "FormatError",
    "FusionConfig", "GuidedFilterParams", "InvalidArgumentError",
    "LossReport", "MetricReport", "MissingComponentError",
    "NumericalFailureError", "StyleStats", "WaterbodyEstimate",
    "adaptive_k", "aggregate_losses", "alpha_blend", "avgpool_stats",
    "bluish_green_mask", "box_filter", "build_scale_set", "color",
    "color_signature", "compute_depth_guidance", "compute_stats",
    "cosine_distance", "depth_blend", "depth_weight_map",
    "estimate_background", "estimate_waterbody", "evaluate",
    "extract_pixel_features", "features_to_image", "fft_loss", "gmsd",
    "guided_filter", "lab_color_loss", "mat_pow_half", "mse_loss",
    "otsu_threshold", "pca", "psnr_from_rmse", "resize_bilinear",
    "resize_depth", "resize_image", "rmse_255", "ssim", "stylize",
    "sym_eigen", "tensor_l2_loss", "transfer_multiscale",
    "transfer_single_scale", "waterbody_stats", "wct_transfer", "whiten",
]
