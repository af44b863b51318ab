"""Command-line interface.

Exit codes are a stable contract: 0 success, 1 internal numerical failure,
2 input/format error, 3 constraint violation.  All flags are validated
before any file I/O, and every output file is written atomically.
"""

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import io as wio
from .depth import compute_depth_guidance, depth_weight_map
from .engine import DEFAULT_SCALES, FusionConfig, stylize, transfer_multiscale
from .errors import (FormatError, InvalidArgumentError, MissingComponentError,
                     NumericalFailureError)
from .filters import GuidedFilterParams
from .metrics import (LossReport, aggregate_losses, cosine_distance, evaluate,
                      fft_loss, lab_color_loss, mse_loss, ssim,
                      tensor_l2_loss)
from .core import resize_image
from .signatures import SIGNATURE_FIELDS, color_signature, pca
from .waterbody import estimate_waterbody

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_INPUT = 2
EXIT_CONSTRAINT = 3


def _parse_floats(text):
    try:
        values = tuple(float(v) for v in str(text).split(",") if v.strip() != "")
    except ValueError as exc:
        raise InvalidArgumentError(f"bad float list: {text!r}") from exc
    if not values:
        raise InvalidArgumentError(f"empty float list: {text!r}")
    return values


def _load_config_file(path):
    settings = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise FormatError(f"{path}:{lineno}: expected key=value")
                key, value = line.split("=", 1)
                settings[key.strip().replace("-", "_")] = value.strip()
        return settings
    except OSError as exc:
        raise FormatError(f"cannot read config file {path}: {exc}") from exc


class _Resolver:
    """Merge precedence: explicit flag > config file > built-in default."""

    def __init__(self, args):
        self.args = args
        self.config = _load_config_file(args.config) if getattr(args, "config", None) else {}

    def get(self, key, default, convert=None):
        value = getattr(self.args, key, None)
        if value is None and key in self.config:
            value = self.config[key]
        if value is None:
            return default
        if convert is not None:
            return convert(value)
        return value

    def flag(self, key):
        # Store-true flags: config may supply "true"/"false".
        value = getattr(self.args, key, False)
        if value:
            return True
        raw = self.config.get(key)
        return str(raw).lower() in ("1", "true", "yes") if raw is not None else False


def _fusion_config(res):
    alpha = res.get("alpha", 1.0, float)
    scales = res.get("scales", DEFAULT_SCALES,
                     lambda v: v if isinstance(v, tuple) else _parse_floats(v))
    weights = res.get("scale_weights", None,
                      lambda v: v if isinstance(v, tuple) else _parse_floats(v))
    gif = GuidedFilterParams(radius=res.get("gif_radius", 8, int),
                             epsilon=res.get("gif_eps", 1e-3, float))
    return FusionConfig(
        alpha=alpha,
        scales=tuple(scales),
        scale_weights=None if weights is None else tuple(weights),
        use_waterbody_mask=not res.flag("no_waterbody_mask"),
        apply_guided_filter=not res.flag("no_guided_filter"),
        patch_radius=res.get("patch_radius", 0, int),
        k_base=res.get("k_base", 10.0, float),
        k_eps=res.get("k_eps", 0.05, float),
        pool_kernel=res.get("pool_kernel", 5, int),
        tau_override=res.get("tau_override", None, float),
        farther_is_styled=not res.flag("eq6_literal"),
        far_fraction=res.get("far_fraction", 0.05, float),
        bg_margin=res.get("bg_margin", 0.0, float),
        gif=gif,
        threads=res.get("threads", 1, int),
    )


def _echo_flags(cfg):
    return {
        "alpha": cfg.alpha,
        "scales": list(cfg.scales),
        "scale_weights": list(cfg.weights()),
        "k_base": cfg.k_base,
        "k_eps": cfg.k_eps,
        "pool_kernel": cfg.pool_kernel,
        "tau_override": cfg.tau_override,
        "eq6_literal": not cfg.farther_is_styled,
        "far_fraction": cfg.far_fraction,
        "bg_margin": cfg.bg_margin,
        "use_waterbody_mask": cfg.use_waterbody_mask,
        "gif_radius": cfg.gif.radius,
        "gif_eps": cfg.gif.epsilon,
        "guided_filter": cfg.apply_guided_filter,
        "patch_radius": cfg.patch_radius,
        "threads": cfg.threads,
    }


def _cmd_stylize(args):
    res = _Resolver(args)
    cfg = _fusion_config(res)
    content = wio.read_image(args.content)
    style = wio.read_image(args.style)
    d_c = wio.read_depth(args.depth_content)
    d_s = wio.read_depth(args.depth_style)
    out, report = stylize(content, style, d_c, d_s, cfg)
    wio.write_image(args.out, out)
    if args.report:
        report["flags"] = _echo_flags(cfg)
        report["inputs"] = {
            "content": args.content, "style": args.style,
            "depth_content": args.depth_content, "depth_style": args.depth_style,
        }
        report["output"] = args.out
        wio.write_json(args.report, report)
    return EXIT_OK


def _cmd_fuse_features(args):
    res = _Resolver(args)
    cfg = _fusion_config(res)
    f_c = wio.read_tensor(args.features_content)
    f_s = wio.read_tensor(args.features_style)
    if f_c.ndim != 3 or f_s.ndim != 3:
        raise FormatError("feature fusion requires 3-D (C, H, W) tensors")
    if f_c.shape[0] != f_s.shape[0]:
        raise FormatError(
            f"channel mismatch: {f_c.shape[0]} vs {f_s.shape[0]}")
    d_c = wio.read_depth(args.depth_content)
    if d_c.shape != f_c.shape[1:]:
        from .core import resize_depth
        d_c = resize_depth(d_c, f_c.shape[1], f_c.shape[2])
    fused = transfer_multiscale(f_c, f_s, d_c, None, cfg)
    wio.write_tensor(args.out, fused)
    if args.report:
        wio.write_json(args.report, {"flags": _echo_flags(cfg),
                                     "shape": list(fused.shape)})
    return EXIT_OK


def _metric_line(pair, normalize, resample_to_a=False):
    a = wio.read_image(pair[0])
    b = wio.read_image(pair[1])
    if normalize:
        a = resize_image(a, 480, 640)
        b = resize_image(b, 480, 640)
    elif resample_to_a and b.shape != a.shape:
        b = resize_image(b, a.shape[0], a.shape[1])
    m = evaluate(a, b)
    return {
        "a": pair[0],
        "b": pair[1],
        "rmse": m.rmse,
        "psnr": "inf" if np.isinf(m.psnr) else m.psnr,
        "ssim": m.ssim,
        "gmsd": m.gmsd,
    }


def _cmd_metrics(args):
    if args.list:
        pairs = []
        with open(args.list, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split()
                if len(parts) != 2:
                    raise FormatError(f"{args.list}:{lineno}: expected two paths")
                pairs.append((parts[0], parts[1]))
    elif args.a and args.b:
        pairs = [(args.a, args.b)]
    else:
        raise InvalidArgumentError("metrics needs two image paths or --list FILE")

    threads = args.threads or 1

    def score(pair):
        return _metric_line(pair, args.normalize_640x480, args.resample_to_a)

    if threads > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            lines = list(pool.map(score, pairs))
    else:
        lines = [score(p) for p in pairs]

    text = "".join(json.dumps(line) + "\n" for line in lines)
    if args.out:
        wio.atomic_write_bytes(args.out, text.encode("utf-8"))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_losses(args):
    a = wio.read_image(args.a)
    b = wio.read_image(args.b)
    if a.shape != b.shape:
        raise InvalidArgumentError(
            f"image shapes differ: {a.shape} vs {b.shape}")
    report = LossReport(
        l_rec=mse_loss(a, b),
        l_ssim=1.0 - ssim(a, b),
        l_color=lab_color_loss(a, b),
        l_fft=fft_loss(a, b),
    )
    if args.emb_a and args.emb_b:
        report.l_cos = cosine_distance(wio.read_tensor(args.emb_a),
                                       wio.read_tensor(args.emb_b))
    if args.feat_a and args.feat_b:
        report.l_feat = tensor_l2_loss(wio.read_tensor(args.feat_a),
                                       wio.read_tensor(args.feat_b))
    if args.percept_a and args.percept_b:
        report.l_percept = tensor_l2_loss(wio.read_tensor(args.percept_a),
                                          wio.read_tensor(args.percept_b))

    weights = _parse_floats(args.term_weights) if args.term_weights else None
    if weights is not None and len(weights) != 7:
        raise InvalidArgumentError("--term-weights needs 7 comma-separated values")

    out = {
        "reconstruction": report.l_rec,
        "ssim": report.l_ssim,
        "lab_color": report.l_color,
        "fft": report.l_fft,
        "embedding_cosine": report.l_cos,
        "feature": report.l_feat,
        "perceptual": report.l_percept,
        "stage": args.stage,
        "total_base": None,
        "total_staged": None,
    }
    try:
        if weights is None:
            l0, ln = aggregate_losses(report, args.stage)
        else:
            weighted = LossReport(
                l_rec=_wmul(report.l_rec, weights[0]),
                l_ssim=_wmul(report.l_ssim, weights[1]),
                l_color=_wmul(report.l_color, weights[2]),
                l_fft=_wmul(report.l_fft, weights[3]),
                l_cos=_wmul(report.l_cos, weights[4]),
                l_feat=_wmul(report.l_feat, weights[5]),
                l_percept=_wmul(report.l_percept, weights[6]),
            )
            l0, ln = aggregate_losses(weighted, args.stage)
        out["total_base"] = l0
        out["total_staged"] = ln
    except MissingComponentError:
        if args.strict_aggregate:
            raise
    text = json.dumps(out, indent=2, sort_keys=True) + "\n"
    if args.out:
        wio.atomic_write_bytes(args.out, text.encode("utf-8"))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _wmul(value, weight):
    return None if value is None else value * weight


def _cmd_waterbody(args):
    style = wio.read_image(args.style)
    d_s = wio.read_depth(args.depth_style)
    if d_s.shape != style.shape[:2]:
        from .core import resize_depth
        d_s = resize_depth(d_s, style.shape[0], style.shape[1])
    est = estimate_waterbody(style, d_s,
                             far_fraction=args.far_fraction,
                             margin=args.bg_margin)
    if args.mask_out:
        mask_img = np.repeat(est.mask[:, :, None].astype(np.float64), 3, axis=2)
        wio.write_image(args.mask_out, mask_img)
    out = {
        "background_color": [float(v) for v in est.background_color],
        "mask_pixels": int(est.mask.sum()),
        "total_pixels": int(est.mask.size),
        "far_fraction": est.far_fraction,
        "bg_margin": args.bg_margin,
    }
    _emit_json(out, args.report)
    return EXIT_OK


def _cmd_weights(args):
    res = _Resolver(args)
    d = wio.read_depth(args.depth)
    guidance = compute_depth_guidance(
        d,
        k_base=res.get("k_base", 10.0, float),
        k_eps=res.get("k_eps", 0.05, float),
        pool_kernel=res.get("pool_kernel", 5, int),
        tau_override=res.get("tau_override", None, float),
        farther_is_styled=not res.flag("eq6_literal"),
    )
    w = depth_weight_map(d, guidance)
    if args.out:
        wio.write_depth(args.out, w, bits=16)
    out = {
        "tau": guidance.tau,
        "k": guidance.k,
        "mu_d": guidance.mu_d,
        "sigma_d": guidance.sigma_d,
        "pool_kernel": guidance.pool_kernel,
        "farther_is_styled": guidance.farther_is_styled,
        "weight_min": float(w.min()),
        "weight_max": float(w.max()),
    }
    _emit_json(out, args.report)
    return EXIT_OK


def _cmd_stats(args):
    paths = list(args.images)
    if args.list:
        with open(args.list, "r", encoding="utf-8") as fh:
            paths.extend(line.strip() for line in fh
                         if line.strip() and not line.startswith("#"))
    if len(paths) < 2:
        raise InvalidArgumentError("stats needs at least 2 images")
    sigs = np.array([color_signature(wio.read_image(p)) for p in paths])
    components, ratios, projections = pca(sigs, n_components=args.components)

    header = ["path", *SIGNATURE_FIELDS,
              *(f"pc{i + 1}" for i in range(args.components))]
    rows = [",".join(header)]
    for path, sig, proj in zip(paths, sigs, projections):
        rows.append(",".join([path, *(f"{v:.9g}" for v in sig),
                              *(f"{v:.9g}" for v in proj)]))
    csv_text = "\n".join(rows) + "\n"
    if args.csv_out:
        wio.atomic_write_bytes(args.csv_out, csv_text.encode("utf-8"))
    else:
        sys.stdout.write(csv_text)

    summary = {
        "images": len(paths),
        "components": args.components,
        "explained_variance_ratio": [float(r) for r in ratios],
    }
    _emit_json(summary, args.report)
    return EXIT_OK


def _emit_json(obj, path):
    if path:
        wio.write_json(path, obj)
    else:
        sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _add_fusion_flags(p):
    p.add_argument("--alpha", type=float, default=None,
                   help="style strength in [0, 1] (default 1.0)")
    p.add_argument("--scales", default=None,
                   help="comma list of scale ratios (default 1.0,0.75,0.5,0.25)")
    p.add_argument("--scale-weights", dest="scale_weights", default=None,
                   help="comma list of per-scale weights summing to 1")
    p.add_argument("--k-base", dest="k_base", type=float, default=None,
                   help="numerator of the adaptive sigmoid sharpness (default 10)")
    p.add_argument("--k-eps", dest="k_eps", type=float, default=None,
                   help="stabilizer added to sigma_d (default 0.05)")
    p.add_argument("--tau-override", dest="tau_override", type=float, default=None,
                   help="bypass the histogram threshold with a fixed tau")
    p.add_argument("--pool-kernel", dest="pool_kernel", type=int, default=None,
                   help="odd average-pooling kernel for depth stats (default 5)")
    p.add_argument("--eq6-literal", dest="eq6_literal", action="store_true",
                   help="flip the sigmoid so farther pixels keep content")
    p.add_argument("--far-fraction", dest="far_fraction", type=float, default=None,
                   help="fraction of farthest style pixels (default 0.05)")
    p.add_argument("--bg-margin", dest="bg_margin", type=float, default=None,
                   help="blue/green dominance margin over red (default 0)")
    p.add_argument("--no-waterbody-mask", dest="no_waterbody_mask",
                   action="store_true",
                   help="use whole-image style statistics")
    p.add_argument("--gif-radius", dest="gif_radius", type=int, default=None,
                   help="guided filter radius (default 8)")
    p.add_argument("--gif-eps", dest="gif_eps", type=float, default=None,
                   help="guided filter regularizer (default 1e-3)")
    p.add_argument("--no-guided-filter", dest="no_guided_filter",
                   action="store_true", help="skip guided-filter smoothing")
    p.add_argument("--patch-radius", dest="patch_radius", type=int, default=None,
                   help="pixel-feature patch radius (default 0)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (results are thread-count invariant)")
    p.add_argument("--seed", type=int, default=None,
                   help="reserved; the pipeline is deterministic")
    p.add_argument("--config", default=None,
                   help="key=value config file; flags override file values")
    p.add_argument("--report", default=None, help="write a JSON run report here")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="waterstyle",
        description="Depth-aware waterbody style transfer for underwater images.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stylize", help="transfer a waterbody style onto an image")
    p.add_argument("content")
    p.add_argument("style")
    p.add_argument("depth_content")
    p.add_argument("depth_style")
    p.add_argument("-o", "--out", required=True, help="output PNG path")
    _add_fusion_flags(p)
    p.set_defaults(func=_cmd_stylize)

    p = sub.add_parser("fuse-features",
                       help="fuse externally computed feature tensors")
    p.add_argument("features_content")
    p.add_argument("features_style")
    p.add_argument("depth_content")
    p.add_argument("-o", "--out", required=True, help="output tensor path")
    _add_fusion_flags(p)
    p.set_defaults(func=_cmd_fuse_features)

    p = sub.add_parser("metrics", help="image quality metrics for pairs")
    p.add_argument("a", nargs="?", default=None)
    p.add_argument("b", nargs="?", default=None)
    p.add_argument("--list", default=None,
                   help="file of 'a_path b_path' lines, one pair per line")
    p.add_argument("--normalize-640x480", dest="normalize_640x480",
                   action="store_true",
                   help="resample both images to 640x480 before scoring")
    p.add_argument("--resample-to-a", dest="resample_to_a", action="store_true",
                   help="resample b to a's dimensions instead of erroring")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("-o", "--out", default=None, help="write JSON lines here")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("losses", help="training-style loss components for a pair")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--emb-a", dest="emb_a", default=None,
                   help="1-D embedding tensor for image a")
    p.add_argument("--emb-b", dest="emb_b", default=None)
    p.add_argument("--feat-a", dest="feat_a", default=None,
                   help="feature tensor for image a")
    p.add_argument("--feat-b", dest="feat_b", default=None)
    p.add_argument("--percept-a", dest="percept_a", default=None,
                   help="perceptual-feature tensor for image a")
    p.add_argument("--percept-b", dest="percept_b", default=None)
    p.add_argument("--stage", type=int, default=0,
                   help="training stage 0..4 for the staged total")
    p.add_argument("--term-weights", dest="term_weights", default=None,
                   help="non-standard: 7 comma weights applied to the terms")
    p.add_argument("--strict-aggregate", dest="strict_aggregate",
                   action="store_true",
                   help="fail instead of reporting null totals")
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=_cmd_losses)

    p = sub.add_parser("waterbody", help="estimate a style image's waterbody")
    p.add_argument("style")
    p.add_argument("depth_style")
    p.add_argument("--far-fraction", dest="far_fraction", type=float, default=0.05)
    p.add_argument("--bg-margin", dest="bg_margin", type=float, default=0.0)
    p.add_argument("--mask-out", dest="mask_out", default=None,
                   help="write the waterbody mask as a PNG")
    p.add_argument("--report", default=None)
    p.set_defaults(func=_cmd_waterbody)

    p = sub.add_parser("weights", help="compute the depth weight map")
    p.add_argument("depth")
    p.add_argument("-o", "--out", default=None, help="16-bit PNG weight map")
    p.add_argument("--k-base", dest="k_base", type=float, default=None)
    p.add_argument("--k-eps", dest="k_eps", type=float, default=None)
    p.add_argument("--tau-override", dest="tau_override", type=float, default=None)
    p.add_argument("--pool-kernel", dest="pool_kernel", type=int, default=None)
    p.add_argument("--eq6-literal", dest="eq6_literal", action="store_true")
    p.add_argument("--config", default=None)
    p.add_argument("--report", default=None)
    p.set_defaults(func=_cmd_weights)

    p = sub.add_parser("stats", help="color signatures and PCA over images")
    p.add_argument("images", nargs="*")
    p.add_argument("--list", default=None, help="file of image paths")
    p.add_argument("--components", type=int, default=2)
    p.add_argument("--csv-out", dest="csv_out", default=None)
    p.add_argument("--report", default=None)
    p.set_defaults(func=_cmd_stats)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvalidArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except NumericalFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
