"""File formats: PNG images and depth maps, raw feature tensors, reports.

All writes go through a temporary file in the destination directory
followed by an atomic rename, so readers never observe partial output.

The raw tensor format is a fixed little-endian layout for interoperating
with externally produced encoder features and embeddings:

    bytes 0..3   magic "UST1" (0x55 0x53 0x54 0x31)
    bytes 4..7   u32 ndim
    then         ndim x u32 dims (C, H, W for 3-D; length for 1-D)
    then         float32 values, row-major
"""

import json
import os
import struct
import tempfile

import cv2
import numpy as np

from .errors import FormatError, InvalidArgumentError

TENSOR_MAGIC = b"UST1"

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def atomic_write_bytes(path, payload):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_image(path):
    """Read an 8- or 16-bit PNG (or similar) as a float64 RGB image in [0, 1]."""
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise FormatError(f"cannot read image: {path}")
    if raw.ndim == 2:
        raw = np.repeat(raw[:, :, None], 3, axis=2)
    if raw.shape[2] == 4:
        raw = raw[:, :, :3]
    if raw.shape[2] != 3:
        raise FormatError(f"unsupported channel count {raw.shape[2]} in {path}")
    scale = 65535.0 if raw.dtype == np.uint16 else 255.0
    rgb = raw[:, :, ::-1].astype(np.float64) / scale
    return np.clip(rgb, 0.0, 1.0)


def write_image(path, img, bits=8):
    """Write an RGB image in [0, 1] as an 8- or 16-bit PNG, atomically."""
    if bits not in (8, 16):
        raise InvalidArgumentError("bit depth must be 8 or 16")
    a = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    if a.ndim != 3 or a.shape[2] != 3:
        raise InvalidArgumentError(f"expected an (H, W, 3) image, got {a.shape}")
    scale = 255.0 if bits == 8 else 65535.0
    dtype = np.uint8 if bits == 8 else np.uint16
    quant = np.rint(a * scale).astype(dtype)
    ok, buf = cv2.imencode(".png", quant[:, :, ::-1])
    if not ok:
        raise FormatError(f"PNG encoding failed for {path}")
    atomic_write_bytes(path, buf.tobytes())


def read_depth(path):
    """Read a depth map: grayscale PNG (value/max -> [0, 1]) or raw tensor.

    Raw tensors must be 2-D, or 3-D with a single channel, with values
    already inside [0, 1].
    """
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head.startswith(TENSOR_MAGIC):
        t = read_tensor(path)
        if t.ndim == 3:
            if t.shape[0] != 1:
                raise FormatError(f"depth tensor must have 1 channel, got {t.shape[0]}")
            t = t[0]
        if t.ndim != 2:
            raise FormatError(f"depth tensor must be 2-D, got ndim={t.ndim}")
        if t.min() < 0.0 or t.max() > 1.0:
            raise InvalidArgumentError(
                f"depth tensor values must lie in [0, 1]: {path}")
        return t
    raw = cv2.imread(str(path), cv2.IMREAD_ANYDEPTH | cv2.IMREAD_GRAYSCALE)
    if raw is None:
        raise FormatError(f"cannot read depth map: {path}")
    scale = 65535.0 if raw.dtype == np.uint16 else 255.0
    return np.clip(raw.astype(np.float64) / scale, 0.0, 1.0)


def write_depth(path, depth, bits=16):
    """Write a depth map in [0, 1] as a grayscale PNG (default 16-bit)."""
    if bits not in (8, 16):
        raise InvalidArgumentError("bit depth must be 8 or 16")
    a = np.clip(np.asarray(depth, dtype=np.float64), 0.0, 1.0)
    if a.ndim != 2:
        raise InvalidArgumentError(f"expected an (H, W) map, got {a.shape}")
    scale = 255.0 if bits == 8 else 65535.0
    dtype = np.uint8 if bits == 8 else np.uint16
    quant = np.rint(a * scale).astype(dtype)
    ok, buf = cv2.imencode(".png", quant)
    if not ok:
        raise FormatError(f"PNG encoding failed for {path}")
    atomic_write_bytes(path, buf.tobytes())


def read_tensor(path):
    """Read a raw feature tensor or embedding as float64."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 8 or data[:4] != TENSOR_MAGIC:
        raise FormatError(f"bad tensor magic in {path}")
    (ndim,) = struct.unpack_from("<I", data, 4)
    if not (1 <= ndim <= 3):
        raise FormatError(f"unsupported tensor ndim {ndim} in {path}")
    header = 8 + 4 * ndim
    if len(data) < header:
        raise FormatError(f"truncated tensor header in {path}")
    dims = struct.unpack_from(f"<{ndim}I", data, 8)
    if any(d == 0 for d in dims):
        raise FormatError(f"zero dimension in tensor {path}")
    count = int(np.prod(dims))
    expected = header + 4 * count
    if len(data) != expected:
        raise FormatError(
            f"tensor payload size mismatch in {path}: "
            f"expected {expected} bytes, got {len(data)}")
    values = np.frombuffer(data, dtype="<f4", offset=header, count=count)
    out = values.astype(np.float64).reshape(dims)
    if not np.isfinite(out).all():
        raise FormatError(f"tensor contains non-finite values: {path}")
    return out


def write_tensor(path, arr):
    """Write an array in the raw tensor format (float32 storage)."""
    a = np.asarray(arr, dtype=np.float64)
    if a.ndim not in (1, 2, 3):
        raise InvalidArgumentError(f"tensor must be 1-D..3-D, got ndim={a.ndim}")
    if not np.isfinite(a).all():
        raise InvalidArgumentError("refusing to write non-finite tensor values")
    header = TENSOR_MAGIC + struct.pack("<I", a.ndim)
    header += struct.pack(f"<{a.ndim}I", *a.shape)
    payload = header + np.ascontiguousarray(a, dtype="<f4").tobytes()
    atomic_write_bytes(path, payload)


def write_json(path, obj):
    """Write a JSON document atomically."""
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    atomic_write_bytes(path, text.encode("utf-8"))
