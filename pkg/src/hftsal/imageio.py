"""Image reading and writing.

Binary PGM (P5) and PPM (P6) are handled natively, 8 or 16 bit; other
formats (PNG, JPEG, ...) go through Pillow.  Saliency maps can also be
dumped losslessly as a raw little-endian float64 plane with a JSON sidecar.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .imaging import normalize_minmax

NETPBM_SUFFIXES = {".pgm", ".ppm", ".pnm"}


def _netpbm_tokens(buf: bytes, count: int):
    """Parse ``count`` whitespace-separated header tokens, skipping comments."""
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(buf) and buf[pos:pos + 1].isspace():
            pos += 1
        if pos >= len(buf):
            raise ValueError("truncated netpbm header")
        if buf[pos:pos + 1] == b"#":
            while pos < len(buf) and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(buf) and not buf[pos:pos + 1].isspace():
            pos += 1
        tokens.append(buf[start:pos])
    # exactly one whitespace byte separates the header from the raster
    return tokens, pos + 1


def decode_netpbm(buf: bytes) -> tuple[np.ndarray, int]:
    """Decode a binary P5/P6 image; returns the uint8/uint16 raster and maxval."""
    tokens, offset = _netpbm_tokens(buf, 4)
    magic = tokens[0]
    if magic not in (b"P5", b"P6"):
        raise ValueError(f"unsupported netpbm magic {magic!r} (only binary P5/P6)")
    width, height, maxval = (int(t) for t in tokens[1:])
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise ValueError(f"bad netpbm header: {width}x{height}, maxval {maxval}")
    channels = 3 if magic == b"P6" else 1
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    n = width * height * channels
    if len(buf) - offset < n * dtype.itemsize:
        raise ValueError("truncated netpbm raster")
    raster = np.frombuffer(buf, dtype=dtype, count=n, offset=offset)
    raster = raster.astype(np.uint16 if maxval > 255 else np.uint8)
    img = raster.reshape((height, width, channels) if channels == 3 else (height, width))
    return img, maxval


def encode_netpbm(img: np.ndarray) -> bytes:
    img = np.asarray(img)
    if img.dtype not in (np.uint8, np.uint16):
        raise ValueError("netpbm encoding needs uint8 or uint16 data")
    if img.ndim == 2:
        magic = b"P5"
    elif img.ndim == 3 and img.shape[2] == 3:
        magic = b"P6"
    else:
        raise ValueError(f"cannot encode array of shape {img.shape}")
    maxval = 255 if img.dtype == np.uint8 else 65535
    header = b"%s\n%d %d\n%d\n" % (magic, img.shape[1], img.shape[0], maxval)
    return header + img.astype(">u2" if maxval > 255 else "u1").tobytes()


def read_image(path) -> np.ndarray:
    """Float64 image in [0, 1]: (H, W) for gray, (H, W, 3) for colour."""
    path = Path(path)
    try:
        if path.suffix.lower() in NETPBM_SUFFIXES:
            img, maxval = decode_netpbm(path.read_bytes())
            return img.astype(np.float64) / maxval
        from PIL import Image

        with Image.open(path) as im:
            if im.mode in ("I;16", "I;16B", "I"):
                arr = np.asarray(im, dtype=np.float64) / 65535.0
            elif im.mode in ("L", "1"):
                arr = np.asarray(im.convert("L"), dtype=np.float64) / 255.0
            else:
                arr = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
        return arr
    except (OSError, ValueError) as exc:
        raise ValueError(f"cannot read image {path}: {exc}") from exc


def to_uint(plane: np.ndarray, bits: int = 8) -> np.ndarray:
    """Quantize values in [0, 1] to 8- or 16-bit integers."""
    if bits not in (8, 16):
        raise ValueError("bit depth must be 8 or 16")
    top = 255 if bits == 8 else 65535
    q = np.rint(np.clip(plane, 0.0, 1.0) * top)
    return q.astype(np.uint8 if bits == 8 else np.uint16)


def write_image(path, img: np.ndarray, bits: int = 8) -> Path:
    """Write a [0, 1] float image (gray or RGB) as PGM/PPM or via Pillow."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    q = to_uint(np.asarray(img, dtype=np.float64), bits)
    if path.suffix.lower() in NETPBM_SUFFIXES:
        path.write_bytes(encode_netpbm(q))
        return path
    from PIL import Image

    if q.dtype == np.uint16:
        if q.ndim != 2:
            raise ValueError("16-bit output is only supported for grayscale maps")
        im = Image.fromarray(q)  # uint16 maps to mode I;16
    else:
        im = Image.fromarray(q)
    im.save(path)
    return path


def write_map(path, saliency, bits: int = 8) -> Path:
    """Min-max normalize a saliency map for display and write it."""
    values = np.asarray(getattr(saliency, "values", saliency), dtype=np.float64)
    return write_image(path, normalize_minmax(values), bits)


def write_raw(path, saliency, provenance: dict | None = None) -> Path:
    """Dump the float map as little-endian float64 plus a ``.json`` sidecar."""
    from .report import dumps_json

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    values = np.asarray(getattr(saliency, "values", saliency), dtype=np.float64)
    path.write_bytes(values.astype("<f8").tobytes())
    meta = {"height": values.shape[0], "width": values.shape[1], "dtype": "float64-le",
            "min": float(values.min()), "max": float(values.max())}
    if provenance is None and hasattr(saliency, "provenance"):
        provenance = saliency.provenance()
    meta["provenance"] = provenance or {}
    path.with_suffix(path.suffix + ".json").write_text(dumps_json(meta), encoding="utf-8")
    return path


def read_raw(path) -> tuple[np.ndarray, dict]:
    path = Path(path)
    meta = json.loads(path.with_suffix(path.suffix + ".json").read_text(encoding="utf-8"))
    data = np.frombuffer(path.read_bytes(), dtype="<f8").reshape(meta["height"], meta["width"])
    return data.astype(np.float64), meta
