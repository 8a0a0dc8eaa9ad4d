"""Small raster helpers shared by the models and the evaluation harness."""
from __future__ import annotations

import numpy as np
from scipy import ndimage


def as_rgb(img) -> np.ndarray:
    """Coerce an image to a float64 (H, W, 3) array with values in [0, 1].

    Integer inputs are scaled by their dtype maximum; grayscale inputs are
    replicated across the three channels.
    """
    arr = np.asarray(img)
    if np.issubdtype(arr.dtype, np.integer):
        arr = arr.astype(np.float64) / np.iinfo(arr.dtype).max
    else:
        arr = arr.astype(np.float64)
    if arr.ndim == 2:
        arr = np.repeat(arr[:, :, None], 3, axis=2)
    elif arr.ndim == 3 and arr.shape[2] == 4:
        arr = arr[:, :, :3]
    elif arr.ndim == 3 and arr.shape[2] == 1:
        arr = np.repeat(arr, 3, axis=2)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"cannot interpret array of shape {np.shape(img)} as an RGB image")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains non-finite values")
    return np.clip(arr, 0.0, 1.0)


def intensity(img) -> np.ndarray:
    """(r + g + b) / 3 for colour input; grayscale planes pass through."""
    arr = np.asarray(img)
    if arr.ndim == 2:
        if np.issubdtype(arr.dtype, np.integer):
            return arr.astype(np.float64) / np.iinfo(arr.dtype).max
        return arr.astype(np.float64)
    return as_rgb(arr).mean(axis=2)


def _sample_coords(n_in: int, n_out: int) -> np.ndarray:
    # pixel-centre alignment
    return (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5


def resize_bilinear(img: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Bilinear resize of a 2-D plane or (H, W, C) stack, replicate borders."""
    img = np.asarray(img, dtype=np.float64)
    H, W = img.shape[:2]
    h, w = shape
    if (H, W) == (h, w):
        return img.copy()
    rows = _sample_coords(H, h)
    cols = _sample_coords(W, w)
    rr, cc = np.meshgrid(rows, cols, indexing="ij")
    if img.ndim == 2:
        return ndimage.map_coordinates(img, [rr, cc], order=1, mode="nearest")
    return np.stack([ndimage.map_coordinates(img[..., ch], [rr, cc], order=1, mode="nearest")
                     for ch in range(img.shape[2])], axis=-1)


def resize_nearest(img: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    img = np.asarray(img)
    H, W = img.shape[:2]
    h, w = shape
    rows = np.clip(np.floor((np.arange(h) + 0.5) * H / h).astype(int), 0, H - 1)
    cols = np.clip(np.floor((np.arange(w) + 0.5) * W / w).astype(int), 0, W - 1)
    return img[rows][:, cols]


def gaussian_smooth(plane: np.ndarray, sigma: float) -> np.ndarray:
    """Isotropic Gaussian blur with replicated borders; sigma <= 0 is a no-op."""
    plane = np.asarray(plane, dtype=np.float64)
    if sigma <= 0:
        return plane.copy()
    return ndimage.gaussian_filter(plane, sigma, mode="nearest")


def centered_gaussian(shape: tuple[int, int], sigma_h: float, sigma_w: float) -> np.ndarray:
    """Unnormalized centred Gaussian with unit peak."""
    H, W = shape
    y = np.arange(H) - (H - 1) / 2.0
    x = np.arange(W) - (W - 1) / 2.0
    return np.exp(-(y[:, None] ** 2) / (2 * sigma_h ** 2) - (x[None, :] ** 2) / (2 * sigma_w ** 2))


def normalize_minmax(plane: np.ndarray) -> np.ndarray:
    """Rescale to [0, 1]; constant planes map to 0 (or 1 if the constant is positive)."""
    plane = np.asarray(plane, dtype=np.float64)
    lo, hi = float(plane.min()), float(plane.max())
    if hi > lo:
        return (plane - lo) / (hi - lo)
    return np.full(plane.shape, 1.0 if hi > 0 else 0.0)
