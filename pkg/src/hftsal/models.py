"""Saliency detectors: HFT and the SR / PFT / PQFT / G&S baselines.

Every detector resizes its input to a fixed working resolution, computes a
raw energy map and post-smooths it with an isotropic Gaussian whose sigma is
a fraction of the working width.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .imaging import as_rgb, gaussian_smooth, intensity, resize_bilinear
from .quaternion import LUMINANCE_AXIS, PureUnitAxis, QuaternionImage
from .scalespace import KernelSpec, LOG_EPS, build_scale_space, convolve2_circular
from .selection import SelectionCriterion, select_scale
from .spectral import NULL_REL_TOL, Spectrum, dft2, hft_forward, hft_inverse, polar_decompose

#: Working resolutions (height, width) per model.
WORKING_SIZE = {"hft": 128, "sr": 64, "pft": 64, "pqft": 64, "gs": 128, "noise": 64}
POST_SIGMA_FACTOR = 0.05

LAPLACIAN = np.array([[0.0, -1.0, 0.0],
                      [-1.0, 4.0, -1.0],
                      [0.0, -1.0, 0.0]])


def _shape(size) -> tuple[int, int]:
    if isinstance(size, (int, np.integer)):
        return int(size), int(size)
    h, w = size
    return int(h), int(w)


@dataclass(frozen=True)
class ModelConfig:
    weights: tuple = (0.0, 0.5, 0.25, 0.25)
    resolution: int | tuple = 128
    post_sigma_factor: float = POST_SIGMA_FACTOR
    axis: PureUnitAxis = LUMINANCE_AXIS
    domain: str = "log-amplitude"
    selection: str = "full"
    varsigma_factor: float = 0.02
    t0: float = 0.5
    bins: int = 256

    def __post_init__(self):
        if len(self.weights) != 4 or any(w < 0 for w in self.weights):
            raise ValueError("weights must be four nonnegative numbers")
        if min(_shape(self.resolution)) < 8:
            raise ValueError("working resolution must be at least 8x8")
        if not (self.post_sigma_factor >= 0 and self.varsigma_factor > 0 and self.t0 > 0):
            raise ValueError("smoothing factors must be positive")
        if self.domain not in ("amplitude", "log-amplitude"):
            raise ValueError(f"unknown smoothing domain {self.domain!r}")
        # validates the mode name
        self.criterion()

    @property
    def shape(self) -> tuple[int, int]:
        return _shape(self.resolution)

    def criterion(self) -> SelectionCriterion:
        return SelectionCriterion(self.selection, self.varsigma_factor, self.bins)

    def with_(self, **changes) -> "ModelConfig":
        return replace(self, **changes)


class FeatureMaps(NamedTuple):
    I: np.ndarray
    RG: np.ndarray
    BY: np.ndarray


@dataclass
class SaliencyMap:
    values: np.ndarray
    model: str
    scale: int | None = None
    post_sigma: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError("saliency map must be a 2-D plane")
        if not np.all(np.isfinite(v)):
            raise ValueError("saliency map contains non-finite values")
        # Gaussian filtering of a nonnegative plane can leave -1e-20 round-off.
        self.values = np.maximum(v, 0.0)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def provenance(self) -> dict:
        return {"model": self.model, "scale": self.scale, "post_sigma": float(self.post_sigma),
                "height": self.shape[0], "width": self.shape[1]}


@dataclass
class HftResult:
    saliency: SaliencyMap
    k_p: int
    maps: list = field(repr=False)
    raw_maps: list = field(repr=False)
    trace: list = field(default_factory=list, repr=False)
    spectrum: Spectrum | None = field(default=None, repr=False)

    @property
    def K(self) -> int:
        return len(self.maps)

    @property
    def raw(self) -> np.ndarray:
        return self.raw_maps[self.k_p - 1]


# ---------------------------------------------------------------- features

def rgb_to_features(img) -> FeatureMaps:
    """Intensity and the two opponent-colour channels."""
    rgb = as_rgb(img)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    R = r - (g + b) / 2
    G = g - (r + b) / 2
    B = b - (r + g) / 2
    Y = (r + g) / 2 - np.abs(r - g) / 2 - b
    return FeatureMaps((r + g + b) / 3, R - G, B - Y)


def build_hypercomplex(f: FeatureMaps, cfg: ModelConfig = ModelConfig(), motion=None) -> QuaternionImage:
    w1, w2, w3, w4 = cfg.weights
    scalar = np.zeros_like(f.I) if motion is None else w1 * np.asarray(motion, dtype=np.float64)
    return QuaternionImage.from_planes(scalar, w2 * f.I, w3 * f.RG, w4 * f.BY)


# ---------------------------------------------------------------- HFT

def _post_sigma(cfg_factor: float, shape) -> float:
    return cfg_factor * shape[1]


def reconstruction_energy(amplitude: np.ndarray, unit: np.ndarray, axis: PureUnitAxis) -> np.ndarray:
    """||HFT^-1{amplitude * unit}||^2 elementwise; ``unit`` is a (4, H, W) phase factor."""
    rec = hft_inverse(QuaternionImage(amplitude * unit), axis)
    return np.sum(rec.data ** 2, axis=0)


def saliency_at_scale(layer: np.ndarray, phase: np.ndarray, eigenaxis: np.ndarray,
                      cfg: ModelConfig = ModelConfig(), *, log_domain: bool = False,
                      support: np.ndarray | None = None, scale: int | None = None,
                      model: str = "hft") -> SaliencyMap:
    """Saliency map for one scale-space layer with the original phase and eigenaxis.

    ``support`` marks bins with a defined phase; the phase factor is zero
    elsewhere.  Layers stored in the log domain are exponentiated first.
    """
    layer = np.asarray(layer, dtype=np.float64)
    if layer.shape != phase.shape or eigenaxis.shape != (3,) + layer.shape:
        raise ValueError("layer, phase and eigenaxis must share dimensions")
    amp = np.exp(layer) if log_domain else layer
    unit = np.concatenate([np.cos(phase)[None], eigenaxis * np.sin(phase)])
    if support is not None:
        unit = unit * support
    raw = reconstruction_energy(amp, unit, cfg.axis)
    sigma = _post_sigma(cfg.post_sigma_factor, raw.shape)
    return SaliencyMap(gaussian_smooth(raw, sigma), model, scale, sigma)


def hft_spectrum(img, cfg: ModelConfig = ModelConfig()) -> Spectrum:
    rgb = resize_bilinear(as_rgb(img), cfg.shape)
    q = build_hypercomplex(rgb_to_features(rgb), cfg)
    return polar_decompose(hft_forward(q, cfg.axis), cfg.axis)


def hft_saliency(img, cfg: ModelConfig = ModelConfig(), gt=None) -> HftResult:
    """Spectrum scale-space saliency with entropy-based scale selection.

    ``cfg.selection`` picks the criterion: ``"full"`` (entropy over border
    weight), ``"entropy-only"``, or ``"oracle"`` (best AUC against ``gt``).
    """
    spectrum = hft_spectrum(img, cfg)
    space = build_scale_space(spectrum.amplitude, cfg.domain, cfg.t0)
    unit = spectrum.unit_factor().data
    sigma = _post_sigma(cfg.post_sigma_factor, spectrum.shape)
    raw_maps, maps = [], []
    for k in range(1, space.K + 1):
        raw = reconstruction_energy(space.amplitude(k), unit, cfg.axis)
        raw_maps.append(raw)
        maps.append(SaliencyMap(gaussian_smooth(raw, sigma), "hft", k, sigma))
    trace: list = []
    k_p = select_scale(maps, cfg.criterion(), gt=gt, trace=trace)
    return HftResult(maps[k_p - 1], k_p, maps, raw_maps, trace, spectrum)


def pqft_saliency(img, cfg: ModelConfig = ModelConfig(), size=WORKING_SIZE["pqft"]) -> SaliencyMap:
    """Phase-only quaternion reconstruction (amplitude set to one)."""
    cfg = cfg.with_(resolution=size)
    rgb = resize_bilinear(as_rgb(img), cfg.shape)
    q = build_hypercomplex(rgb_to_features(rgb), cfg)
    F = hft_forward(q, cfg.axis).data
    amp = np.sqrt(np.sum(F ** 2, axis=0))
    keep = amp > NULL_REL_TOL * amp.max() if amp.max() > 0 else np.zeros(amp.shape, bool)
    unit = np.where(keep, F / np.where(keep, amp, 1.0), 0.0)
    raw = np.sum(hft_inverse(QuaternionImage(unit), cfg.axis).data ** 2, axis=0)
    sigma = _post_sigma(cfg.post_sigma_factor, raw.shape)
    return SaliencyMap(gaussian_smooth(raw, sigma), "pqft", None, sigma)


# ---------------------------------------------------------------- single-channel baselines

def _gray_at(img, size) -> np.ndarray:
    return resize_bilinear(intensity(img), _shape(size))


def _log_spectrum(gray: np.ndarray):
    F = dft2(gray)
    A = np.abs(F)
    peak = A.max()
    support = A > NULL_REL_TOL * peak if peak > 0 else np.zeros(A.shape, bool)
    return F, np.log(A + LOG_EPS), np.angle(F), support


def _phase_reconstruct(log_amp: np.ndarray, phase: np.ndarray, support: np.ndarray) -> np.ndarray:
    spec = np.where(support, np.exp(log_amp + 1j * phase), 0.0)
    return np.abs(dft2(spec, "inverse")) ** 2


def spectral_residual(log_amp: np.ndarray, support: np.ndarray | None = None) -> np.ndarray:
    """Log amplitude minus its 3x3 (circular) local average.

    With ``support`` given, the average runs over supported bins only, so
    numerically empty bins (log amplitude near log eps) do not drag their
    neighbours down.
    """
    box = np.full((3, 3), 1.0 / 9.0)
    if support is None or support.all():
        return log_amp - convolve2_circular(log_amp, box)
    w = support.astype(np.float64)
    num = convolve2_circular(log_amp * w, box)
    den = convolve2_circular(w, box)
    local = np.where(den > 1e-9, num / np.where(den > 1e-9, den, 1.0), 0.0)
    return np.where(support, log_amp - local, 0.0)


def _finish(raw, model, post_sigma_factor) -> SaliencyMap:
    sigma = _post_sigma(post_sigma_factor, raw.shape)
    return SaliencyMap(gaussian_smooth(raw, sigma), model, None, sigma)


def sr_saliency(img, size=WORKING_SIZE["sr"], post_sigma_factor: float = POST_SIGMA_FACTOR) -> SaliencyMap:
    _, L, P, support = _log_spectrum(_gray_at(img, size))
    return _finish(_phase_reconstruct(spectral_residual(L, support), P, support), "sr", post_sigma_factor)


def pft_saliency(img, size=WORKING_SIZE["pft"], post_sigma_factor: float = POST_SIGMA_FACTOR) -> SaliencyMap:
    _, L, P, support = _log_spectrum(_gray_at(img, size))
    return _finish(_phase_reconstruct(np.zeros_like(L), P, support), "pft", post_sigma_factor)


def gs_saliency(img, size=WORKING_SIZE["gs"], post_sigma_factor: float = POST_SIGMA_FACTOR) -> SaliencyMap:
    """Laplacian response squared, then Gaussian smoothing."""
    gray = _gray_at(img, size)
    gra = ndimage.convolve(gray, LAPLACIAN, mode="nearest")
    return _finish(gra ** 2, "gs", post_sigma_factor)


def matched_noise(residual: np.ndarray, rng: np.random.Generator, spread: float = 1.0,
                  stats_mask: np.ndarray | None = None) -> np.ndarray:
    """Uniform white noise affinely mapped to the mean and maximum of ``residual``.

    ``stats_mask`` restricts the bins the mean and maximum are taken over.
    """
    sel = np.ones(residual.shape, bool) if stats_mask is None else stats_mask
    u = rng.random(residual.shape)
    if not sel.any():
        return np.zeros_like(residual)
    mean, top = float(residual[sel].mean()), float(residual[sel].max())
    span = u[sel].max() - u[sel].mean()
    scale = (top - mean) / span if span > 0 else 0.0
    return mean + spread * scale * (u - u[sel].mean())


def noise_amplitude_saliency(img, seed=0, size=WORKING_SIZE["noise"],
                             post_sigma_factor: float = POST_SIGMA_FACTOR,
                             spread: float = 1.0) -> SaliencyMap:
    """SR with the residual replaced by matched white noise (phase kept).

    The DC bin is left out of the mean/max statistics: it carries the mean
    brightness and would otherwise set the noise range on its own.
    ``spread`` scales the noise around its mean; 0 gives a flat log amplitude.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    _, L, P, support = _log_spectrum(_gray_at(img, size))
    R = spectral_residual(L, support)
    stats = support.copy()
    stats[0, 0] = False
    W = matched_noise(R, rng, spread, stats_mask=stats)
    W[~support] = 0.0
    return _finish(_phase_reconstruct(W, P, support), "noise-diagnostic", post_sigma_factor)


# ---------------------------------------------------------------- registry

MODEL_NAMES = ("hft", "hft-e", "hft-star", "sr", "pft", "pqft", "gs", "noise-diagnostic")


def run_model(name: str, img, cfg: ModelConfig = ModelConfig(), *, gt=None, seed=0,
              raw: bool = False) -> SaliencyMap:
    """Run a detector by name.  ``raw=True`` returns the map before post-smoothing."""
    if name in ("hft", "hft-e", "hft-star"):
        mode = {"hft": "full", "hft-e": "entropy-only", "hft-star": "oracle"}[name]
        res = hft_saliency(img, cfg.with_(selection=mode), gt=gt)
        if raw:
            return SaliencyMap(res.raw, name, res.k_p, 0.0)
        out = res.saliency
        return SaliencyMap(out.values, name, res.k_p, out.post_sigma)
    factor = 0.0 if raw else cfg.post_sigma_factor
    if name == "sr":
        return sr_saliency(img, post_sigma_factor=factor)
    if name == "pft":
        return pft_saliency(img, post_sigma_factor=factor)
    if name == "gs":
        return gs_saliency(img, post_sigma_factor=factor)
    if name == "pqft":
        return pqft_saliency(img, cfg.with_(post_sigma_factor=factor))
    if name == "noise-diagnostic":
        return noise_amplitude_saliency(img, seed=seed, post_sigma_factor=factor)
    raise ValueError(f"unknown model {name!r}; expected one of {MODEL_NAMES}")
