"""Gaussian kernel family, circular convolution and the spectrum scale space.

The DFT amplitude plane is periodic, so every smoothing of a spectrum here
wraps around and operates on the unshifted (DC at [0, 0]) layout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

LOG_EPS = 1e-12
DEFAULT_T0 = 0.5


@dataclass(frozen=True)
class KernelSpec:
    k: int
    t0: float = DEFAULT_T0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"scale index k must be a positive integer, got {self.k!r}")
        if not self.t0 > 0:
            raise ValueError(f"base scale t0 must be positive, got {self.t0!r}")

    @property
    def sigma(self) -> float:
        return 2.0 ** (self.k - 1) * self.t0

    def peak(self) -> float:
        """Continuous kernel value at the origin, before discrete renormalization."""
        return 1.0 / (math.sqrt(2.0 * math.pi) * self.sigma)


def num_scales(height: int, width: int) -> int:
    """Number of scale-space layers for an image of the given size."""
    return math.ceil(math.log2(min(height, width))) + 1


def truncation_radius(sigma: float) -> int:
    """Kernel radius ceil(3 sigma)."""
    return max(math.ceil(3.0 * sigma), 0)


def periodize(kernel: np.ndarray, shape) -> np.ndarray:
    """Wrap a centred kernel onto a periodic grid of ``shape`` (centre at index 0).

    Taps that land on the same grid cell are summed, so a kernel wider than
    the grid still performs an exact circular convolution.
    """
    kernel = np.asarray(kernel, dtype=np.float64)
    shape = tuple(shape)
    if kernel.ndim != len(shape):
        raise ValueError("kernel and grid dimensionality differ")
    idx = np.ix_(*[(np.arange(n) - n // 2) % m for n, m in zip(kernel.shape, shape)])
    out = np.zeros(shape)
    np.add.at(out, idx, kernel)
    return out


def gaussian_kernel(spec: KernelSpec, truncation_radius: int) -> np.ndarray:
    """Sampled isotropic Gaussian on a (2r+1) x (2r+1) lattice, normalized to sum 1."""
    r = int(truncation_radius)
    if r < 0:
        raise ValueError("truncation radius must be nonnegative")
    u = np.arange(-r, r + 1, dtype=np.float64)
    sq = u[:, None] ** 2 + u[None, :] ** 2
    # exp(-(u^2+v^2) / (2^(2k-1) t0^2)) == exp(-(u^2+v^2) / (2 sigma^2))
    g = spec.peak() * np.exp(-sq / (2.0 ** (2 * spec.k - 1) * spec.t0 ** 2))
    return g / g.sum()


def _apply_periodic(field: np.ndarray, periodic_kernel: np.ndarray) -> np.ndarray:
    return np.fft.irfft2(np.fft.rfft2(field) * np.fft.rfft2(periodic_kernel), s=field.shape)


def convolve2_circular(field: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Wrap-around convolution of a real plane with a centred kernel.

    The kernel centre sits at index (kh // 2, kw // 2).  Evaluated through the
    FFT, so cost does not depend on kernel size.
    """
    field = np.asarray(field, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.shape[0] > field.shape[0] or kernel.shape[1] > field.shape[1]:
        raise ValueError(f"kernel {kernel.shape} larger than field {field.shape}")
    return _apply_periodic(field, periodize(kernel, field.shape))


def smooth_circular(field: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Circular Gaussian smoothing; kernels wider than the plane are folded onto it."""
    field = np.asarray(field, dtype=np.float64)
    g = gaussian_kernel(spec, truncation_radius(spec.sigma))
    return _apply_periodic(field, periodize(g, field.shape))


@dataclass(frozen=True)
class SpectrumScaleSpace:
    """K smoothed copies of an amplitude spectrum; ``layers[k-1]`` is scale k."""

    layers: list = field(repr=False)
    log_domain: bool
    t0: float = DEFAULT_T0

    @property
    def K(self) -> int:
        return len(self.layers)

    def sigma(self, k: int) -> float:
        return KernelSpec(k, self.t0).sigma

    def amplitude(self, k: int) -> np.ndarray:
        """Layer k in the linear amplitude domain."""
        layer = self.layers[k - 1]
        return np.exp(layer) if self.log_domain else layer

    def __iter__(self):
        return iter(self.layers)

    def __len__(self):
        return len(self.layers)


def build_scale_space(amplitude: np.ndarray, domain: str = "log-amplitude",
                      t0: float = DEFAULT_T0) -> SpectrumScaleSpace:
    amplitude = np.asarray(amplitude, dtype=np.float64)
    if np.any(amplitude < 0):
        raise ValueError("amplitude spectrum has negative entries")
    if domain not in ("amplitude", "log-amplitude"):
        raise ValueError(f"unknown smoothing domain {domain!r}")
    log_domain = domain == "log-amplitude"
    base = np.log(amplitude + LOG_EPS) if log_domain else amplitude
    K = num_scales(*amplitude.shape)
    layers = [smooth_circular(base, KernelSpec(k, t0)) for k in range(1, K + 1)]
    return SpectrumScaleSpace(layers, log_domain, t0)


def spectrum_sharpness(amplitude: np.ndarray, h_m: KernelSpec = KernelSpec(1)) -> float:
    """Peak reduction under smoothing: max |X - X * h_m|, circular for 1-D or 2-D spectra."""
    x = np.asarray(amplitude, dtype=np.float64)
    if x.ndim == 1:
        r = truncation_radius(h_m.sigma)
        u = np.arange(-r, r + 1, dtype=np.float64)
        g = np.exp(-u ** 2 / (2.0 * h_m.sigma ** 2))
        kernel = periodize(g / g.sum(), x.shape)
        smoothed = np.fft.irfft(np.fft.rfft(x) * np.fft.rfft(kernel), n=x.size)
    else:
        smoothed = smooth_circular(x, h_m)
    return float(np.max(np.abs(x - smoothed)))


def total_variation(plane: np.ndarray) -> float:
    """Anisotropic circular total variation."""
    p = np.asarray(plane, dtype=np.float64)
    return float(np.abs(np.diff(p, axis=0, append=p[:1])).sum()
                 + np.abs(np.diff(p, axis=1, append=p[:, :1])).sum())
