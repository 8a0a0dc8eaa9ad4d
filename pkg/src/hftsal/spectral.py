"""Unitary 2-D DFT, the hypercomplex Fourier transform and its polar form.

Complex images are plain complex128 numpy arrays.  All transforms use the
unitary 1/sqrt(MN) scaling in both directions, so Parseval holds exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quaternion import (
    LUMINANCE_AXIS,
    PureUnitAxis,
    QuaternionImage,
    symplectic_merge,
    symplectic_split,
)

#: |V(q)| below this is treated as "no vector part" when extracting the eigenaxis.
DEGENERATE_TOL = 1e-12
#: Bins whose amplitude is below this fraction of the peak are numerically empty.
NULL_REL_TOL = 1e-12


def dft2(img, direction: str = "forward") -> np.ndarray:
    """Unitary 2-D DFT of a complex (or real) plane."""
    x = np.asarray(img, dtype=np.complex128)
    if x.ndim != 2 or min(x.shape) < 1:
        raise ValueError(f"expected a non-empty 2-D plane, got shape {x.shape}")
    if direction == "forward":
        return np.fft.fft2(x, norm="ortho")
    if direction == "inverse":
        return np.fft.ifft2(x, norm="ortho")
    raise ValueError(f"direction must be 'forward' or 'inverse', not {direction!r}")


def hft_forward(img: QuaternionImage, axis: PureUnitAxis = LUMINANCE_AXIS) -> QuaternionImage:
    """Left-sided discrete quaternion Fourier transform with transform axis ``axis``."""
    simplex, perplex = symplectic_split(img, axis)
    return symplectic_merge((dft2(simplex), dft2(perplex)), axis)


def hft_inverse(spec: QuaternionImage, axis: PureUnitAxis = LUMINANCE_AXIS) -> QuaternionImage:
    simplex, perplex = symplectic_split(spec, axis)
    return symplectic_merge((dft2(simplex, "inverse"), dft2(perplex, "inverse")), axis)


@dataclass(frozen=True)
class Spectrum:
    """Polar form of a quaternion spectrum.

    ``eigenaxis`` has shape (3, H, W); every column is a unit vector.
    """

    amplitude: np.ndarray
    phase: np.ndarray
    eigenaxis: np.ndarray

    def __post_init__(self):
        if self.amplitude.shape != self.phase.shape or self.eigenaxis.shape != (3,) + self.amplitude.shape:
            raise ValueError("amplitude, phase and eigenaxis planes must share dimensions")
        if np.any(self.amplitude < 0):
            raise ValueError("amplitude must be nonnegative")

    @property
    def shape(self) -> tuple[int, int]:
        return self.amplitude.shape

    @property
    def support(self) -> np.ndarray:
        """Bins carrying energy; the phase at the remaining bins is undefined."""
        peak = float(self.amplitude.max()) if self.amplitude.size else 0.0
        if peak == 0.0:
            return np.zeros(self.amplitude.shape, dtype=bool)
        return self.amplitude > NULL_REL_TOL * peak

    def unit_factor(self, masked: bool = True) -> QuaternionImage:
        """cos P + X sin P, zeroed outside :attr:`support` when ``masked``."""
        q = _exp_axis(self.phase, self.eigenaxis)
        if masked:
            q = q * self.support
        return QuaternionImage(q)


def _exp_axis(phase: np.ndarray, eigenaxis: np.ndarray) -> np.ndarray:
    return np.concatenate([np.cos(phase)[None], eigenaxis * np.sin(phase)])


def polar_decompose(spec: QuaternionImage, default_axis: PureUnitAxis = LUMINANCE_AXIS) -> Spectrum:
    """Amplitude, phase in [0, pi] and eigenaxis of every bin.

    Where the vector part vanishes the eigenaxis falls back to
    ``default_axis`` and the phase is 0 or pi according to the sign of the
    scalar part.
    """
    q = spec.data
    scalar = q[0]
    vec = q[1:]
    vnorm = np.sqrt(np.sum(vec ** 2, axis=0))
    amplitude = np.sqrt(scalar ** 2 + vnorm ** 2)
    degenerate = vnorm < DEGENERATE_TOL
    phase = np.where(degenerate, np.where(scalar < 0, np.pi, 0.0), np.arctan2(vnorm, scalar))
    safe = np.where(degenerate, 1.0, vnorm)
    fallback = default_axis.as_array()[:, None, None]
    eigenaxis = np.where(degenerate[None], fallback, vec / safe)
    return Spectrum(amplitude, phase, eigenaxis)


def polar_compose(s: Spectrum) -> QuaternionImage:
    """A (cos P + X sin P); the left-inverse of :func:`polar_decompose`."""
    norms = np.sqrt(np.sum(s.eigenaxis ** 2, axis=0))
    if np.any(np.abs(norms - 1.0) > 1e-6):
        raise ValueError("eigenaxis elements must be unit vectors")
    return QuaternionImage(s.amplitude * _exp_axis(s.phase, s.eigenaxis))
