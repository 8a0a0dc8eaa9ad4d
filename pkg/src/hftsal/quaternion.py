"""Quaternion algebra and the symplectic (simplex/perplex) decomposition.

A quaternion image f = a + b i + c j + d k is rewritten in the orthonormal
basis {1, mu, nu, mu nu}, with mu the transform axis and nu a unit pure
quaternion orthogonal to it:

    f = (s0 + s1 mu) + (p0 + p1 mu) nu

Both brackets live in the commutative sub-algebra spanned by {1, mu}, which
is isomorphic to the complex numbers (mu <-> 1j).  A left-sided quaternion
Fourier transform with axis mu therefore acts on the simplex s0 + 1j*s1 and
the perplex p0 + 1j*p1 as two ordinary complex DFTs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

AXIS_TOL = 1e-9


@dataclass(frozen=True)
class Quaternion:
    a: float
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    def __mul__(self, other: "Quaternion") -> "Quaternion":
        return qmul(self, other)

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.a + other.a, self.b + other.b,
                          self.c + other.c, self.d + other.d)

    def __iter__(self):
        return iter((self.a, self.b, self.c, self.d))

    @property
    def scalar(self) -> float:
        return self.a

    @property
    def vector(self) -> tuple[float, float, float]:
        return (self.b, self.c, self.d)

    def norm(self) -> float:
        # hypot scales internally, so tiny components do not underflow to 0
        return math.hypot(self.a, self.b, self.c, self.d)

    def conj(self) -> "Quaternion":
        return Quaternion(self.a, -self.b, -self.c, -self.d)


def qmul(p: Quaternion, q: Quaternion) -> Quaternion:
    """Hamilton product ``p * q``."""
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return Quaternion(
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    )


@dataclass(frozen=True)
class PureUnitAxis:
    """Unit pure quaternion b i + c j + d k (squares to -1)."""

    b: float
    c: float
    d: float

    def __post_init__(self):
        n = math.sqrt(self.b ** 2 + self.c ** 2 + self.d ** 2)
        if not math.isfinite(n) or abs(n - 1.0) > AXIS_TOL:
            raise ValueError(f"axis must be a unit pure quaternion, got norm {n!r}")

    @classmethod
    def normalized(cls, b: float, c: float, d: float) -> "PureUnitAxis":
        n = math.sqrt(b * b + c * c + d * d)
        if n == 0.0 or not math.isfinite(n):
            raise ValueError("cannot normalize a zero or non-finite axis")
        return cls(b / n, c / n, d / n)

    def as_array(self) -> np.ndarray:
        return np.array([self.b, self.c, self.d], dtype=np.float64)

    def as_quaternion(self) -> Quaternion:
        return Quaternion(0.0, self.b, self.c, self.d)


#: Luminance axis (i + j + k) / sqrt(3), the usual choice for colour QFTs.
LUMINANCE_AXIS = PureUnitAxis.normalized(1.0, 1.0, 1.0)


def orthogonal_axis(axis: PureUnitAxis) -> PureUnitAxis:
    """Second basis vector: normalize(mu x i), or normalize(mu x j) if mu is parallel to i."""
    mu = axis.as_array()
    v = np.cross(mu, [1.0, 0.0, 0.0])
    if np.linalg.norm(v) < 1e-6:
        v = np.cross(mu, [0.0, 1.0, 0.0])
    return PureUnitAxis.normalized(*v)


def symplectic_basis(axis: PureUnitAxis) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return the three vector directions (mu, nu, mu*nu) as 3-arrays."""
    mu = axis.as_array()
    nu = orthogonal_axis(axis).as_array()
    # mu and nu are orthogonal pure quaternions, so mu*nu = mu x nu (pure).
    return mu, nu, np.cross(mu, nu)


class QuaternionImage:
    """H x W field of quaternions, stored as a (4, H, W) float64 array."""

    __slots__ = ("_data",)

    def __init__(self, data):
        data = np.array(data, dtype=np.float64)
        if data.ndim != 3 or data.shape[0] != 4:
            raise ValueError(f"expected a (4, H, W) array, got shape {data.shape}")
        if data.shape[1] < 1 or data.shape[2] < 1:
            raise ValueError("image dimensions must be positive")
        if not np.all(np.isfinite(data)):
            raise ValueError("quaternion image contains non-finite values")
        data.setflags(write=False)
        self._data = data

    @classmethod
    def from_planes(cls, a, b, c, d) -> "QuaternionImage":
        planes = [np.asarray(p, dtype=np.float64) for p in (a, b, c, d)]
        shape = planes[0].shape
        if any(p.shape != shape for p in planes):
            raise ValueError("all four planes must share the same dimensions")
        return cls(np.stack(planes))

    @classmethod
    def zeros(cls, height: int, width: int) -> "QuaternionImage":
        return cls(np.zeros((4, height, width)))

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def shape(self) -> tuple[int, int]:
        return self._data.shape[1], self._data.shape[2]

    height = property(lambda self: self._data.shape[1])
    width = property(lambda self: self._data.shape[2])
    a = property(lambda self: self._data[0])
    b = property(lambda self: self._data[1])
    c = property(lambda self: self._data[2])
    d = property(lambda self: self._data[3])

    def modulus(self) -> np.ndarray:
        return np.sqrt(np.sum(self._data ** 2, axis=0))

    def __getitem__(self, idx) -> Quaternion:
        n, m = idx
        return Quaternion(*(float(x) for x in self._data[:, n, m]))

    def __repr__(self):
        return f"QuaternionImage({self.height}x{self.width})"


def symplectic_split(img: QuaternionImage, axis: PureUnitAxis = LUMINANCE_AXIS):
    """Split a quaternion image into (simplex, perplex) complex planes w.r.t. ``axis``."""
    if not isinstance(axis, PureUnitAxis):
        axis = PureUnitAxis(*axis)
    mu, nu, munu = symplectic_basis(axis)
    vec = img.data[1:]
    s1 = np.tensordot(mu, vec, axes=1)
    p0 = np.tensordot(nu, vec, axes=1)
    p1 = np.tensordot(munu, vec, axes=1)
    return img.data[0] + 1j * s1, p0 + 1j * p1


def symplectic_merge(pair, axis: PureUnitAxis = LUMINANCE_AXIS) -> QuaternionImage:
    """Inverse of :func:`symplectic_split` for the same axis."""
    simplex, perplex = (np.asarray(p) for p in pair)
    if simplex.shape != perplex.shape:
        raise ValueError(f"simplex {simplex.shape} and perplex {perplex.shape} differ in shape")
    if not isinstance(axis, PureUnitAxis):
        axis = PureUnitAxis(*axis)
    mu, nu, munu = symplectic_basis(axis)
    vec = (np.multiply.outer(mu, simplex.imag)
           + np.multiply.outer(nu, perplex.real)
           + np.multiply.outer(munu, perplex.imag))
    return QuaternionImage(np.concatenate([simplex.real[None], vec]))
