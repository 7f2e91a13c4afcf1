"""Quaternion scalars, the unit sphere of imaginary units and 2-spheres [s].

Scalar values are :class:`Quaternion` instances. Arrays of quaternions are
plain float arrays whose last axis has length 4, ordered ``[w, x, y, z]``;
:func:`qmul`, :func:`qconj` and :func:`qabs` operate on those.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from qinterp import _kernels

ATOL = 1e-12


@dataclass(frozen=True)
class Quaternion:
    """``w + x e1 + y e2 + z e3`` in double precision."""

    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_array(cls, arr) -> Quaternion:
        a = np.asarray(arr, dtype=float)
        if a.shape != (4,):
            raise ValueError(f"quaternion needs 4 components, got shape {a.shape}")
        return cls(*(float(c) for c in a))

    @classmethod
    def coerce(cls, value) -> Quaternion:
        if isinstance(value, Quaternion):
            return value
        if isinstance(value, (int, float, np.floating, np.integer)):
            return cls(float(value))
        return cls.from_array(value)

    def to_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def to_list(self) -> list[float]:
        return [self.w, self.x, self.y, self.z]

    @property
    def real(self) -> float:
        return self.w

    @property
    def imag(self) -> Quaternion:
        return Quaternion(0.0, self.x, self.y, self.z)

    @property
    def imag_norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def conj(self) -> Quaternion:
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm2(self) -> float:
        return self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z

    def __abs__(self) -> float:
        return math.sqrt(self.norm2())

    def __neg__(self) -> Quaternion:
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __add__(self, other) -> Quaternion:
        o = Quaternion.coerce(other)
        return Quaternion(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)

    __radd__ = __add__

    def __sub__(self, other) -> Quaternion:
        return self + (-Quaternion.coerce(other))

    def __rsub__(self, other) -> Quaternion:
        return Quaternion.coerce(other) - self

    def __mul__(self, other) -> Quaternion:
        if isinstance(other, (int, float, np.floating, np.integer)):
            c = float(other)
            return Quaternion(self.w * c, self.x * c, self.y * c, self.z * c)
        return mul(self, Quaternion.coerce(other))

    def __rmul__(self, other) -> Quaternion:
        # only real scalars reach here, and reals commute
        return self * other

    def __truediv__(self, other) -> Quaternion:
        if isinstance(other, (int, float, np.floating, np.integer)):
            return self * (1.0 / float(other))
        return self * inverse(Quaternion.coerce(other))

    def inverse(self) -> Quaternion:
        return inverse(self)

    def is_close(self, other, atol: float = ATOL) -> bool:
        o = Quaternion.coerce(other)
        return bool(np.all(np.abs(self.to_array() - o.to_array()) <= atol))

    def sphere(self) -> tuple[float, float]:
        """``(Re(s), |Im(s)|)``, which identifies the 2-sphere [s]."""
        return (self.w, self.imag_norm)

    def canonical(self) -> Quaternion:
        """Representative ``Re(s) + |Im(s)| e1`` of the sphere [s]."""
        return Quaternion(self.w, self.imag_norm, 0.0, 0.0)

    def __repr__(self) -> str:
        return f"Quaternion({self.w!r}, {self.x!r}, {self.y!r}, {self.z!r})"


ONE = Quaternion(1.0)
E1 = Quaternion(0.0, 1.0, 0.0, 0.0)
E2 = Quaternion(0.0, 0.0, 1.0, 0.0)
E3 = Quaternion(0.0, 0.0, 0.0, 1.0)


class ZeroDivisionQuaternionError(ZeroDivisionError):
    pass


@dataclass(frozen=True, repr=False)
class ImaginaryUnit(Quaternion):
    """An element of the sphere S: zero real part, modulus one."""

    def __post_init__(self):
        if abs(self.w) > 1e-12 or abs(abs(self) - 1.0) > 1e-12:
            raise ValueError(f"not an imaginary unit: {self!r}")

    @classmethod
    def from_vector(cls, v) -> ImaginaryUnit:
        """Normalize a nonzero 3-vector of imaginary coefficients."""
        v = np.asarray(v, dtype=float)
        n = float(np.linalg.norm(v))
        if n == 0.0:
            raise ValueError("zero vector has no direction")
        v = v / n
        return cls(0.0, float(v[0]), float(v[1]), float(v[2]))

    @classmethod
    def random(cls, rng: np.random.Generator) -> ImaginaryUnit:
        return cls.from_vector(rng.normal(size=3))


def mul(q: Quaternion, p: Quaternion) -> Quaternion:
    return Quaternion(
        q.w * p.w - q.x * p.x - q.y * p.y - q.z * p.z,
        q.w * p.x + q.x * p.w + q.y * p.z - q.z * p.y,
        q.w * p.y - q.x * p.z + q.y * p.w + q.z * p.x,
        q.w * p.z + q.x * p.y - q.y * p.x + q.z * p.w,
    )


def inverse(q: Quaternion) -> Quaternion:
    n2 = q.norm2()
    if n2 == 0.0:
        raise ZeroDivisionQuaternionError("inverse of the zero quaternion")
    return q.conj() * (1.0 / n2)


def ray_point(t: float, omega: float, i: Quaternion = E1) -> Quaternion:
    """``t e^{i omega} = t cos(omega) + i t sin(omega)`` on the ray S_omega."""
    if not t > 0:
        raise ValueError(f"ray parameter must be positive, got {t}")
    if not isinstance(i, ImaginaryUnit):
        i = ImaginaryUnit(i.w, i.x, i.y, i.z)
    c, s = math.cos(omega), math.sin(omega)
    return Quaternion(t * c, t * s * i.x, t * s * i.y, t * s * i.z)


def same_sphere(q: Quaternion, s: Quaternion, atol: float = ATOL) -> bool:
    """Whether ``q`` lies on the 2-sphere [s]."""
    return abs(q.w - s.w) <= atol and abs(q.imag_norm - s.imag_norm) <= atol


def unit_of(q: Quaternion) -> ImaginaryUnit:
    """Imaginary unit i with ``q`` in C_i; e1 when ``q`` is real."""
    if q.imag_norm == 0.0:
        return ImaginaryUnit(0.0, 1.0, 0.0, 0.0)
    return ImaginaryUnit.from_vector([q.x, q.y, q.z])


# ----------------------------------------------------------- array helpers


def qmul(a, b) -> np.ndarray:
    """Elementwise Hamilton product of quaternion arrays (last axis 4)."""
    return _kernels.qmul(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def qconj(a) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out[..., 1:] *= -1.0
    return out


def qabs(a) -> np.ndarray:
    return np.sqrt(np.sum(np.asarray(a, dtype=float) ** 2, axis=-1))


def random_quaternions(rng: np.random.Generator, shape) -> np.ndarray:
    shape = (shape,) if isinstance(shape, int) else tuple(shape)
    return rng.normal(size=shape + (4,))
