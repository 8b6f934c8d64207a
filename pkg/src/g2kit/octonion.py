"""Octonions as pairs of quaternions and the 2-fold cross product on Im O.

Coordinates follow Im O = Im H + H: an imaginary octonion with coordinates
(x1..x7) is the pair (x1 i + x2 j + x3 k, x4 + x5 i + x6 j + x7 k).  A full
octonion is stored as 8 reals ``(re, x1, ..., x7)`` so that the first
quaternion is ``(re, x1, x2, x3)`` and the second is ``(x4, x5, x6, x7)``.

All array functions broadcast over leading axes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DOUBLING_CONVENTION",
    "Octonion",
    "ImOctonion",
    "quat_mul",
    "quat_conj",
    "oct_mul",
    "conj",
    "cross",
    "basis",
]

# Which Cayley-Dickson doubling rule is in use; fixed by the calibration
# test against Omega_0 (tests/test_octonion.py::test_calibration_identity).
#   "standard": (a,b)(c,d) = (ac - conj(d) b, d a + b conj(c))
#   "mirror":   (a,b)(c,d) = (ac - d conj(b), conj(a) d + c b)
DOUBLING_CONVENTION = "standard"


def quat_mul(p, q):
    """Hamilton product of quaternions stored as (..., 4) arrays."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    a0, a1, a2, a3 = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    b0, b1, b2, b3 = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    out = np.empty(np.broadcast_shapes(p.shape, q.shape))
    out[..., 0] = a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3
    out[..., 1] = a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2
    out[..., 2] = a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1
    out[..., 3] = a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0
    return out


def quat_conj(q):
    q = np.array(q, dtype=float)
    q[..., 1:] *= -1.0
    return q


def oct_mul(a, b, convention: str | None = None):
    """Octonion product of (..., 8) arrays by Cayley-Dickson doubling of H."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    p, q = a[..., :4], a[..., 4:]
    r, s = b[..., :4], b[..., 4:]
    convention = convention or DOUBLING_CONVENTION
    if convention == "standard":
        first = quat_mul(p, r) - quat_mul(quat_conj(s), q)
        second = quat_mul(s, p) + quat_mul(q, quat_conj(r))
    elif convention == "mirror":
        first = quat_mul(p, r) - quat_mul(s, quat_conj(q))
        second = quat_mul(quat_conj(p), s) + quat_mul(r, q)
    else:
        raise ValueError(f"unknown doubling convention {convention!r}")
    return np.concatenate([first, second], axis=-1)


def conj(a):
    """Octonion conjugate: real part kept, imaginary part negated."""
    a = np.array(a, dtype=float)
    a[..., 1:] *= -1.0
    return a


def _embed(u):
    u = np.asarray(u, dtype=float)
    return np.concatenate([np.zeros(u.shape[:-1] + (1,)), u], axis=-1)


def cross(u, v, convention: str | None = None):
    """Vector cross product on Im O, ``u x v = Im(conj(v) u)``."""
    prod = oct_mul(conj(_embed(v)), _embed(u), convention)
    return prod[..., 1:]


def basis(i: int) -> np.ndarray:
    """Standard basis vector e_i of Im O (1-based)."""
    if not 1 <= i <= 7:
        raise ValueError("basis index must be in 1..7")
    e = np.zeros(7)
    e[i - 1] = 1.0
    return e


@dataclass(frozen=True)
class Octonion:
    re: float
    im: tuple

    def __post_init__(self):
        im = tuple(float(x) for x in self.im)
        if len(im) != 7:
            raise ValueError("an octonion has exactly 7 imaginary coordinates")
        object.__setattr__(self, "im", im)
        object.__setattr__(self, "re", float(self.re))

    @classmethod
    def from_array(cls, a) -> "Octonion":
        a = np.asarray(a, dtype=float)
        return cls(a[0], tuple(a[1:]))

    def to_array(self) -> np.ndarray:
        return np.array((self.re,) + self.im)

    def __mul__(self, other: "Octonion") -> "Octonion":
        return Octonion.from_array(oct_mul(self.to_array(), other.to_array()))

    def __add__(self, other: "Octonion") -> "Octonion":
        return Octonion.from_array(self.to_array() + other.to_array())

    def __sub__(self, other: "Octonion") -> "Octonion":
        return Octonion.from_array(self.to_array() - other.to_array())

    def conj(self) -> "Octonion":
        return Octonion.from_array(conj(self.to_array()))

    def norm(self) -> float:
        return float(np.linalg.norm(self.to_array()))

    def imaginary(self) -> "ImOctonion":
        return ImOctonion(self.im)


@dataclass(frozen=True)
class ImOctonion:
    coords: tuple

    def __post_init__(self):
        c = tuple(float(x) for x in self.coords)
        if len(c) != 7:
            raise ValueError("an imaginary octonion has exactly 7 coordinates")
        object.__setattr__(self, "coords", c)

    @classmethod
    def basis(cls, i: int) -> "ImOctonion":
        return cls(tuple(basis(i)))

    def to_array(self) -> np.ndarray:
        return np.array(self.coords)

    def as_octonion(self) -> Octonion:
        return Octonion(0.0, self.coords)

    def cross(self, other: "ImOctonion") -> "ImOctonion":
        return ImOctonion(tuple(cross(self.to_array(), other.to_array())))

    def dot(self, other: "ImOctonion") -> float:
        return float(self.to_array() @ other.to_array())

    def norm(self) -> float:
        return float(np.linalg.norm(self.to_array()))
