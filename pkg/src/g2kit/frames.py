"""Cayley-Dickson frames of Im O."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .octonion import cross

__all__ = [
    "Frame",
    "STRUCTURE_CONSTANTS",
    "cayley_dickson",
    "verify_frame",
    "verify_frames",
    "random_frame",
    "random_frames",
]

PRE_TOL = 1e-10
MIN_PROJECTED_NORM = 1e-6

# c[i, j, k] = <e_i x e_j, e_k>
STRUCTURE_CONSTANTS = cross(np.eye(7)[:, None, :], np.eye(7)[None, :, :])


@dataclass(frozen=True)
class Frame:
    """Seven vectors v1..v7 of Im O, stored as the rows of a 7x7 array."""

    vectors: np.ndarray

    def __post_init__(self):
        vs = np.array(self.vectors, dtype=float)
        if vs.shape != (7, 7):
            raise ValueError("a frame consists of seven vectors in R^7")
        vs.setflags(write=False)
        object.__setattr__(self, "vectors", vs)

    def __getitem__(self, i: int) -> np.ndarray:
        """1-based access: ``frame[1]`` is v1."""
        return self.vectors[i - 1]

    @classmethod
    def standard(cls) -> "Frame":
        return cls(np.eye(7))

    def gram_error(self) -> float:
        return float(np.abs(self.vectors @ self.vectors.T - np.eye(7)).max())

    def determinant(self) -> float:
        return float(np.linalg.det(self.vectors))


def _check(value: float, bound: float, what: str):
    if not value <= bound:
        raise PreconditionError(f"{what} = {value:.3e} violates {what} <= {bound:g}")


def cayley_dickson(v1, v2, v4) -> Frame:
    """Build (v1, v2, v1 x v2, v4, v1 x v4, v2 x v4, v3 x v4)."""
    v1, v2, v4 = (np.asarray(v, dtype=float) for v in (v1, v2, v4))
    _check(abs(np.linalg.norm(v1) - 1.0), PRE_TOL, "| |v1| - 1 |")
    _check(abs(np.linalg.norm(v2) - 1.0), PRE_TOL, "| |v2| - 1 |")
    _check(abs(v1 @ v2), PRE_TOL, "|<v1, v2>|")
    v3 = cross(v1, v2)
    _check(abs(np.linalg.norm(v4) - 1.0), PRE_TOL, "| |v4| - 1 |")
    for name, w in (("v1", v1), ("v2", v2), ("v3", v3)):
        _check(abs(v4 @ w), PRE_TOL, f"|<v4, {name}>|")
    return Frame(np.array([v1, v2, v3, v4, cross(v1, v4), cross(v2, v4), cross(v3, v4)]))


def verify_frames(stack) -> np.ndarray:
    """Batched verify_frame over an (n, 7, 7) array of frame vectors."""
    v = np.asarray(stack, dtype=float)
    actual = cross(v[:, :, None, :], v[:, None, :, :])
    expected = np.einsum("ijk,nkl->nijl", STRUCTURE_CONSTANTS, v)
    return np.linalg.norm(actual - expected, axis=-1).max(axis=(1, 2))


def verify_frame(f: Frame) -> float:
    """Largest deviation of the frame's cross products from the standard relations."""
    return float(verify_frames(f.vectors[None])[0])


def _sample_perpendicular(rng, basis_rows):
    """Gaussian vectors projected off the row spaces in ``basis_rows`` (n, m, 7), resampled when short."""
    n = basis_rows.shape[0]
    out = np.empty((n, 7))
    todo = np.arange(n)
    while todo.size:
        c = rng.standard_normal((todo.size, 7))
        q = basis_rows[todo]
        c -= np.einsum("nmi,nm->ni", q, np.einsum("nmi,ni->nm", q, c))
        nc = np.linalg.norm(c, axis=-1)
        ok = nc >= MIN_PROJECTED_NORM
        v = c[ok] / nc[ok, None]
        # second projection pass keeps the result within the precondition tolerance
        v -= np.einsum("nmi,nm->ni", q[ok], np.einsum("nmi,ni->nm", q[ok], v))
        out[todo[ok]] = v / np.linalg.norm(v, axis=-1, keepdims=True)
        todo = todo[~ok]
    return out


def random_frames(rng: np.random.Generator, count: int) -> list[Frame]:
    """``count`` Cayley-Dickson frames from random orthonormal v1, v2 and admissible v4."""
    a = rng.standard_normal((count, 7))
    v1 = a / np.linalg.norm(a, axis=-1, keepdims=True)
    v2 = _sample_perpendicular(rng, v1[:, None, :])
    v3 = cross(v1, v2)
    v4 = _sample_perpendicular(rng, np.stack([v1, v2, v3], axis=1))
    frames = np.stack([v1, v2, v3, v4, cross(v1, v4), cross(v2, v4), cross(v3, v4)], axis=1)
    return [Frame(f) for f in frames]


def random_frame(rng: np.random.Generator) -> Frame:
    f = random_frames(rng, 1)[0]
    return cayley_dickson(f[1], f[2], f[4])
