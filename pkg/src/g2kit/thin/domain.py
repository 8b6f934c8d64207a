"""Thin slabs [0, eps] x T^2 and spinor fields on a staggered x1 grid.

The x1 interval is split into ``n1`` cells of width ``eps / n1``.  A field
component lives either at the cell centers (``n1`` values) or at the nodes
(``n1 + 1`` values, both end nodes pinned to zero).  Under the MINUS boundary
condition u sits at centers and v at nodes, so v vanishes on both faces; PLUS
swaps the roles.  The Dirac operator maps a field of one tag to the other.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..errors import GridMismatchError, PreconditionError

__all__ = ["Boundary", "ThinDomain", "SpinorField", "torus_wavenumbers"]

TWO_PI = 2.0 * np.pi


class Boundary(enum.Enum):
    MINUS = "minus"  # v = 0 on both faces
    PLUS = "plus"  # u = 0 on both faces

    @property
    def other(self) -> "Boundary":
        return Boundary.PLUS if self is Boundary.MINUS else Boundary.MINUS

    @classmethod
    def parse(cls, value) -> "Boundary":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


def torus_wavenumbers(n: int, period: float) -> np.ndarray:
    """Angular wavenumbers in FFT order, Nyquist set to zero.

    Dropping the Nyquist derivative keeps spectral differentiation real and
    antisymmetric, so the discrete dbar and its adjoint are exact transposes.
    """
    k = np.fft.fftfreq(n, d=1.0 / n) * (TWO_PI / period)
    if n % 2 == 0:
        k[n // 2] = 0.0
    return k


@dataclass(frozen=True, eq=False)
class ThinDomain:
    epsilon: float
    n1: int
    n2: int
    n3: int
    periods: tuple = (TWO_PI, TWO_PI)
    warp: np.ndarray | None = None
    twist: complex = 0.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise PreconditionError(f"epsilon must be > 0, got {self.epsilon}")
        if self.n1 < 4:
            raise PreconditionError(f"n1 must be >= 4, got {self.n1}")
        for name in ("n2", "n3"):
            n = getattr(self, name)
            if n < 4 or n % 2:
                raise PreconditionError(f"{name} must be even and >= 4, got {n}")
        periods = tuple(float(p) for p in self.periods)
        if len(periods) != 2 or min(periods) <= 0:
            raise PreconditionError("periods must be two positive reals")
        object.__setattr__(self, "periods", periods)
        object.__setattr__(self, "twist", complex(self.twist))
        if self.warp is not None:
            h = np.array(self.warp, dtype=float)
            if h.shape != (self.n2, self.n3):
                raise GridMismatchError(f"warp has shape {h.shape}, expected {(self.n2, self.n3)}")
            if not np.all(h > 0):
                raise PreconditionError(f"warp must be positive, min sample {h.min():g}")
            h.setflags(write=False)
            object.__setattr__(self, "warp", h)

    @classmethod
    def with_warp(cls, epsilon, n1, n2, n3, warp_fn, **kw) -> "ThinDomain":
        """Sample ``warp_fn(x2, x3)`` on the torus grid."""
        periods = kw.get("periods", (TWO_PI, TWO_PI))
        x2 = np.arange(n2) * periods[0] / n2
        x3 = np.arange(n3) * periods[1] / n3
        h = np.broadcast_to(warp_fn(x2[:, None], x3[None, :]), (n2, n3))
        return cls(epsilon, n1, n2, n3, warp=h, **kw)

    def replace(self, **changes) -> "ThinDomain":
        kw = dict(
            epsilon=self.epsilon, n1=self.n1, n2=self.n2, n3=self.n3,
            periods=self.periods, warp=self.warp, twist=self.twist,
        )
        kw.update(changes)
        return ThinDomain(**kw)

    @property
    def dx1(self) -> float:
        return self.epsilon / self.n1

    @property
    def dx2(self) -> float:
        return self.periods[0] / self.n2

    @property
    def dx3(self) -> float:
        return self.periods[1] / self.n3

    @property
    def cell_volume(self) -> float:
        return self.dx1 * self.dx2 * self.dx3

    @property
    def x1_centers(self) -> np.ndarray:
        return (np.arange(self.n1) + 0.5) * self.dx1

    @property
    def x1_nodes(self) -> np.ndarray:
        return np.arange(self.n1 + 1) * self.dx1

    @property
    def x2(self) -> np.ndarray:
        return np.arange(self.n2) * self.dx2

    @property
    def x3(self) -> np.ndarray:
        return np.arange(self.n3) * self.dx3

    @property
    def xi2(self) -> np.ndarray:
        return torus_wavenumbers(self.n2, self.periods[0])

    @property
    def xi3(self) -> np.ndarray:
        return torus_wavenumbers(self.n3, self.periods[1])

    @property
    def symbol(self) -> np.ndarray:
        """Fourier symbol of dbar + c, shape (n2, n3)."""
        return self.twist + 1j * self.xi2[:, None] - self.xi3[None, :]

    @property
    def h(self) -> np.ndarray:
        return np.ones((self.n2, self.n3)) if self.warp is None else self.warp

    @property
    def warp_kind(self) -> str:
        """'constant', 'x2' (depends on x2 only) or 'general'."""
        h = self.h
        if np.all(h == h[0, 0]):
            return "constant"
        if np.all(h == h[:, :1]):
            return "x2"
        return "general"

    def shape(self, location: str) -> tuple:
        n = self.n1 if location == "center" else self.n1 + 1
        return (n, self.n2, self.n3)

    def layout(self, bc: Boundary) -> tuple:
        """Grid locations of (u, v) for a given boundary tag."""
        return ("center", "node") if Boundary.parse(bc) is Boundary.MINUS else ("node", "center")

    def x1(self, location: str) -> np.ndarray:
        return self.x1_centers if location == "center" else self.x1_nodes


def _frozen(a, shape=None) -> np.ndarray:
    a = np.array(a, dtype=complex)
    if shape is not None and a.shape != shape:
        raise GridMismatchError(f"array shape {a.shape} does not match grid {shape}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SpinorField:
    """A section (u, v) of S+ + S- with a boundary tag fixing the grid layout."""

    u: np.ndarray
    v: np.ndarray
    bc: Boundary = Boundary.MINUS

    def __post_init__(self):
        bc = Boundary.parse(self.bc)
        object.__setattr__(self, "bc", bc)
        u, v = _frozen(self.u), _frozen(self.v)
        if u.ndim != 3 or v.ndim != 3 or u.shape[1:] != v.shape[1:]:
            raise GridMismatchError("u and v must be 3-d arrays on the same torus grid")
        centers, nodes = (u, v) if bc is Boundary.MINUS else (v, u)
        if nodes.shape[0] != centers.shape[0] + 1:
            raise GridMismatchError(
                f"{bc.name}: node component must have one more x1 sample than the center component"
            )
        if np.any(nodes[0] != 0) or np.any(nodes[-1] != 0):
            which = "v" if bc is Boundary.MINUS else "u"
            raise PreconditionError(f"{bc.name} boundary condition needs {which} = 0 on both faces")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @classmethod
    def zeros(cls, d: ThinDomain, bc=Boundary.MINUS) -> "SpinorField":
        lu, lv = d.layout(bc)
        return cls(np.zeros(d.shape(lu)), np.zeros(d.shape(lv)), bc)

    @classmethod
    def from_arrays(cls, d: ThinDomain, u, v, bc=Boundary.MINUS) -> "SpinorField":
        """Like the constructor, but zeroes the node component's end slices first."""
        lu, lv = d.layout(bc)
        u = np.array(np.broadcast_to(u, d.shape(lu)), dtype=complex)
        v = np.array(np.broadcast_to(v, d.shape(lv)), dtype=complex)
        for arr, loc in ((u, lu), (v, lv)):
            if loc == "node":
                arr[0] = 0.0
                arr[-1] = 0.0
        return cls(u, v, bc)

    @classmethod
    def from_functions(cls, d: ThinDomain, fu, fv, bc=Boundary.MINUS) -> "SpinorField":
        """Sample ``fu(x1, x2, x3)`` and ``fv(x1, x2, x3)`` on the layout of ``bc``."""
        lu, lv = d.layout(bc)

        def sample(f, loc):
            x1 = d.x1(loc)[:, None, None]
            return f(x1, d.x2[None, :, None], d.x3[None, None, :])

        return cls.from_arrays(d, sample(fu, lu), sample(fv, lv), bc)

    @classmethod
    def random(cls, d: ThinDomain, rng: np.random.Generator, bc=Boundary.MINUS,
               smooth: bool = True, modes: int = 3) -> "SpinorField":
        """Random probe: a few low Fourier/sine modes when ``smooth``, else white noise."""
        lu, lv = d.layout(bc)
        if not smooth:
            u = rng.standard_normal(d.shape(lu)) + 1j * rng.standard_normal(d.shape(lu))
            v = rng.standard_normal(d.shape(lv)) + 1j * rng.standard_normal(d.shape(lv))
            return cls.from_arrays(d, u, v, bc)

        def part(loc):
            t = d.x1(loc)[:, None, None] / d.epsilon
            out = np.zeros(d.shape(loc), dtype=complex)
            for _ in range(modes):
                m = rng.integers(0, 4)
                a = rng.integers(-2, 3)
                b = rng.integers(-2, 3)
                amp = complex(rng.standard_normal(), rng.standard_normal())
                profile = np.sin(np.pi * (m + 1) * t) if loc == "node" else np.cos(np.pi * m * t)
                phase = np.exp(1j * (a * TWO_PI * d.x2[None, :, None] / d.periods[0]
                                     + b * TWO_PI * d.x3[None, None, :] / d.periods[1]))
                out += amp * profile * phase
            return out

        return cls.from_arrays(d, part(lu), part(lv), bc)

    def check_domain(self, d: ThinDomain):
        lu, lv = d.layout(self.bc)
        if self.u.shape != d.shape(lu) or self.v.shape != d.shape(lv):
            raise GridMismatchError(
                f"field shapes {self.u.shape}/{self.v.shape} do not match the "
                f"{self.bc.name} layout {d.shape(lu)}/{d.shape(lv)}"
            )

    def __add__(self, other: "SpinorField") -> "SpinorField":
        self._same_layout(other)
        return SpinorField(self.u + other.u, self.v + other.v, self.bc)

    def __sub__(self, other: "SpinorField") -> "SpinorField":
        self._same_layout(other)
        return SpinorField(self.u - other.u, self.v - other.v, self.bc)

    def __mul__(self, scalar) -> "SpinorField":
        return SpinorField(scalar * self.u, scalar * self.v, self.bc)

    __rmul__ = __mul__

    def _same_layout(self, other):
        if self.bc is not other.bc or self.u.shape != other.u.shape or self.v.shape != other.v.shape:
            raise GridMismatchError("fields live on different layouts")

    def inner(self, other: "SpinorField", d: ThinDomain) -> complex:
        """Discrete L2 inner product (antilinear in self)."""
        self._same_layout(other)
        return complex(np.vdot(self.u, other.u) + np.vdot(self.v, other.v)) * d.cell_volume

    def l2(self, d: ThinDomain) -> float:
        return float(np.sqrt(self.inner(self, d).real))

    def sup(self) -> float:
        return float(max(np.abs(self.u).max(), np.abs(self.v).max()))

    def to_vector(self) -> np.ndarray:
        """Unknowns only (node end slices dropped), u first."""
        parts = []
        locs = ("center", "node") if self.bc is Boundary.MINUS else ("node", "center")
        for arr, loc in zip((self.u, self.v), locs):
            parts.append((arr[1:-1] if loc == "node" else arr).ravel())
        return np.concatenate(parts)

    @classmethod
    def from_vector(cls, d: ThinDomain, x, bc) -> "SpinorField":
        bc = Boundary.parse(bc)
        lu, lv = d.layout(bc)
        arrays = []
        offset = 0
        for loc in (lu, lv):
            n = d.n1 if loc == "center" else d.n1 - 1
            size = n * d.n2 * d.n3
            block = np.asarray(x[offset: offset + size]).reshape(n, d.n2, d.n3)
            offset += size
            if loc == "node":
                block = np.concatenate([np.zeros((1, d.n2, d.n3)), block, np.zeros((1, d.n2, d.n3))])
            arrays.append(block)
        return cls(arrays[0], arrays[1], bc)
