"""Graphs over Im H in the flat model and the associator residual.

A graph section V = (V4, V5, V6, V7) over the slab [0, eps] x T^2 describes
the 3-fold {x + V(x)} in R^7.  On the staggered x1 grid V4, V5 live at nodes
(their end values are the boundary data) and V6, V7 at cell centers.  The
residual takes tau on the tangent vectors t_i = e_i + sum_k (d_i V^k) e_k,
divides by the tangent 3-volume and keeps the e4..e7 components: r4, r5 at
cell centers and r6, r7 at interior nodes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import GridMismatchError, PreconditionError
from ..forms import tau_tensor
from ..thin.domain import ThinDomain
from ..thin.norms import holder_norm

__all__ = ["GraphSection", "ResidualField", "residual", "linearize", "Linearization", "jets"]

_TAU = tau_tensor()


def _check_flat(d: ThinDomain):
    if d.twist != 0 or d.warp_kind != "constant" or d.h[0, 0] != 1.0:
        raise PreconditionError("graph sections live on the flat, untwisted slab (h = 1, c = 0)")


def _frozen_real(a, shape, name):
    a = np.array(a, dtype=float)
    if a.shape != shape:
        raise GridMismatchError(f"{name} has shape {a.shape}, expected {shape}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GraphSection:
    domain: ThinDomain
    v4: np.ndarray
    v5: np.ndarray
    v6: np.ndarray
    v7: np.ndarray

    def __post_init__(self):
        d = self.domain
        _check_flat(d)
        for name in ("v4", "v5"):
            object.__setattr__(self, name, _frozen_real(getattr(self, name), d.shape("node"), name))
        for name in ("v6", "v7"):
            object.__setattr__(self, name, _frozen_real(getattr(self, name), d.shape("center"), name))

    @classmethod
    def zeros(cls, d: ThinDomain) -> "GraphSection":
        zn, zc = np.zeros(d.shape("node")), np.zeros(d.shape("center"))
        return cls(d, zn, zn, zc, zc)

    @classmethod
    def from_functions(cls, d: ThinDomain, f4, f5, f6, f7) -> "GraphSection":
        """Sample ``f(x1, x2, x3)`` for each component on its native grid."""
        z2, z3 = d.x2[None, :, None], d.x3[None, None, :]
        xn, xc = d.x1_nodes[:, None, None], d.x1_centers[:, None, None]

        def s(f, x1, loc):
            return np.broadcast_to(f(x1, z2, z3), d.shape(loc))

        return cls(d, s(f4, xn, "node"), s(f5, xn, "node"), s(f6, xc, "center"), s(f7, xc, "center"))

    @property
    def components(self) -> tuple:
        return (self.v4, self.v5, self.v6, self.v7)

    def _combine(self, other, op):
        if other.domain is not self.domain and (
            other.v4.shape != self.v4.shape or other.domain.epsilon != self.domain.epsilon
        ):
            raise GridMismatchError("graph sections live on different grids")
        return GraphSection(self.domain, *(op(a, b) for a, b in zip(self.components, other.components)))

    def __add__(self, other: "GraphSection") -> "GraphSection":
        return self._combine(other, np.add)

    def __sub__(self, other: "GraphSection") -> "GraphSection":
        return self._combine(other, np.subtract)

    def __mul__(self, scalar: float) -> "GraphSection":
        return GraphSection(self.domain, *(scalar * a for a in self.components))

    __rmul__ = __mul__

    def boundary_values(self) -> np.ndarray:
        """(V4, V5) on the faces x1 = 0 and x1 = eps, shape (2 faces, 2, n2, n3)."""
        return np.array([[self.v4[0], self.v5[0]], [self.v4[-1], self.v5[-1]]])

    def unknowns(self) -> np.ndarray:
        """Free values: interior-node V4, V5 then V6, V7."""
        return np.concatenate([self.v4[1:-1].ravel(), self.v5[1:-1].ravel(), self.v6.ravel(), self.v7.ravel()])

    def with_unknowns(self, x) -> "GraphSection":
        """Same boundary values, interior values from ``x`` (layout of ``unknowns``)."""
        d = self.domain
        m = d.n2 * d.n3
        ni, nc = (d.n1 - 1) * m, d.n1 * m
        x = np.asarray(x, dtype=float)
        if x.size != 2 * ni + 2 * nc:
            raise GridMismatchError("unknown vector has the wrong length")
        v4, v5 = np.array(self.v4), np.array(self.v5)
        v4[1:-1] = x[:ni].reshape(d.n1 - 1, d.n2, d.n3)
        v5[1:-1] = x[ni:2 * ni].reshape(d.n1 - 1, d.n2, d.n3)
        v6 = x[2 * ni:2 * ni + nc].reshape(d.shape("center"))
        v7 = x[2 * ni + nc:].reshape(d.shape("center"))
        return GraphSection(d, v4, v5, v6, v7)

    def sup(self) -> float:
        return float(max(np.abs(a).max() for a in self.components))

    def c1_norm(self) -> float:
        """max |V| + max over the three directions of |d_i V| (discrete)."""
        j = jets(self)
        return self.sup() + float(max(np.abs(j.centers).max(), np.abs(j.nodes).max()))

    def holder(self, alpha: float, order: int = 1) -> float:
        d = self.domain
        sp = (d.dx1, d.dx2, d.dx3)
        per = (False, True, True)
        return max(holder_norm(a, alpha, spacing=sp, periodic=per, order=order) for a in self.components)


@dataclass(frozen=True, eq=False)
class ResidualField:
    """Normal components of the associator: r4, r5 at centers, r6, r7 at nodes (zero ends)."""

    domain: ThinDomain
    r4: np.ndarray
    r5: np.ndarray
    r6: np.ndarray
    r7: np.ndarray

    def __post_init__(self):
        d = self.domain
        for name in ("r4", "r5"):
            object.__setattr__(self, name, _frozen_real(getattr(self, name), d.shape("center"), name))
        for name in ("r6", "r7"):
            a = _frozen_real(getattr(self, name), d.shape("node"), name)
            if np.any(a[0] != 0) or np.any(a[-1] != 0):
                raise PreconditionError(f"{name} is only defined at interior nodes")
            object.__setattr__(self, name, a)

    @classmethod
    def zeros(cls, d: ThinDomain) -> "ResidualField":
        zn, zc = np.zeros(d.shape("node")), np.zeros(d.shape("center"))
        return cls(d, zc, zc, zn, zn)

    @property
    def components(self) -> tuple:
        return (self.r4, self.r5, self.r6, self.r7)

    def vector(self) -> np.ndarray:
        """Equation values: r4, r5 then interior-node r6, r7."""
        return np.concatenate([self.r4.ravel(), self.r5.ravel(), self.r6[1:-1].ravel(), self.r7[1:-1].ravel()])

    @classmethod
    def from_vector(cls, d: ThinDomain, y) -> "ResidualField":
        m = d.n2 * d.n3
        nc, ni = d.n1 * m, (d.n1 - 1) * m
        y = np.asarray(y, dtype=float)
        r4 = y[:nc].reshape(d.shape("center"))
        r5 = y[nc:2 * nc].reshape(d.shape("center"))
        r6, r7 = np.zeros(d.shape("node")), np.zeros(d.shape("node"))
        r6[1:-1] = y[2 * nc:2 * nc + ni].reshape(d.n1 - 1, d.n2, d.n3)
        r7[1:-1] = y[2 * nc + ni:].reshape(d.n1 - 1, d.n2, d.n3)
        return cls(d, r4, r5, r6, r7)

    def __sub__(self, other: "ResidualField") -> "ResidualField":
        return ResidualField(self.domain, *(a - b for a, b in zip(self.components, other.components)))

    def __add__(self, other: "ResidualField") -> "ResidualField":
        return ResidualField(self.domain, *(a + b for a, b in zip(self.components, other.components)))

    def __mul__(self, scalar: float) -> "ResidualField":
        return ResidualField(self.domain, *(scalar * a for a in self.components))

    __rmul__ = __mul__

    def sup(self) -> float:
        return float(max(np.abs(a).max() for a in self.components))

    def holder(self, alpha: float, order: int = 0) -> float:
        d = self.domain
        sp = (d.dx1, d.dx2, d.dx3)
        per = (False, True, True)
        return max(
            holder_norm(a, alpha, spacing=sp, periodic=per, order=order)
            for a in (self.r4, self.r5, self.r6[1:-1], self.r7[1:-1])
        )


# ---------------------------------------------------------------------------
# derivatives


def _dtorus(a, d: ThinDomain, axis: int) -> np.ndarray:
    k = d.xi2[:, None] if axis == 2 else d.xi3[None, :]
    return np.real(np.fft.ifft2(1j * k * np.fft.fft2(a, axes=(1, 2)), axes=(1, 2)))


@dataclass(frozen=True)
class Jets:
    """First derivatives: ``centers[i, k]`` = d_{i+1} V^{k+4} at cell centers, ``nodes`` likewise
    at interior nodes."""

    centers: np.ndarray
    nodes: np.ndarray


def jets(g: GraphSection) -> Jets:
    """Derivative stencils (linear in g).

    Native pairings are compact: node fields differenced onto centers and vice
    versa, torus derivatives spectral.  Off-grid values use two-point averages
    and centered differences (second-order one-sided at the faces).
    """
    d = g.domain
    dx = d.dx1
    c = np.empty((3, 4) + d.shape("center"))
    n = np.empty((3, 4, d.n1 - 1, d.n2, d.n3))
    for k, a in enumerate((g.v4, g.v5)):
        c[0, k] = np.diff(a, axis=0) / dx
        mid = 0.5 * (a[1:] + a[:-1])
        c[1, k] = _dtorus(mid, d, 2)
        c[2, k] = _dtorus(mid, d, 3)
        n[0, k] = (a[2:] - a[:-2]) / (2 * dx)
        n[1, k] = _dtorus(a[1:-1], d, 2)
        n[2, k] = _dtorus(a[1:-1], d, 3)
    for k, a in enumerate((g.v6, g.v7), start=2):
        c[0, k] = np.gradient(a, dx, axis=0, edge_order=2)
        c[1, k] = _dtorus(a, d, 2)
        c[2, k] = _dtorus(a, d, 3)
        n[0, k] = np.diff(a, axis=0) / dx
        mid = 0.5 * (a[1:] + a[:-1])
        n[1, k] = _dtorus(mid, d, 2)
        n[2, k] = _dtorus(mid, d, 3)
    return Jets(c, n)


# ---------------------------------------------------------------------------
# pointwise normal associator


def _tangents(a):
    """a: (3, 4, ...) -> t: (3, ..., 7)."""
    t = np.zeros((3,) + a.shape[2:] + (7,))
    for i in range(3):
        t[i, ..., i] = 1.0
        t[i, ..., 3:] = np.moveaxis(a[i], 0, -1)
    return t


def _gram(a):
    g = np.einsum("ik...,jk...->...ij", a, a)
    return g + np.eye(3)


def normal_tau(a):
    """tau(t1, t2, t3) / vol restricted to e4..e7, for jets a of shape (3, 4, ...)."""
    t = _tangents(a)
    tau = np.einsum("abck,...a,...b,...c->...k", _TAU, t[0], t[1], t[2], optimize=True)
    vol = np.sqrt(np.linalg.det(_gram(a)))
    return np.moveaxis(tau[..., 3:] / vol[..., None], -1, 0)


def residual(g: GraphSection) -> ResidualField:
    j = jets(g)
    rc = normal_tau(j.centers)
    rn = normal_tau(j.nodes)
    d = g.domain
    r6, r7 = np.zeros(d.shape("node")), np.zeros(d.shape("node"))
    r6[1:-1], r7[1:-1] = rn[2], rn[3]
    return ResidualField(d, rc[0], rc[1], r6, r7)


class _PointLinearization:
    """d(tau/vol) at fixed jets: a pointwise map from jet increments to e4..e7 components."""

    def __init__(self, a):
        t = _tangents(a)
        vol = np.sqrt(np.linalg.det(_gram(a)))
        ginv = np.linalg.inv(_gram(a))
        t1, t2, t3 = t
        # partial contractions of tau with two fixed slots; only e4..e7 inputs/outputs matter
        m = [
            np.einsum("abck,...b,...c->...ak", _TAU, t2, t3, optimize=True),
            np.einsum("abck,...a,...c->...bk", _TAU, t1, t3, optimize=True),
            np.einsum("abck,...a,...b->...ck", _TAU, t1, t2, optimize=True),
        ]
        tau0 = np.einsum("...ak,...a->...k", m[0], t1)[..., 3:]
        # dvol / vol = sum_ij ginv_ij <da_i, a_j>  ->  coefficient on da_i is sum_j ginv_ij a_j
        w = np.einsum("...ij,jk...->...ik", ginv, a)
        lin = np.empty((3,) + vol.shape + (4, 4))
        for i in range(3):
            lin[i] = m[i][..., 3:, 3:] / vol[..., None, None] - (
                w[..., i, :, None] * tau0[..., None, :] / vol[..., None, None]
            )
        # lin[i, ..., p, q]: derivative of output e_{q+4} w.r.t. jet component (i, p)
        self.lin = lin

    def __call__(self, da):
        return np.einsum("i...pq,ip...->q...", self.lin, da, optimize=True)


class Linearization:
    """Exact Frechet derivative of ``residual`` at ``g0`` (tau is trilinear, vol is smooth)."""

    def __init__(self, g0: GraphSection):
        self.g0 = g0
        j = jets(g0)
        self._c = _PointLinearization(j.centers)
        self._n = _PointLinearization(j.nodes)

    @property
    def domain(self) -> ThinDomain:
        return self.g0.domain

    def apply(self, dv: GraphSection) -> ResidualField:
        j = jets(dv)
        rc = self._c(j.centers)
        rn = self._n(j.nodes)
        d = self.domain
        r6, r7 = np.zeros(d.shape("node")), np.zeros(d.shape("node"))
        r6[1:-1], r7[1:-1] = rn[2], rn[3]
        return ResidualField(d, rc[0], rc[1], r6, r7)

    __call__ = apply


def linearize(g0: GraphSection) -> Linearization:
    return Linearization(g0)
