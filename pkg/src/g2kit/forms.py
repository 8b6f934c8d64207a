"""Alternating forms on R^7, the G2 3-form, the associator tau and calibration tests."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

import numpy as np

from .errors import DegenerateInputError, PreconditionError
from .octonion import cross

__all__ = [
    "AlternatingForm",
    "TauTensor",
    "perm_sign",
    "omega0",
    "star_omega0",
    "hodge_star",
    "contract",
    "restrict",
    "tau",
    "tau_from_table",
    "tau_tensor",
    "TAU_TABLE",
    "orthonormalize",
    "is_associative",
    "is_coassociative",
    "jn_action",
    "COASSOCIATIVE_TEST_PLANE",
    "SELF_DUAL_SIGN",
]

DIM = 7
RANK_TOL = 1e-8
CALIBRATION_TOL = 1e-10


def perm_sign(seq) -> int:
    """Sign of the permutation that sorts ``seq`` (entries must be distinct)."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] == seq[j]:
                return 0
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class AlternatingForm:
    """A k-form stored by its coefficients on strictly increasing 1-based index tuples.

    ``dim`` is the dimension of the underlying vector space (7 unless the form
    has been restricted to a subspace).
    """

    degree: int
    coeffs: Mapping[tuple, float] = field(default_factory=dict)
    dim: int = DIM

    def __post_init__(self):
        if not 0 <= self.degree <= self.dim:
            raise ValueError(f"degree must lie in 0..{self.dim}")
        clean = {}
        for idx, c in self.coeffs.items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != self.degree:
                raise ValueError(f"index {idx} does not have length {self.degree}")
            if any(not 1 <= i <= self.dim for i in idx):
                raise ValueError(f"index {idx} out of range 1..{self.dim}")
            s = perm_sign(idx)
            if s == 0:
                continue
            key = tuple(sorted(idx))
            clean[key] = clean.get(key, 0.0) + s * float(c)
        clean = {k: v for k, v in clean.items() if v != 0.0}
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    @classmethod
    def from_terms(cls, terms, dim: int = DIM) -> "AlternatingForm":
        """Build from ``[(coefficient, (i, j, k, ...)), ...]`` with arbitrary index order."""
        terms = list(terms)
        degree = len(terms[0][1]) if terms else 0
        acc: dict = {}
        for c, idx in terms:
            s = perm_sign(idx)
            key = tuple(sorted(idx))
            acc[key] = acc.get(key, 0.0) + s * c
        return cls(degree, acc, dim)

    def __add__(self, other: "AlternatingForm") -> "AlternatingForm":
        if (self.degree, self.dim) != (other.degree, other.dim):
            raise ValueError("cannot add forms of different degree or dimension")
        acc = dict(self.coeffs)
        for k, v in other.coeffs.items():
            acc[k] = acc.get(k, 0.0) + v
        return AlternatingForm(self.degree, acc, self.dim)

    def __neg__(self) -> "AlternatingForm":
        return AlternatingForm(self.degree, {k: -v for k, v in self.coeffs.items()}, self.dim)

    def __sub__(self, other: "AlternatingForm") -> "AlternatingForm":
        return self + (-other)

    def __rmul__(self, scalar: float) -> "AlternatingForm":
        return AlternatingForm(self.degree, {k: scalar * v for k, v in self.coeffs.items()}, self.dim)

    def coefficient(self, idx) -> float:
        s = perm_sign(idx)
        if s == 0:
            return 0.0
        return s * self.coeffs.get(tuple(sorted(idx)), 0.0)

    def allclose(self, other: "AlternatingForm", atol: float = 0.0) -> bool:
        keys = set(self.coeffs) | set(other.coeffs)
        return all(abs(self.coeffs.get(k, 0.0) - other.coeffs.get(k, 0.0)) <= atol for k in keys)

    @cached_property
    def tensor(self) -> np.ndarray:
        """Dense fully antisymmetric array of shape ``(dim,) * degree``."""
        t = np.zeros((self.dim,) * self.degree)
        for idx, c in self.coeffs.items():
            zero_based = [i - 1 for i in idx]
            for perm in itertools.permutations(range(self.degree)):
                t[tuple(zero_based[p] for p in perm)] = perm_sign(perm) * c
        return t

    def __call__(self, *vectors) -> np.ndarray | float:
        """Evaluate on ``degree`` vectors (each of shape (..., dim))."""
        if len(vectors) != self.degree:
            raise ValueError(f"expected {self.degree} vectors, got {len(vectors)}")
        if self.degree == 0:
            return self.coeffs.get((), 0.0)
        vs = [np.asarray(v, dtype=float) for v in vectors]
        letters = "abcdefg"[: self.degree]
        spec = letters + "," + ",".join("..." + ch for ch in letters) + "->..."
        out = np.einsum(spec, self.tensor, *vs)
        return float(out) if np.ndim(out) == 0 else out


def omega0() -> AlternatingForm:
    """The standard G2 3-form on Im O = R^7."""
    return AlternatingForm.from_terms(
        [
            (1.0, (1, 2, 3)),
            (-1.0, (1, 6, 7)),
            (-1.0, (5, 2, 7)),
            (-1.0, (5, 6, 3)),
            (-1.0, (1, 5, 4)),
            (-1.0, (2, 6, 4)),
            (-1.0, (3, 7, 4)),
        ]
    )


def hodge_star(f: AlternatingForm) -> AlternatingForm:
    """Euclidean Hodge star with the orientation e_1 ^ ... ^ e_dim positive."""
    n = f.dim
    out = {}
    for idx, c in f.coeffs.items():
        comp = tuple(i for i in range(1, n + 1) if i not in idx)
        out[comp] = perm_sign(idx + comp) * c
    return AlternatingForm(n - f.degree, out, n)


def star_omega0() -> AlternatingForm:
    return hodge_star(omega0())


def contract(f: AlternatingForm, n) -> AlternatingForm:
    """Interior product: ``(i_n f)(v_1, ...) = f(n, v_1, ...)``."""
    if f.degree < 1:
        raise ValueError("cannot contract a 0-form")
    n = np.asarray(n, dtype=float)
    if n.shape != (f.dim,):
        raise ValueError(f"contraction vector must have shape ({f.dim},)")
    out: dict = {}
    for idx, c in f.coeffs.items():
        for pos, i in enumerate(idx):
            w = n[i - 1]
            if w == 0.0:
                continue
            rest = idx[:pos] + idx[pos + 1 :]
            out[rest] = out.get(rest, 0.0) + (-1) ** pos * w * c
    return AlternatingForm(f.degree - 1, out, f.dim)


def restrict(f: AlternatingForm, frame) -> AlternatingForm:
    """Pull ``f`` back to the subspace spanned by ``frame`` in that basis."""
    frame = [np.asarray(v, dtype=float) for v in frame]
    m = len(frame)
    out = {}
    for idx in itertools.combinations(range(1, m + 1), f.degree):
        val = f(*[frame[i - 1] for i in idx])
        if val != 0.0:
            out[idx] = float(val)
    return AlternatingForm(f.degree, out, m)


# The associator: g(tau(u, v, w), z) = (*Omega_0)(z, u, v, w).  With the vector
# slot first, tau(e2, e5, e6) = e1 and the linearization at Im H reproduces the
# flat twisted Dirac operator.  Written out in components:
TAU_TABLE = {
    1: [(+1, (2, 5, 6)), (-1, (2, 4, 7)), (+1, (3, 4, 6)), (+1, (3, 5, 7))],
    2: [(-1, (1, 5, 6)), (+1, (1, 4, 7)), (-1, (3, 4, 5)), (+1, (3, 6, 7))],
    3: [(+1, (2, 4, 5)), (-1, (2, 6, 7)), (-1, (1, 4, 6)), (-1, (1, 5, 7))],
    4: [(+1, (5, 6, 7)), (-1, (1, 2, 7)), (+1, (1, 3, 6)), (-1, (2, 3, 5))],
    5: [(+1, (1, 2, 6)), (-1, (4, 6, 7)), (+1, (1, 3, 7)), (+1, (2, 3, 4))],
    6: [(+1, (4, 5, 7)), (-1, (1, 2, 5)), (-1, (1, 3, 4)), (+1, (2, 3, 7))],
    7: [(+1, (1, 2, 4)), (-1, (4, 5, 6)), (-1, (1, 3, 5)), (-1, (2, 3, 6))],
}


@dataclass(frozen=True)
class TauTensor:
    """tau written as seven scalar 3-forms, one per output direction."""

    components: tuple

    def __post_init__(self):
        if len(self.components) != DIM or any(c.degree != 3 for c in self.components):
            raise ValueError("TauTensor needs seven 3-forms")

    @classmethod
    def from_table(cls) -> "TauTensor":
        return cls(tuple(AlternatingForm.from_terms(TAU_TABLE[k]) for k in range(1, 8)))

    @classmethod
    def from_star_omega(cls) -> "TauTensor":
        so = star_omega0()
        return cls(tuple(contract(so, np.eye(DIM)[k]) for k in range(DIM)))

    @cached_property
    def tensor(self) -> np.ndarray:
        """Array ``T[a, b, c, k]`` with tau(u, v, w)_k = T[a,b,c,k] u_a v_b w_c."""
        return np.stack([c.tensor for c in self.components], axis=-1)

    def __call__(self, u, v, w) -> np.ndarray:
        return np.einsum("abck,...a,...b,...c->...k", self.tensor, u, v, w, optimize=True)


_TAU_CONTRACTION = TauTensor.from_star_omega()
_TAU_TABLE = TauTensor.from_table()


def tau_tensor() -> np.ndarray:
    """Dense (7, 7, 7, 7) array of tau, built from the contraction of *Omega_0."""
    return _TAU_CONTRACTION.tensor


def tau(u, v, w) -> np.ndarray:
    """tau(u, v, w) via contraction of *Omega_0 (vectorized over leading axes)."""
    return _TAU_CONTRACTION(u, v, w)


def tau_from_table(u, v, w) -> np.ndarray:
    """tau(u, v, w) via the explicit 28-term component expansion."""
    return _TAU_TABLE(u, v, w)


def orthonormalize(vectors, tol: float = RANK_TOL) -> np.ndarray:
    """Modified Gram-Schmidt; raises DegenerateInputError on (relative) rank loss."""
    vs = [np.array(v, dtype=float) for v in vectors]
    out = []
    for v in vs:
        scale = np.linalg.norm(v)
        if scale == 0.0:
            raise DegenerateInputError("zero vector in spanning set")
        w = v.copy()
        for q in out:
            w -= (q @ w) * q
        nw = np.linalg.norm(w)
        if nw <= tol * scale:
            raise DegenerateInputError(
                f"vectors are linearly dependent (residual {nw / scale:.3e} <= {tol:g})"
            )
        out.append(w / nw)
    return np.array(out)


def is_associative(p1, p2, p3) -> tuple[bool, float]:
    """Associativity test for span{p1, p2, p3}: returns (flag, |tau(q1, q2, q3)|)."""
    q = orthonormalize([p1, p2, p3])
    residual = float(np.linalg.norm(tau(q[0], q[1], q[2])))
    return residual <= CALIBRATION_TOL, residual


def is_coassociative(p1, p2, p3, p4) -> tuple[bool, float]:
    """Coassociativity test for a 4-plane: the largest |Omega_0| on orthonormal triples."""
    q = orthonormalize([p1, p2, p3, p4])
    om = omega0()
    residual = max(
        abs(float(om(q[i], q[j], q[k]))) for i, j, k in itertools.combinations(range(4), 3)
    )
    return residual <= CALIBRATION_TOL, residual


def jn_action(n, w) -> np.ndarray:
    """J_n w = (n/|n|) x w."""
    n = np.asarray(n, dtype=float)
    nn = np.linalg.norm(n)
    if nn == 0.0:
        raise PreconditionError("J_n needs a nonzero normal vector n")
    return cross(n, w) / nn


# Oriented coassociative plane used for the self-duality check of i_n Omega_0
# with n = e1.  In this orientation (the one calibrated by *Omega_0) the
# restricted 2-form satisfies *_C omega = SELF_DUAL_SIGN * omega.
COASSOCIATIVE_TEST_PLANE = (2, 3, 6, 7)
SELF_DUAL_SIGN = -1
