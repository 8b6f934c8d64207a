"""The model Dirac operator on a thin slab: application, spectrum and inversion.

With C = dbar + c (dbar = d/dx2 + i d/dx3) and B = C* its formal adjoint,

    D(u, v) = (i h^{-1/2} u_x1 + B v,  C u - i h^{-1/2} v_x1).

x1 derivatives are staggered differences that move a component between cell
centers and nodes, so D sends a MINUS field to the PLUS layout and back; the
two discrete operators are exact adjoints of each other.  For constant h each
torus Fourier mode s of C gives the block

    [[i h^{-1/2} d1, conj(s)], [s, -i h^{-1/2} d1]],

and D*D splits into Neumann/Dirichlet second differences plus |s|^2.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import GridMismatchError, PreconditionError, SingularOperatorError, SolverError
from .domain import Boundary, SpinorField, ThinDomain

__all__ = [
    "apply_dirac",
    "dbar",
    "dbar_adjoint",
    "lambda_dbar",
    "dirac_matrix",
    "first_eigenvalue",
    "smallest_singular_value",
    "solve_dirac",
    "spectral_diff_matrix",
]

DENSE_LIMIT = 1500
SINGULAR_TOL = 1e-14
EIG_SHIFT = -1e-6


def _fft(a):
    return np.fft.fft2(a, axes=(1, 2))


def _ifft(a):
    return np.fft.ifft2(a, axes=(1, 2))


def dbar(d: ThinDomain, a) -> np.ndarray:
    """(d/dx2 + i d/dx3 + c) applied slice-wise to an (n, n2, n3) array."""
    return _ifft(d.symbol * _fft(a))


def dbar_adjoint(d: ThinDomain, a) -> np.ndarray:
    """(-d/dx2 + i d/dx3 + conj(c)), the L2 adjoint of ``dbar``."""
    return _ifft(np.conj(d.symbol) * _fft(a))


def _d1(a, dx, to: str) -> np.ndarray:
    """Staggered x1 difference onto the other location (node results get zero ends)."""
    diff = (a[1:] - a[:-1]) / dx
    if to == "center":
        return diff
    z = np.zeros((1,) + a.shape[1:], dtype=diff.dtype)
    return np.concatenate([z, diff, z])


def apply_dirac(d: ThinDomain, f: SpinorField) -> SpinorField:
    f.check_domain(d)
    lu, lv = d.layout(f.bc)
    hm = d.h ** -0.5
    w1 = 1j * hm * _d1(f.u, d.dx1, lv) + dbar_adjoint(d, f.v)
    w2 = dbar(d, f.u) - 1j * hm * _d1(f.v, d.dx1, lu)
    if lv == "node":
        w1[0] = 0.0
        w1[-1] = 0.0
    else:
        w2[0] = 0.0
        w2[-1] = 0.0
    return SpinorField(w1, w2, f.bc.other)


def lambda_dbar(d: ThinDomain) -> tuple[float, float]:
    """First eigenvalues of C*C and CC* on the torus grid (equal for constant twist)."""
    lam = float(np.min(np.abs(d.symbol) ** 2))
    return lam, lam


# ---------------------------------------------------------------------------
# sparse assembly


def spectral_diff_matrix(n: int, period: float) -> np.ndarray:
    """Real antisymmetric Fourier differentiation matrix (Nyquist mode dropped)."""
    from .domain import torus_wavenumbers

    k = torus_wavenumbers(n, period)
    return np.real(np.fft.ifft(1j * k[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0))


def _g_matrix(n1: int, dx: float) -> sp.csr_matrix:
    """Centers -> interior nodes difference, shape (n1 - 1, n1)."""
    return sp.diags([-np.ones(n1 - 1), np.ones(n1 - 1)], [0, 1], shape=(n1 - 1, n1)) / dx


def _assemble_block(n1: int, dx: float, hvec, torus, bc: Boundary) -> sp.csc_matrix:
    """D for a given torus operator matrix ``torus`` (the discretized dbar + c)."""
    g = _g_matrix(n1, dx)
    du, dv = (g, -g.T) if bc is Boundary.MINUS else (-g.T, g)
    nu, nv = du.shape[1], dv.shape[1]
    hm = sp.diags(np.asarray(hvec, dtype=float) ** -0.5)
    t = sp.csr_matrix(torus)
    return sp.bmat(
        [
            [1j * sp.kron(du, hm), sp.kron(sp.identity(nv), t.conj().T)],
            [sp.kron(sp.identity(nu), t), -1j * sp.kron(dv, hm)],
        ],
        format="csc",
    )


def dirac_matrix(d: ThinDomain, bc=Boundary.MINUS) -> sp.csc_matrix:
    """Sparse matrix of D acting on ``SpinorField.to_vector`` unknowns."""
    bc = Boundary.parse(bc)
    d2 = spectral_diff_matrix(d.n2, d.periods[0])
    d3 = spectral_diff_matrix(d.n3, d.periods[1])
    torus = (
        np.kron(d2, np.eye(d.n3))
        + 1j * np.kron(np.eye(d.n2), d3)
        + d.twist * np.eye(d.n2 * d.n3)
    )
    return _assemble_block(d.n1, d.dx1, d.h.ravel(), torus, bc)


def _x3_block(d: ThinDomain, xi3: float, bc: Boundary) -> sp.csc_matrix:
    """D restricted to one x3 Fourier mode (valid when h depends on x2 only)."""
    d2 = spectral_diff_matrix(d.n2, d.periods[0])
    torus = d2 + (d.twist - xi3) * np.eye(d.n2)
    return _assemble_block(d.n1, d.dx1, d.h[:, 0], torus, bc)


def _mode_block(d: ThinDomain, s: complex, bc: Boundary) -> sp.csc_matrix:
    """D restricted to a single torus Fourier mode with symbol ``s`` (constant h)."""
    return _assemble_block(d.n1, d.dx1, [d.h[0, 0]], [[s]], bc)


def _smallest_eig(mat: sp.spmatrix, maxiter: int) -> float:
    """Smallest eigenvalue of mat^H mat."""
    n = mat.shape[0]
    if n <= DENSE_LIMIT:
        return float(sla.svdvals(mat.toarray()).min() ** 2)
    a = (mat.conj().T @ mat).tocsc()
    try:
        vals = spla.eigsh(a, k=1, sigma=EIG_SHIFT, which="LM", maxiter=maxiter, tol=1e-12,
                          return_eigenvectors=False)
    except spla.ArpackNoConvergence as exc:
        residual = float("nan")
        if len(exc.eigenvalues):
            x = exc.eigenvectors[:, 0]
            residual = float(np.linalg.norm(a @ x - exc.eigenvalues[0] * x))
        raise SolverError("eigensolver did not converge", residual=residual) from exc
    return float(vals.min())


def first_eigenvalue(d: ThinDomain, bc=Boundary.MINUS, maxiter: int = 2000) -> float:
    """Smallest eigenvalue of D*D on fields with boundary tag ``bc``."""
    bc = Boundary.parse(bc)
    kind = d.warp_kind
    if kind == "constant":
        s2 = np.abs(d.symbol.ravel()) ** 2
        # every block of D*D is (second difference) + |s|^2 >= |s|^2, so only
        # the modes with the smallest |s| can carry the minimum
        order = np.argsort(s2, kind="stable")
        cand = [i for i in order[:8] if s2[i] <= s2[order[0]] + 1e-12 * max(1.0, s2[order[0]])]
        sym = d.symbol.ravel()
        return min(_smallest_eig(_mode_block(d, sym[i], bc), maxiter) for i in cand)
    if kind == "x2":
        # D*D restricted to x3-frequency xi3 equals (Re c - xi3)^2 + (a xi3-free
        # operator), so the minimum sits at the xi3 closest to Re c
        gap = (d.twist.real - d.xi3) ** 2
        cand = np.unique(d.xi3[gap <= gap.min() + 1e-12])
        return min(_smallest_eig(_x3_block(d, xi, bc), maxiter) for xi in cand)
    return _smallest_eig(dirac_matrix(d, bc), maxiter)


def smallest_singular_value(d: ThinDomain, bc=Boundary.MINUS) -> float:
    return float(np.sqrt(max(first_eigenvalue(d, bc), 0.0)))


# ---------------------------------------------------------------------------
# solver


def _thomas(diag, off: float, rhs):
    """Batched solve of symmetric tridiagonal systems along axis 0 (constant off-diagonal)."""
    n = diag.shape[0]
    c = np.empty(diag.shape, dtype=complex)
    y = np.empty(rhs.shape, dtype=complex)
    beta = diag[0].astype(complex)
    y[0] = rhs[0] / beta
    for i in range(1, n):
        c[i - 1] = off / beta
        beta = diag[i] - off * c[i - 1]
        y[i] = (rhs[i] - off * y[i - 1]) / beta
    for i in range(n - 2, -1, -1):
        y[i] -= c[i] * y[i + 1]
    return y


def _second_difference_diag(n1: int, location: str, scale: float, shift):
    """Diagonal of scale * (G^T G) on centers (Neumann) or G G^T on interior nodes (Dirichlet)."""
    if location == "center":
        base = np.full(n1, 2.0)
        base[0] = base[-1] = 1.0
    else:
        base = np.full(n1 - 1, 2.0)
    return scale * base[:, None] + shift[None, :]


def _interior(a, location):
    return a[1:-1] if location == "node" else a


def _pad(a, location):
    if location != "node":
        return a
    z = np.zeros((1,) + a.shape[1:], dtype=a.dtype)
    return np.concatenate([z, a, z])


def _solve_constant(d: ThinDomain, rhs: SpinorField, bc: Boundary, singular) -> SpinorField:
    lu, lv = d.layout(bc)
    hm = float(d.h[0, 0]) ** -0.5
    dx = d.dx1
    w1, w2 = _fft(rhs.u), _fft(rhs.v)
    s = d.symbol
    rhs_u = 1j * hm * _d1(w1, dx, lu) + np.conj(s) * w2
    rhs_v = s * w1 - 1j * hm * _d1(w2, dx, lv)
    m = d.n2 * d.n3
    s2 = (np.abs(s) ** 2).ravel()
    out = []
    for r, loc in ((rhs_u, lu), (rhs_v, lv)):
        r = _interior(r, loc).reshape(r.shape[0] - (2 if loc == "node" else 0), m)
        diag = _second_difference_diag(d.n1, loc, hm * hm / dx ** 2, np.where(singular, 1.0, s2))
        out.append(_thomas(diag, -hm * hm / dx ** 2, r))
    uh, vh = out
    for idx in np.flatnonzero(singular):
        # minimum-norm least squares: drops the constant-u kernel and the
        # constant-w2 cokernel of this mode
        blk = _mode_block(d, s.ravel()[idx], bc).toarray()
        b = np.concatenate([_interior(w1, lv).reshape(-1, m)[:, idx], _interior(w2, lu).reshape(-1, m)[:, idx]])
        x = np.linalg.lstsq(blk, b, rcond=None)[0]
        uh[:, idx] = x[: uh.shape[0]]
        vh[:, idx] = x[uh.shape[0]:]
    shape_u = (uh.shape[0], d.n2, d.n3)
    shape_v = (vh.shape[0], d.n2, d.n3)
    u = _pad(_ifft(uh.reshape(shape_u)), lu)
    v = _pad(_ifft(vh.reshape(shape_v)), lv)
    return SpinorField.from_arrays(d, u, v, bc)


def _solve_x2(d: ThinDomain, rhs: SpinorField, bc: Boundary) -> SpinorField:
    lu, lv = d.layout(bc)
    w1 = np.fft.fft(_interior(rhs.u, lv), axis=2)
    w2 = np.fft.fft(_interior(rhs.v, lu), axis=2)
    nu = d.n1 if lu == "center" else d.n1 - 1
    u = np.empty((nu, d.n2, d.n3), dtype=complex)
    v = np.empty((2 * d.n1 - 1 - nu, d.n2, d.n3), dtype=complex)
    for k, xi in enumerate(d.xi3):
        b = np.concatenate([w1[:, :, k].ravel(), w2[:, :, k].ravel()])
        x = spla.splu(_x3_block(d, xi, bc)).solve(b)
        u[:, :, k] = x[: nu * d.n2].reshape(nu, d.n2)
        v[:, :, k] = x[nu * d.n2:].reshape(-1, d.n2)
    u = _pad(np.fft.ifft(u, axis=2), lu)
    v = _pad(np.fft.ifft(v, axis=2), lv)
    return SpinorField.from_arrays(d, u, v, bc)


def solve_dirac(d: ThinDomain, rhs: SpinorField, bc=Boundary.MINUS, project: bool = False) -> SpinorField:
    """Solve D V = rhs for V with boundary tag ``bc`` (rhs carries the opposite tag).

    With ``project`` the constant kernel/cokernel of untwisted modes is split
    off: the returned u has zero mean in those modes and the matching part of
    w2 is ignored.
    """
    bc = Boundary.parse(bc)
    if rhs.bc is not bc.other:
        raise GridMismatchError(f"a {bc.name} solve needs a right-hand side tagged {bc.other.name}")
    rhs.check_domain(d)
    singular = (np.abs(d.symbol) ** 2 <= SINGULAR_TOL).ravel()
    if singular.any() and not project:
        raise SingularOperatorError(
            "dbar + c has a kernel on this torus (lambda_dbar = 0); pass project=True "
            "to solve on the mean-zero complement"
        )
    kind = d.warp_kind
    if kind == "constant":
        return _solve_constant(d, rhs, bc, singular)
    if singular.any():
        raise PreconditionError("projected solves are only available for constant warp")
    if kind == "x2":
        return _solve_x2(d, rhs, bc)
    x = spla.splu(dirac_matrix(d, bc)).solve(rhs.to_vector())
    return SpinorField.from_vector(d, x, bc)
