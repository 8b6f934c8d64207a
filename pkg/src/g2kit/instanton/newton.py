"""Damped Newton iteration for associative graphs with coassociative boundary data.

Boundary family: C_t = {x1 = t, (x4, x5) = gamma(t)}, so a graph bounded by
C_0 and C_eps has (V4, V5) = gamma(0) and gamma(eps) on the faces.  The flat
normal bundle has lambda_dbar = 0: constant (V6, V7) shifts are a kernel and
constant (r4, r5) a cokernel.  Newton steps therefore solve the bordered system

    [ J   P ] [dV]   [-F]
    [ K^T 0 ] [mu] = [ 0]

with P the constant (r4, r5) fields and K the means of (V6, V7).  Torus
Nyquist modes, which the spectral derivative cannot see, are removed from
both unknowns and equations.  GMRES is preconditioned with the exact inverse
of the bordered flat operator, assembled from the thin-slab mode solver.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from ..errors import PreconditionError, SolverError
from ..forms import COASSOCIATIVE_TEST_PLANE, is_coassociative
from ..thin.domain import ThinDomain
from ..thin.operator import solve_dirac
from ..thin.study import fit_slope
from .dictionary import residual_to_spinor, spinor_to_graph
from .graph import GraphSection, ResidualField, linearize, residual

__all__ = [
    "GammaPath",
    "almost_instanton",
    "newton_solve",
    "NewtonResult",
    "quadratic_constant",
    "almost_instanton_error",
    "correspondence_sweep",
    "SweepRow",
    "SweepReport",
    "trace_distances",
]

ARMIJO_C = 1e-4
MIN_STEP = 2.0 ** -10
QUADRATIC_LIMIT = 1e6
ROUNDOFF_FLOOR = 1e-12


@dataclass(frozen=True)
class GammaPath:
    """Boundary path gamma(t) = (amplitude * profile(t), 0) in the (x4, x5) plane."""

    family: str = "zero"
    amplitude: float = 0.0

    FAMILIES = ("zero", "constant", "linear", "quadratic", "sine")

    def __post_init__(self):
        if self.family not in self.FAMILIES:
            raise PreconditionError(f"unknown gamma family {self.family!r}; expected one of {self.FAMILIES}")

    def __call__(self, t, eps: float) -> tuple:
        t = np.asarray(t, dtype=float)
        a = self.amplitude
        profile = {
            "zero": lambda: 0.0 * t,
            "constant": lambda: a + 0.0 * t,
            "linear": lambda: a * t,
            "quadratic": lambda: a * t ** 2,
            "sine": lambda: a * np.sin(np.pi * t / eps),
        }[self.family]()
        return profile, 0.0 * t


def almost_instanton(d: ThinDomain, gamma: GammaPath) -> GraphSection:
    """The product graph V(t, z) = (gamma(t), 0, 0)."""
    g4, g5 = gamma(d.x1_nodes, d.epsilon)
    zc = np.zeros(d.shape("center"))
    shape = d.shape("node")
    return GraphSection(
        d, np.broadcast_to(g4[:, None, None], shape), np.broadcast_to(g5[:, None, None], shape), zc, zc
    )


def _boundary_deviation(g: GraphSection, gamma: GammaPath) -> float:
    d = g.domain
    g0 = np.array(gamma(np.array([0.0, d.epsilon]), d.epsilon))  # (2 comps, 2 faces)
    want = np.transpose(g0)[:, :, None, None]
    return float(np.abs(g.boundary_values() - want).max())


# ---------------------------------------------------------------------------
# bordered linear algebra


def _nyquist_filter(a: np.ndarray) -> np.ndarray:
    n2, n3 = a.shape[1], a.shape[2]
    ah = np.fft.fft2(a, axes=(1, 2))
    ah[:, n2 // 2, :] = 0.0
    ah[:, :, n3 // 2] = 0.0
    return np.real(np.fft.ifft2(ah, axes=(1, 2)))


class _Bordered:
    def __init__(self, base: GraphSection):
        d = base.domain
        self.d = d
        self.zero = GraphSection.zeros(d)
        m = d.n2 * d.n3
        self.ni, self.nc = (d.n1 - 1) * m, d.n1 * m
        self.n = 2 * self.ni + 2 * self.nc

    # x layout: V4 | V5 (interior nodes) | V6 | V7 (centers)
    # y layout: r4 | r5 (centers) | r6 | r7 (interior nodes)
    def x_to_y(self, x):
        ni = self.ni
        return np.concatenate([x[2 * ni:], x[:2 * ni]])

    def y_to_x(self, y):
        nc = self.nc
        return np.concatenate([y[2 * nc:], y[:2 * nc]])

    def filter_x(self, x):
        g = self.zero.with_unknowns(x)
        parts = [_nyquist_filter(a) for a in g.components]
        return GraphSection(self.d, *parts).unknowns()

    def filter_y(self, y):
        r = ResidualField.from_vector(self.d, y)
        r6 = _nyquist_filter(r.r6)
        r7 = _nyquist_filter(r.r7)
        return ResidualField(self.d, _nyquist_filter(r.r4), _nyquist_filter(r.r5), r6, r7).vector()

    def means_x(self, x):
        ni, nc = self.ni, self.nc
        return np.array([x[2 * ni:2 * ni + nc].mean(), x[2 * ni + nc:].mean()])

    def cokernel(self, mu):
        y = np.zeros(self.n)
        y[: self.nc] = mu[0]
        y[self.nc: 2 * self.nc] = mu[1]
        return y

    def operator(self, lin) -> spla.LinearOperator:
        n = self.n

        def matvec(z):
            x, mu = z[:n], z[n:]
            xf = self.filter_x(x)
            jx = lin(self.zero.with_unknowns(xf)).vector()
            y = self.filter_y(jx) + self.x_to_y(x - xf) + self.cokernel(mu)
            return np.concatenate([y, self.means_x(x)])

        return spla.LinearOperator((n + 2, n + 2), matvec=matvec, dtype=float)

    def preconditioner(self) -> spla.LinearOperator:
        """Exact inverse of the bordered operator at the flat graph."""
        n, nc = self.n, self.nc

        def matvec(z):
            y, rho = z[:n], z[n:]
            mu = np.array([y[:nc].mean(), y[nc:2 * nc].mean()])
            y = y - self.cokernel(mu)
            yf = self.filter_y(y)
            x_nyq = self.y_to_x(y - yf)
            rhs = residual_to_spinor(ResidualField.from_vector(self.d, yf))
            sol = solve_dirac(self.d, rhs, "minus", project=True)
            x = self.filter_x(spinor_to_graph(self.d, sol).unknowns())
            ni = self.ni
            x[2 * ni:2 * ni + nc] += rho[0] - x[2 * ni:2 * ni + nc].mean()
            x[2 * ni + nc:] += rho[1] - x[2 * ni + nc:].mean()
            return np.concatenate([x + x_nyq, mu])

        return spla.LinearOperator((n + 2, n + 2), matvec=matvec, dtype=float)


# ---------------------------------------------------------------------------
# Newton


@dataclass(frozen=True, eq=False)
class NewtonResult:
    graph: GraphSection
    trace: list
    converged: bool = True

    @property
    def iterations(self) -> int:
        return len(self.trace) - 1

    @property
    def final_residual(self) -> float:
        return self.trace[-1]["residual_c0"]


def newton_solve(init: GraphSection, target: ResidualField | None = None, tol: float = 1e-10,
                 max_iter: int = 20, gamma: GammaPath | None = None,
                 reference: GraphSection | None = None, gmres_maxiter: int = 200) -> NewtonResult:
    """Damped Newton for residual(g) = target with (V4, V5) held at their face values.

    The trace holds one dict per iterate (the first is the initial guess) with
    the residual sup norm, step length, GMRES iteration count, the cokernel
    multiplier, the face deviation from ``gamma`` (when given) and the sup
    distance to ``reference`` (when given).
    """
    d = init.domain
    target = ResidualField.zeros(d) if target is None else target
    gamma = GammaPath() if gamma is None and np.all(init.boundary_values() == 0) else gamma
    if gamma is not None and _boundary_deviation(init, gamma) > 1e-14:
        raise PreconditionError("initial graph does not meet the configured boundary path")
    plane_residual = is_coassociative(*np.eye(7)[[i - 1 for i in COASSOCIATIVE_TEST_PLANE]])[1]
    border = _Bordered(init)
    precond = border.preconditioner()

    g = init
    f = residual(g) - target
    res = f.sup()
    trace = []

    def record(step, gm_iters, inc, mu):
        entry = {
            "iteration": len(trace),
            "residual_c0": res,
            "step": step,
            "gmres_iterations": gm_iters,
            "increment_c0": inc,
            "cokernel_mu": mu,
            "boundary_deviation": _boundary_deviation(g, gamma) if gamma is not None else float("nan"),
            "plane_coassociative_residual": plane_residual,
        }
        if reference is not None:
            entry["error_c0"] = (g - reference).sup()
        trace.append(entry)

    record(0.0, 0, 0.0, 0.0)
    for _ in range(max_iter):
        if res <= tol:
            return NewtonResult(g, trace)
        lin = linearize(g)
        # Nyquist content of F is invisible to the step; leave it out of the right-hand side
        rhs = np.concatenate([-border.filter_y(f.vector()), np.zeros(2)])
        count = [0]

        def cb(_):
            count[0] += 1

        forcing = min(1e-2, res)
        sol, info = spla.gmres(border.operator(lin), rhs, M=precond, rtol=forcing, atol=0.0,
                               restart=50, maxiter=gmres_maxiter, callback=cb, callback_type="pr_norm")
        if info != 0:
            raise SolverError(f"GMRES failed (info={info}) on the Newton system",
                              residual=res, trace=trace)
        dx, mu = sol[: border.n], sol[border.n:]
        x0 = g.unknowns()
        step = 1.0
        while True:
            trial = g.with_unknowns(x0 + step * dx)
            f_trial = residual(trial) - target
            r_trial = f_trial.sup()
            if r_trial <= (1.0 - ARMIJO_C * step) * res or step <= MIN_STEP:
                break
            step *= 0.5
        g, f, res = trial, f_trial, r_trial
        record(step, count[0], float(np.abs(step * dx).max()), float(np.abs(mu).max()))
    if res <= tol:
        return NewtonResult(g, trace)
    raise SolverError(f"Newton did not reach tol={tol:g} in {max_iter} iterations", residual=res, trace=trace)


# ---------------------------------------------------------------------------
# studies


def quadratic_constant(g0: GraphSection, probes: int = 20, alpha: float = 0.25,
                       rng: np.random.Generator | None = None) -> float:
    """max over random increments V of |F'(g0)V - F'(0)V|_{C^a} / (|g0|_{C^{1,a}} |V|_{C^{1,a}})."""
    from ..thin.domain import SpinorField

    d = g0.domain
    g0_norm = g0.holder(alpha, order=1)
    if g0_norm == 0.0:
        return 0.0
    rng = np.random.default_rng(0) if rng is None else rng
    lin, lin0 = linearize(g0), linearize(GraphSection.zeros(d))
    best = 0.0
    for _ in range(probes):
        v = spinor_to_graph(d, SpinorField.random(d, rng, "minus", smooth=True))
        diff = lin(v) - lin0(v)
        best = max(best, diff.holder(alpha, order=0) / (g0_norm * v.holder(alpha, order=1)))
    return float(best)


def almost_instanton_error(gamma: GammaPath, eps: float, alpha: float = 0.25,
                           n1: int = 16, n2: int = 8, n3: int = 8) -> float:
    """C^alpha norm of the residual of the product graph over gamma."""
    d = ThinDomain(eps, n1, n2, n3)
    return residual(almost_instanton(d, gamma)).holder(alpha, order=0)


def trace_distances(g: GraphSection, gamma: GammaPath) -> tuple[float, float]:
    """C^0 and C^1 distances between the x1 = 0 face trace and the flat curve (gamma(0), 0, 0)."""
    d = g.domain
    g4, g5 = gamma(np.array([0.0]), d.epsilon)
    # V6, V7 are stored at centers; extrapolate to the face at second order
    tr = np.array([
        g.v4[0] - g4[0],
        g.v5[0] - g5[0],
        1.5 * g.v6[0] - 0.5 * g.v6[1],
        1.5 * g.v7[0] - 0.5 * g.v7[1],
    ])
    c0 = float(np.abs(tr).max())
    grads = []
    for a in tr:
        ah = np.fft.fft2(a)
        for k in (d.xi2[:, None], d.xi3[None, :]):
            grads.append(np.real(np.fft.ifft2(1j * k * ah)))
    return c0, c0 + float(np.abs(np.array(grads)).max())


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    status: str
    newton_iters: int
    final_residual: float
    trace_distance_c0: float
    trace_distance_c1: float
    boundary_deviation: float
    plane_coassociative_residual: float
    quadratic_degraded: bool


@dataclass(frozen=True)
class SweepReport:
    rows: tuple
    fitted_order: float
    discretization_error: float
    notes: tuple = field(default_factory=tuple)
    traces: tuple = field(default=(), repr=False, compare=False)

    @property
    def ok(self) -> bool:
        return all(r.status == "ok" for r in self.rows)


def _quadratic_degraded(trace) -> bool:
    r = [t["residual_c0"] for t in trace]
    ratios = [r[k + 1] / r[k] ** 2 for k in range(len(r) - 1) if r[k] > 1e-13 and r[k + 1] > 0]
    return any(q > QUADRATIC_LIMIT for q in ratios[-3:])


def _sweep_cell(eps, gamma, n1, n2, n3, tol, max_iter):
    d = ThinDomain(eps, n1, n2, n3)
    init = almost_instanton(d, gamma)
    try:
        result = newton_solve(init, tol=tol, max_iter=max_iter, gamma=gamma)
    except SolverError as exc:
        trace = list(exc.trace or [])
        return None, SweepRow(eps, f"failed: {exc}", max(len(trace) - 1, 0), exc.residual,
                              float("nan"), float("nan"), float("nan"), float("nan"), True), trace
    c0, c1 = trace_distances(result.graph, gamma)
    last = result.trace[-1]
    return result, SweepRow(eps, "ok", result.iterations, result.final_residual, c0, c1,
                            last["boundary_deviation"], last["plane_coassociative_residual"],
                            _quadratic_degraded(result.trace)), result.trace


def correspondence_sweep(eps_grid, gamma: GammaPath, n1: int = 16, n2: int = 32, n3: int = 32,
                         tol: float = 1e-10, max_iter: int = 20, executor=None) -> SweepReport:
    """Solve from the almost instanton for each eps and compare face traces with the flat curve.

    ``discretization_error`` is the change in the C^1 trace distance at the
    smallest eps when n1 is doubled.
    """
    def cell(eps):
        result, row, trace = _sweep_cell(eps, gamma, n1, n2, n3, tol, max_iter)
        return row, trace

    eps_grid = list(eps_grid)
    out = list(executor.map(cell, eps_grid) if executor is not None else map(cell, eps_grid))
    rows = tuple(r for r, _ in out)
    traces = tuple(t for _, t in out)
    dists = np.array([r.trace_distance_c1 for r in rows])
    order = float("nan")
    if np.all(np.isfinite(dists)) and np.all(dists > 0) and len(rows) > 1:
        order = fit_slope([r.epsilon for r in rows], dists)[0]
    finest = min(eps_grid)
    fine = _sweep_cell(finest, gamma, 2 * n1, n2, n3, tol, max_iter)[1]
    coarse = rows[eps_grid.index(finest)]
    disc = abs(fine.trace_distance_c1 - coarse.trace_distance_c1)
    notes = []
    if not np.isfinite(order):
        notes.append("fitted order undefined: some trace distances are zero or failed")
    elif dists.max() < ROUNDOFF_FLOOR:
        notes.append(f"trace distances are at round-off level (max {dists.max():.1e}); "
                     "the fitted order carries no information")
    return SweepReport(rows, order, float(disc), tuple(notes), traces)
