"""Probe-based estimates of the norm of D^{-1} across slab thicknesses."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ..errors import PreconditionError
from .domain import Boundary, SpinorField, ThinDomain
from .norms import holder_norm
from .operator import apply_dirac, lambda_dbar, solve_dirac

__all__ = ["NormKind", "StudyRow", "InverseNormStudy", "inverse_norm_cell", "inverse_norm_study", "fit_slope"]


class NormKind(enum.Enum):
    L2 = "L2"
    C0 = "C0"
    C1ALPHA = "C1ALPHA"

    @classmethod
    def parse(cls, value) -> "NormKind":
        return value if isinstance(value, cls) else cls(str(value).upper())


@dataclass(frozen=True)
class StudyRow:
    epsilon: float
    norm_estimate: float
    probes: int
    best_family: str


@dataclass(frozen=True)
class InverseNormStudy:
    norm: NormKind
    alpha: float
    p: float
    rows: tuple
    slope: float
    intercept: float
    notes: tuple = field(default_factory=tuple)

    @property
    def epsilons(self) -> np.ndarray:
        return np.array([r.epsilon for r in self.rows])

    @property
    def estimates(self) -> np.ndarray:
        return np.array([r.norm_estimate for r in self.rows])


def fit_slope(eps, values) -> tuple[float, float]:
    """Least-squares fit of log(values) = slope * log(eps) + intercept."""
    slope, intercept = np.polyfit(np.log(np.asarray(eps, float)), np.log(np.asarray(values, float)), 1)
    return float(slope), float(intercept)


def _zero_mean_w2(w: SpinorField) -> SpinorField:
    # for MINUS solves w2 sits at cell centers; removing its x1 average makes
    # the slab average of the solved u vanish, so u changes sign on every segment
    return SpinorField(w.u, w.v - w.v.mean(axis=0, keepdims=True), w.bc)


def _ratio(d, kind, alpha, v, dv):
    if kind is NormKind.L2:
        return v.l2(d) / dv.l2(d)
    if kind is NormKind.C0:
        return v.sup() / dv.sup()
    return holder_norm(v, alpha, d, order=1) / holder_norm(dv, alpha, d, order=0)


def inverse_norm_cell(d: ThinDomain, norm, alpha: float = 0.25, probes: int = 200,
                      rng: np.random.Generator | None = None, power_iters: int = 30) -> StudyRow:
    """Largest observed ratio |V| / |D V| over a randomized probe set on one domain."""
    kind = NormKind.parse(norm)
    if lambda_dbar(d)[1] <= 0:
        raise PreconditionError("inverse-norm study needs a twist with lambda_dbar* > 0")
    rng = np.random.default_rng(0) if rng is None else rng
    best, family = 0.0, ""

    def consider(name, v, dv=None):
        nonlocal best, family
        dv = apply_dirac(d, v) if dv is None else dv
        r = _ratio(d, kind, alpha, v, dv)
        if r > best:
            best, family = r, name

    for i in range(probes):
        smooth = i % 2 == 0
        tag = "smooth" if smooth else "rough"
        if kind is NormKind.C0:
            w = _zero_mean_w2(SpinorField.random(d, rng, Boundary.PLUS, smooth=smooth))
            consider(f"preimage-{tag}", solve_dirac(d, w, Boundary.MINUS), w)
        elif i % 4 < 2:
            consider(f"direct-{tag}", SpinorField.random(d, rng, Boundary.MINUS, smooth=smooth))
        else:
            w = SpinorField.random(d, rng, Boundary.PLUS, smooth=smooth)
            consider(f"preimage-{tag}", solve_dirac(d, w, Boundary.MINUS), w)

    if kind is NormKind.L2:
        # power iteration on (D* D)^{-1}; D* is the PLUS operator
        x = SpinorField.random(d, rng, Boundary.MINUS, smooth=False)
        for _ in range(power_iters):
            y = solve_dirac(d, solve_dirac(d, x, Boundary.PLUS), Boundary.MINUS)
            x = y * (1.0 / y.l2(d))
        consider("power", x)
    return StudyRow(d.epsilon, float(best), probes + (1 if kind is NormKind.L2 else 0), family)


def inverse_norm_study(eps_grid, twist: complex, norm, alpha: float = 0.25, p: float = 6.0,
                       n1: int = 16, n2: int = 16, n3: int = 16, probes: int = 200, seed: int = 0,
                       warp=None, executor=None) -> InverseNormStudy:
    """Estimate the norm of D^{-1} for each eps and fit a power law in eps.

    Estimates are lower bounds (maxima over probes).  Cells are independent;
    pass an ``executor`` to run them concurrently, results are ordered by eps
    grid position either way.
    """
    kind = NormKind.parse(norm)
    if not 0 < alpha < 1:
        raise PreconditionError(f"alpha must satisfy alpha in (0,1), got {alpha}")
    if not p > 3:
        raise PreconditionError(f"p must satisfy p > 3, got {p}")

    def cell(index_eps):
        index, eps = index_eps
        if warp is None:
            d = ThinDomain(eps, n1, n2, n3, twist=twist)
        else:
            d = ThinDomain.with_warp(eps, n1, n2, n3, warp, twist=twist)
        rng = np.random.default_rng([seed, index])
        return inverse_norm_cell(d, kind, alpha, probes, rng)

    cells = list(enumerate(eps_grid))
    rows = tuple(executor.map(cell, cells) if executor is not None else map(cell, cells))
    slope, intercept = fit_slope([r.epsilon for r in rows], [r.norm_estimate for r in rows])
    return InverseNormStudy(kind, alpha, p, rows, slope, intercept,
                            ("estimates are maxima over random probes (lower bounds)",))
