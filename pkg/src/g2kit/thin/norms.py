"""Discrete L2, Lp, sup and Hoelder norms of grid fields."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import PreconditionError
from .domain import SpinorField, ThinDomain

__all__ = ["holder_seminorm", "holder_norm", "NormReport", "norm_report", "MAX_PAIRS"]

MAX_PAIRS = 1_000_000


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise PreconditionError(f"alpha must satisfy alpha in (0,1), got {alpha}")


def _offsets(n, periodic, per_offset, budget):
    top = n // 2 if periodic else n - 1
    offs = np.arange(1, top + 1)
    keep = max(1, int(budget // max(per_offset, 1)))
    if keep < offs.size:
        # geometric thinning keeps the shortest and longest separations
        offs = np.unique(np.round(np.geomspace(1, top, keep)).astype(int))
    return offs


def holder_seminorm(a, alpha: float, spacing=None, periodic=None, max_pairs: int = MAX_PAIRS) -> float:
    """max |a(x) - a(y)| / |x - y|^alpha over axis-aligned grid pairs.

    Periodic axes use torus distance.  When the pair count exceeds
    ``max_pairs`` the separations (and if needed the lines) are thinned
    deterministically, which can only lower the estimate.
    """
    _check_alpha(alpha)
    a = np.asarray(a)
    if a.size < 2:
        return 0.0
    nd = a.ndim
    spacing = (1.0,) * nd if spacing is None else tuple(spacing)
    periodic = (False,) * nd if periodic is None else tuple(periodic)
    budget = max_pairs / nd
    best = 0.0
    for ax in range(nd):
        n = a.shape[ax]
        if n < 2:
            continue
        lines = np.moveaxis(a, ax, 0).reshape(n, -1)
        offs = _offsets(n, periodic[ax], lines.shape[1] * n, budget)
        pairs = sum(lines.shape[1] * (n if periodic[ax] else n - o) for o in offs)
        if pairs > budget:
            stride = int(np.ceil(pairs / budget))
            lines = lines[:, ::stride]
        for o in offs:
            if periodic[ax]:
                diff = np.abs(np.roll(lines, -o, axis=0) - lines)
            else:
                diff = np.abs(lines[o:] - lines[:-o])
            best = max(best, float(diff.max()) / (o * spacing[ax]) ** alpha)
    return best


def _first_differences(a, spacing, periodic):
    out = []
    for ax in range(a.ndim):
        if a.shape[ax] < 2:
            continue
        if periodic[ax]:
            out.append((np.roll(a, -1, axis=ax) - a) / spacing[ax])
        else:
            out.append(np.diff(a, axis=ax) / spacing[ax])
    return out


def _array_holder(a, alpha, spacing, periodic, order, max_pairs):
    a = np.asarray(a)
    nd = a.ndim
    spacing = (1.0,) * nd if spacing is None else tuple(spacing)
    periodic = (False,) * nd if periodic is None else tuple(periodic)
    total = float(np.abs(a).max()) if a.size else 0.0
    if order == 0:
        return total + holder_seminorm(a, alpha, spacing, periodic, max_pairs)
    for g in _first_differences(a, spacing, periodic):
        total += float(np.abs(g).max()) + holder_seminorm(g, alpha, spacing, periodic, max_pairs)
    return total


def holder_norm(f, alpha: float, d: ThinDomain | None = None, spacing=None, periodic=None,
                order: int = 0, max_pairs: int = MAX_PAIRS) -> float:
    """C^{0,alpha} (order 0) or C^{1,alpha} (order 1) norm of a field.

    For a SpinorField the domain supplies spacings (x1 open, x2/x3 periodic)
    and the result is the larger of the norms of u and v.  The order-1 norm
    is |f|_0 + sum over axes of (|D f|_0 + [D f]_alpha) with D the first
    difference quotient.
    """
    _check_alpha(alpha)
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    if isinstance(f, SpinorField):
        if d is None:
            raise ValueError("a SpinorField needs its domain")
        spacing = (d.dx1, d.dx2, d.dx3)
        periodic = (False, True, True)
        return max(
            _array_holder(f.u, alpha, spacing, periodic, order, max_pairs),
            _array_holder(f.v, alpha, spacing, periodic, order, max_pairs),
        )
    return _array_holder(f, alpha, spacing, periodic, order, max_pairs)


@dataclass(frozen=True)
class NormReport:
    epsilon: float
    l2: float
    lp: float
    p: float
    c0: float
    holder: float
    alpha: float

    def __post_init__(self):
        for name in ("l2", "lp", "c0", "holder"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be nonnegative")


def _lp(f: SpinorField, d: ThinDomain, p: float) -> float:
    s = (np.sum(np.abs(f.u) ** p) + np.sum(np.abs(f.v) ** p)) * d.cell_volume
    return float(s ** (1.0 / p))


def norm_report(d: ThinDomain, f: SpinorField, alpha: float = 0.25, p: float = 6.0) -> NormReport:
    if not p > 3:
        raise PreconditionError(f"p must satisfy p > 3, got {p}")
    return NormReport(
        epsilon=d.epsilon,
        l2=f.l2(d),
        lp=_lp(f, d, p),
        p=p,
        c0=f.sup(),
        holder=holder_norm(f, alpha, d),
        alpha=alpha,
    )

