"""Periodic reflection of slab fields across the boundary faces."""
from __future__ import annotations

import math
import warnings

import numpy as np

from ..errors import PreconditionError
from .domain import Boundary, SpinorField, ThinDomain

__all__ = ["reflect_extend", "extended_domain", "choose_k", "OutsideRegimeWarning"]


class OutsideRegimeWarning(UserWarning):
    pass


def _extend_centers(a, k):
    n = a.shape[0]
    m = np.arange(k * n)
    q, r = divmod(m, n)
    return a[np.where(q % 2 == 0, r, n - 1 - r)]


def _extend_nodes(a, k):
    n = a.shape[0] - 1
    m = np.arange(k * n + 1)
    q, r = divmod(m, n)
    even = (q % 2 == 0)[:, None, None]
    return np.where(even, a[r], -a[n - r])


def reflect_extend(f: SpinorField, k: int) -> SpinorField:
    """Extend from [0, eps] to [0, k eps]: node components odd, center components even.

    For the MINUS tag this is the odd extension of v and the even extension of
    u; the result has period 2 eps in x1.
    """
    if k < 1:
        raise PreconditionError(f"k must be >= 1, got {k}")
    if k == 1:
        return f
    parts = []
    locs = ("center", "node") if f.bc is Boundary.MINUS else ("node", "center")
    for arr, loc in zip((f.u, f.v), locs):
        parts.append(_extend_centers(arr, k) if loc == "center" else _extend_nodes(arr, k))
    return SpinorField(parts[0], parts[1], f.bc)


def extended_domain(d: ThinDomain, k: int) -> ThinDomain:
    return d.replace(epsilon=k * d.epsilon, n1=k * d.n1)


def choose_k(epsilon: float) -> int:
    """Smallest k with k * eps >= 1/2 (so 1/2 <= k eps <= 3/2 whenever eps <= 1)."""
    if not epsilon > 0:
        raise PreconditionError(f"epsilon must be > 0, got {epsilon}")
    if epsilon > 1.5:
        warnings.warn(
            f"epsilon = {epsilon} > 3/2: no k puts k*eps in [1/2, 3/2]; using k = 1",
            OutsideRegimeWarning,
            stacklevel=2,
        )
        return 1
    k = max(1, math.ceil(0.5 / epsilon - 1e-12))
    if epsilon <= 1.0:
        assert 0.5 - 1e-12 <= k * epsilon <= 1.5 + 1e-12
    return k
