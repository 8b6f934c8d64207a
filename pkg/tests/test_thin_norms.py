import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from g2kit.errors import PreconditionError
from g2kit.thin import (
    Boundary,
    NormKind,
    SpinorField,
    ThinDomain,
    choose_k,
    extended_domain,
    holder_norm,
    holder_seminorm,
    inverse_norm_study,
    norm_report,
    reflect_extend,
)
from g2kit.thin.reflect import OutsideRegimeWarning
from g2kit.thin.study import fit_slope


def brute_seminorm(a, alpha, dx):
    # every pair on a 1-d line
    x = np.arange(a.size) * dx
    i, j = np.triu_indices(a.size, 1)
    return np.max(np.abs(a[i] - a[j]) / np.abs(x[i] - x[j]) ** alpha)


def test_constant_field():
    assert holder_norm(np.full((5, 6), -2.5), 0.3) == 2.5


def test_linear_unit_interval():
    x = np.linspace(0, 1, 11)
    assert holder_seminorm(x, 0.5, spacing=(0.1,)) == pytest.approx(1.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 40), st.floats(0.05, 0.95), st.integers(0, 2**31))
def test_seminorm_matches_all_pairs_1d(n, alpha, seed):
    a = np.random.default_rng(seed).standard_normal(n)
    assert holder_seminorm(a, alpha, spacing=(0.3,)) == pytest.approx(brute_seminorm(a, alpha, 0.3))


def test_pair_budget_only_lowers(rng):
    a = rng.standard_normal((64, 64))
    full = holder_seminorm(a, 0.4)
    thin = holder_seminorm(a, 0.4, max_pairs=2000)
    assert 0 < thin <= full


def test_periodic_axis_uses_torus_distance():
    a = np.zeros(8)
    a[0], a[7] = 1.0, 0.0
    # neighbors across the seam are at distance 1
    assert holder_seminorm(a, 0.5, periodic=(True,)) == pytest.approx(1.0)


def test_monotone_in_alpha_for_short_separations(rng):
    # separations <= 1 make |df| / d^alpha nondecreasing in alpha
    d = ThinDomain(0.2, 8, 8, 8)
    f = SpinorField.random(d, rng)
    vals = [holder_norm(f, a, d, order=1) for a in np.linspace(0.1, 0.9, 9)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_alpha_range_checked():
    with pytest.raises(PreconditionError, match=r"alpha in \(0,1\)"):
        holder_seminorm(np.zeros(3), 1.2)
    with pytest.raises(PreconditionError):
        holder_norm(np.zeros(3), 0.0)


def test_norm_report(rng):
    d = ThinDomain(0.1, 8, 8, 8)
    f = SpinorField.random(d, rng)
    r = norm_report(d, f, alpha=0.25, p=6)
    assert 0 <= r.c0 <= r.holder
    assert r.l2 == pytest.approx(f.l2(d))
    with pytest.raises(PreconditionError):
        norm_report(d, f, p=3)


# -- reflection -------------------------------------------------------------------


@pytest.mark.parametrize("eps, k", [(0.1, 5), (0.5, 1), (0.37, 2), (1.0, 1), (0.26, 2)])
def test_choose_k(eps, k):
    assert choose_k(eps) == k
    assert 0.5 <= k * eps <= 1.5


def test_choose_k_outside_regime():
    with pytest.warns(OutsideRegimeWarning):
        assert choose_k(2.0) == 1
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        choose_k(1.2)


def test_reflect_rules(rng):
    d = ThinDomain(0.4, 8, 4, 4)
    f = SpinorField.random(d, rng, smooth=False)
    g = reflect_extend(f, 3)
    assert g.u.shape[0] == 24 and g.v.shape[0] == 25
    n = d.n1
    # node x = 1.5 eps is index n + n/2; mirror is 0.5 eps
    assert np.array_equal(g.v[n + n // 2], -f.v[n // 2])
    # center (n + r + 1/2) dx mirrors to (n - r - 1/2) dx
    for r in range(n):
        assert np.array_equal(g.u[n + r], f.u[n - 1 - r])
    # period 2 eps
    assert np.array_equal(g.u[2 * n:], f.u[: n])
    assert np.array_equal(g.v[2 * n:], f.v)
    assert reflect_extend(f, 1) is f
    assert extended_domain(d, 3).epsilon == pytest.approx(1.2)


def test_reflected_field_keeps_boundary_tag(rng):
    d = ThinDomain(0.4, 8, 4, 4)
    g = reflect_extend(SpinorField.random(d, rng, Boundary.PLUS), 2)
    g.check_domain(extended_domain(d, 2))


# -- study ------------------------------------------------------------------------


def test_fit_slope_exact():
    eps = np.array([0.4, 0.2, 0.1])
    assert fit_slope(eps, 3 * eps**0.7)[0] == pytest.approx(0.7)


def test_study_is_deterministic_and_ordered():
    grid = [0.4, 0.1]
    a = inverse_norm_study(grid, 0.5, "L2", probes=6, n1=8, n2=8, n3=8, seed=3)
    b = inverse_norm_study(grid, 0.5, NormKind.L2, probes=6, n1=8, n2=8, n3=8, seed=3)
    assert a.rows == b.rows
    assert list(a.epsilons) == grid


def test_l2_estimate_reaches_inverse_eigenvalue():
    s = inverse_norm_study([0.4, 0.1], 0.5, "L2", probes=4, n1=8, n2=8, n3=8)
    # 1 / sqrt(lambda) = 2 for c = 0.5
    assert np.allclose(s.estimates, 2.0, rtol=1e-6)


def test_study_rejects_bad_parameters():
    with pytest.raises(PreconditionError):
        inverse_norm_study([0.1], 0.5, "C1ALPHA", alpha=1.5)
    with pytest.raises(PreconditionError):
        inverse_norm_study([0.1], 0.5, "C0", p=2.0)
    with pytest.raises(PreconditionError):
        inverse_norm_study([0.1], 0.0, "L2", probes=2, n1=8, n2=8, n3=8)
