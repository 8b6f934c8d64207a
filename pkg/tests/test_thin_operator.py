import numpy as np
import pytest

from g2kit.errors import GridMismatchError, PreconditionError, SingularOperatorError
from g2kit.thin import (
    Boundary,
    SpinorField,
    ThinDomain,
    apply_dirac,
    dirac_matrix,
    first_eigenvalue,
    lambda_dbar,
    smallest_singular_value,
    solve_dirac,
)

MINUS, PLUS = Boundary.MINUS, Boundary.PLUS


def warped(eps, n1, n2, n3, twist, kind="x2"):
    if kind == "x2":
        return ThinDomain.with_warp(eps, n1, n2, n3, lambda x2, x3: 1 + 0.3 * np.sin(x2) + 0 * x3, twist=twist)
    return ThinDomain.with_warp(eps, n1, n2, n3, lambda x2, x3: 1 + 0.3 * np.sin(x2) * np.cos(x3), twist=twist)


def rel_l2(d, a, b):
    return (a - b).l2(d) / b.l2(d)


# -- domain and field invariants ----------------------------------------------


@pytest.mark.parametrize("kw", [dict(n1=3), dict(n2=5), dict(n3=2), dict(epsilon=0.0)])
def test_domain_validation(kw):
    base = dict(epsilon=0.1, n1=8, n2=8, n3=8)
    base.update(kw)
    with pytest.raises(PreconditionError):
        ThinDomain(**base)


def test_warp_must_be_positive():
    with pytest.raises(PreconditionError):
        ThinDomain.with_warp(0.1, 8, 8, 8, lambda x2, x3: np.sin(x2) + 0 * x3)


def test_boundary_tag_enforced():
    d = ThinDomain(0.1, 8, 8, 8)
    u = np.zeros(d.shape("center"))
    v = np.ones(d.shape("node"))
    with pytest.raises(PreconditionError):
        SpinorField(u, v, MINUS)
    f = SpinorField.from_arrays(d, u, v, MINUS)
    assert np.all(f.v[0] == 0) and np.all(f.v[-1] == 0)
    p = SpinorField.zeros(d, PLUS)
    assert p.u.shape == d.shape("node") and p.v.shape == d.shape("center")


def test_grid_mismatch_rejected(rng):
    d, d2 = ThinDomain(0.1, 8, 8, 8), ThinDomain(0.1, 10, 8, 8)
    with pytest.raises(GridMismatchError):
        apply_dirac(d2, SpinorField.random(d, rng))


# -- apply_dirac examples ------------------------------------------------------


def test_constants_in_kernel():
    d = ThinDomain(0.3, 8, 8, 8)
    f = SpinorField.from_functions(d, lambda x1, x2, x3: 1 + 0 * x1 * x2 * x3, lambda *x: 0 * x[0])
    out = apply_dirac(d, f)
    assert out.sup() <= 1e-14


def test_plane_wave():
    d = ThinDomain(0.3, 8, 16, 16)
    f = SpinorField.from_functions(d, lambda x1, x2, x3: np.exp(1j * x2) + 0 * x1 * x3, lambda *x: 0 * x[0])
    out = apply_dirac(d, f)
    want = 1j * np.exp(1j * d.x2)[None, :, None]
    assert np.abs(out.u).max() <= 1e-13
    assert np.abs(out.v - want).max() <= 1e-13


def test_linear_in_x1():
    d = ThinDomain(0.3, 8, 8, 8)
    f = SpinorField.from_functions(d, lambda x1, x2, x3: x1 + 0 * x2 * x3, lambda *x: 0 * x[0])
    out = apply_dirac(d, f)
    # w1 lives on nodes; interior nodes carry the derivative
    assert np.abs(out.u[1:-1] - 1j).max() <= 1e-12
    assert np.abs(out.v).max() <= 1e-12


def test_maps_minus_to_plus(rng):
    d = ThinDomain(0.2, 8, 8, 8, twist=0.5)
    assert apply_dirac(d, SpinorField.random(d, rng, MINUS)).bc is PLUS
    assert apply_dirac(d, SpinorField.random(d, rng, PLUS)).bc is MINUS


@pytest.mark.parametrize("kind", ["flat", "x2", "general"])
def test_discrete_adjointness(rng, kind):
    d = ThinDomain(0.2, 8, 8, 8, twist=0.5 + 0.2j) if kind == "flat" else warped(0.2, 8, 8, 8, 0.5, kind)
    v = SpinorField.random(d, rng, MINUS, smooth=False)
    w = SpinorField.random(d, rng, PLUS, smooth=False)
    lhs = apply_dirac(d, v).inner(w, d)
    rhs = v.inner(apply_dirac(d, w), d)
    assert abs(lhs - rhs) <= 1e-12 * v.l2(d) * w.l2(d) * max(1, d.n1 / d.epsilon)


def test_matrix_agrees_with_apply(rng):
    d = warped(0.2, 6, 8, 8, 0.3 + 0.1j, "general")
    for bc in (MINUS, PLUS):
        f = SpinorField.random(d, rng, bc, smooth=False)
        got = dirac_matrix(d, bc) @ f.to_vector()
        assert np.abs(got - apply_dirac(d, f).to_vector()).max() <= 1e-11


# -- spectrum --------------------------------------------------------------------


@pytest.mark.parametrize("c, lam", [(0.0, 0.0), (0.5, 0.25), (0.5 + 0.5j, 0.5), (0.2 - 1.3j, 0.2**2 + 0.3**2)])
def test_lambda_dbar_lattice_oracle(c, lam):
    d = ThinDomain(0.1, 8, 16, 16, twist=c)
    # |c + i k2 - k3|^2 minimized over integer lattice points
    k = np.arange(-4, 5)
    oracle = np.min(np.abs(c + 1j * k[:, None] - k[None, :]) ** 2)
    assert lambda_dbar(d) == pytest.approx((lam, lam), abs=1e-15)
    assert lambda_dbar(d)[0] == pytest.approx(oracle, abs=1e-15)


@pytest.mark.parametrize("eps", [4.0, 0.1])
@pytest.mark.parametrize("bc", [MINUS, PLUS])
def test_first_eigenvalue_oracle(eps, bc):
    d = ThinDomain(eps, 32, 16, 16, twist=0.5)
    lam = first_eigenvalue(d, bc)
    assert lam == pytest.approx(0.25, abs=1e-6)
    assert lam >= min(0.25, 2 / eps**2) - 1e-12


def test_first_eigenvalue_untwisted_kernel():
    d = ThinDomain(0.2, 8, 8, 8)
    assert first_eigenvalue(d, MINUS) <= 1e-10


def test_first_eigenvalue_against_dense():
    d = warped(0.3, 6, 8, 8, 0.5 + 0.5j, "general")
    m = dirac_matrix(d, MINUS).toarray()
    dense = np.linalg.svd(m, compute_uv=False).min() ** 2
    assert first_eigenvalue(d, MINUS) == pytest.approx(dense, rel=1e-9)


@pytest.mark.parametrize("kind", ["x2", "general"])
def test_warped_bound(kind):
    d = warped(0.4, 8, 8, 8, 0.5, kind)
    lam_d, lam_ds = lambda_dbar(d)
    for bc, lam in ((MINUS, lam_d), (PLUS, lam_ds)):
        assert first_eigenvalue(d, bc) >= min(lam, 2 / 0.4**2) - 1e-4 * max(1, 1 / 0.4**2)


def test_cokernel_duality():
    assert smallest_singular_value(ThinDomain(0.05, 8, 8, 8, twist=0.5), MINUS) > 0.1
    assert smallest_singular_value(ThinDomain(0.05, 8, 8, 8), MINUS) <= 1e-6


# -- solver -----------------------------------------------------------------------


def test_zero_rhs(rng):
    d = ThinDomain(0.1, 8, 8, 8, twist=0.5)
    out = solve_dirac(d, SpinorField.zeros(d, PLUS), MINUS)
    assert out.sup() == 0.0


@pytest.mark.parametrize("kind", ["flat", "x2", "general"])
@pytest.mark.parametrize("bc", [MINUS, PLUS])
def test_manufactured_solution(rng, kind, bc):
    d = ThinDomain(0.1, 16, 16, 16, twist=0.5 + 0.25j) if kind == "flat" else warped(0.1, 8, 8, 8, 0.5, kind)
    v_star = SpinorField.random(d, rng, bc)
    got = solve_dirac(d, apply_dirac(d, v_star), bc)
    assert rel_l2(d, got, v_star) <= 1e-6
    assert (apply_dirac(d, got) - apply_dirac(d, v_star)).l2(d) <= 1e-8 * apply_dirac(d, v_star).l2(d)


def test_solve_needs_matching_tag(rng):
    d = ThinDomain(0.1, 8, 8, 8, twist=0.5)
    with pytest.raises(GridMismatchError):
        solve_dirac(d, SpinorField.zeros(d, MINUS), MINUS)


def test_untwisted_solve_is_singular(rng):
    d = ThinDomain(0.1, 8, 8, 8)
    rhs = SpinorField.random(d, rng, PLUS)
    with pytest.raises(SingularOperatorError):
        solve_dirac(d, rhs, MINUS)
    out = solve_dirac(d, rhs, MINUS, project=True)
    assert np.abs(out.u.mean(axis=(1, 2))).max() <= 1e-12


def test_averaging_identity(rng):
    d = ThinDomain(0.1, 16, 16, 16, twist=0.5)
    w = SpinorField.random(d, rng, PLUS)
    w = SpinorField(w.u, np.zeros_like(w.v), PLUS)
    u = solve_dirac(d, w, MINUS).u
    assert np.abs(u.mean(axis=0)).max() <= 1e-8


def test_reflection_regularity(rng):
    # with w1 = 0, the first x1 difference of u at the faces vanishes like O(dx1)
    slopes = []
    for n1 in (16, 32, 64):
        d = ThinDomain(0.2, n1, 8, 8, twist=0.5)
        w = SpinorField.from_functions(
            d, lambda x1, x2, x3: 0 * x1 * x2 * x3,
            lambda x1, x2, x3: np.cos(x2) * np.exp(1j * x3) + x1 * np.sin(x3), PLUS,
        )
        u = solve_dirac(d, w, MINUS).u
        slopes.append(max(np.abs(u[1] - u[0]).max(), np.abs(u[-1] - u[-2]).max()) / d.dx1)
    ratio = np.log2(slopes[0] / slopes[1]), np.log2(slopes[1] / slopes[2])
    assert min(ratio) >= 0.9
