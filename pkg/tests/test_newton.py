import numpy as np
import pytest

from g2kit.errors import PreconditionError, SolverError
from g2kit.forms import is_associative
from g2kit.instanton import (
    GammaPath,
    GraphSection,
    almost_instanton,
    almost_instanton_error,
    correspondence_sweep,
    newton_solve,
    quadratic_constant,
    residual,
    spinor_to_graph,
)
from g2kit.instanton.graph import jets
from g2kit.instanton.newton import trace_distances
from g2kit.thin import SpinorField, ThinDomain
from g2kit.thin.study import fit_slope


def manufactured(d, size=0.05):
    eps = d.epsilon

    def s(a):
        return lambda x1, x2, x3: a * np.sin(np.pi * x1 / eps) * np.cos(x2 + 2 * x3)

    def c(a):
        return lambda x1, x2, x3: a * np.cos(np.pi * x1 / eps) * np.sin(x3) + a * np.sin(x2)

    raw = GraphSection.from_functions(d, s(1), s(0.5), c(1), c(-0.7))
    return raw * (size / raw.c1_norm())


def test_trivial_problem_takes_no_iterations():
    d = ThinDomain(0.2, 8, 8, 8)
    out = newton_solve(GraphSection.zeros(d), gamma=GammaPath("zero"))
    assert out.iterations == 0 and out.graph.sup() == 0.0


def test_manufactured_recovery_is_quadratic():
    d = ThinDomain(0.2, 16, 16, 16)
    v_star = manufactured(d)
    out = newton_solve(GraphSection.zeros(d), residual(v_star), tol=1e-13, reference=v_star)
    errs = [t["error_c0"] for t in out.trace]
    assert errs[-1] <= 1e-8
    tail = [e for e in errs if e > 1e-15][-3:]
    ratios = [b / a**2 for a, b in zip(tail, tail[1:])]
    assert max(ratios) <= 1e3
    assert all(t["step"] == 1.0 for t in out.trace[1:])


def test_sine_path_solution_is_associative():
    d = ThinDomain(0.2, 16, 16, 16)
    gamma = GammaPath("sine", 0.01)
    out = newton_solve(almost_instanton(d, gamma), gamma=gamma)
    assert out.final_residual <= 1e-10
    assert all(t["boundary_deviation"] == 0.0 for t in out.trace)
    a = jets(out.graph).centers
    rng = np.random.default_rng(0)
    for idx in zip(*(rng.integers(0, n, 10) for n in a.shape[2:])):
        t = np.hstack([np.eye(3), a[(slice(None), slice(None)) + idx]])
        assert is_associative(*t)[1] <= 1e-8


def test_non_convergence_carries_trace():
    d = ThinDomain(0.2, 16, 8, 8)
    v_star = manufactured(d)
    with pytest.raises(SolverError) as info:
        newton_solve(GraphSection.zeros(d), residual(v_star), tol=1e-14, max_iter=1)
    assert len(info.value.trace) == 2 and info.value.residual > 0


def test_boundary_path_checked():
    d = ThinDomain(0.2, 8, 8, 8)
    with pytest.raises(PreconditionError):
        newton_solve(GraphSection.zeros(d), gamma=GammaPath("constant", 0.1))


def test_quadratic_constant_zero():
    assert quadratic_constant(GraphSection.zeros(ThinDomain(0.1, 8, 8, 8))) == 0.0


def _random_g0(d, amp):
    base = spinor_to_graph(d, SpinorField.random(d, np.random.default_rng(5), "minus"))
    return base * (amp / base.c1_norm())


def test_quadratic_constant_bounded_in_size_and_eps():
    consts = {}
    for eps in (0.1, 0.05):
        d = ThinDomain(eps, 16, 16, 16)
        for amp in (0.01, 0.02):
            consts[eps, amp] = quadratic_constant(_random_g0(d, amp), 10, rng=np.random.default_rng(1))
    for eps in (0.1, 0.05):
        a, b = consts[eps, 0.01], consts[eps, 0.02]
        assert max(a, b) / min(a, b) <= 2.5
    for amp in (0.01, 0.02):
        a, b = consts[0.1, amp], consts[0.05, amp]
        assert max(a, b) / min(a, b) <= 2.5


def test_almost_instanton_examples():
    assert almost_instanton_error(GammaPath("constant", 0.3), 0.2) == 0.0
    r = residual(almost_instanton(ThinDomain(0.2, 16, 8, 8), GammaPath("linear", 0.1)))
    assert r.sup() == pytest.approx(0.1, rel=0.01)
    # tau(e1 + a e4, e2, e3) = a e5 over the volume sqrt(1 + a^2)
    assert r.sup() == pytest.approx(0.1 / np.sqrt(1.01), rel=1e-12)


def test_almost_instanton_decay():
    eps = [0.4, 0.2, 0.1, 0.05]
    gamma = GammaPath("quadratic", 0.05)
    errs = [almost_instanton_error(gamma, e, alpha=0.25) for e in eps]
    assert fit_slope(eps, errs)[0] >= (1 - 0.25) - 0.2


def test_zero_sweep_has_zero_distances():
    rep = correspondence_sweep([0.2, 0.1], GammaPath("zero"), n1=8, n2=8, n3=8)
    assert rep.ok
    assert all(r.trace_distance_c0 == 0.0 and r.trace_distance_c1 == 0.0 for r in rep.rows)
    assert all(r.plane_coassociative_residual <= 1e-10 for r in rep.rows)


def test_trace_distance_of_offset_graph():
    d = ThinDomain(0.2, 8, 8, 8)
    g = GraphSection.from_functions(d, *[lambda x1, x2, x3: 0 * x1] * 2,
                                    lambda x1, x2, x3: 0.1 * np.cos(x2) + 0 * x1 * x3, lambda x1, x2, x3: 0 * x1)
    c0, c1 = trace_distances(g, GammaPath("zero"))
    assert c0 == pytest.approx(0.1)
    assert c1 == pytest.approx(0.2, rel=1e-12)
