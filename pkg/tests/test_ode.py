import math

import numpy as np
import pytest

from approxfix.errors import BlowUp, Diverged, EstimateViolated, TubeViolation
from approxfix.ode import (GridFunction, OdeProblem, apply_F, apriori_bound, apriori_bound_inverse,
                           audit_growth, j_integral, lp_norm, osgood_check, solve_limiting_weak,
                           verify_lp_estimates)
from approxfix.registry import build_field
from approxfix.seminorms import LinearFunctional, coordinate_functionals


def problem(name, u0, T=1.0, h=1e-3, p=2.0, **params):
    f, alpha, phi = build_field(name, params, len(u0))
    return OdeProblem(f, alpha, phi, np.asarray(u0, dtype=float), T, p, h, name)


def test_problem_validation():
    with pytest.raises(ValueError):
        problem("zero", [1.0], T=-1.0)
    with pytest.raises(ValueError):
        problem("zero", [1.0], p=1.0)


def test_bound_zero_alpha():
    b = apriori_bound(problem("zero", [3.0, 4.0]))
    np.testing.assert_allclose(b.values, 5.0)


def test_bound_closed_form():
    prob = problem("linear", [1.0])
    b = apriori_bound(prob)
    np.testing.assert_allclose(b.values, 2 * np.exp(prob.grid) - 1, rtol=1e-10)
    assert b.values[-1] == pytest.approx(2 * math.e - 1, rel=1e-6)


def test_bound_forms_agree():
    prob = problem("logistic-growth", [0.5], rate=1.0, capacity=10.0)
    a, b = apriori_bound(prob), apriori_bound_inverse(prob)
    np.testing.assert_allclose(a.values, b.values, rtol=1e-8)


def quadratic_growth(T):
    return OdeProblem(lambda t, u: 1 + u ** 2, lambda t: 1.0, lambda s: 1.0 + s * s, np.zeros(1), T, 2.0, 1e-3)


def test_arctan_bound():
    prob = quadratic_growth(1.0)
    b = apriori_bound(prob)
    np.testing.assert_allclose(b.values, np.tan(prob.grid), rtol=1e-9)
    assert j_integral(prob.phi, 0.0, 1.0) == pytest.approx(math.atan(1.0))


def test_arctan_blow_up():
    prob = quadratic_growth(2.0)
    assert not osgood_check(prob)["ok"]
    with pytest.raises(BlowUp) as info:
        apriori_bound(prob)
    assert info.value.t < math.pi / 2 + 1e-2


def test_osgood_linear_growth():
    check = osgood_check(problem("linear", [1.0]))
    assert check["divergent"] and check["ok"]


def test_growth_audit():
    prob = problem("rotation", [1.0, 0.0])
    assert audit_growth(prob, apriori_bound(prob)) <= 1.0


def test_apply_zero_field():
    prob = problem("zero", [1.0, -2.0])
    u = GridFunction(np.random.default_rng(0).normal(size=(len(prob.grid), 2)), prob.grid)
    np.testing.assert_array_equal(apply_F(prob, u).values, np.tile([1.0, -2.0], (len(prob.grid), 1)))


def test_apply_constant_is_exact():
    prob = problem("linear", [1.0])
    v = apply_F(prob, GridFunction.constant(prob.u0, prob.grid))
    np.testing.assert_allclose(v.values[:, 0], 1 + prob.grid, rtol=0, atol=1e-14)


def test_apply_tube_violation():
    prob = problem("linear", [1.0])
    u = GridFunction.constant([100.0], prob.grid)
    with pytest.raises(TubeViolation):
        apply_F(prob, u, apriori_bound(prob))


def test_apply_second_order():
    errors = []
    for h in (1e-2, 5e-3):
        prob = problem("linear", [1.0], h=h)
        u = GridFunction(np.exp(prob.grid)[:, None], prob.grid)
        errors.append(np.abs(apply_F(prob, u).values[:, 0] - np.exp(prob.grid)).max())
    assert errors[0] / errors[1] >= 3.5


def test_solve_zero_field():
    prob = problem("zero", [0.7])
    sol = solve_limiting_weak(prob, 3, coordinate_functionals(1))
    np.testing.assert_array_equal(sol.u.values, 0.7)
    assert sol.uniform_residuals.max() == 0.0


def test_solve_exponential():
    sol = solve_limiting_weak(problem("linear", [1.0]), 30, coordinate_functionals(1))
    assert abs(sol.u.at_end()[0] - math.e) < 1e-3


def test_solve_rotation():
    sol = solve_limiting_weak(problem("rotation", [1.0, 0.0]), 30, coordinate_functionals(2))
    assert np.linalg.norm(sol.u.at_end() - [math.cos(1), math.sin(1)]) < 1e-3


def test_solve_rejects_non_separating():
    with pytest.raises(ValueError):
        solve_limiting_weak(problem("rotation", [1.0, 0.0]), 3, [LinearFunctional([1.0, 0.0])])


def test_solve_diverges():
    with pytest.raises(Diverged):
        solve_limiting_weak(problem("linear", [1.0], rate=20.0), 30, coordinate_functionals(1))


def test_residual_export(tmp_path):
    sol = solve_limiting_weak(problem("linear", [1.0], h=0.1), 4, coordinate_functionals(1))
    sol.to_csv(tmp_path / "s.csv", tmp_path / "r.csv")
    assert (tmp_path / "r.csv").read_text().splitlines()[0] == "iterate,uniform_residual,weak_e1"
    assert len((tmp_path / "s.csv").read_text().splitlines()) == 12


@pytest.mark.parametrize("p", [2.0, 4.0])
def test_lp_estimates_on_iterates(p):
    prob = problem("rotation", [1.0, 0.0], p=p)
    sol = solve_limiting_weak(prob, 10, coordinate_functionals(2))
    for u in sol.iterates:
        assert verify_lp_estimates(prob, u, sol.bound).ok


def test_lp_estimate_violation():
    prob = problem("zero", [1.0])
    wiggle = GridFunction(np.sin(50 * prob.grid)[:, None], prob.grid)
    with pytest.raises(EstimateViolated):
        verify_lp_estimates(prob, wiggle)


def test_lp_norm_constant():
    t = np.linspace(0, 2, 11)
    assert lp_norm(np.full(11, 3.0), t, 2.0) == pytest.approx(3.0 * math.sqrt(2))
