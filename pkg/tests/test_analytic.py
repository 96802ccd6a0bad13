import numpy as np
import pytest

from app.models import BoundaryKind, ControlProblem, ProblemParams, ValidationError
from app.services.analytic import (
    continuous_cost,
    continuous_optimum,
    continuous_state,
    optimal_control,
)
from app.services.metrics import quadrature_cost
from app.services.optim import numeric_optimum

PROBLEM_CASES = [(p, bc) for p in ControlProblem for bc in BoundaryKind]


def test_continuous_state_boundary_conditions():
    params = ProblemParams(alpha=25.0)
    u = continuous_state(params, BoundaryKind.DIRICHLET)
    assert u(0.0) == pytest.approx(params.b)
    # -u'(x0) = q
    assert -u.derivative()(params.x0) == pytest.approx(params.q)

    ua = continuous_state(params, BoundaryKind.ROBIN)
    # u'(0) = alpha (u(0) - b)
    assert ua.derivative()(0.0) == pytest.approx(params.alpha * (ua(0.0) - params.b))


def test_distributed_optimum_reference_value(params):
    assert optimal_control(ControlProblem.SOURCE_G, BoundaryKind.DIRICHLET, params) == pytest.approx(
        5.1470588, rel=1e-7
    )


def test_flux_optimum_reference_value():
    params = ProblemParams(g=10.0, b=50.0, z_d=40.0)
    assert optimal_control(ControlProblem.FLUX_Q, BoundaryKind.DIRICHLET, params) == pytest.approx(5.3125)


def test_ambient_optimum_reference_value(params):
    assert optimal_control(ControlProblem.AMBIENT_B, BoundaryKind.DIRICHLET, params) == pytest.approx(
        21.333333, rel=1e-7
    )


def test_distributed_optimum_allows_zero_flux():
    params = ProblemParams(q=0.0)
    g_op = optimal_control(ControlProblem.SOURCE_G, BoundaryKind.DIRICHLET, params)
    assert g_op == pytest.approx(numeric_optimum(ControlProblem.SOURCE_G, BoundaryKind.DIRICHLET, params), rel=1e-9)


@pytest.mark.parametrize("problem, bc", PROBLEM_CASES)
def test_cost_polynomial_matches_quadrature(problem, bc):
    params = ProblemParams(g=7.0, q=-3.0, b=12.0, z_d=25.0, m1=0.5, m2=2.0, m3=1.5, alpha=40.0)
    rng = np.random.default_rng(11)
    for control in rng.uniform(-30.0, 30.0, size=10):
        moved = params.with_control(problem, control)
        oracle = quadrature_cost(problem, moved, continuous_state(moved, bc))
        assert continuous_cost(problem, bc, params, control) == pytest.approx(oracle, rel=1e-10)


@pytest.mark.parametrize("problem, bc", PROBLEM_CASES)
def test_closed_form_optimum_matches_parabola_vertex(problem, bc):
    params = ProblemParams(alpha=80.0)
    closed = optimal_control(problem, bc, params)
    assert closed == pytest.approx(numeric_optimum(problem, bc, params), rel=1e-9)


@pytest.mark.parametrize("problem, bc", PROBLEM_CASES)
def test_continuous_optimum_is_a_minimum(problem, bc):
    params = ProblemParams(alpha=80.0)
    opt = continuous_optimum(problem, bc, params)
    for step in (-0.5, 0.5):
        assert continuous_cost(problem, bc, params, opt.control_star + step) > opt.cost_star


@pytest.mark.parametrize("problem", list(ControlProblem))
def test_robin_optimum_gap_shrinks_like_one_over_alpha(problem, params):
    dirichlet = optimal_control(problem, BoundaryKind.DIRICHLET, params)
    scaled = [
        alpha * abs(optimal_control(problem, BoundaryKind.ROBIN, ProblemParams(alpha=alpha)) - dirichlet)
        for alpha in (1e3, 1e4, 1e5)
    ]
    assert scaled[0] == pytest.approx(scaled[1], rel=0.05)
    assert scaled[1] == pytest.approx(scaled[2], rel=0.01)


def test_robin_cost_requires_alpha(params):
    with pytest.raises(ValidationError, match="alpha required"):
        continuous_cost(ControlProblem.FLUX_Q, BoundaryKind.ROBIN, params, 1.0)


@pytest.mark.parametrize("problem, bc", PROBLEM_CASES)
def test_cost_is_stationary_at_the_optimum(problem, bc):
    params = ProblemParams(alpha=15.0)
    opt = continuous_optimum(problem, bc, params)
    step = 1e-6
    slope = (
        continuous_cost(problem, bc, params, opt.control_star + step)
        - continuous_cost(problem, bc, params, opt.control_star - step)
    ) / (2 * step)
    assert abs(slope) <= 1e-6 * (1 + abs(opt.cost_star))
