import numpy as np
import pytest

from app.models import (
    BoundaryKind,
    ControlProblem,
    ProblemParams,
    SchemeKind,
    ValidationError,
    make_grid,
)
from app.services import analytic
from app.services.fdm import explicit_nodal_solution, interpolate
from app.services.metrics import quadrature_cost
from app.services.optim import (
    NonConvexError,
    b_ledger,
    discrete_cost,
    discrete_optimum,
    g_ledger,
    numeric_argmin,
    numeric_optimum,
    optimal_discrete_control,
    q_ledger,
)

PROBLEM_CASES = [(p, bc) for p in ControlProblem for bc in BoundaryKind]
FLUX_PARAMS = ProblemParams(g=10.0, b=50.0, z_d=40.0)


def test_distributed_ledger_reference_values(params):
    ledger = g_ledger(params, BoundaryKind.DIRICHLET)
    assert ledger.a1 == pytest.approx(1.4583333, rel=1e-7)
    assert ledger.a2 == pytest.approx(-1.125)
    assert ledger.a3 == pytest.approx(-0.3333333, rel=1e-6)
    assert ledger.a4 == pytest.approx(1.1333333, rel=1e-7)
    assert ledger.a5(0.1) == pytest.approx(-0.0205133, abs=1e-7)


@pytest.mark.parametrize("bc", list(BoundaryKind))
def test_distributed_ledger_vanishing_mesh_term(bc):
    ledger = g_ledger(ProblemParams(alpha=40.0), bc)
    assert ledger.a5(0.0) == 0.0


def test_distributed_ledger_needs_flux():
    with pytest.raises(ValidationError, match="q must be nonzero"):
        g_ledger(ProblemParams(q=0.0), BoundaryKind.DIRICHLET)


def test_discrete_distributed_optimum_reference_value(params):
    grid = make_grid(1.0, 10)
    g_h = optimal_discrete_control(ControlProblem.SOURCE_G, BoundaryKind.DIRICHLET, params, grid)
    assert g_h == pytest.approx(4.825581, rel=1e-6)


def test_discrete_distributed_optimum_allows_zero_flux():
    grid = make_grid(1.0, 10)
    for bc in BoundaryKind:
        p = ProblemParams(q=0.0, alpha=30.0)
        closed = optimal_discrete_control(ControlProblem.SOURCE_G, bc, p, grid)
        assert closed == pytest.approx(numeric_optimum(ControlProblem.SOURCE_G, bc, p, grid), rel=1e-9)


def test_discrete_flux_optimum_reference_value():
    grid = make_grid(1.0, 10)
    q_h = optimal_discrete_control(ControlProblem.FLUX_Q, BoundaryKind.DIRICHLET, FLUX_PARAMS, grid)
    assert q_h == pytest.approx(5.184375, rel=1e-9)


@pytest.mark.parametrize("n", [4, 16, 64, 256, 1024])
def test_flux_gap_is_exact(n):
    grid = make_grid(1.0, n)
    h = grid.h
    ledger = q_ledger(FLUX_PARAMS, BoundaryKind.DIRICHLET)
    gap = (
        optimal_discrete_control(ControlProblem.FLUX_Q, BoundaryKind.DIRICHLET, FLUX_PARAMS, grid)
        - analytic.optimal_control(ControlProblem.FLUX_Q, BoundaryKind.DIRICHLET, FLUX_PARAMS)
    )
    expected = -ledger.b1 * 10.0 * h / 6 - ledger.b2 * 10.0 * h**2 / 24
    assert gap == pytest.approx(expected, rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("n", [4, 10, 64, 256, 1024])
def test_ambient_gap_is_exact(params, n):
    grid = make_grid(1.0, n)
    h = grid.h
    e1 = b_ledger(params).e1
    gap = (
        optimal_discrete_control(ControlProblem.AMBIENT_B, BoundaryKind.DIRICHLET, params, grid)
        - analytic.optimal_control(ControlProblem.AMBIENT_B, BoundaryKind.DIRICHLET, params)
    )
    assert gap == pytest.approx(e1 * params.g * h * (1 + h / 3), rel=1e-12, abs=1e-14)


def test_ambient_reference_values(params):
    grid = make_grid(1.0, 10)
    opt = discrete_optimum(ControlProblem.AMBIENT_B, BoundaryKind.DIRICHLET, params, grid)
    assert opt.control_star == pytest.approx(21.4625, rel=1e-9)
    assert opt.control_star - 21.333333333333333 == pytest.approx(0.1291667, rel=1e-6)


@pytest.mark.parametrize("problem, bc", PROBLEM_CASES)
@pytest.mark.parametrize("n", [4, 8, 32, 128])
def test_discrete_cost_matches_quadrature(problem, bc, n):
    params = ProblemParams(g=6.0, q=4.0, b=18.0, z_d=30.0, m1=0.7, m2=1.3, m3=0.4, alpha=35.0)
    grid = make_grid(1.0, n)
    rng = np.random.default_rng(n)
    for control in rng.uniform(-25.0, 25.0, size=10):
        moved = params.with_control(problem, control)
        state = interpolate(explicit_nodal_solution(moved, grid, SchemeKind.CLASSICAL, bc))
        oracle = quadrature_cost(problem, moved, state)
        assert discrete_cost(problem, bc, params, grid, control) == pytest.approx(oracle, rel=1e-10)


@pytest.mark.parametrize("problem, bc", PROBLEM_CASES)
@pytest.mark.parametrize("n", [4, 10, 100])
def test_closed_form_discrete_optimum_matches_parabola_vertex(problem, bc, n):
    params = ProblemParams(alpha=60.0)
    grid = make_grid(1.0, n)
    closed = optimal_discrete_control(problem, bc, params, grid)
    assert closed == pytest.approx(numeric_optimum(problem, bc, params, grid), rel=1e-9)


def test_discrete_optimum_state_is_the_interpolant(params):
    grid = make_grid(1.0, 8)
    opt = discrete_optimum(ControlProblem.FLUX_Q, BoundaryKind.DIRICHLET, params, grid)
    assert opt.state_star(0.0) == pytest.approx(params.b)
    assert opt.cost_star == pytest.approx(
        discrete_cost(ControlProblem.FLUX_Q, BoundaryKind.DIRICHLET, params, grid, opt.control_star)
    )


def test_numeric_argmin_rejects_concave_samples():
    with pytest.raises(NonConvexError):
        numeric_argmin(lambda c: -(c - 1.0) ** 2, (-10.0, 10.0))


def test_numeric_argmin_rejects_empty_bracket():
    with pytest.raises(ValidationError, match="bracket must be increasing"):
        numeric_argmin(lambda c: c * c, (3.0, 3.0))


def test_numeric_argmin_exact_for_quadratic():
    assert numeric_argmin(lambda c: 2.0 * (c - 3.25) ** 2 + 1.0, (-100.0, 100.0)) == pytest.approx(3.25)


def _ledger_entries(ledger, fields):
    return np.array([getattr(ledger, field) for field in fields])


@pytest.mark.parametrize(
    "build, fields",
    [(g_ledger, ("a1", "a2", "a3", "a4")), (q_ledger, ("b1", "b2"))],
)
def test_robin_ledgers_approach_dirichlet_ones(build, fields):
    dirichlet = _ledger_entries(build(ProblemParams(), BoundaryKind.DIRICHLET), fields)
    diffs = []
    for alpha in (1e2, 1e3, 1e4):
        robin = _ledger_entries(build(ProblemParams(alpha=alpha), BoundaryKind.ROBIN), fields)
        diffs.append(np.abs(robin - dirichlet))
    assert np.all(diffs[2] <= diffs[1]) and np.all(diffs[1] <= diffs[0])
    # differences shrink at least like 1/alpha
    assert np.all(diffs[2] * 1e4 <= 2 * diffs[0] * 1e2 + 1e-12)
