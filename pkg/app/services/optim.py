"""Discrete cost functionals and their closed-form optimal controls.

Each discrete cost is the continuous one plus an explicit polynomial
correction in h. The coefficient ledgers collect the quantities the closed
forms (and the lemma constants) are written in.
"""
from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass

from app.models import (
    BoundaryKind,
    ControlProblem,
    Grid,
    PiecewiseLinearField,
    ProblemParams,
    SchemeKind,
    ValidationError,
    require_alpha,
)
from app.services import analytic
from app.services.fdm import explicit_nodal_solution, interpolate

logger = logging.getLogger(__name__)


class NonConvexError(ValueError):
    """Raised when three samples do not bracket a strict minimum."""


def _a5(h: float, x0: float, alpha: float | None) -> float:
    value = h / (12 * x0) * (h**3 / (15 * x0**3) + h**2 / (2 * x0**2) + h / (3 * x0) - 5 / 2)
    if alpha is not None:
        ax = alpha * x0
        value += h / (alpha * x0**2) * (
            -7 / 6 + h / (3 * x0) + h**2 / (6 * x0**2) + (-2 + h / x0) / ax
        )
    return value


@dataclass(frozen=True)
class CoeffLedgerG:
    a1: float
    a2: float
    a3: float
    a4: float
    x0: float
    alpha: float | None = None

    def a5(self, h: float) -> float:
        return _a5(h, self.x0, self.alpha)


@dataclass(frozen=True)
class CoeffLedgerQ:
    b1: float
    b2: float
    d1: float
    d2: float
    d3: float
    d4: float
    d5: float
    d6: float


@dataclass(frozen=True)
class CoeffLedgerB:
    e1: float


@dataclass(frozen=True)
class DiscreteOptimum:
    control_star: float
    cost_star: float
    state_star: PiecewiseLinearField
    grid: Grid


def g_scaled_terms(params: ProblemParams, bc: BoundaryKind) -> tuple[float, float, float, float]:
    """q A1, q A2, q A3 and A4, written without dividing by q."""
    x0 = params.x0
    q = params.q
    cq = (params.b - params.z_d) / x0
    qa1 = 5 * q / 8 - cq
    qa2 = 3 * cq / 4 - q / 2
    qa3 = cq / 4 - q / 8
    a4 = 2 / 15 + params.m1 / x0**4
    if bc is BoundaryKind.ROBIN:
        ax = require_alpha(params) * x0
        qa1 += (5 * q / 2 + 3 * q / ax - 3 * cq) / ax
        qa2 += (-9 * q / 4 - 3 * q / ax + 3 * cq) / ax
        qa3 -= q / (4 * ax)
        a4 += (2 / 3 + 1 / ax) / ax
    return qa1, qa2, qa3, a4


def g_ledger(params: ProblemParams, bc: BoundaryKind) -> CoeffLedgerG:
    """A1..A4 (and A5 through ``a5``) for the distributed problem."""
    if params.q == 0:
        raise ValidationError("q must be nonzero for the distributed control ledger")
    qa1, qa2, qa3, a4 = g_scaled_terms(params, bc)
    q = params.q
    alpha = require_alpha(params) if bc is BoundaryKind.ROBIN else None
    return CoeffLedgerG(qa1 / q, qa2 / q, qa3 / q, a4, params.x0, alpha)


def q_ledger(params: ProblemParams, bc: BoundaryKind) -> CoeffLedgerQ:
    x0 = params.x0
    if bc is BoundaryKind.DIRICHLET:
        b1 = 1 / (1 / 3 + params.m2 / x0**3)
        return CoeffLedgerQ(b1, b1, 1 / 3, -5 / 12, -1.0, 2 / 15, 1.0, 2 / 3)

    ax = require_alpha(params) * x0
    d = analytic.robin_flux_coefficients(x0, params.alpha)
    k = d[0] + params.m2 / x0**3
    return CoeffLedgerQ(
        b1=(1 + 9 / (2 * ax) + 6 / ax**2) / k,
        # the displayed (1 - 2/(alpha x0)) does not minimise the displayed cost
        b2=(1 + 2 / ax) / k,
        d1=d[0], d2=d[1], d3=d[2], d4=d[3], d5=d[4], d6=d[5],
    )


def b_ledger(params: ProblemParams) -> CoeffLedgerB:
    return CoeffLedgerB(e1=1 / (4 * (1 + params.m3 / params.x0)))


def _inverse_ax(params: ProblemParams, bc: BoundaryKind) -> float:
    if bc is BoundaryKind.ROBIN:
        return 1 / require_alpha(params)
    return 0.0


def _dj1(p: ProblemParams, h: float, bc: BoundaryKind) -> float:
    x0, g, q = p.x0, p.g, p.q
    c = p.b - p.z_d
    r = h / x0
    ia = _inverse_ax(p, bc) / x0
    source = (
        -5 / 24 + r / 36 + r**2 / 24 + r**3 / 180
        + ia * (-7 / 6 + r / 3 + r**2 / 6)
        + ia**2 * (-2 + r)
    )
    flux = 1 / 3 + r / 12 + ia * (3 / 2 + r / 6) + 2 * ia**2
    target = -1 / 2 - r / 6 - 2 * ia
    return 0.5 * x0**3 * p.y0 * g * h * (g * x0 * source + q * flux + c / x0 * target)


def _dj2(p: ProblemParams, h: float, bc: BoundaryKind) -> float:
    x0, g, q = p.x0, p.g, p.q
    c = p.b - p.z_d
    ia = _inverse_ax(p, bc)
    first = (
        q * x0**2 / 3 - 5 * g * x0**3 / 24 - c * x0 / 2
        + ia * (3 * x0 * q / 2 - 7 * g * x0**2 / 6 - 2 * c)
        + ia**2 * 2 * (q - g * x0)
    )
    second = x0**2 * g / 36 - c / 6 + q * x0 / 12 + ia * (2 * g * x0 + q) / 6 + ia**2 * g
    third = g * (x0 / 24 + ia / 6)
    return 0.5 * x0 * p.y0 * g * h * (first + h * second + h**2 * third + g * h**3 / 180)


def _dj3(p: ProblemParams, h: float, bc: BoundaryKind) -> float:
    x0, g, q, b, z = p.x0, p.g, p.q, p.b, p.z_d
    ia = _inverse_ax(p, bc)
    first = (
        -b * (x0 / 2 + 2 * ia + h / 6)
        + g * (-5 * x0**3 / 24 - 7 * x0**2 * ia / 6 - 2 * x0 * ia**2)
        + q * (x0**2 / 3 + 3 * x0 * ia / 2 + 2 * ia**2)
        + z * (x0 / 2 + 2 * ia)
    )
    second = g * (x0**2 / 36 + x0 * ia / 3 + ia**2) + q * (x0 / 12 + ia / 6) + z / 6
    third = g * (x0 / 24 + ia / 6)
    return 0.5 * x0 * p.y0 * g * h * (first + h * second + h**2 * third + h**3 * g / 180)


_CORRECTIONS = {
    ControlProblem.SOURCE_G: _dj1,
    ControlProblem.FLUX_Q: _dj2,
    ControlProblem.AMBIENT_B: _dj3,
}


def discrete_cost(
    problem: ControlProblem,
    bc: BoundaryKind,
    params: ProblemParams,
    grid: Grid,
    control: float,
) -> float:
    """J^h_i (or J^h_i,alpha) at ``control`` for the classical scheme."""
    p = params.with_control(problem, control)
    base = analytic.continuous_cost(problem, bc, params, control)
    return float(base + _CORRECTIONS[problem](p, grid.h, bc))


def optimal_discrete_control(
    problem: ControlProblem,
    bc: BoundaryKind,
    params: ProblemParams,
    grid: Grid,
) -> float:
    h, x0, g = grid.h, params.x0, params.g

    if problem is ControlProblem.SOURCE_G:
        qa1, qa2, qa3, a4 = g_scaled_terms(params, bc)
        alpha = require_alpha(params) if bc is BoundaryKind.ROBIN else None
        numerator = qa1 + h / x0 * qa2 + (h / x0) ** 2 * qa3
        return numerator / (3 * x0 * (a4 + _a5(h, x0, alpha)))

    continuous = analytic.optimal_control(problem, bc, params)
    if problem is ControlProblem.FLUX_Q:
        ledger = q_ledger(params, bc)
        return continuous - ledger.b1 * g * h / 6 - ledger.b2 * g * h**2 / (24 * x0)

    e1 = b_ledger(params).e1
    shift = 1 + h / (3 * x0) + 4 * _inverse_ax(params, bc) / x0
    return continuous + e1 * g * x0 * h * shift


def discrete_optimum(
    problem: ControlProblem,
    bc: BoundaryKind,
    params: ProblemParams,
    grid: Grid,
) -> DiscreteOptimum:
    control = optimal_discrete_control(problem, bc, params, grid)
    nodal = explicit_nodal_solution(
        params.with_control(problem, control), grid, SchemeKind.CLASSICAL, bc
    )
    return DiscreteOptimum(
        control_star=control,
        cost_star=discrete_cost(problem, bc, params, grid, control),
        state_star=interpolate(nodal),
        grid=grid,
    )


def numeric_argmin(costfn: Callable[[float], float], bracket: tuple[float, float]) -> float:
    """Vertex of the parabola through the bracket ends and midpoint.

    Exact for quadratics; raises NonConvexError when the second difference
    is not positive.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not hi > lo:
        raise ValidationError(f"bracket must be increasing, got ({lo}, {hi})")
    mid = 0.5 * (lo + hi)
    f_lo, f_mid, f_hi = costfn(lo), costfn(mid), costfn(hi)
    second = f_lo - 2 * f_mid + f_hi
    if not second > 0:
        raise NonConvexError(f"samples are not convex (second difference {second:g})")
    return mid - (hi - lo) / 4 * (f_hi - f_lo) / second


def numeric_optimum(
    problem: ControlProblem,
    bc: BoundaryKind,
    params: ProblemParams,
    grid: Grid | None = None,
    bracket: tuple[float, float] = (-100.0, 100.0),
) -> float:
    """Parabola-vertex minimiser of the discrete cost, or the continuous one if no grid."""
    if grid is None:
        return numeric_argmin(lambda c: analytic.continuous_cost(problem, bc, params, c), bracket)
    return numeric_argmin(lambda c: discrete_cost(problem, bc, params, grid, c), bracket)
