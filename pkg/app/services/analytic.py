"""Closed-form continuous states, cost functionals and optimal controls.

Costs are the explicit quadratic polynomials in the control; they are the
exact oracles the discrete quantities are measured against. With c = b - z_d
every formula is written without dividing by q so that q = 0 stays valid.
"""
from __future__ import annotations

from dataclasses import dataclass

from app.models import (
    BoundaryKind,
    ControlProblem,
    ProblemParams,
    QuadraticState,
    require_alpha,
)


@dataclass(frozen=True)
class ContinuousOptimum:
    control_star: float
    cost_star: float
    state_star: QuadraticState


def continuous_state(params: ProblemParams, bc: BoundaryKind) -> QuadraticState:
    g, q, b, x0 = params.g, params.q, params.b, params.x0
    c0 = b
    if bc is BoundaryKind.ROBIN:
        c0 = b + (g * x0 - q) / require_alpha(params)
    return QuadraticState(c2=-g / 2, c1=g * x0 - q, c0=c0)


def _j1(p: ProblemParams) -> float:
    x0, g, q = p.x0, p.g, p.q
    c = p.b - p.z_d
    return 0.5 * x0**3 * p.y0 * (
        g**2 * x0**2 * (2 / 15 + p.m1 / x0**4)
        - 5 / 12 * g * q * x0
        + 2 / 3 * g * c
        + q**2 / 3
        - q * c / x0
        + c**2 / x0**2
    )


def _j1_alpha(p: ProblemParams) -> float:
    alpha = require_alpha(p)
    x0, g, q = p.x0, p.g, p.q
    c = p.b - p.z_d
    ax = alpha * x0
    extra = (
        g**2 * x0**2 * (2 / 3 + 1 / ax)
        + g * x0 * q * (-5 / 3 - 2 / ax)
        + 2 * g * c
        + q**2 * (1 + 1 / ax)
        - 2 * q * c / x0
    )
    return _j1(p) + x0**2 * p.y0 / (2 * alpha) * extra


def _j2(p: ProblemParams) -> float:
    x0, g, q = p.x0, p.g, p.q
    c = p.b - p.z_d
    return x0 * p.y0 / 2 * (
        q**2 * x0**2 * (1 / 3 + p.m2 / x0**3)
        + q * x0 * (-5 / 12 * g * x0**2 - c)
        + 2 / 15 * g**2 * x0**4
        + c**2
        + 2 / 3 * g * x0**2 * c
    )


def robin_flux_coefficients(x0: float, alpha: float) -> tuple[float, ...]:
    """D1..D6 of the Robin flux cost."""
    ax = alpha * x0
    return (
        1 / 3 + 1 / ax + 1 / ax**2,
        -5 / 12 - 5 / (3 * ax) - 2 / ax**2,
        -1 - 2 / ax,
        2 / 15 + 2 / (3 * ax) + 1 / ax**2,
        1.0,
        2 / 3 + 2 / ax,
    )


def _j2_alpha(p: ProblemParams) -> float:
    x0, g, q = p.x0, p.g, p.q
    c = p.b - p.z_d
    d1, d2, d3, d4, d5, d6 = robin_flux_coefficients(x0, require_alpha(p))
    return x0 * p.y0 / 2 * (
        q**2 * x0**2 * (d1 + p.m2 / x0**3)
        + q * x0 * (d2 * g * x0**2 + d3 * c)
        + d4 * g**2 * x0**4
        + d5 * c**2
        + d6 * g * x0**2 * c
    )


def _j3(p: ProblemParams) -> float:
    x0, g, q, b, z = p.x0, p.g, p.q, p.b, p.z_d
    return x0 * p.y0 / 2 * (
        b**2 * (1 + p.m3 / x0)
        + b * (2 * g * x0**2 / 3 - q * x0 - 2 * z)
        + (
            2 * g**2 * x0**4 / 15
            - 5 * g * q * x0**3 / 12
            + x0**2 / 3 * (q**2 - 2 * g * z)
            + z * (z + q * x0)
        )
    )


def _j3_alpha(p: ProblemParams) -> float:
    alpha = require_alpha(p)
    x0, g, q, b, z = p.x0, p.g, p.q, p.b, p.z_d
    extra = (
        (q - g * x0) * (-6 * b + 3 * q * x0 - 2 * g * x0**2 + 6 * z) / (3 * alpha)
        + (q - g * x0) ** 2 / alpha**2
    )
    return _j3(p) + x0 * p.y0 / 2 * extra


_COSTS = {
    (ControlProblem.SOURCE_G, BoundaryKind.DIRICHLET): _j1,
    (ControlProblem.SOURCE_G, BoundaryKind.ROBIN): _j1_alpha,
    (ControlProblem.FLUX_Q, BoundaryKind.DIRICHLET): _j2,
    (ControlProblem.FLUX_Q, BoundaryKind.ROBIN): _j2_alpha,
    (ControlProblem.AMBIENT_B, BoundaryKind.DIRICHLET): _j3,
    (ControlProblem.AMBIENT_B, BoundaryKind.ROBIN): _j3_alpha,
}


def continuous_cost(
    problem: ControlProblem,
    bc: BoundaryKind,
    params: ProblemParams,
    control: float,
) -> float:
    """J_i or J_i,alpha evaluated with ``control`` substituted into params."""
    return float(_COSTS[problem, bc](params.with_control(problem, control)))


def optimal_control(problem: ControlProblem, bc: BoundaryKind, params: ProblemParams) -> float:
    x0, g, q, b, z = params.x0, params.g, params.q, params.b, params.z_d
    c = b - z

    if problem is ControlProblem.SOURCE_G:
        numerator = 5 * q / 8 - c / x0
        denominator = 2 / 15 + params.m1 / x0**4
        if bc is BoundaryKind.ROBIN:
            ax = require_alpha(params) * x0
            numerator += 5 * q / (2 * ax) + 3 * q / ax**2 - 3 * c / (ax * x0)
            denominator += 2 / (3 * ax) + 1 / ax**2
        return numerator / (3 * x0 * denominator)

    if problem is ControlProblem.FLUX_Q:
        if bc is BoundaryKind.ROBIN:
            d1, d2, d3, *_ = robin_flux_coefficients(x0, require_alpha(params))
            return -(d2 * g * x0**2 + d3 * c) / (2 * x0 * (d1 + params.m2 / x0**3))
        return (5 / 12 * g * x0**2 + c) / (2 * x0 * (1 / 3 + params.m2 / x0**3))

    b_op = (z + q * x0 / 2 - g * x0**2 / 3) / (1 + params.m3 / x0)
    if bc is BoundaryKind.ROBIN:
        b_op -= (g * x0 - q) / (require_alpha(params) * (1 + params.m3 / x0))
    return b_op


def continuous_optimum(
    problem: ControlProblem,
    bc: BoundaryKind,
    params: ProblemParams,
) -> ContinuousOptimum:
    control = optimal_control(problem, bc, params)
    return ContinuousOptimum(
        control_star=control,
        cost_star=continuous_cost(problem, bc, params, control),
        state_star=continuous_state(params.with_control(problem, control), bc),
    )
