"""Audited table of the error-estimate constants.

Every constant is a function of the problem data only (never of h). Alpha
variants require ``params.alpha``. Entries whose displayed formula contains
an algebra slip carry the consistent form under the plain name and the
displayed one under ``*_printed``.
"""
from __future__ import annotations

import math
from collections.abc import Callable

from app.models import BoundaryKind, ControlProblem, ProblemParams, SchemeKind, require_alpha
from app.services import analytic
from app.services.optim import b_ledger, g_scaled_terms, q_ledger


class UnknownConstantError(KeyError):
    pass


_TABLE: dict[str, Callable[[ProblemParams], float]] = {}

# constant family per problem and per estimate kind
PROBLEM_CONSTANTS = {
    ControlProblem.SOURCE_G: {"cost": "C2", "control": "C3", "cost_opt": "C4", "state_opt": "C5", "derivative_opt": "C6"},
    ControlProblem.FLUX_Q: {"cost": "C7", "control": "C8", "cost_opt": "C9", "state_opt": "C10", "derivative_opt": "C11"},
    ControlProblem.AMBIENT_B: {"cost": "C12", "control": "C13", "cost_opt": "C14", "state_opt": "C15", "derivative_opt": "C16"},
}


def _constant(name: str):
    def register(fn):
        _TABLE[name] = fn
        return fn
    return register


def names() -> list[str]:
    return sorted(_TABLE)


def resolve(name: str, bc: BoundaryKind | None = None, scheme: SchemeKind | None = None) -> str:
    """Map the generic ``state``/``derivative`` bounds onto a table entry."""
    robin = bc is BoundaryKind.ROBIN
    improved = scheme is SchemeKind.IMPROVED
    if name == "state":
        if improved:
            return "D2" if robin else "D1"
        return "C1_alpha" if robin else "C1"
    if name == "derivative":
        if improved:
            return "D2_tilde" if robin else "D1_tilde"
        return "C1_tilde"
    return name


def family(problem: ControlProblem, kind: str, bc: BoundaryKind) -> str:
    base = PROBLEM_CONSTANTS[problem][kind]
    return f"{base}_alpha" if bc is BoundaryKind.ROBIN else base


def lemma_constant(
    name: str,
    params: ProblemParams,
    bc: BoundaryKind | None = None,
    scheme: SchemeKind | None = None,
) -> float:
    key = resolve(name, bc, scheme)
    try:
        fn = _TABLE[key]
    except KeyError:
        raise UnknownConstantError(f"unknown constant {name!r}") from None
    return float(fn(params))


def _ax(p: ProblemParams) -> float:
    return require_alpha(p) * p.x0


# state bounds

@_constant("C1")
def _c1(p):
    return p.x0 * abs(p.g) * math.sqrt(2 * p.x0 * p.y0 / 15)


@_constant("C1_tilde")
def _c1_tilde(p):
    return abs(p.g) * math.sqrt(p.x0 * p.y0 / 3)


@_constant("C1_alpha")
def _c1_alpha(p):
    ax = _ax(p)
    return abs(p.g) * p.x0 * math.sqrt(p.x0 * p.y0 * (2 / 15 + 2 / (3 * ax) + 1 / ax**2))


@_constant("D1")
@_constant("D2")
def _d1(p):
    return abs(p.g) * math.sqrt(p.x0 * p.y0 / 120)


@_constant("D1_tilde")
@_constant("D2_tilde")
def _d1_tilde(p):
    return abs(p.g) * math.sqrt(p.x0 * p.y0 / 12)


# distributed control g

@_constant("C2")
def _c2(p):
    c = p.b - p.z_d
    return 0.5 * p.x0**3 * p.y0 * abs(p.g) * abs(-5 / 24 * p.g * p.x0 + p.q / 3 - c / (2 * p.x0))


@_constant("C2_alpha")
def _c2_alpha(p):
    ax, x0 = _ax(p), p.x0
    c = p.b - p.z_d
    inner = (
        p.g * x0 * (-5 / 24 - 7 / (6 * ax) - 2 / ax**2)
        + p.q * (1 / 3 + 3 / (2 * ax) + 2 / ax**2)
        + c / x0 * (-1 / 2 - 2 / ax)
    )
    return 0.5 * x0**3 * p.y0 * abs(p.g) * abs(inner)


# q A_i products keep the g family defined at q = 0

def _c3_weighted(p: ProblemParams, bc: BoundaryKind, weight: float) -> float:
    qa1, qa2, _, a4 = g_scaled_terms(p, bc)
    return (qa2 * a4 + weight * qa1) / (3 * p.x0**2 * a4**2)


@_constant("C3_star")
def _c3_star(p):
    return _c3_weighted(p, BoundaryKind.DIRICHLET, 5 / 24)


def _c3_alpha_star(p, full: bool = True):
    ax = _ax(p)
    weight = 5 / 24 + 7 / (6 * ax)
    if full:
        weight += 2 / ax**2
    return _c3_weighted(p, BoundaryKind.ROBIN, weight)


_constant("C3_alpha_star")(_c3_alpha_star)
_constant("C3_alpha_star_printed")(lambda p: _c3_alpha_star(p, full=False))
_constant("C3")(lambda p: abs(_c3_star(p)))
_constant("C3_alpha")(lambda p: abs(_c3_alpha_star(p)))


@_constant("C4")
def _c4(p):
    qa1, qa2, _, a4 = g_scaled_terms(p, BoundaryKind.DIRICHLET)
    return 0.5 * p.x0**2 * p.y0 * abs(qa1 * (5 * qa1 + 48 * qa2 * a4) / (216 * a4**2))


@_constant("C4_alpha")
def _c4_alpha(p):
    qa1, qa2, _, a4 = g_scaled_terms(p, BoundaryKind.ROBIN)
    x0, alpha = p.x0, require_alpha(p)
    g_op = analytic.optimal_control(ControlProblem.SOURCE_G, BoundaryKind.ROBIN, p)
    c3 = _c3_alpha_star(p)
    scaled = (
        -2 * a4 * c3 * g_op * x0**3
        + 5 / 24 * g_op**2 * x0**2
        + 7 / 6 * g_op**2 * x0 / alpha
        + 2 / 3 * qa1 * c3 * x0**2
        + 2 / 3 * qa2 * g_op * x0
    )
    return 0.5 * x0**2 * p.y0 * abs(scaled)


def _state_opt_g(g_op: float, c3: float, p: ProblemParams, inv_alpha: float) -> float:
    x0, ia = p.x0, inv_alpha
    squared = (
        g_op**2 * (x0**3 / 12 + x0**2 * ia / 2 + x0 * ia**2)
        - 2 * g_op * c3 * (5 * x0**4 / 48 + 7 * x0**3 * ia / 12 + x0**2 * ia**2)
        + c3**2 * (2 * x0**5 / 15 + 2 * x0**4 * ia / 3 + x0**3 * ia**2)
    )
    return math.sqrt(p.y0 * squared)


def _derivative_opt_g(g_op: float, c3: float, p: ProblemParams) -> float:
    x0 = p.x0
    return math.sqrt(x0 * p.y0 / 6 * (2 * g_op**2 - 3 * g_op * x0 * c3 + 2 * (x0 * c3) ** 2))


@_constant("C5")
def _c5(p):
    g_op = analytic.optimal_control(ControlProblem.SOURCE_G, BoundaryKind.DIRICHLET, p)
    return _state_opt_g(g_op, _c3_star(p), p, 0.0)


@_constant("C5_alpha")
def _c5_alpha(p):
    g_op = analytic.optimal_control(ControlProblem.SOURCE_G, BoundaryKind.ROBIN, p)
    return _state_opt_g(g_op, _c3_alpha_star(p), p, 1 / require_alpha(p))


@_constant("C6")
def _c6(p):
    g_op = analytic.optimal_control(ControlProblem.SOURCE_G, BoundaryKind.DIRICHLET, p)
    return _derivative_opt_g(g_op, _c3_star(p), p)


@_constant("C6_alpha")
def _c6_alpha(p):
    g_op = analytic.optimal_control(ControlProblem.SOURCE_G, BoundaryKind.ROBIN, p)
    return _derivative_opt_g(g_op, _c3_alpha_star(p), p)


# boundary flux q

def _c7_inner(p: ProblemParams, q: float, inv_alpha: float) -> float:
    x0, g, ia = p.x0, p.g, inv_alpha
    c = p.b - p.z_d
    return (
        q * x0 / 3 - 5 * g * x0**2 / 24 - c / 2
        + ia * (3 * q / 2 - 7 * g * x0 / 6 - 2 * c / x0)
        + ia**2 * 2 * (q - g * x0) / x0
    )


@_constant("C7")
def _c7(p):
    return 0.5 * p.x0**2 * p.y0 * abs(p.g) * abs(_c7_inner(p, p.q, 0.0))


@_constant("C7_alpha")
def _c7_alpha(p):
    return 0.5 * p.x0**2 * p.y0 * abs(p.g) * abs(_c7_inner(p, p.q, 1 / require_alpha(p)))


@_constant("C8")
def _c8(p):
    return abs(p.g * q_ledger(p, BoundaryKind.DIRICHLET).b1 / 6)


@_constant("C8_alpha")
def _c8_alpha(p):
    return abs(p.g * q_ledger(p, BoundaryKind.ROBIN).b1 / 6)


@_constant("C9")
def _c9(p):
    x0, g = p.x0, p.g
    c = p.b - p.z_d
    b1 = q_ledger(p, BoundaryKind.DIRICHLET).b1
    q_op = analytic.optimal_control(ControlProblem.FLUX_Q, BoundaryKind.DIRICHLET, p)
    inner = (
        b1 / 6 * (-2 * x0 / b1 * q_op + 5 / 12 * g * x0**2 + c)
        + q_op * x0 / 3 - 5 / 24 * g * x0**2 - c / 2
    )
    return abs(g) * x0**2 * p.y0 / 2 * abs(inner)


@_constant("C9_alpha")
def _c9_alpha(p):
    x0, g = p.x0, p.g
    c = p.b - p.z_d
    led = q_ledger(p, BoundaryKind.ROBIN)
    k = led.d1 + p.m2 / x0**3
    q_op = analytic.optimal_control(ControlProblem.FLUX_Q, BoundaryKind.ROBIN, p)
    stationarity = 2 * q_op * x0 * k + led.d2 * g * x0**2 + led.d3 * c
    inner = -led.b1 / 6 * stationarity + _c7_inner(p, q_op, 1 / require_alpha(p))
    return x0**2 * p.y0 / 2 * abs(g) * abs(inner)


@_constant("C10")
def _c10(p):
    b1 = q_ledger(p, BoundaryKind.DIRICHLET).b1
    return abs(p.g * (b1 - 3)) * p.x0 * math.sqrt(p.x0 * p.y0 / 108)


@_constant("C10_alpha")
def _c10_alpha(p):
    ax = _ax(p)
    b1 = q_ledger(p, BoundaryKind.ROBIN).b1
    radicand = (
        b1**2 * (3 / ax**2 + 3 / ax + 1)
        + 9 * (12 / ax**2 + 6 / ax + 1)
        - 3 * b1 * (12 / ax**2 + 9 / ax + 2)
    )
    return abs(p.g) * p.x0 * math.sqrt(p.x0 * p.y0 / 108) * math.sqrt(radicand)


@_constant("C11")
def _c11(p):
    b1 = q_ledger(p, BoundaryKind.DIRICHLET).b1
    return abs(p.g) / 6 * math.sqrt(p.x0 * p.y0 * (12 - 6 * b1 + b1**2))


@_constant("C11_alpha")
def _c11_alpha(p):
    b1 = q_ledger(p, BoundaryKind.ROBIN).b1
    return abs(p.g) / 6 * math.sqrt(p.x0 * p.y0 * (12 - 6 * b1 + b1**2))


# boundary temperature b

def _c12_inner(p: ProblemParams, b: float, inv_alpha: float) -> float:
    x0, g, q, z, ia = p.x0, p.g, p.q, p.z_d, inv_alpha
    return (
        -b * (x0 / 2 + 2 * ia)
        + g * (-5 * x0**3 / 24 - 7 * x0**2 * ia / 6 - 2 * x0 * ia**2)
        + q * (x0**2 / 3 + 3 * x0 * ia / 2 + 2 * ia**2)
        + z * (x0 / 2 + 2 * ia)
    )


@_constant("C12")
def _c12(p):
    return p.x0 * p.y0 / 2 * abs(p.g) * abs(_c12_inner(p, p.b, 0.0))


@_constant("C12_alpha")
def _c12_alpha(p):
    return p.x0 * p.y0 / 2 * abs(p.g) * abs(_c12_inner(p, p.b, 1 / require_alpha(p)))


@_constant("C13")
def _c13(p):
    return abs(b_ledger(p).e1 * p.g * p.x0)


@_constant("C13_alpha")
def _c13_alpha(p):
    return abs(b_ledger(p).e1) * abs(p.g) * p.x0 * abs(1 + 4 / _ax(p))


@_constant("C14")
def _c14(p):
    x0, g, q, z = p.x0, p.g, p.q, p.z_d
    e1 = b_ledger(p).e1
    b_op = analytic.optimal_control(ControlProblem.AMBIENT_B, BoundaryKind.DIRICHLET, p)
    inner = (
        e1 * (2 * b_op * (1 + p.m3 / x0) + 2 / 3 * g * x0**2 - q * x0 - 2 * z)
        - b_op / 2 + q * x0 / 3 - 5 * g * x0**2 / 24 + z / 2
    )
    return x0**2 * p.y0 * abs(g) / 2 * abs(inner)


@_constant("C14_alpha")
def _c14_alpha(p):
    x0, g, q, z = p.x0, p.g, p.q, p.z_d
    ax, alpha = _ax(p), require_alpha(p)
    e1 = b_ledger(p).e1
    b_op = analytic.optimal_control(ControlProblem.AMBIENT_B, BoundaryKind.ROBIN, p)
    f1 = 0.5 * x0**2 * p.y0 * g * (
        -(b_op - z) * (1 / 2 + 2 / ax)
        + g * x0**2 * (-5 / 24 - 7 / (6 * ax) - 2 / ax**2)
        + q * x0 * (1 / 3 + 3 / (2 * ax) + 2 / ax**2)
    )
    f2 = x0**2 * p.y0 * g / alpha * e1 * (-q + g * x0) * (1 + 4 / ax)
    f3 = x0**2 * p.y0 * g / 2 * e1 * (1 + 4 / ax) * (
        2 * b_op * (1 + p.m3 / x0) + 2 / 3 * g * x0**2 - q * x0 - 2 * z
    )
    return abs(f1 + f2 + f3)


@_constant("C15")
def _c15(p):
    e1 = b_ledger(p).e1
    return p.x0 * abs(p.g) * math.sqrt(p.x0 * p.y0 / 2) * math.sqrt(2 * e1**2 - e1 + 1 / 6)


@_constant("C15_alpha")
def _c15_alpha(p):
    ax = _ax(p)
    e1 = b_ledger(p).e1
    radicand = (
        e1**2 * (2 + 16 / ax + 32 / ax**2)
        + e1 * (-1 - 8 / ax - 16 / ax**2)
        + 1 / 6 + 1 / ax + 2 / ax**2
    )
    return p.x0 * abs(p.g) * math.sqrt(p.x0 * p.y0 / 2) * math.sqrt(radicand)


@_constant("C16")
@_constant("C16_alpha")
def _c16(p):
    # the derivative error does not depend on b, so this is the plain sawtooth bound
    return abs(p.g) * math.sqrt(p.x0 * p.y0 / 3)


@_constant("C16_printed")
def _c16_printed(p):
    return abs(p.g) * math.sqrt(p.x0 * p.y0 / 2)
