"""Finite-difference systems for the one-dimensional reduced heat problem.

The unknowns are the nodal temperatures on x_i = (i-1) h. With a Dirichlet
edge the first node is known (u_1 = b) and the system has n rows; with a
Robin edge all n+1 nodes are unknown. The improved scheme replaces the
two-point boundary differences by eliminated three-point ones, which only
changes the right-hand side.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from app.models import (
    BoundaryKind,
    Grid,
    PiecewiseLinearField,
    ProblemParams,
    SchemeKind,
    ValidationError,
    require_alpha,
)

logger = logging.getLogger(__name__)

PIVOT_TOLERANCE = 1e-14


class SingularSystemError(ArithmeticError):
    """Raised when elimination meets a pivot below PIVOT_TOLERANCE."""


@dataclass(frozen=True, eq=False)
class TridiagonalSystem:
    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    rhs: np.ndarray

    @property
    def size(self) -> int:
        return len(self.diag)

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.sub, -1) + np.diag(self.sup, 1)

    def matvec(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        out = self.diag * v
        out[1:] += self.sub * v[:-1]
        out[:-1] += self.sup * v[1:]
        return out


@dataclass(frozen=True)
class NodalSolution:
    grid: Grid
    values: tuple[float, ...]


def assemble(
    params: ProblemParams,
    grid: Grid,
    scheme: SchemeKind,
    bc: BoundaryKind,
) -> TridiagonalSystem:
    """Build the tridiagonal system for ``scheme`` and ``bc``.

    Dirichlet: n x n, diag (-2, ..., -2, 1), sub (1, ..., 1, -1).
    Robin: (n+1) x (n+1), first diagonal entry -(1 + alpha h).
    """
    n, h = grid.n, grid.h
    g, q, b = params.g, params.q, params.b
    gh2 = g * h * h

    if bc is BoundaryKind.ROBIN:
        alpha = require_alpha(params)
        size = n + 1
    else:
        size = n

    diag = np.full(size, -2.0)
    diag[-1] = 1.0
    sub = np.ones(size - 1)
    sub[-1] = -1.0
    sup = np.ones(size - 1)
    rhs = np.full(size, -gh2)

    if bc is BoundaryKind.ROBIN:
        diag[0] = -(1.0 + alpha * h)
        rhs[0] = -alpha * b * h
    else:
        rhs[0] = -gh2 - b

    if scheme is SchemeKind.IMPROVED:
        rhs[-1] = -q * h + gh2 / 2
        if bc is BoundaryKind.ROBIN:
            rhs[0] = -alpha * b * h - gh2 / 2
    else:
        rhs[-1] = -q * h

    logger.debug("assembled %s/%s system of size %d (h=%g)", bc.value, scheme.value, size, h)
    return TridiagonalSystem(sub=sub, diag=diag, sup=sup, rhs=rhs)


def ghost_point_row(params: ProblemParams, grid: Grid) -> tuple[tuple[float, float], float]:
    """Improved Neumann row built by eliminating a ghost node x_{n+2}.

    The centred flux difference gives u_{n+2} = u_n - 2qh; substituting it
    into the interior equation at x_{n+1} and normalising leaves
    -u_n + u_{n+1} = rhs. Returns ((coef_n, coef_{n+1}), rhs).
    """
    h = grid.h
    gh2 = params.g * h * h
    # u_n - 2 u_{n+1} + u_{n+2} = -g h^2 with u_{n+2} = u_n - 2qh
    coef_n, coef_n1 = 2.0, -2.0
    rhs = -gh2 + 2 * params.q * h
    return (coef_n / -2, coef_n1 / -2), rhs / -2


def residual_norm(system: TridiagonalSystem, x) -> float:
    """Max-norm of A x - rhs."""
    return float(np.max(np.abs(system.matvec(x) - system.rhs)))


def solve_tridiagonal(system: TridiagonalSystem) -> np.ndarray:
    """Thomas elimination without pivoting."""
    m = system.size
    diag = system.diag
    c_prime = np.zeros(max(m - 1, 0))
    d_prime = np.zeros(m)

    pivot = diag[0]
    if abs(pivot) < PIVOT_TOLERANCE:
        raise SingularSystemError("zero pivot in row 1")
    if m > 1:
        c_prime[0] = system.sup[0] / pivot
    d_prime[0] = system.rhs[0] / pivot

    for row in range(1, m):
        pivot = diag[row] - system.sub[row - 1] * c_prime[row - 1]
        if abs(pivot) < PIVOT_TOLERANCE:
            raise SingularSystemError(f"zero pivot in row {row + 1}")
        if row < m - 1:
            c_prime[row] = system.sup[row] / pivot
        d_prime[row] = (system.rhs[row] - system.sub[row - 1] * d_prime[row - 1]) / pivot

    x = np.zeros(m)
    x[-1] = d_prime[-1]
    for row in range(m - 2, -1, -1):
        x[row] = d_prime[row] - c_prime[row] * x[row + 1]
    return x


def solve(
    params: ProblemParams,
    grid: Grid,
    scheme: SchemeKind,
    bc: BoundaryKind,
) -> NodalSolution:
    """Assemble, eliminate and return all n+1 nodal values."""
    system = assemble(params, grid, scheme, bc)
    values = solve_tridiagonal(system)
    logger.debug("n=%d residual %.3e", grid.n, residual_norm(system, values))
    if bc is BoundaryKind.DIRICHLET:
        values = np.concatenate(([params.b], values))
    return NodalSolution(grid=grid, values=tuple(float(v) for v in values))


def explicit_nodal_solution(
    params: ProblemParams,
    grid: Grid,
    scheme: SchemeKind,
    bc: BoundaryKind,
) -> NodalSolution:
    """Closed-form nodal values of the discrete systems."""
    g, q, b, x0 = params.g, params.q, params.b, params.x0
    h = grid.h
    k = np.arange(grid.n + 1, dtype=float)  # i - 1

    if scheme is SchemeKind.IMPROVED:
        values = b + k * h * (g * x0 - q) - (g / 2) * (k * h) ** 2
        if bc is BoundaryKind.ROBIN:
            values = values + (g * x0 - q) / require_alpha(params)
    else:
        values = b + k * h * (g * x0 - q) - h * h * g * (k + 1) * k / 2
        if bc is BoundaryKind.ROBIN:
            alpha = require_alpha(params)
            values = values + (g * x0 - q) / alpha - g * h / alpha

    return NodalSolution(grid=grid, values=tuple(float(v) for v in values))


def interpolate(nodal: NodalSolution) -> PiecewiseLinearField:
    return PiecewiseLinearField(grid=nodal.grid, values=tuple(nodal.values))


def explicit_inverse(
    n: int,
    bc: BoundaryKind,
    alpha: float | None = None,
    h: float | None = None,
) -> np.ndarray:
    """Closed-form inverse of the Dirichlet or Robin matrix."""
    if n < 2:
        raise ValidationError(f"n must be an integer >= 2, got {n}")

    if bc is BoundaryKind.DIRICHLET:
        i = np.arange(1, n + 1, dtype=float)[:, None]
        j = np.arange(1, n + 1, dtype=float)[None, :]
        inverse = -np.minimum(i, j)
        inverse[:, -1] = i[:, 0]
        return inverse

    if alpha is None or h is None:
        raise ValidationError("alpha and h required for the Robin inverse")
    ah = alpha * h
    i = np.arange(1, n + 2, dtype=float)[:, None]
    j = np.arange(1, n + 2, dtype=float)[None, :]
    inverse = -(1.0 + (np.minimum(i, j) - 1.0) * ah)
    inverse[:, -1] = 1.0 + (i[:, 0] - 1.0) * ah
    return inverse / ah


def printed_inverse(
    n: int,
    bc: BoundaryKind,
    alpha: float | None = None,
    h: float | None = None,
) -> np.ndarray:
    """The inverse exactly as displayed in the reference derivation.

    The Robin display shows row 3, last column as -(1 + 2 alpha h) instead
    of the +(1 + 2 alpha h) its own pattern implies; the slip only lands
    inside the matrix when row 3 is not the last row.
    """
    inverse = explicit_inverse(n, bc, alpha, h)
    if bc is BoundaryKind.ROBIN and n + 1 > 3:
        ah = alpha * h
        inverse[2, -1] = -(1.0 + 2.0 * ah) / ah
    return inverse


def inverse_mismatches(
    n: int,
    bc: BoundaryKind,
    alpha: float | None = None,
    h: float | None = None,
    rtol: float = 1e-9,
) -> list[dict]:
    """Entries where the printed inverse disagrees with the derived one.

    The derived inverse comes from solving against identity columns, not
    from the closed form, so the audit is independent of both displays.
    """
    if bc is BoundaryKind.ROBIN:
        params = ProblemParams(alpha=alpha, x0=n * h)
        grid = Grid(n=n, h=h, x0=n * h)
    else:
        params = ProblemParams()
        grid = Grid(n=n, h=1.0 / n, x0=1.0)
    system = assemble(params, grid, SchemeKind.CLASSICAL, bc)

    columns = []
    for col in np.eye(system.size):
        unit = TridiagonalSystem(sub=system.sub, diag=system.diag, sup=system.sup, rhs=col)
        columns.append(solve_tridiagonal(unit))
    derived = np.column_stack(columns)

    printed = printed_inverse(n, bc, alpha, h)
    mismatches: list[dict] = []
    for i, j in zip(*np.nonzero(~np.isclose(printed, derived, rtol=rtol, atol=0.0))):
        mismatches.append({
            "i": int(i) + 1,
            "j": int(j) + 1,
            "printed": float(printed[i, j]),
            "derived": float(derived[i, j]),
        })
    if mismatches:
        logger.warning("printed %s inverse differs in %d entries", bc.value, len(mismatches))
    return mismatches
