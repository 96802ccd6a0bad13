"""Error norms, order fits and the study harnesses built on them.

Norms are L2 over the rectangle: fields are constant in y, so the y
integral is a factor y0 and the x integral is done with 3-point
Gauss-Legendre per subinterval of the merged breakpoints, which is exact
for the piecewise quartic integrands that arise here.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from app.models import (
    BoundaryKind,
    ControlProblem,
    ProblemParams,
    QuadraticState,
    SchemeKind,
    ValidationError,
    make_grid,
    validate,
)
from app.services import analytic, optim
from app.services.constants import family, lemma_constant
from app.services.fdm import explicit_nodal_solution, interpolate

logger = logging.getLogger(__name__)

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(3)

TABLE1_PARAMS = ProblemParams(x0=1.0, y0=1.0, g=10.0, q=12.0, b=30.0, z_d=40.0)
TABLE1_ALPHAS = (50.0, 100.0, 200.0)
# n -> (Dirichlet, alpha=50, alpha=100, alpha=200)
TABLE1_REFERENCE = {
    4: (7.675914e-1, 8.120374e-1, 7.897314e-1, 7.786397e-1),
    8: (3.722243e-1, 3.942740e-1, 3.832039e-1, 3.777023e-1),
    16: (1.832549e-1, 1.942324e-1, 1.887200e-1, 1.859813e-1),
    32: (9.091783e-2, 9.639423e-2, 9.364392e-2, 9.227771e-2),
    64: (4.528211e-2, 4.801716e-2, 4.664351e-2, 4.596121e-2),
}

STUDY_KINDS = ("state", "derivative", "control", "cost", "state_opt", "derivative_opt")
SWEEP_TARGETS = (
    "state", "state_discrete", "state_robin",
    "control_g", "control_q", "control_b",
    "cost_g", "cost_q", "cost_b",
)


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class ErrorRecord:
    n: int
    h: float
    err: float
    bound: float
    kind: str
    alpha: float | None = None
    order: int = 1

    @property
    def ratio(self) -> float:
        return self.err / self.h**self.order


@dataclass(frozen=True)
class OrderFit:
    slope: float
    intercept: float
    residual: float


@dataclass(frozen=True)
class SweepRecord:
    n: int
    h: float
    alpha: float
    err: float
    target: str


def _check_domain(field, x0: float) -> None:
    bp = np.asarray(field.breakpoints, dtype=float)
    if bp.size and (abs(bp[0]) > 1e-12 * x0 or abs(bp[-1] - x0) > 1e-12 * x0):
        raise ValidationError(
            f"field defined on [{bp[0]:g}, {bp[-1]:g}], expected [0, {x0:g}]"
        )


def l2_diff(a, b, x0: float, y0: float) -> float:
    """||a - b|| in L2 of [0, x0] x [0, y0] for y-independent fields."""
    _check_domain(a, x0)
    _check_domain(b, x0)
    breaks = np.union1d(
        np.union1d(np.asarray(a.breakpoints, dtype=float), np.asarray(b.breakpoints, dtype=float)),
        [0.0, x0],
    )
    mid = 0.5 * (breaks[1:] + breaks[:-1])
    half = 0.5 * (breaks[1:] - breaks[:-1])
    x = mid[:, None] + half[:, None] * _GAUSS_NODES[None, :]
    diff = a(x) - b(x)
    integral = float(np.sum(half * (diff**2 @ _GAUSS_WEIGHTS)))
    return math.sqrt(y0 * integral)


def l2_diff_derivative(a, b, x0: float, y0: float) -> float:
    return l2_diff(a.derivative(), b.derivative(), x0, y0)


def quadrature_cost(
    problem: ControlProblem,
    params: ProblemParams,
    state,
) -> float:
    """Tracking plus regularisation cost of ``state`` by quadrature.

    ||g||^2 = g^2 x0 y0, ||q||^2 = q^2 y0, ||b||^2 = b^2 y0.
    """
    target = QuadraticState(0.0, 0.0, params.z_d)
    tracking = l2_diff(state, target, params.x0, params.y0) ** 2
    control = params.control(problem)
    if problem is ControlProblem.SOURCE_G:
        norm2 = control**2 * params.x0 * params.y0
    else:
        norm2 = control**2 * params.y0
    return 0.5 * tracking + 0.5 * params.weight(problem) * norm2


def fit_order(records: list[ErrorRecord]) -> OrderFit:
    """Least-squares slope of log(err) against log(h).

    Machine-zero errors are dropped before fitting.
    """
    hs = [r.h for r in records]
    if any(later >= earlier for earlier, later in zip(hs, hs[1:])):
        raise FitError("records must have strictly decreasing h")
    if any(r.err < 0 for r in records):
        raise FitError("errors must be non-negative")
    usable = [r for r in records if r.err > 0]
    if len(usable) < 3:
        raise FitError(f"need at least 3 positive errors to fit an order, got {len(usable)}")

    log_h = np.log([r.h for r in usable])
    log_err = np.log([r.err for r in usable])
    slope, intercept = np.polyfit(log_h, log_err, 1)
    residual = float(np.max(np.abs(log_err - (slope * log_h + intercept))))
    logger.debug("fitted order %.6f over %d levels", slope, len(usable))
    return OrderFit(slope=float(slope), intercept=float(intercept), residual=residual)


def optimum_gap(
    problem: ControlProblem,
    kind: str,
    params: ProblemParams,
    n: int,
    bc: BoundaryKind,
    reference_bc: BoundaryKind | None = None,
) -> float:
    """Distance between the discrete optimum for ``bc`` and a continuous one.

    kind: cost (fixed control), control, cost_opt, state_opt, derivative_opt.
    The continuous reference uses ``reference_bc`` (default ``bc``).
    """
    reference_bc = reference_bc or bc
    grid = make_grid(params.x0, n)
    x0, y0 = params.x0, params.y0

    if kind == "cost":
        control = params.control(problem)
        return abs(
            optim.discrete_cost(problem, bc, params, grid, control)
            - analytic.continuous_cost(problem, reference_bc, params, control)
        )

    continuous = analytic.continuous_optimum(problem, reference_bc, params)
    discrete = optim.discrete_optimum(problem, bc, params, grid)
    if kind == "control":
        return abs(discrete.control_star - continuous.control_star)
    if kind == "cost_opt":
        return abs(discrete.cost_star - continuous.cost_star)
    if kind == "state_opt":
        return l2_diff(continuous.state_star, discrete.state_star, x0, y0)
    if kind == "derivative_opt":
        return l2_diff_derivative(continuous.state_star, discrete.state_star, x0, y0)
    raise ValidationError(f"unknown optimum comparison {kind!r}")


def _study_record(
    params: ProblemParams,
    scheme: SchemeKind,
    bc: BoundaryKind,
    n: int,
    kind: str,
    problem: ControlProblem | None,
) -> ErrorRecord:
    grid = make_grid(params.x0, n)
    h = grid.h
    alpha = params.alpha if bc is BoundaryKind.ROBIN else None

    if kind in ("state", "derivative"):
        exact = analytic.continuous_state(params, bc)
        approx = interpolate(explicit_nodal_solution(params, grid, scheme, bc))
        if kind == "state":
            err = l2_diff(exact, approx, params.x0, params.y0)
            order = 2 if scheme is SchemeKind.IMPROVED else 1
        else:
            err = l2_diff_derivative(exact, approx, params.x0, params.y0)
            order = 1
        bound = lemma_constant(kind, params, bc, scheme) * h**order
        return ErrorRecord(n=n, h=h, err=err, bound=bound, kind=kind, alpha=alpha, order=order)

    comparison = "cost_opt" if kind == "cost" else kind
    err = optimum_gap(problem, comparison, params, n, bc)
    bound = lemma_constant(family(problem, comparison, bc), params) * h
    return ErrorRecord(n=n, h=h, err=err, bound=bound, kind=kind, alpha=alpha)


def error_study(
    params: ProblemParams,
    scheme: SchemeKind,
    bc: BoundaryKind,
    n_list: list[int],
    kind: str = "state",
    problem: ControlProblem | None = None,
    workers: int = 1,
) -> list[ErrorRecord]:
    """One ErrorRecord per n, ordered by decreasing h."""
    validate(params, bc)
    if kind not in STUDY_KINDS:
        raise ValidationError(f"unknown study {kind!r}")
    if kind not in ("state", "derivative"):
        if problem is None:
            raise ValidationError(f"study {kind!r} needs a control problem")
        if scheme is not SchemeKind.CLASSICAL:
            raise ValidationError("optimal-control studies use the classical scheme")
    for n in n_list:
        make_grid(params.x0, n)

    ordered = sorted(set(n_list))
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        records = list(pool.map(
            lambda n: _study_record(params, scheme, bc, n, kind, problem), ordered
        ))
    return records


def state_error_study(
    params: ProblemParams,
    scheme: SchemeKind,
    bc: BoundaryKind,
    n_list: list[int],
) -> list[ErrorRecord]:
    return error_study(params, scheme, bc, n_list, kind="state")


def _sweep_point(params: ProblemParams, n: int, alpha: float, target: str) -> SweepRecord:
    robin = replace(params, alpha=alpha)
    grid = make_grid(params.x0, n)

    if target in ("state", "state_discrete", "state_robin"):
        approx = interpolate(
            explicit_nodal_solution(robin, grid, SchemeKind.CLASSICAL, BoundaryKind.ROBIN)
        )
        if target == "state":
            reference = analytic.continuous_state(params, BoundaryKind.DIRICHLET)
        elif target == "state_robin":
            reference = analytic.continuous_state(robin, BoundaryKind.ROBIN)
        else:
            reference = interpolate(
                explicit_nodal_solution(params, grid, SchemeKind.CLASSICAL, BoundaryKind.DIRICHLET)
            )
        err = l2_diff(reference, approx, params.x0, params.y0)
    else:
        kind, letter = target.split("_")
        problem = ControlProblem(letter)
        comparison = "cost_opt" if kind == "cost" else "control"
        err = optimum_gap(problem, comparison, robin, n, BoundaryKind.ROBIN, BoundaryKind.DIRICHLET)

    return SweepRecord(n=n, h=grid.h, alpha=alpha, err=err, target=target)


def double_limit_sweep(
    params: ProblemParams,
    n_list: list[int],
    alpha_list: list[float],
    target: str = "state",
    workers: int = 1,
) -> list[SweepRecord]:
    """Robin discrete results against the Dirichlet reference on an (n, alpha) grid.

    Points are computed concurrently and returned sorted by (n, alpha).
    """
    if target not in SWEEP_TARGETS:
        raise ValidationError(f"unknown sweep target {target!r}")
    if not n_list:
        raise ValidationError("n_list must not be empty")
    if not alpha_list:
        raise ValidationError("alpha_list must not be empty")
    validate(params, BoundaryKind.DIRICHLET)
    for alpha in alpha_list:
        if not alpha > 0:
            raise ValidationError("alpha must be positive")
    for n in n_list:
        make_grid(params.x0, n)

    keys = sorted({(int(n), float(a)) for n in n_list for a in alpha_list})
    results: dict[tuple[int, float], SweepRecord] = {}
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = {key: pool.submit(_sweep_point, params, key[0], key[1], target) for key in keys}
        for key, future in futures.items():
            results[key] = future.result()
    return [results[key] for key in keys]


def table1(workers: int = 1) -> list[dict]:
    """L2 state errors for the reference data, classical scheme.

    One row per n with the Dirichlet error followed by the Robin errors for
    each alpha in TABLE1_ALPHAS.
    """
    n_list = sorted(TABLE1_REFERENCE)
    columns = [error_study(TABLE1_PARAMS, SchemeKind.CLASSICAL, BoundaryKind.DIRICHLET, n_list, workers=workers)]
    for alpha in TABLE1_ALPHAS:
        robin = replace(TABLE1_PARAMS, alpha=alpha)
        columns.append(error_study(robin, SchemeKind.CLASSICAL, BoundaryKind.ROBIN, n_list, workers=workers))

    rows = []
    for idx, n in enumerate(n_list):
        rows.append({
            "n": n,
            "h": columns[0][idx].h,
            "values": [column[idx].err for column in columns],
        })
    return rows


def table1_mismatches(rows: list[dict], rtol: float = 1e-5) -> list[dict]:
    labels = ["dirichlet"] + [f"alpha={alpha:g}" for alpha in TABLE1_ALPHAS]
    mismatches = []
    for row in rows:
        for label, actual, expected in zip(labels, row["values"], TABLE1_REFERENCE[row["n"]]):
            rel = abs(actual - expected) / abs(expected)
            if rel > rtol:
                mismatches.append({
                    "n": row["n"],
                    "column": label,
                    "expected": expected,
                    "actual": actual,
                    "rel_err": rel,
                })
    if mismatches:
        logger.warning("table reproduction: %d entries out of tolerance", len(mismatches))
    return mismatches


def constant_audit(
    params: ProblemParams,
    n: int = 256,
    band: float = 0.25,
) -> list[dict]:
    """Compare each "approximately C h" constant with its ratio at mesh ``n``.

    Robin entries are included when ``params.alpha`` is set.
    """
    bcs = [BoundaryKind.DIRICHLET]
    if params.alpha is not None:
        bcs.append(BoundaryKind.ROBIN)
    h = params.x0 / n

    entries: list[tuple[str, float]] = []
    for bc in bcs:
        for problem in ControlProblem:
            for kind in ("cost", "control", "cost_opt", "state_opt", "derivative_opt"):
                name = family(problem, kind, bc)
                entries.append((name, optimum_gap(problem, kind, params, n, bc) / h))
    entries.append(("C16_printed", optimum_gap(ControlProblem.AMBIENT_B, "derivative_opt", params, n, BoundaryKind.DIRICHLET) / h))
    if params.alpha is not None:
        entries.append((
            "C3_alpha_star_printed",
            optimum_gap(ControlProblem.SOURCE_G, "control", params, n, BoundaryKind.ROBIN) / h,
        ))

    audit = []
    for name, empirical in entries:
        constant = abs(lemma_constant(name, params))
        rel_dev = abs(empirical - constant) / constant if constant else math.inf
        audit.append({
            "name": name,
            "constant": constant,
            "empirical": empirical,
            "rel_dev": rel_dev,
            "within_band": rel_dev <= band,
        })
        if rel_dev > band:
            logger.warning("%s: constant %.6g vs empirical %.6g", name, constant, empirical)
    return audit


def state_profiles(
    params: ProblemParams,
    bc: BoundaryKind,
    n_list: list[int],
    scheme: SchemeKind = SchemeKind.CLASSICAL,
    samples: int = 101,
) -> list[dict]:
    """Exact and interpolated discrete states sampled on [0, x0], long format."""
    validate(params, bc)
    if samples < 2:
        raise ValidationError("samples must be >= 2")
    xs = np.linspace(0.0, params.x0, samples)
    series = [("exact", analytic.continuous_state(params, bc))]
    for n in sorted(set(n_list)):
        grid = make_grid(params.x0, n)
        series.append((f"n={n}", interpolate(explicit_nodal_solution(params, grid, scheme, bc))))

    return [
        {"series": label, "x": float(x), "u": float(u)}
        for label, field in series
        for x, u in zip(xs, field(xs))
    ]


def cost_curves(
    problem: ControlProblem,
    bc: BoundaryKind,
    params: ProblemParams,
    n_list: list[int],
    controls,
) -> list[dict]:
    """J and J^h against the control value, long format."""
    validate(params, bc)
    grids = [make_grid(params.x0, n) for n in sorted(set(n_list))]
    rows = []
    for control in controls:
        rows.append({
            "series": "continuous",
            "control": float(control),
            "cost": analytic.continuous_cost(problem, bc, params, control),
        })
        for grid in grids:
            rows.append({
                "series": f"n={grid.n}",
                "control": float(control),
                "cost": optim.discrete_cost(problem, bc, params, grid, control),
            })
    return rows
