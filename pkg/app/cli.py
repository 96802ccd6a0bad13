"""``heatfd`` command group: solves, optima, studies and tables as CSV."""
import functools
import json
import logging

import click
import numpy as np
from flask import current_app
from flask.cli import AppGroup

from app.models import (
    BoundaryKind,
    ControlProblem,
    RunConfig,
    SchemeKind,
    ValidationError,
    make_grid,
    normalize_keys,
    parse_list,
    run_config_from,
    validate,
)
from app.services import analytic, fdm, metrics, optim
from app.services.constants import UnknownConstantError, family, lemma_constant
from app.services.fdm import SingularSystemError
from app.services.metrics import FitError
from app.services.optim import NonConvexError
from app.services.report import emit, render_csv

logger = logging.getLogger(__name__)

heatfd = AppGroup("heatfd", help="Finite-difference heat conduction and optimal control runs.")


def run_options(f):
    options = [
        click.option("--config", "config", type=click.Path(exists=True, dir_okay=False),
                     help="JSON file with flat keys mirroring the flags."),
        click.option("--out", type=click.Path(dir_okay=False), help="Write CSV here instead of stdout."),
        click.option("--bc", type=click.Choice([b.value for b in BoundaryKind])),
        click.option("--scheme", type=click.Choice([s.value for s in SchemeKind])),
        click.option("--problem", type=click.Choice([p.value for p in ControlProblem])),
        click.option("--n", type=int),
        click.option("--n-list", "n_list", help="Comma-separated mesh counts."),
        click.option("--alpha", type=float),
        click.option("--alpha-list", "alpha_list", help="Comma-separated alpha values."),
        click.option("--x0", type=float),
        click.option("--y0", type=float),
        click.option("--g", type=float),
        click.option("--q", type=float),
        click.option("--b", type=float),
        click.option("--zd", "z_d", type=float),
        click.option("--m1", type=float),
        click.option("--m2", type=float),
        click.option("--m3", type=float),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def exit_codes(f):
    """Usage errors exit 2, computational failures exit 1."""

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except (ValidationError, UnknownConstantError, FitError) as e:
            raise click.UsageError(e.args[0] if e.args else str(e)) from e
        except (SingularSystemError, NonConvexError) as e:
            raise click.ClickException(str(e)) from e

    return wrapper


def _load_config_file(path: str, allowed: set[str]) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as e:
        raise click.UsageError(f"config file is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise click.UsageError("config file must hold a JSON object")
    return normalize_keys(raw, allowed)


def merge_options(kwargs: dict) -> dict:
    """Flags override the config file, which overrides the app defaults."""
    kwargs = dict(kwargs)
    path = kwargs.pop("config", None)
    merged = {}
    if path:
        merged.update(_load_config_file(path, allowed=set(kwargs)))
    merged.update({k: v for k, v in kwargs.items() if v is not None and v is not False})
    return merged


def build_run_config(merged: dict) -> RunConfig:
    cfg = run_config_from(merged, current_app.config)
    logger.debug("effective config: %s", cfg.describe())
    return cfg


def _write(cfg: RunConfig, header, rows, footer=None, comments=None) -> None:
    digits = current_app.config["CSV_SIGNIFICANT_DIGITS"]
    text = render_csv(header, rows, comments=[cfg.describe(), *(comments or [])], footer=footer, digits=digits)
    emit(text, cfg.out)


def _require_n(cfg: RunConfig) -> int:
    if cfg.n is None:
        raise click.UsageError("--n is required")
    return cfg.n


def _require_problem(cfg: RunConfig) -> ControlProblem:
    if cfg.problem is None:
        raise click.UsageError("--problem is required")
    return cfg.problem


@heatfd.command("solve")
@run_options
@exit_codes
def solve(**kwargs):
    """Nodal solution of one discrete system against the exact state."""
    cfg = build_run_config(merge_options(kwargs))
    params = validate(cfg.params, cfg.bc)
    grid = make_grid(params.x0, _require_n(cfg))

    nodal = fdm.solve(params, grid, cfg.scheme, cfg.bc)
    exact = analytic.continuous_state(params, cfg.bc)
    rows = []
    for i, (x, u_h) in enumerate(zip(grid.nodes, nodal.values), start=1):
        u = float(exact(x))
        rows.append([i, float(x), u_h, u, abs(u_h - u)])
    _write(cfg, ["i", "x_i", "u_h", "u_exact", "abs_err"], rows)


@heatfd.command("optimize")
@run_options
@click.option("--continuous", is_flag=True, help="Report the continuous optimum only.")
@exit_codes
def optimize(**kwargs):
    """Discrete and continuous optimal control for one problem."""
    merged = merge_options(kwargs)
    cfg = build_run_config(merged)
    problem = _require_problem(cfg)
    params = validate(cfg.params, cfg.bc)
    continuous = analytic.continuous_optimum(problem, cfg.bc, params)

    if merged.get("continuous"):
        row = [problem.value, cfg.bc.value, None, None, continuous.control_star,
               continuous.cost_star, continuous.control_star, 0.0, None]
    else:
        grid = make_grid(params.x0, _require_n(cfg))
        discrete = optim.discrete_optimum(problem, cfg.bc, params, grid)
        bound = lemma_constant(family(problem, "control", cfg.bc), params) * grid.h
        row = [problem.value, cfg.bc.value, grid.n, grid.h, discrete.control_star,
               discrete.cost_star, continuous.control_star,
               discrete.control_star - continuous.control_star, bound]

    header = ["problem", "bc", "n", "h", "control_star", "cost_star",
              "continuous_control_star", "gap", "lemma_constant_times_h"]
    _write(cfg, header, [row])


@heatfd.command("converge")
@run_options
@click.option("--study", type=click.Choice(metrics.STUDY_KINDS))
@exit_codes
def converge(**kwargs):
    """Error study over --n-list with a fitted observed order."""
    merged = merge_options(kwargs)
    cfg = build_run_config(merged)
    study = merged.get("study", "state")
    if study not in metrics.STUDY_KINDS:
        raise click.UsageError(f"unknown study {study!r}")
    if len(cfg.n_list) < 3:
        raise click.UsageError("--n-list needs at least 3 entries")

    records = metrics.error_study(
        cfg.params, cfg.scheme, cfg.bc, list(cfg.n_list),
        kind=study, problem=cfg.problem,
        workers=current_app.config["SWEEP_WORKERS"],
    )
    fit = metrics.fit_order(records)
    rows = [[r.n, r.h, r.err, r.bound, r.ratio] for r in records]
    footer = [f"study={study} fitted_order={fit.slope:.6f} intercept={fit.intercept:.6f} residual={fit.residual:.3e}"]
    _write(cfg, ["n", "h", "err", "bound", "ratio"], rows, footer=footer)


@heatfd.command("sweep")
@run_options
@click.option("--target", type=click.Choice(metrics.SWEEP_TARGETS))
@exit_codes
def sweep(**kwargs):
    """Robin discrete results against the Dirichlet reference over (n, alpha)."""
    merged = merge_options(kwargs)
    cfg = build_run_config(merged)
    workers = current_app.config["SWEEP_WORKERS"]

    if "target" in merged:
        targets = [merged["target"]]
    else:
        targets = ["state"]
        if cfg.problem is not None:
            targets.append(f"control_{cfg.problem.value}")

    columns = [
        metrics.double_limit_sweep(cfg.params, list(cfg.n_list), list(cfg.alpha_list), target, workers)
        for target in targets
    ]
    header = ["n", "h", "alpha"] + [f"err_{t}" if "target" in merged else f"err_{t.split('_')[0]}" for t in targets]
    rows = []
    for records in zip(*columns):
        first = records[0]
        rows.append([first.n, first.h, first.alpha, *(r.err for r in records)])
    _write(cfg, header, rows)


@heatfd.command("table1")
@click.option("--out", type=click.Path(dir_okay=False))
@exit_codes
def table1(out):
    """Reproduce the reference L2 error table; exit 1 on any deviation."""
    cfg = RunConfig(params=metrics.TABLE1_PARAMS, out=out)
    rows = metrics.table1(workers=current_app.config["SWEEP_WORKERS"])
    mismatches = metrics.table1_mismatches(rows, rtol=current_app.config["TABLE1_RTOL"])

    header = ["h", "dirichlet"] + [f"alpha={a:g}" for a in metrics.TABLE1_ALPHAS]
    _write(cfg, header, [[row["h"], *row["values"]] for row in rows])
    if mismatches:
        for m in mismatches:
            click.echo(
                f"n={m['n']} {m['column']}: expected {m['expected']:.7e} got {m['actual']:.7e}",
                err=True,
            )
        raise click.ClickException(f"{len(mismatches)} table entries out of tolerance")


@heatfd.command("audit")
@run_options
@exit_codes
def audit(**kwargs):
    """Compare every error-estimate constant with its empirical ratio."""
    cfg = build_run_config(merge_options(kwargs))
    n = cfg.n or 256
    entries = metrics.constant_audit(cfg.params, n=n, band=current_app.config["RATIO_BAND"])
    rows = [[e["name"], e["constant"], e["empirical"], e["rel_dev"], e["within_band"]] for e in entries]
    _write(cfg, ["name", "constant", "empirical", "rel_dev", "within_band"], rows)

    outside = [e["name"] for e in entries if not e["within_band"]]
    if outside:
        raise click.ClickException(f"outside the ratio band: {', '.join(outside)}")


@heatfd.command("profile")
@run_options
@click.option("--samples", type=int, default=101, show_default=True)
@exit_codes
def profile(samples, **kwargs):
    """Exact and discrete state samples for plotting."""
    cfg = build_run_config(merge_options(kwargs))
    rows = metrics.state_profiles(cfg.params, cfg.bc, list(cfg.n_list), cfg.scheme, samples)
    _write(cfg, ["series", "x", "u"], [[r["series"], r["x"], r["u"]] for r in rows])


@heatfd.command("costcurve")
@run_options
@click.option("--controls", help="Comma-separated control values (default: 21 around the optimum).")
@exit_codes
def costcurve(controls, **kwargs):
    """Continuous and discrete cost against the control value."""
    cfg = build_run_config(merge_options(kwargs))
    problem = _require_problem(cfg)
    params = validate(cfg.params, cfg.bc)
    values = parse_list(controls, float, "controls")
    if not values:
        center = analytic.optimal_control(problem, cfg.bc, params)
        values = list(np.linspace(center - 10.0, center + 10.0, 21))

    rows = metrics.cost_curves(problem, cfg.bc, params, list(cfg.n_list), values)
    _write(cfg, ["series", "control", "cost"], [[r["series"], r["control"], r["cost"]] for r in rows])


def main():
    from app import create_app

    app = create_app()
    with app.app_context():
        heatfd.main(prog_name="heatfd")
