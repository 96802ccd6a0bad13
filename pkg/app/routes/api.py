from dataclasses import asdict

from flask import Blueprint, current_app, jsonify, request

from app.models import PARAM_FIELDS, ValidationError, make_grid, normalize_keys, run_config_from, validate
from app.services import analytic, fdm, metrics, optim
from app.services.constants import family, lemma_constant, names

api_bp = Blueprint("api", __name__)

RUN_KEYS = set(PARAM_FIELDS) | {
    "bc", "scheme", "problem", "n", "n_list", "alpha_list", "study", "target", "continuous",
}


def _payload() -> dict:
    data = request.get_json(silent=True)
    if data is None:
        data = request.args.to_dict()
    if not isinstance(data, dict):
        raise ValidationError("request body must be a JSON object")
    return normalize_keys(data, RUN_KEYS)


def _run_config(values: dict):
    return run_config_from(values, current_app.config)


@api_bp.route("/solve", methods=["POST"])
def solve():
    cfg = _run_config(_payload())
    params = validate(cfg.params, cfg.bc)
    if cfg.n is None:
        raise ValidationError("n is required")
    grid = make_grid(params.x0, cfg.n)

    nodal = fdm.solve(params, grid, cfg.scheme, cfg.bc)
    exact = analytic.continuous_state(params, cfg.bc)
    nodes = []
    for i, (x, u_h) in enumerate(zip(grid.nodes, nodal.values), start=1):
        u = float(exact(x))
        nodes.append({"i": i, "x": float(x), "u_h": u_h, "u_exact": u, "abs_err": abs(u_h - u)})
    return jsonify({"h": grid.h, "nodes": nodes})


@api_bp.route("/optimize", methods=["POST"])
def optimize():
    values = _payload()
    cfg = _run_config(values)
    if cfg.problem is None:
        raise ValidationError("problem is required")
    params = validate(cfg.params, cfg.bc)
    continuous = analytic.continuous_optimum(cfg.problem, cfg.bc, params)

    if values.get("continuous"):
        return jsonify({
            "control_star": continuous.control_star,
            "cost_star": continuous.cost_star,
            "continuous_control_star": continuous.control_star,
            "gap": 0.0,
            "bound": None,
        })

    if cfg.n is None:
        raise ValidationError("n is required")
    grid = make_grid(params.x0, cfg.n)
    discrete = optim.discrete_optimum(cfg.problem, cfg.bc, params, grid)
    return jsonify({
        "control_star": discrete.control_star,
        "cost_star": discrete.cost_star,
        "continuous_control_star": continuous.control_star,
        "gap": discrete.control_star - continuous.control_star,
        "bound": lemma_constant(family(cfg.problem, "control", cfg.bc), params) * grid.h,
    })


@api_bp.route("/converge", methods=["POST"])
def converge():
    values = _payload()
    cfg = _run_config(values)
    records = metrics.error_study(
        cfg.params, cfg.scheme, cfg.bc, list(cfg.n_list),
        kind=values.get("study", "state"), problem=cfg.problem,
        workers=current_app.config["SWEEP_WORKERS"],
    )
    fit = metrics.fit_order(records)
    return jsonify({
        "records": [{**asdict(r), "ratio": r.ratio} for r in records],
        "fit": asdict(fit),
    })


@api_bp.route("/sweep", methods=["POST"])
def sweep():
    values = _payload()
    cfg = _run_config(values)
    records = metrics.double_limit_sweep(
        cfg.params, list(cfg.n_list), list(cfg.alpha_list),
        target=values.get("target", "state"),
        workers=current_app.config["SWEEP_WORKERS"],
    )
    return jsonify({"records": [asdict(r) for r in records]})


@api_bp.route("/table1")
def table1():
    rows = metrics.table1(workers=current_app.config["SWEEP_WORKERS"])
    mismatches = metrics.table1_mismatches(rows, rtol=current_app.config["TABLE1_RTOL"])
    return jsonify({"rows": rows, "mismatches": mismatches})


@api_bp.route("/constants", methods=["GET", "POST"])
def constants():
    cfg = _run_config(_payload())
    params = cfg.params
    table = {}
    for name in names():
        # alpha variants are skipped when no alpha is given
        if "alpha" in name and params.alpha is None:
            continue
        table[name] = lemma_constant(name, params)
    return jsonify({"params": params.to_dict(), "constants": table})
