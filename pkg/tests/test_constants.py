import math

import pytest

from app.models import BoundaryKind, ControlProblem, ProblemParams, SchemeKind, ValidationError
from app.services.constants import (
    PROBLEM_CONSTANTS,
    UnknownConstantError,
    family,
    lemma_constant,
    names,
    resolve,
)
from app.services.metrics import constant_audit
from app.services.optim import g_ledger


def test_state_constants_reference_values(params):
    assert lemma_constant("C1", params) == pytest.approx(3.6514837, rel=1e-7)
    assert lemma_constant("D1", params) == pytest.approx(0.9128709, rel=1e-7)
    assert lemma_constant("C1_tilde", params) == pytest.approx(10 / math.sqrt(3))


@pytest.mark.parametrize(
    "name, bc, scheme, key",
    [
        ("state", BoundaryKind.DIRICHLET, SchemeKind.CLASSICAL, "C1"),
        ("state", BoundaryKind.ROBIN, SchemeKind.CLASSICAL, "C1_alpha"),
        ("state", BoundaryKind.DIRICHLET, SchemeKind.IMPROVED, "D1"),
        ("state", BoundaryKind.ROBIN, SchemeKind.IMPROVED, "D2"),
        ("derivative", BoundaryKind.ROBIN, SchemeKind.CLASSICAL, "C1_tilde"),
        ("derivative", BoundaryKind.DIRICHLET, SchemeKind.IMPROVED, "D1_tilde"),
        ("C9", None, None, "C9"),
    ],
)
def test_resolve_generic_names(name, bc, scheme, key):
    assert resolve(name, bc, scheme) == key


def test_family_names():
    assert family(ControlProblem.FLUX_Q, "state_opt", BoundaryKind.DIRICHLET) == "C10"
    assert family(ControlProblem.AMBIENT_B, "control", BoundaryKind.ROBIN) == "C13_alpha"


def test_unknown_constant(params):
    with pytest.raises(UnknownConstantError):
        lemma_constant("C99", params)
    with pytest.raises(KeyError):
        lemma_constant("C99", params)


def test_alpha_variant_needs_alpha(params):
    with pytest.raises(ValidationError, match="alpha required"):
        lemma_constant("C8_alpha", params)


def test_every_family_is_registered():
    registered = set(names())
    for kinds in PROBLEM_CONSTANTS.values():
        for base in kinds.values():
            assert base in registered
            assert f"{base}_alpha" in registered


def test_constants_do_not_depend_on_alpha_being_set_for_plain_names():
    with_alpha = ProblemParams(alpha=10.0)
    without = ProblemParams()
    assert lemma_constant("C7", with_alpha) == lemma_constant("C7", without)


def test_cost_constants_agree_at_the_reference_point(params):
    # the fixed-control cost constants coincide when b, q, g sit at their reference values
    assert lemma_constant("C2", params) == pytest.approx(34.583333, rel=1e-7)
    assert lemma_constant("C7", params) == pytest.approx(lemma_constant("C2", params))
    assert lemma_constant("C12", params) == pytest.approx(lemma_constant("C2", params))


@pytest.mark.parametrize(
    "base", sorted({base for kinds in PROBLEM_CONSTANTS.values() for base in kinds.values()})
)
def test_alpha_constants_approach_dirichlet_ones(base):
    dirichlet = lemma_constant(base, ProblemParams())
    robin = lemma_constant(f"{base}_alpha", ProblemParams(alpha=1e4))
    assert robin == pytest.approx(dirichlet, rel=1e-2)


def test_robin_state_bound_decreases_to_dirichlet_bound():
    values = [lemma_constant("C1_alpha", ProblemParams(alpha=a)) for a in (1.0, 10.0, 100.0, 1e4)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(lemma_constant("C1", ProblemParams()), rel=1e-3)


def test_printed_companions_differ_from_corrected_forms():
    params = ProblemParams(alpha=20.0)
    assert lemma_constant("C16_printed", params) / lemma_constant("C16", params) == pytest.approx(
        math.sqrt(1.5)
    )
    assert lemma_constant("C3_alpha_star_printed", params) != lemma_constant("C3_alpha_star", params)


def test_audit_dirichlet_constants_within_band(params):
    audit = constant_audit(params, n=256)
    names_seen = {entry["name"] for entry in audit}
    assert {"C2", "C3", "C4", "C5", "C6", "C11", "C16", "C16_printed"} <= names_seen
    outside = [e["name"] for e in audit if not e["within_band"]]
    assert outside == []


def test_audit_shows_derivative_constant_is_exact(params):
    audit = {e["name"]: e for e in constant_audit(params, n=64)}
    assert audit["C16"]["rel_dev"] == pytest.approx(0.0, abs=1e-9)
    assert audit["C16_printed"]["rel_dev"] == pytest.approx(1 - math.sqrt(2 / 3), rel=1e-6)


def test_distributed_control_ratio_settles_towards_constant(params):
    deviations = []
    for n in (32, 64, 128, 256):
        entry = {e["name"]: e for e in constant_audit(params, n=n)}["C3"]
        deviations.append(entry["rel_dev"])
    assert deviations[-1] < 0.25
    assert all(a > b for a, b in zip(deviations, deviations[1:]))


G_FAMILY = ["C3", "C3_star", "C4", "C5", "C6", "C3_alpha", "C3_alpha_star", "C4_alpha", "C5_alpha", "C6_alpha"]


@pytest.mark.parametrize("name", G_FAMILY)
def test_distributed_constants_defined_without_flux(name):
    at_zero = lemma_constant(name, ProblemParams(q=0.0, alpha=50.0))
    nearby = lemma_constant(name, ProblemParams(q=1e-9, alpha=50.0))
    assert math.isfinite(at_zero)
    assert at_zero == pytest.approx(nearby, rel=1e-6, abs=1e-9)


@pytest.mark.parametrize("bc", list(BoundaryKind))
def test_distributed_control_constant_matches_ledger_form(bc):
    params = ProblemParams(q=-3.0, alpha=30.0)
    ledger = g_ledger(params, bc)
    ax = params.alpha * params.x0
    weight = 5 / 24 if bc is BoundaryKind.DIRICHLET else 5 / 24 + 7 / (6 * ax) + 2 / ax**2
    expected = params.q / (3 * params.x0**2) * (ledger.a2 * ledger.a4 + weight * ledger.a1) / ledger.a4**2
    name = "C3_star" if bc is BoundaryKind.DIRICHLET else "C3_alpha_star"
    assert lemma_constant(name, params) == pytest.approx(expected, rel=1e-12)


def test_audit_without_flux_covers_distributed_family():
    audit = {e["name"]: e for e in constant_audit(ProblemParams(q=0.0), n=64)}
    assert math.isfinite(audit["C3"]["constant"])
    assert math.isfinite(audit["C5"]["constant"])


@pytest.mark.parametrize("alpha", [50.0, 1e3])
def test_audit_robin_constants_within_band(alpha):
    audit = constant_audit(ProblemParams(alpha=alpha), n=256)
    names_seen = {entry["name"] for entry in audit}
    assert {"C3_alpha", "C9_alpha", "C16_alpha", "C3_alpha_star_printed"} <= names_seen
    outside = [e["name"] for e in audit if not e["within_band"] and not e["name"].endswith("_printed")]
    assert outside == []
