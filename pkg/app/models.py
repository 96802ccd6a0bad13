"""Domain value types shared by the solver, optimisation and study services."""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np


class ValidationError(ValueError):
    """Raised when parameters, grids or run configuration are invalid."""


class SchemeKind(str, enum.Enum):
    CLASSICAL = "classical"  # two-point boundary differences
    IMPROVED = "improved"  # three-point boundary differences


class BoundaryKind(str, enum.Enum):
    DIRICHLET = "dirichlet"  # u = b on the left edge
    ROBIN = "robin"  # -du/dn = alpha (u - b) on the left edge


class ControlProblem(str, enum.Enum):
    SOURCE_G = "g"  # distributed energy g
    FLUX_Q = "q"  # boundary flux q
    AMBIENT_B = "b"  # boundary temperature b

    @property
    def weight_field(self) -> str:
        return {"g": "m1", "q": "m2", "b": "m3"}[self.value]


@dataclass(frozen=True)
class ProblemParams:
    x0: float = 1.0
    y0: float = 1.0
    g: float = 10.0
    q: float = 12.0
    b: float = 30.0
    z_d: float = 40.0
    m1: float = 1.0
    m2: float = 1.0
    m3: float = 1.0
    alpha: float | None = None

    def with_control(self, problem: ControlProblem, value: float) -> ProblemParams:
        """Return a copy with the controlled field (g, q or b) replaced."""
        return replace(self, **{problem.value: float(value)})

    def control(self, problem: ControlProblem) -> float:
        return getattr(self, problem.value)

    def weight(self, problem: ControlProblem) -> float:
        return getattr(self, problem.weight_field)

    def to_dict(self) -> dict:
        return asdict(self)


def validate(params: ProblemParams, bc: BoundaryKind) -> ProblemParams:
    """Check every invariant of ``params`` for boundary ``bc``.

    Returns the params unchanged; raises ValidationError naming the first
    violated constraint.
    """
    for name in ("x0", "y0"):
        value = getattr(params, name)
        if not math.isfinite(value) or value <= 0:
            raise ValidationError(f"{name} must be positive")
    for name in ("g", "q", "b", "z_d"):
        if not math.isfinite(getattr(params, name)):
            raise ValidationError(f"{name} must be finite")
    for name in ("m1", "m2", "m3"):
        value = getattr(params, name)
        if not math.isfinite(value) or value <= 0:
            raise ValidationError(f"{name} must be positive")
    if bc is BoundaryKind.ROBIN:
        require_alpha(params)
    elif params.alpha is not None and not params.alpha > 0:
        raise ValidationError("alpha must be positive")
    return params


def require_alpha(params: ProblemParams) -> float:
    if params.alpha is None:
        raise ValidationError("alpha required for the Robin problem")
    if not math.isfinite(params.alpha) or params.alpha <= 0:
        raise ValidationError("alpha must be positive")
    return params.alpha


@dataclass(frozen=True)
class Grid:
    n: int
    h: float
    x0: float

    @property
    def nodes(self) -> np.ndarray:
        # x_i = (i-1) h, last node pinned to x0
        nodes = np.arange(self.n + 1, dtype=float) * self.h
        nodes[-1] = self.x0
        return nodes


def make_grid(x0: float, n: int) -> Grid:
    if not x0 > 0:
        raise ValidationError("x0 must be positive")
    if int(n) != n or n < 2:
        raise ValidationError(f"n must be an integer >= 2, got {n}")
    return Grid(n=int(n), h=x0 / n, x0=x0)


@dataclass(frozen=True)
class QuadraticState:
    """u(x) = c2 x^2 + c1 x + c0, constant in y."""

    c2: float
    c1: float
    c0: float

    breakpoints: tuple = field(default=(), init=False, repr=False)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return (self.c2 * x + self.c1) * x + self.c0

    def derivative(self) -> QuadraticState:
        return QuadraticState(0.0, 2.0 * self.c2, self.c1)


@dataclass(frozen=True)
class PiecewiseLinearField:
    grid: Grid
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != self.grid.n + 1:
            raise ValidationError(
                f"expected {self.grid.n + 1} nodal values, got {len(self.values)}"
            )

    @property
    def breakpoints(self) -> np.ndarray:
        return self.grid.nodes

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self.grid.nodes, self.values)

    def slopes(self) -> np.ndarray:
        return np.diff(np.asarray(self.values, dtype=float)) / self.grid.h

    def intercepts(self) -> np.ndarray:
        """Intercept of the linear piece on each [x_i, x_{i+1}]."""
        values = np.asarray(self.values, dtype=float)
        return values[:-1] - self.slopes() * self.grid.nodes[:-1]

    def derivative(self) -> PiecewiseConstantField:
        return PiecewiseConstantField(self.grid, tuple(self.slopes()))


@dataclass(frozen=True)
class PiecewiseConstantField:
    """x-derivative of a piecewise linear field; one value per subinterval."""

    grid: Grid
    values: tuple[float, ...]

    @property
    def breakpoints(self) -> np.ndarray:
        return self.grid.nodes

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(self.grid.nodes, x, side="right") - 1, 0, self.grid.n - 1)
        return np.asarray(self.values, dtype=float)[idx]


@dataclass(frozen=True)
class RunConfig:
    params: ProblemParams
    scheme: SchemeKind = SchemeKind.CLASSICAL
    bc: BoundaryKind = BoundaryKind.DIRICHLET
    problem: ControlProblem | None = None
    n: int | None = None
    n_list: tuple[int, ...] = ()
    alpha_list: tuple[float, ...] = ()
    out: str | None = None

    def describe(self) -> str:
        """One-line effective configuration for CSV comment headers."""
        p = self.params
        parts = [
            f"bc={self.bc.value}",
            f"scheme={self.scheme.value}",
            f"problem={self.problem.value if self.problem else '-'}",
            f"x0={p.x0!r}",
            f"y0={p.y0!r}",
            f"g={p.g!r}",
            f"q={p.q!r}",
            f"b={p.b!r}",
            f"zd={p.z_d!r}",
            f"m1={p.m1!r}",
            f"m2={p.m2!r}",
            f"m3={p.m3!r}",
            f"alpha={p.alpha!r}",
        ]
        if self.n is not None:
            parts.append(f"n={self.n}")
        if self.n_list:
            parts.append("n_list=" + ";".join(str(n) for n in self.n_list))
        if self.alpha_list:
            parts.append("alpha_list=" + ";".join(repr(a) for a in self.alpha_list))
        return " ".join(parts)


PARAM_FIELDS = ("x0", "y0", "g", "q", "b", "z_d", "m1", "m2", "m3", "alpha")
KEY_ALIASES = {"zd": "z_d"}


def normalize_keys(raw: dict, allowed: set[str]) -> dict:
    """Accept kebab or snake case keys; reject anything not in ``allowed``."""
    values = {}
    for key, value in raw.items():
        name = str(key).replace("-", "_")
        name = KEY_ALIASES.get(name, name)
        if name not in allowed:
            raise ValidationError(f"unknown config key {key!r}")
        values[name] = value
    return values


def parse_list(value, cast, name: str) -> list:
    if value is None:
        return []
    items = value.split(",") if isinstance(value, str) else value
    try:
        return [cast(item) for item in items if str(item).strip() != ""]
    except (TypeError, ValueError) as e:
        raise ValidationError(f"invalid value for {name}: {value!r}") from e


def _selector(enum_cls, value, default):
    if value is None:
        return default
    try:
        return enum_cls(value)
    except ValueError:
        raise ValidationError(f"invalid {enum_cls.__name__} {value!r}") from None


def run_config_from(values: dict, config) -> RunConfig:
    """Build a RunConfig from merged option values over the app defaults in ``config``."""
    try:
        fields = {k: float(values[k]) for k in PARAM_FIELDS if values.get(k) is not None}
        n = int(values["n"]) if values.get("n") is not None else None
    except (TypeError, ValueError) as e:
        raise ValidationError(f"invalid numeric option: {e}") from None

    if "alpha_list" in values:
        alpha_list = tuple(parse_list(values["alpha_list"], float, "alpha-list"))
    else:
        alpha_list = tuple(config["DEFAULT_ALPHA_LIST"])
    n_list = tuple(parse_list(values.get("n_list"), int, "n-list")) or tuple(config["DEFAULT_N_LIST"])

    return RunConfig(
        params=replace(config["DEFAULT_PARAMS"], **fields),
        scheme=_selector(SchemeKind, values.get("scheme"), SchemeKind.CLASSICAL),
        bc=_selector(BoundaryKind, values.get("bc"), BoundaryKind.DIRICHLET),
        problem=_selector(ControlProblem, values.get("problem"), None),
        n=n,
        n_list=n_list,
        alpha_list=alpha_list,
        out=values.get("out"),
    )
