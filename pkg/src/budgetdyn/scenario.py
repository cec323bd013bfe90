"""Batch experiments: phase portraits, parameter sweeps, validation runs."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analytic import compose, time_to_zero
from .model import (
    QUADRATIC,
    ExpenditureRule,
    ModelParams,
    RuleKind,
    Stability,
    drift,
    fixed_points,
)
from .numeric import IntegratorConfig, Trajectory, integrate

__all__ = [
    "SWEEP_PARAMETERS",
    "SWEEP_OUTPUTS",
    "SweepSpec",
    "SweepRow",
    "Tolerances",
    "ValidationReport",
    "phase_portrait",
    "sweep",
    "validate",
    "validate_with_trajectory",
]

SWEEP_PARAMETERS = ("a", "c0", "y0", "b0")
SWEEP_OUTPUTS = ("fixed_point", "t0", "final_b", "max_error")


def phase_portrait(
    params: ModelParams,
    rule: ExpenditureRule = QUADRATIC,
    b_min: float = 0.0,
    b_max: float = 2.0,
    n: int = 101,
    include_interest: bool = False,
) -> list[tuple[float, float]]:
    """``n`` evenly spaced samples ``(b, db/dt)`` on ``[b_min, b_max]``."""
    if not b_min < b_max:
        raise ValueError(f"need b_min < b_max (got {b_min!r}, {b_max!r})")
    if n < 2:
        raise ValueError(f"need n >= 2 (got {n!r})")
    grid = np.linspace(b_min, b_max, n).tolist()
    return [(b, drift(b, params, rule, include_interest)) for b in grid]


@dataclass(frozen=True)
class Tolerances:
    sup_norm: float = 1e-6
    event_time: float = 1e-6


@dataclass(frozen=True)
class ValidationReport:
    scenario_id: str
    sup_norm_error: float
    event_time_error: float
    n_events_numeric: int
    n_events_analytic: int
    tolerances: Tolerances
    passed: bool

    def to_dict(self) -> dict:
        def num(x):
            return x if math.isfinite(x) else None

        return {
            "scenario_id": self.scenario_id,
            "sup_norm_error": num(self.sup_norm_error),
            "event_time_error": num(self.event_time_error),
            "n_events_numeric": self.n_events_numeric,
            "n_events_analytic": self.n_events_analytic,
            "tolerances": {"sup_norm": self.tolerances.sup_norm, "event_time": self.tolerances.event_time},
            "passed": self.passed,
        }


def validate(
    params: ModelParams,
    rule: ExpenditureRule,
    b0: float,
    cfg: IntegratorConfig,
    tolerances: Tolerances = Tolerances(),
    scenario_id: str = "",
) -> ValidationReport:
    return validate_with_trajectory(params, rule, b0, cfg, tolerances, scenario_id)[0]


def validate_with_trajectory(
    params: ModelParams,
    rule: ExpenditureRule,
    b0: float,
    cfg: IntegratorConfig,
    tolerances: Tolerances = Tolerances(),
    scenario_id: str = "",
) -> tuple[ValidationReport, Trajectory]:
    """Integrate numerically and compare with the composite closed form.

    Both sides run without interest. The sup-norm is taken over the
    integrator's own time grid; event times are compared pairwise with the
    analytic switch times. A mismatch in the number of crossings makes the
    event error infinite.
    """
    if rule.kind is not RuleKind.QUADRATIC:
        raise ValueError("validation needs the quadratic rule (no closed form otherwise)")
    traj = integrate(b0, params, rule, cfg)
    exact = compose(b0, params, cfg.t_end)
    ref = exact.evaluate(traj.t)
    sup = float(np.max(np.abs(traj.b - ref)))

    switches = exact.switch_times
    if len(switches) != len(traj.events):
        ev_err = math.inf
    elif switches:
        ev_err = max(abs(e.t - s) for e, s in zip(traj.events, switches))
    else:
        ev_err = 0.0
    passed = sup < tolerances.sup_norm and ev_err < tolerances.event_time
    if not scenario_id:
        scenario_id = f"a={params.a!r},gamma={params.gamma!r},b0={float(b0)!r},{cfg.method.value},dt={cfg.dt!r}"
    report = ValidationReport(
        scenario_id, sup, ev_err, len(traj.events), len(switches), tolerances, passed
    )
    return report, traj


@dataclass(frozen=True)
class SweepSpec:
    """One-parameter sweep around a base scenario.

    ``varying`` is one of ``a, c0, y0, b0``. Values that break a parameter
    bound are not rejected here; they produce an error row.
    """

    varying: str
    values: tuple[float, ...]
    params: ModelParams
    b0: float = 0.0
    outputs: frozenset[str] = frozenset({"fixed_point"})
    rule: ExpenditureRule = QUADRATIC
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    tolerances: Tolerances = Tolerances()
    workers: int = 1

    def __post_init__(self):
        if self.varying not in SWEEP_PARAMETERS:
            raise ValueError(f"varying must be one of {SWEEP_PARAMETERS} (got {self.varying!r})")
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValueError("values must not be empty")
        if not all(math.isfinite(v) for v in values):
            raise ValueError("values must be finite")
        object.__setattr__(self, "values", values)
        outputs = frozenset(self.outputs)
        unknown = outputs - set(SWEEP_OUTPUTS)
        if unknown:
            raise ValueError(f"unknown sweep outputs {sorted(unknown)}")
        object.__setattr__(self, "outputs", outputs)
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1 (got {self.workers!r})")


@dataclass(frozen=True)
class SweepRow:
    value: float
    gamma: float | None = None
    b_star: float | None = None
    stability: Stability | None = None
    debt_continuum: bool | None = None
    t0: float | None = None
    final_b: float | None = None
    max_error: float | None = None
    error: str | None = None


def _sweep_row(spec: SweepSpec, value: float) -> SweepRow:
    try:
        if spec.varying == "b0":
            params, b0 = spec.params, value
        else:
            params, b0 = spec.params.replace(**{spec.varying: value}), spec.b0
        row = {"value": value, "gamma": params.gamma}
        if "fixed_point" in spec.outputs:
            report = fixed_points(params, spec.rule)
            solvent = [p for p in report.points if p.b_star >= 0]
            if solvent:
                row["b_star"] = solvent[0].b_star
                row["stability"] = solvent[0].stability
            else:
                row["stability"] = Stability.NONE
            row["debt_continuum"] = report.debt_continuum
        if "t0" in spec.outputs and params.gamma < 0 and b0 >= 0:
            row["t0"] = time_to_zero(b0, params)
        if "final_b" in spec.outputs:
            row["final_b"] = float(integrate(b0, params, spec.rule, spec.integrator).b[-1])
        if "max_error" in spec.outputs:
            row["max_error"] = validate(params, spec.rule, b0, spec.integrator, spec.tolerances).sup_norm_error
        return SweepRow(**row)
    except (ValueError, ArithmeticError) as exc:
        return SweepRow(value=value, error=f"{type(exc).__name__}: {exc}")


def sweep(spec: SweepSpec) -> list[SweepRow]:
    """Evaluate every sweep value; rows come back in input order.

    A failing row records its error and the rest of the batch still runs.
    """
    if spec.workers == 1:
        return [_sweep_row(spec, v) for v in spec.values]
    with ThreadPoolExecutor(max_workers=spec.workers) as pool:
        return list(pool.map(lambda v: _sweep_row(spec, v), spec.values))
