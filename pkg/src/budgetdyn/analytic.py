"""Closed-form budget trajectories for the quadratic rule (no interest).

Each solvent regime has an explicit solution:

* surplus (gamma > 0): ``b_s*(b0 + b_s*tanh(a*b_s*t)) / (b_s + b0*tanh(a*b_s*t))``
  with ``b_s = sqrt(gamma/a)``;
* deficit (gamma < 0): ``b_N*tan(arctan(b0/b_N) - b_N*a*t)`` with
  ``b_N = sqrt(|gamma|/a)``, valid until the budget hits zero at
  ``t0 = arctan(b0/b_N)/(b_N*a)``;
* balanced (gamma = 0): ``b0/(1 + a*b0*t)``;
* debt (b < 0): ``gamma*t + b0``.

``compose`` chains these across ``b = 0`` into one continuous solution.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

from .model import DomainError, ModelParams, Regime, classify_regime

__all__ = [
    "AnalyticSolution",
    "CompositeSolution",
    "solve_surplus",
    "solve_deficit",
    "solve_debt",
    "solve_balanced",
    "time_to_zero",
    "compose",
]

# Beyond this tanh argument the surplus solution equals b_s to double precision.
SATURATION = 50.0


def _require_time(t: float) -> None:
    if not t >= 0:
        raise DomainError(f"t must be >= 0 (got {t!r})")


def solve_surplus(t: float, b0: float, params: ModelParams) -> float:
    g = params.gamma
    if not g > 0:
        raise DomainError(f"surplus solution needs gamma > 0 (got {g!r})")
    if b0 < 0:
        raise DomainError(f"surplus solution needs b0 >= 0 (got {b0!r})")
    _require_time(t)
    b_s = math.sqrt(g / params.a)
    x = params.a * b_s * t
    if t == 0 or b0 == b_s:
        return b0
    if x > SATURATION:
        return b_s
    th = math.tanh(x)
    if th == 0:
        return b0
    # Rearranged so every operation is sign-definite and monotone in t: no
    # cancellation, exact flat line at b_s, no ulp-level wiggles.
    if b0 < b_s:
        return b0 + (b_s - b0) * (b_s + b0) / (b_s / th + b0)
    one_minus_th = 2.0 / (math.exp(2.0 * x) + 1.0)
    return min(b_s + (b0 - b_s) * (b_s * one_minus_th / (b_s + b0 * th)), b0)


def time_to_zero(b0: float, params: ModelParams) -> float:
    """Time at which a deficit-regime budget starting at ``b0`` reaches zero."""
    g = params.gamma
    if not g < 0:
        raise DomainError(f"time to zero needs gamma < 0 (got {g!r})")
    if b0 < 0:
        raise DomainError(f"time to zero needs b0 >= 0 (got {b0!r})")
    b_n = math.sqrt(-g / params.a)
    return math.atan(b0 / b_n) / (b_n * params.a)


def solve_deficit(t: float, b0: float, params: ModelParams) -> float:
    g = params.gamma
    if not g < 0:
        raise DomainError(f"deficit solution needs gamma < 0 (got {g!r})")
    if b0 < 0:
        raise DomainError(f"deficit solution needs b0 >= 0 (got {b0!r})")
    _require_time(t)
    b_n = math.sqrt(-g / params.a)
    phase = math.atan(b0 / b_n)
    t0 = phase / (b_n * params.a)
    if t > t0 * (1.0 + 1e-12) + 1e-15:
        raise DomainError(f"t={t!r} is past the zero-budget time t0={t0!r}")
    return b_n * math.tan(max(phase - b_n * params.a * t, 0.0))


def solve_debt(t: float, b0: float, params: ModelParams) -> float:
    _require_time(t)
    return params.gamma * t + b0


def solve_balanced(t: float, b0: float, params: ModelParams) -> float:
    g = params.gamma
    if g != 0:
        raise DomainError(f"balanced solution needs gamma == 0 (got {g!r})")
    if b0 < 0:
        raise DomainError(f"balanced solution needs b0 >= 0 (got {b0!r})")
    _require_time(t)
    return b0 / (1.0 + params.a * b0 * t)


_SOLVERS = {
    Regime.SURPLUS_SOLVENT: solve_surplus,
    Regime.DEFICIT_SOLVENT: solve_deficit,
    Regime.BALANCED_SOLVENT: solve_balanced,
    Regime.DEBT: solve_debt,
}


@dataclass(frozen=True)
class AnalyticSolution:
    """Closed-form solution of one regime, started at ``b0`` at local time 0.

    ``regime`` defaults to the classification of ``b0``. A debt solution may
    also be started at ``b0 = 0`` (the continuation of a deficit run).
    """

    params: ModelParams
    b0: float
    regime: Regime | None = None

    def __post_init__(self):
        if self.regime is None:
            object.__setattr__(self, "regime", classify_regime(self.b0, self.params))
        elif self.regime is not Regime.DEBT and self.regime is not classify_regime(self.b0, self.params):
            raise DomainError(f"b0={self.b0!r} is not in regime {self.regime.value}")
        elif self.regime is Regime.DEBT and self.b0 > 0:
            raise DomainError(f"debt solution needs b0 <= 0 (got {self.b0!r})")

    @property
    def b_s(self) -> float | None:
        if self.regime is Regime.SURPLUS_SOLVENT:
            return math.sqrt(self.params.gamma / self.params.a)
        return None

    @property
    def b_N(self) -> float | None:
        if self.regime is Regime.DEFICIT_SOLVENT:
            return math.sqrt(-self.params.gamma / self.params.a)
        return None

    @property
    def t0(self) -> float | None:
        if self.regime is Regime.DEFICIT_SOLVENT:
            return time_to_zero(self.b0, self.params)
        return None

    def __call__(self, t: float) -> float:
        return _SOLVERS[self.regime](t, self.b0, self.params)


@dataclass(frozen=True)
class Segment:
    t_start: float
    t_end: float
    solution: AnalyticSolution

    def __call__(self, t: float) -> float:
        return self.solution(max(t - self.t_start, 0.0))


@dataclass(frozen=True)
class CompositeSolution:
    """Piecewise closed-form solution on ``[0, t_end]``.

    At a switch time the later segment is used; both sides agree there.
    """

    segments: tuple[Segment, ...]

    @property
    def switch_times(self) -> tuple[float, ...]:
        return tuple(s.t_start for s in self.segments[1:])

    @property
    def t_end(self) -> float:
        return self.segments[-1].t_end

    def segment_at(self, t: float) -> Segment:
        if not 0 <= t <= self.t_end:
            raise DomainError(f"t={t!r} outside [0, {self.t_end!r}]")
        i = bisect.bisect_right(self.switch_times, t)
        return self.segments[i]

    def __call__(self, t: float) -> float:
        return self.segment_at(t)(t)

    def evaluate(self, ts) -> np.ndarray:
        return np.array([self(float(t)) for t in ts])


def compose(b0: float, params: ModelParams, t_end: float) -> CompositeSolution:
    """Continue the closed-form dynamics across ``b = 0`` up to ``t_end``.

    A deficit run that reaches zero carries on as debt with the same
    ``gamma``; debt with ``gamma > 0`` is repaid linearly and then follows
    the surplus solution from ``b = 0``.
    """
    if not t_end > 0:
        raise DomainError(f"t_end must be > 0 (got {t_end!r})")
    b0 = float(b0)
    g = params.gamma
    first = AnalyticSolution(params, b0)

    if first.regime is Regime.DEFICIT_SOLVENT:
        t0 = first.t0
        debt = AnalyticSolution(params, 0.0, Regime.DEBT)
        if t0 == 0:
            return CompositeSolution((Segment(0.0, float(t_end), debt),))
        if t0 < t_end:
            return CompositeSolution((Segment(0.0, t0, first), Segment(t0, t_end, debt)))
    elif first.regime is Regime.DEBT and g > 0:
        t1 = -b0 / g
        if t1 < t_end:
            surplus = AnalyticSolution(params, 0.0)
            return CompositeSolution((Segment(0.0, t1, first), Segment(t1, t_end, surplus)))
    return CompositeSolution((Segment(0.0, float(t_end), first),))
