"""Discrete savings recurrence and fixed-step integration of the budget ODE.

This module does not use any closed-form solution, so it can serve as an
independent check on :mod:`budgetdyn.analytic`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import QUADRATIC, ExpenditureRule, ModelParams, ParameterError, drift

__all__ = [
    "Method",
    "Direction",
    "IntegratorConfig",
    "Event",
    "Trajectory",
    "NonFiniteStateError",
    "step_discrete",
    "iterate_discrete",
    "integrate",
]


class Method(str, enum.Enum):
    EULER = "euler"
    RK4 = "rk4"


class Direction(str, enum.Enum):
    DOWN = "DownThroughZero"
    UP = "UpThroughZero"


class NonFiniteStateError(ArithmeticError):
    def __init__(self, t_last: float, value: float):
        super().__init__(f"state became non-finite ({value!r}) after t={t_last!r}")
        self.t_last = t_last


@dataclass(frozen=True)
class IntegratorConfig:
    method: Method = Method.RK4
    dt: float = 1e-3
    t_end: float = 10.0
    event_tolerance: float = 1e-10

    def __post_init__(self):
        try:
            object.__setattr__(self, "method", Method(self.method))
        except ValueError:
            raise ParameterError("method", f"must be one of {[m.value for m in Method]} (got {self.method!r})") from None
        for name in ("dt", "t_end", "event_tolerance"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
                raise ParameterError(name, f"must be a finite number (got {value!r})")
            if not value > 0:
                raise ParameterError(name, f"must be > 0 (got {value!r})")
            object.__setattr__(self, name, float(value))
        if self.event_tolerance > self.dt:
            raise ParameterError("event_tolerance", f"must be <= dt ({self.dt!r})")


@dataclass(frozen=True)
class Event:
    t: float
    direction: Direction
    b: float  # linear interpolant at t, ~0


def _frozen(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Trajectory:
    """Sampled budget path ``(t[i], b[i])``.

    ``method`` is ``"discrete"``, ``"analytic"`` or the integrator method
    name; ``config`` holds the :class:`IntegratorConfig` when integrated.
    """

    t: np.ndarray
    b: np.ndarray
    method: str
    events: tuple[Event, ...] = ()
    config: IntegratorConfig | None = None

    def __post_init__(self):
        object.__setattr__(self, "t", _frozen(self.t))
        object.__setattr__(self, "b", _frozen(self.b))

    def __len__(self):
        return len(self.t)

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.t.tolist(), self.b.tolist()))


def step_discrete(
    b: float,
    params: ModelParams,
    rule: ExpenditureRule = QUADRATIC,
    period: float = 1.0,
) -> float:
    """One step of the savings recurrence ``b + y0 - c(b) + r/(r+1)*b``.

    ``period`` scales the increment; with ``period = dt`` this is exactly
    an explicit Euler step on the drift with interest.
    """
    return b + period * drift(b, params, rule, include_interest=True)


def iterate_discrete(
    b0: float,
    n: int,
    params: ModelParams,
    rule: ExpenditureRule = QUADRATIC,
) -> Trajectory:
    if n < 0:
        raise ValueError(f"n must be >= 0 (got {n!r})")
    bs = [float(b0)]
    for _ in range(n):
        bs.append(step_discrete(bs[-1], params, rule))
    return Trajectory(np.arange(n + 1, dtype=float), bs, "discrete")


def _euler(f: Callable[[float], float], b: float, h: float) -> float:
    return b + h * f(b)


def _rk4(f: Callable[[float], float], b: float, h: float) -> float:
    k1 = f(b)
    k2 = f(b + 0.5 * h * k1)
    k3 = f(b + 0.5 * h * k2)
    k4 = f(b + h * k3)
    return b + h * (k1 + 2.0 * (k2 + k3) + k4) / 6.0


_STEPPERS = {Method.EULER: _euler, Method.RK4: _rk4}


def _refine_crossing(step, f, t_left, b_left, h, tol, down):
    """Bisect the step interval for the sign change, re-stepping from the left end."""

    def crossed(b):
        return b < 0 if down else b >= 0

    lo, hi = 0.0, h
    b_lo, b_hi = b_left, step(f, b_left, h)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        b_mid = step(f, b_left, mid)
        if crossed(b_mid):
            hi, b_hi = mid, b_mid
        else:
            lo, b_lo = mid, b_mid
    if b_hi == b_lo:
        s = lo
    else:
        s = lo + (hi - lo) * b_lo / (b_lo - b_hi)
        s = min(max(s, lo), hi)
    b_interp = b_lo + (b_hi - b_lo) * (s - lo) / (hi - lo) if hi > lo else b_lo
    return t_left + s, b_interp


def integrate(
    b0: float,
    params: ModelParams,
    rule: ExpenditureRule = QUADRATIC,
    cfg: IntegratorConfig | None = None,
    include_interest: bool = False,
) -> Trajectory:
    """Integrate the budget ODE with a fixed step and record zero crossings.

    Steps are ``dt`` long except possibly the last, which ends exactly at
    ``t_end``. When a step takes the budget across zero the crossing time
    is bisected to ``event_tolerance``; integration simply continues since
    the drift is continuous at ``b = 0``.

    Raises
    ------
    NonFiniteStateError
        If the state overflows; carries the last finite time.
    """
    cfg = cfg or IntegratorConfig()
    step = _STEPPERS[cfg.method]
    f = lambda b: drift(b, params, rule, include_interest)

    n = max(1, math.ceil(cfg.t_end / cfg.dt - 1e-9))
    ts = [0.0]
    bs = [float(b0)]
    events = []
    for k in range(1, n + 1):
        t_k = cfg.t_end if k == n else k * cfg.dt
        t_prev, b_prev = ts[-1], bs[-1]
        h = t_k - t_prev
        b_next = step(f, b_prev, h)
        if not math.isfinite(b_next):
            raise NonFiniteStateError(t_prev, b_next)
        down = b_prev >= 0 > b_next
        if down or (b_prev < 0 <= b_next):
            t_cross, b_cross = _refine_crossing(step, f, t_prev, b_prev, h, cfg.event_tolerance, down)
            events.append(Event(t_cross, Direction.DOWN if down else Direction.UP, b_cross))
        ts.append(t_k)
        bs.append(b_next)
    return Trajectory(ts, bs, cfg.method.value, tuple(events), cfg)
