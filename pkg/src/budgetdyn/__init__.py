"""Consumer budget dynamics with a quadratic expenditure rule.

The budget ``b`` of a consumer with constant income ``y0`` who spends
``c(b) = a*b**2 + c0`` (or just ``c0`` when in debt) obeys
``db/dt = y0 - c(b)``. This package provides the closed-form solution of
each regime, fixed-point analysis, a discrete recurrence and fixed-step
integrators used to cross-check them, and batch/CLI tooling.
"""

from .analytic import (
    AnalyticSolution,
    CompositeSolution,
    compose,
    solve_balanced,
    solve_debt,
    solve_deficit,
    solve_surplus,
    time_to_zero,
)
from .model import (
    QUADRATIC,
    DomainError,
    ExpenditureRule,
    FixedPoint,
    FixedPointReport,
    ModelParams,
    ParameterError,
    Regime,
    RuleKind,
    Stability,
    classify_regime,
    drift,
    expenditure,
    fixed_points,
    gamma,
)
from .numeric import (
    Direction,
    Event,
    IntegratorConfig,
    Method,
    NonFiniteStateError,
    Trajectory,
    integrate,
    iterate_discrete,
    step_discrete,
)
from .scenario import (
    SweepRow,
    SweepSpec,
    Tolerances,
    ValidationReport,
    phase_portrait,
    sweep,
    validate,
)

__version__ = "0.1.0"
