"""Model constants, expenditure rules, drift and fixed-point analysis.

The state variable is the budget ``b`` (money). A consumer with constant
income rate ``y0`` spends at rate ``c(b)``; the budget evolves as

    db/dt = y0 - c(b) + r/(r+1) * b

with the interest term usually dropped (``r = 0``). For the quadratic rule
``c(b) = a*b**2 + c0`` on ``b >= 0`` and ``c(b) = c0`` on ``b < 0``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

__all__ = [
    "ParameterError",
    "DomainError",
    "ModelParams",
    "RuleKind",
    "ExpenditureRule",
    "QUADRATIC",
    "Regime",
    "Stability",
    "FixedPoint",
    "FixedPointReport",
    "expenditure",
    "drift",
    "drift_slope",
    "gamma",
    "fixed_points",
    "classify_regime",
]

# Linearizations smaller than this in magnitude are treated as degenerate.
STABILITY_TIE = 1e-12
FD_STEP = 1e-6
ROOT_TOL = 1e-12


class ParameterError(ValueError):
    """A model parameter violates its bound. ``field`` names the offender."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class DomainError(ValueError):
    """An evaluator was called outside the regime it is valid for."""


def _check_finite(name: str, value: float) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ParameterError(name, f"must be a number (got {value!r})") from None
    if not math.isfinite(value):
        raise ParameterError(name, f"must be finite (got {value!r})")
    return value


@dataclass(frozen=True)
class ModelParams:
    """Constants of one consumer scenario.

    Attributes
    ----------
    a : float
        Curvature of the quadratic expenditure rule, ``a > 0``.
    c0 : float
        Minimum expenditure rate, ``c0 >= 0``.
    y0 : float
        Constant income rate, ``y0 >= 0``.
    r : float
        Interest rate per period, ``r >= 0``.
    """

    a: float
    c0: float
    y0: float
    r: float = 0.0

    def __post_init__(self):
        for name in ("a", "c0", "y0", "r"):
            object.__setattr__(self, name, _check_finite(name, getattr(self, name)))
        if not self.a > 0:
            raise ParameterError("a", f"must be > 0 (got {self.a!r})")
        for name in ("c0", "y0", "r"):
            if getattr(self, name) < 0:
                raise ParameterError(name, f"must be >= 0 (got {getattr(self, name)!r})")

    @classmethod
    def from_fixed_point(cls, a: float, b_s: float, c0: float = 0.0, r: float = 0.0) -> "ModelParams":
        """Build params whose surplus fixed point sits at ``b_s`` (``y0 = c0 + a*b_s**2``)."""
        b_s = _check_finite("b_s", b_s)
        if b_s < 0:
            raise ParameterError("b_s", f"must be >= 0 (got {b_s!r})")
        a = _check_finite("a", a)
        c0 = _check_finite("c0", c0)
        return cls(a=a, c0=c0, y0=c0 + a * b_s * b_s, r=r)

    @classmethod
    def from_gamma(cls, a: float, gamma: float, r: float = 0.0) -> "ModelParams":
        """Build params with net surplus rate ``gamma``, keeping ``c0, y0 >= 0``."""
        gamma = _check_finite("gamma", gamma)
        if gamma >= 0:
            return cls(a=a, c0=0.0, y0=gamma, r=r)
        return cls(a=a, c0=-gamma, y0=0.0, r=r)

    @property
    def gamma(self) -> float:
        return self.y0 - self.c0

    def replace(self, **changes) -> "ModelParams":
        values = {"a": self.a, "c0": self.c0, "y0": self.y0, "r": self.r}
        values.update(changes)
        return ModelParams(**values)


class RuleKind(str, enum.Enum):
    QUADRATIC = "quadratic"
    SQRT_HYDRO = "sqrt_hydro"


@dataclass(frozen=True)
class ExpenditureRule:
    """Functional relation ``c(b)``.

    ``QUADRATIC`` is ``a*b**2 + c0`` (``a`` taken from the params);
    ``SQRT_HYDRO`` is ``k*sqrt(b) + c0``, the leaking-vessel analog. Both
    spend exactly ``c0`` when in debt.
    """

    kind: RuleKind = RuleKind.QUADRATIC
    k: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", RuleKind(self.kind))
        object.__setattr__(self, "k", _check_finite("k", self.k))
        if self.k < 0:
            raise ParameterError("k", f"must be >= 0 (got {self.k!r})")
        if self.kind is RuleKind.QUADRATIC and self.k != 0:
            raise ParameterError("k", "only used by the sqrt_hydro rule")

    @classmethod
    def sqrt_hydro(cls, k: float) -> "ExpenditureRule":
        return cls(RuleKind.SQRT_HYDRO, k)


QUADRATIC = ExpenditureRule()


class Regime(str, enum.Enum):
    SURPLUS_SOLVENT = "SurplusSolvent"
    DEFICIT_SOLVENT = "DeficitSolvent"
    BALANCED_SOLVENT = "BalancedSolvent"
    DEBT = "Debt"


class Stability(str, enum.Enum):
    STABLE = "Stable"
    HALF_STABLE = "HalfStable"
    MARGINALLY_STABLE = "MarginallyStable"
    NONE = "None"


@dataclass(frozen=True)
class FixedPoint:
    b_star: float
    stability: Stability
    slope: float


@dataclass(frozen=True)
class FixedPointReport:
    """Equilibria of the budget dynamics.

    ``debt_continuum`` is set when ``gamma == 0``: every negative budget is
    then a marginally stable equilibrium of the debt branch.
    """

    points: tuple[FixedPoint, ...] = field(default_factory=tuple)
    debt_continuum: bool = False

    def __bool__(self):
        return bool(self.points)

    def __len__(self):
        return len(self.points)


def gamma(params: ModelParams) -> float:
    """Net surplus rate ``y0 - c0``."""
    return params.y0 - params.c0


def expenditure(b: float, rule: ExpenditureRule, params: ModelParams) -> float:
    if b < 0:
        return params.c0
    if rule.kind is RuleKind.QUADRATIC:
        return params.a * b * b + params.c0
    return rule.k * math.sqrt(b) + params.c0


def drift(
    b: float,
    params: ModelParams,
    rule: ExpenditureRule = QUADRATIC,
    include_interest: bool = False,
) -> float:
    """Rate of change of the budget at ``b``."""
    rate = params.y0 - expenditure(b, rule, params)
    if include_interest:
        rate += params.r / (params.r + 1.0) * b
    return rate


def drift_slope(
    b: float,
    params: ModelParams,
    rule: ExpenditureRule = QUADRATIC,
    h: float = FD_STEP,
) -> float:
    """Central finite-difference estimate of ``d(drift)/db`` (no interest)."""
    return (drift(b + h, params, rule) - drift(b - h, params, rule)) / (2.0 * h)


def classify_regime(b: float, params: ModelParams) -> Regime:
    if b < 0:
        return Regime.DEBT
    g = params.gamma
    if g > 0:
        return Regime.SURPLUS_SOLVENT
    if g < 0:
        return Regime.DEFICIT_SOLVENT
    return Regime.BALANCED_SOLVENT


def _classify(slope: float) -> Stability:
    if abs(slope) < STABILITY_TIE:
        return Stability.HALF_STABLE
    return Stability.STABLE if slope < 0 else Stability.NONE


def _bisect_root(f, lo: float, hi: float, tol: float = ROOT_TOL) -> float:
    # f(lo) > 0 >= f(hi)
    while hi - lo > tol * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _sqrt_hydro_root(params: ModelParams, rule: ExpenditureRule) -> float | None:
    f = lambda b: drift(b, params, rule)
    hi = 1.0
    while f(hi) > 0:
        hi *= 2.0
        if hi > 1e300:
            return None
    return _bisect_root(f, 0.0, hi)


def fixed_points(
    params: ModelParams,
    rule: ExpenditureRule = QUADRATIC,
    b0: float | None = None,
) -> FixedPointReport:
    """Locate and classify the equilibria of the interest-free drift.

    For the quadratic rule the solvent fixed point is ``sqrt(gamma/a)``
    and its stability follows from the linearization ``-2*a*b``. The
    square-root rule is solved by bisection and classified with a finite
    difference. Passing a negative ``b0`` with ``gamma == 0`` adds that
    budget as a marginally stable debt equilibrium.
    """
    g = params.gamma
    points: list[FixedPoint] = []
    if g > 0:
        if rule.kind is RuleKind.QUADRATIC:
            b_star = math.sqrt(g / params.a)
            slope = -2.0 * params.a * b_star
            points.append(FixedPoint(b_star, _classify(slope), slope))
        elif rule.k > 0:
            b_star = _sqrt_hydro_root(params, rule)
            if b_star is not None:
                slope = drift_slope(b_star, params, rule, h=min(FD_STEP, 0.5 * b_star))
                points.append(FixedPoint(b_star, _classify(slope), slope))
    elif g == 0:
        if rule.kind is RuleKind.SQRT_HYDRO and rule.k == 0:
            # drift vanishes identically on b >= 0
            points.append(FixedPoint(0.0, Stability.MARGINALLY_STABLE, 0.0))
        else:
            points.append(FixedPoint(0.0, Stability.HALF_STABLE, 0.0))
        if b0 is not None and b0 < 0:
            points.append(FixedPoint(float(b0), Stability.MARGINALLY_STABLE, 0.0))
    return FixedPointReport(tuple(points), debt_continuum=(g == 0))
