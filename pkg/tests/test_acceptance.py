"""Exit criteria for the package. Run with ``pytest tests/test_acceptance.py``;
the terminal summary prints one PASS/FAIL line per criterion."""

import csv
import json
import math

import numpy as np
import pytest

from budgetdyn import (
    AnalyticSolution,
    ExpenditureRule,
    IntegratorConfig,
    ModelParams,
    Regime,
    Stability,
    compose,
    drift,
    fixed_points,
    integrate,
    iterate_discrete,
    solve_surplus,
    step_discrete,
    time_to_zero,
)
from budgetdyn.cli import load_config, run, simulate

from oracles import bisect

SEED = 20161018


def deficit_params(a, b_n):
    return ModelParams(a=a, c0=a * b_n * b_n, y0=0.0)


# 1 ------------------------------------------------------------------------------

SURPLUS = ModelParams.from_fixed_point(a=0.125, b_s=10.0, c0=1.0)


@pytest.mark.criterion(1, "surplus shapes, |b(10)-10| < 1e-4, RK4 dt=1e-3 sup-norm < 1e-6 on [0, 10]")
@pytest.mark.parametrize("b0, shape", [(15.0, "decreasing"), (10.0, "constant"), (5.0, "increasing")])
def test_surplus_trajectories(b0, shape):
    ts = np.linspace(0.0, 10.0, 10001)
    bs = np.array([solve_surplus(t, b0, SURPLUS) for t in ts])
    steps = np.diff(bs)
    if shape == "decreasing":
        assert np.all(steps < 0)
    elif shape == "constant":
        assert np.all(bs == 10.0)
    else:
        assert np.all(steps > 0)
    assert abs(solve_surplus(10.0, b0, SURPLUS) - 10.0) < 1e-4

    traj = integrate(b0, SURPLUS, cfg=IntegratorConfig(method="rk4", dt=1e-3, t_end=10.0))
    exact = np.array([solve_surplus(t, b0, SURPLUS) for t in traj.t])
    sup = np.max(np.abs(traj.b - exact))
    print(f"b0={b0}: RK4 sup-norm error {sup:.3e}")
    assert sup < 1e-6


# 2 ------------------------------------------------------------------------------


@pytest.mark.criterion(2, "fixed point sqrt(gamma/a) to 1e-12, residual < 1e-12, negative linearization; none for gamma<0")
def test_fixed_point_and_stability():
    rng = np.random.default_rng(SEED)
    for _ in range(50):
        a = float(rng.uniform(0.01, 10.0))
        g = float(rng.uniform(1e-3, 100.0))
        p = ModelParams.from_gamma(a, g)
        (point,) = fixed_points(p).points
        assert abs(point.b_star - math.sqrt(g / a)) < 1e-12
        # independent root of the hand-written drift
        root = bisect(lambda b: g - a * b * b, 0.0, 2 * math.sqrt(g / a) + 1.0, tol=1e-15)
        assert abs(point.b_star - root) < 1e-12 * max(1.0, root)
        assert abs(drift(point.b_star, p)) < 1e-12
        assert -2 * a * point.b_star < 0
        assert point.slope < 0 and point.stability is Stability.STABLE

        neg = ModelParams.from_gamma(a, -g)
        report = fixed_points(neg)
        assert report.points == () and not report


# 3 ------------------------------------------------------------------------------


def _deficit_draws():
    rng = np.random.default_rng(SEED + 3)
    draws = [(0.125, 10.0, 10.0)]
    for _ in range(20):
        draws.append((float(rng.uniform(0.05, 1.0)), float(rng.uniform(0.5, 10.0)), float(rng.uniform(0.1, 20.0))))
    return draws


@pytest.mark.criterion(3, "integrator zero-crossing matches t0 formula within 1e-6 (anchor + 20 random)")
def test_time_to_zero_cross_validation():
    anchor = time_to_zero(10.0, deficit_params(0.125, 10.0))
    assert anchor == pytest.approx(0.8 * math.pi / 4, rel=1e-15)
    assert anchor == pytest.approx(0.6283185, abs=1e-7)
    worst = 0.0
    for a, b_n, b0 in _deficit_draws():
        p = deficit_params(a, b_n)
        t0 = time_to_zero(b0, p)
        cfg = IntegratorConfig(method="rk4", dt=1e-3, t_end=t0 + 0.1)
        events = integrate(b0, p, cfg=cfg).events
        assert len(events) == 1
        worst = max(worst, abs(events[0].t - t0))
        assert abs(events[0].t - t0) < 1e-6
    print(f"worst event-time error {worst:.3e}")


# 4 ------------------------------------------------------------------------------

RESIDUAL_REGIMES = {
    "surplus": (SURPLUS, 5.0, 10.0),
    "surplus-above": (SURPLUS, 15.0, 10.0),
    "deficit": (deficit_params(0.125, 10.0), 10.0, None),
    "debt": (ModelParams.from_gamma(0.5, -2.0), -3.0, 5.0),
    "balanced": (ModelParams(a=0.125, c0=2.0, y0=2.0), 8.0, 10.0),
}


@pytest.mark.criterion(4, "centered differences of every closed form match drift within 1e-5 on >= 100 points")
@pytest.mark.parametrize("name", list(RESIDUAL_REGIMES))
def test_ode_residual_suite(name):
    params, b0, t_end = RESIDUAL_REGIMES[name]
    sol = AnalyticSolution(params, b0)
    t_end = t_end if t_end is not None else sol.t0
    h = 1e-6
    ts = np.linspace(0.0, t_end, 202)[1:-1]
    assert len(ts) >= 100
    worst = max(abs((sol(t + h) - sol(t - h)) / (2 * h) - drift(sol(t), params)) for t in ts)
    print(f"{name}: worst residual {worst:.3e}")
    assert worst < 1e-5


# 5 ------------------------------------------------------------------------------


@pytest.mark.criterion(5, "measured order 1.0 +/- 0.3 (Euler) and 4.0 +/- 0.3 (RK4)")
@pytest.mark.parametrize("method, nominal", [("euler", 1.0), ("rk4", 4.0)])
def test_convergence_orders(method, nominal):
    dts = [1e-1, 5e-2, 2.5e-2, 1.25e-2]
    errors = []
    for dt in dts:
        traj = integrate(5.0, SURPLUS, cfg=IntegratorConfig(method=method, dt=dt, t_end=4.0, event_tolerance=1e-10))
        exact = np.array([solve_surplus(t, 5.0, SURPLUS) for t in traj.t])
        errors.append(float(np.max(np.abs(traj.b - exact))))
    order = np.polyfit(np.log(dts), np.log(errors), 1)[0]
    print(f"{method}: errors {errors}, order {order:.3f}")
    assert abs(order - nominal) < 0.3


# 6 ------------------------------------------------------------------------------


@pytest.mark.criterion(6, "b(t; lam*b0, a/lam, lam*gamma) = lam*b(t; b0, a, gamma) within 1e-10 relative")
def test_scale_covariance():
    rng = np.random.default_rng(SEED + 6)
    bases = [(0.125, 12.5, 5.0), (0.125, 12.5, 15.0), (0.125, -3.125, 10.0), (0.125, 0.0, 8.0),
             (0.5, -2.0, -3.0), (0.5, 2.0, -3.0)]
    for i in range(100):
        a, g, b0 = bases[i % len(bases)]
        lam = float(np.exp(rng.uniform(np.log(0.01), np.log(100.0))))
        t = float(rng.uniform(0.0, 5.0))
        base = compose(b0, ModelParams.from_gamma(a, g), 5.0)
        scaled = compose(lam * b0, ModelParams.from_gamma(a / lam, lam * g), 5.0)
        expected = lam * base(t)
        assert scaled(t) == pytest.approx(expected, rel=1e-10, abs=1e-12 * lam)


# 7 ------------------------------------------------------------------------------


@pytest.mark.criterion(7, "deficit-into-debt: |b(t0-) - b(t0+)| < 1e-10 and post-switch slope = gamma within 1e-12")
def test_composite_continuity():
    for a, b_n, b0 in _deficit_draws():
        p = deficit_params(a, b_n)
        t0 = time_to_zero(b0, p)
        comp = compose(b0, p, t0 + 2.0)
        assert comp.switch_times == (t0,)
        before, after = comp.segments
        assert before.solution.regime is Regime.DEFICIT_SOLVENT and after.solution.regime is Regime.DEBT
        assert abs(before(t0) - after(t0)) < 1e-10
        t2 = t0 + 1.0
        slope = (comp(t2) - comp(t0)) / (t2 - t0)
        assert abs(slope - p.gamma) < 1e-12 * max(1.0, abs(p.gamma))


# 8 ------------------------------------------------------------------------------


@pytest.mark.criterion(8, "discrete map: ratio 1 + 1/21 per period (r=0.05); equals Euler dt=1 when r=0")
def test_discrete_map():
    p = ModelParams(a=1.0, c0=0.0, y0=0.0, r=0.05)
    traj = iterate_discrete(100.0, 10, p, ExpenditureRule.sqrt_hydro(0.0))
    ratio = 1 + 1 / 21
    for prev, nxt in zip(traj.b[:-1], traj.b[1:]):
        assert abs(nxt / prev - ratio) / ratio < 1e-14

    for params, b0 in [(SURPLUS, 5.0), (SURPLUS, 15.0), (deficit_params(0.125, 2.0), 3.0), (ModelParams.from_gamma(0.2, 1.0), -4.0)]:
        discrete = iterate_discrete(b0, 20, params)
        euler = integrate(b0, params, cfg=IntegratorConfig(method="euler", dt=1.0, t_end=20.0))
        assert euler.t.tolist() == discrete.t.tolist()
        assert np.max(np.abs(euler.b - discrete.b)) <= 1e-12
        assert step_discrete(b0, params) == euler.b[1]


# 9 ------------------------------------------------------------------------------

CLI_CONFIG = {
    "params": {"a": 0.125, "c0": 12.5, "y0": 0.0},
    "b0": 10.0,
    "integrator": {"method": "rk4", "dt": 1e-3, "t_end": 1.5},
    "sweep": {"varying": "b0", "values": [1.0, 5.0, 10.0], "outputs": ["fixed_point", "t0", "final_b", "max_error"]},
    "portrait": {"b_min": -2.0, "b_max": 12.0, "n": 57},
}


@pytest.mark.criterion(9, "CLI outputs byte-identical across runs; CSV re-parses to the exact in-memory values")
@pytest.mark.parametrize("command", ["simulate", "fixed-points", "sweep", "phase-portrait", "validate"])
def test_cli_determinism(tmp_path, command):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(CLI_CONFIG))
    blobs = []
    for i in range(2):
        out = tmp_path / f"{i}.csv"
        assert run([command, "--config", str(cfg_path), "--out", str(out)]) == 0
        report = tmp_path / f"{i}.report.json"
        blobs.append(out.read_bytes() + (report.read_bytes() if report.exists() else b""))
    assert blobs[0] == blobs[1]


@pytest.mark.criterion(9, "CLI outputs byte-identical across runs; CSV re-parses to the exact in-memory values")
def test_cli_round_trip(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(CLI_CONFIG))
    out = tmp_path / "traj.csv"
    assert run(["simulate", "--config", str(cfg_path), "--out", str(out)]) == 0
    traj = simulate(load_config("simulate", json.loads(cfg_path.read_text())))
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [float(r["t"]) for r in rows] == traj.t.tolist()
    assert [float(r["b"]) for r in rows] == traj.b.tolist()
