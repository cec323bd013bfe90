"""Command line front end.

    budgetdyn simulate --config run.json --out traj.csv --set integrator.dt=1e-4

Every run reads one JSON config; ``--set dotted.key=value`` overrides any
field (values are parsed as JSON, falling back to a plain string).
Exit status is 0 on success, 1 on a config error, 2 on a runtime error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analytic import compose
from .model import (
    ExpenditureRule,
    ModelParams,
    ParameterError,
    RuleKind,
    Stability,
    classify_regime,
    fixed_points,
)
from .numeric import IntegratorConfig, Method, NonFiniteStateError, Trajectory, integrate, iterate_discrete
from .scenario import (
    SWEEP_OUTPUTS,
    SweepSpec,
    Tolerances,
    phase_portrait,
    sweep,
    validate_with_trajectory,
)

RUN_KINDS = ("simulate", "fixed-points", "sweep", "phase-portrait", "validate")
INTEGRATOR_METHODS = tuple(m.value for m in Method)
SIM_METHODS = INTEGRATOR_METHODS + ("discrete", "analytic")

_NUM, _INT, _BOOL, _STR = "number", "integer", "boolean", "string"
_NUMS, _STRS = "list of numbers", "list of strings"

SCHEMA = {
    "run": _STR,
    "b0": _NUM,
    "output": _STR,
    "report": _STR,
    "scenario_id": _STR,
    "params": {"a": _NUM, "c0": _NUM, "y0": _NUM, "r": _NUM, "b_s": _NUM},
    "rule": {"kind": _STR, "k": _NUM},
    "integrator": {
        "method": _STR,
        "dt": _NUM,
        "t_end": _NUM,
        "event_tolerance": _NUM,
        "include_interest": _BOOL,
    },
    "sweep": {"varying": _STR, "values": _NUMS, "outputs": _STRS, "workers": _INT},
    "portrait": {"b_min": _NUM, "b_max": _NUM, "n": _INT},
    "tolerances": {"sup_norm": _NUM, "event_time": _NUM},
}


class ConfigError(Exception):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _type_ok(kind: str, v) -> bool:
    if kind == _NUM:
        return _is_num(v)
    if kind == _INT:
        return isinstance(v, int) and not isinstance(v, bool)
    if kind == _BOOL:
        return isinstance(v, bool)
    if kind == _STR:
        return isinstance(v, str)
    if kind == _NUMS:
        return isinstance(v, list) and all(_is_num(x) for x in v)
    if kind == _STRS:
        return isinstance(v, list) and all(isinstance(x, str) for x in v)
    raise AssertionError(kind)


def check_schema(raw, schema=SCHEMA, prefix="") -> None:
    if not isinstance(raw, dict):
        raise ConfigError(prefix.rstrip(".") or "<root>", "must be a JSON object")
    for key, value in raw.items():
        name = prefix + key
        if key not in schema:
            raise ConfigError(name, "unknown key")
        expected = schema[key]
        if isinstance(expected, dict):
            check_schema(value, expected, name + ".")
        elif not _type_ok(expected, value):
            raise ConfigError(name, f"expected {expected} (got {json.dumps(value)})")


def apply_override(raw: dict, assignment: str) -> None:
    key, sep, text = assignment.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(assignment, "override must look like key=value")
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    *parents, leaf = key.split(".")
    node, schema = raw, SCHEMA
    for i, part in enumerate(parents):
        sub = schema.get(part) if isinstance(schema, dict) else None
        if not isinstance(sub, dict):
            raise ConfigError(".".join(parents[: i + 1]), "unknown key")
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(".".join(parents[: i + 1]), "must be a JSON object")
        schema = sub
    if leaf not in schema or isinstance(schema[leaf], dict):
        raise ConfigError(key, "unknown key")
    node[leaf] = value


@dataclass(frozen=True)
class ScenarioConfig:
    run: str
    params: ModelParams
    rule: ExpenditureRule
    b0: float
    method: str
    integrator: IntegratorConfig
    include_interest: bool
    raw: dict

    @property
    def output(self) -> str | None:
        return self.raw.get("output")


def _section(raw: dict, name: str) -> dict:
    return dict(raw.get(name, {}))


def _build_params(sec: dict) -> ModelParams:
    if "a" not in sec:
        raise ConfigError("params.a", "required")
    if ("y0" in sec) == ("b_s" in sec):
        raise ConfigError("params.y0", "give exactly one of params.y0 or params.b_s")
    try:
        if "b_s" in sec:
            return ModelParams.from_fixed_point(sec["a"], sec["b_s"], sec.get("c0", 0.0), sec.get("r", 0.0))
        return ModelParams(a=sec["a"], c0=sec.get("c0", 0.0), y0=sec["y0"], r=sec.get("r", 0.0))
    except ParameterError as exc:
        raise ConfigError(f"params.{exc.field}", str(exc).split(": ", 1)[1]) from None


def load_config(run: str, raw: dict) -> ScenarioConfig:
    check_schema(raw)
    if "run" in raw and raw["run"] != run:
        raise ConfigError("run", f"config is for {raw['run']!r} but the {run!r} command was invoked")
    if run not in RUN_KINDS:
        raise ConfigError("run", f"must be one of {RUN_KINDS}")

    params = _build_params(_section(raw, "params"))
    rule_sec = _section(raw, "rule")
    try:
        rule = ExpenditureRule(RuleKind(rule_sec.get("kind", "quadratic")), rule_sec.get("k", 0.0))
    except ParameterError as exc:
        raise ConfigError(f"rule.{exc.field}", str(exc).split(": ", 1)[1]) from None
    except ValueError:
        raise ConfigError("rule.kind", f"must be one of {[k.value for k in RuleKind]}") from None

    b0 = float(raw.get("b0", 0.0))
    if not math.isfinite(b0):
        raise ConfigError("b0", "must be finite")

    sec = _section(raw, "integrator")
    method = sec.pop("method", "rk4")
    include_interest = sec.pop("include_interest", False)
    if method not in SIM_METHODS:
        raise ConfigError("integrator.method", f"must be one of {SIM_METHODS} (got {method!r})")
    try:
        cfg = IntegratorConfig(method=method if method in INTEGRATOR_METHODS else Method.RK4, **sec)
    except ParameterError as exc:
        raise ConfigError(f"integrator.{exc.field}", str(exc).split(": ", 1)[1]) from None
    return ScenarioConfig(run, params, rule, b0, method, cfg, include_interest, raw)


# --- output -----------------------------------------------------------------


def fmt(x) -> str:
    """17 significant digits: float(fmt(x)) == x for every double."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows([fmt(v) for v in row] for row in rows)
    return buf.getvalue()


def write_atomic(files: dict[str, str]) -> None:
    """Write every file to a temp sibling first, then rename all of them."""
    staged = []
    try:
        for path, text in files.items():
            target = Path(path)
            target.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            staged.append((tmp, target))
        for tmp, target in staged:
            os.replace(tmp, target)
    finally:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)


def trajectory_rows(traj: Trajectory, params: ModelParams):
    return [(t, b, classify_regime(b, params).value) for t, b in zip(traj.t.tolist(), traj.b.tolist())]


# --- commands ---------------------------------------------------------------


def simulate(sc: ScenarioConfig) -> Trajectory:
    cfg = sc.integrator
    if sc.method == "discrete":
        return iterate_discrete(sc.b0, int(round(cfg.t_end)), sc.params, sc.rule)
    if sc.method == "analytic":
        if sc.rule.kind is not RuleKind.QUADRATIC:
            raise ConfigError("integrator.method", "analytic needs rule.kind = quadratic")
        if sc.include_interest:
            raise ConfigError("integrator.include_interest", "analytic solutions have no interest term")
        n = max(1, math.ceil(cfg.t_end / cfg.dt - 1e-9))
        ts = [min(k * cfg.dt, cfg.t_end) for k in range(n)] + [cfg.t_end]
        exact = compose(sc.b0, sc.params, cfg.t_end)
        return Trajectory(ts, exact.evaluate(ts), "analytic")
    return integrate(sc.b0, sc.params, sc.rule, cfg, sc.include_interest)


def cmd_simulate(sc: ScenarioConfig) -> dict[str, str]:
    traj = simulate(sc)
    return {"csv": to_csv(("t", "b", "regime"), trajectory_rows(traj, sc.params))}


def cmd_fixed_points(sc: ScenarioConfig) -> dict[str, str]:
    report = fixed_points(sc.params, sc.rule, b0=sc.b0)
    g = sc.params.gamma
    rows = [(g, p.b_star, p.stability.value) for p in report.points] or [(g, None, Stability.NONE.value)]
    return {"csv": to_csv(("gamma", "b_star", "stability"), rows)}


def cmd_sweep(sc: ScenarioConfig) -> dict[str, str]:
    sec = _section(sc.raw, "sweep")
    for key in ("varying", "values"):
        if key not in sec:
            raise ConfigError(f"sweep.{key}", "required")
    outputs = sec.get("outputs", ["fixed_point"])
    for name in outputs:
        if name not in SWEEP_OUTPUTS:
            raise ConfigError("sweep.outputs", f"unknown output {name!r}; expected some of {SWEEP_OUTPUTS}")
    try:
        spec = SweepSpec(
            varying=sec["varying"],
            values=sec["values"],
            params=sc.params,
            b0=sc.b0,
            outputs=frozenset(outputs),
            rule=sc.rule,
            integrator=sc.integrator,
            tolerances=_tolerances(sc.raw),
            workers=sec.get("workers", 1),
        )
    except ValueError as exc:
        msg = str(exc)
        key = next((k for k in ("varying", "values", "workers") if k in msg), "values")
        raise ConfigError(f"sweep.{key}", msg) from None
    extras = [name for name in SWEEP_OUTPUTS if name in spec.outputs and name != "fixed_point"]
    header = ["gamma", "b_star", "stability", spec.varying, "debt_continuum", *extras, "error"]
    rows = []
    for row in sweep(spec):
        stability = row.stability.value if row.stability is not None else None
        rows.append(
            [row.gamma, row.b_star, stability, row.value, row.debt_continuum]
            + [getattr(row, name) for name in extras]
            + [row.error]
        )
    return {"csv": to_csv(header, rows)}


def cmd_phase_portrait(sc: ScenarioConfig) -> dict[str, str]:
    sec = _section(sc.raw, "portrait")
    try:
        samples = phase_portrait(
            sc.params, sc.rule, sec.get("b_min", 0.0), sec.get("b_max", 2.0), sec.get("n", 101), sc.include_interest
        )
    except ValueError as exc:
        key = "portrait.n" if "n >=" in str(exc) else "portrait.b_max"
        raise ConfigError(key, str(exc)) from None
    return {"csv": to_csv(("b", "dbdt"), samples)}


def _tolerances(raw: dict) -> Tolerances:
    sec = _section(raw, "tolerances")
    for key, value in sec.items():
        if not value > 0:
            raise ConfigError(f"tolerances.{key}", f"must be > 0 (got {value!r})")
    return Tolerances(**sec)


def cmd_validate(sc: ScenarioConfig) -> dict[str, str]:
    if sc.rule.kind is not RuleKind.QUADRATIC:
        raise ConfigError("rule.kind", "validate needs the quadratic rule")
    if sc.method not in INTEGRATOR_METHODS:
        raise ConfigError("integrator.method", "validate needs euler or rk4")
    report, traj = validate_with_trajectory(
        sc.params, sc.rule, sc.b0, sc.integrator, _tolerances(sc.raw), sc.raw.get("scenario_id", "")
    )
    return {
        "csv": to_csv(("t", "b", "regime"), trajectory_rows(traj, sc.params)),
        "report": json.dumps(report.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n",
    }


COMMANDS = {
    "simulate": cmd_simulate,
    "fixed-points": cmd_fixed_points,
    "sweep": cmd_sweep,
    "phase-portrait": cmd_phase_portrait,
    "validate": cmd_validate,
}


# --- entry point ------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError("arguments", message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="budgetdyn", description="Consumer budget dynamics simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in RUN_KINDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON scenario file")
        p.add_argument("--out", help="output CSV path (default: config 'output', else stdout)")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config field, e.g. params.a=0.125 (repeatable)",
        )
    return parser


def _read_config(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON in {path}: {exc}") from None


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        raw = _read_config(args.config)
        if not isinstance(raw, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        for assignment in args.overrides:
            apply_override(raw, assignment)
        if args.out is not None:
            raw["output"] = args.out
        sc = load_config(args.command, raw)
        outputs = COMMANDS[args.command](sc)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (NonFiniteStateError, ArithmeticError, ValueError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2

    out = sc.output
    if out is None:
        sys.stdout.write(outputs["csv"])
        if "report" in outputs:
            sys.stdout.write(outputs["report"])
        return 0
    files = {out: outputs["csv"]}
    if "report" in outputs:
        report_path = sc.raw.get("report") or str(Path(out).with_suffix(".report.json"))
        files[report_path] = outputs["report"]
    try:
        write_atomic(files)
    except OSError as exc:
        print(f"runtime error: cannot write output: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
