"""Command-line front end: ``qhatm <subcommand> [--config FILE] [flags]``.

Configuration is a flat JSON object; every key can also be given as a flag
(``order`` -> ``--order``). Values resolve as flags > config file >
defaults, where a table preset supplies its own defaults. Unknown keys are
rejected.

Output is CSV: one ``# schema: <name> <columns>`` comment line, a header
row, then data rows. Floats use the shortest repr that round-trips. With
``--json PATH`` the same rows are also written as JSON.

Exit status is 0 on success, 2 when the configuration is invalid and 3
when the computation fails.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np

from .analysis import (
    TABLE_PRESETS,
    alpha_sweep,
    convergence_report,
    error_table,
    hcurve,
    table_preset,
)
from .engine import QhatmParams, assemble, default_grid, qhatm_solve, required_halo, residual
from .errors import ConfigError, DomainError, QhatmError
from .models import REFERENCE_PARAMETERS, get_model
from .spatial import GridSpec

__all__ = ["main", "build_parser", "resolve_config", "RunConfig", "SUBCOMMANDS"]

SUBCOMMANDS = ("solve", "table", "hcurve", "alpha-sweep", "residual", "convergence")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

DEFAULTS: dict[str, Any] = {
    "model": "mb",
    "omega": REFERENCE_PARAMETERS["omega"],
    "ell": REFERENCE_PARAMETERS["ell"],
    "c": REFERENCE_PARAMETERS["c"],
    "a": None,
    "b": None,
    "alpha": 1.0,
    "hbar": -1.0,
    "n": 1,
    "order": 3,
    "x_min": 0.0,
    "x_max": 1.0,
    "n_interior": None,
    "spacing": None,
    "accuracy": 8,
    "times": None,
    "threads": None,
    "output": None,
    "json": None,
    "preset": None,
    "points": None,
    "hbar_range": [-2.0, 0.5, 101],
    "probe_x": 1.0,
    "probe_t": 0.01,
    "alphas": [1.0, 0.75, 0.5],
    "zero_floor": 0.0,
}

_DEFAULT_TIMES = {
    "solve": [0.1],
    "table": None,
    "hcurve": None,
    "alpha-sweep": [round(0.05 * k, 2) for k in range(11)],
    "residual": [0.1, 0.05],
    "convergence": [round(0.05 * k, 2) for k in range(11)],
}


@dataclass(frozen=True)
class RunConfig:
    """A fully validated configuration; ``values`` holds the resolved keys."""

    command: str
    values: dict

    def __getitem__(self, key):
        return self.values[key]


# -- parsing -----------------------------------------------------------------


def _floats(text: str) -> list[float]:
    return [float(s) for s in text.split(",") if s.strip()]


def _point(text: str) -> dict:
    out = {}
    for part in text.split(","):
        key, sep, val = part.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected t=...,x=..., got {text!r}")
        out[key.strip()] = float(val)
    if set(out) != {"t", "x"}:
        raise argparse.ArgumentTypeError(f"a point needs exactly t and x, got {text!r}")
    return out


def _hbar_range(text: str) -> list:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("hbar range is lo,hi,count")
    return [float(parts[0]), float(parts[1]), int(parts[2])]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qhatm", description="q-HATM series solver for fractional WBK systems")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--model", choices=("mb", "alw", "wbk"))
        for key in ("omega", "ell", "c", "a", "b", "alpha", "hbar", "x-min", "x-max", "spacing", "zero-floor"):
            p.add_argument(f"--{key}", type=float)
        for key in ("n", "order", "n-interior", "accuracy", "threads"):
            p.add_argument(f"--{key}", type=int)
        p.add_argument("--times", type=_floats, help="comma-separated times")
        p.add_argument("-o", "--output", help="CSV path (default: stdout)")
        p.add_argument("--json", help="also write rows as JSON to this path")
        if name == "table":
            p.add_argument("--preset", choices=TABLE_PRESETS)
            p.add_argument("--point", dest="points", type=_point, action="append", help="t=...,x=... (repeatable)")
        if name == "hcurve":
            p.add_argument("--hbar-range", type=_hbar_range, help="lo,hi,count")
        if name in ("hcurve", "alpha-sweep"):
            p.add_argument("--probe-x", type=float)
        if name == "hcurve":
            p.add_argument("--probe-t", type=float)
        if name == "alpha-sweep":
            p.add_argument("--alphas", type=_floats)
    return parser


# -- configuration -------------------------------------------------------------


def _load_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path} is not valid JSON: {exc.msg} (line {exc.lineno})") from None
    if not isinstance(data, dict):
        raise ConfigError("config", "the configuration must be a JSON object")
    unknown = sorted(set(data) - set(DEFAULTS))
    if unknown:
        raise ConfigError(unknown[0], f"unknown configuration key(s): {', '.join(unknown)}")
    return data


def _number(values: dict, key: str, integer: bool = False, optional: bool = False):
    v = values[key]
    if v is None and optional:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(key, f"{key} must be a number, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(key, f"{key} must be finite")
    if integer:
        if int(v) != v:
            raise ConfigError(key, f"{key} must be an integer, got {v!r}")
        return int(v)
    return float(v)


def _number_list(values: dict, key: str) -> list[float]:
    v = values[key]
    if not isinstance(v, list) or not v:
        raise ConfigError(key, f"{key} must be a non-empty list of numbers")
    out = []
    for item in v:
        if isinstance(item, bool) or not isinstance(item, (int, float)) or not math.isfinite(item):
            raise ConfigError(key, f"{key} entries must be finite numbers, got {item!r}")
        out.append(float(item))
    return out


def resolve_config(command: str, file_values: Optional[dict] = None, flag_values: Optional[dict] = None) -> RunConfig:
    """Merge defaults, file and flags, then validate every field.

    Raises
    ------
    ConfigError
        Naming the first offending field.
    """
    if command not in SUBCOMMANDS:
        raise ConfigError("command", f"unknown subcommand {command!r}")
    file_values = dict(file_values or {})
    flag_values = {k: v for k, v in (flag_values or {}).items() if v is not None}
    for source in (file_values, flag_values):
        unknown = sorted(set(source) - set(DEFAULTS))
        if unknown:
            raise ConfigError(unknown[0], f"unknown configuration key(s): {', '.join(unknown)}")

    values = dict(DEFAULTS)
    values["times"] = _DEFAULT_TIMES[command]
    preset_name = flag_values.get("preset", file_values.get("preset"))
    if command == "table" and preset_name is not None:
        if preset_name not in TABLE_PRESETS:
            raise ConfigError("preset", f"unknown preset {preset_name!r}; expected one of {', '.join(TABLE_PRESETS)}")
        preset = table_preset(preset_name)
        values.update(model=preset.model, x_min=preset.x_min, x_max=preset.x_max,
                      alpha=1.0, hbar=-1.0, n=1, order=3)
    values.update(file_values)
    values.update(flag_values)
    return RunConfig(command, _validate(command, values))


def _validate(command: str, values: dict) -> dict:
    v = dict(values)
    if v["model"] not in ("mb", "alw", "wbk"):
        raise ConfigError("model", f"model must be 'mb', 'alw' or 'wbk', got {v['model']!r}")
    for key in ("omega", "ell", "c"):
        v[key] = _number(v, key)
    for key in ("a", "b"):
        v[key] = _number(v, key, optional=True)
        if v[key] is not None and v["model"] != "wbk":
            raise ConfigError(key, f"{key} can only be set for model 'wbk'")
    v["alpha"] = _number(v, "alpha")
    if not 0.0 < v["alpha"] <= 1.0:
        raise ConfigError("alpha", f"alpha must satisfy 0 < alpha ≤ 1, got {v['alpha']}")
    v["hbar"] = _number(v, "hbar")
    if v["hbar"] == 0.0:
        raise ConfigError("hbar", "hbar must be nonzero")
    n = v["n"]
    if isinstance(n, bool) or not isinstance(n, (int, float)) or int(n) != n or n < 1:
        raise ConfigError("n", f"n must be an integer with n ≥ 1, got {n!r}")
    v["n"] = int(n)
    v["order"] = _number(v, "order", integer=True)
    if v["order"] < 0:
        raise ConfigError("order", f"order must be ≥ 0, got {v['order']}")
    v["accuracy"] = _number(v, "accuracy", integer=True)
    if v["accuracy"] < 2 or v["accuracy"] % 2:
        raise ConfigError("accuracy", f"accuracy must be a positive even integer, got {v['accuracy']}")
    v["x_min"], v["x_max"] = _number(v, "x_min"), _number(v, "x_max")
    if not v["x_max"] > v["x_min"]:
        raise ConfigError("x_max", "x_max must exceed x_min")
    v["n_interior"] = _number(v, "n_interior", integer=True, optional=True)
    if v["n_interior"] is not None and v["n_interior"] < 5:
        raise ConfigError("n_interior", "n_interior must be at least 5")
    v["spacing"] = _number(v, "spacing", optional=True)
    if v["spacing"] is not None and v["spacing"] <= 0:
        raise ConfigError("spacing", "spacing must be positive")
    if v["spacing"] is not None and v["n_interior"] is not None:
        raise ConfigError("spacing", "give either spacing or n_interior, not both")
    v["threads"] = _number(v, "threads", integer=True, optional=True)
    if v["threads"] is not None and v["threads"] < 1:
        raise ConfigError("threads", "threads must be at least 1")
    v["zero_floor"] = _number(v, "zero_floor")
    if v["zero_floor"] < 0:
        raise ConfigError("zero_floor", "zero_floor must be non-negative")
    for key in ("output", "json"):
        if v[key] is not None and not isinstance(v[key], str):
            raise ConfigError(key, f"{key} must be a path string")

    if v["times"] is not None:
        v["times"] = _number_list(v, "times")
        if any(t < 0 for t in v["times"]):
            raise ConfigError("times", "times must be non-negative")

    if command == "table":
        _validate_table(v)
    if command == "hcurve":
        hr = v["hbar_range"]
        if not isinstance(hr, list) or len(hr) != 3:
            raise ConfigError("hbar_range", "hbar_range must be [lo, hi, count]")
        lo, hi = _number({"lo": hr[0]}, "lo"), _number({"hi": hr[1]}, "hi")
        count = hr[2]
        if isinstance(count, bool) or not isinstance(count, (int, float)) or int(count) != count or count < 1:
            raise ConfigError("hbar_range", f"hbar_range count must be a positive integer, got {count!r}")
        v["hbar_range"] = [lo, hi, int(count)]
        v["probe_x"], v["probe_t"] = _number(v, "probe_x"), _number(v, "probe_t")
        if v["probe_t"] < 0:
            raise ConfigError("probe_t", "probe_t must be non-negative")
    if command == "alpha-sweep":
        v["probe_x"] = _number(v, "probe_x")
        v["alphas"] = _number_list(v, "alphas")
        for a in v["alphas"]:
            if not 0.0 < a <= 1.0:
                raise ConfigError("alphas", f"alphas must satisfy 0 < alpha ≤ 1, got {a}")
    if command in ("residual", "convergence") and v["order"] < (2 if command == "convergence" else 0):
        raise ConfigError("order", "convergence needs order ≥ 2")

    try:
        model = _model(v)
        grid = _grid(v, model)
        params = QhatmParams(v["alpha"], v["hbar"], v["n"], v["order"], grid)
    except DomainError as exc:
        raise ConfigError("model", str(exc)) from None
    v["_model"], v["_params"] = model, params
    _check_window(command, v, grid)
    return v


def _validate_table(v: dict) -> None:
    if v["preset"] is None and not v["points"]:
        raise ConfigError("points", "table needs a preset or at least one point t=...,x=...")
    if v["preset"] is not None and v["points"]:
        raise ConfigError("points", "give either a preset or explicit points, not both")
    if v["alpha"] != 1.0:
        raise ConfigError("alpha", "error tables need alpha = 1 (exact solutions exist only there)")
    if v["points"]:
        pts = []
        for p in v["points"]:
            if not isinstance(p, dict) or set(p) != {"t", "x"}:
                raise ConfigError("points", f"each point must be an object with keys t and x, got {p!r}")
            t, x = _number(p, "t"), _number(p, "x")
            if t < 0:
                raise ConfigError("points", f"point time must be non-negative, got {t}")
            pts.append((t, x))
        v["points"] = pts


def _model(v: dict):
    overrides = {k: v[k] for k in ("omega", "ell", "c")}
    if v["model"] == "wbk":
        overrides.update({k: v[k] for k in ("a", "b") if v[k] is not None})
    return get_model(v["model"], **overrides)


def _grid(v: dict, model) -> GridSpec:
    if v["n_interior"] is None:
        return default_grid(model, v["order"], v["x_min"], v["x_max"], v["spacing"], v["accuracy"], residual=True)
    halo = required_halo(model, v["order"], v["accuracy"], residual=True)
    return GridSpec(v["x_min"], v["x_max"], v["n_interior"], halo, v["accuracy"])


def _check_window(command: str, v: dict, grid: GridSpec) -> None:
    probes = []
    if command == "table":
        pts = v["points"] or table_preset(v["preset"]).points
        probes = [("points", x) for _, x in pts]
    elif command in ("hcurve", "alpha-sweep"):
        probes = [("probe_x", v["probe_x"])]
    for key, x in probes:
        try:
            grid.nearest_node(x)
        except DomainError as exc:
            raise ConfigError(key, str(exc)) from None


# -- commands ------------------------------------------------------------------


@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[list]


def cmd_solve(cfg: RunConfig) -> Table:
    model, params = cfg["_model"], cfg["_params"]
    u, v = assemble(qhatm_solve(model, params, threads=cfg["threads"]))
    xs = params.grid.interior_points
    rows = []
    for t in cfg["times"]:
        uu, vv = u.interior_values(t, params.alpha), v.interior_values(t, params.alpha)
        rows += [[t, float(x), float(a), float(b)] for x, a, b in zip(xs, uu, vv)]
    return Table("solve", ["t", "x", "u", "v"], rows)


def cmd_table(cfg: RunConfig) -> Table:
    model, params = cfg["_model"], cfg["_params"]
    if cfg["preset"] is None:
        tab = error_table(model, params, cfg["points"], threads=cfg["threads"])
        rows = [[r.t, r.x, r.abs_err_u, r.abs_err_v] for r in tab.rows]
        return Table("table", ["t", "x", "abs_err_u", "abs_err_v"], rows)
    preset = table_preset(cfg["preset"])
    tab = error_table(model, params, preset.points, preset.reference, threads=cfg["threads"])
    methods = [m for m in preset.reference if m != "qHATM"]
    columns = ["t", "x", f"abs_err_{preset.unknown}", "ref_qhatm"] + [f"ref_{m}" for m in methods]
    rows = []
    for k, r in enumerate(tab.rows):
        err = r.abs_err_u if preset.unknown == "u" else r.abs_err_v
        rows.append([r.t, r.x, err, preset.reference["qHATM"][k]] + [preset.reference[m][k] for m in methods])
    return Table(f"table.{preset.name}", columns, rows)


def cmd_hcurve(cfg: RunConfig) -> Table:
    model, params = cfg["_model"], cfg["_params"]
    lo, hi, count = cfg["hbar_range"]
    x, t = cfg["probe_x"], cfg["probe_t"]
    xk = float(params.grid.points[params.grid.nearest_node(x)])
    curve = hcurve(model, params, (lo, hi, count), (x, t), threads=cfg["threads"])
    return Table("hcurve", ["hbar", "x", "t", "u", "v"], [[h, xk, t, u, v] for h, u, v in curve])


def cmd_alpha_sweep(cfg: RunConfig) -> Table:
    model, params = cfg["_model"], cfg["_params"]
    traces = alpha_sweep(model, params, cfg["alphas"], cfg["probe_x"], cfg["times"], threads=cfg["threads"])
    rows = []
    for tr in traces:
        rows += [[tr.alpha, float(t), tr.x, float(u), float(v)] for t, u, v in zip(tr.times, tr.u, tr.v)]
    return Table("alpha-sweep", ["alpha", "t", "x", "u", "v"], rows)


def cmd_residual(cfg: RunConfig) -> Table:
    model, params = cfg["_model"], cfg["_params"]
    bundle = qhatm_solve(model, params, threads=cfg["threads"])
    xs = params.grid.interior_points
    rows = []
    for t in cfg["times"]:
        ru, rv = residual(bundle, t)
        rows += [[t, float(x), float(a), float(b)] for x, a, b in zip(xs, ru, rv)]
    return Table("residual", ["t", "x", "r_u", "r_v"], rows)


def cmd_convergence(cfg: RunConfig) -> Table:
    model, params = cfg["_model"], cfg["_params"]
    bundle = qhatm_solve(model, params, threads=cfg["threads"])
    rep = convergence_report(bundle, cfg["times"], cfg["zero_floor"])
    rows = []
    for m, norm in enumerate(rep.norms):
        rho = rep.rho_estimates[m] if m < len(rep.rho_estimates) else None
        check = rep.bound_check[m] if m < len(rep.bound_check) else None
        rows.append([
            m,
            norm,
            rho,
            None if check is None else check.tail,
            None if check is None else check.bound,
            None if check is None else check.holds,
        ])
    return Table("convergence", ["m", "norm", "rho", "tail", "bound", "bound_holds"], rows)


COMMANDS = {
    "solve": cmd_solve,
    "table": cmd_table,
    "hcurve": cmd_hcurve,
    "alpha-sweep": cmd_alpha_sweep,
    "residual": cmd_residual,
    "convergence": cmd_convergence,
}


# -- output --------------------------------------------------------------------


def format_value(x) -> str:
    """Shortest round-trip text for floats; empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def render_csv(table: Table) -> str:
    lines = [f"# schema: {table.name} {','.join(table.columns)}", ",".join(table.columns)]
    lines += [",".join(format_value(x) for x in row) for row in table.rows]
    return "\n".join(lines) + "\n"


def _json_value(x):
    if x is None or isinstance(x, (bool, np.bool_)):
        return None if x is None else bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    return float(x)


def render_json(table: Table) -> str:
    doc = {
        "schema": table.name,
        "columns": table.columns,
        "rows": [[_json_value(x) for x in row] for row in table.rows],
    }
    return json.dumps(doc, indent=1) + "\n"


def _write(path: Optional[str], text: str, stdout) -> None:
    if path is None:
        stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    if flags.get("points"):
        flags["points"] = [dict(p) for p in flags["points"]]
    try:
        file_values = _load_file(args.config) if args.config else {}
        cfg = resolve_config(args.command, file_values, flags)
    except ConfigError as exc:
        print(f"qhatm: config error: {exc}", file=stderr)
        return EXIT_CONFIG
    try:
        table = COMMANDS[args.command](cfg)
        _write(cfg["output"], render_csv(table), stdout)
        if cfg["json"] is not None:
            _write(cfg["json"], render_json(table), stdout)
    except (QhatmError, ArithmeticError, OSError) as exc:
        print(f"qhatm: {args.command} failed: {exc}", file=stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
