"""Error tables, hbar-curves, alpha sweeps and the ratio convergence diagnostic.

Everything here drives :mod:`qhatm.engine` and reduces its output to plain
rows of numbers; formatting is left to the command-line front end.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Optional, Sequence

import numpy as np

from ._parallel import pmap
from .engine import (
    QhatmParams,
    SolutionBundle,
    assemble,
    default_grid,
    initial_derivatives,
    qhatm_solve,
    residual,
    sample_initial,
)
from .errors import DomainError
from .models import ModelSpec, get_model

__all__ = [
    "ErrorRow",
    "ErrorTable",
    "TablePreset",
    "TABLE_PRESETS",
    "table_preset",
    "preset_params",
    "error_table",
    "run_preset",
    "hcurve_samples",
    "hcurve",
    "AlphaTrace",
    "alpha_sweep",
    "BoundCheck",
    "ConvergenceReport",
    "convergence_report",
    "max_residual",
]


@dataclass(frozen=True)
class ErrorRow:
    t: float
    x: float
    abs_err_u: float
    abs_err_v: float


@dataclass(frozen=True)
class ErrorTable:
    """Absolute errors of the assembled solution at a list of ``(t, x)`` points.

    ``reference`` maps a method name to one value per row, for side-by-side
    output with previously published errors.
    """

    rows: tuple[ErrorRow, ...]
    reference: Optional[dict[str, tuple[float, ...]]] = None

    def __post_init__(self):
        for r in self.rows:
            if not (math.isfinite(r.abs_err_u) and math.isfinite(r.abs_err_v)):
                raise DomainError(f"non-finite error at (t, x) = ({r.t}, {r.x})")
        if self.reference is not None:
            for name, col in self.reference.items():
                if len(col) != len(self.rows):
                    raise DomainError(f"reference column {name!r} has {len(col)} rows, expected {len(self.rows)}")

    def column(self, unknown: str) -> np.ndarray:
        if unknown not in ("u", "v"):
            raise DomainError(f"unknown must be 'u' or 'v', got {unknown!r}")
        return np.array([getattr(r, f"abs_err_{unknown}") for r in self.rows])

    def max_abs_err(self) -> float:
        return float(max(max(r.abs_err_u, r.abs_err_v) for r in self.rows))


@dataclass(frozen=True)
class TablePreset:
    """A reference error table: configuration, points and published columns.

    ``coordinates`` records the order in which the source lists each point,
    ``"t,x"`` or ``"x,t"``; ``points`` are always stored as ``(t, x)``.
    """

    name: str
    model: str
    unknown: str
    coordinates: str
    points: tuple[tuple[float, float], ...]
    reference: dict[str, tuple[float, ...]] = field(repr=False)
    x_min: float = 0.1
    x_max: float = 0.9


_PRESET_LAYOUT = {
    "table1": ("mb", "u"),
    "table2": ("mb", "v"),
    "table3": ("alw", "u"),
    "table4": ("alw", "v"),
}

TABLE_PRESETS = tuple(_PRESET_LAYOUT)


@lru_cache(maxsize=None)
def table_preset(name: str) -> TablePreset:
    """Load a built-in reference table (``table1`` .. ``table4``)."""
    if name not in _PRESET_LAYOUT:
        raise DomainError(f"unknown table preset {name!r}; expected one of {', '.join(TABLE_PRESETS)}")
    model, unknown = _PRESET_LAYOUT[name]
    text = resources.files("qhatm").joinpath("data").joinpath(f"{name}.csv").read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    reader = csv.DictReader(io.StringIO("\n".join(lines)))
    first, second = reader.fieldnames[:2]
    methods = reader.fieldnames[2:]
    points, cols = [], {m: [] for m in methods}
    for rec in reader:
        points.append((float(rec["t"]), float(rec["x"])))
        for m in methods:
            cols[m].append(float(rec[m]))
    return TablePreset(
        name=name,
        model=model,
        unknown=unknown,
        coordinates=f"{first},{second}",
        points=tuple(points),
        reference={m: tuple(v) for m, v in cols.items()},
    )


def preset_params(preset: TablePreset, order: int = 3, accuracy: int = 8) -> tuple[ModelSpec, QhatmParams]:
    """Model and solver settings of a reference table (``alpha = 1, hbar = -1, n = 1``)."""
    model = get_model(preset.model)
    grid = default_grid(model, order, preset.x_min, preset.x_max, accuracy=accuracy, residual=False)
    return model, QhatmParams(alpha=1.0, hbar=-1.0, n=1, order=order, grid=grid)


def error_table(
    model: ModelSpec,
    params: QhatmParams,
    points: Sequence[tuple[float, float]],
    reference: Optional[dict] = None,
    threads: Optional[int] = None,
    bundle: Optional[SolutionBundle] = None,
) -> ErrorTable:
    """``|exact - assembled|`` for ``u`` and ``v`` at each ``(t, x)``.

    Each ``x`` is snapped to its nearest interior node and both solutions are
    evaluated at that node's coordinate.

    Raises
    ------
    DomainError
        If ``alpha != 1`` or the model has no exact solution, or a point lies
        outside the interior window.
    """
    if params.alpha != 1.0:
        raise DomainError(f"exact solutions exist only for alpha = 1, got {params.alpha}")
    if not model.has_exact:
        raise DomainError(f"model {model.name!r} has no exact solution")
    grid = params.grid
    nodes = [grid.nearest_node(x) for _, x in points]
    if any(t < 0 for t, _ in points):
        raise DomainError("table times must be non-negative")
    if bundle is None:
        bundle = qhatm_solve(model, params, threads=threads)
    u, v = assemble(bundle)
    xs = grid.points
    rows = []
    for (t, _), k in zip(points, nodes):
        x = float(xs[k])
        uu = float(u.evaluate(t, params.alpha)[k])
        vv = float(v.evaluate(t, params.alpha)[k])
        eu = abs(float(model.exact_u(x, t)) - uu)
        ev = abs(float(model.exact_v(x, t)) - vv)
        rows.append(ErrorRow(float(t), x, eu, ev))
    return ErrorTable(tuple(rows), reference)


def run_preset(name: str, order: int = 3, accuracy: int = 8, threads: Optional[int] = None) -> tuple[TablePreset, ErrorTable]:
    preset = table_preset(name)
    model, params = preset_params(preset, order, accuracy)
    return preset, error_table(model, params, preset.points, preset.reference, threads)


def hcurve_samples(lo: float, hi: float, count: int) -> np.ndarray:
    """Sample positions for an hbar-curve; ``lo == hi`` or ``count == 1`` gives one."""
    if count < 1:
        raise DomainError(f"count must be at least 1, got {count}")
    if lo == hi or count == 1:
        return np.array([float(lo)])
    return np.linspace(lo, hi, int(count))


def _probe_node(params: QhatmParams, x: float) -> int:
    return params.grid.nearest_node(x)


def hcurve(
    model: ModelSpec,
    params: QhatmParams,
    hbar_range: tuple[float, float, int] = (-2.0, 0.5, 101),
    probe: tuple[float, float] = (1.0, 0.01),
    threads: Optional[int] = None,
) -> list[tuple[float, float, float]]:
    """Assembled ``(u, v)`` at a fixed ``(x, t)`` as ``hbar`` varies.

    Every sample is an independent solve; they share the sampled initial
    data and its derivatives. A sample at ``hbar = 0`` is skipped (the
    recurrence degenerates there).
    """
    lo, hi, count = hbar_range
    x, t = probe
    k = _probe_node(params, x)
    initial = sample_initial(model, params)
    seed = initial_derivatives(model, initial)
    hbars = [h for h in hcurve_samples(lo, hi, count) if h != 0.0]

    def one(hb):
        b = qhatm_solve(model, params.replace(hbar=float(hb)), threads=1, initial=initial, seed=seed)
        u, v = assemble(b)
        return float(hb), float(u.evaluate(t, params.alpha)[k]), float(v.evaluate(t, params.alpha)[k])

    return pmap(one, hbars, threads)


@dataclass(frozen=True)
class AlphaTrace:
    alpha: float
    x: float
    times: np.ndarray
    u: np.ndarray
    v: np.ndarray


def alpha_sweep(
    model: ModelSpec,
    params: QhatmParams,
    alphas: Sequence[float],
    x: float,
    times: Sequence[float],
    threads: Optional[int] = None,
) -> list[AlphaTrace]:
    """Assembled solution along ``times`` at a fixed ``x`` for each ``alpha``.

    The sampled initial data and its spatial derivatives are computed once
    and reused for every ``alpha``.
    """
    for a in alphas:
        if not 0.0 < a <= 1.0:
            raise DomainError(f"alpha must satisfy 0 < alpha ≤ 1, got {a}")
    k = _probe_node(params, x)
    xk = float(params.grid.points[k])
    times = np.asarray(times, dtype=float)
    initial = sample_initial(model, params)
    seed = initial_derivatives(model, initial)

    def one(a):
        p = params.replace(alpha=float(a))
        b = qhatm_solve(model, p, threads=1, initial=initial, seed=seed)
        u, v = assemble(b)
        uu = np.array([u.evaluate(t, p.alpha)[k] for t in times])
        vv = np.array([v.evaluate(t, p.alpha)[k] for t in times])
        return AlphaTrace(float(a), xk, times, uu, vv)

    return pmap(one, list(alphas), threads)


def max_residual(bundle: SolutionBundle, t: float) -> float:
    """Largest absolute residual of either equation over the interior at time ``t``."""
    ru, rv = residual(bundle, t)
    return float(max(np.max(np.abs(ru)), np.max(np.abs(rv))))


@dataclass(frozen=True)
class BoundCheck:
    """Tail after truncation level ``i`` against ``rho**(i+1) / (1 - rho) * |U_0|``.

    ``bound`` is None when ``rho >= 1`` or no ratio is available.
    """

    i: int
    tail: float
    bound: Optional[float]

    @property
    def applicable(self) -> bool:
        return self.bound is not None

    @property
    def holds(self) -> Optional[bool]:
        return None if self.bound is None else self.tail <= self.bound


@dataclass(frozen=True)
class ConvergenceReport:
    """Ratio diagnostic for the weighted iterates ``(1/n)**m U_m``.

    ``norms[m]`` is the max absolute value of ``(1/n)**m (u_m, v_m)`` over the
    interior nodes and the time window; ``rho_estimates[m]`` is
    ``norms[m+1] / norms[m]`` or None when either norm is treated as zero.
    """

    times: tuple[float, ...]
    norms: tuple[float, ...]
    rho_estimates: tuple[Optional[float], ...]
    rho: Optional[float]
    bound_check: tuple[BoundCheck, ...]

    @property
    def converging(self) -> bool:
        present = [r for r in self.rho_estimates if r is not None]
        return bool(present) and all(r < 1.0 for r in present)


def _window_norm(fields, times, alpha) -> float:
    best = 0.0
    for f in fields:
        for t in times:
            best = max(best, float(np.max(np.abs(f.interior_values(t, alpha)))))
    return best


def convergence_report(
    bundle: SolutionBundle,
    times: Optional[Sequence[float]] = None,
    zero_floor: float = 0.0,
) -> ConvergenceReport:
    """Empirical ratios ``rho_m`` and the geometric tail bound at every level.

    Parameters
    ----------
    bundle : SolutionBundle
        Needs at least two iterates beyond ``m = 0``.
    times : sequence of float, optional
        Time window for the norm; defaults to 11 points on ``[0, 0.5]``.
    zero_floor : float
        Norms at or below this are treated as zero, so their ratios are
        reported as absent. With finite differences an analytically zero
        iterate still carries rounding noise, so a small positive floor is
        needed to recognise it.
    """
    if bundle.order < 2:
        raise DomainError(f"convergence_report needs order ≥ 2, got {bundle.order}")
    times = tuple(float(t) for t in (np.linspace(0.0, 0.5, 11) if times is None else times))
    alpha = bundle.params.alpha
    w = bundle.weights()
    scaled = [(u.scale(wm), v.scale(wm)) for (u, v), wm in zip(bundle.iterates, w)]
    norms = tuple(_window_norm(pair, times, alpha) for pair in scaled)

    rhos = []
    for m in range(len(norms) - 1):
        a, b = norms[m], norms[m + 1]
        rhos.append(b / a if a > zero_floor and b > zero_floor else None)
    present = [r for r in rhos if r is not None]
    rho = max(present) if present else None

    checks = []
    for i in range(bundle.order):
        tail_u, tail_v = scaled[i + 1]
        for u, v in scaled[i + 2:]:
            tail_u, tail_v = tail_u + u, tail_v + v
        tail = _window_norm((tail_u, tail_v), times, alpha)
        bound = None
        if rho is not None and rho < 1.0:
            bound = rho ** (i + 1) / (1.0 - rho) * norms[0]
        checks.append(BoundCheck(i, tail, bound))
    return ConvergenceReport(times, norms, tuple(rhos), rho, tuple(checks))
