"""The q-homotopy iterate recurrence, solution assembly and residuals.

Working directly in the time domain, the m-th order deformation equations
read (with ``H = 1`` and no source term)::

    u_m = (k_m + hbar) u_{m-1} - hbar (1 - k_m/n) u_0 + hbar J^alpha[N1_{m-1}]
    v_m = (k_m + hbar) v_{m-1} - hbar (1 - k_m/n) v_0 + hbar J^alpha[N2_{m-1}]

    N1_{m-1} = sum_i u_i d_x u_{m-1-i} + d_x v_{m-1} + b d_xx u_{m-1}
    N2_{m-1} = sum_i (u_i d_x v_{m-1-i} + v_i d_x u_{m-1-i})
               + a d_xxx u_{m-1} - b d_xx v_{m-1}

``k_m`` is 0 for ``m <= 1`` and ``n`` otherwise. Applying ``s**-alpha`` in
Laplace space and inverting is exactly ``J^alpha`` on the ``t**(k alpha)``
lattice, so no transform is ever evaluated numerically. The truncated
solution is ``sum_m u_m (1/n)**m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from typing import Optional, Sequence

import numpy as np

from ._parallel import pmap
from .errors import DomainError, HaloError
from .fracseries import caputo_coeffs, jalpha_coeffs
from .models import ModelSpec
from .spatial import FieldSeries, GridSpec, fd_derivative, sample_field, stencil_half_width

__all__ = [
    "QhatmParams",
    "SolutionBundle",
    "k_factor",
    "halo_per_step",
    "required_halo",
    "default_spacing",
    "default_grid",
    "sample_initial",
    "initial_derivatives",
    "qhatm_step",
    "qhatm_solve",
    "assemble",
    "residual",
]


@dataclass(frozen=True)
class QhatmParams:
    """Solver configuration.

    ``order`` is the number of iterates ``M`` computed beyond ``m = 0``; it is
    also the truncation order of every time series.
    """

    alpha: float
    hbar: float
    n: int
    order: int
    grid: GridSpec

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise DomainError(f"alpha must satisfy 0 < alpha ≤ 1, got {self.alpha}")
        if not math.isfinite(self.hbar) or self.hbar == 0.0:
            raise DomainError(f"hbar must be finite and nonzero, got {self.hbar}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be an integer with n ≥ 1, got {self.n}")
        if int(self.order) != self.order or self.order < 0:
            raise DomainError(f"order must be a non-negative integer, got {self.order}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "order", int(self.order))

    def replace(self, **changes) -> "QhatmParams":
        fields = dict(alpha=self.alpha, hbar=self.hbar, n=self.n, order=self.order, grid=self.grid)
        fields.update(changes)
        return QhatmParams(**fields)


@dataclass(frozen=True)
class SolutionBundle:
    """Iterates ``(u_m, v_m)`` for ``m = 0..M`` together with their inputs."""

    params: QhatmParams
    model: ModelSpec
    iterates: tuple[tuple[FieldSeries, FieldSeries], ...]

    @property
    def order(self) -> int:
        return len(self.iterates) - 1

    def weights(self) -> list[float]:
        """Assembly weights ``(1/n)**m``."""
        return [(1.0 / self.params.n) ** m for m in range(len(self.iterates))]


def k_factor(m: int, n: int) -> int:
    """``0`` for the first iterate, ``n`` afterwards."""
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    return 0 if m <= 1 else int(n)


def halo_per_step(model: ModelSpec, accuracy: int) -> int:
    """Ghost points consumed by one iteration (the widest stencil involved)."""
    return max(stencil_half_width(d, accuracy) for d in model.derivative_orders())


def required_halo(model: ModelSpec, order: int, accuracy: int, residual: bool = False) -> int:
    return halo_per_step(model, accuracy) * (order + (1 if residual else 0))


def default_spacing(model: ModelSpec) -> float:
    """Grid spacing that keeps rounding noise below 1e-10 through three iterates.

    Chained derivatives amplify sampling round-off like ``h**-p`` where ``p``
    is the total derivative count along the chain; with a third-derivative
    term (``a != 0``) that chain is longest, so a coarser grid is used.
    """
    return 0.2 if model.a != 0 else 0.1


def default_grid(
    model: ModelSpec,
    order: int,
    x_min: float = 0.0,
    x_max: float = 1.0,
    spacing: Optional[float] = None,
    accuracy: int = 8,
    residual: bool = True,
) -> GridSpec:
    """Grid on ``[x_min, x_max]`` with enough halo for ``order`` iterates.

    With ``residual=True`` one extra derivative chain is reserved so
    :func:`residual` can be evaluated on the assembled solution.
    """
    h = default_spacing(model) if spacing is None else spacing
    n_interior = max(5, int(round((x_max - x_min) / h)) + 1)
    x_max = x_min + (n_interior - 1) * h
    halo = required_halo(model, order, accuracy, residual)
    return GridSpec(x_min, x_max, n_interior, halo, accuracy)


def sample_initial(model: ModelSpec, params: QhatmParams) -> tuple[FieldSeries, FieldSeries]:
    guard = model.singular_mask
    u0 = sample_field(params.grid, model.u0, params.order, guard=guard)
    v0 = sample_field(params.grid, model.v0, params.order, guard=guard)
    return u0, v0


class _Derivatives:
    """Memoised spatial derivatives of the iterates, keyed by (unknown, m, order)."""

    def __init__(self, seed: Optional[dict] = None):
        self._store = dict(seed or {})

    def get(self, which: str, m: int, field: FieldSeries, order: int) -> FieldSeries:
        key = (which, m, order)
        if key not in self._store:
            self._store[key] = fd_derivative(field, order)
        return self._store[key]

    def seed(self) -> dict:
        return {k: v for k, v in self._store.items() if k[1] == 0}


def initial_derivatives(model: ModelSpec, initial: tuple[FieldSeries, FieldSeries]) -> dict:
    """Spatial derivatives of the ``m = 0`` iterates.

    They depend on neither ``alpha`` nor ``hbar``, so sweeps over those
    parameters compute them once and pass the result to :func:`qhatm_solve`.
    """
    cache = _Derivatives()
    u0, v0 = initial
    for d in model.derivative_orders():
        cache.get("u", 0, u0, d)
        if d < 3:
            cache.get("v", 0, v0, d)
    return cache.seed()


def _sum(fields: Sequence[FieldSeries]) -> FieldSeries:
    total = fields[0]
    for f in fields[1:]:
        total = total + f
    return total


def _nonlinear_u(model, us, vs, du, dv, m):
    """``N1_{m-1}``: u-equation spatial operator applied to iterates 0..m-1."""
    terms = [us[i].mul(du[m - 1 - i][1]) for i in range(m)]
    terms.append(dv[m - 1][1])
    if model.b != 0:
        terms.append(du[m - 1][2].scale(model.b))
    return _sum(terms)


def _nonlinear_v(model, us, vs, du, dv, m):
    """``N2_{m-1}``: v-equation spatial operator applied to iterates 0..m-1."""
    terms = [us[i].mul(dv[m - 1 - i][1]) for i in range(m)]
    terms += [vs[i].mul(du[m - 1 - i][1]) for i in range(m)]
    if model.a != 0:
        terms.append(du[m - 1][3].scale(model.a))
    if model.b != 0:
        terms.append(dv[m - 1][2].scale(-model.b))
    return _sum(terms)


def _update(params, m, prev, first, nonlinear):
    k = k_factor(m, params.n)
    hb = params.hbar
    out = nonlinear.map_coeffs(partial(jalpha_coeffs, alpha=params.alpha)).scale(hb)
    if m > 1:
        # for m = 1 the two linear terms cancel identically
        out = out + prev.scale(k + hb)
        lin0 = -hb * (1.0 - k / params.n)
        if lin0 != 0.0:
            out = out + first.scale(lin0)
    # a source term f(x, t) would contribute -hbar (1 - k/n) J^alpha[f] here
    return out


def qhatm_step(
    model: ModelSpec,
    params: QhatmParams,
    prior: Sequence[tuple[FieldSeries, FieldSeries]],
    cache: Optional[_Derivatives] = None,
    threads: Optional[int] = None,
) -> tuple[FieldSeries, FieldSeries]:
    """Compute ``(u_m, v_m)`` from iterates ``0..m-1`` where ``m = len(prior)``."""
    m = len(prior)
    if m < 1:
        raise DomainError("prior must contain at least the initial iterate")
    cache = cache if cache is not None else _Derivatives()
    us = [p[0] for p in prior]
    vs = [p[1] for p in prior]
    orders = model.derivative_orders()
    need_u = {1} | ({2} if model.b != 0 else set()) | ({3} if model.a != 0 else set())
    need_v = {1} | ({2} if model.b != 0 else set())
    du, dv = [], []
    for j in range(m):
        # higher derivatives only ever act on the newest iterate
        ou = need_u if j == m - 1 else {1}
        ov = need_v if j == m - 1 else {1}
        du.append({d: cache.get("u", j, us[j], d) for d in orders if d in ou})
        dv.append({d: cache.get("v", j, vs[j], d) for d in orders if d in ov})

    def build(which):
        if which == "u":
            return _update(params, m, us[m - 1], us[0], _nonlinear_u(model, us, vs, du, dv, m))
        return _update(params, m, vs[m - 1], vs[0], _nonlinear_v(model, us, vs, du, dv, m))

    u_m, v_m = pmap(build, ["u", "v"], threads)
    return u_m, v_m


def _check_halo(model: ModelSpec, params: QhatmParams) -> None:
    need = required_halo(model, params.order, params.grid.accuracy)
    if params.grid.halo < need:
        raise HaloError(need, params.grid.halo, f"{params.order} iterates of model {model.name!r}")


def qhatm_solve(
    model: ModelSpec,
    params: QhatmParams,
    threads: Optional[int] = None,
    initial: Optional[tuple[FieldSeries, FieldSeries]] = None,
    seed: Optional[dict] = None,
) -> SolutionBundle:
    """Run the recurrence for ``m = 1..params.order``.

    The grid halo is checked up front against the total demand of all
    iterations, so an undersized grid fails before any work is done.
    ``initial`` and ``seed`` (from :func:`initial_derivatives`) let sweeps
    reuse the sampled initial data and its derivatives.
    """
    _check_halo(model, params)
    if initial is None:
        initial = sample_initial(model, params)
    cache = _Derivatives(seed)
    iterates = [tuple(initial)]
    for _ in range(params.order):
        iterates.append(qhatm_step(model, params, iterates, cache, threads))
    return SolutionBundle(params, model, tuple(iterates))


def assemble(bundle: SolutionBundle) -> tuple[FieldSeries, FieldSeries]:
    """Weighted sum ``sum_m (1/n)**m (u_m, v_m)``."""
    w = bundle.weights()
    u = bundle.iterates[0][0]
    v = bundle.iterates[0][1]
    for m in range(1, len(bundle.iterates)):
        um, vm = bundle.iterates[m]
        u = u + (um if w[m] == 1.0 else um.scale(w[m]))
        v = v + (vm if w[m] == 1.0 else vm.scale(w[m]))
    return u, v


def residual(bundle: SolutionBundle, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Residual of the governing equations for the assembled solution at time ``t``.

    The assembled polynomial in ``t**alpha`` is lifted to order ``2M`` so the
    quadratic terms are formed without truncation; the Caputo derivative is
    applied exactly on the series. Returns ``(r_u, r_v)`` on the interior
    nodes.

    Raises
    ------
    HaloError
        If the grid has no halo left for one more derivative chain.
    """
    if t < 0:
        raise DomainError(f"t must be non-negative, got {t}")
    model, params = bundle.model, bundle.params
    u, v = assemble(bundle)
    order = 2 * max(bundle.order, 1)
    u, v = u.with_order(order), v.with_order(order)
    alpha = params.alpha
    ux, vx = fd_derivative(u, 1), fd_derivative(v, 1)
    dtu = u.map_coeffs(partial(caputo_coeffs, alpha=alpha))
    dtv = v.map_coeffs(partial(caputo_coeffs, alpha=alpha))
    ru = dtu + u.mul(ux) + vx
    rv = dtv + u.mul(vx) + v.mul(ux)
    if model.b != 0:
        ru = ru + fd_derivative(u, 2).scale(model.b)
        rv = rv + fd_derivative(v, 2).scale(-model.b)
    if model.a != 0:
        rv = rv + fd_derivative(u, 3).scale(model.a)
    return ru.interior_values(t, alpha), rv.interior_values(t, alpha)
