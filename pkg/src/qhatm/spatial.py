"""Uniform 1-D grids, central finite differences and halo bookkeeping.

Fields live on a padded grid: ``n_interior`` reporting points plus ``halo``
ghost points on each side. Every derivative consumes ghost points from the
outside in (a shrinking halo), so the interior is always differentiated with
the same central stencil and no one-sided closures are needed. Points that
fall outside the remaining halo are set to NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, HaloError, OrderMismatchError, SingularityError
from .fracseries import eval_coeffs, mul_coeffs

__all__ = [
    "GridSpec",
    "FieldSeries",
    "Stencil",
    "central_stencil",
    "stencil_half_width",
    "fd_derivative",
    "sample_field",
]


def stencil_half_width(deriv_order: int, accuracy: int = 4) -> int:
    """Half-width of the central stencil for a derivative of ``deriv_order``.

    4th order gives 2, 2 and 3 for the first three derivatives.
    """
    _check_stencil_args(deriv_order, accuracy)
    return (deriv_order + 1) // 2 - 1 + accuracy // 2


def _check_stencil_args(deriv_order: int, accuracy: int) -> None:
    if deriv_order not in (1, 2, 3):
        raise DomainError(f"deriv_order must be 1, 2 or 3, got {deriv_order}")
    if accuracy < 2 or accuracy % 2:
        raise DomainError(f"accuracy must be a positive even integer, got {accuracy}")


def _fornberg(deriv_order: int, offsets: list[int]) -> list[Fraction]:
    """Exact finite-difference weights at 0 for the given integer offsets."""
    n = len(offsets)
    c = [[Fraction(0)] * (deriv_order + 1) for _ in range(n)]
    c[0][0] = Fraction(1)
    c1 = Fraction(1)
    c4 = Fraction(offsets[0])
    for i in range(1, n):
        mn = min(i, deriv_order)
        c2 = Fraction(1)
        c5 = c4
        c4 = Fraction(offsets[i])
        for j in range(i):
            c3 = Fraction(offsets[i] - offsets[j])
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2
            for k in range(mn, 0, -1):
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3
            c[j][0] = c4 * c[j][0] / c3
        c1 = c2
    return [c[i][deriv_order] for i in range(n)]


@dataclass(frozen=True)
class Stencil:
    """Central stencil ``f^(d)(x) ~ sum(numerators[k] f(x + offsets[k] h)) / (denominator h^d)``."""

    deriv_order: int
    accuracy: int
    offsets: tuple[int, ...]
    numerators: tuple[int, ...]
    denominator: int

    @property
    def half_width(self) -> int:
        return self.offsets[-1]

    @property
    def weights(self) -> np.ndarray:
        return np.array(self.numerators, dtype=float) / self.denominator


@lru_cache(maxsize=None)
def central_stencil(deriv_order: int, accuracy: int = 4) -> Stencil:
    hw = stencil_half_width(deriv_order, accuracy)
    offsets = list(range(-hw, hw + 1))
    w = _fornberg(deriv_order, offsets)
    den = math.lcm(*(q.denominator for q in w))
    nums = tuple(int(q * den) for q in w)
    return Stencil(deriv_order, accuracy, tuple(offsets), nums, den)


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on ``[x_min, x_max]`` padded by ``halo`` ghost points per side.

    ``accuracy`` is the formal order of the central stencils used on this
    grid (4 gives the classic 5/5/7-point stencils).
    """

    x_min: float
    x_max: float
    n_interior: int
    halo: int = 0
    accuracy: int = 4

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise DomainError("grid bounds must be finite")
        if not self.x_max > self.x_min:
            raise DomainError("x_max must exceed x_min")
        if self.n_interior < 5:
            raise DomainError("n_interior must be at least 5")
        if self.halo < 0:
            raise DomainError("halo must be non-negative")
        if self.accuracy < 2 or self.accuracy % 2:
            raise DomainError("accuracy must be a positive even integer")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_interior - 1)

    @property
    def size(self) -> int:
        return self.n_interior + 2 * self.halo

    @property
    def points(self) -> np.ndarray:
        """All padded node coordinates."""
        return self.x_min + self.spacing * np.arange(-self.halo, self.n_interior + self.halo)

    @property
    def interior(self) -> slice:
        return slice(self.halo, self.halo + self.n_interior)

    @property
    def interior_points(self) -> np.ndarray:
        return self.points[self.interior]

    def with_halo(self, halo: int) -> "GridSpec":
        return GridSpec(self.x_min, self.x_max, self.n_interior, halo, self.accuracy)

    def nearest_node(self, x: float) -> int:
        """Padded-array index of the interior node nearest to ``x``.

        Raises
        ------
        DomainError
            If ``x`` is more than half a spacing outside the interior window.
        """
        h = self.spacing
        k = int(round((x - self.x_min) / h))
        if k < 0 or k >= self.n_interior or abs(x - (self.x_min + k * h)) > 0.5 * h + 1e-12:
            raise DomainError(
                f"x = {x} lies outside the interior window [{self.x_min}, {self.x_max}]"
            )
        return self.halo + k


@dataclass(frozen=True, eq=False)
class FieldSeries:
    """One unknown across space: an :class:`AlphaSeries` coefficient row per node.

    ``values`` has shape ``(grid.size, order + 1)``. Rows outside the valid
    window (``remaining_halo`` ghost points on each side of the interior) are
    NaN.
    """

    grid: GridSpec
    remaining_halo: int
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != self.grid.size:
            raise DomainError(
                f"values must have shape ({self.grid.size}, order+1), got {v.shape}"
            )
        if not 0 <= self.remaining_halo <= self.grid.halo:
            raise DomainError("remaining_halo must lie in [0, grid.halo]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def order(self) -> int:
        return self.values.shape[1] - 1

    @property
    def valid(self) -> slice:
        g = self.grid
        return slice(g.halo - self.remaining_halo, g.halo + g.n_interior + self.remaining_halo)

    def interior_coeffs(self) -> np.ndarray:
        return self.values[self.grid.interior]

    def _combine_halo(self, other: "FieldSeries") -> int:
        if other.grid != self.grid:
            raise DomainError("fields live on different grids")
        if other.order != self.order:
            raise OrderMismatchError(f"field orders differ: {self.order} vs {other.order}")
        return min(self.remaining_halo, other.remaining_halo)

    def _masked(self, values: np.ndarray, halo: int) -> "FieldSeries":
        g = self.grid
        out = np.full_like(values, np.nan)
        sl = slice(g.halo - halo, g.halo + g.n_interior + halo)
        out[sl] = values[sl]
        return FieldSeries(g, halo, out)

    def __add__(self, other: "FieldSeries") -> "FieldSeries":
        halo = self._combine_halo(other)
        return self._masked(self.values + other.values, halo)

    def __sub__(self, other: "FieldSeries") -> "FieldSeries":
        halo = self._combine_halo(other)
        return self._masked(self.values - other.values, halo)

    def scale(self, factor: float) -> "FieldSeries":
        return FieldSeries(self.grid, self.remaining_halo, self.values * float(factor))

    def mul(self, other: "FieldSeries") -> "FieldSeries":
        """Pointwise truncated series product."""
        halo = self._combine_halo(other)
        return self._masked(mul_coeffs(self.values, other.values), halo)

    def map_coeffs(self, fn: Callable[[np.ndarray], np.ndarray]) -> "FieldSeries":
        """Apply a coefficient-wise operator (e.g. ``J^alpha``) at every node."""
        return FieldSeries(self.grid, self.remaining_halo, fn(self.values))

    def with_order(self, order: int) -> "FieldSeries":
        """Zero-pad or truncate the coefficient axis to ``order``."""
        out = np.zeros((self.grid.size, order + 1))
        keep = min(order, self.order) + 1
        out[:, :keep] = self.values[:, :keep]
        return FieldSeries(self.grid, self.remaining_halo, out)

    def evaluate(self, t: float, alpha: float) -> np.ndarray:
        """Series values at time ``t`` on every padded node (NaN where invalid)."""
        return eval_coeffs(self.values, t, alpha)

    def interior_values(self, t: float, alpha: float) -> np.ndarray:
        return eval_coeffs(self.interior_coeffs(), t, alpha)

    @classmethod
    def zeros_like(cls, other: "FieldSeries") -> "FieldSeries":
        return other._masked(np.zeros_like(other.values), other.remaining_halo)


def fd_derivative(f: FieldSeries, deriv_order: int) -> FieldSeries:
    """Spatial derivative of every series coefficient.

    The stencil accuracy comes from ``f.grid.accuracy``; the result has
    ``remaining_halo`` reduced by the stencil half-width.

    Raises
    ------
    HaloError
        If ``f`` has fewer ghost points left than the stencil needs.
    """
    g = f.grid
    st = central_stencil(deriv_order, g.accuracy)
    hw = st.half_width
    if f.remaining_halo < hw:
        raise HaloError(hw, f.remaining_halo, f"order-{deriv_order} derivative")
    new_halo = f.remaining_halo - hw
    lo = g.halo - new_halo
    hi = g.halo + g.n_interior + new_halo
    src = f.values
    centre = src[lo:hi]
    acc = np.zeros((hi - lo, src.shape[1]))
    # the weights sum to zero, so differencing against the centre first makes
    # constants come out exactly zero
    for off, num in zip(st.offsets, st.numerators):
        if num and off:
            acc += num * (src[lo + off : hi + off] - centre)
    out = np.full_like(src, np.nan)
    out[lo:hi] = acc / (st.denominator * g.spacing**deriv_order)
    return FieldSeries(g, new_halo, out)


def sample_field(
    grid: GridSpec,
    fn: Callable,
    order: int,
    guard: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> FieldSeries:
    """Sample ``fn`` on the padded grid as a time-constant field of ``order``.

    ``guard`` returns a boolean mask of forbidden points (for instance the
    neighbourhood of a pole); any hit, or any non-finite sample, raises
    :class:`SingularityError`.
    """
    if order < 0:
        raise DomainError("order must be non-negative")
    x = grid.points
    if guard is not None:
        bad = np.asarray(guard(x), dtype=bool)
        if bad.any():
            raise SingularityError(
                f"grid point x = {x[np.argmax(bad)]} is too close to a singularity"
            )
    try:
        vals = np.asarray(fn(x), dtype=float)
        if vals.shape != x.shape:
            vals = np.broadcast_to(vals, x.shape).astype(float)
    except (TypeError, ValueError):
        vals = np.array([fn(float(xi)) for xi in x], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise SingularityError("sampled values are not finite on the padded grid")
    values = np.zeros((grid.size, order + 1))
    values[:, 0] = vals
    return FieldSeries(grid, grid.halo, values)
