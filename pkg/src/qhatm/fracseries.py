"""Truncated series in the fractional-power basis ``{t**(k*alpha)}``.

A series of order ``M`` is stored as ``M + 1`` raw coefficients ``c_k`` that
multiply ``t**(k*alpha)`` directly. Because ``t**(i*alpha) * t**(j*alpha)``
stays on the lattice, products are plain truncated convolutions; the Gamma
ratios only enter through fractional integration and differentiation.

The ``*_coeffs`` functions work on numpy arrays whose last axis holds the
coefficients, so the same code handles a single series and a whole grid of
them. :class:`AlphaSeries` wraps the one-dimensional case.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, OrderMismatchError
from .specialfn import gamma

__all__ = [
    "AlphaSeries",
    "series_add",
    "series_mul",
    "series_jalpha",
    "series_caputo",
    "series_eval",
    "mul_coeffs",
    "jalpha_coeffs",
    "caputo_coeffs",
    "eval_coeffs",
    "time_powers",
    "jalpha_ratios",
]


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")


def _check_orders(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[-1] != b.shape[-1]:
        raise OrderMismatchError(
            f"series orders differ: {a.shape[-1] - 1} vs {b.shape[-1] - 1}"
        )


@lru_cache(maxsize=256)
def jalpha_ratios(alpha: float, order: int) -> np.ndarray:
    """``Gamma(k*alpha + 1) / Gamma((k+1)*alpha + 1)`` for ``k = 0..order-1``."""
    _check_alpha(alpha)
    r = np.array([gamma(k * alpha + 1.0) / gamma((k + 1) * alpha + 1.0) for k in range(order)])
    r.setflags(write=False)
    return r


def mul_coeffs(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Truncated Cauchy product along the last axis.

    Terms ``a_i b_j`` and ``a_j b_i`` are added pairwise before accumulating,
    which makes the result bitwise symmetric in ``a`` and ``b``.
    """
    _check_orders(a, b)
    size = a.shape[-1]
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
    for k in range(size):
        acc = out[..., k]
        for i in range((k + 1) // 2):
            j = k - i
            acc += a[..., i] * b[..., j] + a[..., j] * b[..., i]
        if k % 2 == 0:
            h = k // 2
            acc += a[..., h] * b[..., h]
    return out


def jalpha_coeffs(c: np.ndarray, alpha: float) -> np.ndarray:
    """Fractional integral: shifts every coefficient up one slot, drops ``c_M``."""
    size = c.shape[-1]
    ratios = jalpha_ratios(float(alpha), size - 1)
    out = np.zeros_like(c, dtype=float)
    out[..., 1:] = c[..., :-1] * ratios
    return out


def caputo_coeffs(c: np.ndarray, alpha: float) -> np.ndarray:
    """Caputo derivative: shifts every coefficient down one slot, kills ``c_0``."""
    size = c.shape[-1]
    ratios = jalpha_ratios(float(alpha), size - 1)
    out = np.zeros_like(c, dtype=float)
    out[..., :-1] = c[..., 1:] / ratios
    return out


def time_powers(t: float, alpha: float, order: int) -> np.ndarray:
    """``[t**0, t**alpha, ..., t**(order*alpha)]`` with ``t**0 == 1`` at ``t = 0``."""
    if t < 0:
        raise DomainError(f"t must be non-negative, got {t}")
    _check_alpha(alpha)
    p = np.ones(order + 1)
    if t == 0.0:
        p[1:] = 0.0
    else:
        p[1:] = t ** (alpha * np.arange(1, order + 1))
    return p


def eval_coeffs(c: np.ndarray, t: float, alpha: float) -> np.ndarray:
    """Sum ``c_k t**(k*alpha)`` along the last axis, in increasing ``k``."""
    powers = time_powers(t, alpha, c.shape[-1] - 1)
    out = c[..., 0] * powers[0]
    for k in range(1, c.shape[-1]):
        out = out + c[..., k] * powers[k]
    return out


@dataclass(frozen=True)
class AlphaSeries:
    """A single truncated series ``sum_k coeffs[k] * t**(k*alpha)``.

    ``alpha`` is not part of the value; it is supplied to the calculus and
    evaluation functions, so one set of coefficients can be reused across
    orders of differentiation.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise DomainError("coeffs must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(c)):
            raise DomainError("series coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    @classmethod
    def zeros(cls, order: int) -> "AlphaSeries":
        return cls(np.zeros(order + 1))

    @classmethod
    def constant(cls, value: float, order: int) -> "AlphaSeries":
        c = np.zeros(order + 1)
        c[0] = value
        return cls(c)

    def __add__(self, other: "AlphaSeries") -> "AlphaSeries":
        return series_add(self, other)

    def __mul__(self, other):
        if isinstance(other, AlphaSeries):
            return series_mul(self, other)
        return AlphaSeries(self.coeffs * float(other))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, AlphaSeries):
            return NotImplemented
        return np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def __call__(self, t: float, alpha: float) -> float:
        return series_eval(self, t, alpha)


def series_add(a: AlphaSeries, b: AlphaSeries) -> AlphaSeries:
    _check_orders(a.coeffs, b.coeffs)
    return AlphaSeries(a.coeffs + b.coeffs)


def series_mul(a: AlphaSeries, b: AlphaSeries) -> AlphaSeries:
    return AlphaSeries(mul_coeffs(a.coeffs, b.coeffs))


def series_jalpha(a: AlphaSeries, alpha: float) -> AlphaSeries:
    """Apply ``J^alpha`` using ``J^alpha t**(k a) = G(ka+1)/G((k+1)a+1) t**((k+1)a)``."""
    _check_alpha(alpha)
    return AlphaSeries(jalpha_coeffs(a.coeffs, alpha))


def series_caputo(a: AlphaSeries, alpha: float) -> AlphaSeries:
    """Apply the Caputo derivative of order ``alpha`` term by term."""
    _check_alpha(alpha)
    return AlphaSeries(caputo_coeffs(a.coeffs, alpha))


def series_eval(a: AlphaSeries, t: float, alpha: float) -> float:
    return float(eval_coeffs(a.coeffs, t, alpha))
