r"""Gamma function and quadrature oracles for the fractional operators.

The oracles evaluate the Riemann-Liouville integral

.. math::

    J^\alpha f(t) = \frac{1}{\Gamma(\alpha)} \int_0^t (t - x)^{\alpha - 1} f(x)\,dx

and the Caputo derivative of order :math:`0 < \alpha < 1`

.. math::

    D^\alpha f(t) = \frac{1}{\Gamma(1 - \alpha)} \int_0^t (t - x)^{-\alpha} f'(x)\,dx

by brute-force quadrature. They are deliberately independent of the exact
power-rule calculus in :mod:`qhatm.fracseries` and exist to cross-check it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import DomainError

__all__ = [
    "gamma",
    "QuadratureSpec",
    "DEFAULT_QUADRATURE",
    "rl_integral_oracle",
    "caputo_oracle",
]

# Lanczos approximation, g = 7, 15 terms. Coefficients were fitted so the
# formula is exact at z = 0..14 (computed at 60 digits with mpmath).
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    1.0,
    676.5203681218835,
    -1259.1392167222818,
    771.3234287754377,
    -176.61502914598978,
    12.507343225028745,
    -0.13857103233328225,
    1.0091126294731374e-05,
    -3.434584225253105e-07,
    8.359337835712596e-07,
    -8.597755644539608e-07,
    6.046497338494928e-07,
    -2.9113287278906135e-07,
    8.589129313568227e-08,
    -1.1646065639867852e-08,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def gamma(x: float) -> float:
    """Gamma function for positive real arguments.

    Uses the Lanczos approximation (g = 7, 15 coefficients); arguments below
    one half are lifted with ``Gamma(x) = Gamma(x + 1) / x``. Relative error
    is below 1e-14 on (0, 50].

    Raises
    ------
    DomainError
        If ``x`` is not finite or not strictly positive.
    """
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"gamma is defined here only for finite x > 0, got {x!r}")
    if x < 0.5:
        return gamma(x + 1.0) / x
    z = x - 1.0
    acc = _LANCZOS_COEFFS[0]
    for k in range(1, len(_LANCZOS_COEFFS)):
        acc += _LANCZOS_COEFFS[k] / (z + k)
    base = z + _LANCZOS_G + 0.5
    # split the power so large arguments stay in range
    half = base ** ((z + 0.5) / 2.0)
    return _SQRT_2PI * half * math.exp(-base) * half * acc


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Gauss-Legendre rules for ``int_0^t (t - x)**(beta - 1) g(x) dx``.

    The interval is split at ``t/2``. On the right half the weak singularity
    of the kernel is removed by substituting ``t - x = (t/2) * s**e``; the
    integrand then carries ``s**(e*beta - 1)``, which is constant for
    ``e = 1/beta``. On the left half ``x = (t/2) * s**p`` absorbs an
    integrable singularity of ``g`` at the origin (such as the
    ``x**(alpha - 1)`` behaviour of the derivative of ``x**alpha``).

    Attributes
    ----------
    panel_count:
        Number of Gauss panels.
    nodes_per_panel:
        Gauss-Legendre nodes on each panel.
    endpoint_substitution_exponent:
        The exponent ``e``. ``None`` picks ``1/beta`` per kernel, which makes
        the kernel factor exactly one. Explicit values must satisfy
        ``e * beta >= 1`` for the integrand to stay bounded.
    origin_substitution_exponent:
        The exponent ``p``; ``g ~ x**(1/p - 1)`` near the origin becomes a
        bounded integrand.
    grading_ratio:
        Panels shrink geometrically by this factor toward both ends of
        ``[0, 1]``; ``None`` gives uniform panels. Grading absorbs the mild
        non-smoothness left by ``s**e`` and by integrands with a
        fractional-power behaviour at the origin.
    """

    panel_count: int = 16
    nodes_per_panel: int = 10
    endpoint_substitution_exponent: Optional[float] = None
    grading_ratio: Optional[float] = 0.35
    origin_substitution_exponent: float = 4.0

    def __post_init__(self):
        if self.panel_count < 1:
            raise DomainError("panel_count must be >= 1")
        if self.nodes_per_panel < 2:
            raise DomainError("nodes_per_panel must be >= 2")
        e = self.endpoint_substitution_exponent
        if e is not None and not e > 0:
            raise DomainError("endpoint_substitution_exponent must be > 0")
        if not self.origin_substitution_exponent >= 1:
            raise DomainError("origin_substitution_exponent must be >= 1")
        r = self.grading_ratio
        if r is not None and not 0 < r < 1:
            raise DomainError("grading_ratio must lie in (0, 1)")

    def panel_edges(self) -> np.ndarray:
        if self.grading_ratio is None or self.panel_count < 2:
            return np.linspace(0.0, 1.0, self.panel_count + 1)
        left_count = self.panel_count // 2
        right_count = self.panel_count - left_count
        left = 0.5 * self.grading_ratio ** np.arange(left_count - 1, -1, -1, dtype=float)
        right = 0.5 * self.grading_ratio ** np.arange(right_count - 1, -1, -1, dtype=float)
        return np.concatenate([[0.0], left, 1.0 - right[::-1][1:], [1.0]])

    def nodes_and_weights(self) -> tuple[np.ndarray, np.ndarray]:
        return _nodes_and_weights(self)


DEFAULT_QUADRATURE = QuadratureSpec()


@lru_cache(maxsize=32)
def _nodes_and_weights(spec: QuadratureSpec) -> tuple[np.ndarray, np.ndarray]:
    xg, wg = np.polynomial.legendre.leggauss(spec.nodes_per_panel)
    edges = spec.panel_edges()
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (hi - lo) * xg + 0.5 * (hi + lo)
    weights = 0.5 * (hi - lo) * wg
    nodes, weights = nodes.ravel(), weights.ravel()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _weakly_singular_integral(g: Callable, beta: float, t: float, spec: QuadratureSpec) -> float:
    """Return ``int_0^t (t - x)**(beta - 1) g(x) dx`` for ``0 < beta <= 1``."""
    e = spec.endpoint_substitution_exponent
    if e is None:
        e = 1.0 / beta
    elif e * beta < 1.0:
        raise DomainError(
            f"substitution exponent {e} leaves the kernel singular for order {beta}"
        )
    s, w = spec.nodes_and_weights()
    half = 0.5 * t
    # right half: t - x = half * s**e
    x_right = t - half * s**e
    right = half**beta * e * np.dot(w, s ** (e * beta - 1.0) * _values(g, x_right))
    # left half: x = half * s**p
    q = spec.origin_substitution_exponent
    x_left = half * s**q
    jac = half * q * s ** (q - 1.0)
    left = np.dot(w, (t - x_left) ** (beta - 1.0) * jac * _values(g, x_left))
    return float(left + right)


def _values(g: Callable, x: np.ndarray) -> np.ndarray:
    return np.asarray(_evaluate(g, x), dtype=float)


def _evaluate(g: Callable, x: np.ndarray):
    try:
        out = g(x)
        if np.shape(out) == np.shape(x):
            return out
    except (TypeError, ValueError):
        pass
    return np.array([g(float(xi)) for xi in x])


def rl_integral_oracle(
    f: Callable, alpha: float, t: float, spec: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """Riemann-Liouville integral ``J^alpha f(t)`` by quadrature.

    ``f`` may be vectorised over numpy arrays; scalar-only callables are
    evaluated node by node.
    """
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t}")
    return _weakly_singular_integral(f, alpha, t, spec) / gamma(alpha)


def caputo_oracle(
    df: Callable, alpha: float, t: float, spec: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """Caputo derivative ``D^alpha f(t)`` for ``0 < alpha < 1`` by quadrature.

    Takes the first derivative ``df = f'`` rather than ``f`` itself. The
    integer case ``alpha = 1`` is the ordinary derivative and is left to the
    caller.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t}")
    beta = 1.0 - alpha
    return _weakly_singular_integral(df, beta, t, spec) / gamma(beta)
